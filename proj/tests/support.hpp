#pragma once

#include <random>
#include <string>

#include "guided/config.hpp"

namespace support {

inline std::string config_path(const std::string& name) {
  return std::string(GDS_SOURCE_DIR) + "/configs/" + name;
}

inline guided::config::JobConfig load(const std::string& name) {
  return guided::config::load_config(config_path(name));
}

inline std::string literal(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> digit(1, 9);
  std::uniform_int_distribution<int> pick(0, 2);
  switch (pick(rng)) {
    case 0: return std::to_string(digit(rng));
    case 1: return std::to_string(digit(rng)) + "." + std::to_string(digit(rng));
    default: return "0." + std::to_string(digit(rng));
  }
}

inline std::string polynomial(std::mt19937_64& rng, int max_degree = 5) {
  std::uniform_int_distribution<int> deg(0, max_degree);
  std::uniform_int_distribution<int> sign(0, 1);
  int d = deg(rng);
  std::string s = literal(rng);
  for (int k = 1; k <= d; ++k) {
    s += sign(rng) ? " + " : " - ";
    s += literal(rng) + "*t^" + std::to_string(k);
  }
  return s;
}

// Smooth on all of R: no tan, abs, log of a possibly negative argument or division by zero.
inline std::string smooth(std::mt19937_64& rng, int level = 3) {
  std::uniform_int_distribution<int> pick(0, level <= 0 ? 1 : 9);
  switch (pick(rng)) {
    case 0: return "t";
    case 1: return literal(rng);
    case 2: return "sin(" + smooth(rng, level - 1) + ")";
    case 3: return "cos(" + smooth(rng, level - 1) + ")";
    case 4: return "tanh(" + smooth(rng, level - 1) + ")";
    case 5: return "exp(sin(" + smooth(rng, level - 1) + "))";
    case 6: return "log(1 + (" + smooth(rng, level - 1) + ")^2)";
    case 7: return "sqrt(1 + (" + smooth(rng, level - 1) + ")^2)";
    case 8: return "(" + smooth(rng, level - 1) + ")*(" + smooth(rng, level - 1) + ")";
    default: return "(" + smooth(rng, level - 1) + ") - " + polynomial(rng, 2);
  }
}

}  // namespace support
