#pragma once

#include "guided/scalar_map.hpp"
#include "guided/system.hpp"

namespace guided {

// Root of f on [a, b] given f(a) and f(b) of opposite sign (or zero); runs to the
// resolution of the doubles unless `xtol` stops it earlier.
double bisect(const RealFn& f, double a, double b, double xtol = 0.0);

struct ZeroSetOptions {
  int grid = 2000;
  double tol = 1e-9;
};

// Closed intervals where g vanishes: sign changes are bisected, tangential zeros are located
// as minima of |g| (using g' when available), and runs of grid nodes with |g| < tol merge
// into intervals.
gds::IntervalSet find_zero_set(const RealFn& g, const RealFn& dg, double a, double b,
                               const ZeroSetOptions& opts = {});

}  // namespace guided
