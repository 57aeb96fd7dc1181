#include "guided/cli.hpp"

int main(int argc, char** argv) { return guided::cli::run(argc, argv); }
