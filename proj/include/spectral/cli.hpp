#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <string>

#include "spectral/common.hpp"

namespace spectral {

enum class Subcommand { det, tau, potential, gl, green, xi, phase, curve, verify };

Subcommand parse_subcommand(const std::string& name);

struct Grid {
    double a = 0.0;
    double b = 1.0;
    int n = 2;

    double at(int i) const { return n == 1 ? a : a + (b - a) * i / (n - 1); }
};

// "a:b:n" with a < b and n >= 2
Grid parse_grid(const std::string& text);

struct RunConfig {
    Subcommand subcommand = Subcommand::verify;
    std::string system_path;
    std::string canonical_path;
    std::string potential;  // "free" or "soliton" for xi without a system
    int nodes = 128;
    std::string map = "auto";  // auto | rational | exponential
    double scale = 1.0;
    Grid x_grid{0.0, 5.0, 6};
    Grid lambda_grid{-2.0, 2.0, 41};
    Grid kappa_grid{0.5, 4.0, 36};
    double x = 1.0;
    double eps = 1e-6;
    double lambda = -25.0;
    double z = 1.0;
    int terms = 20;
    int ell = 1;
    std::string constants;  // "c1=1,c2=0"
    std::string jet;        // "u=-2,u1=0,u2=-8"
    std::string at;         // "x=1"
    std::uint64_t seed = 20240601;
    std::map<std::string, double> tolerances;
    std::string output;  // empty: standard output
    std::string format;  // csv | json; empty picks the subcommand default
};

// Runs one subcommand. Exit status: 0 success, 1 failed check or numerical failure,
// 2 input error. Diagnostics go to err.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

// Worker count from SPECTRAL_DET_THREADS (default: hardware concurrency).
unsigned worker_count();
// Calls f(i) for i in [0, n) on the worker pool; results must be written by index.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& f);

}  // namespace spectral
