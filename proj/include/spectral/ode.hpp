#pragma once

#include <functional>
#include <vector>

#include "spectral/common.hpp"

namespace spectral::ode {

using State = std::vector<cplx>;
using Rhs = std::function<void(const State& y, State& dy, double x)>;

struct Options {
    double rtol = 1e-11;
    double atol = 1e-13;
    double h0 = 1e-3;
};

// Adaptive Dormand-Prince 5(4) with dense output. Returns the state at each
// point of xs, which must be ordered monotonically away from x0 (either direction).
std::vector<State> integrate(const Rhs& f, State y0, double x0, const std::vector<double>& xs,
                             const Options& opt = {});

State integrate_to(const Rhs& f, State y0, double x0, double x1, const Options& opt = {});

}  // namespace spectral::ode
