#include "spectral/ode.hpp"

#include <cmath>
#include <sstream>

#include <boost/numeric/odeint.hpp>

namespace spectral::ode {

namespace odeint = boost::numeric::odeint;

std::vector<State> integrate(const Rhs& f, State y0, double x0, const std::vector<double>& xs,
                             const Options& opt)
{
    std::vector<State> out;
    if (xs.empty()) return out;
    const double dir = (xs.back() >= x0) ? 1.0 : -1.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double prev = i == 0 ? x0 : xs[i - 1];
        if (!std::isfinite(xs[i]) || dir * (xs[i] - prev) < 0.0)
            throw ArgumentError("ode: output points must be finite and ordered away from the start");
    }
    // odeint reports each distinct time once, so repeated points are mapped back afterwards
    std::vector<double> times{x0};
    std::vector<std::size_t> slot(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (xs[i] != times.back()) times.push_back(xs[i]);
        slot[i] = times.size() - 1;
    }
    std::vector<State> states;
    states.reserve(times.size());
    auto observer = [&](const State& y, double) { states.push_back(y); };
    auto rhs = [&f](const State& y, State& dy, double x) { f(y, dy, x); };
    auto stepper = odeint::make_dense_output(opt.atol, opt.rtol, odeint::runge_kutta_dopri5<State>());
    try {
        odeint::integrate_times(stepper, rhs, y0, times.begin(), times.end(), dir * opt.h0, observer,
                                odeint::max_step_checker(200000));
    } catch (const odeint::odeint_error& e) {
        std::ostringstream os;
        os << "stiffness error: step control failed between x=" << x0 << " and x=" << xs.back() << " ("
           << e.what() << ")";
        throw StabilityError(os.str());
    }
    if (states.size() != times.size()) throw StabilityError("stiffness error: integration stopped early");
    out.reserve(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) out.push_back(states[slot[i]]);
    for (const auto& s : out)
        for (const auto& v : s)
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
                throw StabilityError("stiffness error: solution overflowed");
    return out;
}

State integrate_to(const Rhs& f, State y0, double x0, double x1, const Options& opt)
{
    if (x1 == x0) return y0;
    return integrate(f, std::move(y0), x0, {x1}, opt).front();
}

}  // namespace spectral::ode
