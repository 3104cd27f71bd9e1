// Acceptance suite: one line per criterion, nonzero exit if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "spectral/airy.hpp"
#include "spectral/hankel.hpp"
#include "spectral/kdv.hpp"
#include "spectral/quadrature.hpp"
#include "spectral/realization.hpp"
#include "spectral/schrod.hpp"
#include "spectral/statecalc.hpp"
#include "spectral/system_io.hpp"

using namespace spectral;

namespace {

const std::string data = SPECTRAL_TEST_DATA;
const std::vector<std::string> corpus{"scalar", "two_soliton", "rational_two_pole", "howland"};

struct Outcome {
    bool pass;
    std::string detail;
};

std::string fmt(const char* f, double v)
{
    char buf[128];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

Realization load(const std::string& name) { return load_system(data + "/" + name + ".json"); }

QuadratureRule corpus_rule(const Realization& sys, int n = 128)
{
    const auto* d = std::get_if<DiagonalRealization>(&sys);
    return build_rule(n, d && d->algebraic ? MapKind::rational : MapKind::exponential, 1.0);
}

MatC random_matrix(std::mt19937_64& rng, Eigen::Index n)
{
    std::normal_distribution<double> g;
    MatC M(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) M(i, j) = cplx(g(rng), g(rng)) / std::sqrt(static_cast<double>(n));
    return M;
}

std::vector<double> linspace(double a, double b, int n)
{
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = a + (b - a) * i / (n - 1);
    return v;
}

// even bound state of -d^2 - 2 sech^2 x by shooting from x = 12 towards psi'(0) = 0
double shoot_soliton_eigenvalue()
{
    const Potential u = potential_soliton();
    auto slope = [&](double lam) {
        const double k = std::sqrt(-lam);
        const auto tr = solve_schrodinger(u, lam, 12.0, 0.0, 1.0, -k, {0.0});
        return (tr[0].dpsi / tr[0].psi).real();
    };
    double a = -1.6, b = -0.5;
    double fa = slope(a);
    for (int i = 0; i < 60; ++i) {
        const double m = 0.5 * (a + b), fm = slope(m);
        if ((fm > 0) == (fa > 0)) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    return 0.5 * (a + b);
}

Outcome determinant_equality()
{
    const StateFamily sc(load("scalar"));
    const Realization scalar = load("scalar");
    const cplx t0 = sc.tau(0.0);
    const cplx dh = fredholm_det(hankel_operator(make_impulse_response(scalar), corpus_rule(scalar)), 1.0);
    double worst_abs = std::max(std::abs(t0 - 1.5), std::abs(dh - 1.5));
    double worst_rel = 0.0;
    for (const char* name : {"rational_two_pole", "howland"}) {
        const Realization sys = load(name);
        const cplx tau0 = StateFamily(sys).tau(0.0);
        const cplx d = fredholm_det(hankel_operator(make_impulse_response(sys), corpus_rule(sys)), 1.0);
        worst_rel = std::max(worst_rel, std::abs(tau0 - d) / std::abs(tau0));
    }
    return {worst_abs < 1e-9 && worst_rel < 1e-7,
            fmt("scalar |err| %.2e", worst_abs) + fmt(", relative %.2e", worst_rel)};
}

Outcome carleman()
{
    double lo = INFINITY, hi = -INFINITY;
    for (int n : {64, 128}) {
        const auto op = discretize_kernel([](double x, double y) { return cplx(1.0 / (x + y)); },
                                          build_rule(n, MapKind::rational, 1.0));
        for (cplx e : eigenvalues(op)) {
            lo = std::min(lo, e.real());
            hi = std::max(hi, e.real());
        }
    }
    return {lo >= -1e-8 && hi <= std::numbers::pi + 1e-6, fmt("min %.3e", lo) + fmt(", max %.10f", hi)};
}

Outcome gelfand_levitan()
{
    const std::vector<double> pts{0.5, 1.0, 1.5, 2.0, 2.5};
    double gl = 0.0, ld = 0.0;
    for (const auto& name : corpus) {
        const Realization sys = load(name);
        const StateFamily sf(sys);
        const QuadratureRule rule = corpus_rule(sys);
        const ImpulseResponse phi = make_impulse_response(Realization(sf.system()));
        for (double x : pts) {
            for (double y : pts) gl = std::max(gl, gl_residual(sf, phi, x, y, rule));
            ld = std::max(ld, gl_logderiv_check(sf, x, 1e-4));
        }
    }
    return {gl < 1e-7 && ld < 1e-6, fmt("residual %.2e", gl) + fmt(", log-derivative %.2e", ld)};
}

Outcome dyson()
{
    double worst = 0.0;
    for (const auto& name : corpus) {
        const StateFamily sf(load(name));
        for (double x : linspace(0.2, 5.0, 25))
            worst = std::max(worst, std::abs(sf.potential(x) - dyson_potential(sf, x, 1e-3, true)));
    }
    return {worst < 1e-6, fmt("max %.2e", worst)};
}

Outcome bracket_homomorphism()
{
    std::mt19937_64 rng(2024);
    double mult = 0.0, order = INFINITY;
    const double xs[3] = {0.3, 0.8, 1.5};
    for (const char* name : {"scalar", "two_soliton", "rational_two_pole"}) {
        const StateFamily sf(load(name));
        const auto n = sf.dim();
        for (int p = 0; p < 20; ++p) {
            const double x = xs[p % 3];
            const MatC X = random_matrix(rng, n), Y = random_matrix(rng, n), X1 = random_matrix(rng, n);
            const cplx bx = sf.bracket(X, x), by = sf.bracket(Y, x);
            const cplx bxy = sf.bracket(star(sf, X, Y, x), x);
            mult = std::max(mult, std::abs(bxy - bx * by) / std::max(1.0, std::abs(bx * by)));
            auto fam = [&](double s) -> MatC { return X + s * X1; };
            const cplx lhs = sf.bracket(dpartial(sf, fam, x, 1e-3), x);
            auto fd = [&](double h) {
                return (sf.bracket(fam(x + h), x + h) - sf.bracket(fam(x - h), x - h)) / (2.0 * h);
            };
            const double e1 = std::abs(fd(2e-2) - lhs), e2 = std::abs(fd(1e-2) - lhs);
            if (e1 > 1e-13) order = std::min(order, std::log2(e1 / e2));
        }
    }
    return {mult < 1e-10 && order >= 1.9, fmt("multiplicativity %.2e", mult) + fmt(", order %.3f", order)};
}

Outcome green_cross_check()
{
    double worst = 0.0, darboux = 0.0;
    const std::vector<double> xs{0.5, 1.5};
    for (const char* name : {"scalar", "two_soliton"}) {
        auto sf = std::make_shared<const StateFamily>(load(name));
        const Potential u = potential_from_system(sf);
        for (double lam : {-25.0, -100.0}) {
            const auto g = green_diag_ode(u, xs, lam);
            for (std::size_t i = 0; i < xs.size(); ++i) {
                const cplx s = green_diag_series(*sf, xs[i], lam, 20).value;
                worst = std::max(worst, std::abs(s - g[i]) / std::abs(g[i]));
                const double h = 1e-3;
                const cplx dg = (green_diag_series(*sf, xs[i] + h, lam, 20).value -
                                 green_diag_series(*sf, xs[i] - h, lam, 20).value) /
                                (2.0 * h);
                // the field is 2 d/dx of the diagonal of (L - lambda)^{-1}
                darboux = std::max(darboux, std::abs(darboux_field(*sf, xs[i], lam) - 2.0 * dg));
            }
        }
    }
    return {worst < 1e-6 && darboux < 1e-5, fmt("relative %.2e", worst) + fmt(", Darboux %.2e", darboux)};
}

Outcome baker_akhiezer_residual()
{
    const StateFamily sf(load("scalar"));
    double worst = 0.0;
    const double h = 1e-2;
    for (double kappa : {0.5, 1.0, 4.0})
        for (double x : {0.5, 1.0, 2.0}) {
            auto f = [&](double s) { return baker_akhiezer(sf, s, kappa); };
            const cplx d2 = (-f(x + 2 * h) + 16.0 * f(x + h) - 30.0 * f(x) + 16.0 * f(x - h) - f(x - 2 * h)) /
                            (12.0 * h * h);
            worst = std::max(worst, std::abs(-d2 + sf.potential(x) * f(x) - kappa * f(x)));
        }
    return {worst < 1e-5, fmt("max %.2e", worst)};
}

Outcome burchnall_chaundy()
{
    const auto t0 = std::chrono::steady_clock::now();
    bool ok = true;
    for (int ell = 0; ell <= 2; ++ell) {
        std::vector<mpq_class> cs;
        for (int i = 0; i <= ell; ++i) cs.push_back(mpq_class(2 * i + 1, 7));
        ok = ok && burchnall_chaundy_check(ell, cs).is_zero();
        const auto fs = kdv_recursion(ell, cs);
        const Termination term(ell, fs);
        for (const auto& q : q_poly(ell, fs, &term).coeffs) ok = ok && term.reduce(d_dx(q)).is_zero();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return {ok && secs < 60.0, std::string(ok ? "exact zero" : "nonzero remainder") + fmt(", %.2f s", secs)};
}

Outcome soliton_curve()
{
    const double e0 = shoot_soliton_eigenvalue();
    const StateFamily sf(make_matrix_realization(MatC::Constant(1, 1, 1.0), VecC::Constant(1, 1.0),
                                                 RowC::Constant(1, 2.0)));
    const auto hc = spectral_curve(1, {1, 0}, sf, 0.3);
    double best = INFINITY;
    for (cplx z : hc.branch_points) best = std::min(best, std::abs(z - e0));
    return {best < 1e-4 && hc.degenerate,
            fmt("shooting %.8f", e0) + fmt(", distance %.2e", best) + (hc.degenerate ? ", degenerate" : "")};
}

Outcome xi_function()
{
    const Potential free = potential_free();
    double worst = 0.0;
    for (double lam : {0.5, 1.0, 2.0}) worst = std::max(worst, std::abs(xi(free, 0.0, lam) - 0.5));
    const Potential sol = potential_soliton();
    double a = -1.5, b = -0.5;
    if (!(xi(sol, 0.0, a) < 0.5 && xi(sol, 0.0, b) > 0.5)) return {false, "no crossing in [-1.5, -0.5]"};
    while (b - a > 1e-6) {
        const double m = 0.5 * (a + b);
        (xi(sol, 0.0, m) < 0.5 ? a : b) = m;
    }
    const double at = 0.5 * (a + b);
    const double jump = xi(sol, 0.0, at + 0.01) - xi(sol, 0.0, at - 0.01);
    const double where = std::abs(at - shoot_soliton_eigenvalue());
    return {worst < 1e-4 && std::abs(jump - 1.0) < 1e-3 && where < 1e-3,
            fmt("free %.2e", worst) + fmt(", jump %.6f", jump) + fmt(" at %.6f", at)};
}

Outcome debranges()
{
    const auto cs = canonical_schrodinger(potential_free());
    double worst = 0.0;
    for (double k : {0.5, 1.0, 2.0, 4.0}) worst = std::max(worst, phase_derivative_check(cs, 1.0, k));
    std::vector<cplx> E;
    for (double z : linspace(-1000.0, 1000.0, 4001)) E.push_back(cplx(z, 1.0));
    const int w = winding_number(theta_from_e(E));
    return {worst < 1e-6 && w == 1, fmt("residual %.2e", worst) + ", winding " + std::to_string(w)};
}

Outcome airy_determinant()
{
    constexpr double reference = 0.96937282835526;
    auto K = [](double x, double y) { return airy_kernel(x, y); };
    const cplx d41 = fredholm_det(discretize_kernel(K, build_rule(41, MapKind::exponential, 1.0)), -1.0);
    const cplx d81 = fredholm_det(discretize_kernel(K, build_rule(81, MapKind::exponential, 1.0)), -1.0);
    const double change = std::abs(d41 - d81), off = std::abs(d81 - reference);
    return {change < 2e-4 && off < 2e-4, fmt("det %.14f", d81.real()) + fmt(", change %.2e", change)};
}

Outcome toeplitz()
{
    std::mt19937_64 rng(77);
    std::normal_distribution<double> g;
    double worst = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
        TrigPolynomial f, h;
        for (int k = -6; k <= 6; ++k) {
            f.coeffs[k] = cplx(g(rng), g(rng));
            h.coeffs[k] = cplx(g(rng), g(rng));
        }
        const auto r = toeplitz_cocycle(f, h, 14);
        worst = std::max(worst, std::abs(r.lhs - r.rhs) / std::max(1.0, std::abs(r.rhs)));
    }
    return {worst < 1e-12, fmt("max %.2e", worst)};
}

Outcome drach()
{
    const auto r = drach_check(potential_soliton(), -9.0, linspace(-2.0, 2.0, 21));
    return {r.ode_residual < 1e-5 && r.mu2_spread < 1e-6,
            fmt("defect %.2e", r.ode_residual) + fmt(", mu^2 spread %.2e", r.mu2_spread)};
}

}  // namespace

int main()
{
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"determinant equality", determinant_equality},
        {"Carleman spectrum", carleman},
        {"Gelfand-Levitan residual", gelfand_levitan},
        {"Dyson consistency", dyson},
        {"bracket homomorphism", bracket_homomorphism},
        {"Green cross-check", green_cross_check},
        {"Baker-Akhiezer residual", baker_akhiezer_residual},
        {"Burchnall-Chaundy", burchnall_chaundy},
        {"soliton curve", soliton_curve},
        {"xi function", xi_function},
        {"de Branges phase", debranges},
        {"Airy determinant", airy_determinant},
        {"Toeplitz cocycle", toeplitz},
        {"Drach equation", drach},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (!o.pass) ++failed;
        std::printf("%s %2zu %-26s %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                    o.detail.c_str(), secs);
        std::fflush(stdout);
    }
    std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
