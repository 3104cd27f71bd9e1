#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <boost/math/special_functions/airy.hpp>

#include "spectral/airy.hpp"
#include "spectral/quadrature.hpp"
#include "spectral/schrod.hpp"
#include "spectral/statecalc.hpp"

using namespace spectral;

namespace {

const double pi = std::numbers::pi;

// closed-form resolvent diagonal of -d^2 - 2 sech^2 x, k = sqrt(-lambda)
cplx soliton_green(double x, cplx lambda)
{
    const cplx k = std::sqrt(-lambda);
    const double t = std::tanh(x);
    return (k * k - t * t) / (2.0 * k * (k * k - 1.0));
}

// brute-force xi: principal argument of the closed-form diagonal, negative arguments snapped
double xi_oracle(cplx g)
{
    double a = std::arg(g);
    if (a < 0.0) a = (a < -pi / 2.0) ? pi : 0.0;
    return a / pi;
}

// even bound state of the soliton by shooting from the right: psi'(0) = 0
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

std::vector<double> linspace(double a, double b, int n)
{
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = a + (b - a) * i / (n - 1);
    return v;
}

}  // namespace

TEST_CASE("free Schrodinger solutions")
{
    const Potential u = potential_free();
    auto tr = solve_schrodinger(u, 1.0, 0.0, pi, 1.0, 0.0, {pi});
    CHECK(std::abs(tr[0].psi + 1.0) < 1e-9);
    tr = solve_schrodinger(u, -1.0, 0.0, 1.0, 1.0, 1.0, {1.0});
    CHECK(std::abs(tr[0].psi - std::exp(1.0)) < 1e-8);
    CHECK(solve_schrodinger(u, -1.0, 0.0, 1.0, 1.0, 1.0).size() == 101);
}

TEST_CASE("soliton bound state")
{
    const Potential u = potential_soliton();
    const auto tr = solve_schrodinger(u, -1.0, 10.0, 0.0, std::exp(-10.0), -std::exp(-10.0), {0.0});
    CHECK(std::abs(tr[0].dpsi / tr[0].psi) < 1e-6);
    CHECK(std::abs(shoot_soliton_eigenvalue() + 1.0) < 1e-6);
}

TEST_CASE("Weyl solutions")
{
    const auto xs = linspace(-3.0, 3.0, 13);
    const auto w = weyl_solutions(potential_free(), -2.0, xs);
    const cplx k = std::sqrt(2.0);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const cplx ratio = w.psi_p[i] / std::exp(-k * xs[i]);
        CHECK(std::abs(ratio / (w.psi_p[0] / std::exp(-k * xs[0])) - 1.0) < 1e-9);
    }
    for (cplx lam : {cplx(-2.0), cplx(-0.3, 0.5), cplx(1.0, 0.2)}) {
        const auto ws = weyl_solutions(potential_soliton(0.4), lam, xs);
        std::vector<cplx> wr(xs.size());
        cplx mean = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i) mean += (wr[i] = ws.wronskian(i));
        mean /= static_cast<double>(xs.size());
        double var = 0.0;
        for (cplx v : wr) var += std::norm(v - mean);
        CHECK(std::sqrt(var / xs.size()) / std::abs(mean) < 1e-8);
    }
    for (double X : {30.0, 45.0}) {
        const auto a = weyl_solutions(potential_soliton(), -0.6, {0.5});
        const auto b = weyl_solutions(potential_soliton(), -0.6, {0.5}, X);
        const cplx ga = a.psi_p[0] * a.psi_m[0] / a.wronskian(0), gb = b.psi_p[0] * b.psi_m[0] / b.wronskian(0);
        CHECK(std::abs(ga - gb) < 1e-9 * std::abs(ga));
    }
    CHECK_THROWS(weyl_solutions(potential_from_function([](double x) { return x; }, -INFINITY, INFINITY, false, INFINITY), -1.0, xs));
}

TEST_CASE("Green's diagonal by Wronskian")
{
    CHECK(std::abs(green_diag_ode(potential_free(), 0.3, -1.0) - 0.5) < 1e-10);
    CHECK(std::abs(green_diag_ode(potential_free(), 0.3, -4.0) - 0.25) < 1e-10);
    for (double x : {-1.0, 0.0, 0.5, 2.0})
        for (cplx lam : {cplx(-25.0), cplx(-3.0), cplx(-0.5, 0.1), cplx(2.0, 0.3)})
            CHECK(std::abs(green_diag_ode(potential_soliton(), x, lam) - soliton_green(x, lam)) <
                  1e-8 * std::abs(soliton_green(x, lam)));

    // the soliton as a realization: A = 1, B = 1, C = 2
    const StateFamily sf(make_matrix_realization(MatC::Constant(1, 1, 1.0), VecC::Constant(1, 1.0),
                                                 RowC::Constant(1, 2.0)));
    for (double x : {0.0, 0.7}) {
        const cplx s = green_diag_series(sf, x, -25.0, 20).value;
        CHECK(std::abs(green_diag_ode(potential_soliton(), x, -25.0) - s) < 1e-6 * std::abs(s));
    }
    CHECK_THROWS_AS(green_diag_ode(potential_soliton(), 0.0, -1.0), SingularError);
}

TEST_CASE("xi function")
{
    const Potential free = potential_free();
    for (double lam : {0.5, 1.0, 2.0}) CHECK(std::abs(xi(free, 0.0, lam, 1e-6) - 0.5) < 1e-4);
    const double below = xi(free, 0.0, -1.0, 1e-6);
    CHECK(std::abs(below - xi_oracle(1.0 / (2.0 * std::sqrt(-cplx(-1.0, 1e-6))))) < 1e-12);
    CHECK(std::abs(below - 0.0) < 1e-4);

    const Potential sol = potential_soliton();
    const double e0 = shoot_soliton_eigenvalue();
    // locate the crossing of 1/2 by bisection, then measure the jump across it
    double a = -1.5, b = -0.5;
    REQUIRE(xi(sol, 0.0, a) < 0.5);
    REQUIRE(xi(sol, 0.0, b) > 0.5);
    while (b - a > 1e-6) {
        const double m = 0.5 * (a + b);
        (xi(sol, 0.0, m) < 0.5 ? a : b) = m;
    }
    const double jump_at = 0.5 * (a + b);
    const double jump = xi(sol, 0.0, jump_at + 0.01) - xi(sol, 0.0, jump_at - 0.01);
    CHECK(std::abs(jump - 1.0) < 1e-3);
    CHECK(std::abs(jump_at - e0) < 1e-3);
    for (double lam : {-1.3, -0.7})
        CHECK(std::abs(xi(sol, 0.0, lam) - xi_oracle(soliton_green(0.0, cplx(lam, 1e-6)))) < 1e-6);
}

TEST_CASE("property: xi lies in [0, 1] and is 1/2 where G is imaginary")
{
    std::mt19937_64 rng(43);
    std::uniform_real_distribution<double> L(-3.0, 3.0), X(-2.0, 2.0);
    const Potential sol = potential_soliton(0.3);
    for (int trial = 0; trial < 30; ++trial) {
        const double lam = L(rng), x = X(rng);
        if (std::abs(lam + 1.0) < 1e-3) continue;
        const double v = xi(sol, x, lam);
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
        const cplx g = green_diag_ode(sol, x, cplx(lam, 1e-6));
        if (std::abs(g.real()) < 1e-8 * std::abs(g)) CHECK(std::abs(v - 0.5) < 1e-6);
    }
}

TEST_CASE("Kodaira matrix and measure")
{
    const Potential sol = potential_soliton(0.2);
    const cplx lam(-0.4, 0.3);
    cplx det0 = 0.0;
    for (double x : {-1.0, 0.0, 1.5}) {
        const auto k = kodaira(sol, x, lam);
        const cplx det = k.xi.determinant();
        CHECK(std::abs(det + k.wronskian * k.wronskian) < 1e-8 * std::abs(k.wronskian * k.wronskian));
        if (x == -1.0) det0 = det;
        CHECK(std::abs(det - det0) < 1e-8 * std::abs(det0));
    }
    const auto kf = kodaira(potential_free(), 0.4, cplx(-2.0, 0.1));
    // Weyl solutions carry an arbitrary normalization, so compare relative to the entry
    const cplx gw = 2.0 * green_diag_ode(potential_free(), 0.4, cplx(-2.0, 0.1)) * kf.wronskian;
    CHECK(std::abs(kf.xi(0, 0) - gw) < 1e-10 * std::abs(gw));

    const auto grid = linspace(0.5, 2.0, 16);
    const auto inc = kodaira_measure(potential_free(), 0.0, grid);
    // the psi' psi' entry carries the free density sqrt(lambda)/pi
    for (std::size_t i = 0; i + 1 < inc.size(); ++i) CHECK(inc[i + 1](1, 1) > inc[i](1, 1));
    for (const auto& m : kodaira_measure(sol, 0.3, linspace(-2.0, 2.0, 21))) {
        const Eigen::Matrix2d s = 0.5 * (m + m.transpose());
        CHECK(Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(s).eigenvalues()(0) >= -1e-8);
    }
}

TEST_CASE("Weyl m-function identity")
{
    CHECK(weyl_m_identity_check(potential_free(), 0.3, cplx(0.0, 1.0)) < 1e-7);
    CHECK(weyl_m_identity_check(potential_soliton(), 0.3, cplx(-2.0, 1.0)) < 1e-6);
    const double r1 = weyl_m_identity_check(potential_soliton(), 0.3, cplx(-2.0, 1.0), 4e-2);
    const double r2 = weyl_m_identity_check(potential_soliton(), 0.3, cplx(-2.0, 1.0), 2e-2);
    CHECK(r1 / r2 > 3.5);
    CHECK(r1 / r2 < 4.5);
}

TEST_CASE("canonical systems")
{
    const Potential u = potential_soliton();
    const auto cs = canonical_schrodinger(u);
    const auto xs = linspace(0.0, 3.0, 7);
    const cplx lam(-0.7, 0.2);
    const auto psi = canonical_solve(cs, lam, 0.0, Eigen::Vector2cd(1.0, -0.5), xs);
    const auto tr = solve_schrodinger(u, lam, 0.0, 3.0, 1.0, 0.5, xs);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        CHECK(std::abs(psi[i](0) - tr[i].psi) < 1e-9);
        CHECK(std::abs(psi[i](1) + tr[i].dpsi) < 1e-9);
    }

    const auto rot = canonical_constant(Eigen::Matrix2d::Zero(), Eigen::Matrix2d::Identity());
    for (const auto& v : canonical_solve(rot, 1.0, 0.0, Eigen::Vector2cd(0.6, 0.8), linspace(0.0, 10.0, 11)))
        CHECK(std::abs(v.norm() - 1.0) < 1e-9);

    const auto real = canonical_solve(cs, 0.8, 0.0, Eigen::Vector2cd(1.0, 0.0), xs);
    for (const auto& v : real) CHECK(v.imag().norm() < 1e-12);

    const auto airy = canonical_airy();
    const auto a0 = airy_ai(-2.0);
    const auto ap = canonical_solve(airy, -2.0, 0.0, Eigen::Vector2cd(a0.ai, a0.aip), linspace(0.0, 4.0, 9));
    for (int i = 0; i < 9; ++i) {
        const double s = -2.0 + 0.5 * i;
        CHECK(std::abs(ap[i](0) - boost::math::airy_ai(s)) < 1e-9);
        CHECK(std::abs(ap[i](1) - boost::math::airy_ai_prime(s)) < 1e-9);
    }
    CHECK(std::abs(airy_ai0() - 0.3550280539) < 1e-10);
    CHECK_THROWS(validate_canonical(canonical_constant(Eigen::Matrix2d::Zero(), -Eigen::Matrix2d::Identity())));
}

TEST_CASE("Airy function against an independent implementation")
{
    for (double x = -30.0; x <= 30.0; x += 0.173) {
        const auto v = airy_ai(x);
        const double ai = boost::math::airy_ai(x), aip = boost::math::airy_ai_prime(x);
        CHECK(std::abs(v.ai - ai) <= 1e-12 * std::max(1.0, std::abs(ai)) + 1e-13 * std::max(1.0, std::abs(x)));
        CHECK(std::abs(v.aip - aip) <= 1e-12 * std::max(1.0, std::abs(aip)) + 1e-13 * std::max(1.0, x * x));
    }
}

TEST_CASE("Hamiltonian kernel")
{
    for (double x : {0.0, 0.7, 2.0})
        for (double y : {0.3, 1.1}) {
            const double ex = (boost::math::airy_ai(x) * boost::math::airy_ai_prime(y) -
                               boost::math::airy_ai_prime(x) * boost::math::airy_ai(y)) /
                              (x - y);
            CHECK(std::abs(airy_kernel(x, y) - ex) < 1e-12);
        }
    const double d = std::pow(boost::math::airy_ai_prime(0.5), 2) - 0.5 * std::pow(boost::math::airy_ai(0.5), 2);
    CHECK(std::abs(airy_kernel(0.5, 0.5) - d) < 1e-12);

    const auto rot = canonical_constant(Eigen::Matrix2d::Zero(), Eigen::Matrix2d::Identity());
    const cplx diag = hamiltonian_kernel(rot, 1.0, 0.4, 0.4, 0.0, Eigen::Vector2cd(1.0, 0.0));
    CHECK(std::isfinite(std::abs(diag)));
    const cplx near = hamiltonian_kernel(rot, 1.0, 0.4, 0.4 + 1e-5, 0.0, Eigen::Vector2cd(1.0, 0.0));
    CHECK(std::abs(diag - near) < 1e-4);

    const auto rule = build_rule(41, MapKind::exponential, 1.0);
    const auto K = [](double x, double y) { return airy_kernel(x, y); };
    const cplx d41 = fredholm_det(discretize_kernel(K, rule), -1.0);
    const cplx d81 = fredholm_det(discretize_kernel(K, build_rule(81, MapKind::exponential, 1.0)), -1.0);
    CHECK(std::abs(d41 - 0.9694) < 2e-4);
    CHECK(std::abs(d41 - d81) < 2e-4);
}

TEST_CASE("de Branges phase")
{
    std::vector<cplx> E;
    for (const double z : linspace(-1000.0, 1000.0, 4001)) E.push_back(cplx(z, 1.0));
    CHECK(winding_number(theta_from_e(E)) == 1);
    std::vector<cplx> coarse;
    for (const double z : linspace(-1000.0, 1000.0, 801)) coarse.push_back(cplx(z, 1.0));
    CHECK(winding_number(theta_from_e(coarse)) == 1);

    const auto cs = canonical_schrodinger(potential_free());
    for (double k : {0.5, 1.0, 3.0}) CHECK(phase_derivative_check(cs, 1.0, k) < 1e-6);

    const auto flat = canonical_constant(Eigen::Matrix2d::Identity(), Eigen::Matrix2d::Zero());
    const auto pd = debranges_phase(flat, 1.0, linspace(-3.0, 3.0, 13));
    for (double p : pd.phase) CHECK(std::abs(p - pd.phase.front()) < 1e-12);
    for (std::size_t i = 0; i < pd.grid.size(); ++i)
        CHECK(std::abs((std::exp(cplx(0.0, pd.phase[i])) * pd.E[i]).imag()) < 1e-8);
}

TEST_CASE("Lambda kernel")
{
    const auto cs = canonical_schrodinger(potential_free());
    const std::vector<cplx> pts{cplx(1.0, 1.0), cplx(2.0, 1.0)};
    auto psi0 = [](cplx l) { return Eigen::Vector2cd(1.0, -cplx(0.0, 1.0) * std::sqrt(l)); };
    Eigen::Matrix2cd G;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            const cplx l = pts[i], n = pts[j];
            const cplx v = lambda_kernel(cs, l, n, 25.0, psi0(l), psi0(n)).value;
            G(i, j) = v;
            const cplx mp_l = cplx(0.0, 1.0) * std::sqrt(l), mp_n = cplx(0.0, 1.0) * std::sqrt(n);
            CHECK(std::abs(v - (mp_l - std::conj(mp_n)) / (l - std::conj(n))) < 1e-6);
        }
    CHECK(std::abs(G(0, 0).imag()) < 1e-10);
    CHECK(G(0, 0).real() >= -1e-10);
    CHECK(std::abs(G(0, 1) - std::conj(G(1, 0))) < 1e-8);
    // rows index lambda, columns nu: the Gram matrix is the transpose
    const Eigen::Matrix2cd H = 0.5 * (G.transpose() + G.transpose().adjoint());
    CHECK(Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd>(H).eigenvalues()(0) >= -1e-8);
    CHECK_THROWS_AS(lambda_kernel(cs, cplx(1.0, -1.0), pts[0], 15.0, psi0(1.0), psi0(1.0)), DomainError);
}

TEST_CASE("Drach equation")
{
    const auto xs = linspace(-2.0, 2.0, 21);
    const auto free = drach_check(potential_free(), -4.0, xs);
    CHECK(free.ode_residual < 1e-10);
    CHECK(free.solution_residual < 1e-6);
    const auto sol = drach_check(potential_soliton(), -9.0, xs);
    CHECK(sol.ode_residual < 1e-5);
    CHECK(sol.mu2_spread < 1e-6);
    CHECK(sol.solution_residual < 1e-4);
    // mu^2 = -g g''/2 + g'^2/4 + g^2 (u - lambda) from the closed-form g at x = 0
    const double h = 1e-3;
    auto g = [](double x) { return soliton_green(x, -9.0).real(); };
    const double g0 = g(0.0), g1 = (g(h) - g(-h)) / (2 * h), g2 = (g(h) - 2 * g0 + g(-h)) / (h * h);
    const double mu2 = -0.5 * g0 * g2 + 0.25 * g1 * g1 + g0 * g0 * (-2.0 + 9.0);
    CHECK(std::abs(sol.mu2 - mu2) < 1e-6);
}
