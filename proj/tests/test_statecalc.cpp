#include <doctest.h>

#include <cmath>
#include <random>

#include <boost/math/quadrature/exp_sinh.hpp>

#include "spectral/hankel.hpp"
#include "spectral/realization.hpp"
#include "spectral/schrod.hpp"
#include "spectral/statecalc.hpp"

using namespace spectral;

namespace {

MatrixRealization scalar(double a = 1.0, double b = 1.0, double c = 1.0)
{
    return make_matrix_realization(MatC::Constant(1, 1, a), VecC::Constant(1, b), RowC::Constant(1, c));
}

double tau_scalar(double x) { return 1.0 + std::exp(-2.0 * x) / 2.0; }

MatrixRealization random_stable(std::mt19937_64& rng, int n)
{
    std::normal_distribution<double> g;
    MatC A(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) A(i, j) = cplx(0.2 * g(rng), 0.2 * g(rng));
    A += MatC::Identity(n, n) * 1.5;
    VecC B(n);
    RowC C(n);
    for (int i = 0; i < n; ++i) {
        B(i) = 0.5 * cplx(g(rng), g(rng));
        C(i) = 0.5 * cplx(g(rng), g(rng));
    }
    return make_matrix_realization(A, B, C);
}

MatC random_matrix(std::mt19937_64& rng, int n)
{
    std::normal_distribution<double> g;
    MatC M(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) M(i, j) = cplx(g(rng), g(rng));
    return M;
}

// five-point second derivative
template <class F>
cplx d2(F f, double x, double h)
{
    return (-f(x + 2 * h) + 16.0 * f(x + h) - 30.0 * f(x) + 16.0 * f(x - h) - f(x - 2 * h)) / (12.0 * h * h);
}

}  // namespace

TEST_CASE("Gram family of the scalar system")
{
    const StateFamily sf(scalar());
    CHECK(std::abs(sf.gram(0.0)(0, 0) - 0.5) < 1e-15);
    CHECK(std::abs(sf.gram(20.0)(0, 0)) < 1e-17);
    CHECK(std::abs(lyapunov_gram(MatC::Constant(1, 1, 1.0), MatC::Constant(1, 1, 1.0), 0.0)(0, 0) - 0.5) < 1e-15);
    for (double x : {0.0, 0.7, 2.0}) {
        const double t = tau_scalar(x);
        CHECK(std::abs(sf.tau(x) - t) < 1e-14);
        const double ba = std::exp(-2.0 * x) / (t * t);
        CHECK(std::abs(sf.bracket(MatC::Identity(1, 1), x) - ba) < 1e-14);
        CHECK(std::abs(sf.bracket(sf.system().A, x) - ba) < 1e-14);
        CHECK(std::abs(sf.bracket(MatC::Zero(1, 1), x)) == 0.0);
    }
}

TEST_CASE("Gram family of a Howland indicator system")
{
    auto sys = make_diagonal_realization(profile_indicator(0.0, 1.0), profile_indicator(0.0, 1.0));
    const StateFamily sf(sys);
    const QuadratureRule rule = sys.channel_rule(sys.channels[0]);
    double trace = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i)
        if (rule.nodes[i] > 0.0 && rule.nodes[i] < 1.0) trace += rule.weights[i] / (2.0 * rule.nodes[i]);
    CHECK(std::abs(sf.gram(0.0).trace() - trace) < 1e-12 * trace);
    CHECK_THROWS_AS(sf.gram(-1.0), DomainError);
}

TEST_CASE("gram decays and satisfies the Lyapunov equation")
{
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 6; ++trial) {
        const auto m = random_stable(rng, 2 + trial % 3);
        const StateFamily sf(m);
        CHECK(sf.gram(40.0).norm() < 1e-8);
        const double x = 0.4;
        auto residual = [&](double h) {
            return ((sf.gram(x + h) - sf.gram(x - h)) / (2.0 * h) + m.A * sf.gram(x) + sf.gram(x) * m.A).norm();
        };
        CHECK(residual(1e-2) / residual(5e-3) >= 3.5);
    }
}

TEST_CASE("defective generators fall back to quadrature")
{
    MatC A(2, 2);
    A << 1.0, 1.0, 0.0, 1.0;
    const auto m = make_matrix_realization(A, VecC::Constant(2, 1.0), RowC::Constant(2, 1.0));
    const StateFamily sf(m);
    CHECK(sf.defective());
    const MatC R = sf.gram(0.3);
    CHECK((R * A + A * R - sf.exp_minus(0.3) * m.B * m.C * sf.exp_minus(0.3)).norm() < 1e-10);
}

TEST_CASE("tau function")
{
    const StateFamily zero(scalar(1.0, 0.0, 1.0));
    CHECK(zero.tau(0.3) == cplx(1.0));
    CHECK(std::abs(tau(StateFamily(scalar()), 0.0) - 1.5) < 1e-15);

    const auto sys = rational_realization({{-1.0, 2}, {-3.0, 3}});
    const StateFamily sf(sys);
    const auto rule = build_rule(128, MapKind::rational);
    for (double x : {0.0, 0.5, 1.5}) {
        const auto phi = make_impulse_response([&](double t) { return impulse_response(sys, t + 2.0 * x); }, 0.0);
        CHECK(std::abs(sf.tau(x) - fredholm_det(hankel_operator(phi, rule), 1.0)) < 1e-7 * std::abs(sf.tau(x)));
    }
}

TEST_CASE("Gelfand-Levitan kernel")
{
    const StateFamily sf(scalar());
    for (double x : {0.2, 1.0})
        for (double y : {1.0, 2.5}) CHECK(std::abs(sf.t_gl(x, y) + std::exp(-x - y) / tau_scalar(x)) < 1e-15);
    CHECK(StateFamily(scalar(1.0, 0.0)).t_gl(1.0, 2.0) == cplx(0.0));
    CHECK(gl_residual(sf, 1.0, 2.0, build_rule(64)) < 1e-7);

    CHECK(gl_logderiv_check(sf, 1.0, 1e-4) < 1e-7);
    CHECK(gl_logderiv_check(StateFamily(scalar(1.0, 0.0)), 1.0, 1e-4) == 0.0);
    auto howland = make_diagonal_realization(profile_exponential(1.0), profile_exponential(1.0));
    CHECK(gl_logderiv_check(StateFamily(howland), 0.5, 1e-4) < 1e-5);
}

TEST_CASE("potential from the bracket")
{
    CHECK(std::abs(StateFamily(scalar(1.0, 1.0, 1.0)).potential(0.0) + 16.0 / 9.0) < 1e-14);
    CHECK(StateFamily(scalar(1.0, 0.0)).potential(0.4) == cplx(0.0));
    for (double a : {0.5, 1.0, 2.0})
        for (double c : {0.3, 1.0, 4.0}) {
            const StateFamily sf(scalar(a, 1.0, 2.0 * a * c));
            const double x0 = std::log(c) / (2.0 * a);
            for (double x : {-1.0, 0.0, 0.8}) {
                const double s = 1.0 / std::cosh(a * (x - x0));
                CHECK(std::abs(sf.potential(x) + 2.0 * a * a * s * s) < 1e-12);
            }
        }

    const StateFamily sf(rational_realization({{-1.0, 2}, {-2.0, 1}}));
    for (double x : {0.2, 1.0, 3.0, 5.0}) CHECK(std::abs(sf.potential(x) - dyson_potential(sf, x)) < 1e-6);

    const auto jet = StateFamily(scalar()).potential_jet(0.3, 3);
    const StateFamily s1(scalar());
    auto u = [&](double x) { return s1.potential(x); };
    CHECK(std::abs(jet[0] - u(0.3)) < 1e-14);
    CHECK(std::abs(jet[1] - (u(0.3 + 1e-4) - u(0.3 - 1e-4)) / 2e-4) < 1e-6);
    CHECK(std::abs(jet[2] - d2(u, 0.3, 1e-3)) < 1e-6);
}

TEST_CASE("bracket examples on a random 4x4 system")
{
    std::mt19937_64 rng(37);
    const StateFamily sf(random_stable(rng, 4));
    const MatC X = random_matrix(rng, 4), Y = random_matrix(rng, 4);
    for (double x : {0.0, 0.5, 1.2}) {
        const cplx lhs = sf.bracket(star(sf, X, Y, x), x);
        CHECK(std::abs(lhs - sf.bracket(X, x) * sf.bracket(Y, x)) < 1e-10);
        CHECK(std::abs(sf.bracket(star(sf, MatC::Zero(4, 4), MatC::Zero(4, 4), x), x)) == 0.0);
    }
    const MatC I = MatC::Identity(4, 4);
    auto constant = [&](double) { return I; };
    const double x = 0.5;
    auto err = [&](double h) {
        const cplx fd = (sf.bracket(I, x + h) - sf.bracket(I, x - h)) / (2.0 * h);
        return std::abs(fd - sf.bracket(dpartial(sf, constant, x, 1e-3), x));
    };
    CHECK(std::log2(err(2e-2) / err(1e-2)) >= 1.9);
}

TEST_CASE("property: bracket is a differential ring homomorphism")
{
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 2 + trial % 4;
        const StateFamily sf(random_stable(rng, n));
        const MatC X = random_matrix(rng, n), Y = random_matrix(rng, n), X1 = random_matrix(rng, n);
        const double x = 0.1 + 0.15 * trial;
        const cplx bx = sf.bracket(X, x), by = sf.bracket(Y, x);
        CHECK(std::abs(sf.bracket(star(sf, X, Y, x), x) - bx * by) < 1e-10 * std::max(1.0, std::abs(bx * by)));
        auto fam = [&](double s) -> MatC { return X + std::sin(s) * X1; };
        const cplx lhs = sf.bracket(dpartial(sf, fam, x, 1e-4), x);
        auto err = [&](double h) {
            return std::abs((sf.bracket(fam(x + h), x + h) - sf.bracket(fam(x - h), x - h)) / (2.0 * h) - lhs);
        };
        CHECK(std::log2(err(2e-2) / err(1e-2)) >= 1.9);
    }
}

TEST_CASE("Baker-Akhiezer function")
{
    const StateFamily zero(scalar(1.0, 0.0));
    for (double x : {0.0, 1.0, 2.5}) CHECK(baker_akhiezer(zero, x, 2.0) == cplx(std::cos(std::sqrt(2.0) * x)));

    const StateFamily sf(scalar());
    for (double kappa : {0.5, 1.0, 4.0}) {
        const double x = 1.0, h = 1e-2;
        auto f = [&](double s) { return baker_akhiezer(sf, s, kappa); };
        const cplx res = -d2(f, x, h) + sf.potential(x) * f(x) - kappa * f(x);
        CHECK(std::abs(res) < 1e-5);
        CHECK(std::abs(f(x) - baker_akhiezer(sf, x, kappa, build_rule(128))) < 5e-5);
    }
    // kappa -> 0: 1 + int_x^inf T(x,y) dy = 1 - e^{-2x} / tau(x)
    const double x = 0.7;
    CHECK(std::abs(baker_akhiezer(sf, x, 1e-14) - (1.0 - std::exp(-2.0 * x) / tau_scalar(x))) < 1e-6);
}

TEST_CASE("diagonal Green's series")
{
    CHECK(std::abs(green_diag_series(StateFamily(scalar(1.0, 0.0)), 1.0, -4.0, 8).value - 0.25) < 1e-15);

    auto sf = std::make_shared<const StateFamily>(scalar());
    const Potential u = potential_from_system(sf);
    for (double x : {0.0, 1.0}) {
        const cplx s = green_diag_series(*sf, x, -25.0, 8).value;
        const cplx g = green_diag_ode(u, x, -25.0);
        CHECK(std::abs(s - g) < 1e-6 * std::abs(g));
    }
    double prev = INFINITY;
    for (int m = 1; m <= 12; ++m) {
        const double e = green_diag_series(*sf, 0.5, -100.0, m).error;
        CHECK(e < prev);
        prev = e;
    }
    CHECK_THROWS(green_diag_series(*sf, 0.5, -0.5, 20));
}

TEST_CASE("infinitesimal Darboux field")
{
    CHECK(darboux_field(StateFamily(scalar(1.0, 0.0)), 1.0, -25.0) == cplx(0.0));

    const StateFamily sf(scalar());
    const double x = 1.0, h = 1e-3;
    const cplx dg = (green_diag_series(sf, x + h, -25.0, 20).value - green_diag_series(sf, x - h, -25.0, 20).value) /
                    (2.0 * h);
    // green_diag_series is the diagonal of (L - lambda)^{-1}; the field is -2 d/dx of the (lambda - L)^{-1} diagonal
    CHECK(std::abs(darboux_field(sf, x, -25.0) - 2.0 * dg) < 1e-5);

    const double lam = -1e4;
    const cplx du = sf.potential_jet(x, 1)[1];
    const cplx lead = -du / (2.0 * std::pow(-lam, 1.5));
    CHECK(std::abs(darboux_field(sf, x, lam) / lead - 1.0) < 1e-3);
    CHECK_THROWS_AS(darboux_field(sf, x, -1.0), SingularError);
}

TEST_CASE("Volterra inverse")
{
    const auto rule = build_rule(64);
    const auto zero = volterra_inverse([](double, double) { return cplx(0.0); }, 1.0, 1.0, rule);
    CHECK(zero.op.norm() == 0.0);

    const Kernel T = [](double x, double y) { return y > x ? cplx(std::exp(-x - y)) : cplx(0.0); };
    const auto inv = volterra_inverse(T, 1.0, 1.0, rule);
    const auto n = static_cast<Eigen::Index>(rule.size());
    MatC V = MatC::Identity(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) V(i, j) += T(rule.nodes[i], rule.nodes[j]) * rule.weights[j];
    const MatC I = MatC::Identity(n, n);
    CHECK((V * (I + inv.op) - I).norm() < 1e-9);
    // direct algebraic inverse of the same discrete operator
    CHECK((inv.op - (V.inverse() - I)).norm() < 1e-12);

    CHECK_THROWS_AS(volterra_inverse(T, 0.5, 1.0, rule), DomainError);
}
