#include "spectral/realization.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

namespace spectral {

Profile profile_constant(cplx value)
{
    std::ostringstream os;
    os << "constant(" << value.real() << "," << value.imag() << ")";
    return {[value](double) { return value; }, {}, os.str()};
}

Profile profile_indicator(double a, double b)
{
    if (!(b > a) || a < 0.0) throw ArgumentError("indicator profile needs 0 <= a < b");
    std::ostringstream os;
    os << "indicator(" << a << "," << b << ")";
    std::vector<double> bp;
    if (a > 0.0) bp.push_back(a);
    bp.push_back(b);
    return {[a, b](double u) { return (u > a && u < b) ? cplx(1.0) : cplx(0.0); }, bp, os.str()};
}

Profile profile_exponential(cplx rate)
{
    std::ostringstream os;
    os << "exp(-" << rate.real() << "u)";
    return {[rate](double u) { return std::exp(-rate * u); }, {}, os.str()};
}

Profile profile_power_exponential(double power, cplx rate)
{
    std::ostringstream os;
    os << "u^" << power << " exp(" << rate.real() << "u)";
    return {[power, rate](double u) { return std::pow(u, power) * std::exp(rate * u); }, {},
            os.str()};
}

Profile profile_table(std::vector<std::pair<double, cplx>> points)
{
    if (points.size() < 2) throw ArgumentError("table profile needs at least two points");
    std::sort(points.begin(), points.end(),
              [](const auto& p, const auto& q) { return p.first < q.first; });
    for (std::size_t i = 0; i + 1 < points.size(); ++i)
        if (!(points[i + 1].first > points[i].first))
            throw ArgumentError("table profile abscissae must be distinct");
    if (points.front().first < 0.0) throw ArgumentError("table profile abscissae must be >= 0");
    std::vector<double> bp;
    for (const auto& p : points) bp.push_back(p.first);
    auto f = [points](double u) -> cplx {
        if (u < points.front().first || u > points.back().first) return 0.0;
        auto it = std::upper_bound(points.begin(), points.end(), u,
                                   [](double v, const auto& p) { return v < p.first; });
        if (it == points.end()) return points.back().second;
        if (it == points.begin()) return points.front().second;
        const auto& hi = *it;
        const auto& lo = *(it - 1);
        const double s = (u - lo.first) / (hi.first - lo.first);
        return (1.0 - s) * lo.second + s * hi.second;
    };
    return {f, bp, "table"};
}

Profile profile_scaled(const Profile& p, cplx factor)
{
    auto f = p.f;
    return {[f, factor](double u) { return factor * f(u); }, p.breakpoints, p.name};
}

MatrixRealization make_matrix_realization(MatC A, VecC B, RowC C)
{
    const auto n = A.rows();
    if (n == 0 || A.cols() != n) throw ArgumentError("A must be a non-empty square matrix");
    if (B.size() != n) throw ArgumentError("B must have length dim(A)");
    if (C.size() != n) throw ArgumentError("C must have length dim(A)");
    Eigen::ComplexEigenSolver<MatC> es(A, false);
    double min_re = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < n; ++i) min_re = std::min(min_re, es.eigenvalues()(i).real());
    if (!(min_re > 1e-10)) {
        std::ostringstream os;
        os << "stability error: min Re eig(A) = " << min_re << " is not > 1e-10";
        throw StabilityError(os.str());
    }
    return {std::move(A), std::move(B), std::move(C)};
}

QuadratureRule DiagonalRealization::channel_rule(const DiagonalChannel& ch) const
{
    std::vector<double> bp = ch.b.breakpoints;
    bp.insert(bp.end(), ch.c.breakpoints.begin(), ch.c.breakpoints.end());
    return composite_rule(bp, panel_nodes, nodes, map, scale);
}

DiagonalRealization make_diagonal_realization(Profile b, Profile c, double s0)
{
    if (s0 < 0.0) throw ArgumentError("diagonal realization shift s0 must be >= 0");
    DiagonalRealization d;
    d.channels.push_back({std::move(b), std::move(c), s0});
    return d;
}

MatrixRealization discretize(const DiagonalRealization& sys)
{
    std::vector<cplx> a, b, c;
    for (const auto& ch : sys.channels) {
        QuadratureRule r = sys.channel_rule(ch);
        for (std::size_t i = 0; i < r.size(); ++i) {
            const double u = r.nodes[i];
            const double sw = std::sqrt(r.weights[i]);
            a.emplace_back(u + ch.s0);
            b.push_back(sw * ch.b(u));
            c.push_back(sw * ch.c(u));
        }
    }
    const auto n = static_cast<Eigen::Index>(a.size());
    MatrixRealization m;
    m.A = MatC::Zero(n, n);
    m.B.resize(n);
    m.C.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        m.A(i, i) = a[i];
        m.B(i) = b[i];
        m.C(i) = c[i];
    }
    return m;
}

MatrixRealization as_matrix(const Realization& sys)
{
    if (const auto* m = std::get_if<MatrixRealization>(&sys)) return *m;
    return discretize(std::get<DiagonalRealization>(sys));
}

MatC expm(const MatC& M) { return M.exp(); }

namespace {

cplx diagonal_response(const DiagonalRealization& d, double t, double* scale)
{
    cplx sum = 0.0;
    double abs_sum = 0.0;
    for (const auto& ch : d.channels) {
        QuadratureRule r = d.channel_rule(ch);
        for (std::size_t i = 0; i < r.size(); ++i) {
            const double u = r.nodes[i];
            const cplx v = r.weights[i] * ch.b(u) * ch.c(u) * std::exp(-t * (u + ch.s0));
            sum += v;
            abs_sum += std::abs(v);
        }
    }
    if (scale) *scale = abs_sum;
    return sum;
}

double min_real_eig(const MatC& A)
{
    Eigen::ComplexEigenSolver<MatC> es(A, false);
    double m = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < A.rows(); ++i) m = std::min(m, es.eigenvalues()(i).real());
    return m;
}

}  // namespace

cplx impulse_response(const Realization& sys, double t)
{
    if (!(t > 0.0)) throw DomainError("impulse_response: t must be positive");
    if (const auto* m = std::get_if<MatrixRealization>(&sys)) {
        return (m->C * expm(-t * m->A) * m->B)(0, 0);
    }
    const auto& d = std::get<DiagonalRealization>(sys);
    if (d.response) return d.response(t);
    double scale = 0.0;
    const cplx v = diagonal_response(d, t, &scale);
    DiagonalRealization fine = d;
    fine.nodes *= 2;
    fine.panel_nodes *= 2;
    const cplx v2 = diagonal_response(fine, t, nullptr);
    if (std::abs(v2 - v) > 1e-8 * std::max(scale, 1e-300)) {
        std::ostringstream os;
        os << "accuracy error: impulse response at t=" << t << " changes by " << std::abs(v2 - v)
           << " under rule refinement";
        throw AccuracyError(os.str());
    }
    return v;
}

ImpulseResponse make_impulse_response(std::function<cplx(double)> f, double decay_rate)
{
    if (decay_rate < 0.0) throw ArgumentError("decay rate must be >= 0");
    // spot check |phi(t)| <= M e^{-rate t} on a log grid over [1, 1e3]
    double first = -INFINITY, worst = -INFINITY;
    for (int k = 0; k <= 30; ++k) {
        const double t = std::pow(10.0, 3.0 * k / 30.0);
        const double a = std::abs(f(t));
        if (!std::isfinite(a)) throw DomainError("impulse response is not finite on t >= 1");
        if (a == 0.0) continue;
        const double g = std::log(a) + decay_rate * t;
        if (first == -INFINITY) first = g;
        worst = std::max(worst, g);
    }
    if (first != -INFINITY && worst - first > std::log(1e6))
        throw DomainError("impulse response violates the stated exponential decay bound");
    return {std::move(f), decay_rate};
}

ImpulseResponse make_impulse_response(const Realization& sys)
{
    if (const auto* m = std::get_if<MatrixRealization>(&sys)) {
        const double rate = min_real_eig(m->A);
        Eigen::ComplexEigenSolver<MatC> es(m->A, true);
        const MatC V = es.eigenvectors();
        Eigen::JacobiSVD<MatC> svd(V);
        const double cond = svd.singularValues()(0) /
                            svd.singularValues()(svd.singularValues().size() - 1);
        if (cond < 1e8) {
            const VecC mu = es.eigenvalues();
            const VecC bt = V.partialPivLu().solve(m->B);
            const RowC ct = m->C * V;
            VecC coef(mu.size());
            for (Eigen::Index k = 0; k < mu.size(); ++k) coef(k) = ct(k) * bt(k);
            return make_impulse_response(
                [mu, coef](double t) {
                    cplx s = 0.0;
                    for (Eigen::Index k = 0; k < mu.size(); ++k) s += coef(k) * std::exp(-t * mu(k));
                    return s;
                },
                rate);
        }
        MatrixRealization copy = *m;
        return make_impulse_response(
            [copy](double t) { return (copy.C * expm(-t * copy.A) * copy.B)(0, 0); }, rate);
    }
    const auto& d = std::get<DiagonalRealization>(sys);
    double rate = INFINITY;
    for (const auto& ch : d.channels) rate = std::min(rate, ch.s0);
    if (d.algebraic || !std::isfinite(rate)) rate = 0.0;
    if (d.response) return make_impulse_response(d.response, rate);
    MatrixRealization m = discretize(d);
    VecC a = m.A.diagonal();
    VecC coef = m.B.cwiseProduct(m.C.transpose());
    return make_impulse_response(
        [a, coef](double t) {
            cplx s = 0.0;
            for (Eigen::Index k = 0; k < a.size(); ++k) s += coef(k) * std::exp(-t * a(k));
            return s;
        },
        rate);
}

Realization rational_realization(const std::vector<Pole>& poles, int nodes, MapKind map,
                                 double scale)
{
    if (poles.empty()) throw ArgumentError("rational_realization needs at least one pole");
    DiagonalRealization d;
    d.nodes = nodes;
    d.map = map;
    d.scale = scale;
    d.algebraic = true;
    for (const auto& p : poles) {
        if (!(p.a.real() < 0.0)) {
            std::ostringstream os;
            os << "stability error: pole a=" << p.a << " must have Re a < 0";
            throw StabilityError(os.str());
        }
        if (p.r < 1) throw ArgumentError("pole order must be a positive integer");
        const double power = 0.5 * (p.r - 1);
        Profile b = profile_power_exponential(power, 0.5 * p.a);
        Profile c = profile_scaled(b, 1.0 / std::tgamma(static_cast<double>(p.r)));
        d.channels.push_back({b, c, 0.0});
    }
    d.response = [poles](double t) {
        cplx s = 0.0;
        for (const auto& p : poles) s += std::pow(t - p.a, -p.r);
        return s;
    };
    return d;
}

Realization direct_sum(const Realization& s1, const Realization& s2)
{
    if (s1.index() != s2.index())
        throw TypeError("direct_sum: realizations must be of the same variant");
    if (const auto* m1 = std::get_if<MatrixRealization>(&s1)) {
        const auto& m2 = std::get<MatrixRealization>(s2);
        const auto n1 = m1->dim(), n2 = m2.dim();
        MatrixRealization m;
        m.A = MatC::Zero(n1 + n2, n1 + n2);
        m.A.topLeftCorner(n1, n1) = m1->A;
        m.A.bottomRightCorner(n2, n2) = m2.A;
        m.B.resize(n1 + n2);
        m.B << m1->B, m2.B;
        m.C.resize(n1 + n2);
        m.C << m1->C, m2.C;
        return m;
    }
    const auto& d1 = std::get<DiagonalRealization>(s1);
    const auto& d2 = std::get<DiagonalRealization>(s2);
    if (d1.nodes != d2.nodes || d1.panel_nodes != d2.panel_nodes || d1.map != d2.map ||
        d1.scale != d2.scale)
        throw TypeError("direct_sum: diagonal realizations use different rules");
    DiagonalRealization d = d1;
    d.channels.insert(d.channels.end(), d2.channels.begin(), d2.channels.end());
    d.algebraic = d1.algebraic || d2.algebraic;
    d.response = nullptr;
    if (d1.response && d2.response) {
        auto r1 = d1.response, r2 = d2.response;
        d.response = [r1, r2](double t) { return r1(t) + r2(t); };
    }
    return d;
}

namespace {

Realization apply_cayley(const Realization& sys, cplx zeta, bool inverse)
{
    if (const auto* m = std::get_if<MatrixRealization>(&sys)) {
        const auto n = m->dim();
        const MatC I = MatC::Identity(n, n);
        const MatC num = inverse ? MatC(zeta * I - m->A) : MatC(zeta * I + m->A);
        const MatC den = inverse ? MatC(zeta * I + m->A) : MatC(zeta * I - m->A);
        Eigen::JacobiSVD<MatC> svd(den);
        const double smin = svd.singularValues()(n - 1);
        if (!(smin > 1e-12 * std::max(1.0, svd.singularValues()(0)))) {
            std::ostringstream os;
            os << "pole error: zeta I " << (inverse ? "+" : "-") << " A is singular at zeta="
               << zeta;
            throw SingularError(os.str());
        }
        MatrixRealization out = *m;
        out.B = num * den.fullPivLu().solve(m->B);
        return out;
    }
    DiagonalRealization d = std::get<DiagonalRealization>(sys);
    d.response = nullptr;
    for (auto& ch : d.channels) {
        const double s0 = ch.s0;
        const double pole_re = inverse ? -zeta.real() : zeta.real();
        if (std::abs(zeta.imag()) < 1e-12 && pole_re >= s0) {
            std::ostringstream os;
            os << "pole error: zeta=" << zeta << " lies on the spectrum of A";
            throw SingularError(os.str());
        }
        auto f = ch.b.f;
        ch.b.f = [f, zeta, s0, inverse](double u) {
            const double a = u + s0;
            return inverse ? f(u) * (zeta - a) / (zeta + a) : f(u) * (zeta + a) / (zeta - a);
        };
    }
    return d;
}

}  // namespace

Realization darboux_shift(const Realization& sys, std::optional<cplx> zeta)
{
    if (!zeta) return sys;
    return apply_cayley(sys, *zeta, false);
}

Realization darboux_unshift(const Realization& sys, std::optional<cplx> zeta)
{
    if (!zeta) return sys;
    return apply_cayley(sys, *zeta, true);
}

Eigen::Matrix2cd HatSystem::impulse_response(double t) const
{
    return C * expm(-t * A) * B;
}

HatSystem hat_system(const Realization& s1, const Realization& s2, cplx lambda)
{
    if (s1.index() != s2.index()) throw TypeError("hat_system: realizations of different kinds");
    const MatrixRealization m1 = as_matrix(s1);
    const MatrixRealization m2 = as_matrix(s2);
    const auto n = m1.dim();
    if (m2.dim() != n || (m1.A - m2.A).norm() > 1e-14 * std::max(1.0, m1.A.norm()))
        throw TypeError("hat_system: the two systems must share the same A");
    HatSystem h;
    h.A = MatC::Zero(2 * n, 2 * n);
    h.A.topLeftCorner(n, n) = m1.A;
    h.A.bottomRightCorner(n, n) = m1.A;
    h.B = MatC::Zero(2 * n, 2);
    h.B.block(0, 1, n, 1) = m1.B;
    h.B.block(n, 0, n, 1) = m2.B;
    h.C = MatC::Zero(2, 2 * n);
    h.C.block(0, 0, 1, n) = lambda * m1.C;
    h.C.block(1, n, 1, n) = -m2.C;
    return h;
}

}  // namespace spectral
