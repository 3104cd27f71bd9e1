#include "spectral/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

namespace spectral {

MapKind parse_map_kind(const std::string& name)
{
    if (name == "rational") return MapKind::rational;
    if (name == "exponential") return MapKind::exponential;
    throw ArgumentError("unknown map kind '" + name + "' (expected rational or exponential)");
}

std::string to_string(MapKind kind)
{
    return kind == MapKind::rational ? "rational" : "exponential";
}

void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w)
{
    if (n < 1) throw ArgumentError("gauss_legendre: n must be positive");
    x.assign(n, 0.0);
    w.assign(n, 0.0);
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int k = 1; k <= n; ++k) {
                double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
            }
            dp = n * (z * p0 - p1) / (z * z - 1.0);
            double dz = p0 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        // recompute derivative at the converged node
        double p0 = 1.0, p1 = 0.0;
        for (int k = 1; k <= n; ++k) {
            double p2 = p1;
            p1 = p0;
            p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
        }
        dp = n * (z * p0 - p1) / (z * z - 1.0);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    if (n % 2 == 1) x[m - 1] = 0.0;
}

QuadratureRule build_rule(int n, MapKind kind, double L)
{
    if (n < 2) throw ArgumentError("build_rule: n must be at least 2");
    if (!(L > 0.0)) throw ArgumentError("build_rule: scale must be positive");
    std::vector<double> xi, wi;
    gauss_legendre(n, xi, wi);
    QuadratureRule r;
    r.map_kind = kind;
    r.scale = L;
    r.nodes.resize(n);
    r.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        const double one_minus = 1.0 - xi[i];
        if (kind == MapKind::rational) {
            r.nodes[i] = L * (1.0 + xi[i]) / one_minus;
            r.weights[i] = 2.0 * L * wi[i] / (one_minus * one_minus);
        } else {
            r.nodes[i] = -L * std::log(one_minus / 2.0);
            r.weights[i] = L * wi[i] / one_minus;
        }
    }
    return r;
}

QuadratureRule interval_rule(int n, double a, double b)
{
    if (n < 1) throw ArgumentError("interval_rule: n must be positive");
    if (!(b > a)) throw ArgumentError("interval_rule: empty interval");
    std::vector<double> xi, wi;
    gauss_legendre(n, xi, wi);
    QuadratureRule r;
    r.nodes.resize(n);
    r.weights.resize(n);
    const double h = 0.5 * (b - a), c = 0.5 * (a + b);
    for (int i = 0; i < n; ++i) {
        r.nodes[i] = c + h * xi[i];
        r.weights[i] = h * wi[i];
    }
    return r;
}

QuadratureRule shifted(const QuadratureRule& rule, double a)
{
    QuadratureRule r = rule;
    for (double& t : r.nodes) t += a;
    return r;
}

QuadratureRule composite_rule(const std::vector<double>& breakpoints, int n_panel, int n_tail,
                              MapKind kind, double L)
{
    std::vector<double> bp;
    for (double b : breakpoints)
        if (b > 0.0) bp.push_back(b);
    std::sort(bp.begin(), bp.end());
    bp.erase(std::unique(bp.begin(), bp.end()), bp.end());
    if (bp.empty()) return build_rule(n_tail, kind, L);

    QuadratureRule r;
    r.map_kind = kind;
    r.scale = L;
    double a = 0.0;
    for (double b : bp) {
        QuadratureRule p = interval_rule(n_panel, a, b);
        r.nodes.insert(r.nodes.end(), p.nodes.begin(), p.nodes.end());
        r.weights.insert(r.weights.end(), p.weights.begin(), p.weights.end());
        a = b;
    }
    QuadratureRule tail = shifted(build_rule(n_tail, kind, L), a);
    r.nodes.insert(r.nodes.end(), tail.nodes.begin(), tail.nodes.end());
    r.weights.insert(r.weights.end(), tail.weights.begin(), tail.weights.end());
    return r;
}

DiscretizedOperator discretize_kernel(const Kernel& k, const QuadratureRule& rule)
{
    const auto n = static_cast<Eigen::Index>(rule.size());
    DiscretizedOperator op{rule, MatC(n, n)};
    std::vector<double> sw(rule.size());
    for (std::size_t i = 0; i < rule.size(); ++i) sw[i] = std::sqrt(rule.weights[i]);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            const cplx v = k(rule.nodes[i], rule.nodes[j]);
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
                std::ostringstream os;
                os << "kernel evaluation error: non-finite value at nodes (" << i << ", " << j
                   << ") = (" << rule.nodes[i] << ", " << rule.nodes[j] << ")";
                throw Error(os.str());
            }
            op.M(i, j) = sw[i] * v * sw[j];
        }
    }
    return op;
}

Determinant fredholm_determinant(const MatC& M, cplx z)
{
    Determinant d;
    const auto n = M.rows();
    if (n == 0 || z == cplx(0.0)) return d;
    MatC I_zM = MatC::Identity(n, n) + z * M;
    Eigen::PartialPivLU<MatC> lu(I_zM);
    const MatC& U = lu.matrixLU();
    double log_abs = 0.0, arg = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const cplx u = U(i, i);
        if (u == cplx(0.0)) {
            d.value = 0.0;
            d.log.log_abs = -INFINITY;
            d.log.arg = 0.0;
            return d;
        }
        log_abs += std::log(std::abs(u));
        arg += std::arg(u);
    }
    if (lu.permutationP().determinant() < 0) arg += std::numbers::pi;
    arg = std::remainder(arg, 2.0 * std::numbers::pi);
    d.log.log_abs = log_abs;
    d.log.arg = arg;
    if (log_abs > 700.0) {
        d.overflow = true;
        d.value = cplx(INFINITY, 0.0);
    } else {
        d.value = std::polar(std::exp(log_abs), arg);
    }
    return d;
}

cplx fredholm_det(const DiscretizedOperator& op, cplx z)
{
    Determinant d = fredholm_determinant(op.M, z);
    if (d.overflow)
        throw AccuracyError("determinant overflows double range; use the log-determinant form");
    return d.value;
}

LogDet fredholm_log_det(const DiscretizedOperator& op, cplx z)
{
    return fredholm_determinant(op.M, z).log;
}

std::vector<cplx> eigenvalues(const DiscretizedOperator& op)
{
    std::vector<cplx> ev;
    if (op.M.rows() == 0) return ev;
    Eigen::ComplexEigenSolver<MatC> es(op.M, false);
    ev.assign(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
    std::stable_sort(ev.begin(), ev.end(),
                     [](cplx a, cplx b) { return std::abs(a) > std::abs(b); });
    return ev;
}

ConvergedDet fredholm_det_refined(const Kernel& k, cplx z, MapKind kind, double L, double tol,
                                  int n0, int n_max)
{
    ConvergedDet out;
    int n = n0;
    cplx prev = fredholm_det(discretize_kernel(k, build_rule(n, kind, L)), z);
    out.value = prev;
    out.nodes = n;
    while (2 * n <= n_max) {
        n *= 2;
        cplx cur = fredholm_det(discretize_kernel(k, build_rule(n, kind, L)), z);
        out.change = std::abs(cur - prev) / std::max(1.0, std::abs(cur));
        out.value = cur;
        out.nodes = n;
        if (out.change < tol) {
            out.converged = true;
            return out;
        }
        prev = cur;
    }
    return out;
}

}  // namespace spectral
