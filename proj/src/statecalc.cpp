#include "spectral/statecalc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>

namespace spectral {

namespace {

constexpr double kCondLimit = 1e8;
constexpr std::size_t kMemoLimit = 64;

bool is_diagonal(const MatC& A)
{
    for (Eigen::Index i = 0; i < A.rows(); ++i)
        for (Eigen::Index j = 0; j < A.cols(); ++j)
            if (i != j && A(i, j) != cplx(0.0)) return false;
    return true;
}

double condition(const MatC& V)
{
    Eigen::JacobiSVD<MatC> svd(V);
    const auto& s = svd.singularValues();
    return s(0) / s(s.size() - 1);
}

MatC gram_quadrature(const MatC& A, const MatC& M, double min_re)
{
    const double T = 40.0 / min_re;
    const int panels = 64;
    const QuadratureRule p = interval_rule(12, 0.0, T / panels);
    const auto n = A.rows();
    MatC R = MatC::Zero(n, n);
    for (int k = 0; k < panels; ++k) {
        const double a = k * T / panels;
        for (std::size_t i = 0; i < p.size(); ++i) {
            const MatC E = expm(-(a + p.nodes[i]) * A);
            R += p.weights[i] * E * M * E;
        }
    }
    return R;
}

}  // namespace

MatC lyapunov_gram(const MatC& A, const MatC& M, double x)
{
    const auto n = A.rows();
    if (is_diagonal(A)) {
        MatC R(n, n);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j) {
                const cplx s = A(i, i) + A(j, j);
                R(i, j) = M(i, j) * std::exp(-x * s) / s;
            }
        return R;
    }
    Eigen::ComplexEigenSolver<MatC> es(A, true);
    const MatC V = es.eigenvectors();
    const VecC mu = es.eigenvalues();
    if (condition(V) < kCondLimit) {
        const auto lu = V.partialPivLu();
        const MatC Mt = lu.solve(M * V);
        MatC Rt(n, n);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j) {
                const cplx s = mu(i) + mu(j);
                Rt(i, j) = Mt(i, j) * std::exp(-x * s) / s;
            }
        return V * Rt * lu.inverse();
    }
    double min_re = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < n; ++i) min_re = std::min(min_re, mu(i).real());
    const MatC E = expm(-x * A);
    return E * gram_quadrature(A, M, min_re) * E;
}

StateFamily::StateFamily(const Realization& sys)
    : sys_(as_matrix(sys)), half_line_(std::holds_alternative<DiagonalRealization>(sys))
{
    const auto n = sys_.dim();
    diagonal_a_ = is_diagonal(sys_.A);
    if (diagonal_a_) return;
    Eigen::ComplexEigenSolver<MatC> es(sys_.A, true);
    V_ = es.eigenvectors();
    mu_ = es.eigenvalues();
    if (condition(V_) < kCondLimit) {
        modal_ = true;
        Vinv_ = V_.inverse();
        bt_ = Vinv_ * sys_.B;
        ct_ = sys_.C * V_;
    } else {
        defective_ = true;
        double min_re = std::numeric_limits<double>::infinity();
        for (Eigen::Index i = 0; i < n; ++i) min_re = std::min(min_re, mu_(i).real());
        R0_ = gram_quadrature(sys_.A, sys_.B * sys_.C, min_re);
    }
}

const MatC& StateFamily::Point::F() const
{
    std::call_once(f_once_, [this] { f_ = lu.inverse(); });
    return f_;
}

void StateFamily::check_x(double x) const
{
    if (!std::isfinite(x)) throw DomainError("state family: x must be finite");
    if (half_line_ && x < 0.0) {
        std::ostringstream os;
        os << "domain error: x=" << x << " < 0 for a realization on the half line";
        throw DomainError(os.str());
    }
}

MatC StateFamily::exp_minus(double t) const
{
    const auto n = sys_.dim();
    if (diagonal_a_) {
        MatC E = MatC::Zero(n, n);
        for (Eigen::Index i = 0; i < n; ++i) E(i, i) = std::exp(-t * sys_.A(i, i));
        return E;
    }
    if (modal_) {
        VecC d(n);
        for (Eigen::Index i = 0; i < n; ++i) d(i) = std::exp(-t * mu_(i));
        return V_ * d.asDiagonal() * Vinv_;
    }
    return expm(-t * sys_.A);
}

MatC StateFamily::gram(double x) const
{
    check_x(x);
    const auto n = sys_.dim();
    if (diagonal_a_ || modal_) {
        MatC Rt(n, n);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j) {
                const cplx mi = diagonal_a_ ? sys_.A(i, i) : mu_(i);
                const cplx mj = diagonal_a_ ? sys_.A(j, j) : mu_(j);
                const cplx b = diagonal_a_ ? sys_.B(i) : bt_(i);
                const cplx c = diagonal_a_ ? sys_.C(j) : ct_(j);
                Rt(i, j) = b * c * std::exp(-x * (mi + mj)) / (mi + mj);
            }
        if (diagonal_a_) return Rt;
        return V_ * Rt * Vinv_;
    }
    const MatC E = exp_minus(x);
    return E * R0_ * E;
}

std::shared_ptr<StateFamily::Point> StateFamily::compute(double x) const
{
    auto p = std::make_shared<Point>();
    p->x = x;
    p->R = gram(x);
    p->E = exp_minus(x);
    const auto n = sys_.dim();
    p->lu.compute(MatC::Identity(n, n) + p->R);
    p->det = p->lu.determinant();
    if (!(std::abs(p->det) > 1e-12)) {
        std::ostringstream os;
        os << "singular-tau error: det(I + R_x) = " << p->det << " at x=" << x;
        throw SingularError(os.str());
    }
    VecC ce = (sys_.C * p->E).transpose();
    VecC lt(n);
    p->lu._solve_impl_transposed<false>(ce, lt);
    p->left = lt.transpose();
    p->right = p->lu.solve(p->E * sys_.B);
    return p;
}

std::shared_ptr<const StateFamily::Point> StateFamily::at(double x) const
{
    check_x(x);
    {
        std::shared_lock lock(memo_mutex_);
        auto it = memo_.find(x);
        if (it != memo_.end()) return it->second;
    }
    std::shared_ptr<const Point> p = compute(x);
    std::unique_lock lock(memo_mutex_);
    if (memo_.size() >= kMemoLimit) memo_.clear();
    memo_.emplace(x, p);
    return p;
}

cplx StateFamily::tau(double x) const { return at(x)->det; }

cplx StateFamily::log_tau(double x) const { return std::log(at(x)->det); }

cplx StateFamily::t_gl(double x, double y) const
{
    auto p = at(x);
    return -(p->left * (exp_minus(y) * sys_.B))(0, 0);
}

cplx StateFamily::bracket(const MatC& X, double x) const
{
    auto p = at(x);
    if (X.rows() != dim() || X.cols() != dim())
        throw ArgumentError("bracket: operator dimension does not match the state space");
    return (p->left * X * p->right)(0, 0);
}

cplx StateFamily::potential(double x) const
{
    auto p = at(x);
    return -4.0 * (p->left * sys_.A * p->right)(0, 0);
}

std::vector<cplx> StateFamily::potential_jet(double x, int order) const
{
    if (order < 0) throw ArgumentError("potential_jet: order must be >= 0");
    auto p = at(x);
    const auto n = dim();
    const int K = order;
    // S_k = (-A)^k / k!
    std::vector<MatC> S(K + 1);
    S[0] = MatC::Identity(n, n);
    for (int k = 1; k <= K; ++k) S[k] = (-sys_.A * S[k - 1]) / static_cast<double>(k);
    std::vector<MatC> R(K + 1, MatC::Zero(n, n));
    for (int k = 0; k <= K; ++k)
        for (int i = 0; i <= k; ++i) R[k] += S[i] * p->R * S[k - i];
    std::vector<MatC> F(K + 1);
    F[0] = p->F();
    for (int k = 1; k <= K; ++k) {
        MatC acc = MatC::Zero(n, n);
        for (int j = 1; j <= k; ++j) acc += R[j] * F[k - j];
        F[k] = -p->F() * acc;
    }
    const RowC CE = sys_.C * p->E;
    const VecC EB = p->E * sys_.B;
    std::vector<RowC> L(K + 1, RowC::Zero(n));
    std::vector<VecC> Rt(K + 1, VecC::Zero(n));
    for (int k = 0; k <= K; ++k)
        for (int i = 0; i <= k; ++i) {
            L[k] += CE * S[i] * F[k - i];
            Rt[k] += F[i] * S[k - i] * EB;
        }
    std::vector<cplx> jet(K + 1);
    double fact = 1.0;
    for (int k = 0; k <= K; ++k) {
        if (k > 0) fact *= k;
        cplx s = 0.0;
        for (int i = 0; i <= k; ++i) s += (L[i] * sys_.A * Rt[k - i])(0, 0);
        jet[k] = -4.0 * fact * s;
    }
    return jet;
}

double StateFamily::invertibility_threshold() const
{
    auto norm = [this](double x) {
        Eigen::JacobiSVD<MatC> svd(gram(x));
        return svd.singularValues()(0);
    };
    // scan a grid from the far end inwards; the threshold is the last point where the norm reaches 1
    double x0 = 0.0;
    const double x_max = 50.0;
    double prev = x_max;
    if (norm(x_max) >= 1.0) throw DomainError("invertibility threshold: ||R_x|| >= 1 at x=50");
    for (double x = x_max; x >= 0.0; x -= 0.25) {
        if (norm(x) >= 1.0) {
            double lo = x, hi = prev;
            for (int it = 0; it < 60; ++it) {
                const double mid = 0.5 * (lo + hi);
                (norm(mid) >= 1.0 ? lo : hi) = mid;
            }
            x0 = hi;
            break;
        }
        prev = x;
    }
    return x0;
}

MatC gram(const StateFamily& sf, double x)
{
    if (x < 0.0) throw DomainError("gram: x must be >= 0");
    return sf.gram(x);
}

cplx tau(const StateFamily& sf, double x)
{
    if (x < 0.0) throw DomainError("tau: x must be >= 0");
    return sf.tau(x);
}

cplx t_gl(const StateFamily& sf, double x, double y) { return sf.t_gl(x, y); }

double gl_residual(const StateFamily& sf, double x, double y, const QuadratureRule& rule)
{
    return gl_residual(sf, make_impulse_response(Realization(sf.system())), x, y, rule);
}

double gl_residual(const StateFamily& sf, const ImpulseResponse& phi, double x, double y, const QuadratureRule& rule)
{
    cplx integral = 0.0;
    for (std::size_t k = 0; k < rule.size(); ++k) {
        const double z = x + rule.nodes[k];
        integral += rule.weights[k] * sf.t_gl(x, z) * phi(z + y);
    }
    return std::abs(phi(x + y) + sf.t_gl(x, y) + integral);
}

double gl_logderiv_check(const StateFamily& sf, double x, double h)
{
    const cplx d = (sf.log_tau(x + h) - sf.log_tau(x - h)) / (2.0 * h);
    return std::abs(d - sf.t_gl(x, x));
}

cplx bracket(const StateFamily& sf, const MatC& X, double x) { return sf.bracket(X, x); }

MatC star(const StateFamily& sf, const MatC& X, const MatC& Y, double x)
{
    auto p = sf.at(x);
    const MatC& A = sf.system().A;
    const MatC& F = p->F();
    if (sf.diagonal_generator()) {
        const auto D = A.diagonal().asDiagonal();
        const MatC AF = D * F;
        const MatC M = AF + F * D - 2.0 * F * AF;
        return (X * M) * Y;
    }
    return X * (A * F + F * A - 2.0 * F * A * F) * Y;
}

MatC dpartial(const StateFamily& sf, const std::function<MatC(double)>& X, double x, double h)
{
    auto p = sf.at(x);
    const MatC& A = sf.system().A;
    const auto n = sf.dim();
    const MatC G = MatC::Identity(n, n) - 2.0 * p->F();
    const MatC X0 = X(x);
    const MatC dX = (X(x + h) - X(x - h)) / (2.0 * h);
    if (sf.diagonal_generator()) {
        const auto D = A.diagonal().asDiagonal();
        return D * (G * X0) + dX + (X0 * G) * D;
    }
    return A * G * X0 + dX + X0 * G * A;
}

cplx potential(const StateFamily& sf, double x) { return sf.potential(x); }

cplx dyson_potential(const StateFamily& sf, double x, double h, bool richardson)
{
    auto second = [&](double s) {
        return (sf.log_tau(x + s) - 2.0 * sf.log_tau(x) + sf.log_tau(x - s)) / (s * s);
    };
    const cplx d1 = second(h);
    if (!richardson) return -2.0 * d1;
    const cplx d2 = second(0.5 * h);
    return -2.0 * (4.0 * d2 - d1) / 3.0;
}

namespace {

void check_ba_domain(const StateFamily& sf, double x, double kappa)
{
    if (!(kappa >= 0.0)) throw DomainError("baker_akhiezer: kappa must be >= 0");
    const double x0 = sf.invertibility_threshold();
    if (x < x0 || (x0 > 0.0 && x == x0)) {
        std::ostringstream os;
        os << "domain error: x=" << x << " is below the invertibility threshold x0=" << x0;
        throw DomainError(os.str());
    }
}

}  // namespace

cplx baker_akhiezer(const StateFamily& sf, double x, double kappa)
{
    check_ba_domain(sf, x, kappa);
    const double k = std::sqrt(kappa);
    auto p = sf.at(x);
    const auto n = sf.dim();
    const MatC& A = sf.system().A;
    const MatC I = MatC::Identity(n, n);
    const VecC EB = p->E * sf.system().B;
    const cplx ik(0.0, k);
    const VecC w = 0.5 * (std::exp(ik * x) * (A - ik * I).partialPivLu().solve(EB) +
                          std::exp(-ik * x) * (A + ik * I).partialPivLu().solve(EB));
    return std::cos(k * x) - (p->left * w)(0, 0);
}

cplx baker_akhiezer(const StateFamily& sf, double x, double kappa, const QuadratureRule& rule)
{
    check_ba_domain(sf, x, kappa);
    const double k = std::sqrt(kappa);
    cplx integral = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i) {
        const double y = x + rule.nodes[i];
        integral += rule.weights[i] * sf.t_gl(x, y) * std::cos(k * y);
    }
    return std::cos(k * x) + integral;
}

GreenSeries green_diag_series(const StateFamily& sf, double x, double lambda, int m)
{
    if (!(lambda < 0.0)) throw DomainError("green_diag_series: lambda must be negative");
    if (m < 0) throw ArgumentError("green_diag_series: m must be >= 0");
    auto p = sf.at(x);
    const MatC& A = sf.system().A;
    const MatC A2 = A * A;
    VecC v = A * p->right;  // A^{2j-1} F e^{-xA} B
    std::vector<double> mags;
    cplx sum = 0.5;
    double lam_pow = 1.0;
    for (int j = 1; j <= m; ++j) {
        lam_pow *= lambda;
        const cplx br = (p->left * v)(0, 0);
        const cplx term = ((j % 2) ? -1.0 : 1.0) * br / lam_pow;
        sum += term;
        mags.push_back(std::abs(term));
        v = A2 * v;
    }
    const double k = std::sqrt(-lambda);
    GreenSeries g;
    g.value = sum / k;
    g.terms = m;
    g.error = mags.empty() ? 0.0 : mags.back() / k;
    if (mags.size() >= 3) {
        const double a = mags[mags.size() - 3], c = mags.back();
        if (c > a && c > 1e-14 * std::abs(sum)) {
            std::ostringstream os;
            os << "divergence error: diagonal Green series terms grow at lambda=" << lambda;
            throw AccuracyError(os.str());
        }
    }
    return g;
}

double bottom_estimate(const StateFamily& sf, const std::vector<double>& xs)
{
    double mn = 0.0;
    for (double x : xs) mn = std::min(mn, sf.potential(x).real());
    return std::max(0.0, -mn);
}

cplx darboux_field(const StateFamily& sf, double x, cplx lambda)
{
    auto p = sf.at(x);
    const MatC& A = sf.system().A;
    const auto n = sf.dim();
    const MatC I = MatC::Identity(n, n);
    const MatC S = lambda * I + A * A;
    Eigen::JacobiSVD<MatC> svd(S);
    if (!(svd.singularValues()(n - 1) > 1e-12 * std::max(1.0, svd.singularValues()(0))))
        throw SingularError("darboux_field: lambda I + A^2 is singular");
    const MatC Minv = S.partialPivLu().solve(I);
    const MatC G = I - 2.0 * p->F();
    const MatC X = A * G * A * Minv + A * Minv * G * A;
    return -2.0 / sqrt_neg(lambda) * (p->left * X * p->right)(0, 0);
}

VolterraResult volterra_inverse(const Kernel& T, double M, double eps, const QuadratureRule& rule)
{
    if (!(M > 0.0) || !(eps > 0.0)) throw ArgumentError("volterra_inverse: M and eps must be > 0");
    const auto n = static_cast<Eigen::Index>(rule.size());
    MatC N(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
            const double x = rule.nodes[i], y = rule.nodes[j];
            const cplx v = T(x, y);
            if (std::abs(v) > M * std::exp(-eps * (x + y)) * (1.0 + 1e-12)) {
                std::ostringstream os;
                os << "precondition error: |T(" << x << "," << y << ")| exceeds M e^{-eps(x+y)}";
                throw DomainError(os.str());
            }
            N(i, j) = v * rule.weights[j];
        }
    int J = 1;
    double bound = M * M / (eps * 2.0);
    while (bound >= 1e-12 && J < 10000) {
        ++J;
        bound *= M / (eps * 2.0 * J);
    }
    VolterraResult out;
    out.terms = J;
    MatC term = -N;
    out.op = term;
    for (int j = 2; j <= J; ++j) {
        term = -N * term;
        out.op += term;
    }
    out.kernel = out.op;
    for (Eigen::Index j = 0; j < n; ++j) out.kernel.col(j) /= rule.weights[j];
    return out;
}

cplx hat_tau(const HatSystem& h, double x)
{
    const MatC R = lyapunov_gram(h.A, h.B * h.C, x);
    return (MatC::Identity(R.rows(), R.cols()) + R).determinant();
}

}  // namespace spectral
