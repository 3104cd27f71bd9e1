#include "spectral/schrod.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "spectral/airy.hpp"

namespace spectral {

namespace {

constexpr double kPad = 2.0;

ode::Rhs schrodinger_rhs(const Potential& u, cplx lambda)
{
    return [&u, lambda](const ode::State& y, ode::State& dy, double x) {
        dy.resize(2);
        dy[0] = y[1];
        dy[1] = (u(x) - lambda) * y[0];
    };
}

std::vector<double> sorted_unique(std::vector<double> xs)
{
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    return xs;
}

}  // namespace

double Potential::operator()(double x) const
{
    if (x < lo || x > hi) {
        std::ostringstream os;
        os << "domain error: potential '" << name << "' evaluated at x=" << x << " outside [" << lo << ", " << hi
           << "]";
        throw DomainError(os.str());
    }
    if (std::abs(x) > cutoff) return 0.0;
    return u(x);
}

Potential potential_free()
{
    return potential_from_function([](double) { return 0.0; }, -INFINITY, INFINITY, true, 0.0, "free");
}

Potential potential_soliton(double x0)
{
    return potential_from_function(
        [x0](double x) {
            const double c = std::cosh(x - x0);
            return -2.0 / (c * c);
        },
        -INFINITY, INFINITY, true, std::abs(x0) + 20.0, "soliton");
}

Potential potential_from_function(std::function<double(double)> u, double lo, double hi, bool decays,
                                  double cutoff, std::string name)
{
    Potential p;
    p.u = std::move(u);
    p.lo = lo;
    p.hi = hi;
    p.decays = decays;
    p.cutoff = cutoff;
    p.name = std::move(name);
    return p;
}

Potential potential_from_system(std::shared_ptr<const StateFamily> sf)
{
    Potential p;
    p.name = "system";
    p.u = [sf](double x) { return sf->potential(x).real(); };
    if (sf->half_line()) {
        p.lo = 0.0;
        p.decays = false;
        return p;
    }
    double peak = 0.0;
    for (double x = -2.0; x <= 2.0; x += 0.25) peak = std::max(peak, std::abs(p.u(x)));
    const double tiny = 1e-17 * std::max(peak, 1.0);
    auto edge = [&](double dir) {
        double x = 0.0;
        for (int it = 0; it < 400; ++it) {
            x += dir * 0.5;
            double v;
            try {
                v = std::abs(p.u(x));
            } catch (const Error&) {
                return std::abs(x);
            }
            if (v < tiny && std::abs(x) > 2.0) return std::abs(x);
        }
        return std::abs(x);
    };
    p.cutoff = std::max(edge(1.0), edge(-1.0));
    p.decays = true;
    return p;
}

void validate_potential(const Potential& u, int samples)
{
    const double a = std::isinf(u.lo) ? -std::min(u.cutoff, 50.0) : u.lo;
    const double b = std::isinf(u.hi) ? std::min(u.cutoff, 50.0) : u.hi;
    for (int i = 0; i < samples; ++i) {
        const double x = a + (b - a) * i / (samples - 1.0);
        const double v = u(x);
        if (!std::isfinite(v)) {
            std::ostringstream os;
            os << "potential '" << u.name << "' is not finite at x=" << x;
            throw DomainError(os.str());
        }
    }
}

std::vector<SchrodingerPoint> solve_schrodinger(const Potential& u, cplx lambda, double x0, double x1,
                                                cplx psi0, cplx dpsi0, std::vector<double> points,
                                                const ode::Options& opt)
{
    if (!(x0 != x1)) throw ArgumentError("solve_schrodinger: x0 and x1 must differ");
    if (points.empty())
        for (int i = 0; i <= 100; ++i) points.push_back(x0 + (x1 - x0) * i / 100.0);
    const double dir = x1 > x0 ? 1.0 : -1.0;
    std::sort(points.begin(), points.end(), [dir](double a, double b) { return dir * a < dir * b; });
    for (double p : points)
        if (dir * (p - x0) < 0.0 || dir * (p - x1) > 0.0)
            throw ArgumentError("solve_schrodinger: output point outside [x0, x1]");
    const auto ys = ode::integrate(schrodinger_rhs(u, lambda), {psi0, dpsi0}, x0, points, opt);
    std::vector<SchrodingerPoint> out(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) out[i] = {points[i], ys[i][0], ys[i][1]};
    return out;
}

cplx WeylSolutions::wronskian(std::size_t i) const
{
    return psi_p[i] * dpsi_m[i] - dpsi_p[i] * psi_m[i];
}

double weyl_cutoff(const Potential& u, cplx lambda)
{
    const double rk = sqrt_neg(lambda).real();
    const double decay = rk > 0.0 ? std::min(15.0 / rk, 60.0) : 60.0;
    return std::max(decay, std::isinf(u.cutoff) ? 0.0 : u.cutoff) + kPad;
}

WeylSolutions weyl_solutions(const Potential& u, cplx lambda, std::vector<double> xs, double X,
                             const ode::Options& opt)
{
    if (!u.decays || !u.whole_line()) {
        std::ostringstream os;
        os << "unsupported: Weyl solutions need a potential decaying on the whole line ('" << u.name << "')";
        throw DomainError(os.str());
    }
    if (lambda.imag() == 0.0 && lambda.real() >= 0.0)
        throw DomainError("weyl_solutions: real lambda must lie below the spectrum (lambda < 0)");
    if (xs.empty()) throw ArgumentError("weyl_solutions: no evaluation points");
    xs = sorted_unique(std::move(xs));
    WeylSolutions w;
    w.k = sqrt_neg(lambda);
    w.cutoff = X > 0.0 ? X : weyl_cutoff(u, lambda);
    w.cutoff = std::max({w.cutoff, std::abs(xs.front()) + kPad, std::abs(xs.back()) + kPad});
    const double Xc = w.cutoff;
    const cplx e = 1.0;
    const auto rhs = schrodinger_rhs(u, lambda);

    std::vector<double> down(xs.rbegin(), xs.rend());
    const auto yp = ode::integrate(rhs, {e, -w.k * e}, Xc, down, opt);
    const auto ym = ode::integrate(rhs, {e, w.k * e}, -Xc, xs, opt);
    const std::size_t n = xs.size();
    w.x = xs;
    w.psi_p.resize(n);
    w.dpsi_p.resize(n);
    w.psi_m.resize(n);
    w.dpsi_m.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        w.psi_p[n - 1 - i] = yp[i][0];
        w.dpsi_p[n - 1 - i] = yp[i][1];
        w.psi_m[i] = ym[i][0];
        w.dpsi_m[i] = ym[i][1];
    }
    return w;
}

std::vector<cplx> green_diag_ode(const Potential& u, const std::vector<double>& xs, cplx lambda)
{
    const WeylSolutions w = weyl_solutions(u, lambda, xs);
    std::vector<cplx> out;
    out.reserve(xs.size());
    for (double x : xs) {
        const auto i = static_cast<std::size_t>(std::lower_bound(w.x.begin(), w.x.end(), x) - w.x.begin());
        const cplx wr = w.wronskian(i);
        const double scale = (std::abs(w.psi_p[i]) + std::abs(w.dpsi_p[i])) * (std::abs(w.psi_m[i]) + std::abs(w.dpsi_m[i]));
        if (!(std::abs(wr) > 1e-12 * scale)) {
            std::ostringstream os;
            os << "pole error: vanishing Wronskian at lambda=" << lambda << " (eigenvalue)";
            throw SingularError(os.str());
        }
        out.push_back(w.psi_p[i] * w.psi_m[i] / wr);
    }
    return out;
}

cplx green_diag_ode(const Potential& u, double x, cplx lambda)
{
    return green_diag_ode(u, std::vector<double>{x}, lambda).front();
}

double xi(const Potential& u, double x, double lambda, double eps, bool richardson)
{
    if (!(eps > 0.0)) throw ArgumentError("xi: eps must be > 0");
    auto one = [&](double e) {
        const cplx g = green_diag_ode(u, x, cplx(lambda, e));
        double a = std::arg(g);
        if (a < 0.0) a = (a < -M_PI / 2.0) ? M_PI : 0.0;
        return a / M_PI;
    };
    if (!richardson) return one(eps);
    return std::clamp(2.0 * one(0.5 * eps) - one(eps), 0.0, 1.0);
}

KodairaValue kodaira(const Potential& u, double x, cplx lambda)
{
    const WeylSolutions w = weyl_solutions(u, lambda, {x});
    const cplx p = w.psi_p[0], dp = w.dpsi_p[0], m = w.psi_m[0], dm = w.dpsi_m[0];
    KodairaValue k;
    k.xi << 2.0 * p * m, dp * m + p * dm, dp * m + p * dm, 2.0 * dp * dm;
    k.wronskian = w.wronskian(0);
    return k;
}

std::vector<Eigen::Matrix2d> kodaira_measure(const Potential& u, double x, const std::vector<double>& grid,
                                             double eps)
{
    if (grid.size() < 2) throw ArgumentError("kodaira_measure: grid needs at least 2 points");
    if (!std::is_sorted(grid.begin(), grid.end())) throw ArgumentError("kodaira_measure: grid must be sorted");
    if (!(eps > 0.0)) throw ArgumentError("kodaira_measure: eps must be > 0");
    std::vector<Eigen::Matrix2d> density(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const KodairaValue k = kodaira(u, x, cplx(grid[i], eps));
        density[i] = (k.xi / k.wronskian).imag() / M_PI;
    }
    std::vector<Eigen::Matrix2d> inc(grid.size() - 1);
    for (std::size_t i = 0; i + 1 < grid.size(); ++i)
        inc[i] = 0.5 * (grid[i + 1] - grid[i]) * (density[i] + density[i + 1]);
    return inc;
}

double weyl_m_identity_check(const Potential& u, double x, cplx lambda, double h)
{
    if (lambda.imag() == 0.0) throw DomainError("weyl_m_identity_check: lambda must be off the real axis");
    const WeylSolutions w = weyl_solutions(u, lambda, {x - h, x, x + h});
    for (std::size_t i = 0; i < 3; ++i)
        if (w.psi_p[i] == cplx(0.0) || w.psi_m[i] == cplx(0.0))
            throw SingularError("pole error: Weyl solution vanishes at x");
    auto g = [&w](std::size_t i) { return w.psi_p[i] * w.psi_m[i] / w.wronskian(i); };
    const cplx fd = std::log(g(2) / g(0)) / (2.0 * h);
    const cplx mp = w.dpsi_p[1] / w.psi_p[1];
    const cplx mm = -w.dpsi_m[1] / w.psi_m[1];
    return std::abs(fd - (mp - mm));
}

Eigen::Matrix2d canonical_j()
{
    Eigen::Matrix2d J;
    J << 0.0, -1.0, 1.0, 0.0;
    return J;
}

CanonicalSystem canonical_schrodinger(const Potential& u)
{
    CanonicalSystem cs;
    cs.name = "schrodinger";
    cs.omega0 = [u](double x) {
        Eigen::Matrix2d m;
        m << -u(x), 0.0, 0.0, 1.0;
        return m;
    };
    cs.omega1 = [](double) {
        Eigen::Matrix2d m;
        m << 1.0, 0.0, 0.0, 0.0;
        return m;
    };
    return cs;
}

CanonicalSystem canonical_airy()
{
    CanonicalSystem cs;
    cs.name = "airy";
    cs.omega0 = [](double x) {
        Eigen::Matrix2d m;
        m << x, 0.0, 0.0, -1.0;
        return m;
    };
    cs.omega1 = [](double) {
        Eigen::Matrix2d m;
        m << 1.0, 0.0, 0.0, 0.0;
        return m;
    };
    return cs;
}

CanonicalSystem canonical_constant(const Eigen::Matrix2d& omega0, const Eigen::Matrix2d& omega1)
{
    CanonicalSystem cs;
    cs.name = "constant";
    cs.omega0 = [omega0](double) { return omega0; };
    cs.omega1 = [omega1](double) { return omega1; };
    return cs;
}

void validate_canonical(const CanonicalSystem& cs, double a, double b, int samples)
{
    for (int i = 0; i < samples; ++i) {
        const double x = a + (b - a) * i / std::max(samples - 1, 1);
        const Eigen::Matrix2d o0 = cs.omega0(x), o1 = cs.omega1(x);
        if ((o0 - o0.transpose()).norm() > 1e-12 || (o1 - o1.transpose()).norm() > 1e-12) {
            std::ostringstream os;
            os << "canonical system '" << cs.name << "': Omega not symmetric at x=" << x;
            throw DomainError(os.str());
        }
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(o1);
        if (es.eigenvalues()(0) < -1e-12) {
            std::ostringstream os;
            os << "canonical system '" << cs.name << "': Omega1 not positive semidefinite at x=" << x;
            throw DomainError(os.str());
        }
    }
}

namespace {

// Psi' = J (lambda Omega1 + Omega0) Psi on the first two components; optional
// extra component accumulating Psi^T Omega1 Psi.
ode::Rhs canonical_rhs(const CanonicalSystem& cs, cplx lambda, bool with_energy)
{
    return [&cs, lambda, with_energy](const ode::State& y, ode::State& dy, double x) {
        const Eigen::Matrix2d o1 = cs.omega1(x);
        const Eigen::Matrix2cd M = lambda * o1.cast<cplx>() + cs.omega0(x).cast<cplx>();
        const cplx a = M(0, 0) * y[0] + M(0, 1) * y[1];
        const cplx b = M(1, 0) * y[0] + M(1, 1) * y[1];
        dy.resize(y.size());
        dy[0] = -b;
        dy[1] = a;
        if (with_energy)
            dy[2] = o1(0, 0) * y[0] * y[0] + 2.0 * o1(0, 1) * y[0] * y[1] + o1(1, 1) * y[1] * y[1];
    };
}

}  // namespace

std::vector<Eigen::Vector2cd> canonical_solve(const CanonicalSystem& cs, cplx lambda, double x0,
                                              const Eigen::Vector2cd& psi0, const std::vector<double>& xs,
                                              const ode::Options& opt)
{
    if (psi0.norm() == 0.0) throw ArgumentError("canonical_solve: Psi(0) must be nonzero");
    std::vector<Eigen::Vector2cd> out(xs.size());
    std::vector<double> fwd, bwd;
    for (std::size_t i = 0; i < xs.size(); ++i) (xs[i] >= x0 ? fwd : bwd).push_back(xs[i]);
    auto run = [&](std::vector<double> pts, double dir) {
        std::sort(pts.begin(), pts.end(), [dir](double a, double b) { return dir * a < dir * b; });
        const auto ys = ode::integrate(canonical_rhs(cs, lambda, false), {psi0(0), psi0(1)}, x0, pts, opt);
        for (std::size_t j = 0; j < pts.size(); ++j)
            for (std::size_t i = 0; i < xs.size(); ++i)
                if (xs[i] == pts[j]) out[i] = Eigen::Vector2cd(ys[j][0], ys[j][1]);
    };
    if (!fwd.empty()) run(fwd, 1.0);
    if (!bwd.empty()) run(bwd, -1.0);
    return out;
}

cplx hamiltonian_kernel(const CanonicalSystem& cs, cplx lambda, double x, double y, double x0,
                        const Eigen::Vector2cd& psi0)
{
    const Eigen::Matrix2cd J = canonical_j().cast<cplx>();
    if (x == y) {
        const Eigen::Vector2cd p = canonical_solve(cs, lambda, x0, psi0, {x}).front();
        const Eigen::Matrix2cd M = lambda * cs.omega1(x).cast<cplx>() + cs.omega0(x).cast<cplx>();
        return -(p.transpose() * M * p)(0, 0);
    }
    const auto ps = canonical_solve(cs, lambda, x0, psi0, {x, y});
    return (ps[1].transpose() * J * ps[0])(0, 0) / (x - y);
}

cplx airy_kernel(double x, double y)
{
    const AiryValue a = airy_ai(x);
    if (x == y) return a.aip * a.aip - x * a.ai * a.ai;
    const AiryValue b = airy_ai(y);
    return (a.ai * b.aip - a.aip * b.ai) / (x - y);
}

namespace {

cplx debranges_e(const CanonicalSystem& cs, double x, double kappa, const Eigen::Vector2d& psi0)
{
    const Eigen::Vector2cd p = canonical_solve(cs, kappa, 0.0, psi0.cast<cplx>(), {x}).front();
    return p(0) - cplx(0.0, 1.0) * p(1);
}

double wrap(double d)
{
    while (d > M_PI) d -= 2.0 * M_PI;
    while (d <= -M_PI) d += 2.0 * M_PI;
    return d;
}

}  // namespace

PhaseData debranges_phase(const CanonicalSystem& cs, double x, const std::vector<double>& kappa,
                          const Eigen::Vector2d& psi0)
{
    if (psi0.norm() == 0.0) throw ArgumentError("debranges_phase: Psi(0) must be nonzero");
    if (kappa.empty()) throw ArgumentError("debranges_phase: empty kappa grid");
    if (!std::is_sorted(kappa.begin(), kappa.end())) throw ArgumentError("debranges_phase: grid must be sorted");
    std::vector<double> grid = kappa;
    std::vector<cplx> E(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) E[i] = debranges_e(cs, x, grid[i], psi0);
    auto jump = [&](std::size_t i) {
        if (E[i] == cplx(0.0) || E[i + 1] == cplx(0.0)) return false;
        return std::abs(wrap(std::arg(E[i]) - std::arg(E[i + 1]))) >= M_PI / 2.0;
    };
    for (int level = 0;; ++level) {
        std::vector<std::size_t> bad;
        for (std::size_t i = 0; i + 1 < grid.size(); ++i)
            if (jump(i)) bad.push_back(i);
        if (bad.empty()) break;
        if (level == 6) {
            std::ostringstream os;
            os << "grid error: phase branch jump near kappa=" << grid[bad.front()] << " unresolved after 6 refinements";
            throw DomainError(os.str());
        }
        std::vector<double> g2;
        std::vector<cplx> e2;
        std::size_t b = 0;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            g2.push_back(grid[i]);
            e2.push_back(E[i]);
            if (b < bad.size() && bad[b] == i) {
                const double mid = 0.5 * (grid[i] + grid[i + 1]);
                g2.push_back(mid);
                e2.push_back(debranges_e(cs, x, mid, psi0));
                ++b;
            }
        }
        grid.swap(g2);
        E.swap(e2);
    }
    PhaseData pd;
    double prev = 0.0;
    bool started = false;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (std::abs(E[i]) < 1e-14) {
            pd.excluded.push_back(grid[i]);
            continue;
        }
        const double a = -std::arg(E[i]);
        const double phi = started ? prev + wrap(a - prev) : a;
        started = true;
        prev = phi;
        pd.grid.push_back(grid[i]);
        pd.phase.push_back(phi);
        pd.E.push_back(E[i]);
    }
    return pd;
}

double phase_derivative_check(const CanonicalSystem& cs, double x, double kappa, double h,
                              const Eigen::Vector2d& psi0)
{
    const PhaseData pd = debranges_phase(cs, x, {kappa - h, kappa, kappa + h}, psi0);
    if (!pd.excluded.empty()) throw SingularError("phase_derivative_check: E vanishes near kappa");
    const double dphi = (pd.phase.back() - pd.phase.front()) / (2.0 * h);
    const auto y = ode::integrate_to(canonical_rhs(cs, kappa, true), {psi0(0), psi0(1), 0.0}, 0.0, x);
    const double norm2 = std::norm(y[0]) + std::norm(y[1]);
    return std::abs(norm2 * dphi - y[2].real());
}

int winding_number(const std::vector<cplx>& theta)
{
    if (theta.size() < 2) throw ArgumentError("winding_number: need at least 2 samples");
    double total = 0.0;
    for (std::size_t i = 0; i < theta.size(); ++i) {
        const cplx a = theta[i], b = theta[(i + 1) % theta.size()];
        if (a == cplx(0.0) || b == cplx(0.0)) throw SingularError("winding_number: curve passes through 0");
        total += wrap(std::arg(b) - std::arg(a));
    }
    return static_cast<int>(std::lround(total / (2.0 * M_PI)));
}

std::vector<cplx> theta_from_e(const std::vector<cplx>& E)
{
    std::vector<cplx> t(E.size());
    for (std::size_t i = 0; i < E.size(); ++i) t[i] = std::conj(E[i]) / E[i];
    return t;
}

LambdaKernel lambda_kernel(const CanonicalSystem& cs, cplx lambda, cplx nu, double X,
                           const Eigen::Vector2cd& psi0_lambda, const Eigen::Vector2cd& psi0_nu)
{
    if (!(lambda.imag() > 0.0) || !(nu.imag() > 0.0))
        throw DomainError("lambda_kernel: lambda and nu need positive imaginary part");
    if (!(X > 1.0)) throw ArgumentError("lambda_kernel: cutoff X must exceed 1");
    const auto rl = canonical_rhs(cs, lambda, false);
    const auto rn = canonical_rhs(cs, nu, false);
    ode::Rhs f = [&](const ode::State& y, ode::State& dy, double x) {
        ode::State a{y[0], y[1]}, b{y[2], y[3]}, da(2), db(2);
        rl(a, da, x);
        rn(b, db, x);
        const Eigen::Matrix2d o1 = cs.omega1(x);
        dy.resize(5);
        dy[0] = da[0];
        dy[1] = da[1];
        dy[2] = db[0];
        dy[3] = db[1];
        dy[4] = std::conj(y[2]) * (o1(0, 0) * y[0] + o1(0, 1) * y[1]) +
                std::conj(y[3]) * (o1(1, 0) * y[0] + o1(1, 1) * y[1]);
    };
    const auto ys = ode::integrate(
        f, {psi0_lambda(0), psi0_lambda(1), psi0_nu(0), psi0_nu(1), 0.0}, 0.0, {0.5 * X, X - 1.0, X});
    auto mag = [](const ode::State& y, int o) { return std::hypot(std::abs(y[o]), std::abs(y[o + 1])); };
    for (int o : {0, 2})
        if (mag(ys[2], o) > mag(ys[0], o)) throw DomainError("divergence error: supplied Psi does not decay");
    const double i1 = mag(ys[1], 0) * mag(ys[1], 2), i2 = mag(ys[2], 0) * mag(ys[2], 2);
    LambdaKernel lk;
    lk.value = ys[2][4];
    const double rate = (i1 > 0.0 && i2 > 0.0) ? std::log(i1 / i2) : 0.0;
    lk.tail = rate > 0.0 ? i2 / rate : INFINITY;
    return lk;
}

DrachResult drach_check(const Potential& u, cplx lambda, const std::vector<double>& xs)
{
    if (xs.empty()) throw ArgumentError("drach_check: empty grid");
    const std::size_t n = xs.size();
    const double d = n > 1 ? xs[1] - xs[0] : 0.02;
    if (!(d > 0.0)) throw ArgumentError("drach_check: grid must be increasing");
    for (std::size_t i = 1; i < n; ++i)
        if (std::abs((xs[i] - xs[i - 1]) - d) > 1e-9 * std::max(1.0, std::abs(d)))
            throw ArgumentError("drach_check: grid must be uniform");
    const int m = static_cast<int>(std::ceil(d / 0.02 - 1e-12));
    const double hs = d / m;
    const int nf = static_cast<int>((n - 1) * m) + 5;  // fine points j = -2 .. (n-1)m + 2
    std::vector<double> fine(nf);
    for (int j = 0; j < nf; ++j) fine[j] = xs[0] + (j - 2) * hs;
    const std::vector<cplx> g = green_diag_ode(u, fine, lambda);
    std::vector<double> zeros;
    for (int j = 0; j < nf; ++j)
        if (std::abs(g[j]) < 1e-12) zeros.push_back(fine[j]);
    if (!zeros.empty()) {
        std::ostringstream os;
        os << "node error: resolvent diagonal vanishes at x =";
        for (double z : zeros) os << " " << z;
        throw DomainError(os.str());
    }
    std::vector<double> uf(nf);
    for (int j = 0; j < nf; ++j) uf[j] = u(fine[j]);

    auto d1 = [hs](const auto& f, int j) { return (f[j - 2] - 8.0 * f[j - 1] + 8.0 * f[j + 1] - f[j + 2]) / (12.0 * hs); };
    auto d2 = [hs](const auto& f, int j) {
        return (-f[j - 2] + 16.0 * f[j - 1] - 30.0 * f[j] + 16.0 * f[j + 1] - f[j + 2]) / (12.0 * hs * hs);
    };
    auto d3 = [hs](const auto& f, int j) {
        return (f[j + 2] - 2.0 * f[j + 1] + 2.0 * f[j - 1] - f[j - 2]) / (2.0 * hs * hs * hs);
    };

    std::vector<cplx> H(nf);
    for (int j = 0; j < nf; ++j) H[j] = g[j] * g[j];
    auto mu2_at = [&](int j) {
        const cplx g1 = d1(g, j), g2 = d2(g, j);
        return -0.5 * g[j] * g2 + 0.25 * g1 * g1 + g[j] * g[j] * (uf[j] - lambda);
    };

    DrachResult r;
    const int j0 = 2;
    r.mu2 = mu2_at(j0);
    for (std::size_t i = 0; i < n; ++i) {
        const int j = j0 + static_cast<int>(i) * m;
        const cplx h1 = d1(H, j), h2 = d2(H, j), h3 = d3(H, j);
        const cplx h0 = H[j];
        const double up = d1(uf, j);
        const cplx defect = h0 * h0 * h3 - 1.5 * h0 * h1 * h2 - 4.0 * (uf[j] - lambda) * h0 * h0 * h1 +
                            0.75 * h1 * h1 * h1 - 4.0 * up * h0 * h0 * h0;
        r.ode_residual = std::max(r.ode_residual, std::abs(defect));
        r.mu2_spread = std::max(r.mu2_spread, std::abs(mu2_at(j) - r.mu2));
    }

    // psi = sqrt(g) exp(int_{x_first}^x mu/g) on the fine grid
    const cplx mu = std::sqrt(r.mu2);
    std::vector<cplx> q(nf), psi(nf);
    for (int j = 0; j < nf; ++j) q[j] = mu / g[j];
    std::vector<cplx> I(nf, 0.0);
    for (int j = j0; j + 2 < nf; ++j)
        I[j + 1] = I[j] + hs * (-q[j - 1] + 13.0 * q[j] + 13.0 * q[j + 1] - q[j + 2]) / 24.0;
    for (int j = j0 - 1; j >= 1; --j)
        I[j] = I[j + 1] - hs * (-q[j - 1] + 13.0 * q[j] + 13.0 * q[j + 1] - q[j + 2]) / 24.0;
    I[0] = I[1] - hs * (9.0 * q[0] + 19.0 * q[1] - 5.0 * q[2] + q[3]) / 24.0;
    I[nf - 1] = I[nf - 2] + hs * (q[nf - 4] - 5.0 * q[nf - 3] + 19.0 * q[nf - 2] + 9.0 * q[nf - 1]) / 24.0;
    double scale = 0.0;
    for (int j = 0; j < nf; ++j) {
        psi[j] = std::sqrt(g[j]) * std::exp(I[j]);
        scale = std::max(scale, std::abs(psi[j]));
    }
    for (std::size_t i = 0; i < n; ++i) {
        const int j = j0 + static_cast<int>(i) * m;
        const cplx defect = -d2(psi, j) + (uf[j] - lambda) * psi[j];
        r.solution_residual = std::max(r.solution_residual, std::abs(defect) / scale);
    }
    return r;
}

}  // namespace spectral
