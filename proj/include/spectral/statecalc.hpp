#pragma once

#include <functional>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <unordered_map>
#include <vector>

#include <Eigen/LU>

#include "spectral/common.hpp"
#include "spectral/quadrature.hpp"
#include "spectral/realization.hpp"

namespace spectral {

// R_x = int_x^inf e^{-tA} M e^{-tA} dt for a general n x n matrix M.
MatC lyapunov_gram(const MatC& A, const MatC& M, double x);

// The Gram family R_x of a realization together with F_x = (I + R_x)^{-1} and
// the bracket evaluator. Diagonal realizations are discretized once on their
// rule, so brackets and determinants are plain matrix algebra.
class StateFamily {
public:
    StateFamily(const Realization& sys);

    struct Point {
        double x = 0.0;
        MatC R;
        MatC E;      // e^{-xA}
        RowC left;   // C e^{-xA} F
        VecC right;  // F e^{-xA} B
        cplx det;    // det(I + R)
        Eigen::PartialPivLU<MatC> lu;  // of I + R

        const MatC& F() const;  // (I + R)^{-1}, formed on first use

    private:
        mutable std::once_flag f_once_;
        mutable MatC f_;
    };

    const MatrixRealization& system() const { return sys_; }
    Eigen::Index dim() const { return sys_.dim(); }
    bool half_line() const { return half_line_; }
    bool diagonal_generator() const { return diagonal_a_; }
    bool defective() const { return defective_; }

    MatC exp_minus(double t) const;  // e^{-tA}
    MatC gram(double x) const;
    std::shared_ptr<const Point> at(double x) const;

    cplx tau(double x) const;
    cplx log_tau(double x) const;
    cplx t_gl(double x, double y) const;
    cplx bracket(const MatC& X, double x) const;
    cplx potential(double x) const;
    // u, u', ..., u^{(order)} at x from the exact Taylor expansion of R_{x+s} = e^{-sA} R_x e^{-sA}
    std::vector<cplx> potential_jet(double x, int order) const;
    // inf{x0 >= 0 : ||R_x|| < 1 for x >= x0} on a sampled grid
    double invertibility_threshold() const;

private:
    void check_x(double x) const;
    std::shared_ptr<Point> compute(double x) const;

    MatrixRealization sys_;
    bool half_line_ = false;
    bool diagonal_a_ = false;
    bool defective_ = false;
    bool modal_ = false;
    MatC V_, Vinv_;
    VecC mu_;
    VecC bt_;    // V^{-1} B
    RowC ct_;    // C V
    MatC R0_;    // fallback: R_0 by quadrature

    mutable std::shared_mutex memo_mutex_;
    mutable std::unordered_map<double, std::shared_ptr<const Point>> memo_;
};

MatC gram(const StateFamily& sf, double x);
cplx tau(const StateFamily& sf, double x);
cplx t_gl(const StateFamily& sf, double x, double y);

// |phi(x+y) + T(x,y) + int_x^inf T(x,z) phi(z+y) dz| with the integral on the rule shifted to (x, inf).
double gl_residual(const StateFamily& sf, double x, double y, const QuadratureRule& rule);
double gl_residual(const StateFamily& sf, const ImpulseResponse& phi, double x, double y, const QuadratureRule& rule);
double gl_logderiv_check(const StateFamily& sf, double x, double h);

cplx bracket(const StateFamily& sf, const MatC& X, double x);
MatC star(const StateFamily& sf, const MatC& X, const MatC& Y, double x);
// A(I-2F)X + dX/dx + X(I-2F)A with dX/dx by a central difference of step h.
MatC dpartial(const StateFamily& sf, const std::function<MatC(double)>& X, double x, double h);

cplx potential(const StateFamily& sf, double x);
// -2 (log tau)'' by central differences, Richardson-refined from steps h and h/2.
cplx dyson_potential(const StateFamily& sf, double x, double h = 1e-3, bool richardson = true);

// cos(sqrt(kappa) x) + int_x^inf T(x,y) cos(sqrt(kappa) y) dy in closed form.
cplx baker_akhiezer(const StateFamily& sf, double x, double kappa);
// Same integral evaluated on the rule shifted to (x, inf).
cplx baker_akhiezer(const StateFamily& sf, double x, double kappa, const QuadratureRule& rule);

struct GreenSeries {
    cplx value;
    double error = 0.0;  // magnitude of the last retained term
    int terms = 0;
};

// (1/sqrt(-lambda)) (1/2 - [A]/lambda + [A^3]/lambda^2 - ...), with terms j = 1..m retained.
GreenSeries green_diag_series(const StateFamily& sf, double x, double lambda, int m);

// max(0, -min u) over the sampled points
double bottom_estimate(const StateFamily& sf, const std::vector<double>& xs);

cplx darboux_field(const StateFamily& sf, double x, cplx lambda);

struct VolterraResult {
    MatC op;      // matrix of V^{-1} - I acting on nodal values (weights included)
    MatC kernel;  // kernel values at node pairs
    int terms = 0;
};

// Neumann series for (I + T)^{-1} - I of a Volterra kernel bounded by M e^{-eps (x+y)}.
VolterraResult volterra_inverse(const Kernel& T, double M, double eps, const QuadratureRule& rule);

// det(I + R_x) of the 2x2-block system.
cplx hat_tau(const HatSystem& h, double x);

}  // namespace spectral
