#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "spectral/common.hpp"
#include "spectral/ode.hpp"
#include "spectral/statecalc.hpp"

namespace spectral {

// Real potential for L = -d^2/dx^2 + u. Beyond +-cutoff the potential is treated as zero.
struct Potential {
    std::function<double(double)> u;
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    bool decays = false;
    double cutoff = std::numeric_limits<double>::infinity();
    std::string name;

    double operator()(double x) const;
    bool whole_line() const { return std::isinf(lo) && std::isinf(hi); }
};

Potential potential_free();
// -2 sech^2(x - x0)
Potential potential_soliton(double x0 = 0.0);
Potential potential_from_function(std::function<double(double)> u, double lo, double hi, bool decays,
                                  double cutoff, std::string name = "custom");
// u = -4 [A]_x of a realization; decaying on the whole line for matrix realizations.
Potential potential_from_system(std::shared_ptr<const StateFamily> sf);
// Samples the potential and throws DomainError on non-finite values.
void validate_potential(const Potential& u, int samples = 257);

struct SchrodingerPoint {
    double x = 0.0;
    cplx psi;
    cplx dpsi;
};

// Integrates -psi'' + u psi = lambda psi from x0 to x1 (either direction) and
// reports (psi, psi') at the requested points, which default to 101 uniform points.
std::vector<SchrodingerPoint> solve_schrodinger(const Potential& u, cplx lambda, double x0, double x1,
                                                cplx psi0, cplx dpsi0, std::vector<double> points = {},
                                                const ode::Options& opt = {});

// psi_+ decays at +inf and psi_- at -inf. Both start from the free asymptotics
// (1, -+k) at +-X with k = sqrt(-lambda), i.e. psi_+-(x) = e^{-+k(x -+ X)} where u vanishes.
struct WeylSolutions {
    std::vector<double> x;
    std::vector<cplx> psi_p, dpsi_p, psi_m, dpsi_m;
    double cutoff = 0.0;
    cplx k;

    // psi_+ psi_-' - psi_+' psi_-, equal to 2k for u = 0
    cplx wronskian(std::size_t i) const;
};

double weyl_cutoff(const Potential& u, cplx lambda);
WeylSolutions weyl_solutions(const Potential& u, cplx lambda, std::vector<double> xs, double X = 0.0,
                             const ode::Options& opt = {});

// Diagonal of the resolvent (L - lambda)^{-1}: psi_+ psi_- / (psi_+ psi_-' - psi_+' psi_-).
// This is minus the diagonal of (lambda - L)^{-1}, and it is positive below the spectrum.
cplx green_diag_ode(const Potential& u, double x, cplx lambda);
std::vector<cplx> green_diag_ode(const Potential& u, const std::vector<double>& xs, cplx lambda);

// (1/pi) arg of the resolvent diagonal at lambda + i eps, in [0, 1]; optionally
// Richardson-extrapolated from eps and eps/2.
double xi(const Potential& u, double x, double lambda, double eps = 1e-6, bool richardson = false);

struct KodairaValue {
    Eigen::Matrix2cd xi;  // characteristic matrix
    cplx wronskian;       // psi_+ psi_-' - psi_+' psi_-
};

KodairaValue kodaira(const Potential& u, double x, cplx lambda);
// Increments (1/pi) int Im(Xi/Wr)(nu + i eps) dnu between consecutive grid points, by trapezoid.
std::vector<Eigen::Matrix2d> kodaira_measure(const Potential& u, double x, const std::vector<double>& grid,
                                             double eps = 1e-6);

// |d/dx log G - (m_+ - m_-)| with m_+ = psi_+'/psi_+, m_- = -psi_-'/psi_- and a central difference of step h.
double weyl_m_identity_check(const Potential& u, double x, cplx lambda, double h = 1e-3);

// d(J Psi)/dx = -(lambda Omega1 + Omega0) Psi with J = [[0,-1],[1,0]].
struct CanonicalSystem {
    std::function<Eigen::Matrix2d(double)> omega0;
    std::function<Eigen::Matrix2d(double)> omega1;
    std::string name;
};

// Omega0 = diag(-u, 1), Omega1 = diag(1, 0); Psi = [f, -f'].
CanonicalSystem canonical_schrodinger(const Potential& u);
// Omega0 = [[x,0],[0,-1]], Omega1 = diag(1, 0); Psi = [Ai(x + lambda), Ai'(x + lambda)] is a solution.
CanonicalSystem canonical_airy();
CanonicalSystem canonical_constant(const Eigen::Matrix2d& omega0, const Eigen::Matrix2d& omega1);
void validate_canonical(const CanonicalSystem& cs, double a = 0.0, double b = 10.0, int samples = 101);

Eigen::Matrix2d canonical_j();

std::vector<Eigen::Vector2cd> canonical_solve(const CanonicalSystem& cs, cplx lambda, double x0,
                                              const Eigen::Vector2cd& psi0, const std::vector<double>& xs,
                                              const ode::Options& opt = {});

// Psi(y)^T J Psi(x) / (x - y); on the diagonal the limit -Psi^T (lambda Omega1 + Omega0) Psi.
cplx hamiltonian_kernel(const CanonicalSystem& cs, cplx lambda, double x, double y, double x0,
                        const Eigen::Vector2cd& psi0);
cplx airy_kernel(double x, double y);

struct PhaseData {
    std::vector<double> grid;
    std::vector<double> phase;   // continuous branch of -arg E
    std::vector<cplx> E;         // Psi_1 - i Psi_2 at x
    std::vector<double> excluded;  // grid points where E vanishes
};

PhaseData debranges_phase(const CanonicalSystem& cs, double x, const std::vector<double>& kappa,
                          const Eigen::Vector2d& psi0 = Eigen::Vector2d(1.0, 0.0));
// | |E|^2 phi'(kappa) - int_0^x Psi^T Omega1 Psi dy | with phi' by central differences of step h.
double phase_derivative_check(const CanonicalSystem& cs, double x, double kappa, double h = 1e-4,
                              const Eigen::Vector2d& psi0 = Eigen::Vector2d(1.0, 0.0));
// Winding number about 0 of the closed curve through the samples.
int winding_number(const std::vector<cplx>& theta);
// Theta = conj(E)/E on a real grid.
std::vector<cplx> theta_from_e(const std::vector<cplx>& E);

struct LambdaKernel {
    cplx value;
    double tail = 0.0;  // estimated magnitude of the truncated tail
};

// int_0^X Psi(x; nu)^* Omega1 Psi(x; lambda) dx for decaying initial data.
LambdaKernel lambda_kernel(const CanonicalSystem& cs, cplx lambda, cplx nu, double X,
                           const Eigen::Vector2cd& psi0_lambda, const Eigen::Vector2cd& psi0_nu);

struct DrachResult {
    double ode_residual = 0.0;
    double solution_residual = 0.0;
    double mu2_spread = 0.0;  // max |mu^2(x) - mu^2(x_first)|
    cplx mu2;
};

// Checks the third-order equation for h = g^2 with g the resolvent diagonal, and the
// solution sqrt(g) exp(int mu/g) on a uniform grid, using stencils of step <= 0.02.
DrachResult drach_check(const Potential& u, cplx lambda, const std::vector<double>& xs);

}  // namespace spectral
