#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "spectral/common.hpp"
#include "spectral/quadrature.hpp"

namespace spectral {

// A function of u on (0, inf) with the points where it fails to be smooth.
struct Profile {
    std::function<cplx(double)> f;
    std::vector<double> breakpoints;
    std::string name;

    cplx operator()(double u) const { return f(u); }
};

Profile profile_constant(cplx value);
Profile profile_indicator(double a, double b);
// e^{-rate u}
Profile profile_exponential(cplx rate);
// u^{power} e^{rate u}
Profile profile_power_exponential(double power, cplx rate);
// Linear interpolation through (u, value) pairs, zero outside the table range.
Profile profile_table(std::vector<std::pair<double, cplx>> points);
Profile profile_scaled(const Profile& p, cplx factor);

struct MatrixRealization {
    MatC A;
    VecC B;
    RowC C;

    Eigen::Index dim() const { return A.rows(); }
};

// Validates shapes and stability (min Re eig(A) > 1e-10).
MatrixRealization make_matrix_realization(MatC A, VecC B, RowC C);

struct DiagonalChannel {
    Profile b;
    Profile c;
    double s0 = 0.0;
};

// Howland-type system on L^2(0, inf): A is multiplication by u + s0.
// A direct sum is a list of channels sharing one quadrature rule.
struct DiagonalRealization {
    std::vector<DiagonalChannel> channels;
    int nodes = 128;
    int panel_nodes = 32;
    MapKind map = MapKind::rational;
    double scale = 1.0;
    // true when the impulse response decays only algebraically
    bool algebraic = false;
    // closed-form impulse response when known (rational systems); empty otherwise
    std::function<cplx(double)> response;

    QuadratureRule channel_rule(const DiagonalChannel& ch) const;
};

DiagonalRealization make_diagonal_realization(Profile b, Profile c, double s0 = 0.0);

using Realization = std::variant<MatrixRealization, DiagonalRealization>;

// State-space matrices of a realization; diagonal systems are discretized on
// their rule as A = diag(u_i + s0), B = sqrt(w_i) b(u_i), C = sqrt(w_i) c(u_i).
MatrixRealization discretize(const DiagonalRealization& sys);
MatrixRealization as_matrix(const Realization& sys);

struct ImpulseResponse {
    std::function<cplx(double)> evaluator;
    // exponential decay bound; zero marks algebraic decay
    double decay_rate = 0.0;

    cplx operator()(double t) const { return evaluator(t); }
};

cplx impulse_response(const Realization& sys, double t);
ImpulseResponse make_impulse_response(const Realization& sys);
ImpulseResponse make_impulse_response(std::function<cplx(double)> f, double decay_rate);

struct Pole {
    cplx a;
    int r = 1;
};

Realization rational_realization(const std::vector<Pole>& poles, int nodes = 128,
                                 MapKind map = MapKind::rational, double scale = 1.0);

Realization direct_sum(const Realization& s1, const Realization& s2);

// zeta == nullopt is the point at infinity, which leaves the system unchanged.
Realization darboux_shift(const Realization& sys, std::optional<cplx> zeta);
// Applies the inverse factor (zeta I - A)(zeta I + A)^{-1} to B.
Realization darboux_unshift(const Realization& sys, std::optional<cplx> zeta);

// 2x2 input/output system built from two realizations with a common A.
struct HatSystem {
    MatC A;  // 2n x 2n
    MatC B;  // 2n x 2
    MatC C;  // 2 x 2n

    Eigen::Matrix2cd impulse_response(double t) const;
};

HatSystem hat_system(const Realization& s1, const Realization& s2, cplx lambda);

// Dense matrix exponential e^{M} (scaling and squaring with Pade approximant).
MatC expm(const MatC& M);

}  // namespace spectral
