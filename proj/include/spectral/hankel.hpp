#pragma once

#include <map>
#include <utility>

#include "spectral/common.hpp"
#include "spectral/quadrature.hpp"
#include "spectral/realization.hpp"

namespace spectral {

// Finitely supported Fourier series sum_k c_k e^{ik theta}.
struct TrigPolynomial {
    std::map<int, cplx> coeffs;

    cplx operator[](int k) const;
    int max_frequency() const;
};

// Nystrom discretization of the kernel phi(x + y).
DiscretizedOperator hankel_operator(const ImpulseResponse& phi, const QuadratureRule& rule);

// Symmetrized matrix of the kernel int_0^inf phi(x+u) psi(u+y) du on the rule.
DiscretizedOperator hankel_product(const ImpulseResponse& phi, const ImpulseResponse& psi,
                                   const QuadratureRule& rule);

struct ProductDeterminant {
    cplx product_form;  // det(I + lambda K)
    cplx block_form;    // det [[I, lambda G_phi], [-G_psi, I]]
};

ProductDeterminant hankel_product_dets(const ImpulseResponse& phi, const ImpulseResponse& psi,
                                       cplx lambda, const QuadratureRule& rule);

// det(I + lambda K); throws ConsistencyError when the block form disagrees by more than 1e-6.
cplx hankel_product_det(const ImpulseResponse& phi, const ImpulseResponse& psi, cplx lambda,
                        const QuadratureRule& rule);

// |d/dt K(x+t, y+t) + phi(x) psi(y)| with a central difference of step h.
double semi_additive_check(const ImpulseResponse& phi, const ImpulseResponse& psi, double x,
                           double y, double h,
                           const QuadratureRule& rule = build_rule(128, MapKind::rational, 1.0));

struct CocycleResult {
    cplx lhs;
    cplx rhs;
    bool truncated = false;
};

// lhs: trace of the N x N compression of [T_f, T_h] with T_f(i, j) = f_{j-i};
// rhs: sum_k k f_k h_{-k}.
CocycleResult toeplitz_cocycle(const TrigPolynomial& f, const TrigPolynomial& h, int N);

// (trace(VW - WV), log det(e^V e^W e^{-V} e^{-W})) with the principal logarithm.
std::pair<cplx, cplx> pincus_check(const MatC& V, const MatC& W);

}  // namespace spectral
