#include "spectral/hankel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace spectral {

cplx TrigPolynomial::operator[](int k) const
{
    auto it = coeffs.find(k);
    return it == coeffs.end() ? cplx(0.0) : it->second;
}

int TrigPolynomial::max_frequency() const
{
    int m = 0;
    for (const auto& [k, v] : coeffs)
        if (v != cplx(0.0)) m = std::max(m, std::abs(k));
    return m;
}

namespace {

MatC hankel_matrix(const ImpulseResponse& phi, const QuadratureRule& rule)
{
    return discretize_kernel([&phi](double x, double y) { return phi(x + y); }, rule).M;
}

}  // namespace

DiscretizedOperator hankel_operator(const ImpulseResponse& phi, const QuadratureRule& rule)
{
    return {rule, hankel_matrix(phi, rule)};
}

DiscretizedOperator hankel_product(const ImpulseResponse& phi, const ImpulseResponse& psi,
                                   const QuadratureRule& rule)
{
    return {rule, hankel_matrix(phi, rule) * hankel_matrix(psi, rule)};
}

ProductDeterminant hankel_product_dets(const ImpulseResponse& phi, const ImpulseResponse& psi,
                                       cplx lambda, const QuadratureRule& rule)
{
    const MatC Gp = hankel_matrix(phi, rule);
    const MatC Gq = hankel_matrix(psi, rule);
    const auto n = Gp.rows();
    ProductDeterminant out;
    out.product_form = fredholm_determinant(Gp * Gq, lambda).value;
    MatC block = MatC::Identity(2 * n, 2 * n);
    block.topRightCorner(n, n) = lambda * Gp;
    block.bottomLeftCorner(n, n) = -Gq;
    // det(block) = det(I + M) with M = block - I
    out.block_form = fredholm_determinant(block - MatC::Identity(2 * n, 2 * n), 1.0).value;
    return out;
}

cplx hankel_product_det(const ImpulseResponse& phi, const ImpulseResponse& psi, cplx lambda,
                        const QuadratureRule& rule)
{
    const ProductDeterminant d = hankel_product_dets(phi, psi, lambda, rule);
    const double diff = std::abs(d.product_form - d.block_form);
    if (diff > 1e-6 * std::max(1.0, std::abs(d.product_form))) {
        std::ostringstream os;
        os << "consistency error: product-kernel determinant " << d.product_form
           << " disagrees with block determinant " << d.block_form;
        throw ConsistencyError(os.str());
    }
    return d.product_form;
}

double semi_additive_check(const ImpulseResponse& phi, const ImpulseResponse& psi, double x,
                           double y, double h, const QuadratureRule& rule)
{
    auto K = [&](double a, double b) {
        cplx s = 0.0;
        for (std::size_t k = 0; k < rule.size(); ++k)
            s += rule.weights[k] * phi(a + rule.nodes[k]) * psi(rule.nodes[k] + b);
        return s;
    };
    const cplx d = (K(x + h, y + h) - K(x - h, y - h)) / (2.0 * h);
    return std::abs(d + phi(x) * psi(y));
}

CocycleResult toeplitz_cocycle(const TrigPolynomial& f, const TrigPolynomial& h, int N)
{
    if (N < 1) throw ArgumentError("toeplitz_cocycle: N must be positive");
    const int K = std::max(f.max_frequency(), h.max_frequency());
    CocycleResult out;
    out.truncated = N < 2 * K;
    // diagonal of the compressed commutator; the inner index runs over the
    // full half-line, which only reaches i + K for band-limited symbols
    cplx lhs = 0.0;
    for (int i = 0; i < N; ++i) {
        for (int k = std::max(0, i - K); k <= i + K; ++k) {
            lhs += f[k - i] * h[i - k] - h[k - i] * f[i - k];
        }
    }
    cplx rhs = 0.0;
    for (const auto& [k, v] : f.coeffs) rhs += static_cast<double>(k) * v * h[-k];
    out.lhs = lhs;
    out.rhs = rhs;
    return out;
}

std::pair<cplx, cplx> pincus_check(const MatC& V, const MatC& W)
{
    if (V.rows() != V.cols() || W.rows() != W.cols() || V.rows() != W.rows())
        throw ArgumentError("pincus_check: V and W must be square of equal size");
    const cplx tr = (V * W - W * V).trace();
    const MatC P = expm(V) * expm(W) * expm(-V) * expm(-W);
    const LogDet ld = fredholm_determinant(P - MatC::Identity(P.rows(), P.cols()), 1.0).log;
    return {tr, cplx(ld.log_abs, ld.arg)};
}

}  // namespace spectral
