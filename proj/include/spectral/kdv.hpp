#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <gmpxx.h>

#include "spectral/common.hpp"
#include "spectral/statecalc.hpp"

namespace spectral {

// Exponent vector over u_0 = u, u_1 = u', ...; no trailing zeros.
using Monomial = std::vector<int>;

// Differential polynomial in u, u', u'', ... with exact rational coefficients.
class DiffPoly {
public:
    DiffPoly() = default;
    static DiffPoly constant(const mpq_class& c);
    static DiffPoly u(int order = 0, const mpq_class& c = 1);

    const std::map<Monomial, mpq_class>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    bool is_constant() const;
    mpq_class constant_term() const;
    int max_order() const;  // highest derivative present, -1 for constants
    std::optional<int> weight() const;  // common weight if homogeneous (u_i has weight i + 2)

    DiffPoly& operator+=(const DiffPoly& o);
    DiffPoly& operator-=(const DiffPoly& o);
    DiffPoly& operator*=(const mpq_class& c);
    friend DiffPoly operator+(DiffPoly a, const DiffPoly& b) { return a += b; }
    friend DiffPoly operator-(DiffPoly a, const DiffPoly& b) { return a -= b; }
    friend DiffPoly operator*(DiffPoly a, const mpq_class& c) { return a *= c; }
    friend DiffPoly operator*(const mpq_class& c, DiffPoly a) { return a *= c; }
    friend DiffPoly operator*(const DiffPoly& a, const DiffPoly& b);
    DiffPoly operator-() const { return *this * mpq_class(-1); }
    bool operator==(const DiffPoly& o) const { return terms_ == o.terms_; }

    void add_term(const Monomial& m, const mpq_class& c);
    // jet[i] = value of u_i
    double evaluate(const std::vector<double>& jet) const;
    std::string to_string() const;

private:
    std::map<Monomial, mpq_class> terms_;
};

DiffPoly d_dx(const DiffPoly& p);
DiffPoly power(const DiffPoly& p, int e);
// Replaces u_i by q everywhere.
DiffPoly substitute(const DiffPoly& p, int i, const DiffPoly& q);
// All monomials of the given weight.
std::vector<Monomial> monomials_of_weight(int w);

// Polynomial in lambda with DiffPoly coefficients; coeffs[j] multiplies lambda^j.
struct LambdaPoly {
    std::vector<DiffPoly> coeffs;
    int degree() const;
};

// Differential operator sum_k coeffs[k] d^k; coeffs[k] multiplies the k-th power of d/dx.
struct DiffOperator {
    std::vector<DiffPoly> coeffs;

    int order() const;
    bool is_zero() const;
    void trim();
    DiffOperator& operator+=(const DiffOperator& o);
    friend DiffOperator operator+(DiffOperator a, const DiffOperator& b) { return a += b; }
    friend DiffOperator operator-(const DiffOperator& a, const DiffOperator& b);
    DiffOperator operator*(const DiffPoly& left) const;  // left multiplication by a coefficient
    std::string to_string() const;
};

DiffOperator compose(const DiffOperator& a, const DiffOperator& b);
DiffOperator multiplication(const DiffPoly& p);
DiffOperator schrodinger_operator();  // L = -d^2 + u

// Stationary KdV hierarchy: f_0 = 1, f_{m+1}' = (1/4)(-f_m''' + 4 u f_m' + 2 u' f_m),
// integrated within the differential algebra, plus the constant c_{m+1}.
std::vector<DiffPoly> kdv_recursion(int ell, const std::vector<mpq_class>& constants);

LambdaPoly big_f(int n, const std::vector<DiffPoly>& fs);

// Normal form modulo the termination relation d/dx f_{ell+1} = 0, which is solved
// for u_{2 ell + 1}; higher derivatives follow by differentiation.
class Termination {
public:
    Termination(int ell, const std::vector<DiffPoly>& fs);
    int ell() const { return ell_; }
    DiffPoly reduce(const DiffPoly& p) const;
    DiffOperator reduce(const DiffOperator& op) const;
    const DiffPoly& rule(int order) const;  // expression for u_order, order > 2 ell

private:
    void extend(int order) const;

    int ell_;
    mutable std::vector<DiffPoly> rules_;  // rules_[k] is u_{2 ell + 1 + k}
};

// Q = (1/2) F'' F - (1/4) (F')^2 - (u - lambda) F^2 of degree 2n + 1. With a termination
// supplied, every coefficient is checked to have zero derivative modulo the relation and is
// returned in normal form.
LambdaPoly q_poly(int n, const std::vector<DiffPoly>& fs, const Termination* term = nullptr);

// P = sum_{j=0}^{n} (f_{n-j} d - (1/2) f_{n-j}') L^j
DiffOperator p_operator(int n, const std::vector<DiffPoly>& fs);

// Q(L) + P^2 in normal form; the zero operator when the identity holds.
DiffOperator burchnall_chaundy_check(int ell, const std::vector<mpq_class>& constants);
// [L, P] in normal form.
DiffOperator lp_commutator(int ell, const std::vector<mpq_class>& constants);

struct HyperellipticCurve {
    std::vector<double> q;  // q[j] multiplies lambda^j
    std::vector<cplx> branch_points;  // distinct roots of Q
    std::vector<int> multiplicity;
    int genus = 0;
    bool degenerate = false;
    std::vector<std::pair<double, double>> gaps;
};

// Roots of a real polynomial (coefficients by increasing power) via a balanced companion
// matrix and Newton polishing.
std::vector<cplx> polynomial_roots(const std::vector<double>& coeffs);
HyperellipticCurve curve_from_q(const std::vector<double>& q);

// jet = (u, u', ..., u^{(2 ell)}) at a point.
HyperellipticCurve spectral_curve(int ell, const std::vector<mpq_class>& constants, const std::vector<double>& jet);
// Jet from a realization at x, cross-checked against the jet at x + 0.5.
HyperellipticCurve spectral_curve(int ell, const std::vector<mpq_class>& constants, const StateFamily& sf,
                                  double x);

}  // namespace spectral
