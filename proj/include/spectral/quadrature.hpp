#pragma once

#include <functional>
#include <vector>

#include "spectral/common.hpp"

namespace spectral {

enum class MapKind { rational, exponential };

MapKind parse_map_kind(const std::string& name);
std::string to_string(MapKind kind);

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
    MapKind map_kind = MapKind::exponential;
    double scale = 1.0;

    std::size_t size() const { return nodes.size(); }
};

// Gauss-Legendre nodes and weights on (-1, 1), ascending.
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w);

// Gauss-Legendre rule on (0, inf) via t = L(1+xi)/(1-xi) or t = -L ln((1-xi)/2).
QuadratureRule build_rule(int n, MapKind kind = MapKind::exponential, double L = 1.0);

// Plain Gauss-Legendre rule on [a, b].
QuadratureRule interval_rule(int n, double a, double b);

// Rule on (0, inf) split at breakpoints: Gauss-Legendre panels on the finite
// pieces followed by a mapped tail starting at the last breakpoint.
QuadratureRule composite_rule(const std::vector<double>& breakpoints, int n_panel, int n_tail,
                              MapKind kind, double L);

// Same rule translated to (a, inf).
QuadratureRule shifted(const QuadratureRule& rule, double a);

using Kernel = std::function<cplx(double, double)>;

struct DiscretizedOperator {
    QuadratureRule rule;
    MatC M;
};

DiscretizedOperator discretize_kernel(const Kernel& k, const QuadratureRule& rule);

struct LogDet {
    double log_abs = 0.0;
    double arg = 0.0;
};

struct Determinant {
    cplx value{1.0, 0.0};
    LogDet log;
    bool overflow = false;
};

Determinant fredholm_determinant(const MatC& M, cplx z);
cplx fredholm_det(const DiscretizedOperator& op, cplx z);
LogDet fredholm_log_det(const DiscretizedOperator& op, cplx z);

std::vector<cplx> eigenvalues(const DiscretizedOperator& op);

struct ConvergedDet {
    cplx value;
    int nodes = 0;
    bool converged = false;
    double change = 0.0;
};

// Doubles the node count from n0 until successive determinants agree to tol
// (relative) or n exceeds n_max.
ConvergedDet fredholm_det_refined(const Kernel& k, cplx z, MapKind kind, double L, double tol,
                                  int n0 = 64, int n_max = 512);

}  // namespace spectral
