#include "spectral/kdv.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace spectral {

namespace {

void trim_monomial(Monomial& m)
{
    while (!m.empty() && m.back() == 0) m.pop_back();
}

mpq_class binomial(int n, int k)
{
    mpz_class r;
    mpz_bin_uiui(r.get_mpz_t(), static_cast<unsigned long>(n), static_cast<unsigned long>(k));
    return mpq_class(r);
}

}  // namespace

DiffPoly DiffPoly::constant(const mpq_class& c)
{
    DiffPoly p;
    p.add_term({}, c);
    return p;
}

DiffPoly DiffPoly::u(int order, const mpq_class& c)
{
    Monomial m(order + 1, 0);
    m[order] = 1;
    DiffPoly p;
    p.add_term(m, c);
    return p;
}

void DiffPoly::add_term(const Monomial& m0, const mpq_class& c0)
{
    mpq_class c = c0;
    c.canonicalize();
    if (c == 0) return;
    Monomial m = m0;
    trim_monomial(m);
    auto it = terms_.find(m);
    if (it == terms_.end()) {
        terms_.emplace(std::move(m), c);
        return;
    }
    it->second += c;
    if (it->second == 0) terms_.erase(it);
}

bool DiffPoly::is_constant() const
{
    return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first.empty());
}

mpq_class DiffPoly::constant_term() const
{
    auto it = terms_.find(Monomial{});
    return it == terms_.end() ? mpq_class(0) : it->second;
}

int DiffPoly::max_order() const
{
    int r = -1;
    for (const auto& [m, c] : terms_) r = std::max(r, static_cast<int>(m.size()) - 1);
    return r;
}

std::optional<int> DiffPoly::weight() const
{
    std::optional<int> w;
    for (const auto& [m, c] : terms_) {
        int s = 0;
        for (std::size_t i = 0; i < m.size(); ++i) s += m[i] * static_cast<int>(i + 2);
        if (w && *w != s) return std::nullopt;
        w = s;
    }
    return w;
}

DiffPoly& DiffPoly::operator+=(const DiffPoly& o)
{
    for (const auto& [m, c] : o.terms_) add_term(m, c);
    return *this;
}

DiffPoly& DiffPoly::operator-=(const DiffPoly& o)
{
    for (const auto& [m, c] : o.terms_) add_term(m, -c);
    return *this;
}

DiffPoly& DiffPoly::operator*=(const mpq_class& c0)
{
    mpq_class c = c0;
    c.canonicalize();
    if (c == 0) {
        terms_.clear();
        return *this;
    }
    for (auto& [m, v] : terms_) v *= c;
    return *this;
}

DiffPoly operator*(const DiffPoly& a, const DiffPoly& b)
{
    DiffPoly r;
    for (const auto& [ma, ca] : a.terms_)
        for (const auto& [mb, cb] : b.terms_) {
            Monomial m(std::max(ma.size(), mb.size()), 0);
            for (std::size_t i = 0; i < ma.size(); ++i) m[i] += ma[i];
            for (std::size_t i = 0; i < mb.size(); ++i) m[i] += mb[i];
            r.add_term(m, ca * cb);
        }
    return r;
}

double DiffPoly::evaluate(const std::vector<double>& jet) const
{
    double s = 0.0;
    for (const auto& [m, c] : terms_) {
        if (m.size() > jet.size()) {
            std::ostringstream os;
            os << "DiffPoly::evaluate: needs u_" << m.size() - 1 << " but the jet has " << jet.size() << " entries";
            throw ArgumentError(os.str());
        }
        double t = c.get_d();
        for (std::size_t i = 0; i < m.size(); ++i) t *= std::pow(jet[i], m[i]);
        s += t;
    }
    return s;
}

std::string DiffPoly::to_string() const
{
    if (terms_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [m, c] : terms_) {
        if (!first) os << (c < 0 ? " - " : " + ");
        else if (c < 0) os << "-";
        first = false;
        const mpq_class a = abs(c);
        const bool unit = (a == 1) && !m.empty();
        if (!unit) os << a.get_str();
        bool lead = unit;
        for (std::size_t i = 0; i < m.size(); ++i) {
            if (m[i] == 0) continue;
            if (!lead) os << "*";
            lead = false;
            os << "u" << i;
            if (m[i] > 1) os << "^" << m[i];
        }
    }
    return os.str();
}

DiffPoly d_dx(const DiffPoly& p)
{
    DiffPoly r;
    for (const auto& [m, c] : p.terms()) {
        for (std::size_t i = 0; i < m.size(); ++i) {
            if (m[i] == 0) continue;
            Monomial n = m;
            if (n.size() < i + 2) n.resize(i + 2, 0);
            n[i] -= 1;
            n[i + 1] += 1;
            r.add_term(n, c * m[i]);
        }
    }
    return r;
}

DiffPoly power(const DiffPoly& p, int e)
{
    DiffPoly r = DiffPoly::constant(1);
    for (int i = 0; i < e; ++i) r = r * p;
    return r;
}

DiffPoly substitute(const DiffPoly& p, int i, const DiffPoly& q)
{
    DiffPoly r;
    std::vector<DiffPoly> powers{DiffPoly::constant(1)};
    for (const auto& [m, c] : p.terms()) {
        const int e = static_cast<int>(m.size()) > i ? m[i] : 0;
        if (e == 0) {
            r.add_term(m, c);
            continue;
        }
        while (static_cast<int>(powers.size()) <= e) powers.push_back(powers.back() * q);
        Monomial rest = m;
        rest[i] = 0;
        DiffPoly base;
        base.add_term(rest, c);
        r += base * powers[e];
    }
    return r;
}

std::vector<Monomial> monomials_of_weight(int w)
{
    std::vector<Monomial> out;
    Monomial cur;
    // parts of size >= 2, non-increasing order index to avoid duplicates
    std::function<void(int, int)> rec = [&](int remaining, int max_index) {
        if (remaining == 0) {
            Monomial m = cur;
            trim_monomial(m);
            out.push_back(m);
            return;
        }
        for (int i = std::min(max_index, remaining - 2); i >= 0; --i) {
            if (cur.size() < static_cast<std::size_t>(i + 1)) cur.resize(i + 1, 0);
            cur[i] += 1;
            rec(remaining - (i + 2), i);
            cur[i] -= 1;
        }
    };
    if (w >= 2) rec(w, w - 2);
    std::sort(out.begin(), out.end());
    return out;
}

int LambdaPoly::degree() const
{
    for (int j = static_cast<int>(coeffs.size()) - 1; j >= 0; --j)
        if (!coeffs[j].is_zero()) return j;
    return -1;
}

int DiffOperator::order() const
{
    for (int k = static_cast<int>(coeffs.size()) - 1; k >= 0; --k)
        if (!coeffs[k].is_zero()) return k;
    return -1;
}

bool DiffOperator::is_zero() const { return order() < 0; }

void DiffOperator::trim()
{
    while (!coeffs.empty() && coeffs.back().is_zero()) coeffs.pop_back();
}

DiffOperator& DiffOperator::operator+=(const DiffOperator& o)
{
    if (coeffs.size() < o.coeffs.size()) coeffs.resize(o.coeffs.size());
    for (std::size_t k = 0; k < o.coeffs.size(); ++k) coeffs[k] += o.coeffs[k];
    trim();
    return *this;
}

DiffOperator operator-(const DiffOperator& a, const DiffOperator& b)
{
    DiffOperator r = a;
    if (r.coeffs.size() < b.coeffs.size()) r.coeffs.resize(b.coeffs.size());
    for (std::size_t k = 0; k < b.coeffs.size(); ++k) r.coeffs[k] -= b.coeffs[k];
    r.trim();
    return r;
}

DiffOperator DiffOperator::operator*(const DiffPoly& left) const
{
    DiffOperator r;
    for (const auto& c : coeffs) r.coeffs.push_back(left * c);
    r.trim();
    return r;
}

std::string DiffOperator::to_string() const
{
    if (is_zero()) return "0";
    std::ostringstream os;
    bool first = true;
    for (int k = order(); k >= 0; --k) {
        if (coeffs[k].is_zero()) continue;
        if (!first) os << " + ";
        first = false;
        os << "(" << coeffs[k].to_string() << ")";
        if (k > 0) os << "*d^" << k;
    }
    return os.str();
}

DiffOperator compose(const DiffOperator& a, const DiffOperator& b)
{
    DiffOperator r;
    const int oa = a.order(), ob = b.order();
    if (oa < 0 || ob < 0) return r;
    r.coeffs.resize(oa + ob + 1);
    for (int j = 0; j <= ob; ++j) {
        std::vector<DiffPoly> der{b.coeffs[j]};
        for (int s = 1; s <= oa; ++s) der.push_back(d_dx(der.back()));
        for (int i = 0; i <= oa; ++i) {
            if (a.coeffs[i].is_zero()) continue;
            for (int s = 0; s <= i; ++s) {
                if (der[s].is_zero()) continue;
                r.coeffs[i - s + j] += a.coeffs[i] * der[s] * binomial(i, s);
            }
        }
    }
    r.trim();
    return r;
}

DiffOperator multiplication(const DiffPoly& p)
{
    DiffOperator r;
    r.coeffs.push_back(p);
    r.trim();
    return r;
}

DiffOperator schrodinger_operator()
{
    DiffOperator L;
    L.coeffs = {DiffPoly::u(0), DiffPoly(), DiffPoly::constant(-1)};
    return L;
}

namespace {

// Finds g with d_dx(g) = rhs among monomials of weight 1..max_weight (no constant term).
DiffPoly integrate_exact(const DiffPoly& rhs, int max_weight)
{
    std::vector<Monomial> basis;
    for (int w = 2; w <= max_weight; ++w) {
        auto ms = monomials_of_weight(w);
        basis.insert(basis.end(), ms.begin(), ms.end());
    }
    std::vector<DiffPoly> images;
    std::map<Monomial, int> rows;
    for (const auto& m : basis) {
        DiffPoly p;
        p.add_term(m, 1);
        images.push_back(d_dx(p));
        for (const auto& [mm, c] : images.back().terms()) rows.emplace(mm, 0);
    }
    for (const auto& [mm, c] : rhs.terms()) rows.emplace(mm, 0);
    int r = 0;
    for (auto& [mm, idx] : rows) idx = r++;
    const int nr = r, nc = static_cast<int>(basis.size());
    std::vector<std::vector<mpq_class>> M(nr, std::vector<mpq_class>(nc + 1, 0));
    for (int j = 0; j < nc; ++j)
        for (const auto& [mm, c] : images[j].terms()) M[rows.at(mm)][j] = c;
    for (const auto& [mm, c] : rhs.terms()) M[rows.at(mm)][nc] = c;
    // Gauss-Jordan elimination
    std::vector<int> pivot_col;
    int row = 0;
    for (int col = 0; col < nc && row < nr; ++col) {
        int p = -1;
        for (int i = row; i < nr; ++i)
            if (M[i][col] != 0) {
                p = i;
                break;
            }
        if (p < 0) continue;
        std::swap(M[p], M[row]);
        const mpq_class inv = 1 / M[row][col];
        for (int k = col; k <= nc; ++k) M[row][k] *= inv;
        for (int i = 0; i < nr; ++i) {
            if (i == row || M[i][col] == 0) continue;
            const mpq_class f = M[i][col];
            for (int k = col; k <= nc; ++k) M[i][k] -= f * M[row][k];
        }
        pivot_col.push_back(col);
        ++row;
    }
    for (int i = row; i < nr; ++i)
        if (M[i][nc] != 0)
            throw ConsistencyError(
                "internal-consistency error: recursion right side is not a derivative in the differential algebra");
    DiffPoly g;
    for (int i = 0; i < row; ++i) g.add_term(basis[pivot_col[i]], M[i][nc]);
    return g;
}

}  // namespace

std::vector<DiffPoly> kdv_recursion(int ell, const std::vector<mpq_class>& constants)
{
    if (ell < 0) throw ArgumentError("kdv_recursion: ell must be >= 0");
    if (static_cast<int>(constants.size()) < ell + 1) {
        std::ostringstream os;
        os << "kdv_recursion: need " << ell + 1 << " constants c_1..c_" << ell + 1 << ", got " << constants.size();
        throw ArgumentError(os.str());
    }
    const DiffPoly u = DiffPoly::u(0), u1 = DiffPoly::u(1);
    std::vector<DiffPoly> fs{DiffPoly::constant(1)};
    for (int m = 0; m <= ell; ++m) {
        const DiffPoly& f = fs[m];
        const DiffPoly f1 = d_dx(f);
        const DiffPoly f3 = d_dx(d_dx(f1));
        const DiffPoly rhs = (-f3 + mpq_class(4) * u * f1 + mpq_class(2) * u1 * f) * mpq_class(1, 4);
        DiffPoly next = integrate_exact(rhs, 2 * (m + 1));
        next += DiffPoly::constant(constants[m]);
        fs.push_back(std::move(next));
    }
    return fs;
}

LambdaPoly big_f(int n, const std::vector<DiffPoly>& fs)
{
    if (n < 0 || static_cast<int>(fs.size()) < n + 1) throw ArgumentError("big_f: fs must hold f_0..f_n");
    LambdaPoly F;
    for (int j = 0; j <= n; ++j) F.coeffs.push_back(fs[n - j]);
    return F;
}

Termination::Termination(int ell, const std::vector<DiffPoly>& fs) : ell_(ell)
{
    if (static_cast<int>(fs.size()) < ell + 2) throw ArgumentError("Termination: fs must hold f_0..f_{ell+1}");
    const int top = 2 * ell + 1;
    const DiffPoly d = d_dx(fs[ell + 1]);
    // d = a u_top + rest with rest free of u_top
    DiffPoly lin, rest;
    for (const auto& [m, c] : d.terms()) {
        const int e = static_cast<int>(m.size()) > top ? m[top] : 0;
        if (e == 0) {
            rest.add_term(m, c);
        } else if (e == 1) {
            Monomial mm = m;
            mm[top] = 0;
            lin.add_term(mm, c);
        } else {
            throw ConsistencyError("termination: relation is nonlinear in the highest derivative");
        }
    }
    if (!lin.is_constant() || lin.is_zero())
        throw ConsistencyError("termination: coefficient of the highest derivative is not a nonzero constant");
    rules_.push_back(rest * mpq_class(-1 / lin.constant_term()));
}

void Termination::extend(int order) const
{
    const int top = 2 * ell_ + 1;
    while (static_cast<int>(rules_.size()) <= order - top) {
        DiffPoly next = d_dx(rules_.back());
        next = substitute(next, top, rules_.front());
        rules_.push_back(std::move(next));
    }
}

const DiffPoly& Termination::rule(int order) const
{
    const int top = 2 * ell_ + 1;
    if (order < top) throw ArgumentError("Termination::rule: order below the eliminated derivative");
    extend(order);
    return rules_[order - top];
}

DiffPoly Termination::reduce(const DiffPoly& p) const
{
    const int top = 2 * ell_ + 1;
    DiffPoly r = p;
    for (int k = r.max_order(); k >= top; --k) r = substitute(r, k, rule(k));
    return r;
}

DiffOperator Termination::reduce(const DiffOperator& op) const
{
    DiffOperator r;
    for (const auto& c : op.coeffs) r.coeffs.push_back(reduce(c));
    r.trim();
    return r;
}

namespace {

LambdaPoly lp_mul(const LambdaPoly& a, const LambdaPoly& b)
{
    LambdaPoly r;
    if (a.coeffs.empty() || b.coeffs.empty()) return r;
    r.coeffs.resize(a.coeffs.size() + b.coeffs.size() - 1);
    for (std::size_t i = 0; i < a.coeffs.size(); ++i)
        for (std::size_t j = 0; j < b.coeffs.size(); ++j) r.coeffs[i + j] += a.coeffs[i] * b.coeffs[j];
    return r;
}

LambdaPoly lp_dx(const LambdaPoly& a)
{
    LambdaPoly r;
    for (const auto& c : a.coeffs) r.coeffs.push_back(d_dx(c));
    return r;
}

LambdaPoly lp_scale(LambdaPoly a, const mpq_class& s)
{
    for (auto& c : a.coeffs) c *= s;
    return a;
}

LambdaPoly lp_add(LambdaPoly a, const LambdaPoly& b)
{
    if (a.coeffs.size() < b.coeffs.size()) a.coeffs.resize(b.coeffs.size());
    for (std::size_t i = 0; i < b.coeffs.size(); ++i) a.coeffs[i] += b.coeffs[i];
    return a;
}

}  // namespace

LambdaPoly q_poly(int n, const std::vector<DiffPoly>& fs, const Termination* term)
{
    const LambdaPoly F = big_f(n, fs);
    const LambdaPoly F1 = lp_dx(F), F2 = lp_dx(F1);
    LambdaPoly uml;  // u - lambda
    uml.coeffs = {DiffPoly::u(0), DiffPoly::constant(-1)};
    LambdaPoly Q = lp_scale(lp_mul(F2, F), mpq_class(1, 2));
    Q = lp_add(Q, lp_scale(lp_mul(F1, F1), mpq_class(-1, 4)));
    Q = lp_add(Q, lp_scale(lp_mul(uml, lp_mul(F, F)), mpq_class(-1)));
    Q.coeffs.resize(Q.degree() + 1);
    if (Q.degree() != 2 * n + 1) throw ConsistencyError("q_poly: degree is not 2n+1");
    if (term) {
        for (std::size_t j = 0; j < Q.coeffs.size(); ++j) {
            Q.coeffs[j] = term->reduce(Q.coeffs[j]);
            const DiffPoly d = term->reduce(d_dx(Q.coeffs[j]));
            if (!d.is_zero()) {
                std::ostringstream os;
                os << "convention error: d/dx of the lambda^" << j << " coefficient of Q is " << d.to_string()
                   << " under the termination relation";
                throw ConsistencyError(os.str());
            }
        }
    }
    return Q;
}

DiffOperator p_operator(int n, const std::vector<DiffPoly>& fs)
{
    if (n < 0 || static_cast<int>(fs.size()) < n + 1) throw ArgumentError("p_operator: fs must hold f_0..f_n");
    const DiffOperator L = schrodinger_operator();
    DiffOperator Lj = multiplication(DiffPoly::constant(1));
    DiffOperator P;
    for (int j = 0; j <= n; ++j) {
        const DiffPoly& f = fs[n - j];
        DiffOperator first;
        first.coeffs = {d_dx(f) * mpq_class(-1, 2), f};
        first.trim();
        P += compose(first, Lj);
        Lj = compose(L, Lj);
    }
    return P;
}

DiffOperator burchnall_chaundy_check(int ell, const std::vector<mpq_class>& constants)
{
    const auto fs = kdv_recursion(ell, constants);
    const Termination term(ell, fs);
    const LambdaPoly Q = q_poly(ell, fs, &term);
    const DiffOperator L = schrodinger_operator();
    const DiffOperator P = term.reduce(p_operator(ell, fs));
    DiffOperator acc = term.reduce(compose(P, P));
    DiffOperator Lk = multiplication(DiffPoly::constant(1));
    for (std::size_t k = 0; k < Q.coeffs.size(); ++k) {
        acc += term.reduce(Lk * Q.coeffs[k]);
        Lk = term.reduce(compose(L, Lk));
    }
    return term.reduce(acc);
}

DiffOperator lp_commutator(int ell, const std::vector<mpq_class>& constants)
{
    const auto fs = kdv_recursion(ell, constants);
    const Termination term(ell, fs);
    const DiffOperator L = schrodinger_operator();
    const DiffOperator P = p_operator(ell, fs);
    return term.reduce(compose(L, P) - compose(P, L));
}

namespace {

cplx horner(const std::vector<double>& c, cplx z)
{
    cplx r = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) r = r * z + *it;
    return r;
}

cplx horner_d(const std::vector<double>& c, cplx z)
{
    cplx r = 0.0;
    for (std::size_t k = c.size() - 1; k >= 1; --k) r = r * z + static_cast<double>(k) * c[k];
    return r;
}

void balance(Eigen::MatrixXd& M)
{
    const double radix = 2.0;
    const auto n = M.rows();
    bool done = false;
    while (!done) {
        done = true;
        for (Eigen::Index i = 0; i < n; ++i) {
            double c = 0.0, r = 0.0;
            for (Eigen::Index j = 0; j < n; ++j)
                if (j != i) {
                    c += std::abs(M(j, i));
                    r += std::abs(M(i, j));
                }
            if (c == 0.0 || r == 0.0) continue;
            double g = r / radix, f = 1.0;
            const double s = c + r;
            while (c < g) {
                f *= radix;
                c *= radix * radix;
            }
            g = r * radix;
            while (c > g) {
                f /= radix;
                c /= radix * radix;
            }
            if ((c + r) / f < 0.95 * s) {
                done = false;
                M.row(i) /= f;
                M.col(i) *= f;
            }
        }
    }
}

}  // namespace

std::vector<cplx> polynomial_roots(const std::vector<double>& coeffs)
{
    std::vector<double> c = coeffs;
    while (!c.empty() && c.back() == 0.0) c.pop_back();
    if (c.size() < 2) return {};
    const int n = static_cast<int>(c.size()) - 1;
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
    for (int i = 1; i < n; ++i) M(i, i - 1) = 1.0;
    for (int i = 0; i < n; ++i) M(i, n - 1) = -c[i] / c[n];
    balance(M);
    Eigen::EigenSolver<Eigen::MatrixXd> es(M, false);
    std::vector<cplx> roots(es.eigenvalues().data(), es.eigenvalues().data() + n);
    for (auto& z : roots) {
        for (int it = 0; it < 8; ++it) {
            const cplx d = horner_d(c, z);
            if (d == cplx(0.0)) break;
            const cplx z2 = z - horner(c, z) / d;
            if (!(std::abs(horner(c, z2)) < std::abs(horner(c, z)))) break;
            z = z2;
        }
    }
    std::sort(roots.begin(), roots.end(), [](cplx a, cplx b) {
        return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
    });
    return roots;
}

HyperellipticCurve curve_from_q(const std::vector<double>& q)
{
    HyperellipticCurve hc;
    hc.q = q;
    const auto roots = polynomial_roots(q);
    double qnorm = 0.0;
    for (double v : q) qnorm = std::max(qnorm, std::abs(v));
    const std::size_t n = roots.size();
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<std::size_t(std::size_t)> find = [&](std::size_t i) {
        return parent[i] == i ? i : parent[i] = find(parent[i]);
    };
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double scale = std::max(1.0, std::max(std::abs(roots[i]), std::abs(roots[j])));
            const double sep = std::abs(roots[i] - roots[j]);
            bool same = sep <= 1e-8 * scale;
            if (!same && sep <= 1e-4 * scale)
                same = std::abs(horner_d(q, 0.5 * (roots[i] + roots[j]))) <= 1e-8 * qnorm;
            if (same) parent[find(i)] = find(j);
        }
    std::map<std::size_t, std::vector<cplx>> clusters;
    for (std::size_t i = 0; i < n; ++i) clusters[find(i)].push_back(roots[i]);
    for (const auto& [k, members] : clusters) {
        cplx mean = 0.0;
        for (auto z : members) mean += z;
        mean /= static_cast<double>(members.size());
        if (std::abs(mean.imag()) <= 1e-8 * std::max(1.0, std::abs(mean))) mean.imag(0.0);
        hc.branch_points.push_back(mean);
        hc.multiplicity.push_back(static_cast<int>(members.size()));
        if (members.size() > 1) hc.degenerate = true;
    }
    std::vector<std::size_t> order(hc.branch_points.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const cplx x = hc.branch_points[a], y = hc.branch_points[b];
        return x.real() != y.real() ? x.real() < y.real() : x.imag() < y.imag();
    });
    std::vector<cplx> bp;
    std::vector<int> mult;
    for (auto i : order) {
        bp.push_back(hc.branch_points[i]);
        mult.push_back(hc.multiplicity[i]);
    }
    hc.branch_points = bp;
    hc.multiplicity = mult;
    const int distinct = static_cast<int>(bp.size());
    hc.genus = distinct > 0 ? (distinct - 1) / 2 : 0;
    std::vector<double> real;
    for (auto z : bp)
        if (z.imag() == 0.0) real.push_back(z.real());
    for (std::size_t i = 0; i + 1 < real.size(); ++i) {
        const double mid = 0.5 * (real[i] + real[i + 1]);
        if (horner(q, mid).real() < 0.0) hc.gaps.emplace_back(real[i], real[i + 1]);
    }
    return hc;
}

namespace {

std::vector<double> numeric_q(int ell, const std::vector<mpq_class>& constants, const std::vector<double>& jet)
{
    if (static_cast<int>(jet.size()) < 2 * ell + 1) {
        std::ostringstream os;
        os << "spectral_curve: jet needs u..u^(" << 2 * ell << "), got " << jet.size() << " values";
        throw ArgumentError(os.str());
    }
    const auto fs = kdv_recursion(ell, constants);
    const Termination term(ell, fs);
    const LambdaPoly Q = q_poly(ell, fs, &term);
    std::vector<double> q;
    for (const auto& c : Q.coeffs) q.push_back(c.evaluate(jet));
    return q;
}

}  // namespace

HyperellipticCurve spectral_curve(int ell, const std::vector<mpq_class>& constants, const std::vector<double>& jet)
{
    return curve_from_q(numeric_q(ell, constants, jet));
}

HyperellipticCurve spectral_curve(int ell, const std::vector<mpq_class>& constants, const StateFamily& sf, double x)
{
    auto jet_at = [&](double y) {
        const auto j = sf.potential_jet(y, 2 * ell);
        std::vector<double> r;
        for (auto v : j) r.push_back(v.real());
        return r;
    };
    const auto q1 = numeric_q(ell, constants, jet_at(x));
    const auto q2 = numeric_q(ell, constants, jet_at(x + 0.5));
    double scale = 1.0, diff = 0.0;
    for (std::size_t i = 0; i < q1.size(); ++i) {
        scale = std::max(scale, std::abs(q1[i]));
        diff = std::max(diff, std::abs(q1[i] - q2[i]));
    }
    if (diff > 1e-6 * scale) {
        std::ostringstream os;
        os << "not-finite-gap error: Q coefficients at x=" << x << " and x=" << x + 0.5 << " differ by " << diff;
        throw AccuracyError(os.str());
    }
    return curve_from_q(q1);
}

}  // namespace spectral
