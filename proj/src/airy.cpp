#include "spectral/airy.hpp"

#include <cmath>
#include <vector>

#include <quadmath.h>

namespace spectral {

namespace {

using quad = __float128;

quad ai0_q()
{
    return quad(1.0) / (cbrtq(quad(9.0)) * tgammaq(quad(2) / quad(3)));
}

quad aip0_q()
{
    return -quad(1.0) / (cbrtq(quad(3.0)) * tgammaq(quad(1) / quad(3)));
}

AiryValue maclaurin(double xd)
{
    const quad x = xd;
    const quad x3 = x * x * x;
    quad f = quad(1.0), fp = quad(0.0), g = x, gp = quad(1.0);
    quad a = quad(1.0), b = quad(1.0);
    quad p = quad(1.0);  // x^{3k}
    for (int k = 1; k < 200; ++k) {
        a /= quad(3 * k - 1) * quad(3 * k);
        b /= quad(3 * k) * quad(3 * k + 1);
        const quad pprev = p;
        p *= x3;
        const quad tf = a * p;
        const quad tg = b * p * x;
        f += tf;
        g += tg;
        fp += a * quad(3 * k) * pprev * x * x;
        gp += b * quad(3 * k + 1) * p;
        if (fabsq(tf) + fabsq(tg) < quad(1e-40) * (fabsq(f) + fabsq(g))) break;
    }
    const quad c1 = ai0_q(), c2 = -aip0_q();
    return {static_cast<double>(c1 * f - c2 * g), static_cast<double>(c1 * fp - c2 * gp)};
}

// u_k and v_k of the asymptotic expansions
void coefficients(int n, std::vector<double>& u, std::vector<double>& v)
{
    u.assign(n + 1, 1.0);
    v.assign(n + 1, 1.0);
    for (int k = 1; k <= n; ++k) {
        u[k] = u[k - 1] * (6.0 * k - 5.0) * (6.0 * k - 3.0) * (6.0 * k - 1.0) / ((2.0 * k - 1.0) * 216.0 * k);
        v[k] = -(6.0 * k + 1.0) / (6.0 * k - 1.0) * u[k];
    }
}

AiryValue asymptotic(double x)
{
    const double z = std::abs(x);
    const double zeta = 2.0 / 3.0 * z * std::sqrt(z);
    const double sqpi = std::sqrt(M_PI);
    std::vector<double> u, v;
    coefficients(60, u, v);
    if (x > 0.0) {
        double su = 0.0, sv = 0.0, zp = 1.0, last = INFINITY;
        for (int k = 0; k <= 60; ++k) {
            const double tu = u[k] / zp;
            if (std::abs(tu) > last) break;
            last = std::abs(tu);
            const double s = (k % 2) ? -1.0 : 1.0;
            su += s * tu;
            sv += s * v[k] / zp;
            zp *= zeta;
        }
        const double e = std::exp(-zeta);
        const double q = std::pow(z, 0.25);
        return {e / (2.0 * sqpi * q) * su, -q * e / (2.0 * sqpi) * sv};
    }
    double ue = 0.0, uo = 0.0, ve = 0.0, vo = 0.0, last = INFINITY;
    double zp = 1.0;
    for (int k = 0; k <= 60; ++k) {
        const double tu = u[k] / zp;
        if (std::abs(tu) > last) break;
        last = std::abs(tu);
        const double s = ((k / 2) % 2) ? -1.0 : 1.0;
        if (k % 2 == 0) {
            ue += s * tu;
            ve += s * v[k] / zp;
        } else {
            uo += s * tu;
            vo += s * v[k] / zp;
        }
        zp *= zeta;
    }
    const double th = zeta - M_PI / 4.0;
    const double q = std::pow(z, 0.25);
    return {(std::cos(th) * ue + std::sin(th) * uo) / (sqpi * q),
            q / sqpi * (std::sin(th) * ve - std::cos(th) * vo)};
}

}  // namespace

double airy_ai0() { return static_cast<double>(ai0_q()); }
double airy_aip0() { return static_cast<double>(aip0_q()); }

AiryValue airy_ai(double x)
{
    if (std::abs(x) <= 8.0) return maclaurin(x);
    return asymptotic(x);
}

}  // namespace spectral
