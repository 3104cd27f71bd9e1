#include "spectral/cli.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "spectral/hankel.hpp"
#include "spectral/kdv.hpp"
#include "spectral/schrod.hpp"
#include "spectral/statecalc.hpp"
#include "spectral/system_io.hpp"

namespace spectral {

using nlohmann::json;

Subcommand parse_subcommand(const std::string& name)
{
    static const std::map<std::string, Subcommand> names{
        {"det", Subcommand::det},     {"tau", Subcommand::tau},     {"potential", Subcommand::potential},
        {"gl", Subcommand::gl},       {"green", Subcommand::green}, {"xi", Subcommand::xi},
        {"phase", Subcommand::phase}, {"curve", Subcommand::curve}, {"verify", Subcommand::verify}};
    auto it = names.find(name);
    if (it == names.end()) throw ArgumentError("unknown subcommand '" + name + "'");
    return it->second;
}

namespace {

double parse_double(const std::string& s, const std::string& what)
{
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        throw ArgumentError(what + ": cannot parse '" + s + "' as a number");
    }
    if (pos != s.size()) throw ArgumentError(what + ": cannot parse '" + s + "' as a number");
    return v;
}

std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep))
        if (!cur.empty()) out.push_back(cur);
    return out;
}

}  // namespace

Grid parse_grid(const std::string& text)
{
    const auto parts = split(text, ':');
    if (parts.size() != 3) throw ArgumentError("grid '" + text + "': expected a:b:n");
    Grid g;
    g.a = parse_double(parts[0], "grid start");
    g.b = parse_double(parts[1], "grid end");
    const double n = parse_double(parts[2], "grid size");
    if (n != std::floor(n)) throw ArgumentError("grid '" + text + "': n must be an integer");
    g.n = static_cast<int>(n);
    if (!(g.a < g.b) || g.n < 2) throw ArgumentError("grid '" + text + "': need a < b and n >= 2");
    return g;
}

unsigned worker_count()
{
    unsigned n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("SPECTRAL_DET_THREADS")) {
        const int v = std::atoi(env);
        if (v >= 1) n = std::min(n, static_cast<unsigned>(v));
    }
    return n;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& f)
{
    const std::size_t T = std::min<std::size_t>(worker_count(), n);
    if (T <= 1) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::vector<std::exception_ptr> errors(n);
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < T; ++t)
        pool.emplace_back([&, t] {
            for (std::size_t i = t; i < n; i += T) {
                try {
                    f(i);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        });
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

namespace {

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

void write_table(const Table& t, const std::string& format, std::ostream& out)
{
    if (format == "json") {
        json arr = json::array();
        for (const auto& r : t.rows) {
            json o = json::object();
            for (std::size_t k = 0; k < t.columns.size(); ++k) o[t.columns[k]] = r[k];
            arr.push_back(o);
        }
        out << arr.dump(2) << "\n";
        return;
    }
    out << std::setprecision(17);
    for (std::size_t k = 0; k < t.columns.size(); ++k) out << (k ? "," : "") << t.columns[k];
    out << "\n";
    for (const auto& r : t.rows) {
        for (std::size_t k = 0; k < r.size(); ++k) out << (k ? "," : "") << r[k];
        out << "\n";
    }
}

json complex_json(cplx z) { return json::array({z.real(), z.imag()}); }

bool algebraic(const Realization& sys)
{
    if (const auto* d = std::get_if<DiagonalRealization>(&sys)) {
        if (d->algebraic) return true;
        double s0 = INFINITY;
        for (const auto& ch : d->channels) s0 = std::min(s0, ch.s0);
        return s0 == 0.0;
    }
    return false;
}

MapKind choose_map(const RunConfig& cfg, const Realization& sys)
{
    if (cfg.map == "auto") return algebraic(sys) ? MapKind::rational : MapKind::exponential;
    return parse_map_kind(cfg.map);
}

double tolerance(const RunConfig& cfg, const std::string& name, double fallback)
{
    auto it = cfg.tolerances.find(name);
    return it == cfg.tolerances.end() ? fallback : it->second;
}

Realization require_system(const RunConfig& cfg)
{
    if (cfg.system_path.empty()) throw ArgumentError("--system is required");
    return load_system(cfg.system_path);
}

std::vector<double> grid_points(const Grid& g)
{
    std::vector<double> xs(g.n);
    for (int i = 0; i < g.n; ++i) xs[i] = g.at(i);
    return xs;
}

int cmd_det(const RunConfig& cfg, std::ostream& out)
{
    const Realization sys = require_system(cfg);
    const ImpulseResponse phi = make_impulse_response(sys);
    const Kernel k = [phi](double x, double y) { return phi(x + y); };
    const MapKind kind = choose_map(cfg, sys);
    const ConvergedDet r = fredholm_det_refined(k, cfg.z, kind, cfg.scale, tolerance(cfg, "det", 1e-10),
                                                cfg.nodes, std::max(512, cfg.nodes));
    json o;
    o["det"] = complex_json(r.value);
    o["nodes"] = r.nodes;
    o["converged"] = r.converged;
    o["map"] = to_string(kind);
    if (cfg.z == 1.0) {
        const StateFamily sf(sys);
        o["tau0"] = complex_json(sf.tau(0.0));
    }
    out << o.dump(2) << "\n";
    return 0;
}

int cmd_tau(const RunConfig& cfg, std::ostream& out, const std::string& fmt)
{
    const StateFamily sf(require_system(cfg));
    const auto xs = grid_points(cfg.x_grid);
    Table t{{"x", "tau", "log_tau"}, std::vector<std::vector<double>>(xs.size())};
    parallel_for(xs.size(), [&](std::size_t i) {
        const cplx tau = sf.tau(xs[i]);
        t.rows[i] = {xs[i], tau.real(), std::log(std::abs(tau))};
    });
    write_table(t, fmt, out);
    return 0;
}

int cmd_potential(const RunConfig& cfg, std::ostream& out, const std::string& fmt)
{
    const StateFamily sf(require_system(cfg));
    const auto xs = grid_points(cfg.x_grid);
    Table t{{"x", "u", "u_dyson", "residual"}, std::vector<std::vector<double>>(xs.size())};
    parallel_for(xs.size(), [&](std::size_t i) {
        const cplx u = sf.potential(xs[i]);
        const cplx ud = dyson_potential(sf, xs[i]);
        t.rows[i] = {xs[i], u.real(), ud.real(), std::abs(u - ud)};
    });
    write_table(t, fmt, out);
    return 0;
}

int cmd_gl(const RunConfig& cfg, std::ostream& out, const std::string& fmt)
{
    const StateFamily sf(require_system(cfg));
    const auto xs = grid_points(cfg.x_grid);
    const double h = 1e-4;
    Table t{{"x", "T_xx", "dlogtau", "residual"}, std::vector<std::vector<double>>(xs.size())};
    parallel_for(xs.size(), [&](std::size_t i) {
        const double x = xs[i];
        const cplx T = sf.t_gl(x, x);
        const cplx d = (sf.log_tau(x + h) - sf.log_tau(x - h)) / (2.0 * h);
        t.rows[i] = {x, T.real(), d.real(), std::abs(d - T)};
    });
    write_table(t, fmt, out);
    return 0;
}

int cmd_green(const RunConfig& cfg, std::ostream& out, const std::string& fmt)
{
    auto sf = std::make_shared<const StateFamily>(require_system(cfg));
    if (sf->half_line()) throw ArgumentError("green: needs a matrix system (the ODE side lives on the whole line)");
    const auto xs = grid_points(cfg.x_grid);
    const Potential u = potential_from_system(sf);
    const auto g_ode = green_diag_ode(u, xs, cfg.lambda);
    Table t{{"x", "g_series", "g_ode", "rel_err"}, std::vector<std::vector<double>>(xs.size())};
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const cplx gs = green_diag_series(*sf, xs[i], cfg.lambda, cfg.terms).value;
        t.rows[i] = {xs[i], gs.real(), g_ode[i].real(), std::abs(gs - g_ode[i]) / std::abs(g_ode[i])};
    }
    write_table(t, fmt, out);
    return 0;
}

Potential xi_potential(const RunConfig& cfg)
{
    if (!cfg.system_path.empty()) {
        auto sf = std::make_shared<const StateFamily>(load_system(cfg.system_path));
        return potential_from_system(sf);
    }
    if (cfg.potential == "free") return potential_free();
    if (cfg.potential == "soliton") return potential_soliton();
    throw ArgumentError("xi: give --system or --potential free|soliton");
}

int cmd_xi(const RunConfig& cfg, std::ostream& out, const std::string& fmt)
{
    const Potential u = xi_potential(cfg);
    const auto ls = grid_points(cfg.lambda_grid);
    Table t{{"lambda", "xi"}, std::vector<std::vector<double>>(ls.size())};
    parallel_for(ls.size(), [&](std::size_t i) { t.rows[i] = {ls[i], xi(u, cfg.x, ls[i], cfg.eps)}; });
    write_table(t, fmt, out);
    return 0;
}

int cmd_phase(const RunConfig& cfg, std::ostream& out, std::ostream& err, const std::string& fmt)
{
    if (cfg.canonical_path.empty()) throw ArgumentError("--canonical is required");
    const json j = load_json(cfg.canonical_path);
    const CanonicalSystem cs = parse_canonical(j);
    Eigen::Vector2d psi0(1.0, 0.0);
    if (j.contains("psi0")) {
        const json& p = j["psi0"];
        if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
            throw ArgumentError("field 'psi0': expected [a, b] real");
        psi0 << p[0].get<double>(), p[1].get<double>();
        if (psi0.norm() == 0.0) throw ArgumentError("field 'psi0': must be nonzero");
    }
    const PhaseData pd = debranges_phase(cs, cfg.x, grid_points(cfg.kappa_grid), psi0);
    Table t{{"kappa", "phase", "abs_E"}, {}};
    for (std::size_t i = 0; i < pd.grid.size(); ++i) t.rows.push_back({pd.grid[i], pd.phase[i], std::abs(pd.E[i])});
    for (double k : pd.excluded) err << "note: E vanishes at kappa=" << k << "; point excluded\n";
    write_table(t, fmt, out);
    return 0;
}

mpq_class parse_rational(const std::string& s)
{
    mpq_class q;
    if (s.find('.') != std::string::npos || s.find('e') != std::string::npos) {
        q = mpq_class(parse_double(s, "constant"));
    } else {
        try {
            q = mpq_class(s, 10);
        } catch (const std::exception&) {
            throw ArgumentError("cannot parse '" + s + "' as a rational");
        }
    }
    q.canonicalize();
    return q;
}

std::vector<mpq_class> parse_constants(const std::string& text, int ell)
{
    std::vector<mpq_class> c(ell + 1, 0);
    for (const auto& item : split(text, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos || item[0] != 'c')
            throw ArgumentError("--constants: expected entries like c1=1/2, got '" + item + "'");
        const int idx = static_cast<int>(parse_double(item.substr(1, eq - 1), "--constants index"));
        if (idx < 1 || idx > ell + 1) throw ArgumentError("--constants: index out of range in '" + item + "'");
        c[idx - 1] = parse_rational(item.substr(eq + 1));
    }
    return c;
}

std::vector<double> parse_jet(const std::string& text, int ell)
{
    std::vector<double> jet(2 * ell + 1, NAN);
    for (const auto& item : split(text, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos || item[0] != 'u')
            throw ArgumentError("--jet: expected entries like u=-2,u1=0, got '" + item + "'");
        const std::string key = item.substr(1, eq - 1);
        const int idx = key.empty() ? 0 : static_cast<int>(parse_double(key, "--jet index"));
        if (idx < 0 || idx > 2 * ell) throw ArgumentError("--jet: index out of range in '" + item + "'");
        jet[idx] = parse_double(item.substr(eq + 1), "--jet value");
    }
    for (int i = 0; i <= 2 * ell; ++i)
        if (std::isnan(jet[i])) throw ArgumentError("--jet: missing u" + std::to_string(i));
    return jet;
}

int cmd_curve(const RunConfig& cfg, std::ostream& out)
{
    if (cfg.ell < 0) throw ArgumentError("--ell must be >= 0");
    const auto constants = parse_constants(cfg.constants, cfg.ell);
    HyperellipticCurve hc;
    if (!cfg.jet.empty()) {
        hc = spectral_curve(cfg.ell, constants, parse_jet(cfg.jet, cfg.ell));
    } else if (!cfg.system_path.empty()) {
        std::string at = cfg.at.empty() ? "x=1" : cfg.at;
        if (at.rfind("x=", 0) == 0) at = at.substr(2);
        const StateFamily sf(load_system(cfg.system_path));
        hc = spectral_curve(cfg.ell, constants, sf, parse_double(at, "--at"));
    } else {
        throw ArgumentError("curve: give --jet or --system");
    }
    json o;
    o["Q"] = hc.q;
    json bp = json::array();
    for (auto z : hc.branch_points) bp.push_back(complex_json(z));
    o["branch_points"] = bp;
    o["multiplicity"] = hc.multiplicity;
    o["genus"] = hc.genus;
    o["degenerate"] = hc.degenerate;
    json gaps = json::array();
    for (auto [a, b] : hc.gaps) gaps.push_back(json::array({a, b}));
    o["gaps"] = gaps;
    out << o.dump(2) << "\n";
    return 0;
}

struct Check {
    std::string name;
    double value;
    double tol;
    bool pass;
};

// Checks fail when value > tol, except those marked as lower bounds.
Check upper(const std::string& name, double value, double tol)
{
    return {name, value, tol, std::isfinite(value) && value <= tol};
}

MatC random_matrix(std::mt19937_64& rng, Eigen::Index n)
{
    std::normal_distribution<double> g(0.0, 1.0);
    MatC M(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) M(i, j) = cplx(g(rng), g(rng)) / std::sqrt(static_cast<double>(n));
    return M;
}

std::vector<Check> verify_checks(const RunConfig& cfg, const Realization& sys)
{
    std::vector<Check> checks;
    auto sf = std::make_shared<const StateFamily>(sys);
    const MapKind kind = choose_map(cfg, sys);
    const QuadratureRule rule = build_rule(cfg.nodes, kind, cfg.scale);
    const ImpulseResponse phi = make_impulse_response(sys);

    {
        const cplx t0 = sf->tau(0.0);
        const cplx dh = fredholm_det(hankel_operator(phi, rule), 1.0);
        checks.push_back(upper("determinant_equality", std::abs(t0 - dh) / std::abs(t0),
                               tolerance(cfg, "determinant_equality", 1e-7)));
    }
    {
        const std::vector<double> pts{0.5, 1.0, 1.5, 2.0, 2.5};
        std::vector<double> res(pts.size() * pts.size());
        const ImpulseResponse phi_state = make_impulse_response(Realization(sf->system()));
        parallel_for(res.size(), [&](std::size_t k) {
            res[k] = gl_residual(*sf, phi_state, pts[k / pts.size()], pts[k % pts.size()], rule);
        });
        checks.push_back(upper("gl_residual", *std::max_element(res.begin(), res.end()),
                               tolerance(cfg, "gl_residual", 1e-7)));
        double worst = 0.0;
        for (double x : pts) worst = std::max(worst, gl_logderiv_check(*sf, x, 1e-4));
        checks.push_back(upper("gl_logderiv", worst, tolerance(cfg, "gl_logderiv", 1e-6)));
    }
    {
        std::vector<double> res(25);
        parallel_for(res.size(), [&](std::size_t i) {
            const double x = 0.2 + 4.8 * static_cast<double>(i) / 24.0;
            res[i] = std::abs(sf->potential(x) - dyson_potential(*sf, x, 1e-3, true));
        });
        checks.push_back(upper("dyson", *std::max_element(res.begin(), res.end()), tolerance(cfg, "dyson", 1e-6)));
    }
    {
        std::mt19937_64 rng(cfg.seed);
        const auto n = sf->dim();
        const double xs[3] = {0.3, 0.8, 1.5};
        constexpr int trials = 20;
        std::vector<std::array<MatC, 3>> mats(trials);
        for (auto& m : mats)
            for (auto& M : m) M = random_matrix(rng, n);
        std::vector<double> mults(trials, 0.0), orders(trials, INFINITY);
        parallel_for(trials, [&](std::size_t p) {
            const double x = xs[p % 3];
            const MatC& X = mats[p][0];
            const MatC& Y = mats[p][1];
            const MatC& X1 = mats[p][2];
            const cplx bx = sf->bracket(X, x), by = sf->bracket(Y, x);
            const cplx bxy = sf->bracket(star(*sf, X, Y, x), x);
            mults[p] = std::abs(bxy - bx * by) / std::max(1.0, std::abs(bx * by));
            auto fam = [&](double s) -> MatC { return X + s * X1; };
            const cplx lhs = sf->bracket(dpartial(*sf, fam, x, 1e-3), x);
            auto fd = [&](double h) {
                return (sf->bracket(fam(x + h), x + h) - sf->bracket(fam(x - h), x - h)) / (2.0 * h);
            };
            const double e1 = std::abs(fd(2e-2) - lhs), e2 = std::abs(fd(1e-2) - lhs);
            if (e2 > 0.0 && e1 > 1e-13) orders[p] = std::log2(e1 / e2);
        });
        const double mult = *std::max_element(mults.begin(), mults.end());
        const double order = *std::min_element(orders.begin(), orders.end());
        checks.push_back(upper("bracket_multiplicativity", mult, tolerance(cfg, "bracket_multiplicativity", 1e-10)));
        const double tol = tolerance(cfg, "bracket_derivation_order", 1.9);
        checks.push_back({"bracket_derivation_order", order, tol, std::isfinite(order) && order >= tol});
    }
    if (!sf->half_line()) {
        const Potential u = potential_from_system(sf);
        double worst = 0.0, darboux = 0.0;
        const std::vector<double> xs{0.5, 1.5};
        for (double lam : {-25.0, -100.0}) {
            const auto g = green_diag_ode(u, xs, lam);
            for (std::size_t i = 0; i < xs.size(); ++i) {
                const cplx s = green_diag_series(*sf, xs[i], lam, std::max(cfg.terms, 20)).value;
                worst = std::max(worst, std::abs(s - g[i]) / std::abs(g[i]));
                const double h = 1e-3;
                const cplx dg = (green_diag_series(*sf, xs[i] + h, lam, std::max(cfg.terms, 20)).value -
                                 green_diag_series(*sf, xs[i] - h, lam, std::max(cfg.terms, 20)).value) /
                                (2.0 * h);
                darboux = std::max(darboux, std::abs(darboux_field(*sf, xs[i], lam) - 2.0 * dg));
            }
        }
        checks.push_back(upper("green_cross_check", worst, tolerance(cfg, "green_cross_check", 1e-6)));
        checks.push_back(upper("darboux_field", darboux, tolerance(cfg, "darboux_field", 1e-5)));
    }
    for (int ell = 0; ell <= 2; ++ell) {
        std::vector<mpq_class> c;
        for (int i = 0; i <= ell; ++i) c.push_back(mpq_class(i + 1, 3));
        const DiffOperator r = burchnall_chaundy_check(ell, c);
        double nonzero = 0.0;
        for (const auto& coef : r.coeffs) nonzero += static_cast<double>(coef.terms().size());
        checks.push_back(upper("burchnall_chaundy_ell" + std::to_string(ell), nonzero, 0.0));
    }
    return checks;
}

int cmd_verify(const RunConfig& cfg, std::ostream& out)
{
    const Realization sys = require_system(cfg);
    const auto checks = verify_checks(cfg, sys);
    json report;
    report["system"] = cfg.system_path;
    report["seed"] = cfg.seed;
    report["nodes"] = cfg.nodes;
    json arr = json::array();
    bool all = true;
    for (const auto& c : checks) {
        arr.push_back({{"check", c.name}, {"value", c.value}, {"tolerance", c.tol}, {"pass", c.pass}});
        all = all && c.pass;
    }
    report["checks"] = arr;
    report["pass"] = all;
    out << report.dump(2) << "\n";
    return all ? 0 : 1;
}

int dispatch(const RunConfig& cfg, std::ostream& out, std::ostream& err)
{
    std::string fmt = cfg.format.empty() ? "csv" : cfg.format;
    if (fmt != "csv" && fmt != "json") throw ArgumentError("--format must be csv or json");
    if (cfg.nodes < 2) throw ArgumentError("--nodes must be >= 2");
    if (!(cfg.scale > 0.0)) throw ArgumentError("--scale must be > 0");
    if (cfg.map != "auto") parse_map_kind(cfg.map);
    switch (cfg.subcommand) {
    case Subcommand::det: return cmd_det(cfg, out);
    case Subcommand::tau: return cmd_tau(cfg, out, fmt);
    case Subcommand::potential: return cmd_potential(cfg, out, fmt);
    case Subcommand::gl: return cmd_gl(cfg, out, fmt);
    case Subcommand::green: return cmd_green(cfg, out, fmt);
    case Subcommand::xi: return cmd_xi(cfg, out, fmt);
    case Subcommand::phase: return cmd_phase(cfg, out, err, fmt);
    case Subcommand::curve: return cmd_curve(cfg, out);
    case Subcommand::verify: return cmd_verify(cfg, out);
    }
    return 2;
}

}  // namespace

int run(const RunConfig& config, std::ostream& out, std::ostream& err)
{
    std::ostringstream buffer;
    int status = 0;
    try {
        status = dispatch(config, buffer, err);
    } catch (const ArgumentError& e) {
        err << "input error: " << e.what() << "\n";
        return 2;
    } catch (const DomainError& e) {
        err << "input error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    if (config.output.empty()) {
        out << buffer.str();
    } else {
        std::ofstream f(config.output);
        if (!f) {
            err << "input error: cannot write '" << config.output << "'\n";
            return 2;
        }
        f << buffer.str();
    }
    return status;
}

}  // namespace spectral
