#include "spectral/system_io.hpp"

#include <fstream>
#include <sstream>

namespace spectral {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& field, const std::string& what)
{
    throw ArgumentError("field '" + field + "': " + what);
}

const json& require(const json& j, const std::string& key, const std::string& ctx)
{
    if (!j.is_object() || !j.contains(key)) bad(ctx.empty() ? key : ctx + "." + key, "missing");
    return j.at(key);
}

double number(const json& j, const std::string& field)
{
    if (!j.is_number()) bad(field, "expected a number");
    return j.get<double>();
}

int integer(const json& j, const std::string& field)
{
    if (!j.is_number_integer()) bad(field, "expected an integer");
    return j.get<int>();
}

Profile parse_profile(const json& j, const std::string& field)
{
    if (!j.is_object()) bad(field, "expected a profile object");
    const json& t = require(j, "type", field);
    if (!t.is_string()) bad(field + ".type", "expected a string");
    const std::string type = t.get<std::string>();
    if (type == "exponential") return profile_exponential(parse_complex(require(j, "rate", field), field + ".rate"));
    if (type == "constant") return profile_constant(parse_complex(require(j, "value", field), field + ".value"));
    if (type == "indicator")
        return profile_indicator(number(require(j, "a", field), field + ".a"),
                                 number(require(j, "b", field), field + ".b"));
    if (type == "power_exponential")
        return profile_power_exponential(number(require(j, "power", field), field + ".power"),
                                         parse_complex(require(j, "rate", field), field + ".rate"));
    if (type == "table") {
        const json& u = require(j, "u", field);
        const json& v = require(j, "values", field);
        if (!u.is_array() || !v.is_array() || u.size() != v.size() || u.size() < 2)
            bad(field, "table needs arrays 'u' and 'values' of equal length >= 2");
        std::vector<std::pair<double, cplx>> pts;
        for (std::size_t i = 0; i < u.size(); ++i)
            pts.emplace_back(number(u[i], field + ".u"), parse_complex(v[i], field + ".values"));
        return profile_table(std::move(pts));
    }
    if (type == "scaled")
        return profile_scaled(parse_profile(require(j, "profile", field), field + ".profile"),
                              parse_complex(require(j, "factor", field), field + ".factor"));
    bad(field + ".type", "unknown profile type '" + type + "'");
}

template <class Vec>
Vec parse_vector(const json& j, const std::string& field)
{
    if (!j.is_array() || j.empty()) bad(field, "expected a non-empty array");
    Vec v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = parse_complex(j[i], field);
    return v;
}

MatC parse_matrix(const json& j, const std::string& field)
{
    if (!j.is_array() || j.empty() || !j[0].is_array()) bad(field, "expected a non-empty array of rows");
    const auto n = j.size(), m = j[0].size();
    MatC M(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i < n; ++i) {
        if (!j[i].is_array() || j[i].size() != m) bad(field, "rows must have equal length");
        for (std::size_t k = 0; k < m; ++k)
            M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = parse_complex(j[i][k], field);
    }
    return M;
}

Eigen::Matrix2d parse_2x2(const json& j, const std::string& field)
{
    const MatC M = parse_matrix(j, field);
    if (M.rows() != 2 || M.cols() != 2) bad(field, "expected a 2x2 matrix");
    if (M.imag().norm() != 0.0) bad(field, "expected real entries");
    return M.real();
}

}  // namespace

cplx parse_complex(const json& j, const std::string& field)
{
    if (j.is_number()) return j.get<double>();
    if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
        return {j[0].get<double>(), j[1].get<double>()};
    bad(field, "expected a number or [re, im]");
}

Realization parse_system(const json& j)
{
    if (!j.is_object()) bad("<root>", "expected an object");
    const json& k = require(j, "kind", "");
    if (!k.is_string()) bad("kind", "expected a string");
    const std::string kind = k.get<std::string>();
    if (kind == "matrix") {
        MatC A = parse_matrix(require(j, "A", ""), "A");
        VecC B = parse_vector<VecC>(require(j, "B", ""), "B");
        RowC C = parse_vector<RowC>(require(j, "C", ""), "C");
        try {
            return make_matrix_realization(std::move(A), std::move(B), std::move(C));
        } catch (const StabilityError& e) {
            bad("A", e.what());
        } catch (const Error& e) {
            bad("A/B/C", e.what());
        }
    }
    if (kind == "diagonal") {
        Profile b = parse_profile(require(j, "b", ""), "b");
        Profile c = parse_profile(require(j, "c", ""), "c");
        const double s0 = j.contains("s0") ? number(j["s0"], "s0") : 0.0;
        if (s0 < 0.0) bad("s0", "must be >= 0");
        DiagonalRealization d = make_diagonal_realization(std::move(b), std::move(c), s0);
        if (j.contains("nodes")) d.nodes = integer(j["nodes"], "nodes");
        if (j.contains("panel_nodes")) d.panel_nodes = integer(j["panel_nodes"], "panel_nodes");
        if (j.contains("map")) {
            if (!j["map"].is_string()) bad("map", "expected a string");
            try {
                d.map = parse_map_kind(j["map"].get<std::string>());
            } catch (const Error& e) {
                bad("map", e.what());
            }
        }
        if (j.contains("scale")) d.scale = number(j["scale"], "scale");
        if (j.contains("algebraic")) {
            if (!j["algebraic"].is_boolean()) bad("algebraic", "expected a boolean");
            d.algebraic = j["algebraic"].get<bool>();
        }
        if (d.nodes < 2) bad("nodes", "must be >= 2");
        if (!(d.scale > 0.0)) bad("scale", "must be > 0");
        return d;
    }
    if (kind == "rational") {
        const json& ps = require(j, "poles", "");
        if (!ps.is_array() || ps.empty()) bad("poles", "expected a non-empty array");
        std::vector<Pole> poles;
        for (std::size_t i = 0; i < ps.size(); ++i) {
            const std::string f = "poles[" + std::to_string(i) + "]";
            Pole p;
            p.a = parse_complex(require(ps[i], "a", f), f + ".a");
            p.r = integer(require(ps[i], "r", f), f + ".r");
            if (p.r < 1) bad(f + ".r", "must be >= 1");
            poles.push_back(p);
        }
        const int nodes = j.contains("nodes") ? integer(j["nodes"], "nodes") : 128;
        MapKind map = MapKind::rational;
        if (j.contains("map")) {
            if (!j["map"].is_string()) bad("map", "expected a string");
            map = parse_map_kind(j["map"].get<std::string>());
        }
        const double scale = j.contains("scale") ? number(j["scale"], "scale") : 1.0;
        try {
            return rational_realization(poles, nodes, map, scale);
        } catch (const Error& e) {
            bad("poles", e.what());
        }
    }
    bad("kind", "unknown system kind '" + kind + "'");
}

json load_json(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ArgumentError("cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ArgumentError("malformed JSON in '" + path + "': " + e.what());
    }
}

Realization load_system(const std::string& path) { return parse_system(load_json(path)); }

CanonicalSystem parse_canonical(const json& j)
{
    if (!j.is_object()) bad("<root>", "expected an object");
    const json& k = require(j, "kind", "");
    if (!k.is_string()) bad("kind", "expected a string");
    const std::string kind = k.get<std::string>();
    if (kind == "schrodinger") {
        std::string pot = "free";
        if (j.contains("potential")) {
            if (!j["potential"].is_string()) bad("potential", "expected 'free' or 'soliton'");
            pot = j["potential"].get<std::string>();
        }
        if (pot == "free") return canonical_schrodinger(potential_free());
        if (pot == "soliton") return canonical_schrodinger(potential_soliton());
        bad("potential", "expected 'free' or 'soliton'");
    }
    if (kind == "airy") return canonical_airy();
    if (kind == "constant") {
        const Eigen::Matrix2d o0 = parse_2x2(require(j, "omega0", ""), "omega0");
        const Eigen::Matrix2d o1 = parse_2x2(require(j, "omega1", ""), "omega1");
        CanonicalSystem cs = canonical_constant(o0, o1);
        try {
            validate_canonical(cs, 0.0, 1.0, 2);
        } catch (const Error& e) {
            bad("omega", e.what());
        }
        return cs;
    }
    bad("kind", "unknown canonical system kind '" + kind + "'");
}

CanonicalSystem load_canonical(const std::string& path) { return parse_canonical(load_json(path)); }

}  // namespace spectral
