#pragma once

#include <string>

#include <json.hpp>

#include "spectral/realization.hpp"
#include "spectral/schrod.hpp"

namespace spectral {

// System description:
//   {"kind": "matrix", "A": [[...]], "B": [...], "C": [...]}
//   {"kind": "diagonal", "b": profile, "c": profile, "s0": 1.0, "nodes": 128, "map": "rational", "scale": 1.0}
//   {"kind": "rational", "poles": [{"a": [-1, 0], "r": 2}, ...], "nodes": 128}
// Complex entries are numbers or [re, im] pairs. Profiles are
//   {"type": "exponential", "rate": r} | {"type": "constant", "value": v}
//   | {"type": "indicator", "a": a, "b": b} | {"type": "power_exponential", "power": p, "rate": r}
//   | {"type": "table", "u": [...], "values": [...]} | {"type": "scaled", "profile": {...}, "factor": f}
// Malformed input raises ArgumentError naming the field.
Realization parse_system(const nlohmann::json& j);
Realization load_system(const std::string& path);

// {"kind": "schrodinger", "potential": "free" | "soliton"} | {"kind": "airy"}
// | {"kind": "constant", "omega0": [[..],[..]], "omega1": [[..],[..]]}
CanonicalSystem parse_canonical(const nlohmann::json& j);
CanonicalSystem load_canonical(const std::string& path);

nlohmann::json load_json(const std::string& path);
cplx parse_complex(const nlohmann::json& j, const std::string& field);

}  // namespace spectral
