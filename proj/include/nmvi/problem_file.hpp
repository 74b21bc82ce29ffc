#pragma once

// Problem files (schema version 1): JSON documents naming a problem by
// catalog entry, inline mapping + set, or game, plus optional solver,
// certificate, diagnostics and grid blocks.

#include "nmvi/diagnostics.hpp"
#include "nmvi/extragradient.hpp"
#include "nmvi/games.hpp"
#include "nmvi/oracle.hpp"

#include "json.hpp"

#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

namespace nmvi {

using json = nlohmann::json;

/// Malformed problem file: syntax errors carry line and column, semantic
/// errors the dotted path of the offending field.
class ParseError : public Error {
public:
    using Error::Error;
};

inline constexpr int kSchemaVersion = 1;

struct CheckRequest {
    std::string name;
    std::optional<std::size_t> samples;
    std::optional<double> tol;
    std::vector<double> radii;
};

inline const std::vector<std::string>& check_names() {
    static const std::vector<std::string> names{"weak_coupling_check", "gram_pd_check", "orthogonality_check",
                                                "monotonicity_probe",  "minty_certificate_check",
                                                "coercivity_probe"};
    return names;
}

struct SolverSection {
    std::optional<double> alpha;
    std::optional<double> alpha_safety;
    std::optional<std::size_t> max_iters;
    std::optional<double> residual_tol;
    std::optional<Vector> x0;
    std::optional<Vector> fejer_reference;
    bool record_trace = true;
    std::optional<double> lipschitz;
    std::optional<std::size_t> lipschitz_samples;
};

struct GridSection {
    std::optional<std::size_t> points_per_axis;
    std::optional<double> tol;
    std::optional<std::size_t> refinement;
    std::optional<Box> bounds;
};

/// A parsed and validated problem file.
struct ProblemFile {
    int schema_version = kSchemaVersion;
    std::uint64_t seed = 0;
    /// "catalog", "inline" or "game".
    std::string source;
    std::string name;
    VIProblem problem;
    std::optional<CatalogEntry> entry;
    std::optional<SolverSection> solver;
    std::optional<MintyCertificate> certificate;
    std::vector<CheckRequest> diagnostics;
    std::optional<Box> sampling_box;
    std::optional<GridSection> grid;
    /// Canonical form of the parsed document (sorted keys).
    json canonical;
};

namespace detail {

[[noreturn]] inline void field_error(const std::string& path, const std::string& msg) {
    throw ParseError(path + ": " + msg);
}

inline std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
}

inline std::string join(const std::string& path, std::size_t i) {
    return path + "[" + std::to_string(i) + "]";
}

inline void allow_keys(const json& j, const std::string& path, std::initializer_list<const char*> keys) {
    if (!j.is_object()) {
        field_error(path.empty() ? "<root>" : path, "expected an object");
    }
    for (const auto& item : j.items()) {
        bool ok = false;
        for (const char* k : keys) {
            ok = ok || item.key() == k;
        }
        if (!ok) {
            field_error(join(path, item.key()), "unknown field");
        }
    }
}

inline const json& require(const json& j, const std::string& path, const char* key) {
    auto it = j.find(key);
    if (it == j.end()) {
        field_error(join(path, key), "required field missing");
    }
    return *it;
}

inline double as_number(const json& j, const std::string& path) {
    if (!j.is_number()) {
        field_error(path, "expected a number");
    }
    const double v = j.get<double>();
    if (!std::isfinite(v)) {
        field_error(path, "value must be finite");
    }
    return v;
}

inline std::size_t as_count(const json& j, const std::string& path) {
    if (!j.is_number_integer() || j.get<long long>() <= 0) {
        field_error(path, "expected a positive integer");
    }
    return j.get<std::size_t>();
}

inline Vector as_vector(const json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) {
        field_error(path, "expected a nonempty array of numbers");
    }
    Vector v(static_cast<Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        v[static_cast<Index>(i)] = as_number(j[i], join(path, i));
    }
    return v;
}

inline Matrix as_matrix(const json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) {
        field_error(path, "expected a nonempty array of rows");
    }
    const std::size_t rows = j.size();
    std::size_t cols = 0;
    for (std::size_t r = 0; r < rows; ++r) {
        if (!j[r].is_array()) {
            field_error(join(path, r), "expected an array of numbers");
        }
        if (r == 0) {
            cols = j[r].size();
        } else if (j[r].size() != cols) {
            field_error(join(path, r), "row length differs from row 0");
        }
    }
    Matrix m(static_cast<Index>(rows), static_cast<Index>(cols));
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            m(static_cast<Index>(r), static_cast<Index>(c)) = as_number(j[r][c], join(join(path, r), c));
        }
    }
    return m;
}

/// Re-raises library validation failures with the field path prepended.
template <class Fn>
auto at_path(const std::string& path, Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const ParseError&) {
        throw;
    } catch (const Error& e) {
        field_error(path, e.what());
    }
}

inline Box parse_box(const json& j, const std::string& path) {
    allow_keys(j, path, {"lower", "upper"});
    Box b{as_vector(require(j, path, "lower"), join(path, "lower")),
          as_vector(require(j, path, "upper"), join(path, "upper"))};
    at_path(path, [&] {
        validate_box(b);
        return 0;
    });
    return b;
}

inline std::string kind_of(const json& j, const std::string& path) {
    if (!j.is_object()) {
        field_error(path, "expected an object");
    }
    const json& k = require(j, path, "kind");
    if (!k.is_string()) {
        field_error(join(path, "kind"), "expected a string");
    }
    return k.get<std::string>();
}

inline Mapping parse_mapping(const json& j, const std::string& path) {
    const std::string kind = kind_of(j, path);
    if (kind == "affine") {
        allow_keys(j, path, {"kind", "A", "b"});
        Matrix a = as_matrix(require(j, path, "A"), join(path, "A"));
        Vector b = as_vector(require(j, path, "b"), join(path, "b"));
        return at_path(path, [&] { return Mapping::affine(a, b); });
    }
    if (kind == "builtin") {
        allow_keys(j, path, {"kind", "name", "dim", "params"});
        const json& n = require(j, path, "name");
        if (!n.is_string()) {
            field_error(join(path, "name"), "expected a string");
        }
        Index dim = 0;
        if (j.contains("dim")) {
            dim = static_cast<Index>(as_count(j["dim"], join(path, "dim")));
        }
        BuiltinParams params;
        if (j.contains("params")) {
            if (!j["params"].is_object()) {
                field_error(join(path, "params"), "expected an object");
            }
            for (const auto& item : j["params"].items()) {
                params[item.key()] = as_number(item.value(), join(join(path, "params"), item.key()));
            }
        }
        return at_path(path, [&] { return Mapping::builtin(n.get<std::string>(), dim, params); });
    }
    if (kind == "composite") {
        allow_keys(j, path, {"kind", "terms"});
        const json& terms = require(j, path, "terms");
        const std::string tpath = join(path, "terms");
        if (!terms.is_array() || terms.empty()) {
            field_error(tpath, "expected a nonempty array");
        }
        std::vector<std::pair<double, Mapping>> parsed;
        for (std::size_t i = 0; i < terms.size(); ++i) {
            const std::string p = join(tpath, i);
            allow_keys(terms[i], p, {"weight", "mapping"});
            parsed.emplace_back(as_number(require(terms[i], p, "weight"), join(p, "weight")),
                                parse_mapping(require(terms[i], p, "mapping"), join(p, "mapping")));
        }
        return at_path(path, [&] { return Mapping::composite(parsed); });
    }
    field_error(join(path, "kind"), "unknown mapping kind '" + kind + "'");
}

inline FeasibleSet parse_set(const json& j, const std::string& path) {
    const std::string kind = kind_of(j, path);
    auto dim_of = [&] { return static_cast<Index>(as_count(require(j, path, "dim"), join(path, "dim"))); };
    if (kind == "whole-space") {
        allow_keys(j, path, {"kind", "dim"});
        return FeasibleSet::whole_space(dim_of());
    }
    if (kind == "nonnegative-orthant") {
        allow_keys(j, path, {"kind", "dim"});
        return FeasibleSet::nonnegative_orthant(dim_of());
    }
    if (kind == "box") {
        allow_keys(j, path, {"kind", "lower", "upper"});
        const Box b = parse_box(json{{"lower", require(j, path, "lower")}, {"upper", require(j, path, "upper")}}, path);
        return FeasibleSet::box(b);
    }
    if (kind == "ball") {
        allow_keys(j, path, {"kind", "center", "radius"});
        Vector c = as_vector(require(j, path, "center"), join(path, "center"));
        const double r = as_number(require(j, path, "radius"), join(path, "radius"));
        return at_path(join(path, "radius"), [&] { return FeasibleSet::ball(c, r); });
    }
    if (kind == "halfspace") {
        allow_keys(j, path, {"kind", "normal", "offset"});
        Vector n = as_vector(require(j, path, "normal"), join(path, "normal"));
        const double off = as_number(require(j, path, "offset"), join(path, "offset"));
        return at_path(join(path, "normal"), [&] { return FeasibleSet::halfspace(n, off); });
    }
    if (kind == "simplex") {
        allow_keys(j, path, {"kind", "dim", "scale"});
        const Index d = dim_of();
        const double s = j.contains("scale") ? as_number(j["scale"], join(path, "scale")) : 1.0;
        return at_path(join(path, "scale"), [&] { return FeasibleSet::simplex(d, s); });
    }
    if (kind == "product") {
        allow_keys(j, path, {"kind", "factors"});
        const json& fs = require(j, path, "factors");
        const std::string fpath = join(path, "factors");
        if (!fs.is_array() || fs.empty()) {
            field_error(fpath, "expected a nonempty array");
        }
        std::vector<FeasibleSet> factors;
        for (std::size_t i = 0; i < fs.size(); ++i) {
            factors.push_back(parse_set(fs[i], join(fpath, i)));
        }
        return FeasibleSet::product(std::move(factors));
    }
    field_error(join(path, "kind"), "unknown set kind '" + kind + "'");
}

inline GameSpec parse_game(const json& j, const std::string& path) {
    allow_keys(j, path, {"players"});
    const json& players = require(j, path, "players");
    const std::string ppath = join(path, "players");
    if (!players.is_array()) {
        field_error(ppath, "expected an array");
    }
    GameSpec g;
    for (std::size_t i = 0; i < players.size(); ++i) {
        const std::string p = join(ppath, i);
        allow_keys(players[i], p, {"dim", "action_set", "cost"});
        const Index dim = static_cast<Index>(as_count(require(players[i], p, "dim"), join(p, "dim")));
        FeasibleSet set = parse_set(require(players[i], p, "action_set"), join(p, "action_set"));
        const json& cost = require(players[i], p, "cost");
        const std::string cpath = join(p, "cost");
        const std::string kind = kind_of(cost, cpath);
        if (kind != "quadratic") {
            field_error(join(cpath, "kind"), "only quadratic costs can be given in a file");
        }
        allow_keys(cost, cpath, {"kind", "Q", "C", "c"});
        QuadraticCost qc{as_matrix(require(cost, cpath, "Q"), join(cpath, "Q")), Matrix(), Vector()};
        if (cost.contains("C")) {
            qc.coupling = as_matrix(cost["C"], join(cpath, "C"));
        }
        qc.linear = cost.contains("c") ? as_vector(cost["c"], join(cpath, "c")) : Vector::Zero(dim);
        g.players.push_back(PlayerSpec{dim, std::move(set), std::move(qc)});
    }
    at_path(path, [&] {
        // A player without "C" in a game with others is a dimension error surfaced here.
        for (auto& pl : g.players) {
            auto& qc = std::get<QuadraticCost>(pl.cost);
            if (qc.coupling.size() == 0) {
                qc.coupling = Matrix::Zero(pl.dim, g.total_dim() - pl.dim);
            }
        }
        validate_game(g);
        return 0;
    });
    return g;
}

inline SolverSection parse_solver(const json& j, const std::string& path, Index dim) {
    allow_keys(j, path,
               {"alpha", "alpha_safety", "max_iters", "residual_tol", "x0", "fejer_reference", "record_trace",
                "lipschitz", "lipschitz_samples"});
    SolverSection s;
    if (j.contains("alpha")) {
        const json& a = j["alpha"];
        if (a.is_string()) {
            if (a.get<std::string>() != "auto") {
                field_error(join(path, "alpha"), "expected a number or \"auto\"");
            }
        } else {
            s.alpha = as_number(a, join(path, "alpha"));
            if (!(*s.alpha > 0.0)) {
                field_error(join(path, "alpha"), "alpha must be positive");
            }
        }
    }
    if (j.contains("alpha_safety")) {
        s.alpha_safety = as_number(j["alpha_safety"], join(path, "alpha_safety"));
        if (!(*s.alpha_safety > 0.0 && *s.alpha_safety < 1.0)) {
            field_error(join(path, "alpha_safety"), "alpha_safety must lie in (0, 1)");
        }
    }
    if (j.contains("max_iters")) {
        s.max_iters = as_count(j["max_iters"], join(path, "max_iters"));
    }
    if (j.contains("residual_tol")) {
        s.residual_tol = as_number(j["residual_tol"], join(path, "residual_tol"));
        if (*s.residual_tol < 0.0) {
            field_error(join(path, "residual_tol"), "residual_tol must be nonnegative");
        }
    }
    auto point = [&](const char* key) -> std::optional<Vector> {
        if (!j.contains(key)) {
            return std::nullopt;
        }
        Vector v = as_vector(j[key], join(path, key));
        if (v.size() != dim) {
            field_error(join(path, key), "expected " + std::to_string(dim) + " entries");
        }
        return v;
    };
    s.x0 = point("x0");
    s.fejer_reference = point("fejer_reference");
    if (j.contains("record_trace")) {
        if (!j["record_trace"].is_boolean()) {
            field_error(join(path, "record_trace"), "expected a boolean");
        }
        s.record_trace = j["record_trace"].get<bool>();
    }
    if (j.contains("lipschitz")) {
        s.lipschitz = as_number(j["lipschitz"], join(path, "lipschitz"));
        if (*s.lipschitz < 0.0) {
            field_error(join(path, "lipschitz"), "lipschitz must be nonnegative");
        }
    }
    if (j.contains("lipschitz_samples")) {
        s.lipschitz_samples = as_count(j["lipschitz_samples"], join(path, "lipschitz_samples"));
    }
    return s;
}

inline CheckRequest parse_check(const json& j, const std::string& path) {
    CheckRequest c;
    if (j.is_string()) {
        c.name = j.get<std::string>();
    } else {
        allow_keys(j, path, {"check", "samples", "tol", "radii"});
        const json& n = require(j, path, "check");
        if (!n.is_string()) {
            field_error(join(path, "check"), "expected a string");
        }
        c.name = n.get<std::string>();
        if (j.contains("samples")) {
            c.samples = as_count(j["samples"], join(path, "samples"));
        }
        if (j.contains("tol")) {
            c.tol = as_number(j["tol"], join(path, "tol"));
            if (!(*c.tol > 0.0)) {
                field_error(join(path, "tol"), "tol must be positive");
            }
        }
        if (j.contains("radii")) {
            const Vector r = as_vector(j["radii"], join(path, "radii"));
            c.radii.assign(r.data(), r.data() + r.size());
        }
    }
    const auto& names = check_names();
    if (std::find(names.begin(), names.end(), c.name) == names.end()) {
        field_error(path, "unknown check name '" + c.name + "'");
    }
    return c;
}

inline std::size_t line_of(const std::string& text, std::size_t byte, std::size_t* column) {
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t i = 0; i < text.size() && i + 1 < byte; ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    *column = col;
    return line;
}

} // namespace detail

/// Parses a JSON document, mapping syntax errors to line/column.
inline json parse_json_text(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        std::size_t col = 0;
        const std::size_t line = detail::line_of(text, e.byte, &col);
        std::string what = e.what();
        const auto pos = what.find("syntax error");
        throw ParseError("parse error at line " + std::to_string(line) + ", column " + std::to_string(col) + ": " +
                         (pos == std::string::npos ? what : what.substr(pos)));
    }
}

/// Validates a parsed document and builds the problem it describes.
inline ProblemFile load_problem(const json& doc) {
    using namespace detail;
    allow_keys(doc, "", {"schema_version", "seed", "problem", "solver", "certificate", "diagnostics", "sampling_box",
                         "grid"});
    const json& ver = require(doc, "", "schema_version");
    if (!ver.is_number_integer()) {
        field_error("schema_version", "expected an integer");
    }
    if (ver.get<long long>() != kSchemaVersion) {
        field_error("schema_version", "unsupported schema version " + std::to_string(ver.get<long long>()) +
                                          " (this build reads version " + std::to_string(kSchemaVersion) + ")");
    }
    std::uint64_t seed = 0;
    if (doc.contains("seed")) {
        if (!doc["seed"].is_number_integer() || doc["seed"].get<long long>() < 0) {
            field_error("seed", "expected a nonnegative integer");
        }
        seed = doc["seed"].get<std::uint64_t>();
    }

    const json& pj = require(doc, "", "problem");
    if (!pj.is_object()) {
        field_error("problem", "expected an object");
    }
    const int sources = static_cast<int>(pj.contains("catalog")) + static_cast<int>(pj.contains("mapping") || pj.contains("set")) +
                        static_cast<int>(pj.contains("game"));
    if (sources != 1) {
        field_error("problem", "exactly one of catalog, mapping+set or game must be given");
    }

    std::optional<CatalogEntry> entry;
    std::string source;
    std::string name;
    std::optional<VIProblem> problem;
    if (pj.contains("catalog")) {
        allow_keys(pj, "problem", {"catalog"});
        if (!pj["catalog"].is_string()) {
            field_error("problem.catalog", "expected a string");
        }
        name = pj["catalog"].get<std::string>();
        entry = at_path("problem.catalog", [&] { return catalog_entry(name); });
        problem = entry->problem;
        source = "catalog";
    } else if (pj.contains("game")) {
        allow_keys(pj, "problem", {"game", "name"});
        problem = game_to_vi(parse_game(pj["game"], "problem.game"));
        source = "game";
    } else {
        allow_keys(pj, "problem", {"mapping", "set", "name"});
        Mapping f = parse_mapping(require(pj, "problem", "mapping"), "problem.mapping");
        FeasibleSet k = parse_set(require(pj, "problem", "set"), "problem.set");
        problem = at_path("problem", [&] { return VIProblem(f, k); });
        source = "inline";
    }
    if (pj.contains("name")) {
        if (!pj["name"].is_string()) {
            field_error("problem.name", "expected a string");
        }
        name = pj["name"].get<std::string>();
    }
    const Index dim = problem->dim();

    ProblemFile pf{kSchemaVersion, seed, source, name, *problem, entry, std::nullopt, std::nullopt, {}, std::nullopt,
                   std::nullopt, doc};
    if (doc.contains("sampling_box")) {
        pf.sampling_box = parse_box(doc["sampling_box"], "sampling_box");
        if (pf.sampling_box->dim() != dim) {
            field_error("sampling_box", "dimension does not match the problem dimension " + std::to_string(dim));
        }
    } else if (entry) {
        pf.sampling_box = entry->sampling_box;
    }
    if (doc.contains("solver")) {
        pf.solver = parse_solver(doc["solver"], "solver", dim);
    }
    if (doc.contains("certificate")) {
        const json& c = doc["certificate"];
        allow_keys(c, "certificate", {"proxy", "proxy_solution", "mu", "d"});
        Mapping proxy = parse_mapping(require(c, "certificate", "proxy"), "certificate.proxy");
        Vector xt = as_vector(require(c, "certificate", "proxy_solution"), "certificate.proxy_solution");
        const double mu = as_number(require(c, "certificate", "mu"), "certificate.mu");
        const double d = as_number(require(c, "certificate", "d"), "certificate.d");
        pf.certificate = at_path("certificate", [&] {
            if (proxy.dim() != dim) {
                throw DimensionError("proxy dimension does not match the problem dimension");
            }
            return MintyCertificate(proxy, xt, mu, d);
        });
    } else if (entry && entry->certificate) {
        pf.certificate = entry->certificate;
    }
    if (doc.contains("diagnostics")) {
        const json& d = doc["diagnostics"];
        if (!d.is_array()) {
            field_error("diagnostics", "expected an array");
        }
        for (std::size_t i = 0; i < d.size(); ++i) {
            pf.diagnostics.push_back(parse_check(d[i], join("diagnostics", i)));
        }
    }
    if (doc.contains("grid")) {
        const json& g = doc["grid"];
        allow_keys(g, "grid", {"points_per_axis", "tol", "refinement", "bounds"});
        GridSection gs;
        if (g.contains("points_per_axis")) {
            gs.points_per_axis = as_count(g["points_per_axis"], "grid.points_per_axis");
        }
        if (g.contains("tol")) {
            gs.tol = as_number(g["tol"], "grid.tol");
            if (*gs.tol < 0.0) {
                field_error("grid.tol", "tol must be nonnegative");
            }
        }
        if (g.contains("refinement")) {
            gs.refinement = as_count(g["refinement"], "grid.refinement");
        }
        if (g.contains("bounds")) {
            gs.bounds = parse_box(g["bounds"], "grid.bounds");
            if (gs.bounds->dim() != dim) {
                field_error("grid.bounds", "dimension does not match the problem dimension");
            }
        }
        pf.grid = gs;
    }
    return pf;
}

inline ProblemFile load_problem_text(const std::string& text) {
    return load_problem(parse_json_text(text));
}

} // namespace nmvi
