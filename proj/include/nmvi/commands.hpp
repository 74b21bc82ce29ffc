#pragma once

// solve / diagnose / oracle / catalog-list over problem files. Each command
// returns its report document and, for solve, the CSV trace; writing files
// is left to the caller.

#include "nmvi/problem_file.hpp"

#include <charconv>
#include <chrono>
#include <cstdio>
#include <string>

namespace nmvi {

enum ExitCode : int { kExitOk = 0, kExitInvalid = 1, kExitNotConverged = 2, kExitViolation = 3 };

/// Command-line overrides, folded into the document before validation so
/// they are part of the digest.
struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<double> residual_tol;
    std::optional<double> grid_tol;
    std::optional<std::size_t> max_iters;
    std::optional<std::size_t> points_per_axis;
};

struct CommandOutput {
    int exit_code = kExitOk;
    json report;
    std::optional<std::string> trace_csv;
    std::string error;

    /// Report body without the wall-clock field; byte-stable across reruns.
    std::string stable_body() const {
        json r = report;
        r.erase("wall_time_ms");
        return r.dump(2) + "\n";
    }
};

/// Shortest decimal that parses back to the same double.
inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline json apply_overrides(json doc, const Overrides& o) {
    if (!doc.is_object()) {
        return doc;
    }
    auto section = [&doc](const char* key) -> json& {
        json& s = doc[key];
        if (s.is_null()) {
            s = json::object();
        }
        return s;
    };
    if (o.seed) {
        doc["seed"] = *o.seed;
    }
    if (o.residual_tol) {
        section("solver")["residual_tol"] = *o.residual_tol;
    }
    if (o.max_iters) {
        section("solver")["max_iters"] = *o.max_iters;
    }
    if (o.grid_tol) {
        section("grid")["tol"] = *o.grid_tol;
    }
    if (o.points_per_axis) {
        section("grid")["points_per_axis"] = *o.points_per_axis;
    }
    return doc;
}

namespace detail {

inline json to_json(const Vector& v) {
    json a = json::array();
    for (Index i = 0; i < v.size(); ++i) {
        a.push_back(v[i]);
    }
    return a;
}

inline json to_json(const std::vector<Vector>& pts) {
    json a = json::array();
    for (const auto& p : pts) {
        a.push_back(to_json(p));
    }
    return a;
}

template <class T>
json opt(const std::optional<T>& v) {
    return v ? json(*v) : json(nullptr);
}

inline json opt(const std::optional<Vector>& v) {
    return v ? to_json(*v) : json(nullptr);
}

inline json to_json(const DiagnosticReport& r) {
    json w = json::array();
    for (const auto& x : r.witnesses) {
        w.push_back(json{{"point", to_json(x.point)},
                         {"partner", opt(x.partner)},
                         {"value", x.value},
                         {"row", opt(x.row)},
                         {"detail", x.detail}});
    }
    return json{{"check_name", r.check_name},   {"verdict", to_string(r.verdict)}, {"witnesses", w},
                {"samples_used", r.samples_used}, {"seed", r.seed},               {"estimate", opt(r.estimate)},
                {"profile", r.profile},          {"notes", r.notes}};
}

inline json to_json(const SolverResult& r) {
    return json{{"status", to_string(r.status)},
                {"final_point", to_json(r.final_point)},
                {"final_residual", r.final_residual},
                {"iterations_used", r.iterations_used},
                {"alpha_used", r.alpha_used},
                {"lipschitz_used", opt(r.lipschitz_used)},
                {"lipschitz_exact", r.lipschitz_exact},
                {"min_gap", r.min_gap},
                {"final_dist_to_reference", opt(r.final_dist_to_reference)},
                {"min_fejer_slack", opt(r.min_fejer_slack)},
                {"fejer_violations", r.fejer_violations},
                {"trace_rows", r.trace.size()},
                {"warnings", r.warnings}};
}

inline json problem_summary(const ProblemFile& pf) {
    return json{{"source", pf.source},
                {"name", pf.name},
                {"dim", pf.problem.dim()},
                {"mapping", to_string(pf.problem.mapping().kind())},
                {"set", pf.problem.set().kind()}};
}

inline std::string trace_csv(const SolverResult& r, Index dim, bool with_reference) {
    std::string out = "k";
    for (Index i = 0; i < dim; ++i) {
        out += ",x_" + std::to_string(i);
    }
    for (Index i = 0; i < dim; ++i) {
        out += ",y_" + std::to_string(i);
    }
    out += ",residual";
    if (with_reference) {
        out += ",dist_to_reference,fejer_slack";
    }
    out += "\n";
    for (const auto& rec : r.trace) {
        out += std::to_string(rec.k);
        for (Index i = 0; i < dim; ++i) {
            out += "," + format_double(rec.x[i]);
        }
        for (Index i = 0; i < dim; ++i) {
            out += "," + format_double(rec.y[i]);
        }
        out += "," + format_double(rec.residual);
        if (with_reference) {
            out += "," + (rec.dist_to_reference ? format_double(*rec.dist_to_reference) : std::string());
            out += "," + (rec.fejer_slack ? format_double(*rec.fejer_slack) : std::string());
        }
        out += "\n";
    }
    return out;
}

inline SolverConfig solver_config(const ProblemFile& pf) {
    SolverConfig cfg;
    cfg.seed = pf.seed;
    cfg.record_trace = true;
    cfg.lipschitz_box = pf.sampling_box;
    if (pf.entry) {
        cfg.x0 = pf.entry->default_start;
        cfg.lipschitz = pf.entry->lipschitz;
    } else {
        cfg.x0 = Vector::Zero(pf.problem.dim());
    }
    if (pf.solver) {
        const SolverSection& s = *pf.solver;
        cfg.alpha = s.alpha;
        cfg.alpha_safety = s.alpha_safety.value_or(cfg.alpha_safety);
        cfg.max_iters = s.max_iters.value_or(cfg.max_iters);
        cfg.residual_tol = s.residual_tol.value_or(cfg.residual_tol);
        if (s.x0) {
            cfg.x0 = *s.x0;
        }
        cfg.fejer_reference = s.fejer_reference;
        cfg.record_trace = s.record_trace;
        if (s.lipschitz) {
            cfg.lipschitz = s.lipschitz;
        }
        cfg.lipschitz_samples = s.lipschitz_samples.value_or(cfg.lipschitz_samples);
    }
    return cfg;
}

inline std::vector<Vector> sample_points(const ProblemFile& pf, std::size_t n, std::uint64_t seed) {
    const auto region = sampling_region(pf.problem.set(), pf.sampling_box);
    Rng rng(seed);
    std::vector<Vector> pts;
    pts.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        pts.push_back(pf.problem.set().sample(rng, region));
    }
    return pts;
}

inline DiagnosticReport run_check(const ProblemFile& pf, const CheckRequest& c) {
    const Mapping& f = pf.problem.mapping();
    auto box = [&pf] { return sampling_region(pf.problem.set(), pf.sampling_box); };
    if (c.name == "weak_coupling_check") {
        return weak_coupling_check(f, sample_points(pf, c.samples.value_or(100), pf.seed));
    }
    if (c.name == "gram_pd_check") {
        return gram_pd_check(f, sample_points(pf, c.samples.value_or(100), pf.seed), c.tol.value_or(kGramPivotTol));
    }
    if (c.name == "orthogonality_check") {
        return orthogonality_check(f, sample_points(pf, c.samples.value_or(100), pf.seed), c.tol.value_or(1e-10));
    }
    if (c.name == "monotonicity_probe") {
        return monotonicity_probe(f, pf.problem.set(), c.samples.value_or(kDefaultPairs), pf.seed, box());
    }
    if (c.name == "minty_certificate_check") {
        if (!pf.certificate) {
            throw ValidationError("minty_certificate_check requires a certificate, none given");
        }
        return minty_certificate_check(pf.problem, *pf.certificate, c.samples.value_or(kDefaultPairs), pf.seed, box());
    }
    // coercivity_probe
    const std::vector<double> radii = c.radii.empty() ? std::vector<double>{1.0, 10.0, 100.0} : c.radii;
    return coercivity_probe(f, pf.seed, radii, c.samples.value_or(kDefaultSphereSamples));
}

inline std::size_t default_points(Index dim) {
    switch (dim) {
    case 1: return 201;
    case 2: return 51;
    default: return 15;
    }
}

inline GridSpec grid_spec(const ProblemFile& pf) {
    GridSpec g;
    const FeasibleSet& set = pf.problem.set();
    std::optional<Box> bounds;
    if (pf.grid && pf.grid->bounds) {
        bounds = pf.grid->bounds;
    } else if (set.is_bounded()) {
        bounds = set.bounding_box();
    } else {
        bounds = pf.sampling_box;
    }
    if (!bounds) {
        throw ValidationError("grid.bounds: required for an unbounded feasible set without a sampling box");
    }
    g.bounds = *bounds;
    g.points_per_axis = default_points(pf.problem.dim());
    if (pf.grid) {
        g.points_per_axis = pf.grid->points_per_axis.value_or(g.points_per_axis);
        g.tol = pf.grid->tol.value_or(g.tol);
        g.refinement = pf.grid->refinement.value_or(g.refinement);
    }
    return g;
}

} // namespace detail

inline CommandOutput cmd_solve(const ProblemFile& pf) {
    CommandOutput out;
    const SolverConfig cfg = detail::solver_config(pf);
    const SolverResult r = solve(pf.problem, cfg);
    out.report["solver_result"] = detail::to_json(r);
    out.trace_csv = detail::trace_csv(r, pf.problem.dim(), cfg.fejer_reference.has_value());
    out.exit_code = r.status == SolverStatus::converged ? kExitOk : kExitNotConverged;
    return out;
}

inline CommandOutput cmd_diagnose(const ProblemFile& pf) {
    if (pf.diagnostics.empty()) {
        throw ValidationError("diagnostics: at least one check must be listed");
    }
    CommandOutput out;
    out.report["diagnostic_reports"] = json::array();
    bool violated = false;
    for (const auto& c : pf.diagnostics) {
        const DiagnosticReport r = detail::run_check(pf, c);
        violated = violated || r.verdict == Verdict::violated;
        out.report["diagnostic_reports"].push_back(detail::to_json(r));
    }
    out.exit_code = violated ? kExitViolation : kExitOk;
    return out;
}

inline CommandOutput cmd_oracle(const ProblemFile& pf) {
    if (pf.problem.dim() > kOracleMaxDim) {
        throw ValidationError("oracle: problem dimension " + std::to_string(pf.problem.dim()) +
                              " exceeds the cap of 3");
    }
    const GridSpec g = detail::grid_spec(pf);
    const GridOracleResult r = grid_oracle(pf.problem, g);
    const bool included = point_set_includes(r.sol, r.msol);
    CommandOutput out;
    out.report["oracle_output"] = json{{"sol", detail::to_json(r.sol)},
                                       {"msol", detail::to_json(r.msol)},
                                       {"msol_subset_of_sol", included},
                                       {"candidates", r.candidates},
                                       {"test_points", r.test_points},
                                       {"grid",
                                        json{{"lower", detail::to_json(g.bounds.lower)},
                                             {"upper", detail::to_json(g.bounds.upper)},
                                             {"points_per_axis", g.points_per_axis},
                                             {"refinement", g.refinement},
                                             {"tol", g.tol}}}};
    out.exit_code = included ? kExitOk : kExitViolation;
    return out;
}

inline CommandOutput cmd_catalog_list() {
    CommandOutput out;
    json entries = json::array();
    for (const auto& e : catalog()) {
        entries.push_back(json{{"name", e.name},
                               {"description", e.description},
                               {"dim", e.problem.dim()},
                               {"set", e.problem.set().kind()},
                               {"tags", e.tags},
                               {"known_solution", detail::opt(e.known_solution)},
                               {"known_minty_solution", detail::opt(e.known_minty_solution)},
                               {"has_certificate", e.certificate.has_value()},
                               {"lipschitz", detail::opt(e.lipschitz)}});
    }
    out.report["command"] = "catalog-list";
    out.report["catalog"] = entries;
    return out;
}

/// Parses `text`, applies overrides and runs `verb`. Library errors become
/// exit code 1 with the message in `error` and in the report.
inline CommandOutput run_command(const std::string& verb, const std::string& text, const Overrides& overrides = {}) {
    const auto start = std::chrono::steady_clock::now();
    CommandOutput out;
    try {
        if (verb == "catalog-list") {
            out = cmd_catalog_list();
        } else {
            const json doc = apply_overrides(parse_json_text(text), overrides);
            const ProblemFile pf = load_problem(doc);
            if (verb == "solve") {
                out = cmd_solve(pf);
            } else if (verb == "diagnose") {
                out = cmd_diagnose(pf);
            } else if (verb == "oracle") {
                out = cmd_oracle(pf);
            } else {
                throw ValidationError("unknown command '" + verb + "'");
            }
            out.report["command"] = verb;
            out.report["inputs_digest"] = "fnv1a64:" + fnv1a_hex(pf.canonical.dump());
            out.report["problem"] = detail::problem_summary(pf);
            out.report["seed"] = pf.seed;
            if (!out.report.contains("diagnostic_reports")) {
                out.report["diagnostic_reports"] = json::array();
            }
        }
    } catch (const std::exception& e) {
        // Library errors and any JSON type mismatch that slipped past validation.
        out = CommandOutput{};
        out.exit_code = kExitInvalid;
        out.error = e.what();
        out.report = json{{"command", verb}, {"error", out.error}};
    }
    const auto elapsed = std::chrono::steady_clock::now() - start;
    out.report["wall_time_ms"] = std::chrono::duration_cast<std::chrono::milliseconds>(elapsed).count();
    return out;
}

} // namespace nmvi
