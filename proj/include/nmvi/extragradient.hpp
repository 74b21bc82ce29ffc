#pragma once

// Korpelevich extra-gradient iteration
//   y^k     = P_K[x^k - alpha F(x^k)]
//   x^{k+1} = P_K[x^k - alpha F(y^k)]
// with optional Fejer monitoring against a known Minty point.

#include "nmvi/problem.hpp"
#include "nmvi/residual.hpp"

#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace nmvi {

inline constexpr double kFejerSlackTol = 1e-9;

struct SolverConfig {
    /// Explicit stepsize; nullopt selects alpha = alpha_safety / L.
    std::optional<double> alpha;
    double alpha_safety = 0.9;
    std::size_t max_iters = 100000;
    double residual_tol = kDefaultSolutionTol;
    Vector x0;
    std::uint64_t seed = 0;
    /// Known Minty solution used for Fejer monitoring.
    std::optional<Vector> fejer_reference;
    bool record_trace = false;
    /// Known Lipschitz constant of F on K; taken as exact.
    std::optional<double> lipschitz;
    /// Sampling box for the Lipschitz estimate when K is unbounded.
    std::optional<Box> lipschitz_box;
    std::size_t lipschitz_samples = 10000;
};

struct IterationRecord {
    std::size_t k = 0;
    Vector x;
    Vector y;
    /// Natural residual at x.
    double residual = 0.0;
    std::optional<double> dist_to_reference;
    /// ||x^k - ref||^2 - ||x^{k+1} - ref||^2 - (1 - alpha^2 L^2) ||x^k - y^k||^2
    std::optional<double> fejer_slack;
};

enum class SolverStatus { converged, max_iters_reached, diverged };

inline const char* to_string(SolverStatus s) {
    switch (s) {
    case SolverStatus::converged: return "converged";
    case SolverStatus::max_iters_reached: return "max_iters_reached";
    case SolverStatus::diverged: return "diverged";
    }
    return "unknown";
}

struct SolverResult {
    SolverStatus status = SolverStatus::max_iters_reached;
    Vector final_point;
    double final_residual = std::numeric_limits<double>::infinity();
    std::size_t iterations_used = 0;
    std::vector<IterationRecord> trace;
    double alpha_used = 0.0;
    std::optional<double> lipschitz_used;
    bool lipschitz_exact = false;
    /// min over the run of ||x^k - y^k||, including the terminal point.
    double min_gap = std::numeric_limits<double>::infinity();
    std::optional<double> final_dist_to_reference;
    std::optional<double> min_fejer_slack;
    std::size_t fejer_violations = 0;
    /// Human-readable notes (Fejer warnings under a sampled L, divergence cause).
    std::vector<std::string> warnings;
};

struct StepResult {
    Vector y;
    Vector x_next;
};

/// One extra-gradient step from x.
inline StepResult step(const VIProblem& problem, const Vector& x, double alpha) {
    if (!(alpha > 0.0)) {
        throw ValidationError("alpha must be positive");
    }
    const FeasibleSet& k = problem.set();
    Vector y = k.project(x - alpha * eval_mapping(problem.mapping(), x));
    Vector x_next = k.project(x - alpha * eval_mapping(problem.mapping(), y));
    if (!all_finite(y) || !all_finite(x_next)) {
        throw NonFiniteError("step: non-finite iterate");
    }
    return {std::move(y), std::move(x_next)};
}

namespace detail {

struct ResolvedStepsize {
    double alpha = 0.0;
    std::optional<double> lipschitz;
    bool exact = false;
};

inline ResolvedStepsize resolve_stepsize(const VIProblem& problem, const SolverConfig& cfg) {
    if (cfg.alpha && !(*cfg.alpha > 0.0 && std::isfinite(*cfg.alpha))) {
        throw ValidationError("alpha must be positive");
    }
    if (!(cfg.alpha_safety > 0.0 && cfg.alpha_safety < 1.0)) {
        throw ValidationError("alpha_safety must lie in (0, 1)");
    }
    ResolvedStepsize out;
    if (cfg.lipschitz) {
        if (!(*cfg.lipschitz >= 0.0) || !std::isfinite(*cfg.lipschitz)) {
            throw ValidationError("lipschitz must be nonnegative and finite");
        }
        out.lipschitz = *cfg.lipschitz;
        out.exact = true;
    } else {
        const bool estimable = problem.mapping().affine_form() || problem.set().is_bounded() ||
                               cfg.lipschitz_box.has_value();
        if (estimable) {
            const auto est = lipschitz_estimate(problem.mapping(), problem.set(), cfg.lipschitz_samples,
                                                cfg.seed, cfg.lipschitz_box);
            out.lipschitz = est.value;
            out.exact = est.exact;
        } else if (!cfg.alpha) {
            throw ValidationError(
                "alpha=auto needs a Lipschitz estimate: supply lipschitz, a bounded set or a sampling box");
        }
    }
    if (cfg.alpha) {
        out.alpha = *cfg.alpha;
    } else {
        // A constant mapping has L = 0; any stepsize works, use the safety factor itself.
        out.alpha = *out.lipschitz > 0.0 ? cfg.alpha_safety / *out.lipschitz : cfg.alpha_safety;
    }
    return out;
}

} // namespace detail

/// Runs the iteration from P_K[x0] until the natural residual drops to
/// residual_tol, max_iters steps have been taken, or an iterate is non-finite.
inline SolverResult solve(const VIProblem& problem, const SolverConfig& cfg) {
    require_dim(cfg.x0.size(), problem.dim(), "solver x0");
    if (!all_finite(cfg.x0)) {
        throw ValidationError("solver x0 must be finite");
    }
    if (!(cfg.residual_tol >= 0.0)) {
        throw ValidationError("residual_tol must be nonnegative");
    }
    if (cfg.fejer_reference) {
        require_dim(cfg.fejer_reference->size(), problem.dim(), "fejer_reference");
    }
    const auto stepsize = detail::resolve_stepsize(problem, cfg);
    const double alpha = stepsize.alpha;

    SolverResult result;
    result.alpha_used = alpha;
    result.lipschitz_used = stepsize.lipschitz;
    result.lipschitz_exact = stepsize.exact;

    const FeasibleSet& set = problem.set();
    const Mapping& f = problem.mapping();
    const bool monitor_slack = stepsize.lipschitz.has_value();
    const double decrement_factor =
        monitor_slack ? 1.0 - alpha * alpha * *stepsize.lipschitz * *stepsize.lipschitz : 0.0;

    Vector x = set.project(cfg.x0);
    std::size_t k = 0;
    try {
        for (;; ++k) {
            const Vector fx = eval_mapping(f, x);
            const double residual = (x - set.project(x - fx)).norm();
            if (residual <= cfg.residual_tol || k == cfg.max_iters) {
                result.final_residual = residual;
                result.status =
                    residual <= cfg.residual_tol ? SolverStatus::converged : SolverStatus::max_iters_reached;
                result.min_gap = std::min(result.min_gap, (x - set.project(x - alpha * fx)).norm());
                break;
            }
            const Vector y = set.project(x - alpha * fx);
            const Vector x_next = set.project(x - alpha * eval_mapping(f, y));
            if (!all_finite(y) || !all_finite(x_next)) {
                throw NonFiniteError("non-finite iterate");
            }
            const double gap = (x - y).norm();
            result.min_gap = std::min(result.min_gap, gap);

            IterationRecord rec;
            if (cfg.fejer_reference) {
                const Vector& ref = *cfg.fejer_reference;
                const double before = (x - ref).squaredNorm();
                rec.dist_to_reference = std::sqrt(before);
                if (monitor_slack) {
                    const double slack = before - (x_next - ref).squaredNorm() - decrement_factor * gap * gap;
                    rec.fejer_slack = slack;
                    result.min_fejer_slack = result.min_fejer_slack ? std::min(*result.min_fejer_slack, slack) : slack;
                    if (slack < -kFejerSlackTol) {
                        ++result.fejer_violations;
                    }
                }
            }
            if (cfg.record_trace) {
                rec.k = k;
                rec.x = x;
                rec.y = y;
                rec.residual = residual;
                result.trace.push_back(std::move(rec));
            }
            x = x_next;
        }
    } catch (const NonFiniteError& e) {
        result.status = SolverStatus::diverged;
        result.warnings.emplace_back(std::string("diverged at iteration ") + std::to_string(k) + ": " + e.what());
    }
    result.final_point = x;
    result.iterations_used = k;
    if (cfg.fejer_reference) {
        result.final_dist_to_reference = (x - *cfg.fejer_reference).norm();
    }
    if (result.fejer_violations > 0 && !result.lipschitz_exact) {
        result.warnings.emplace_back(std::to_string(result.fejer_violations) +
                                     " Fejer violations under a sampled Lipschitz estimate; "
                                     "alpha < 1/L may not hold");
    }
    return result;
}

} // namespace nmvi
