#pragma once

// Sampled checks of the sufficient conditions for existence of solutions and
// of Minty solutions. A "violated" verdict always carries a witness that
// reproduces the failure; "satisfied" only means no violation was found.

#include "nmvi/linalg.hpp"
#include "nmvi/problem.hpp"

#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace nmvi {

enum class Verdict { satisfied, violated, inconclusive };

inline const char* to_string(Verdict v) {
    switch (v) {
    case Verdict::satisfied: return "satisfied";
    case Verdict::violated: return "violated";
    case Verdict::inconclusive: return "inconclusive";
    }
    return "unknown";
}

struct Witness {
    Vector point;
    /// Second point of a pair-based condition.
    std::optional<Vector> partner;
    /// The quantity that failed (margin, ratio, inner product, ...).
    double value = 0.0;
    /// Jacobian row for row-wise conditions.
    std::optional<Index> row;
    std::string detail;
};

struct DiagnosticReport {
    std::string check_name;
    Verdict verdict = Verdict::inconclusive;
    std::vector<Witness> witnesses;
    std::size_t samples_used = 0;
    std::uint64_t seed = 0;
    /// Check-specific scalar: sampled mu for the monotonicity probe,
    /// worst margin or ratio elsewhere.
    std::optional<double> estimate;
    /// Per-radius minima of the coercivity probe.
    std::vector<double> profile;
    std::vector<std::string> notes;
};

inline constexpr double kGramPivotTol = 1e-10;
inline constexpr double kMonotonicityTol = 1e-12;
inline constexpr double kCertificateTol = 1e-9;
inline constexpr std::size_t kDefaultPairs = 10000;
inline constexpr std::size_t kDefaultSphereSamples = 1000;

/// |J_ii| - sum_{j != i} |J_ij| for every row.
inline Vector row_dominance_margins(const Matrix& j) {
    Vector m(j.rows());
    for (Index i = 0; i < j.rows(); ++i) {
        const double diag = std::abs(j(i, i));
        m[i] = diag - (j.row(i).cwiseAbs().sum() - diag);
    }
    return m;
}

/// Strict row diagonal dominance of the Jacobian at each point, which rules
/// out a zero eigenvalue through the Gershgorin disks. A failing row does
/// not imply singularity, so failure is reported as inconclusive.
inline DiagnosticReport weak_coupling_check(const Mapping& f, const std::vector<Vector>& points) {
    DiagnosticReport r;
    r.check_name = "weak_coupling_check";
    r.verdict = Verdict::satisfied;
    r.samples_used = points.size();
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& x : points) {
        const Vector margins = row_dominance_margins(eval_jacobian(f, x).entries);
        Index row = 0;
        const double m = margins.minCoeff(&row);
        worst = std::min(worst, m);
        if (!(m > 0.0) && r.verdict == Verdict::satisfied) {
            r.verdict = Verdict::inconclusive;
            r.witnesses.push_back(Witness{x, std::nullopt, m, row,
                                          "row " + std::to_string(row) + " is not strictly diagonally dominant"});
        }
    }
    if (std::isfinite(worst)) {
        r.estimate = worst;
    }
    if (r.verdict == Verdict::inconclusive) {
        r.notes.emplace_back("weak coupling is sufficient only; a failing row says nothing about singularity");
    } else {
        r.notes.emplace_back("Jacobian nonsingular at every tested point");
    }
    return r;
}

struct GramTest {
    bool positive_definite = false;
    /// smallest pivot of J J^T over max(1, its largest diagonal)
    double relative_pivot = 0.0;
};

/// Positive definiteness of J J^T, equivalently det J != 0.
inline GramTest gram_positive_definite(const Matrix& j, double tol = kGramPivotTol) {
    const Matrix g = j * j.transpose();
    const auto chol = linalg::pivoted_cholesky(g, tol);
    GramTest t;
    t.relative_pivot = chol.smallest_pivot() / std::max(1.0, chol.max_diagonal);
    t.positive_definite = chol.max_diagonal > 0.0 && chol.rank == j.rows();
    return t;
}

inline DiagnosticReport gram_pd_check(const Mapping& f, const std::vector<Vector>& points,
                                      double tol = kGramPivotTol) {
    if (!(tol > 0.0)) {
        throw ValidationError("gram_pd_check: tolerance must be positive");
    }
    DiagnosticReport r;
    r.check_name = "gram_pd_check";
    r.verdict = Verdict::satisfied;
    r.samples_used = points.size();
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& x : points) {
        const auto t = gram_positive_definite(eval_jacobian(f, x).entries, tol);
        worst = std::min(worst, t.relative_pivot);
        if (!t.positive_definite && r.verdict == Verdict::satisfied) {
            r.verdict = Verdict::violated;
            r.witnesses.push_back(
                Witness{x, std::nullopt, t.relative_pivot, std::nullopt, "J J^T is not positive definite"});
        }
    }
    if (std::isfinite(worst)) {
        r.estimate = worst;
    }
    return r;
}

/// max |J J^T - I| <= tol at every point.
inline DiagnosticReport orthogonality_check(const Mapping& f, const std::vector<Vector>& points,
                                            double tol = 1e-10) {
    DiagnosticReport r;
    r.check_name = "orthogonality_check";
    r.verdict = Verdict::satisfied;
    r.samples_used = points.size();
    double worst = 0.0;
    for (const auto& x : points) {
        const Matrix j = eval_jacobian(f, x).entries;
        const double dev = (j * j.transpose() - Matrix::Identity(j.rows(), j.rows())).cwiseAbs().maxCoeff();
        worst = std::max(worst, dev);
        if (dev > tol && r.verdict == Verdict::satisfied) {
            r.verdict = Verdict::violated;
            r.witnesses.push_back(Witness{x, std::nullopt, dev, std::nullopt, "max |J J^T - I| exceeds tolerance"});
        }
    }
    r.estimate = worst;
    return r;
}

/// <F(x) - F(y), x - y> / ||x - y||^2
inline double monotonicity_quotient(const Mapping& f, const Vector& x, const Vector& y) {
    const Vector d = x - y;
    return (eval_mapping(f, x) - eval_mapping(f, y)).dot(d) / d.squaredNorm();
}

/// Sampled strong-monotonicity modulus; any negative quotient is a disproof.
inline DiagnosticReport monotonicity_probe(const Mapping& f, const FeasibleSet& region, std::size_t pairs,
                                           std::uint64_t seed,
                                           const std::optional<Box>& bounding_box = std::nullopt) {
    require_dim(region.dim(), f.dim(), "monotonicity_probe region");
    DiagnosticReport r;
    r.check_name = "monotonicity_probe";
    r.seed = seed;
    Rng rng(seed);
    double mu = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < pairs; ++s) {
        const Vector x = region.sample(rng, bounding_box);
        const Vector y = region.sample(rng, bounding_box);
        if ((x - y).squaredNorm() == 0.0) {
            continue;
        }
        ++r.samples_used;
        const double q = monotonicity_quotient(f, x, y);
        mu = std::min(mu, q);
        if (q < -kMonotonicityTol && r.witnesses.empty()) {
            r.witnesses.push_back(Witness{x, y, q, std::nullopt, "<F(x)-F(y), x-y> < 0"});
        }
    }
    if (r.samples_used == 0) {
        throw ValidationError("monotonicity_probe: fewer than 2 distinct samples");
    }
    r.estimate = mu;
    r.verdict = r.witnesses.empty() ? Verdict::satisfied : Verdict::violated;
    if (r.verdict == Verdict::satisfied) {
        r.notes.emplace_back("no violating pair found; the estimate is a sampled upper bound on the modulus");
    }
    return r;
}

/// Strongly monotone proxy phi with solution x~ of VI(K, phi) and a bound
/// ||phi(x) - F(x)|| <= d ||x - x~|| with d < mu. Such a certificate makes
/// x~ a Minty solution of VI(K, F).
class MintyCertificate {
public:
    MintyCertificate(Mapping proxy, Vector proxy_solution, double mu, double d)
        : proxy_(std::move(proxy)), proxy_solution_(std::move(proxy_solution)), mu_(mu), d_(d) {
        require_dim(proxy_solution_.size(), proxy_.dim(), "certificate proxy_solution");
        if (!all_finite(proxy_solution_)) {
            throw ValidationError("certificate: proxy_solution must be finite");
        }
        if (!(mu_ > 0.0) || !std::isfinite(mu_)) {
            throw ValidationError("certificate: mu must be positive");
        }
        if (!(d_ >= 0.0)) {
            throw ValidationError("certificate: d must be nonnegative");
        }
        if (!(d_ < mu_)) {
            throw ValidationError("certificate: d must be strictly less than mu");
        }
    }

    const Mapping& proxy() const { return proxy_; }
    const Vector& proxy_solution() const { return proxy_solution_; }
    double mu() const { return mu_; }
    double d() const { return d_; }

private:
    Mapping proxy_;
    Vector proxy_solution_;
    double mu_;
    double d_;
};

namespace detail {

inline std::optional<Box> sampling_region(const FeasibleSet& set, const std::optional<Box>& box) {
    if (set.is_bounded()) {
        return std::nullopt;
    }
    if (!box) {
        throw ValidationError("sampling an unbounded feasible set requires a bounding box");
    }
    return box;
}

} // namespace detail

/// <F(x), x - x~> >= (mu - d) ||x - x~||^2 on sampled x in K; the
/// consequence every valid certificate implies.
inline DiagnosticReport minty_consequence_check(const VIProblem& problem, const MintyCertificate& cert,
                                                std::size_t samples, std::uint64_t seed,
                                                const std::optional<Box>& bounding_box = std::nullopt) {
    const auto region = detail::sampling_region(problem.set(), bounding_box);
    const Vector& xt = cert.proxy_solution();
    DiagnosticReport r;
    r.check_name = "minty_consequence_check";
    r.seed = seed;
    r.verdict = Verdict::satisfied;
    Rng rng(seed);
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < samples; ++s) {
        const Vector x = problem.set().sample(rng, region);
        const Vector dx = x - xt;
        const double lhs = eval_mapping(problem.mapping(), x).dot(dx);
        const double margin = lhs - (cert.mu() - cert.d()) * dx.squaredNorm();
        worst = std::min(worst, margin);
        ++r.samples_used;
        if (margin < -kCertificateTol && r.verdict == Verdict::satisfied) {
            r.verdict = Verdict::violated;
            r.witnesses.push_back(Witness{x, std::nullopt, margin, std::nullopt,
                                          "<F(x), x - x~> < (mu - d) ||x - x~||^2"});
        }
    }
    r.estimate = worst;
    return r;
}

/// Verifies the three premises of a certificate on samples of K:
///   (i)   phi strongly monotone with modulus mu,
///   (ii)  x~ solves VI(K, phi),
///   (iii) ||phi(x) - F(x)|| <= d ||x - x~||  (checked as equality at x = x~).
/// When all pass, the consequence <F(x), x - x~> >= (mu - d)||x - x~||^2 is
/// also checked on the same samples.
inline DiagnosticReport minty_certificate_check(const VIProblem& problem, const MintyCertificate& cert,
                                                std::size_t samples, std::uint64_t seed,
                                                const std::optional<Box>& bounding_box = std::nullopt) {
    require_dim(cert.proxy().dim(), problem.dim(), "certificate proxy");
    const FeasibleSet& set = problem.set();
    const Vector& xt = cert.proxy_solution();
    if (!set.contains(xt)) {
        throw ValidationError("certificate: proxy_solution is not in the feasible set");
    }
    const auto region = detail::sampling_region(set, bounding_box);
    const Mapping& f = problem.mapping();
    const Mapping& phi = cert.proxy();

    DiagnosticReport r;
    r.check_name = "minty_certificate_check";
    r.seed = seed;
    Rng rng(seed);

    auto fail = [&r](Witness w) {
        if (r.witnesses.empty()) {
            r.witnesses.push_back(std::move(w));
        }
    };

    // (i)
    bool strong_ok = true;
    for (std::size_t s = 0; s < samples; ++s) {
        const Vector x = set.sample(rng, region);
        const Vector y = set.sample(rng, region);
        if ((x - y).squaredNorm() == 0.0) {
            continue;
        }
        ++r.samples_used;
        const double q = monotonicity_quotient(phi, x, y);
        if (q < cert.mu() - kCertificateTol) {
            if (strong_ok) {
                fail(Witness{x, y, q, std::nullopt, "proxy strong monotonicity: quotient below mu"});
            }
            strong_ok = false;
        }
    }

    // (ii)
    bool proxy_solution_ok = true;
    const Vector phi_xt = eval_mapping(phi, xt);
    for (std::size_t s = 0; s < samples; ++s) {
        const Vector x = set.sample(rng, region);
        ++r.samples_used;
        const double ip = phi_xt.dot(x - xt);
        if (ip < -kCertificateTol) {
            if (proxy_solution_ok) {
                fail(Witness{x, std::nullopt, ip, std::nullopt, "proxy solution: <phi(x~), x - x~> < 0"});
            }
            proxy_solution_ok = false;
        }
    }

    // (iii)
    bool deviation_ok = true;
    const double at_ref = (phi_xt - eval_mapping(f, xt)).norm();
    if (at_ref > kCertificateTol) {
        fail(Witness{xt, std::nullopt, at_ref, std::nullopt, "deviation bound: phi(x~) != F(x~)"});
        deviation_ok = false;
    }
    double worst_ratio = 0.0;
    for (std::size_t s = 0; s < samples; ++s) {
        const Vector x = set.sample(rng, region);
        ++r.samples_used;
        const double dist = (x - xt).norm();
        const double dev = (eval_mapping(phi, x) - eval_mapping(f, x)).norm();
        if (dist > 0.0) {
            worst_ratio = std::max(worst_ratio, dev / dist);
        }
        if (dev > cert.d() * dist + kCertificateTol) {
            if (deviation_ok) {
                fail(Witness{x, std::nullopt, dist > 0.0 ? dev / dist : dev, std::nullopt,
                             "deviation bound: ||phi(x) - F(x)|| > d ||x - x~||"});
            }
            deviation_ok = false;
        }
    }

    auto verdict_note = [](const char* name, bool ok) {
        return std::string(name) + ": " + (ok ? "satisfied" : "violated");
    };
    r.notes.push_back(verdict_note("proxy_strong_monotonicity", strong_ok));
    r.notes.push_back(verdict_note("proxy_solution", proxy_solution_ok));
    r.notes.push_back(verdict_note("deviation_bound", deviation_ok));
    r.estimate = worst_ratio;

    if (strong_ok && proxy_solution_ok && deviation_ok) {
        const auto consequence = minty_consequence_check(problem, cert, samples, rng.next(), bounding_box);
        r.samples_used += consequence.samples_used;
        r.notes.push_back(verdict_note("consequence", consequence.verdict == Verdict::satisfied));
        if (consequence.verdict == Verdict::satisfied) {
            r.verdict = Verdict::satisfied;
        } else {
            r.verdict = Verdict::violated;
            r.witnesses = consequence.witnesses;
        }
    } else {
        r.verdict = Verdict::violated;
    }
    return r;
}

/// Minimum ||F(x)|| over sampled points of each origin-centred sphere.
/// Nondecreasing minima ending above twice the first are consistent with
/// coercivity; anything else is inconclusive. Never a proof.
inline DiagnosticReport coercivity_probe(const Mapping& f, std::uint64_t seed, const std::vector<double>& radii,
                                         std::size_t samples_per_radius = kDefaultSphereSamples) {
    if (radii.size() < 3) {
        throw ValidationError("coercivity_probe: at least 3 radii required");
    }
    for (std::size_t i = 0; i < radii.size(); ++i) {
        if (!(radii[i] > 0.0) || !std::isfinite(radii[i]) || (i > 0 && !(radii[i] > radii[i - 1]))) {
            throw ValidationError("coercivity_probe: radii must be positive and strictly increasing");
        }
    }
    if (samples_per_radius == 0) {
        throw ValidationError("coercivity_probe: samples_per_radius must be positive");
    }
    DiagnosticReport r;
    r.check_name = "coercivity_probe";
    r.seed = seed;
    Rng rng(seed);
    std::vector<Vector> argmins;
    for (double radius : radii) {
        double best = std::numeric_limits<double>::infinity();
        Vector where;
        for (std::size_t s = 0; s < samples_per_radius; ++s) {
            const Vector x = radius * rng.direction(f.dim());
            const double n = eval_mapping(f, x).norm();
            ++r.samples_used;
            if (n < best) {
                best = n;
                where = x;
            }
        }
        r.profile.push_back(best);
        argmins.push_back(where);
    }
    bool nondecreasing = true;
    for (std::size_t i = 1; i < r.profile.size(); ++i) {
        if (r.profile[i] < r.profile[i - 1]) {
            nondecreasing = false;
            if (r.witnesses.empty()) {
                r.witnesses.push_back(Witness{argmins[i], std::nullopt, r.profile[i], std::nullopt,
                                              "minimum of ||F|| decreased at radius " + std::to_string(radii[i])});
            }
        }
    }
    const bool grows = r.profile.back() > 2.0 * r.profile.front();
    r.verdict = nondecreasing && grows ? Verdict::satisfied : Verdict::inconclusive;
    r.estimate = r.profile.back();
    r.notes.emplace_back("sampled heuristic; cannot establish bounded level sets");
    return r;
}

} // namespace nmvi
