#pragma once

// Brute-force grid oracles for SOL and MSOL on small compact instances, and
// the builtin catalog of test problems with known structure.

#include "nmvi/diagnostics.hpp"
#include "nmvi/games.hpp"
#include "nmvi/problem.hpp"

#include <algorithm>
#include <cstdio>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace nmvi {

inline constexpr std::size_t kGridGuard = 1000000;
inline constexpr Index kOracleMaxDim = 3;

/// Candidates are the points_per_axis^dim nodes of `bounds` that lie in K.
/// Each defining inequality is tested against every point of the lattice
/// obtained by splitting each grid cell into `refinement` parts (again
/// restricted to K); the nodes are a subset of that lattice.
struct GridSpec {
    Box bounds;
    std::size_t points_per_axis = 101;
    double tol = 1e-6;
    std::size_t refinement = 2;
};

struct GridOracleResult {
    std::vector<Vector> sol;
    std::vector<Vector> msol;
    std::size_t candidates = 0;
    std::size_t test_points = 0;
};

namespace detail {

struct Lattice {
    std::vector<Vector> points;
    std::vector<bool> is_node;
};

inline Lattice build_lattice(const FeasibleSet& set, const GridSpec& grid) {
    const Index dim = set.dim();
    require_dim(grid.bounds.dim(), dim, "grid bounds");
    validate_box(grid.bounds);
    if (dim > kOracleMaxDim) {
        throw ValidationError("grid oracle: dimension " + std::to_string(dim) + " exceeds the cap of 3");
    }
    if (grid.points_per_axis < 2) {
        throw ValidationError("grid oracle: points_per_axis must be at least 2");
    }
    if (grid.refinement < 1) {
        throw ValidationError("grid oracle: refinement must be at least 1");
    }
    if (!(grid.tol >= 0.0)) {
        throw ValidationError("grid oracle: tol must be nonnegative");
    }
    double total = 1.0;
    for (Index i = 0; i < dim; ++i) {
        total *= static_cast<double>(grid.points_per_axis);
    }
    if (total > static_cast<double>(kGridGuard)) {
        throw ValidationError("grid oracle: grid size exceeds the 10^6 point guard");
    }
    const std::size_t cells = (grid.points_per_axis - 1) * grid.refinement;
    const std::size_t per_axis = cells + 1;

    auto coord = [&](Index axis, std::size_t j) {
        const double lo = grid.bounds.lower[axis];
        const double hi = grid.bounds.upper[axis];
        if (j == cells) {
            return hi;
        }
        return lo + (hi - lo) * static_cast<double>(j) / static_cast<double>(cells);
    };

    Lattice lat;
    std::vector<std::size_t> idx(static_cast<std::size_t>(dim), 0);
    Vector x(dim);
    for (;;) {
        bool node = true;
        for (Index a = 0; a < dim; ++a) {
            x[a] = coord(a, idx[static_cast<std::size_t>(a)]);
            node = node && idx[static_cast<std::size_t>(a)] % grid.refinement == 0;
        }
        if (set.contains(x)) {
            lat.points.push_back(x);
            lat.is_node.push_back(node);
        }
        // Last axis varies fastest.
        Index a = dim - 1;
        while (a >= 0 && ++idx[static_cast<std::size_t>(a)] == per_axis) {
            idx[static_cast<std::size_t>(a)] = 0;
            --a;
        }
        if (a < 0) {
            break;
        }
    }
    return lat;
}

} // namespace detail

/// Both grid sets from one pass; see grid_sol and grid_msol.
inline GridOracleResult grid_oracle(const VIProblem& problem, const GridSpec& grid) {
    const auto lat = detail::build_lattice(problem.set(), grid);
    std::vector<Vector> values;
    values.reserve(lat.points.size());
    for (const auto& p : lat.points) {
        values.push_back(eval_mapping(problem.mapping(), p));
    }
    GridOracleResult out;
    out.test_points = lat.points.size();
    for (std::size_t c = 0; c < lat.points.size(); ++c) {
        if (!lat.is_node[c]) {
            continue;
        }
        ++out.candidates;
        const Vector& a = lat.points[c];
        const Vector& fa = values[c];
        bool strong = true;
        bool minty = true;
        for (std::size_t t = 0; t < lat.points.size() && (strong || minty); ++t) {
            const auto diff = lat.points[t] - a;
            strong = strong && fa.dot(diff) >= -grid.tol;
            minty = minty && values[t].dot(diff) >= -grid.tol;
        }
        if (strong) {
            out.sol.push_back(a);
        }
        if (minty) {
            out.msol.push_back(a);
        }
    }
    return out;
}

/// Nodes x* in K with <F(x*), x - x*> >= -tol for every lattice point x in K.
inline std::vector<Vector> grid_sol(const VIProblem& problem, const GridSpec& grid) {
    return grid_oracle(problem, grid).sol;
}

/// Nodes x* in K with <F(x), x - x*> >= -tol for every lattice point x in K.
inline std::vector<Vector> grid_msol(const VIProblem& problem, const GridSpec& grid) {
    return grid_oracle(problem, grid).msol;
}

/// True iff every point of `inner` appears (exactly) in `outer`.
inline bool point_set_includes(const std::vector<Vector>& outer, const std::vector<Vector>& inner) {
    return std::all_of(inner.begin(), inner.end(), [&outer](const Vector& p) {
        return std::any_of(outer.begin(), outer.end(), [&p](const Vector& q) { return q == p; });
    });
}

struct CatalogEntry {
    std::string name;
    std::string description;
    VIProblem problem;
    std::optional<Vector> known_solution;
    std::optional<Vector> known_minty_solution;
    std::optional<MintyCertificate> certificate;
    std::set<std::string> tags;
    /// Exact Lipschitz constant of F on K, when known.
    std::optional<double> lipschitz;
    /// Sampling region for unbounded K.
    std::optional<Box> sampling_box;
    Vector default_start;

    bool has_tag(const std::string& t) const { return tags.count(t) > 0; }

    /// Iterations stay in K when K is bounded; otherwise in the sampling box.
    std::optional<Box> sampling_region() const {
        return problem.set().is_bounded() ? problem.set().bounding_box() : sampling_box;
    }
};

/// sup |F'| of a scalar mapping over [lo, hi]: dense scan of the analytic
/// derivative refined by golden-section search around the best node.
inline double sup_abs_derivative_1d(const Mapping& f, double lo, double hi, std::size_t nodes = 200001) {
    auto g = [&f](double v) { return std::abs(eval_jacobian(f, Vector{{v}}, JacobianMode::analytic).entries(0, 0)); };
    const double h = (hi - lo) / static_cast<double>(nodes - 1);
    std::size_t best = 0;
    double best_val = -1.0;
    for (std::size_t i = 0; i < nodes; ++i) {
        const double v = g(lo + h * static_cast<double>(i));
        if (v > best_val) {
            best_val = v;
            best = i;
        }
    }
    double a = std::max(lo, lo + h * (static_cast<double>(best) - 1.0));
    double b = std::min(hi, lo + h * (static_cast<double>(best) + 1.0));
    const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
    for (int it = 0; it < 200 && b - a > 1e-15 * std::max(1.0, std::abs(a)); ++it) {
        const double c = b - ratio * (b - a);
        const double d = a + ratio * (b - a);
        if (g(c) > g(d)) {
            b = d;
        } else {
            a = c;
        }
    }
    return std::max({best_val, g(0.5 * (a + b)), g(lo), g(hi)});
}

inline std::vector<CatalogEntry> catalog() {
    std::vector<CatalogEntry> entries;
    const Vector zero1 = Vector::Zero(1);
    const Vector zero2 = Vector::Zero(2);
    const Box plane_box = Box::uniform(2, -10.0, 10.0);

    {
        const auto f = Mapping::builtin("identity", 1);
        entries.push_back(CatalogEntry{"identity-box",
                                       "F(x) = x on [-1, 1]",
                                       VIProblem(f, FeasibleSet::box(Vector{{-1.0}}, Vector{{1.0}})),
                                       zero1,
                                       zero1,
                                       MintyCertificate(f, zero1, 1.0, 0.0),
                                       {"monotone", "strongly-monotone", "coercive"},
                                       1.0,
                                       std::nullopt,
                                       Vector{{0.7}}});
    }
    {
        const auto f = Mapping::affine(2.0 * Matrix::Identity(2, 2), Vector{{-2.0, -2.0}});
        entries.push_back(CatalogEntry{"affine-strong",
                                       "F(x) = 2x - (2, 2) on R^2",
                                       VIProblem(f, FeasibleSet::whole_space(2)),
                                       Vector{{1.0, 1.0}},
                                       Vector{{1.0, 1.0}},
                                       MintyCertificate(f, Vector{{1.0, 1.0}}, 2.0, 0.0),
                                       {"monotone", "strongly-monotone", "coercive"},
                                       2.0,
                                       plane_box,
                                       Vector{{10.0, -10.0}}});
    }
    {
        const auto f = Mapping::builtin("rotation2d");
        entries.push_back(CatalogEntry{"rotation2d",
                                       "F(x, y) = (y, -x) on R^2",
                                       VIProblem(f, FeasibleSet::whole_space(2)),
                                       zero2,
                                       zero2,
                                       std::nullopt,
                                       {"monotone", "orthogonal-jacobian", "coercive"},
                                       1.0,
                                       plane_box,
                                       Vector{{1.0, 0.0}}});
        entries.push_back(CatalogEntry{"rotation2d-ball",
                                       "F(x, y) = (y, -x) on the unit disk",
                                       VIProblem(f, FeasibleSet::ball(zero2, 1.0)),
                                       zero2,
                                       zero2,
                                       std::nullopt,
                                       {"monotone", "orthogonal-jacobian", "coercive"},
                                       1.0,
                                       std::nullopt,
                                       Vector{{0.6, -0.3}}});
    }
    {
        const auto f = Mapping::builtin("pendulum1d");
        entries.push_back(CatalogEntry{"pendulum1d",
                                       "F(x) = x + 0.5 x sin(x) on [-10, 10]; non-monotone with a Minty solution",
                                       VIProblem(f, FeasibleSet::box(Vector{{-10.0}}, Vector{{10.0}})),
                                       zero1,
                                       zero1,
                                       MintyCertificate(Mapping::builtin("identity", 1), zero1, 1.0, 0.5),
                                       {"non-monotone", "coercive"},
                                       sup_abs_derivative_1d(f, -10.0, 10.0),
                                       std::nullopt,
                                       Vector{{5.0}}});
    }
    {
        const auto f = Mapping::builtin("negation", 1);
        entries.push_back(CatalogEntry{"negation-box",
                                       "F(x) = -x on [-1, 1]; solutions exist but no Minty solution",
                                       VIProblem(f, FeasibleSet::box(Vector{{-1.0}}, Vector{{1.0}})),
                                       Vector{{1.0}},
                                       std::nullopt,
                                       std::nullopt,
                                       {"non-monotone", "coercive"},
                                       1.0,
                                       std::nullopt,
                                       Vector{{0.5}}});
    }
    for (double c : {0.5, 1.9}) {
        const auto game = coupling_game(c, FeasibleSet::box(Vector{{-1.0}}, Vector{{1.0}}));
        const auto problem = game_to_vi(game);
        char name[32];
        std::snprintf(name, sizeof name, "coupling-game-%.1f", c);
        entries.push_back(CatalogEntry{name,
                                       "two-player quadratic game J_i = x_i^2 + c x_1 x_2 on [-1, 1]^2",
                                       problem,
                                       zero2,
                                       zero2,
                                       MintyCertificate(problem.mapping(), zero2, 2.0 - c, 0.0),
                                       {"monotone", "strongly-monotone", "coercive"},
                                       2.0 + c,
                                       std::nullopt,
                                       Vector{{0.8, -0.4}}});
    }
    {
        const auto f = Mapping::builtin("sine1d");
        entries.push_back(CatalogEntry{"sine1d",
                                       "F(x) = sin(x) on R; not coercive",
                                       VIProblem(f, FeasibleSet::whole_space(1)),
                                       zero1,
                                       std::nullopt,
                                       std::nullopt,
                                       {"non-monotone"},
                                       1.0,
                                       Box::uniform(1, -10.0, 10.0),
                                       Vector{{1.0}}});
    }
    return entries;
}

inline CatalogEntry catalog_entry(const std::string& name) {
    for (auto& e : catalog()) {
        if (e.name == name) {
            return e;
        }
    }
    throw ValidationError("unknown catalog entry '" + name + "'");
}

} // namespace nmvi
