#pragma once

// Closed convex sets with exact Euclidean projection.

#include "nmvi/core.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace nmvi {

/// Axis-aligned box lower <= x <= upper. Also used as a sampling region for
/// unbounded sets.
struct Box {
    Vector lower;
    Vector upper;

    Index dim() const { return lower.size(); }

    static Box uniform(Index dim, double lo, double hi) {
        return Box{Vector::Constant(dim, lo), Vector::Constant(dim, hi)};
    }
};

inline void validate_box(const Box& b) {
    require_dim(b.upper.size(), b.lower.size(), "box upper bound");
    if (b.lower.size() == 0) {
        throw ValidationError("box: dimension must be positive");
    }
    if (!all_finite(b.lower) || !all_finite(b.upper)) {
        throw ValidationError("box: bounds must be finite");
    }
    for (Index i = 0; i < b.lower.size(); ++i) {
        if (b.lower[i] > b.upper[i]) {
            throw ValidationError("box: lower bound exceeds upper bound at coordinate " +
                                  std::to_string(i));
        }
    }
}

class FeasibleSet {
public:
    struct WholeSpace {
        Index dim;
    };
    struct BoxShape {
        Box box;
    };
    struct Ball {
        Vector center;
        double radius;
    };
    /// {x : <normal, x> <= offset}
    struct Halfspace {
        Vector normal;
        double offset;
    };
    /// {x >= 0 : sum(x) = scale}
    struct Simplex {
        Index dim;
        double scale;
    };
    struct Orthant {
        Index dim;
    };
    struct Product {
        std::vector<FeasibleSet> factors;
    };

    using Shape = std::variant<WholeSpace, BoxShape, Ball, Halfspace, Simplex, Orthant, Product>;

    static FeasibleSet whole_space(Index dim) {
        require_positive_dim(dim, "whole-space");
        return FeasibleSet(WholeSpace{dim}, dim);
    }

    static FeasibleSet box(Vector lower, Vector upper) {
        Box b{std::move(lower), std::move(upper)};
        validate_box(b);
        const Index d = b.dim();
        return FeasibleSet(BoxShape{std::move(b)}, d);
    }

    static FeasibleSet box(const Box& b) { return box(b.lower, b.upper); }

    static FeasibleSet ball(Vector center, double radius) {
        require_positive_dim(center.size(), "ball");
        if (!all_finite(center)) {
            throw ValidationError("ball: center must be finite");
        }
        if (!(radius > 0.0) || !std::isfinite(radius)) {
            throw ValidationError("ball: radius must be positive and finite");
        }
        const Index d = center.size();
        return FeasibleSet(Ball{std::move(center), radius}, d);
    }

    static FeasibleSet halfspace(Vector normal, double offset) {
        require_positive_dim(normal.size(), "halfspace");
        if (!all_finite(normal) || !std::isfinite(offset)) {
            throw ValidationError("halfspace: normal and offset must be finite");
        }
        if (normal.squaredNorm() == 0.0) {
            throw ValidationError("halfspace: normal must be nonzero");
        }
        const Index d = normal.size();
        return FeasibleSet(Halfspace{std::move(normal), offset}, d);
    }

    static FeasibleSet simplex(Index dim, double scale = 1.0) {
        require_positive_dim(dim, "simplex");
        if (!(scale > 0.0) || !std::isfinite(scale)) {
            throw ValidationError("simplex: scale must be positive and finite");
        }
        return FeasibleSet(Simplex{dim, scale}, dim);
    }

    static FeasibleSet nonnegative_orthant(Index dim) {
        require_positive_dim(dim, "nonnegative-orthant");
        return FeasibleSet(Orthant{dim}, dim);
    }

    static FeasibleSet product(std::vector<FeasibleSet> factors) {
        if (factors.empty()) {
            throw ValidationError("product: at least one factor required");
        }
        Index d = 0;
        for (const auto& f : factors) {
            d += f.dim();
        }
        return FeasibleSet(Product{std::move(factors)}, d);
    }

    Index dim() const { return dim_; }
    const Shape& shape() const { return shape_; }

    std::string kind() const {
        return std::visit(
            [](const auto& s) -> std::string {
                using T = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<T, WholeSpace>) return "whole-space";
                else if constexpr (std::is_same_v<T, BoxShape>) return "box";
                else if constexpr (std::is_same_v<T, Ball>) return "ball";
                else if constexpr (std::is_same_v<T, Halfspace>) return "halfspace";
                else if constexpr (std::is_same_v<T, Simplex>) return "simplex";
                else if constexpr (std::is_same_v<T, Orthant>) return "nonnegative-orthant";
                else return "product";
            },
            shape_);
    }

    bool is_bounded() const {
        return std::visit(
            [](const auto& s) -> bool {
                using T = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<T, BoxShape> || std::is_same_v<T, Ball> ||
                              std::is_same_v<T, Simplex>) {
                    return true;
                } else if constexpr (std::is_same_v<T, Product>) {
                    return std::all_of(s.factors.begin(), s.factors.end(),
                                       [](const FeasibleSet& f) { return f.is_bounded(); });
                } else {
                    return false;
                }
            },
            shape_);
    }

    /// Smallest axis-aligned box containing the set, when it is bounded.
    std::optional<Box> bounding_box() const {
        if (!is_bounded()) {
            return std::nullopt;
        }
        return std::visit(
            [this](const auto& s) -> std::optional<Box> {
                using T = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<T, BoxShape>) {
                    return s.box;
                } else if constexpr (std::is_same_v<T, Ball>) {
                    return Box{s.center.array() - s.radius, s.center.array() + s.radius};
                } else if constexpr (std::is_same_v<T, Simplex>) {
                    return Box::uniform(s.dim, 0.0, s.scale);
                } else if constexpr (std::is_same_v<T, Product>) {
                    Box out{Vector(dim_), Vector(dim_)};
                    Index offset = 0;
                    for (const auto& f : s.factors) {
                        const Box fb = *f.bounding_box();
                        out.lower.segment(offset, f.dim()) = fb.lower;
                        out.upper.segment(offset, f.dim()) = fb.upper;
                        offset += f.dim();
                    }
                    return out;
                } else {
                    return std::nullopt;
                }
            },
            shape_);
    }

    /// Euclidean projection. Points already in the set come back unchanged.
    Vector project(const Vector& z) const {
        require_dim(z.size(), dim_, "project");
        return std::visit([&z](const auto& s) { return project_onto(s, z); }, shape_);
    }

    /// True iff every defining constraint is violated by at most tol.
    bool contains(const Vector& x, double tol = kMembershipTol) const {
        require_dim(x.size(), dim_, "contains");
        return std::visit([&](const auto& s) { return contained_in(s, x, tol); }, shape_);
    }

    /// Draws one point of the set. Bounded shapes are sampled directly;
    /// unbounded ones draw uniformly in `region` and project the draw.
    Vector sample(Rng& rng, const std::optional<Box>& region = std::nullopt) const {
        if (region) {
            require_dim(region->dim(), dim_, "sampling box");
        }
        return std::visit([&](const auto& s) { return sample_from(s, rng, region); }, shape_);
    }

private:
    FeasibleSet(Shape shape, Index dim) : shape_(std::move(shape)), dim_(dim) {}

    static void require_positive_dim(Index dim, const char* what) {
        if (dim <= 0) {
            throw ValidationError(std::string(what) + ": dimension must be positive");
        }
    }

    static Vector project_onto(const WholeSpace&, const Vector& z) { return z; }

    static Vector project_onto(const BoxShape& s, const Vector& z) {
        return z.cwiseMax(s.box.lower).cwiseMin(s.box.upper);
    }

    static Vector project_onto(const Ball& s, const Vector& z) {
        const Vector diff = z - s.center;
        const double n = diff.norm();
        if (n <= s.radius) {
            return z;
        }
        return s.center + (s.radius / n) * diff;
    }

    static Vector project_onto(const Halfspace& s, const Vector& z) {
        const double excess = s.normal.dot(z) - s.offset;
        if (excess <= 0.0) {
            return z;
        }
        return z - (excess / s.normal.squaredNorm()) * s.normal;
    }

    // Sort-then-threshold: find the largest rho with u_rho > (sum_{i<=rho} u_i - s)/rho
    // over the descending sort u of z; the common shift is that quotient.
    static Vector project_onto(const Simplex& s, const Vector& z) {
        if ((z.array() >= 0.0).all() && std::abs(z.sum() - s.scale) <= kMembershipTol) {
            return z;
        }
        std::vector<double> u(z.data(), z.data() + z.size());
        std::sort(u.begin(), u.end(), std::greater<>());
        double prefix = 0.0;
        double shift = 0.0;
        for (std::size_t j = 0; j < u.size(); ++j) {
            prefix += u[j];
            const double candidate = (prefix - s.scale) / static_cast<double>(j + 1);
            if (u[j] - candidate > 0.0) {
                shift = candidate;
            }
        }
        return (z.array() - shift).cwiseMax(0.0).matrix();
    }

    static Vector project_onto(const Orthant&, const Vector& z) { return z.cwiseMax(0.0); }

    static Vector project_onto(const Product& s, const Vector& z) {
        Vector out(z.size());
        Index offset = 0;
        for (const auto& f : s.factors) {
            out.segment(offset, f.dim()) = f.project(z.segment(offset, f.dim()));
            offset += f.dim();
        }
        return out;
    }

    static bool contained_in(const WholeSpace&, const Vector&, double) { return true; }

    static bool contained_in(const BoxShape& s, const Vector& x, double tol) {
        return ((x - s.box.lower).array() >= -tol).all() &&
               ((s.box.upper - x).array() >= -tol).all();
    }

    static bool contained_in(const Ball& s, const Vector& x, double tol) {
        return (x - s.center).norm() <= s.radius + tol;
    }

    static bool contained_in(const Halfspace& s, const Vector& x, double tol) {
        return (s.normal.dot(x) - s.offset) / s.normal.norm() <= tol;
    }

    static bool contained_in(const Simplex& s, const Vector& x, double tol) {
        return (x.array() >= -tol).all() && std::abs(x.sum() - s.scale) <= tol;
    }

    static bool contained_in(const Orthant&, const Vector& x, double tol) {
        return (x.array() >= -tol).all();
    }

    static bool contained_in(const Product& s, const Vector& x, double tol) {
        Index offset = 0;
        for (const auto& f : s.factors) {
            if (!f.contains(x.segment(offset, f.dim()), tol)) {
                return false;
            }
            offset += f.dim();
        }
        return true;
    }

    template <class S>
    static Vector sample_unbounded(const S& s, Rng& rng, const std::optional<Box>& region) {
        if (!region) {
            throw ValidationError("sampling an unbounded set requires a bounding box");
        }
        return project_onto(s, rng.uniform_vector(region->lower, region->upper));
    }

    static Vector sample_from(const WholeSpace& s, Rng& rng, const std::optional<Box>& region) {
        return sample_unbounded(s, rng, region);
    }

    static Vector sample_from(const BoxShape& s, Rng& rng, const std::optional<Box>&) {
        return rng.uniform_vector(s.box.lower, s.box.upper);
    }

    static Vector sample_from(const Ball& s, Rng& rng, const std::optional<Box>&) {
        const Index d = s.center.size();
        const double r = s.radius * std::pow(rng.uniform(), 1.0 / static_cast<double>(d));
        return project_onto(s, s.center + r * rng.direction(d));
    }

    static Vector sample_from(const Halfspace& s, Rng& rng, const std::optional<Box>& region) {
        return sample_unbounded(s, rng, region);
    }

    // Normalized exponential spacings are uniform on the simplex.
    static Vector sample_from(const Simplex& s, Rng& rng, const std::optional<Box>&) {
        Vector e(s.dim);
        for (Index i = 0; i < s.dim; ++i) {
            double u = rng.uniform();
            while (u <= 0.0) {
                u = rng.uniform();
            }
            e[i] = -std::log(u);
        }
        Vector x = (s.scale / e.sum()) * e;
        // Fold the rounding residue of the sum into the largest entry.
        Index imax = 0;
        x.maxCoeff(&imax);
        x[imax] += s.scale - x.sum();
        return x;
    }

    static Vector sample_from(const Orthant& s, Rng& rng, const std::optional<Box>& region) {
        return sample_unbounded(s, rng, region);
    }

    static Vector sample_from(const Product& s, Rng& rng, const std::optional<Box>& region) {
        Index total = 0;
        for (const auto& f : s.factors) {
            total += f.dim();
        }
        Vector out(total);
        Index offset = 0;
        for (const auto& f : s.factors) {
            std::optional<Box> sub;
            if (region) {
                sub = Box{region->lower.segment(offset, f.dim()), region->upper.segment(offset, f.dim())};
            }
            out.segment(offset, f.dim()) = f.sample(rng, sub);
            offset += f.dim();
        }
        return out;
    }

    Shape shape_;
    Index dim_;
};

/// One deterministic point of K for a given seed.
inline Vector sample_point(const FeasibleSet& set, std::uint64_t seed,
                           const std::optional<Box>& bounding_box = std::nullopt) {
    Rng rng(seed);
    return set.sample(rng, bounding_box);
}

} // namespace nmvi
