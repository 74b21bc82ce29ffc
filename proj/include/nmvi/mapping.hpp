#pragma once

// Mappings F: R^m -> R^m, their Jacobians and Lipschitz estimates.

#include "nmvi/core.hpp"
#include "nmvi/feasible_set.hpp"
#include "nmvi/linalg.hpp"

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace nmvi {

enum class MappingKind { affine, builtin, game, composite };

inline const char* to_string(MappingKind k) {
    switch (k) {
    case MappingKind::affine: return "affine";
    case MappingKind::builtin: return "builtin";
    case MappingKind::game: return "game";
    case MappingKind::composite: return "composite";
    }
    return "unknown";
}

/// A, b with F(x) = A x + b.
struct AffineForm {
    Matrix a;
    Vector b;
};

/// Implementation interface behind Mapping. Models must be immutable and
/// their member functions free of side effects.
class MappingModel {
public:
    virtual ~MappingModel() = default;
    virtual Index dim() const = 0;
    virtual MappingKind kind() const = 0;
    virtual Vector eval(const Vector& x) const = 0;
    virtual bool has_jacobian() const = 0;
    virtual Matrix jacobian(const Vector& x) const = 0;
    virtual std::optional<AffineForm> affine_form() const { return std::nullopt; }
    virtual std::string describe() const = 0;
};

/// Central-difference step for coordinate value v.
inline double fd_step(double v) {
    return 1e-6 * std::max(1.0, std::abs(v));
}

/// Central-difference Jacobian of an evaluator.
template <class Eval>
Matrix fd_jacobian(const Eval& eval, const Vector& x, Index out_dim) {
    Matrix j(out_dim, x.size());
    Vector xp = x;
    Vector xm = x;
    for (Index c = 0; c < x.size(); ++c) {
        const double h = fd_step(x[c]);
        xp[c] = x[c] + h;
        xm[c] = x[c] - h;
        j.col(c) = (eval(xp) - eval(xm)) / (2.0 * h);
        xp[c] = x[c];
        xm[c] = x[c];
    }
    if (!all_finite(j)) {
        throw NonFiniteError("finite-difference Jacobian: non-finite difference quotient");
    }
    return j;
}

namespace detail {

class AffineModel final : public MappingModel {
public:
    AffineModel(Matrix a, Vector b) : a_(std::move(a)), b_(std::move(b)) {}
    Index dim() const override { return b_.size(); }
    MappingKind kind() const override { return MappingKind::affine; }
    Vector eval(const Vector& x) const override { return a_ * x + b_; }
    bool has_jacobian() const override { return true; }
    Matrix jacobian(const Vector&) const override { return a_; }
    std::optional<AffineForm> affine_form() const override { return AffineForm{a_, b_}; }
    std::string describe() const override { return "affine"; }

private:
    Matrix a_;
    Vector b_;
};

class CompositeModel final : public MappingModel {
public:
    using Term = std::pair<double, std::shared_ptr<const MappingModel>>;

    explicit CompositeModel(std::vector<Term> terms) : terms_(std::move(terms)) {}
    Index dim() const override { return terms_.front().second->dim(); }
    MappingKind kind() const override { return MappingKind::composite; }

    Vector eval(const Vector& x) const override {
        Vector out = Vector::Zero(dim());
        for (const auto& [w, m] : terms_) {
            out += w * m->eval(x);
        }
        return out;
    }

    bool has_jacobian() const override {
        for (const auto& t : terms_) {
            if (!t.second->has_jacobian()) {
                return false;
            }
        }
        return true;
    }

    Matrix jacobian(const Vector& x) const override {
        Matrix out = Matrix::Zero(dim(), dim());
        for (const auto& [w, m] : terms_) {
            out += w * m->jacobian(x);
        }
        return out;
    }

    std::optional<AffineForm> affine_form() const override {
        AffineForm out{Matrix::Zero(dim(), dim()), Vector::Zero(dim())};
        for (const auto& [w, m] : terms_) {
            auto f = m->affine_form();
            if (!f) {
                return std::nullopt;
            }
            out.a += w * f->a;
            out.b += w * f->b;
        }
        return out;
    }

    std::string describe() const override { return "composite"; }

private:
    std::vector<Term> terms_;
};

} // namespace detail

/// Parameters of a builtin mapping.
using BuiltinParams = std::map<std::string, double>;

/// Closed forms of the builtin catalog:
///   identity(m)    F(x) = x
///   negation(m)    F(x) = -x
///   rotation2d     F(x, y) = (y, -x)
///   pendulum1d     F(x) = x + a x sin(x), a = "amplitude" (default 0.5)
///   sine1d         F(x) = sin(x)
inline const std::vector<std::string>& builtin_names() {
    static const std::vector<std::string> names{"identity", "negation", "rotation2d", "pendulum1d",
                                                "sine1d"};
    return names;
}

namespace detail {

class BuiltinModel final : public MappingModel {
public:
    BuiltinModel(std::string name, Index dim, BuiltinParams params)
        : name_(std::move(name)), dim_(dim), params_(std::move(params)) {
        if (name_ == "identity" || name_ == "negation") {
            if (dim_ <= 0) {
                throw ValidationError("builtin " + name_ + ": dimension must be positive");
            }
            id_ = name_ == "identity" ? Id::identity : Id::negation;
        } else if (name_ == "rotation2d") {
            fixed_dim(2);
            id_ = Id::rotation2d;
        } else if (name_ == "pendulum1d") {
            fixed_dim(1);
            id_ = Id::pendulum1d;
            amplitude_ = param("amplitude", 0.5);
            if (!std::isfinite(amplitude_)) {
                throw ValidationError("builtin pendulum1d: amplitude must be finite");
            }
        } else if (name_ == "sine1d") {
            fixed_dim(1);
            id_ = Id::sine1d;
        } else {
            throw ValidationError("unknown builtin mapping '" + name_ + "'");
        }
        for (const auto& [k, v] : params_) {
            if (!(id_ == Id::pendulum1d && k == "amplitude")) {
                throw ValidationError("builtin " + name_ + ": unknown parameter '" + k + "'");
            }
            (void)v;
        }
    }

    Index dim() const override { return dim_; }
    MappingKind kind() const override { return MappingKind::builtin; }

    Vector eval(const Vector& x) const override {
        switch (id_) {
        case Id::identity: return x;
        case Id::negation: return -x;
        case Id::rotation2d: return Vector{{x[1], -x[0]}};
        case Id::pendulum1d: return Vector{{x[0] + amplitude_ * x[0] * std::sin(x[0])}};
        case Id::sine1d: return Vector{{std::sin(x[0])}};
        }
        return x;
    }

    bool has_jacobian() const override { return true; }

    Matrix jacobian(const Vector& x) const override {
        switch (id_) {
        case Id::identity: return Matrix::Identity(dim_, dim_);
        case Id::negation: return -Matrix::Identity(dim_, dim_);
        case Id::rotation2d: return Matrix{{0.0, 1.0}, {-1.0, 0.0}};
        case Id::pendulum1d: {
            const double v = x[0];
            return Matrix{{1.0 + amplitude_ * std::sin(v) + amplitude_ * v * std::cos(v)}};
        }
        case Id::sine1d: return Matrix{{std::cos(x[0])}};
        }
        return Matrix();
    }

    std::optional<AffineForm> affine_form() const override {
        switch (id_) {
        case Id::identity:
        case Id::negation:
        case Id::rotation2d: return AffineForm{jacobian(Vector::Zero(dim_)), Vector::Zero(dim_)};
        default: return std::nullopt;
        }
    }

    std::string describe() const override { return name_; }

private:
    enum class Id { identity, negation, rotation2d, pendulum1d, sine1d };

    void fixed_dim(Index d) {
        if (dim_ != 0 && dim_ != d) {
            throw ValidationError("builtin " + name_ + " has fixed dimension " + std::to_string(d));
        }
        dim_ = d;
    }

    double param(const std::string& key, double fallback) const {
        auto it = params_.find(key);
        return it == params_.end() ? fallback : it->second;
    }

    std::string name_;
    Index dim_;
    BuiltinParams params_;
    Id id_ = Id::identity;
    double amplitude_ = 0.5;
};

} // namespace detail

/// Handle to an evaluable mapping F: R^m -> R^m. Cheap to copy; copies
/// share the immutable model.
class Mapping {
public:
    explicit Mapping(std::shared_ptr<const MappingModel> model) : model_(std::move(model)) {
        if (!model_) {
            throw ValidationError("mapping: null model");
        }
    }

    static Mapping affine(Matrix a, Vector b) {
        if (a.rows() != a.cols()) {
            throw DimensionError("affine mapping: A must be square");
        }
        require_dim(b.size(), a.rows(), "affine mapping offset");
        if (b.size() == 0) {
            throw ValidationError("affine mapping: dimension must be positive");
        }
        if (!all_finite(a) || !all_finite(b)) {
            throw ValidationError("affine mapping: entries must be finite");
        }
        return Mapping(std::make_shared<detail::AffineModel>(std::move(a), std::move(b)));
    }

    /// `dim` may be 0 for builtins with a fixed dimension.
    static Mapping builtin(const std::string& name, Index dim = 0, BuiltinParams params = {}) {
        return Mapping(std::make_shared<detail::BuiltinModel>(name, dim, std::move(params)));
    }

    static Mapping composite(const std::vector<std::pair<double, Mapping>>& terms) {
        if (terms.empty()) {
            throw ValidationError("composite mapping: at least one term required");
        }
        std::vector<detail::CompositeModel::Term> ts;
        for (const auto& [w, m] : terms) {
            if (!std::isfinite(w)) {
                throw ValidationError("composite mapping: weights must be finite");
            }
            require_dim(m.dim(), terms.front().second.dim(), "composite mapping term");
            ts.emplace_back(w, m.model_);
        }
        return Mapping(std::make_shared<detail::CompositeModel>(std::move(ts)));
    }

    Index dim() const { return model_->dim(); }
    MappingKind kind() const { return model_->kind(); }
    bool has_analytic_jacobian() const { return model_->has_jacobian(); }
    std::optional<AffineForm> affine_form() const { return model_->affine_form(); }
    std::string describe() const { return model_->describe(); }

    /// Unchecked evaluation; prefer eval_mapping.
    Vector raw_eval(const Vector& x) const { return model_->eval(x); }

    const MappingModel& model() const { return *model_; }

private:
    std::shared_ptr<const MappingModel> model_;
};

/// F(x) with dimension and finiteness checks on input and output.
inline Vector eval_mapping(const Mapping& f, const Vector& x) {
    require_dim(x.size(), f.dim(), "eval_mapping");
    require_finite(x, "eval_mapping input");
    Vector out = f.raw_eval(x);
    if (!all_finite(out)) {
        throw NonFiniteError("eval_mapping: mapping '" + f.describe() + "' returned a non-finite value");
    }
    return out;
}

enum class JacobianMode { analytic, finite_difference };

struct Jacobian {
    Matrix entries;
    JacobianMode origin = JacobianMode::analytic;
};

inline Jacobian eval_jacobian(const Mapping& f, const Vector& x, JacobianMode mode) {
    require_dim(x.size(), f.dim(), "eval_jacobian");
    require_finite(x, "eval_jacobian input");
    if (mode == JacobianMode::analytic) {
        if (!f.has_analytic_jacobian()) {
            throw ValidationError("eval_jacobian: no analytic Jacobian for mapping '" + f.describe() + "'");
        }
        Matrix j = f.model().jacobian(x);
        if (!all_finite(j)) {
            throw NonFiniteError("eval_jacobian: non-finite analytic Jacobian");
        }
        return {std::move(j), JacobianMode::analytic};
    }
    if (auto af = f.affine_form()) {
        return {std::move(af->a), JacobianMode::finite_difference};
    }
    Matrix j = fd_jacobian([&f](const Vector& p) { return f.raw_eval(p); }, x, f.dim());
    return {std::move(j), JacobianMode::finite_difference};
}

/// Analytic when available, finite differences otherwise.
inline Jacobian eval_jacobian(const Mapping& f, const Vector& x) {
    return eval_jacobian(f, x, f.has_analytic_jacobian() ? JacobianMode::analytic
                                                         : JacobianMode::finite_difference);
}

inline constexpr double kLipschitzSafetyFactor = 1.5;

struct LipschitzEstimate {
    double value = 0.0;
    /// True when the value is the exact constant (affine mappings).
    bool exact = false;
    std::size_t pairs_used = 0;
};

/// Affine mappings: spectral norm of A. Otherwise the sampled sup of
/// ||F(x) - F(y)|| / ||x - y|| inflated by kLipschitzSafetyFactor.
inline LipschitzEstimate lipschitz_estimate(const Mapping& f, const FeasibleSet& region,
                                            std::size_t samples, std::uint64_t seed,
                                            const std::optional<Box>& bounding_box = std::nullopt) {
    require_dim(region.dim(), f.dim(), "lipschitz_estimate region");
    if (auto af = f.affine_form()) {
        return {linalg::spectral_norm(af->a), true, 0};
    }
    const std::optional<Box> box = region.is_bounded() ? std::nullopt : bounding_box;
    if (!region.is_bounded() && !box) {
        throw ValidationError("lipschitz_estimate: unbounded region needs a sampling box");
    }
    Rng rng(seed);
    double best = 0.0;
    std::size_t distinct = 0;
    for (std::size_t s = 0; s < samples; ++s) {
        const Vector x = region.sample(rng, box);
        const Vector y = region.sample(rng, box);
        const double dx = (x - y).norm();
        if (dx == 0.0) {
            continue;
        }
        ++distinct;
        best = std::max(best, (eval_mapping(f, x) - eval_mapping(f, y)).norm() / dx);
    }
    if (distinct == 0) {
        throw ValidationError("lipschitz_estimate: fewer than 2 distinct samples");
    }
    return {kLipschitzSafetyFactor * best, false, distinct};
}

} // namespace nmvi
