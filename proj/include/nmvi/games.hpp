#pragma once

// Smooth N-player games as variational inequalities: F stacks each player's
// partial gradient of its own cost, K is the product of the action sets.

#include "nmvi/problem.hpp"
#include "nmvi/residual.hpp"

#include <functional>
#include <memory>
#include <variant>
#include <vector>

namespace nmvi {

/// J_i(x) = 1/2 x_i^T Q x_i + x_i^T C x_{-i} + c^T x_i, where x_{-i} stacks
/// the other players' variables in player order.
struct QuadraticCost {
    Matrix q;
    Matrix coupling;
    Vector linear;
};

/// Any evaluable cost over the full joint vector; gradients by central differences.
struct BlackboxCost {
    std::function<double(const Vector&)> cost;
};

struct PlayerSpec {
    Index dim = 0;
    FeasibleSet action_set;
    std::variant<QuadraticCost, BlackboxCost> cost;
};

struct GameSpec {
    std::vector<PlayerSpec> players;

    Index total_dim() const {
        Index d = 0;
        for (const auto& p : players) {
            d += p.dim;
        }
        return d;
    }

    Index offset_of(std::size_t player) const {
        Index o = 0;
        for (std::size_t i = 0; i < player; ++i) {
            o += players[i].dim;
        }
        return o;
    }
};

inline void validate_game(const GameSpec& g) {
    if (g.players.size() < 2) {
        throw ValidationError("game: at least 2 players required");
    }
    const Index total = g.total_dim();
    for (std::size_t i = 0; i < g.players.size(); ++i) {
        const auto& p = g.players[i];
        const std::string who = "game player " + std::to_string(i);
        if (p.dim < 1) {
            throw ValidationError(who + ": dimension must be at least 1");
        }
        if (p.action_set.dim() != p.dim) {
            throw DimensionError(who + ": action set dimension does not match player dimension");
        }
        if (const auto* qc = std::get_if<QuadraticCost>(&p.cost)) {
            if (qc->q.rows() != p.dim || qc->q.cols() != p.dim) {
                throw DimensionError(who + ": Q must be " + std::to_string(p.dim) + "x" + std::to_string(p.dim));
            }
            if (qc->coupling.rows() != p.dim || qc->coupling.cols() != total - p.dim) {
                throw DimensionError(who + ": coupling matrix must be " + std::to_string(p.dim) + "x" +
                                     std::to_string(total - p.dim));
            }
            if (qc->linear.size() != p.dim) {
                throw DimensionError(who + ": linear term must have dimension " + std::to_string(p.dim));
            }
            if (!all_finite(qc->q) || !all_finite(qc->coupling) || !all_finite(qc->linear)) {
                throw ValidationError(who + ": quadratic cost entries must be finite");
            }
            if ((qc->q - qc->q.transpose()).cwiseAbs().maxCoeff() > 0.0) {
                throw ValidationError(who + ": Q must be symmetric");
            }
        } else if (!std::get<BlackboxCost>(p.cost).cost) {
            throw ValidationError(who + ": blackbox cost is empty");
        }
    }
}

namespace detail {

/// The other players' variables of `x`, stacked in player order.
inline Vector others_of(const GameSpec& g, std::size_t player, const Vector& x) {
    const Index off = g.offset_of(player);
    const Index d = g.players[player].dim;
    Vector out(x.size() - d);
    out << x.head(off), x.tail(x.size() - off - d);
    return out;
}

class GameModel final : public MappingModel {
public:
    explicit GameModel(std::shared_ptr<const GameSpec> game) : game_(std::move(game)) {
        analytic_ = true;
        for (const auto& p : game_->players) {
            analytic_ = analytic_ && std::holds_alternative<QuadraticCost>(p.cost);
        }
    }

    Index dim() const override { return game_->total_dim(); }
    MappingKind kind() const override { return MappingKind::game; }

    Vector eval(const Vector& x) const override {
        Vector out(x.size());
        Index off = 0;
        for (std::size_t i = 0; i < game_->players.size(); ++i) {
            const auto& p = game_->players[i];
            if (const auto* qc = std::get_if<QuadraticCost>(&p.cost)) {
                out.segment(off, p.dim) = qc->q * x.segment(off, p.dim) + qc->coupling * others_of(*game_, i, x) +
                                          qc->linear;
            } else {
                const auto& cost = std::get<BlackboxCost>(p.cost).cost;
                Vector xp = x;
                Vector xm = x;
                for (Index c = off; c < off + p.dim; ++c) {
                    const double h = fd_step(x[c]);
                    xp[c] = x[c] + h;
                    xm[c] = x[c] - h;
                    out[c] = (cost(xp) - cost(xm)) / (2.0 * h);
                    xp[c] = x[c];
                    xm[c] = x[c];
                }
            }
            off += p.dim;
        }
        return out;
    }

    bool has_jacobian() const override { return analytic_; }

    Matrix jacobian(const Vector&) const override {
        const Index n = dim();
        Matrix j = Matrix::Zero(n, n);
        Index off = 0;
        for (const auto& p : game_->players) {
            const auto& qc = std::get<QuadraticCost>(p.cost);
            j.block(off, off, p.dim, p.dim) = qc.q;
            // Columns of the coupling matrix run over the other players in order.
            j.block(off, 0, p.dim, off) = qc.coupling.leftCols(off);
            j.block(off, off + p.dim, p.dim, n - off - p.dim) = qc.coupling.rightCols(n - off - p.dim);
            off += p.dim;
        }
        return j;
    }

    std::optional<AffineForm> affine_form() const override {
        if (!analytic_) {
            return std::nullopt;
        }
        Vector b(dim());
        Index off = 0;
        for (const auto& p : game_->players) {
            b.segment(off, p.dim) = std::get<QuadraticCost>(p.cost).linear;
            off += p.dim;
        }
        return AffineForm{jacobian(Vector::Zero(dim())), b};
    }

    std::string describe() const override { return "game"; }

private:
    std::shared_ptr<const GameSpec> game_;
    bool analytic_ = true;
};

} // namespace detail

/// Cost J_i at the joint point x.
inline double player_cost(const GameSpec& g, std::size_t player, const Vector& x) {
    require_dim(x.size(), g.total_dim(), "player_cost");
    const auto& p = g.players.at(player);
    if (const auto* qc = std::get_if<QuadraticCost>(&p.cost)) {
        const Vector own = x.segment(g.offset_of(player), p.dim);
        return 0.5 * own.dot(qc->q * own) + own.dot(qc->coupling * detail::others_of(g, player, x)) +
               qc->linear.dot(own);
    }
    return std::get<BlackboxCost>(p.cost).cost(x);
}

inline Mapping game_mapping(const GameSpec& g) {
    validate_game(g);
    return Mapping(std::make_shared<detail::GameModel>(std::make_shared<const GameSpec>(g)));
}

inline FeasibleSet game_action_set(const GameSpec& g) {
    std::vector<FeasibleSet> factors;
    for (const auto& p : g.players) {
        factors.push_back(p.action_set);
    }
    return FeasibleSet::product(std::move(factors));
}

inline VIProblem game_to_vi(const GameSpec& g) {
    return VIProblem(game_mapping(g), game_action_set(g));
}

/// First-order (quasi-Nash) equilibrium test through the game's natural residual.
inline ResidualReport check_quasi_nash(const GameSpec& g, const Vector& x, double tol) {
    require_dim(x.size(), g.total_dim(), "check_quasi_nash");
    return is_solution(game_to_vi(g), x, tol);
}

/// Two scalar players with J_1 = x_1^2 + c x_1 x_2 and J_2 = x_2^2 + c x_1 x_2;
/// F(x) = (2 x_1 + c x_2, 2 x_2 + c x_1).
inline GameSpec coupling_game(double c, FeasibleSet action_set = FeasibleSet::whole_space(1)) {
    GameSpec g;
    for (int i = 0; i < 2; ++i) {
        g.players.push_back(PlayerSpec{1, action_set, QuadraticCost{Matrix{{2.0}}, Matrix{{c}}, Vector::Zero(1)}});
    }
    return g;
}

} // namespace nmvi
