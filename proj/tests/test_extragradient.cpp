#include "nmvi/extragradient.hpp"
#include "nmvi/oracle.hpp"

#include <gtest/gtest.h>

using namespace nmvi;

namespace {

// Plain projected gradient x+ = P[x - alpha F(x)]; a baseline that is known
// to fail on merely monotone maps such as a rotation.
std::size_t projected_gradient_iterations(const VIProblem& p, Vector x, double alpha, double tol,
                                          std::size_t budget) {
    for (std::size_t k = 0; k < budget; ++k) {
        if (natural_residual(p, x) <= tol) {
            return k;
        }
        x = p.set().project(x - alpha * eval_mapping(p.mapping(), x));
        if (!all_finite(x)) {
            return budget;
        }
    }
    return budget;
}

} // namespace

TEST(Step, Examples) {
    const VIProblem id(Mapping::builtin("identity", 1), FeasibleSet::whole_space(1));
    auto s = step(id, Vector{{1.0}}, 0.5);
    EXPECT_EQ(s.y[0], 0.5);
    EXPECT_EQ(s.x_next[0], 0.75);
    s = step(id, Vector{{0.0}}, 0.5);
    EXPECT_EQ(s.y[0], 0.0);
    EXPECT_EQ(s.x_next[0], 0.0);

    const VIProblem pushed(Mapping::affine(Matrix{{1.0}}, Vector{{-2.0}}),
                           FeasibleSet::box(Vector{{0.0}}, Vector{{1.0}}));
    s = step(pushed, Vector{{0.5}}, 0.5);
    EXPECT_EQ(s.y[0], 1.0);
    EXPECT_EQ(s.x_next[0], 1.0);

    EXPECT_THROW(step(id, Vector{{1.0}}, 0.0), ValidationError);
}

TEST(Solve, StronglyMonotoneAffine) {
    const VIProblem p(Mapping::affine(2.0 * Matrix::Identity(2, 2), Vector{{-2.0, -2.0}}), FeasibleSet::whole_space(2));
    SolverConfig cfg;
    cfg.alpha = 0.45;
    cfg.x0 = Vector{{10.0, -10.0}};
    cfg.residual_tol = 1e-10;
    const auto r = solve(p, cfg);
    EXPECT_EQ(r.status, SolverStatus::converged);
    EXPECT_LE((r.final_point - Vector{{1.0, 1.0}}).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_EQ(r.alpha_used, 0.45);
    ASSERT_TRUE(r.lipschitz_used.has_value());
    EXPECT_NEAR(*r.lipschitz_used, 2.0, 1e-12);
}

TEST(Solve, PendulumOnLineWithFejerMonitoring) {
    const VIProblem p(Mapping::builtin("pendulum1d"), FeasibleSet::whole_space(1));
    SolverConfig cfg;
    cfg.x0 = Vector{{5.0}};
    cfg.lipschitz_box = Box::uniform(1, -10.0, 10.0);
    cfg.fejer_reference = Vector::Zero(1);
    cfg.record_trace = true;
    const auto r = solve(p, cfg);
    EXPECT_EQ(r.status, SolverStatus::converged);
    EXPECT_LE(std::abs(r.final_point[0]), 1e-6);
    ASSERT_FALSE(r.trace.empty());
    for (const auto& rec : r.trace) {
        ASSERT_TRUE(rec.fejer_slack.has_value());
        EXPECT_GE(*rec.fejer_slack, -1e-10) << "k=" << rec.k;
    }
    EXPECT_EQ(r.fejer_violations, 0u);
    EXPECT_FALSE(r.lipschitz_exact);
    EXPECT_NEAR(r.alpha_used, 0.9 / *r.lipschitz_used, 1e-15);
}

TEST(Solve, RotationConvergesWhereProjectedGradientFails) {
    const VIProblem p(Mapping::builtin("rotation2d"), FeasibleSet::whole_space(2));
    SolverConfig cfg;
    cfg.alpha = 0.5;
    cfg.x0 = Vector{{1.0, 0.0}};
    cfg.residual_tol = 1e-6;
    cfg.max_iters = 10000;
    const auto r = solve(p, cfg);
    EXPECT_EQ(r.status, SolverStatus::converged);
    EXPECT_LE(r.final_point.norm(), 1e-6);
    EXPECT_EQ(projected_gradient_iterations(p, cfg.x0, 0.5, 1e-6, cfg.max_iters), cfg.max_iters);
}

TEST(Solve, GapVanishesWhenConverged) {
    for (const auto& e : catalog()) {
        SolverConfig cfg;
        cfg.x0 = e.default_start;
        cfg.lipschitz = e.lipschitz;
        cfg.lipschitz_box = e.sampling_box;
        const auto r = solve(e.problem, cfg);
        if (r.status == SolverStatus::converged) {
            EXPECT_LE(r.min_gap, 1e-6) << e.name;
        }
    }
}

TEST(Solve, StartIsProjectedAndTraceRecordsEveryIteration) {
    const VIProblem p(Mapping::builtin("identity", 1), FeasibleSet::box(Vector{{-1.0}}, Vector{{1.0}}));
    SolverConfig cfg;
    cfg.x0 = Vector{{7.0}};
    cfg.record_trace = true;
    const auto r = solve(p, cfg);
    ASSERT_FALSE(r.trace.empty());
    EXPECT_EQ(r.trace.front().x[0], 1.0);
    EXPECT_EQ(r.trace.size(), r.iterations_used);
    for (std::size_t i = 0; i < r.trace.size(); ++i) {
        EXPECT_EQ(r.trace[i].k, i);
    }
    cfg.record_trace = false;
    EXPECT_TRUE(solve(p, cfg).trace.empty());
}

TEST(Solve, MaxItersReached) {
    const VIProblem p(Mapping::builtin("rotation2d"), FeasibleSet::whole_space(2));
    SolverConfig cfg;
    cfg.alpha = 0.5;
    cfg.x0 = Vector{{1.0, 0.0}};
    cfg.max_iters = 5;
    const auto r = solve(p, cfg);
    EXPECT_EQ(r.status, SolverStatus::max_iters_reached);
    EXPECT_EQ(r.iterations_used, 5u);
}

TEST(Solve, DivergesOnNonFiniteIterates) {
    // alpha far beyond 1/L makes the iterates explode.
    const VIProblem p(Mapping::affine(Matrix{{1.0}}, Vector::Zero(1)), FeasibleSet::whole_space(1));
    SolverConfig cfg;
    cfg.alpha = 1e3;
    cfg.x0 = Vector{{1.0}};
    const auto r = solve(p, cfg);
    EXPECT_EQ(r.status, SolverStatus::diverged);
    EXPECT_FALSE(r.warnings.empty());
}

TEST(Solve, ConfigValidation) {
    const VIProblem p(Mapping::builtin("sine1d"), FeasibleSet::whole_space(1));
    SolverConfig cfg;
    cfg.x0 = Vector{{1.0}};
    EXPECT_THROW(solve(p, cfg), ValidationError); // auto alpha with nothing to estimate L from
    cfg.alpha = 0.0;
    EXPECT_THROW(solve(p, cfg), ValidationError);
    cfg.alpha = 0.5;
    cfg.x0 = Vector::Zero(2);
    EXPECT_THROW(solve(p, cfg), DimensionError);
    cfg.x0 = Vector{{1.0}};
    cfg.alpha_safety = 1.0;
    cfg.alpha.reset();
    cfg.lipschitz = 1.0;
    EXPECT_THROW(solve(p, cfg), ValidationError);
}

TEST(Solve, DeterministicAcrossRuns) {
    const auto e = catalog_entry("pendulum1d");
    SolverConfig cfg;
    cfg.x0 = Vector{{-8.0}};
    cfg.record_trace = true;
    cfg.seed = 99;
    const auto a = solve(e.problem, cfg);
    const auto b = solve(e.problem, cfg);
    ASSERT_EQ(a.trace.size(), b.trace.size());
    for (std::size_t i = 0; i < a.trace.size(); ++i) {
        EXPECT_EQ(a.trace[i].x, b.trace[i].x);
    }
    EXPECT_EQ(a.alpha_used, b.alpha_used);
}

TEST(Solve, ConstantMappingConverges) {
    const VIProblem p(Mapping::affine(Matrix::Zero(1, 1), Vector{{1.0}}), FeasibleSet::box(Vector{{0.0}}, Vector{{1.0}}));
    SolverConfig cfg;
    cfg.x0 = Vector{{1.0}};
    const auto r = solve(p, cfg);
    EXPECT_EQ(r.status, SolverStatus::converged);
    EXPECT_EQ(r.final_point[0], 0.0);
    EXPECT_EQ(*r.lipschitz_used, 0.0);
}
