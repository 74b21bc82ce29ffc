#include "nmvi/linalg.hpp"
#include "nmvi/mapping.hpp"
#include "nmvi/problem.hpp"

#include <Eigen/SVD>
#include <gtest/gtest.h>

#include <numbers>

using namespace nmvi;

namespace {

// max over unit vectors of ||A u|| for 2x2 A by a dense sweep of angles
// refined by golden section around the best angle.
double spectral_norm_by_angles(const Matrix& a) {
    auto g = [&a](double t) { return (a * Vector{{std::cos(t), std::sin(t)}}).norm(); };
    const int n = 200000;
    double best_t = 0.0;
    double best = -1.0;
    for (int i = 0; i < n; ++i) {
        const double t = std::numbers::pi * i / n;
        if (g(t) > best) {
            best = g(t);
            best_t = t;
        }
    }
    double lo = best_t - std::numbers::pi / n;
    double hi = best_t + std::numbers::pi / n;
    const double r = (std::sqrt(5.0) - 1.0) / 2.0;
    for (int it = 0; it < 100; ++it) {
        const double c = hi - r * (hi - lo);
        const double d = lo + r * (hi - lo);
        (g(c) > g(d) ? hi : lo) = (g(c) > g(d) ? d : c);
    }
    return std::max(best, g(0.5 * (lo + hi)));
}

} // namespace

TEST(EvalMapping, AffineExample) {
    const auto f = Mapping::affine(Matrix{{2.0, 0.0}, {0.0, 2.0}}, Vector{{-1.0, -1.0}});
    EXPECT_EQ(eval_mapping(f, Vector{{1.0, 1.0}}), (Vector{{1.0, 1.0}}));
}

TEST(EvalMapping, PendulumExamples) {
    const auto f = Mapping::builtin("pendulum1d");
    EXPECT_EQ(eval_mapping(f, Vector{{0.0}})[0], 0.0);
    EXPECT_NEAR(eval_mapping(f, Vector{{std::numbers::pi}})[0], std::numbers::pi, 1e-15);
    const double x = 2.3;
    EXPECT_DOUBLE_EQ(eval_mapping(f, Vector{{x}})[0], x + 0.5 * x * std::sin(x));
}

TEST(EvalMapping, PendulumAmplitudeParameter) {
    const auto f = Mapping::builtin("pendulum1d", 1, {{"amplitude", 0.25}});
    EXPECT_DOUBLE_EQ(eval_mapping(f, Vector{{1.0}})[0], 1.0 + 0.25 * std::sin(1.0));
}

TEST(EvalMapping, BuiltinsBehaveAsNamed) {
    EXPECT_EQ(eval_mapping(Mapping::builtin("rotation2d"), Vector{{1.0, 2.0}}), (Vector{{2.0, -1.0}}));
    EXPECT_EQ(eval_mapping(Mapping::builtin("identity", 3), Vector{{1.0, 2.0, 3.0}}), (Vector{{1.0, 2.0, 3.0}}));
    EXPECT_EQ(eval_mapping(Mapping::builtin("negation", 2), Vector{{1.0, -2.0}}), (Vector{{-1.0, 2.0}}));
    EXPECT_DOUBLE_EQ(eval_mapping(Mapping::builtin("sine1d"), Vector{{0.7}})[0], std::sin(0.7));
}

TEST(EvalMapping, Errors) {
    const auto f = Mapping::builtin("rotation2d");
    EXPECT_THROW(eval_mapping(f, Vector::Zero(3)), DimensionError);
    EXPECT_THROW(eval_mapping(f, Vector{{std::nan(""), 0.0}}), NonFiniteError);
    EXPECT_THROW(Mapping::builtin("no-such-map"), ValidationError);
    EXPECT_THROW(Mapping::builtin("pendulum1d", 1, {{"bogus", 1.0}}), ValidationError);
    EXPECT_THROW(Mapping::affine(Matrix::Identity(2, 3), Vector::Zero(2)), DimensionError);
    const auto big = Mapping::affine(Matrix{{1e308}}, Vector{{0.0}});
    EXPECT_THROW(eval_mapping(big, Vector{{10.0}}), NonFiniteError);
}

TEST(Jacobian, AffineIsA) {
    const Matrix a{{3.0, 1.0}, {1.0, 3.0}};
    const auto f = Mapping::affine(a, Vector::Zero(2));
    for (auto mode : {JacobianMode::analytic, JacobianMode::finite_difference}) {
        EXPECT_EQ(eval_jacobian(f, Vector{{0.3, -7.0}}, mode).entries, a);
    }
}

TEST(Jacobian, Rotation) {
    const auto j = eval_jacobian(Mapping::builtin("rotation2d"), Vector{{5.0, 1.0}});
    EXPECT_EQ(j.entries, (Matrix{{0.0, 1.0}, {-1.0, 0.0}}));
    EXPECT_EQ(j.origin, JacobianMode::analytic);
}

TEST(Jacobian, PendulumAtZeroBothModes) {
    const auto f = Mapping::builtin("pendulum1d");
    EXPECT_NEAR(eval_jacobian(f, Vector{{0.0}}, JacobianMode::analytic).entries(0, 0), 1.0, 1e-6);
    EXPECT_NEAR(eval_jacobian(f, Vector{{0.0}}, JacobianMode::finite_difference).entries(0, 0), 1.0, 1e-6);
}

TEST(Jacobian, FiniteDifferenceAgreesWithAnalytic) {
    Rng rng(5);
    const std::vector<Mapping> maps{Mapping::builtin("pendulum1d"), Mapping::builtin("sine1d"),
                                    Mapping::builtin("rotation2d"),
                                    Mapping::composite({{0.5, Mapping::builtin("pendulum1d")},
                                                        {2.0, Mapping::builtin("sine1d")}})};
    for (const auto& f : maps) {
        for (int i = 0; i < 500; ++i) {
            const Vector x = rng.uniform_vector(Vector::Constant(f.dim(), -10.0), Vector::Constant(f.dim(), 10.0));
            const Matrix ja = eval_jacobian(f, x, JacobianMode::analytic).entries;
            const Matrix jf = eval_jacobian(f, x, JacobianMode::finite_difference).entries;
            EXPECT_LE((ja - jf).cwiseAbs().maxCoeff(), 1e-5) << f.describe() << " at " << x.transpose();
        }
    }
}

TEST(Jacobian, PendulumClosedForm) {
    const auto f = Mapping::builtin("pendulum1d");
    for (double x : {-9.0, -2.0, 0.5, 4.0, 8.5}) {
        EXPECT_NEAR(eval_jacobian(f, Vector{{x}}).entries(0, 0), 1.0 + 0.5 * std::sin(x) + 0.5 * x * std::cos(x),
                    1e-14);
    }
}

TEST(Composite, IsLinearInTerms) {
    const auto g = Mapping::builtin("rotation2d");
    const auto h = Mapping::affine(Matrix{{1.0, 2.0}, {3.0, 4.0}}, Vector{{0.5, -0.5}});
    const auto f = Mapping::composite({{2.0, g}, {-0.5, h}});
    Rng rng(9);
    for (int i = 0; i < 200; ++i) {
        const Vector x = rng.uniform_vector(Vector::Constant(2, -5.0), Vector::Constant(2, 5.0));
        const Vector expect = 2.0 * eval_mapping(g, x) - 0.5 * eval_mapping(h, x);
        EXPECT_LE((eval_mapping(f, x) - expect).cwiseAbs().maxCoeff(), 1e-14);
    }
    ASSERT_TRUE(f.affine_form().has_value());
    EXPECT_EQ(f.kind(), MappingKind::composite);
}

TEST(Composite, RejectsMixedDimensions) {
    EXPECT_THROW(Mapping::composite({{1.0, Mapping::builtin("rotation2d")}, {1.0, Mapping::builtin("sine1d")}}),
                 DimensionError);
    EXPECT_THROW(Mapping::composite({}), ValidationError);
}

TEST(Lipschitz, AffineExamples) {
    const auto two = lipschitz_estimate(Mapping::affine(2.0 * Matrix::Identity(2, 2), Vector::Zero(2)),
                                        FeasibleSet::whole_space(2), 100, 0);
    EXPECT_NEAR(two.value, 2.0, 1e-12);
    EXPECT_TRUE(two.exact);
    const auto rot = lipschitz_estimate(Mapping::affine(Matrix{{0.0, 1.0}, {-1.0, 0.0}}, Vector::Zero(2)),
                                        FeasibleSet::whole_space(2), 100, 0);
    EXPECT_NEAR(rot.value, 1.0, 1e-12);
}

TEST(Lipschitz, AffineMatchesAngleSweep) {
    Rng rng(13);
    for (int i = 0; i < 50; ++i) {
        Matrix a(2, 2);
        for (Index r = 0; r < 2; ++r) {
            for (Index c = 0; c < 2; ++c) {
                a(r, c) = rng.uniform(-3.0, 3.0);
            }
        }
        const auto est = lipschitz_estimate(Mapping::affine(a, Vector::Zero(2)), FeasibleSet::whole_space(2), 10, 0);
        EXPECT_NEAR(est.value, spectral_norm_by_angles(a), 1e-8) << a;
    }
}

TEST(Lipschitz, SpectralNormMatchesSvdInHigherDimensions) {
    Rng rng(17);
    for (Index n = 3; n <= 6; ++n) {
        for (int i = 0; i < 20; ++i) {
            Matrix a(n, n);
            for (Index r = 0; r < n; ++r) {
                for (Index c = 0; c < n; ++c) {
                    a(r, c) = rng.normal();
                }
            }
            const double svd = Eigen::JacobiSVD<Matrix>(a).singularValues()[0];
            EXPECT_NEAR(linalg::spectral_norm(a), svd, 1e-8 * svd);
        }
    }
}

TEST(Lipschitz, PendulumSampledBoundExceedsFive) {
    const auto est = lipschitz_estimate(Mapping::builtin("pendulum1d"),
                                        FeasibleSet::box(Vector{{-10.0}}, Vector{{10.0}}), 10000, 3);
    EXPECT_GE(est.value, 5.0);
    EXPECT_FALSE(est.exact);
}

TEST(Lipschitz, DeterministicAndNeedsRegion) {
    const auto f = Mapping::builtin("sine1d");
    const auto k = FeasibleSet::whole_space(1);
    EXPECT_THROW(lipschitz_estimate(f, k, 100, 0), ValidationError);
    const Box b = Box::uniform(1, -10.0, 10.0);
    EXPECT_EQ(lipschitz_estimate(f, k, 500, 4, b).value, lipschitz_estimate(f, k, 500, 4, b).value);
}

TEST(VIProblem, DimensionsMustAgree) {
    EXPECT_THROW(VIProblem(Mapping::builtin("rotation2d"), FeasibleSet::whole_space(3)), DimensionError);
    EXPECT_EQ(VIProblem(Mapping::builtin("sine1d"), FeasibleSet::whole_space(1)).dim(), 1);
}
