#include "nmvi/diagnostics.hpp"

#include <gtest/gtest.h>

using namespace nmvi;

namespace {

Mapping constant_jacobian(const Matrix& a) {
    return Mapping::affine(a, Vector::Zero(a.rows()));
}

const std::vector<Vector> one_point2{Vector{{0.3, -0.4}}};

double pendulum_derivative(double x) {
    return 1.0 + 0.5 * std::sin(x) + 0.5 * x * std::cos(x);
}

// First positive root of the pendulum derivative, by bisection on [2, 3]
// where it changes sign.
double pendulum_derivative_root() {
    double lo = 2.0;
    double hi = 3.0;
    EXPECT_GT(pendulum_derivative(lo), 0.0);
    EXPECT_LT(pendulum_derivative(hi), 0.0);
    for (int i = 0; i < 200 && hi - lo > 0.0; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) {
            break;
        }
        (pendulum_derivative(mid) > 0.0 ? lo : hi) = mid;
    }
    return std::abs(pendulum_derivative(lo)) < std::abs(pendulum_derivative(hi)) ? lo : hi;
}

const FeasibleSet pendulum_box = FeasibleSet::box(Vector{{-10.0}}, Vector{{10.0}});

} // namespace

TEST(WeakCoupling, DominantJacobianSatisfied) {
    const auto r = weak_coupling_check(constant_jacobian(Matrix{{3.0, -1.0}, {1.0, 2.0}}), one_point2);
    EXPECT_EQ(r.verdict, Verdict::satisfied);
    EXPECT_EQ(*r.estimate, 1.0);
}

TEST(WeakCoupling, FailingRowIsInconclusiveDespiteNonzeroDeterminant) {
    const Matrix a{{1.0, 2.0}, {0.0, 1.0}};
    const auto r = weak_coupling_check(constant_jacobian(a), one_point2);
    EXPECT_EQ(r.verdict, Verdict::inconclusive);
    ASSERT_EQ(r.witnesses.size(), 1u);
    EXPECT_EQ(*r.witnesses[0].row, 0);
    EXPECT_EQ(r.witnesses[0].value, -1.0);
    EXPECT_EQ(a.determinant(), 1.0);
    EXPECT_EQ(gram_pd_check(constant_jacobian(a), one_point2).verdict, Verdict::satisfied);
}

TEST(GramPd, RotationGramIsIdentity) {
    const auto r = gram_pd_check(Mapping::builtin("rotation2d"), one_point2);
    EXPECT_EQ(r.verdict, Verdict::satisfied);
    EXPECT_EQ(*r.estimate, 1.0);
}

TEST(GramPd, RankOneViolatedWithWitness) {
    const auto r = gram_pd_check(constant_jacobian(Matrix{{1.0, 1.0}, {1.0, 1.0}}), one_point2);
    EXPECT_EQ(r.verdict, Verdict::violated);
    ASSERT_EQ(r.witnesses.size(), 1u);
    EXPECT_EQ(r.witnesses[0].point, one_point2[0]);
}

TEST(GramPd, PendulumAtDerivativeRootViolated) {
    const double root = pendulum_derivative_root();
    EXPECT_LT(std::abs(pendulum_derivative(root)), 1e-12);
    const std::vector<Vector> pts{Vector{{1.0}}, Vector{{root}}};
    const auto r = gram_pd_check(Mapping::builtin("pendulum1d"), pts);
    EXPECT_EQ(r.verdict, Verdict::violated);
    ASSERT_FALSE(r.witnesses.empty());
    EXPECT_EQ(r.witnesses[0].point[0], root);
}

TEST(GramPd, InvalidTolerance) {
    EXPECT_THROW(gram_pd_check(Mapping::builtin("rotation2d"), one_point2, 0.0), ValidationError);
}

TEST(GramPd, PivotedCholeskyPivotsMultiplyToDeterminant) {
    Rng rng(3);
    for (int i = 0; i < 100; ++i) {
        Matrix j(4, 4);
        for (Index r = 0; r < 4; ++r) {
            for (Index c = 0; c < 4; ++c) {
                j(r, c) = rng.normal();
            }
        }
        const auto chol = linalg::pivoted_cholesky(j * j.transpose(), 1e-14);
        ASSERT_EQ(chol.rank, 4);
        double prod = 1.0;
        for (double p : chol.pivots) {
            prod *= p;
        }
        const double det = j.determinant();
        EXPECT_NEAR(prod, det * det, 1e-9 * det * det);
    }
}

TEST(Orthogonality, Examples) {
    Rng rng(8);
    std::vector<Vector> pts;
    for (int i = 0; i < 50; ++i) {
        pts.push_back(rng.uniform_vector(Vector::Constant(2, -5.0), Vector::Constant(2, 5.0)));
    }
    EXPECT_EQ(orthogonality_check(Mapping::builtin("rotation2d"), pts).verdict, Verdict::satisfied);
    const auto twice = orthogonality_check(constant_jacobian(2.0 * Matrix::Identity(2, 2)), pts);
    EXPECT_EQ(twice.verdict, Verdict::violated);
    EXPECT_EQ(twice.witnesses.at(0).value, 3.0);
    EXPECT_EQ(orthogonality_check(Mapping::builtin("identity", 2), pts).verdict, Verdict::satisfied);
}

TEST(Monotonicity, IdentityHasUnitModulus) {
    const auto r = monotonicity_probe(Mapping::builtin("identity", 1), pendulum_box, 1000, 1);
    EXPECT_EQ(r.verdict, Verdict::satisfied);
    EXPECT_NEAR(*r.estimate, 1.0, 1e-12);
}

TEST(Monotonicity, NegationViolatedOnFirstPair) {
    const auto r = monotonicity_probe(Mapping::builtin("negation", 1), pendulum_box, 1000, 1);
    EXPECT_EQ(r.verdict, Verdict::violated);
    ASSERT_EQ(r.witnesses.size(), 1u);
    // First witness is the first sampled pair: replay the sampler.
    Rng rng(1);
    const Vector x = pendulum_box.sample(rng);
    const Vector y = pendulum_box.sample(rng);
    EXPECT_EQ(r.witnesses[0].point, x);
    EXPECT_EQ(*r.witnesses[0].partner, y);
    EXPECT_NEAR(r.witnesses[0].value, -1.0, 1e-12);
}

TEST(Monotonicity, PendulumViolatedWithReproducibleWitness) {
    const auto f = Mapping::builtin("pendulum1d");
    const auto r = monotonicity_probe(f, pendulum_box, 10000, 7);
    EXPECT_EQ(r.verdict, Verdict::violated);
    ASSERT_FALSE(r.witnesses.empty());
    const auto& w = r.witnesses[0];
    const double x = w.point[0];
    const double y = (*w.partner)[0];
    const auto eval = [](double v) { return v + 0.5 * v * std::sin(v); };
    EXPECT_LT((eval(x) - eval(y)) * (x - y), 0.0);
    EXPECT_NEAR(w.value, (eval(x) - eval(y)) / (x - y), 1e-12);
    // The derivative must be negative somewhere between the pair.
    double min_derivative = 1.0;
    for (int i = 0; i <= 1000; ++i) {
        min_derivative = std::min(min_derivative, pendulum_derivative(x + (y - x) * i / 1000.0));
    }
    EXPECT_LT(min_derivative, 0.0);
}

TEST(Monotonicity, UnboundedRegionNeedsBox) {
    EXPECT_THROW(monotonicity_probe(Mapping::builtin("sine1d"), FeasibleSet::whole_space(1), 10, 0), ValidationError);
}

TEST(MintyCertificate, PendulumWithIdentityProxy) {
    const VIProblem p(Mapping::builtin("pendulum1d"), pendulum_box);
    const MintyCertificate cert(Mapping::builtin("identity", 1), Vector::Zero(1), 1.0, 0.5);
    const auto r = minty_certificate_check(p, cert, 10000, 5);
    EXPECT_EQ(r.verdict, Verdict::satisfied);
    // Sampled sup of ||F(x) - x|| / |x| = 0.5 |sin x| stays below d.
    EXPECT_LE(*r.estimate, 0.5);
    EXPECT_GT(*r.estimate, 0.49);
}

TEST(MintyCertificate, SelfProxy) {
    const VIProblem p(Mapping::builtin("identity", 1), pendulum_box);
    const MintyCertificate cert(Mapping::builtin("identity", 1), Vector::Zero(1), 1.0, 0.0);
    EXPECT_EQ(minty_certificate_check(p, cert, 1000, 5).verdict, Verdict::satisfied);
}

TEST(MintyCertificate, BrokenDeviationBoundRejected) {
    const VIProblem p(Mapping::affine(Matrix{{2.0}}, Vector::Zero(1)), pendulum_box);
    const MintyCertificate cert(Mapping::builtin("identity", 1), Vector::Zero(1), 1.0, 0.5);
    const auto r = minty_certificate_check(p, cert, 1000, 5);
    EXPECT_EQ(r.verdict, Verdict::violated);
    ASSERT_FALSE(r.witnesses.empty());
    const auto& w = r.witnesses[0];
    EXPECT_NE(w.point[0], 0.0);
    EXPECT_NEAR(w.value, 1.0, 1e-12);
    EXPECT_NE(std::find(r.notes.begin(), r.notes.end(), "deviation_bound: violated"), r.notes.end());
}

TEST(MintyCertificate, ProxySolutionMustSolveProxyVi) {
    // x~ = 0.5 does not solve VI([-10,10], identity).
    const VIProblem p(Mapping::builtin("identity", 1), pendulum_box);
    const MintyCertificate cert(Mapping::builtin("identity", 1), Vector{{0.5}}, 1.0, 0.9);
    const auto r = minty_certificate_check(p, cert, 1000, 2);
    EXPECT_EQ(r.verdict, Verdict::violated);
    EXPECT_NE(std::find(r.notes.begin(), r.notes.end(), "proxy_solution: violated"), r.notes.end());
}

TEST(MintyCertificate, WeakProxyRejected) {
    const VIProblem p(Mapping::builtin("identity", 1), pendulum_box);
    const MintyCertificate cert(Mapping::affine(Matrix{{0.5}}, Vector::Zero(1)), Vector::Zero(1), 1.0, 0.5);
    const auto r = minty_certificate_check(p, cert, 1000, 2);
    EXPECT_EQ(r.verdict, Verdict::violated);
    EXPECT_NE(std::find(r.notes.begin(), r.notes.end(), "proxy_strong_monotonicity: violated"), r.notes.end());
}

TEST(MintyCertificate, ConstructionInvariants) {
    const auto id = Mapping::builtin("identity", 1);
    EXPECT_THROW(MintyCertificate(id, Vector::Zero(1), 0.0, 0.0), ValidationError);
    EXPECT_THROW(MintyCertificate(id, Vector::Zero(1), 1.0, -0.1), ValidationError);
    EXPECT_THROW(MintyCertificate(id, Vector::Zero(1), 1.0, 1.0), ValidationError);
    EXPECT_THROW(MintyCertificate(id, Vector::Zero(2), 1.0, 0.5), DimensionError);
    const VIProblem p(id, FeasibleSet::box(Vector{{1.0}}, Vector{{2.0}}));
    EXPECT_THROW(minty_certificate_check(p, MintyCertificate(id, Vector::Zero(1), 1.0, 0.5), 10, 0), ValidationError);
}

TEST(MintyConsequence, HoldsForValidCertificate) {
    const VIProblem p(Mapping::builtin("pendulum1d"), pendulum_box);
    const MintyCertificate cert(Mapping::builtin("identity", 1), Vector::Zero(1), 1.0, 0.5);
    const auto r = minty_consequence_check(p, cert, 10000, 77);
    EXPECT_EQ(r.verdict, Verdict::satisfied);
    EXPECT_GE(*r.estimate, -1e-9);
}

TEST(Coercivity, IdentityAndRotation) {
    const auto id = coercivity_probe(Mapping::builtin("identity", 1), 0, {1.0, 10.0, 100.0});
    EXPECT_EQ(id.verdict, Verdict::satisfied);
    EXPECT_EQ(id.profile, (std::vector<double>{1.0, 10.0, 100.0}));
    const auto rot = coercivity_probe(Mapping::builtin("rotation2d"), 0, {1.0, 10.0, 100.0});
    EXPECT_EQ(rot.verdict, Verdict::satisfied);
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_NEAR(rot.profile[i], std::pow(10.0, static_cast<double>(i)), 1e-12);
    }
}

TEST(Coercivity, SineIsInconclusive) {
    const auto r = coercivity_probe(Mapping::builtin("sine1d"), 0, {1.0, 10.0, 100.0});
    EXPECT_EQ(r.verdict, Verdict::inconclusive);
    EXPECT_LT(r.profile.back(), 1.0);
}

TEST(Coercivity, SineOnSphereRadiusPiIsNearZero) {
    // sin(pi) vanishes, so the last minimum collapses.
    const auto r = coercivity_probe(Mapping::builtin("sine1d"), 0, {1.0, 2.0, std::numbers::pi});
    EXPECT_EQ(r.verdict, Verdict::inconclusive);
    EXPECT_LT(r.profile.back(), 1e-15);
}

TEST(Coercivity, RadiiValidation) {
    const auto f = Mapping::builtin("identity", 1);
    EXPECT_THROW(coercivity_probe(f, 0, {1.0, 2.0}), ValidationError);
    EXPECT_THROW(coercivity_probe(f, 0, {1.0, 1.0, 2.0}), ValidationError);
    EXPECT_THROW(coercivity_probe(f, 0, {-1.0, 1.0, 2.0}), ValidationError);
}
