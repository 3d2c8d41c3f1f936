#include "oracles.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

using namespace kfusion;
using namespace testing_support;

namespace {

// Small rotation of every member, weights kept.
W nudge(const W& w, double size, Rng& rng)
{
    const Index n = w.ambient_dim();
    const MatXd a = gaussian(n, n, rng);
    const MatXd skew = size * (a - a.transpose()) / 2;
    const MatXd id = MatXd::Identity(n, n);
    const MatXd rot = (id - skew).inverse() * (id + skew);  // Cayley transform, orthogonal
    W z(n);
    for (std::size_t i = 0; i < w.size(); ++i)
        z.add(S::span(MatXd(rot * w.subspace(i).basis())), w.weight(i));
    return z;
}

// max over sampled unit f of ||(T_W^* - T_Z^*) f|| / ||K^* f||, blocks in ambient coordinates
double sampled_ratio(const W& w, const W& z, const MatXd& k, Rng& rng, int samples)
{
    double worst = 0;
    for (int s = 0; s < samples; ++s) {
        const VecXd f = gaussian(k.rows(), 1, rng);
        double num = 0;
        for (std::size_t i = 0; i < w.size(); ++i)
            num += (w.weight(i) * oracle::span_projector(w.subspace(i).basis()) * f -
                    z.weight(i) * oracle::span_projector(z.subspace(i).basis()) * f)
                       .squaredNorm();
        const double den = (k.transpose() * f).norm();
        if (den > 1e-9)
            worst = std::max(worst, std::sqrt(num) / den);
    }
    return worst;
}

} // namespace

TEST(AnalysisEpsilon, ThreeDimExample)
{
    // only member 2 moves: D_2 = -pi onto span{e1 + e2}, and K K^* = 2 there
    const auto x = example3();
    EXPECT_NEAR(analysis_epsilon(x.w, x.z, x.k), 1 / std::sqrt(2.0), 1e-10);
}

TEST(AnalysisEpsilon, IdenticalFamiliesGiveZero)
{
    const auto x = example3();
    EXPECT_NEAR(analysis_epsilon(x.w, x.w, x.k), 0, 1e-12);
}

TEST(AnalysisEpsilon, InfiniteWhenDeviationLeavesRangeOfK)
{
    const auto x = example3();
    W z(3);
    VecXd d(3);
    d << 1, -1, 0;
    z.add(x.w.subspace(0)).add(x.w.subspace(1)).add(span({d}));
    EXPECT_TRUE(std::isinf(analysis_epsilon(x.w, z, x.k)));
}

TEST(AnalysisEpsilonProperty, SupremumOverSamples)
{
    Rng rng(401);
    for (int t = 0; t < 30; ++t) {
        const Index n = 2 + t % 3;
        W w = random_system(n, 3, n, rng);
        const MatXd k = random_operator(n, n, rng);
        const W z = nudge(w, 0.1, rng);
        const double eps = analysis_epsilon(w, z, k);
        const double seen = sampled_ratio(w, z, k, rng, 4000);
        EXPECT_LE(seen, eps * (1 + 1e-8) + 1e-12);
        if (eps > 1e-8)  // full-space members do not move under rotation
            EXPECT_GE(seen, 0.8 * eps);
    }
}

TEST(PerturbedBounds, ThreeDimExampleRejectsLargeEpsilon)
{
    const auto x = example3();
    EXPECT_THROW(perturbed_bounds(x.w, x.z, x.k, 1.0), InputError);
}

TEST(PerturbedBoundsProperty, SmallPerturbationsStayInsidePrediction)
{
    Rng rng(403);
    int used = 0;
    for (int t = 0; t < 80 && used < 30; ++t) {
        const auto x = random_instance(rng, 3, 6);
        const W z = nudge(x.w, 0.02, rng);
        const double eps = analysis_epsilon(x.w, z, x.k);
        const double sa = std::sqrt(verify_k_fusion(x.w, x.k).bounds.lower);
        if (!(eps < sa))
            continue;
        ++used;
        const auto r = perturbed_bounds(x.w, z, x.k, eps);
        EXPECT_TRUE(r.actual_is_k_fusion);
        EXPECT_TRUE(r.dominates) << r.actual.lower << " vs " << r.predicted.lower << ", " << r.actual.upper
                                 << " vs " << r.predicted.upper;
    }
    EXPECT_GE(used, 10);
}

TEST(CertifyPerturbation, IdenticalFamilyIsCertified)
{
    const auto x = example3();
    const auto r = certify_perturbation(x.w, x.w, x.k, 0.1, 0.1, 0.1);
    EXPECT_EQ(r.decided_by, Decision::certificate);
    EXPECT_TRUE(r.hypothesis_holds);
    EXPECT_TRUE(r.sandwich);
}

TEST(CertifyPerturbation, OrthogonalSwapIsFalsified)
{
    W w(2), z(2);
    w.add(span({e(2, 0)})).add(span({e(2, 1)}));
    z.add(span({e(2, 1)})).add(span({e(2, 0)}));
    const auto r = certify_perturbation(w, z, MatXd::Identity(2, 2).eval(), 0.1, 0.1, 0.1);
    EXPECT_EQ(r.decided_by, Decision::falsified);
    ASSERT_TRUE(r.falsified_witness.has_value());
    EXPECT_FALSE(r.certified);
}

TEST(CertifyPerturbation, ParameterChecks)
{
    const auto x = example3();
    EXPECT_THROW(certify_perturbation(x.w, x.z, x.k, 1.0, 0.5, 0.5), InputError);
    EXPECT_THROW(certify_perturbation(x.w, x.z, x.k, 0.5, 0.5, 0.0), InputError);
    EXPECT_THROW(certify_perturbation(x.w, x.w.without(0), x.k, 0.5, 0.5, 0.5), InputError);
}

TEST(CertifyPerturbationProperty, CertifiedImpliesSandwich)
{
    Rng rng(407);
    int certified = 0;
    for (int t = 0; t < 60; ++t) {
        const auto x = random_instance(rng, 3, 6);
        const W z = nudge(x.w, 0.01, rng);
        const auto r = certify_perturbation(x.w, z, x.k, 0.2, 0.2, 0.05, {}, std::uint64_t(t), 500);
        if (!r.certified)
            continue;
        ++certified;
        EXPECT_TRUE(r.actual_is_k_fusion);
        EXPECT_TRUE(r.sandwich) << r.actual.lower << " vs " << r.predicted.lower;
    }
    EXPECT_GT(certified, 5);
}

TEST(EpsilonThreshold, ThreeDimExample)
{
    const auto x = example3();
    const auto th = epsilon_threshold(x.w, x.z, x.k);
    // recompute the pieces from the oracle pseudo-inverse
    const MatXd pr = oracle::span_projector(x.k);
    const MatXd pw = oracle::pinv(MatXd(frame_operator(x.w) * pr));
    const MatXd pz = oracle::pinv(MatXd(frame_operator(x.z) * pr));
    const double dev = spectral_norm(MatXd((pw - pz).transpose() * x.k));
    const double zn = spectral_norm(MatXd(pz.transpose() * x.k));
    EXPECT_NEAR(th.deviation, dev, 1e-10);
    EXPECT_NEAR(th.z_norm, zn, 1e-10);
    EXPECT_NEAR(th.deviation, std::sqrt(2.0) / 6, 1e-10);
    EXPECT_NEAR(th.z_norm, 0.5, 1e-10);
    EXPECT_NEAR(th.sqrt_a, 1, 1e-10);
    EXPECT_NEAR(th.numerator, 0.5 - 2 * dev * dev, 1e-10);
    EXPECT_NEAR(th.threshold, std::min(1.0, th.numerator / (zn * zn * 2)), 1e-10);
    EXPECT_FALSE(th.vacuous);
}

TEST(EpsilonThreshold, SameFamilyHasNoDeviation)
{
    const auto x = example3();
    const auto th = epsilon_threshold(x.w, x.w, x.k);
    EXPECT_NEAR(th.deviation, 0, 1e-12);
    EXPECT_NEAR(th.numerator, 0.5, 1e-12);
}

TEST(ApproximateDual, ThreeDimExampleWithCanonicalDualOfW)
{
    const auto x = example3();
    const auto canon = canonical_k_dual(x.w, x.k);
    const auto r = approximate_dual_norm(x.z, canon.system, x.k);
    // brute force the same sum from oracle projectors
    const MatXd pr = oracle::span_projector(x.k);
    const MatXd pk = oracle::pinv(MatXd(frame_operator(x.z) * pr)).transpose() * x.k;
    MatXd sum = MatXd::Zero(3, 3);
    for (std::size_t i = 0; i < 3; ++i)
        sum += x.z.weight(i) * canon.system.weight(i) * pr * oracle::span_projector(x.z.subspace(i).basis()) * pk *
               oracle::span_projector(canon.system.subspace(i).basis());
    EXPECT_NEAR(r.norm, spectral_norm(MatXd(x.k - sum)), 1e-10);
    EXPECT_NEAR(r.norm, std::sqrt(2.0) / 3, 1e-10);
    EXPECT_TRUE(r.pass);
}

TEST(ApproximateDualProperty, SmallPerturbationGivesSmallNorm)
{
    Rng rng(409);
    for (int t = 0; t < 30; ++t) {
        const auto x = random_instance(rng, 3, 6);
        const auto canon = canonical_k_dual(x.w, x.k);
        EXPECT_LE(approximate_dual_norm(x.w, canon.system, x.k).norm, 1e-7 * (1 + x.k.norm()));
        const W z = nudge(x.w, 1e-4, rng);
        if (!verify_k_fusion(z, x.k).pass)
            continue;
        EXPECT_LT(approximate_dual_norm(z, canon.system, x.k).norm, 0.1 * (1 + x.k.norm()));
    }
}
