#include "oracles.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

using namespace kfusion;
using namespace testing_support;

TEST(Subspace, FromSpanningCoordinatePlane)
{
    const S s = span({e(4, 0), e(4, 1)});
    EXPECT_EQ(s.dim(), 2);
    VecXd d(4);
    d << 1, 1, 0, 0;
    EXPECT_LE((s.projector() - MatXd(d.asDiagonal())).norm(), 1e-14);
}

TEST(Subspace, FromSpanningDiagonalPlane)
{
    const S s = span({VecXd(e(3, 0) + e(3, 1)), e(3, 2)});
    MatXd want(3, 3);
    want << 0.5, 0.5, 0, 0.5, 0.5, 0, 0, 0, 1;
    EXPECT_LE((s.projector() - want).norm(), 1e-14);
}

TEST(Subspace, CollinearSpanningSetGivesLine)
{
    VecXd a(3), b(3);
    a << 1, 1, 0;
    b << 2, 2, 0;
    EXPECT_EQ(span({a, b}).dim(), 1);
}

TEST(Subspace, AllZeroSpanningSetIsZeroSubspace)
{
    EXPECT_TRUE(span({VecXd::Zero(3)}).is_zero());
    EXPECT_THROW(S::from_spanning({}), InputError);
}

TEST(Subspace, BasisIsOrthonormal)
{
    Rng rng(1);
    for (int t = 0; t < 20; ++t) {
        const S s = random_subspace(6, 3, rng);
        EXPECT_LE((s.basis().transpose() * s.basis() - MatXd::Identity(3, 3)).norm(), 1e-12);
    }
}

TEST(Subspace, IntersectionMatchesProjectorOracle)
{
    Rng rng(4);
    for (int t = 0; t < 20; ++t) {
        const MatXd common = gaussian(6, 2, rng);
        MatXd a(6, 3), b(6, 4);
        a << common, gaussian(6, 1, rng);
        b << common, gaussian(6, 2, rng);
        const S i = S::span(a).intersect(S::span(b));
        EXPECT_LE((i.projector() - oracle::span_projector(common)).norm(), 1e-9);
    }
}

TEST(Synthesis, FullSpaceSingleMemberIsIdentity)
{
    W w(3);
    w.add(S::full(3));
    EXPECT_LE((synthesis(w) - MatXd::Identity(3, 3)).norm(), 0);
}

TEST(Synthesis, ThreeDimExampleColumns)
{
    const auto x = example3();
    const MatXd t = synthesis(x.w);
    ASSERT_EQ(t.cols(), 4);
    // block columns span (e1+e2)/sqrt2, e3 | e3 | (e1+e2)/sqrt2
    EXPECT_LE((oracle::span_projector(t.leftCols(2)) - x.w.subspace(0).projector()).norm(), 1e-12);
    EXPECT_NEAR(std::abs(t(2, 2)), 1, 1e-14);
    EXPECT_NEAR(std::abs(t(0, 3)), 1 / std::sqrt(2.0), 1e-14);
    EXPECT_NEAR(std::abs(t(1, 3)), 1 / std::sqrt(2.0), 1e-14);
}

TEST(Synthesis, AnalysisNormFormula)
{
    const auto x = example3();
    Rng rng(8);
    for (int t = 0; t < 100; ++t) {
        const VecXd f = gaussian(3, 1, rng);
        const double want = std::pow(f(0) + f(1), 2) + 2 * f(2) * f(2);
        EXPECT_NEAR((analysis(x.w) * f).squaredNorm(), want, 1e-12 * (1 + want));
    }
}

TEST(FrameOperator, OrthonormalBasisIsIdentity)
{
    W w(3);
    for (Index i = 0; i < 3; ++i)
        w.add(span({e(3, i)}));
    EXPECT_LE((frame_operator(w) - MatXd::Identity(3, 3)).norm(), 1e-15);
}

TEST(FrameOperator, ExampleMatrices)
{
    const auto x = example3();
    MatXd sw(3, 3), sz(3, 3);
    sw << 1, 1, 0, 1, 1, 0, 0, 0, 2;
    sz << 1.5, 1.5, 0, 1.5, 1.5, 0, 0, 0, 2;
    EXPECT_LE((frame_operator(x.w) - sw).cwiseAbs().maxCoeff(), 1e-14);
    const MatXd pr = x.w.subspace(0).projector();  // R(K) = span{e1+e2, e3}
    EXPECT_LE((frame_operator(x.z) * pr - sz).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(FrameOperator, EqualsSynthesisTimesAnalysis)
{
    Rng rng(9);
    for (int t = 0; t < 20; ++t) {
        const W w = random_system(6, 4, 3, rng);
        EXPECT_LE((frame_operator(w) - synthesis(w) * analysis(w)).norm(), 1e-12);
    }
}

TEST(VerifyKFusion, FourDimExample)
{
    const auto x = example4();
    const auto c = verify_k_fusion(x.w, x.k);
    ASSERT_TRUE(c.pass);
    EXPECT_NEAR(c.bounds.lower, 0.5, 1e-10);
    EXPECT_NEAR(c.bounds.upper, 1.0, 1e-10);
}

TEST(VerifyKFusion, ThreeDimExample)
{
    const auto x = example3();
    const auto c = verify_k_fusion(x.w, x.k);
    ASSERT_TRUE(c.pass);
    EXPECT_NEAR(c.bounds.lower, 1.0, 1e-10);
    EXPECT_NEAR(c.bounds.upper, 2.0, 1e-10);
}

TEST(VerifyKFusion, ParsevalCase)
{
    W w(3);
    w.add(span({e(3, 0), e(3, 1)})).add(span({e(3, 2)}));
    const auto c = verify_k_fusion(w, MatXd::Identity(3, 3).eval());
    EXPECT_NEAR(c.bounds.lower, 1, 1e-12);
    EXPECT_NEAR(c.bounds.upper, 1, 1e-12);
}

TEST(VerifyKFusion, FailureCarriesWitnessInRangeOfK)
{
    W w(3);
    w.add(span({e(3, 0)}));
    const MatXd k = MatXd::Identity(3, 3);
    const auto c = verify_k_fusion(w, k);
    EXPECT_FALSE(c.pass);
    EXPECT_NEAR(c.witness.norm(), 1, 1e-12);
    EXPECT_LE(std::abs(c.witness(0)), 1e-12);  // not reached by span{e1}
}

TEST(VerifyKFusion, DimensionMismatch)
{
    EXPECT_THROW(verify_k_fusion(example3().w, MatXd::Identity(4, 4).eval()), InputError);
}

TEST(VerifyKFusionProperty, TwoRoutesAgreeAndInequalityHoldsPointwise)
{
    Rng rng(31);
    const Tolerance tol;
    for (int t = 0; t < 60; ++t) {
        const auto x = random_instance(rng);
        const auto c = verify_k_fusion(x.w, x.k, tol);
        ASSERT_TRUE(c.pass);
        EXPECT_TRUE(c.routes_agree);
        EXPECT_NEAR(c.lower_pencil, c.lower_xw, tol.eq_rel * c.lower_pencil);
        const MatXd ta = analysis(x.w);
        for (int s = 0; s < 100; ++s) {
            const VecXd f = gaussian(x.k.rows(), 1, rng);
            const double mid = (ta * f).squaredNorm();
            const double lo = c.bounds.lower * (x.k.transpose() * f).squaredNorm();
            const double hi = c.bounds.upper * f.squaredNorm();
            EXPECT_LE(lo, mid * (1 + tol.eq_rel) + tol.eq_abs);
            EXPECT_LE(mid, hi * (1 + tol.eq_rel) + tol.eq_abs);
        }
    }
}

TEST(VerifyKFusionProperty, FusionFrameLowerBoundFromCanonicalAnalysis)
{
    Rng rng(37);
    const Tolerance tol;
    int seen = 0;
    while (seen < 30) {
        const Index n = 3 + seen % 4;
        const W w = random_system(n, 4, n - 1, rng);
        const MatXd id = MatXd::Identity(n, n);
        const auto c = verify_k_fusion(w, id, tol);
        if (!c.pass)
            continue;
        ++seen;
        const double alt = spectral_norm(MatXd(analysis(w) * oracle::inverse(frame_operator(w))));
        EXPECT_NEAR(c.bounds.lower, 1 / (alt * alt), tol.eq_rel * c.bounds.lower);
    }
}

TEST(BlockVector, NormIsSumOfBlockNorms)
{
    Rng rng(41);
    const W w = random_system(5, 3, 3, rng);
    const VecXd f = gaussian(5, 1, rng);
    const auto b = apply_analysis(w, f);
    double sum = 0;
    for (const auto& blk : b.blocks)
        sum += blk.squaredNorm();
    EXPECT_DOUBLE_EQ(b.squared_norm(), sum);
    EXPECT_NEAR(b.flat().squaredNorm(), sum, 1e-12);
}

TEST(IsMinimal, Examples)
{
    EXPECT_TRUE(is_minimal(example4().w));
    EXPECT_FALSE(is_minimal(example3().w));
    W twice(3);
    twice.add(span({e(3, 0)})).add(span({e(3, 0)}));
    EXPECT_FALSE(is_minimal(twice));
}

TEST(IsExact, FourDimExampleDropsSecondMember)
{
    const auto x = example4();
    const auto r = is_exact(x.w, x.k);
    EXPECT_FALSE(r.exact);
    ASSERT_EQ(r.removals.size(), 2u);
    EXPECT_FALSE(r.removals[0].still_k_fusion);
    EXPECT_TRUE(r.removals[1].still_k_fusion);
    EXPECT_NEAR(r.removals[1].bounds.lower, 0.5, 1e-10);
    EXPECT_NEAR(r.removals[1].bounds.upper, 1.0, 1e-10);
}

TEST(IsExact, ThreeDimExamplePerIndex)
{
    const auto x = example3();
    const auto r = is_exact(x.w, x.k);
    // W1 alone spans R(K); W2 and W3 together span R(K) too
    EXPECT_FALSE(r.exact);
    for (const auto& m : r.removals) {
        EXPECT_TRUE(m.still_k_fusion);
        W sub = x.w.without(m.index);
        EXPECT_EQ(m.still_k_fusion, oracle::rank([&] {
                      MatXd cat(3, sub.coefficient_dim() + 2);
                      cat << synthesis(sub), x.k.leftCols(2);
                      return cat;
                  }()) == oracle::rank(synthesis(sub)));
    }
}

TEST(IsExact, SingleMemberIsExact)
{
    W w(3);
    w.add(span({e(3, 0), e(3, 1)}));
    MatXd k = MatXd::Zero(3, 3);
    k(0, 0) = 1;
    k(1, 1) = 1;
    EXPECT_TRUE(is_exact(w, k).exact);
}

TEST(TransformKdag, IdentityReturnsSameFamily)
{
    const auto x = example3();
    const auto r = transform_kdag(x.w, MatXd::Identity(3, 3).eval());
    for (std::size_t i = 0; i < x.w.size(); ++i)
        EXPECT_TRUE(r.system.subspace(i).equals(x.w.subspace(i)));
    // the family misses e1 - e2, so it is no frame for the whole space
    EXPECT_FALSE(r.certificate.pass);
    EXPECT_NEAR(std::abs(r.certificate.witness(0) + r.certificate.witness(1)), 0, 1e-12);
    EXPECT_NEAR(std::abs(r.certificate.witness(0)), 1 / std::sqrt(2.0), 1e-12);
}

TEST(TransformKdag, ThreeDimExampleSecondMember)
{
    const auto x = example3();
    const auto r = transform_kdag(x.w, x.k);
    EXPECT_TRUE(r.system.subspace(1).equals(span({e(3, 1)})));
    EXPECT_TRUE(r.certificate.pass);
}

TEST(TransformKdag, RandomBoundsPositiveOnCorange)
{
    Rng rng(43);
    for (int t = 0; t < 20; ++t) {
        const MatXd k = random_operator(6, 3, rng);
        W w = random_system(6, 4, 3, rng);
        while (!verify_k_fusion(w, k).pass)
            w = random_system(6, 4, 3, rng);
        const auto r = transform_kdag(w, k);
        // the images live in R(K^*); check the bound directly against an oracle projector
        const MatXd prs = oracle::span_projector(MatXd(k.transpose()));
        const MatXd sres = prs * frame_operator(r.system) * prs;
        Eigen::SelfAdjointEigenSolver<MatXd> eig(sres);
        EXPECT_NEAR(r.certificate.bounds.upper, eig.eigenvalues().maxCoeff(), 1e-9);
        EXPECT_TRUE(r.certificate.pass);
        EXPECT_GT(r.certificate.bounds.lower, 0);
    }
    EXPECT_THROW(transform_kdag(example3().w, MatXd::Zero(3, 3).eval()), InputError);
}

TEST(TransformSinv, ThreeDimExampleFixesEveryMember)
{
    const auto x = example3();
    const auto r = transform_sinv(x.w, x.k);
    for (std::size_t i = 0; i < 3; ++i)
        EXPECT_TRUE(r.system.subspace(i).equals(x.w.subspace(i)));
    EXPECT_TRUE(r.certificate.pass);
}

TEST(TransformSinv, IdentityGivesCanonicalDualSubspaces)
{
    Rng rng(47);
    const MatXd id = MatXd::Identity(4, 4);
    W w = random_system(4, 4, 2, rng);
    while (!verify_k_fusion(w, id).pass)
        w = random_system(4, 4, 2, rng);
    const auto r = transform_sinv(w, id);
    const MatXd sinv = oracle::inverse(frame_operator(w));
    for (std::size_t i = 0; i < w.size(); ++i)
        EXPECT_LE((r.system.subspace(i).projector() - oracle::span_projector(MatXd(sinv * w.subspace(i).basis()))).norm(),
                  1e-9);
}

TEST(TransformSinv, RandomIsFusionFrameForRangeOfK)
{
    Rng rng(53);
    for (int t = 0; t < 20; ++t) {
        const auto x = random_instance(rng);
        const auto r = transform_sinv(x.w, x.k);
        EXPECT_TRUE(r.certificate.pass);
    }
}

TEST(TransformQ, IdentityChangesNothing)
{
    const auto x = example3();
    const auto r = transform_q(x.w, MatXd::Identity(3, 3).eval(), x.k);
    const auto base = verify_k_fusion(x.w, x.k);
    EXPECT_NEAR(r.qk.bounds.lower, base.bounds.lower, 1e-12);
    EXPECT_NEAR(r.qk.bounds.upper, base.bounds.upper, 1e-12);
    EXPECT_TRUE(r.commuting);
}

TEST(TransformQ, DoublingQuartersTheLowerBound)
{
    // pi_{QW_i} = pi_{W_i} and (QK)(QK)^* = 4 K K^*
    const auto x = example3();
    const MatXd q = 2 * MatXd::Identity(3, 3);
    const auto r = transform_q(x.w, q, x.k);
    EXPECT_NEAR(r.qk.bounds.lower, 0.25, 1e-10);
    EXPECT_NEAR(r.qk.bounds.upper, 2.0, 1e-10);
    ASSERT_TRUE(r.k.has_value());
    EXPECT_NEAR(r.k->bounds.lower, 1.0, 1e-10);
}

TEST(TransformQ, OrthogonalQPreservesBounds)
{
    Rng rng(59);
    for (int t = 0; t < 20; ++t) {
        const auto x = random_instance(rng);
        const MatXd q = random_orthogonal(x.k.rows(), rng);
        const auto r = transform_q(x.w, q, x.k);
        const auto base = verify_k_fusion(x.w, x.k);
        EXPECT_NEAR(r.qk.bounds.lower, base.bounds.lower, 1e-8 * base.bounds.lower);
        EXPECT_NEAR(r.qk.bounds.upper, base.bounds.upper, 1e-8 * base.bounds.upper);
    }
    EXPECT_THROW(transform_q(example3().w, MatXd::Zero(3, 3).eval(), example3().k), InputError);
}

TEST(WeakenToQ, SameOperator)
{
    const auto x = example3();
    const auto r = weaken_to_q(x.w, x.k, x.k);
    EXPECT_TRUE(r.pass);
    EXPECT_NEAR(r.bounds.lower, 1, 1e-10);
    EXPECT_NEAR(r.lambda_sq, 1, 1e-10);
}

TEST(WeakenToQ, ProjectedOperatorAndLowerBoundFloor)
{
    Rng rng(61);
    for (int t = 0; t < 20; ++t) {
        const auto x = random_instance(rng);
        const MatXd pr = projector(LinearMap<double>(x.k, {}).range());
        const MatXd q = pr * x.k * gaussian(x.k.cols(), x.k.cols(), rng);
        const auto r = weaken_to_q(x.w, x.k, q);
        ASSERT_TRUE(r.pass);
        EXPECT_GE(r.bounds.lower, r.predicted_lower * (1 - 1e-8));
    }
}

TEST(WeakenToQ, RangeObstruction)
{
    MatXd k = MatXd::Zero(3, 3);
    k(0, 0) = 1;
    W w(3);
    w.add(span({e(3, 0)}));
    const auto r = weaken_to_q(w, k, MatXd::Identity(3, 3).eval());
    EXPECT_FALSE(r.pass);
    EXPECT_NEAR(r.witness.norm(), 1, 1e-12);
    EXPECT_LE(std::abs(r.witness(0)), 1e-12);
}

TEST(KImageFrame, UnitaryPreservesBounds)
{
    Rng rng(67);
    const Index n = 4;
    const MatXd id = MatXd::Identity(n, n);
    W w = random_system(n, 4, 2, rng);
    while (!verify_k_fusion(w, id).pass)
        w = random_system(n, 4, 2, rng);
    const MatXd u = random_orthogonal(n, rng);
    const auto r = k_image_frame(w, u);
    const auto base = verify_k_fusion(w, id);
    EXPECT_NEAR(r.certificate.bounds.lower, base.bounds.lower, 1e-9);
    EXPECT_NEAR(r.certificate.bounds.upper, base.bounds.upper, 1e-9);
}

TEST(KImageFrame, ThreeDimExampleImageOfFirstAxis)
{
    const auto x = example3();
    W w(3);
    w.add(span({e(3, 0)})).add(span({e(3, 1)}));
    const auto r = k_image_frame(w, x.k);
    EXPECT_TRUE(r.system.subspace(0).equals(span({VecXd(e(3, 0) + e(3, 1))})));
    EXPECT_TRUE(r.certificate.pass);
}

TEST(KImageFrame, RandomFrameOfCorange)
{
    Rng rng(71);
    for (int t = 0; t < 20; ++t) {
        const MatXd k = random_operator(5, 3, rng);
        const MatXd rks = LinearMap<double>(k, {}).corange();
        W w(5);
        for (int m = 0; m < 3; ++m)
            w.add(S::span(MatXd(rks * gaussian(3, 1 + m % 2, rng))));
        const auto r = k_image_frame(w, k);
        EXPECT_TRUE(r.certificate.pass);
    }
}

TEST(KImageFrame, IntersectModeCanLoseTheFrameProperty)
{
    // every member meets R(K^*) = span{e1} only in 0
    MatXd k = MatXd::Zero(2, 2);
    k(0, 0) = 1;
    W w(2);
    VecXd a(2), b(2);
    a << 1, 1;
    b << 1, -1;
    w.add(span({a})).add(span({b}));
    const auto r = k_image_frame(w, k, ImageMode::intersect);
    EXPECT_TRUE(r.source.subspace(0).is_zero());
    EXPECT_FALSE(r.hypothesis.pass);
    EXPECT_FALSE(r.certificate.pass);
}

TEST(VerifyKFrame, OrthonormalBasis)
{
    const auto c = verify_k_frame(KFrame<double>{MatXd::Identity(3, 3)}, MatXd::Identity(3, 3).eval());
    EXPECT_NEAR(c.bounds.lower, 1, 1e-12);
    EXPECT_NEAR(c.bounds.upper, 1, 1e-12);
}

TEST(VerifyKFrame, SingleVectorAgainstDiagonalProjection)
{
    MatXd p(2, 2);
    p << 0.5, 0.5, 0.5, 0.5;
    const auto c = verify_k_frame(KFrame<double>{MatXd(VecXd::Unit(2, 0))}, p);
    EXPECT_FALSE(c.pass);
    EXPECT_GT((p * c.witness).norm(), 0.1);
}

TEST(VerifyKFrame, ProjectedBasisMatchesFusionBounds)
{
    const auto x = example3();
    MatXd cols(3, 0);
    for (const auto& m : x.w.members()) {
        MatXd grown(3, cols.cols() + 3);
        grown << cols, m.weight * m.subspace.projector();
        cols.swap(grown);
    }
    const auto c = verify_k_frame(KFrame<double>{cols}, x.k);
    const auto f = verify_k_fusion(x.w, x.k);
    EXPECT_NEAR(c.bounds.lower, f.bounds.lower, 1e-10);
    EXPECT_NEAR(c.bounds.upper, f.bounds.upper, 1e-10);
}

TEST(LemmaProperty, ProjectionThroughImageClosure)
{
    // pi_V T^* = pi_V T^* pi_{closure(T V)}
    Rng rng(73);
    for (int t = 0; t < 100; ++t) {
        std::uniform_int_distribution<Index> d(1, 8);
        const Index n = d(rng);
        const S v = random_subspace(n, std::uniform_int_distribution<Index>(1, n)(rng), rng);
        const Index r = d(rng);
        const MatXd tm = gaussian(n, r, rng) * gaussian(r, n, rng);
        const S tv = v.image(tm);
        const MatXd lhs = v.projector() * tm.transpose();
        EXPECT_LE(spectral_norm(MatXd(lhs - lhs * tv.projector())), 1e-10 * (1 + spectral_norm(tm)));
    }
}

TEST(LemmaProperty, InvertibleImageBesselBound)
{
    Rng rng(79);
    for (int t = 0; t < 50; ++t) {
        const Index n = 3 + t % 5;
        const W w = random_system(n, 4, n, rng);
        const MatXd tm = gaussian(n, n, rng) + 3 * MatXd::Identity(n, n);
        if (numerical_rank(tm) < n)
            continue;
        const W img = map_family(w, tm);
        const double b = spectral_norm(frame_operator(w));
        const double bound = std::pow(spectral_norm(oracle::inverse(tm)) * spectral_norm(tm), 2) * b;
        EXPECT_LE(spectral_norm(frame_operator(img)), bound * (1 + 1e-8));
    }
}
