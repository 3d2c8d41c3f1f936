// QK-duals, K-duals, the canonical K-dual and the discrete local-frame view.
#pragma once

#include "kfusion/factorization.hpp"
#include "kfusion/random.hpp"

#include <optional>
#include <string>
#include <vector>

namespace kfusion {

enum class DualKind { qk, k, approximate };

template <typename Scalar = double>
struct DualCertificate {
    DualKind kind = DualKind::k;
    double residual = 0;
    bool pass = false;
    std::optional<Mat<Scalar>> operator_q;

    // QK-duals only: V as a K^*-fusion frame and the two bound inequalities.
    std::optional<FrameCertificate<Scalar>> dual_bounds;
    double c_floor = 0;  // 1 / (B ||Q||^2)
    double d_floor = 0;  // 1 / (A ||Q||^2)
    bool c_ok = true;
    bool d_ok = true;
};

// Block-diagonal phi_vw: block i sends V_i-coefficients through
// pi_{W_i} (S_W^{-1})^* K into W_i-coefficients.
template <typename Scalar = double>
struct PhiOperator {
    std::vector<Mat<Scalar>> blocks;

    Mat<Scalar> matrix() const
    {
        Index r = 0, c = 0;
        for (const auto& b : blocks) {
            r += b.rows();
            c += b.cols();
        }
        Mat<Scalar> m = Mat<Scalar>::Zero(r, c);
        r = c = 0;
        for (const auto& b : blocks) {
            m.block(r, c, b.rows(), b.cols()) = b;
            r += b.rows();
            c += b.cols();
        }
        return m;
    }
};

template <typename Scalar>
PhiOperator<Scalar> phi_operator(const FusionSystem<Scalar>& w, const FusionSystem<Scalar>& v, const Mat<Scalar>& k,
                                 const Tolerance& tol = {})
{
    if (w.size() != v.size())
        throw InputError("phi_operator: W and V have different member counts");
    const Mat<Scalar> pk = sinv_on_range(w, k, tol).adjoint() * k;
    PhiOperator<Scalar> phi;
    for (std::size_t i = 0; i < w.size(); ++i)
        phi.blocks.push_back(w.subspace(i).basis().adjoint() * pk * v.subspace(i).basis());
    return phi;
}

// pi_R(K) T_W phi_vw T_V^*, which equals the sum of w_i v_i pi_R pi_{W_i} (S_W^{-1})^* K pi_{V_i}.
template <typename Scalar>
Mat<Scalar> k_dual_reconstruction(const FusionSystem<Scalar>& w, const FusionSystem<Scalar>& v, const Mat<Scalar>& k,
                                  const Tolerance& tol = {})
{
    const Mat<Scalar> pr = projector(LinearMap<Scalar>(k, tol).range());
    return pr * synthesis(w) * phi_operator(w, v, k, tol).matrix() * analysis(v);
}

template <typename Scalar>
DualCertificate<Scalar> is_k_dual(const FusionSystem<Scalar>& w, const FusionSystem<Scalar>& v, const Mat<Scalar>& k,
                                  const Tolerance& tol = {})
{
    if (w.size() != v.size())
        throw InputError("is_k_dual: W has " + std::to_string(w.size()) + " members, V has " +
                         std::to_string(v.size()));
    DualCertificate<Scalar> c;
    c.kind = DualKind::k;
    c.residual = double(spectral_norm((k_dual_reconstruction(w, v, k, tol) - k).eval()));
    c.pass = c.residual <= tol.accept(double(spectral_norm(k)));
    return c;
}

// T_W Q^* T_V^* = K, where Q maps W-coefficients to V-coefficients.
template <typename Scalar>
DualCertificate<Scalar> is_qk_dual(const FusionSystem<Scalar>& w, const FusionSystem<Scalar>& v, const Mat<Scalar>& q,
                                   const Mat<Scalar>& k, const Tolerance& tol = {})
{
    if (q.rows() != v.coefficient_dim() || q.cols() != w.coefficient_dim())
        throw InputError("is_qk_dual: Q must map W-coefficients onto V-coefficients");
    if (k.rows() != w.ambient_dim() || k.cols() != v.ambient_dim())
        throw InputError("is_qk_dual: K has the wrong shape");
    DualCertificate<Scalar> c;
    c.kind = DualKind::qk;
    c.operator_q = q;
    const double kn = double(spectral_norm(k));
    c.residual = double(spectral_norm((synthesis(w) * q.adjoint() * analysis(v) - k).eval()));
    c.pass = c.residual <= tol.accept(kn);

    const auto wb = verify_k_fusion(w, k, tol);
    const auto vb = verify_k_fusion(v, Mat<Scalar>(k.adjoint()), tol);
    c.dual_bounds = vb;
    const double qn = double(spectral_norm(q));
    if (wb.pass && vb.pass && qn > 0) {
        c.c_floor = 1 / (wb.bounds.upper * qn * qn);
        c.d_floor = 1 / (wb.bounds.lower * qn * qn);
        c.c_ok = vb.bounds.lower >= c.c_floor * (1 - tol.eq_rel) - tol.eq_abs;
        c.d_ok = vb.bounds.upper >= c.d_floor * (1 - tol.eq_rel) - tol.eq_abs;
    }
    return c;
}

template <typename Scalar = double>
struct QkDualResult {
    FusionSystem<Scalar> system;  // {X_i^* W_i}, unit weights
    Mat<Scalar> q;
    DualCertificate<Scalar> certificate;
};

// X_i^* W_i is the range of the transposed block; Gamma = X pinv(T_hat^*) is
// X on R(T_hat^*) and zero on its complement, and Q = Gamma^*.
template <typename Scalar>
QkDualResult<Scalar> qk_dual_from_x(const FusionSystem<Scalar>& w, const Mat<Scalar>& k, const Mat<Scalar>& x,
                                    const Tolerance& tol = {})
{
    if (x.rows() != w.coefficient_dim() || x.cols() != k.cols())
        throw InputError("qk_dual_from_x: X has the wrong shape");
    const double kn = double(spectral_norm(k));
    if (spectral_norm((synthesis(w) * x - k).eval()) > tol.accept(kn))
        throw InputError("qk_dual_from_x: X does not solve T_W X = K");
    const double xn = double(spectral_norm(x));
    QkDualResult<Scalar> r;
    r.system = FusionSystem<Scalar>(k.cols());
    for (std::size_t i = 0; i < w.size(); ++i) {
        const Mat<Scalar> blk = x.middleRows(w.offset(i), w.subspace(i).dim());
        r.system.add(Subspace<Scalar>::span(Mat<Scalar>(blk.adjoint()), tol, xn), 1.0);
    }
    const Mat<Scalar> gamma = x * pinv(analysis(r.system), tol);
    r.q = gamma.adjoint();
    r.certificate = is_qk_dual(w, r.system, r.q, k, tol);
    return r;
}

template <typename Scalar = double>
struct CanonicalDualResult {
    FusionSystem<Scalar> system;
    DualCertificate<Scalar> certificate;
    double bessel_bound = 0;     // ||S of the dual||
    double bessel_estimate = 0;  // B ||K||^2 ||K^dagger||^2 ||S_W||^2 ||S_W^{-1}||^2
    bool within_estimate = false;
};

// {K^* S_W^{-1} pi_{S_W(R(K))} W_i} with the weights of W.
template <typename Scalar>
CanonicalDualResult<Scalar> canonical_k_dual(const FusionSystem<Scalar>& w, const Mat<Scalar>& k,
                                             const Tolerance& tol = {})
{
    const auto wc = verify_k_fusion(w, k, tol);
    if (!wc.pass)
        throw HypothesisError("canonical_k_dual: W is not a K-fusion frame");
    const Mat<Scalar> p = sinv_on_range(w, k, tol);
    CanonicalDualResult<Scalar> r;
    r.system = map_family(w, Mat<Scalar>(k.adjoint() * p), tol);
    r.certificate = is_k_dual(w, r.system, k, tol);
    r.bessel_bound = double(spectral_norm(frame_operator(r.system)));
    const double kn = double(spectral_norm(k));
    const double kd = double(spectral_norm(pinv(k, tol)));
    const double sn = wc.bounds.upper;
    const double pn = double(spectral_norm(p));
    r.bessel_estimate = wc.bounds.upper * kn * kn * kd * kd * sn * sn * pn * pn;
    r.within_estimate = r.bessel_bound <= r.bessel_estimate * (1 + tol.eq_rel) + tol.eq_abs;
    return r;
}

template <typename Scalar = double>
struct EnlargeResult {
    FusionSystem<Scalar> system;
    DualCertificate<Scalar> certificate;
};

// Replace member j of the canonical dual by its orthogonal sum with u.
template <typename Scalar>
EnlargeResult<Scalar> enlarge_dual(const FusionSystem<Scalar>& w, const Mat<Scalar>& k,
                                   const FusionSystem<Scalar>& base, std::size_t j, const Subspace<Scalar>& u,
                                   const Tolerance& tol = {})
{
    if (j >= base.size())
        throw InputError("enlarge_dual: index out of range");
    const auto& bj = base.subspace(j);
    if (u.ambient_dim() != base.ambient_dim())
        throw InputError("enlarge_dual: U lives in the wrong space");
    if (bj.dim() == bj.ambient_dim() && u.dim() > 0)
        throw InputError("enlarge_dual: member already fills the space");
    if (u.dim() > 0 && bj.dim() > 0 && spectral_norm((bj.basis().adjoint() * u.basis()).eval()) > tol.eq_abs)
        throw InputError("enlarge_dual: U is not orthogonal to the dual member");
    EnlargeResult<Scalar> r;
    r.system = FusionSystem<Scalar>(base.ambient_dim());
    for (std::size_t i = 0; i < base.size(); ++i)
        r.system.add(i == j ? bj.sum(u, tol) : base.subspace(i), base.weight(i));
    r.certificate = is_k_dual(w, r.system, k, tol);
    return r;
}

struct SwsReport {
    bool condition = false;        // S_W S_W R(K) within R(K)
    bool operator_equal = false;   // X_w = T_W^* (S_W^{-1})^* K
    bool family_equal = false;     // canonical dual member i = X_i^* W_i for all i
    double operator_gap = 0;
    // condition <=> operator equality, and condition => family equality
    bool biconditional_holds = false;
};

template <typename Scalar>
SwsReport check_sws_range_condition(const FusionSystem<Scalar>& w, const Mat<Scalar>& k, const Tolerance& tol = {})
{
    const auto xw = x_w(w, k, tol);
    SwsReport r;
    const Mat<Scalar> rk = LinearMap<Scalar>(k, tol).range();
    const Mat<Scalar> s = frame_operator(w);
    r.condition = range_included<Scalar>(Mat<Scalar>(s * s * rk), rk, tol).included;

    const Mat<Scalar> p = sinv_on_range(w, k, tol);
    const Mat<Scalar> alt = analysis(w) * p.adjoint() * k;
    r.operator_gap = double(spectral_norm((xw.matrix() - alt).eval()));
    r.operator_equal = r.operator_gap <= tol.accept(double(spectral_norm(xw.matrix())));

    const auto canon = map_family(w, Mat<Scalar>(k.adjoint() * p), tol);
    const double xn = double(spectral_norm(xw.matrix()));
    r.family_equal = true;
    for (std::size_t i = 0; i < w.size(); ++i) {
        const auto xi = Subspace<Scalar>::span(Mat<Scalar>(xw.block(i).adjoint()), tol, xn);
        if (!xi.equals(canon.subspace(i), tol))
            r.family_equal = false;
    }
    r.biconditional_holds = (r.condition == r.operator_equal) && (!r.condition || r.family_equal);
    return r;
}

struct MinimalDualReport {
    bool minimal = false;
    bool span_hypothesis = false;  // span{W_i} meets R(K)^perp only in 0
    bool hypothesis_ok = false;
    bool k_dual = false;
    bool contains_canonical = false;  // canonical dual member i inside V_i for all i
    double residual = 0;
    bool agree = false;
};

template <typename Scalar>
MinimalDualReport minimal_dual_test(const FusionSystem<Scalar>& w, const Mat<Scalar>& k,
                                    const FusionSystem<Scalar>& v, const Tolerance& tol = {})
{
    const Index n = w.ambient_dim();
    MinimalDualReport r;
    r.minimal = is_minimal(w, tol);
    Subspace<Scalar> span_w = Subspace<Scalar>::zero(n);
    for (const auto& m : w.members())
        span_w = span_w.sum(m.subspace, tol);
    const Subspace<Scalar> rk_perp(LinearMap<Scalar>(k, tol).conull());
    r.span_hypothesis = span_w.intersect(rk_perp, tol).is_zero();
    r.hypothesis_ok = r.minimal && r.span_hypothesis;

    const auto canon = canonical_k_dual(w, k, tol);
    const auto dc = is_k_dual(w, v, k, tol);
    r.k_dual = dc.pass;
    r.residual = dc.residual;
    r.contains_canonical = true;
    for (std::size_t i = 0; i < w.size(); ++i)
        if (!v.subspace(i).contains(canon.system.subspace(i), tol))
            r.contains_canonical = false;
    r.agree = r.k_dual == r.contains_canonical;
    return r;
}

template <typename Scalar = double>
struct ComponentPreservingResult {
    FusionSystem<Scalar> system;  // V_i = Psi applied to block i, unit weights
    Mat<Scalar> q;                // block diagonal
    DualCertificate<Scalar> certificate;
    bool block_diagonal = false;
};

template <typename Scalar>
ComponentPreservingResult<Scalar> component_preserving_duals(const FusionSystem<Scalar>& w, const Mat<Scalar>& psi,
                                                            const Mat<Scalar>& k, const Tolerance& tol = {})
{
    if (psi.cols() != w.coefficient_dim())
        throw InputError("component_preserving_duals: Psi has the wrong number of columns");
    if (spectral_norm((psi * analysis(w) - k.adjoint()).eval()) > tol.eq_abs * (1 + double(spectral_norm(k))))
        throw InputError("component_preserving_duals: Psi T_W^* differs from K^*");
    const double pn = double(spectral_norm(psi));
    ComponentPreservingResult<Scalar> r;
    r.system = FusionSystem<Scalar>(psi.rows());
    std::vector<Mat<Scalar>> qb;
    for (std::size_t i = 0; i < w.size(); ++i) {
        const Mat<Scalar> pi = psi.middleCols(w.offset(i), w.subspace(i).dim());
        r.system.add(Subspace<Scalar>::span(pi, tol, pn), 1.0);
        // T_V Q = Psi block by block, with unit dual weights
        qb.push_back(r.system.subspace(i).basis().adjoint() * pi);
    }
    r.q = PhiOperator<Scalar>{qb}.matrix();
    r.block_diagonal = true;
    r.certificate = is_qk_dual(w, r.system, r.q, k, tol);
    return r;
}

// Largest deviation of K f - recon f over a seeded sample of unit f.
template <typename Scalar>
double sampled_residual(const Mat<Scalar>& recon, const Mat<Scalar>& k, int samples, std::uint64_t seed)
{
    Rng rng(seed);
    double worst = 0;
    for (int s = 0; s < samples; ++s) {
        const Vec<Scalar> f = unit_vector<Scalar>(k.cols(), rng);
        worst = std::max(worst, double((recon * f - k * f).norm()));
    }
    return worst;
}

template <typename Scalar = double>
struct KFramePair {
    KFrame<Scalar> primal;
    KFrame<Scalar> dual;
    double residual = 0;          // operator norm of T_primal T_dual^* - K
    double sampled_residual = 0;  // worst ||K f - sum <f, dual_j> primal_j|| over random f
    bool pass = false;
};

// {pi_R(K) f_j} with dual {K^* S_F^{-1} pi_{S_F(R(K))} f_j}.
template <typename Scalar>
KFramePair<Scalar> kframe_projection_dual(const KFrame<Scalar>& f, const Mat<Scalar>& k, const Tolerance& tol = {},
                                          std::uint64_t seed = 0)
{
    if (!verify_k_frame(f, k, tol).pass)
        throw HypothesisError("kframe_projection_dual: F is not a K-frame");
    const Mat<Scalar> pr = projector(LinearMap<Scalar>(k, tol).range());
    const Mat<Scalar> p = pinv(Mat<Scalar>(f.frame_operator() * pr), tol);
    KFramePair<Scalar> r;
    r.primal.vectors = pr * f.vectors;
    r.dual.vectors = k.adjoint() * p * f.vectors;
    const Mat<Scalar> recon = r.primal.vectors * r.dual.vectors.adjoint();
    const double kn = double(spectral_norm(k));
    r.residual = double(spectral_norm((recon - k).eval()));
    r.sampled_residual = sampled_residual(recon, k, 50, seed);
    r.pass = r.residual <= tol.accept(kn) && r.sampled_residual <= tol.accept(kn);
    return r;
}

// Local frames inside each member, columns of frames[i] lie in W_i.
template <typename Scalar = double>
struct LocalFrameSystem {
    FusionSystem<Scalar> fusion;
    std::vector<Mat<Scalar>> frames;
    std::vector<FrameBounds> local_bounds;

    static LocalFrameSystem build(const FusionSystem<Scalar>& w, std::vector<Mat<Scalar>> frames,
                                  const Tolerance& tol = {})
    {
        if (frames.size() != w.size())
            throw InputError("LocalFrameSystem: one local frame per member required");
        LocalFrameSystem s{w, std::move(frames), {}};
        for (std::size_t i = 0; i < w.size(); ++i) {
            const auto& sub = w.subspace(i);
            const auto& g = s.frames[i];
            if (g.rows() != w.ambient_dim())
                throw InputError("LocalFrameSystem: local frame " + std::to_string(i) + " has the wrong length");
            const double gn = double(spectral_norm(g));
            if (spectral_norm(Mat<Scalar>(g - sub.projector() * g)) > tol.accept(gn) ||
                Subspace<Scalar>::span(g, tol).dim() != sub.dim())
                throw InputError("LocalFrameSystem: local frame " + std::to_string(i) + " does not span its member");
            FrameBounds b{0, gn * gn, true};
            if (sub.dim() > 0) {
                const Mat<Scalar> r = sub.basis().adjoint() * g * g.adjoint() * sub.basis();
                Eigen::SelfAdjointEigenSolver<Mat<Scalar>> eig((r + r.adjoint()) / Scalar(2), Eigen::EigenvaluesOnly);
                b.lower = double(eig.eigenvalues()(0));
            }
            s.local_bounds.push_back(b);
        }
        return s;
    }

    // Canonical local dual: the local frame operator inverted inside W_i.
    Mat<Scalar> local_dual(std::size_t i, const Tolerance& tol = {}) const
    {
        const auto& g = frames[i];
        return pinv(Mat<Scalar>(g * g.adjoint()), tol) * g;
    }
};

template <typename Scalar>
LocalFrameSystem<Scalar> orthonormal_local_frames(const FusionSystem<Scalar>& w, const Tolerance& tol = {})
{
    std::vector<Mat<Scalar>> f;
    for (const auto& m : w.members())
        f.push_back(m.subspace.basis());
    return LocalFrameSystem<Scalar>::build(w, std::move(f), tol);
}

// {pi_{W_i} e_j}: every standard basis vector projected into each member.
template <typename Scalar>
LocalFrameSystem<Scalar> standard_local_frames(const FusionSystem<Scalar>& w, const Tolerance& tol = {})
{
    std::vector<Mat<Scalar>> f;
    for (const auto& m : w.members())
        f.push_back(m.subspace.projector());
    return LocalFrameSystem<Scalar>::build(w, std::move(f), tol);
}

struct LocalDualityReport {
    bool fusion_dual = false;    // is_k_dual(W, V, K)
    bool discrete_dual = false;  // T_F T_G^* = K
    double fusion_residual = 0;
    double discrete_residual = 0;
    bool agree = false;
};

// G = {v_i g_ij}, F = {w_i pi_R(K) pi_{W_i} (S_W^{-1})^* K gt_ij} with gt the
// canonical local duals of the local frames of V.
template <typename Scalar>
LocalDualityReport local_duality_equiv(const FusionSystem<Scalar>& w, const FusionSystem<Scalar>& v,
                                       const LocalFrameSystem<Scalar>& locals, const Mat<Scalar>& k,
                                       const Tolerance& tol = {})
{
    if (w.size() != v.size() || locals.frames.size() != v.size())
        throw InputError("local_duality_equiv: member counts differ");
    const Index n = w.ambient_dim();
    const Mat<Scalar> pr = projector(LinearMap<Scalar>(k, tol).range());
    const Mat<Scalar> pk = sinv_on_range(w, k, tol).adjoint() * k;
    Mat<Scalar> fcols(n, 0), gcols(n, 0);
    for (std::size_t i = 0; i < w.size(); ++i) {
        const Mat<Scalar> fi = Scalar(w.weight(i)) * pr * w.subspace(i).projector() * pk * locals.local_dual(i, tol);
        const Mat<Scalar> gi = Scalar(v.weight(i)) * locals.frames[i];
        Mat<Scalar> fg(n, fcols.cols() + fi.cols()), gg(n, gcols.cols() + gi.cols());
        fg << fcols, fi;
        gg << gcols, gi;
        fcols.swap(fg);
        gcols.swap(gg);
    }
    const double kn = double(spectral_norm(k));
    LocalDualityReport r;
    r.discrete_residual = double(spectral_norm((fcols * gcols.adjoint() - k).eval()));
    r.discrete_dual = r.discrete_residual <= tol.accept(kn);
    const auto fc = is_k_dual(w, v, k, tol);
    r.fusion_dual = fc.pass;
    r.fusion_residual = fc.residual;
    r.agree = r.fusion_dual == r.discrete_dual;
    return r;
}

// F = {w_i f_ij} is a K-frame with K-dual G = {X_i^* ft_ij}.
template <typename Scalar>
KFramePair<Scalar> kframe_from_local(const FusionSystem<Scalar>& w, const LocalFrameSystem<Scalar>& locals,
                                     const Mat<Scalar>& x, const Mat<Scalar>& k, const Tolerance& tol = {},
                                     std::uint64_t seed = 0)
{
    if (locals.frames.size() != w.size() || x.rows() != w.coefficient_dim())
        throw InputError("kframe_from_local: shapes do not match the system");
    const double kn = double(spectral_norm(k));
    if (spectral_norm((synthesis(w) * x - k).eval()) > tol.accept(kn))
        throw InputError("kframe_from_local: X does not solve T_W X = K");
    const Index n = w.ambient_dim();
    KFramePair<Scalar> r;
    r.primal.vectors.resize(n, 0);
    r.dual.vectors.resize(x.cols(), 0);
    for (std::size_t i = 0; i < w.size(); ++i) {
        const Mat<Scalar> xi = w.subspace(i).basis() * x.middleRows(w.offset(i), w.subspace(i).dim());
        const Mat<Scalar> fi = Scalar(w.weight(i)) * locals.frames[i];
        const Mat<Scalar> gi = xi.adjoint() * locals.local_dual(i, tol);
        Mat<Scalar> fg(n, r.primal.vectors.cols() + fi.cols()), gg(x.cols(), r.dual.vectors.cols() + gi.cols());
        fg << r.primal.vectors, fi;
        gg << r.dual.vectors, gi;
        r.primal.vectors.swap(fg);
        r.dual.vectors.swap(gg);
    }
    const Mat<Scalar> recon = r.primal.vectors * r.dual.vectors.adjoint();
    r.residual = double(spectral_norm((recon - k).eval()));
    r.sampled_residual = sampled_residual(recon, k, 50, seed);
    r.pass = r.residual <= tol.accept(kn) && r.sampled_residual <= tol.accept(kn);
    return r;
}

} // namespace kfusion
