// l^2-resolutions of K: operators theta_i and weights r_i with sum r_i^2 theta_i = K.
#pragma once

#include "kfusion/duality.hpp"

#include <string>
#include <vector>

namespace kfusion {

template <typename Scalar = double>
struct Resolution {
    std::vector<Mat<Scalar>> thetas;
    std::vector<double> weights;

    Mat<Scalar> sum() const
    {
        Mat<Scalar> s = Mat<Scalar>::Zero(thetas.at(0).rows(), thetas.at(0).cols());
        for (std::size_t i = 0; i < thetas.size(); ++i)
            s += Scalar(weights[i] * weights[i]) * thetas[i];
        return s;
    }

    // sum r_i^2 theta_i^* theta_i
    Mat<Scalar> gram() const
    {
        Mat<Scalar> g = Mat<Scalar>::Zero(thetas.at(0).cols(), thetas.at(0).cols());
        for (std::size_t i = 0; i < thetas.size(); ++i)
            g.noalias() += Scalar(weights[i] * weights[i]) * thetas[i].adjoint() * thetas[i];
        return g;
    }
};

struct ResolutionReport {
    bool pass = false;
    double residual = 0;
    double upper = 0;  // optimal B
    double lower = 0;  // largest A with A ||K f||^2 <= sum r_i^2 ||theta_i f||^2
};

template <typename Scalar>
ResolutionReport verify_resolution(const Resolution<Scalar>& r, const Mat<Scalar>& k, const Tolerance& tol = {})
{
    if (r.thetas.empty() || r.thetas.size() != r.weights.size())
        throw InputError("verify_resolution: need one weight per operator");
    for (std::size_t i = 0; i < r.thetas.size(); ++i)
        if (r.thetas[i].rows() != k.rows() || r.thetas[i].cols() != k.cols())
            throw InputError("verify_resolution: operator " + std::to_string(i) + " has the wrong shape");
    ResolutionReport out;
    out.residual = double(spectral_norm((r.sum() - k).eval()));
    out.pass = out.residual <= tol.accept(double(spectral_norm(k)));
    const Mat<Scalar> g = r.gram();
    out.upper = double(spectral_norm(g));
    out.lower = detail::inverse_or_inf(max_rayleigh(Mat<Scalar>(k.adjoint() * k), g, tol));
    return out;
}

// theta_i = X_i, weights sqrt(w_i): sum w_i X_i = T_W X = K.
template <typename Scalar>
Resolution<Scalar> resolution_from_x(const XwSolution<Scalar>& x)
{
    Resolution<Scalar> r;
    for (std::size_t i = 0; i < x.system.size(); ++i) {
        r.thetas.push_back(x.component(i));
        r.weights.push_back(std::sqrt(x.system.weight(i)));
    }
    return r;
}

// theta_i = pi_R(K) pi_{W_i} (S_W^{-1})^* K
template <typename Scalar>
Resolution<Scalar> resolution_b(const FusionSystem<Scalar>& w, const Mat<Scalar>& k, const Tolerance& tol = {})
{
    if (!verify_k_fusion(w, k, tol).pass)
        throw HypothesisError("resolution_b: W is not a K-fusion frame");
    const Mat<Scalar> pr = projector(LinearMap<Scalar>(k, tol).range());
    const Mat<Scalar> pk = sinv_on_range(w, k, tol).adjoint() * k;
    Resolution<Scalar> r;
    for (const auto& m : w.members()) {
        r.thetas.push_back(pr * m.subspace.projector() * pk);
        r.weights.push_back(m.weight);
    }
    return r;
}

// theta_i = S_W^{-1} pi_{S_W(R(K))} pi_{W_i} K
template <typename Scalar>
Resolution<Scalar> resolution_c(const FusionSystem<Scalar>& w, const Mat<Scalar>& k, const Tolerance& tol = {})
{
    if (!verify_k_fusion(w, k, tol).pass)
        throw HypothesisError("resolution_c: W is not a K-fusion frame");
    const Mat<Scalar> p = sinv_on_range(w, k, tol);
    Resolution<Scalar> r;
    for (const auto& m : w.members()) {
        r.thetas.push_back(p * m.subspace.projector() * k);
        r.weights.push_back(m.weight);
    }
    return r;
}

// W_i = closure of R(theta_i), weighted like the resolution.
template <typename Scalar>
TransformResult<Scalar> frame_from_resolution(const Resolution<Scalar>& r, const Mat<Scalar>& k,
                                              const Tolerance& tol = {})
{
    if (!verify_resolution(r, k, tol).pass)
        throw HypothesisError("frame_from_resolution: not a resolution of K");
    double scale = 0;
    for (const auto& t : r.thetas)
        scale = std::max(scale, double(spectral_norm(t)));
    TransformResult<Scalar> out;
    out.system = FusionSystem<Scalar>(k.rows());
    for (std::size_t i = 0; i < r.thetas.size(); ++i)
        out.system.add(Subspace<Scalar>::span(r.thetas[i], tol, scale), r.weights[i]);
    out.certificate = verify_k_fusion(out.system, k, tol);
    return out;
}

struct MinimalNormReport {
    bool hypothesis_ok = false;   // sum w_i theta_i = K
    double hypothesis_residual = 0;
    double min_margin_plain = 0;   // min over f of sum ||theta_i f||^2 - sum ||X_i f||^2
    double min_margin_shifted = 0; // same with w_i pi_{W_i} f subtracted inside
    double max_margin_plain = 0;
    double max_margin_shifted = 0;
    bool pass = false;
};

// X_w against operators theta_i into W_i on a seeded sample of f. The cross
// term of the shifted inequality only cancels when sum w_i theta_i = K.
template <typename Scalar>
MinimalNormReport minimal_norm_check(const FusionSystem<Scalar>& w, const Mat<Scalar>& k,
                                     const std::vector<Mat<Scalar>>& thetas, const Tolerance& tol = {},
                                     int samples = 100, std::uint64_t seed = 0)
{
    if (thetas.size() != w.size())
        throw InputError("minimal_norm_check: one operator per member required");
    for (std::size_t i = 0; i < w.size(); ++i) {
        const auto& t = thetas[i];
        const double tn = double(spectral_norm(t));
        if (t.rows() != w.ambient_dim() || t.cols() != k.cols())
            throw InputError("minimal_norm_check: operator " + std::to_string(i) + " has the wrong shape");
        if (spectral_norm(Mat<Scalar>(t - w.subspace(i).projector() * t)) > tol.accept(tn))
            throw InputError("minimal_norm_check: operator " + std::to_string(i) + " leaves W_" +
                             std::to_string(i));
    }
    const auto xw = x_w(w, k, tol);
    MinimalNormReport r;
    Mat<Scalar> s = Mat<Scalar>::Zero(k.rows(), k.cols());
    for (std::size_t i = 0; i < w.size(); ++i)
        s += Scalar(w.weight(i)) * thetas[i];
    const double kn = double(spectral_norm(k));
    r.hypothesis_residual = double(spectral_norm((s - k).eval()));
    r.hypothesis_ok = r.hypothesis_residual <= tol.accept(kn);

    Rng rng(seed);
    r.min_margin_plain = r.min_margin_shifted = std::numeric_limits<double>::infinity();
    r.max_margin_plain = r.max_margin_shifted = -std::numeric_limits<double>::infinity();
    bool ok = true;
    for (int t = 0; t < samples; ++t) {
        const Vec<Scalar> f = gaussian<Scalar>(k.cols(), 1, rng);
        double xp = 0, tp = 0, xs = 0, ts = 0;
        for (std::size_t i = 0; i < w.size(); ++i) {
            const Vec<Scalar> wf = Scalar(w.weight(i)) * (w.subspace(i).projector() * f);
            const Vec<Scalar> xf = xw.component(i) * f;
            const Vec<Scalar> tf = thetas[i] * f;
            xp += double(xf.squaredNorm());
            tp += double(tf.squaredNorm());
            xs += double((xf - wf).squaredNorm());
            ts += double((tf - wf).squaredNorm());
        }
        const double mp = tp - xp, ms = ts - xs;
        r.min_margin_plain = std::min(r.min_margin_plain, mp);
        r.max_margin_plain = std::max(r.max_margin_plain, mp);
        r.min_margin_shifted = std::min(r.min_margin_shifted, ms);
        r.max_margin_shifted = std::max(r.max_margin_shifted, ms);
        if (mp < -tol.eq_rel * tp - tol.eq_abs || ms < -tol.eq_rel * ts - tol.eq_abs)
            ok = false;
    }
    r.pass = ok;
    return r;
}

template <typename Scalar = double>
struct PinvReport {
    BlockVector<Scalar> blocks;  // X_w K^dagger f
    Vec<Scalar> oracle;          // pinv(pi_R(K) T_W) f, flattened
    double residual = 0;         // unweighted blocks against the oracle
    double weighted_residual = 0;  // blocks scaled by w_i against the oracle
    bool projected = false;      // f had a part outside R(K)
    bool pass = false;
};

// On f in R(K) the minimal-norm solution of pi_R T_W c = f is read off X_w
// at K^dagger f. The independent route applies pinv(pi_R T_W) directly.
template <typename Scalar>
PinvReport<Scalar> pinv_via_xw(const FusionSystem<Scalar>& w, const Mat<Scalar>& k, const Vec<Scalar>& f_in,
                               const Tolerance& tol = {})
{
    if (f_in.size() != w.ambient_dim())
        throw InputError("pinv_via_xw: vector has the wrong length");
    const auto xw = x_w(w, k, tol);
    LinearMap<Scalar> km(k, tol);
    const Mat<Scalar> pr = projector(km.range());
    PinvReport<Scalar> r;
    const Vec<Scalar> f = pr * f_in;
    r.projected = (f - f_in).norm() > tol.accept(double(f_in.norm()));
    r.blocks = xw.apply(Vec<Scalar>(km.pinv() * f));
    r.oracle = pinv(Mat<Scalar>(pr * synthesis(w)), tol) * f;

    Vec<Scalar> weighted = r.blocks.flat();
    for (std::size_t i = 0; i < w.size(); ++i)
        weighted.segment(w.offset(i), w.subspace(i).dim()) *= Scalar(w.weight(i));
    r.residual = double((r.blocks.flat() - r.oracle).norm());
    r.weighted_residual = double((weighted - r.oracle).norm());
    r.pass = r.residual <= tol.eq_rel * std::max(1.0, double(r.oracle.norm()));
    return r;
}

} // namespace kfusion
