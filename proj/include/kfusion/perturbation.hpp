// Stability of K-fusion frames and their duals under perturbation.
#pragma once

#include "kfusion/duality.hpp"

#include <limits>
#include <optional>
#include <string>

namespace kfusion {

namespace detail {

template <typename Scalar>
double weight_norm(const FusionSystem<Scalar>& w)
{
    double s = 0;
    for (const auto& m : w.members())
        s += m.weight * m.weight;
    return std::sqrt(s);
}

template <typename Scalar>
void check_pair(const FusionSystem<Scalar>& w, const FusionSystem<Scalar>& z)
{
    if (w.size() != z.size() || w.ambient_dim() != z.ambient_dim())
        throw InputError("perturbation: W and Z must have the same member count and ambient space");
}

} // namespace detail

enum class Decision { certificate, falsified, undecided };

template <typename Scalar = double>
struct PerturbationReport {
    double lambda1 = 0, lambda2 = 0, epsilon = 0;
    double epsilon_threshold = 0;  // (1 - l1) sqrt(A) / (||K|| (sum w_i^2)^{1/2})
    bool below_threshold = false;
    Decision decided_by = Decision::undecided;
    bool hypothesis_holds = false;
    FrameBounds predicted;
    FrameBounds actual;
    bool actual_is_k_fusion = false;
    bool sandwich = false;  // actual bounds dominate the predictions
    bool certified = false;
    std::optional<Vec<Scalar>> falsified_witness;
    std::optional<std::size_t> falsified_index;
};

// Hypothesis, for every i and f:
//   ||(w_i pi_{W_i} - z_i pi_{Z_i}) f|| <= l1 ||w_i pi_{W_i} f|| + l2 ||z_i pi_{Z_i} f|| + eps w_i ||K^* f||.
// Sufficient: D_i^* D_i <= l1^2 w_i^2 pi_W + l2^2 z_i^2 pi_Z + eps^2 w_i^2 K K^*, since the
// square of a sum of nonnegative terms dominates the sum of squares. If that
// fails, random unit f are tried per index looking for a violation.
template <typename Scalar>
PerturbationReport<Scalar> certify_perturbation(const FusionSystem<Scalar>& w, const FusionSystem<Scalar>& z,
                                                const Mat<Scalar>& k, double lambda1, double lambda2,
                                                double epsilon, const Tolerance& tol = {}, std::uint64_t seed = 0,
                                                int samples = 10000)
{
    detail::check_pair(w, z);
    if (!(lambda1 > 0 && lambda1 < 1 && lambda2 > 0 && lambda2 < 1))
        throw InputError("certify_perturbation: lambda1 and lambda2 must lie in (0, 1)");
    if (!(epsilon > 0))
        throw InputError("certify_perturbation: epsilon must be positive");
    const auto wc = verify_k_fusion(w, k, tol);
    if (!wc.pass)
        throw HypothesisError("certify_perturbation: W is not a K-fusion frame");

    PerturbationReport<Scalar> r;
    r.lambda1 = lambda1;
    r.lambda2 = lambda2;
    r.epsilon = epsilon;
    const double kn = double(spectral_norm(k));
    const double wn = detail::weight_norm(w);
    const double a = wc.bounds.lower, b = wc.bounds.upper;
    r.epsilon_threshold = kn > 0 ? (1 - lambda1) * std::sqrt(a) / (kn * wn) : std::numeric_limits<double>::infinity();
    r.below_threshold = epsilon < r.epsilon_threshold;

    const Mat<Scalar> kk = k * k.adjoint();
    std::vector<Mat<Scalar>> d(w.size()), pw(w.size()), pz(w.size());
    bool sufficient = true;
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double wi = w.weight(i), zi = z.weight(i);
        pw[i] = w.subspace(i).projector();
        pz[i] = z.subspace(i).projector();
        d[i] = Scalar(wi) * pw[i] - Scalar(zi) * pz[i];
        const Mat<Scalar> rhs = Scalar(lambda1 * lambda1 * wi * wi) * pw[i] +
                                Scalar(lambda2 * lambda2 * zi * zi) * pz[i] +
                                Scalar(epsilon * epsilon * wi * wi) * kk;
        if (max_rayleigh(Mat<Scalar>(d[i].adjoint() * d[i]), rhs, tol) > 1 + tol.eq_rel)
            sufficient = false;
    }
    if (sufficient) {
        r.decided_by = Decision::certificate;
        r.hypothesis_holds = true;
    } else {
        Rng rng(seed);
        for (std::size_t i = 0; i < w.size() && !r.falsified_witness; ++i) {
            const double wi = w.weight(i), zi = z.weight(i);
            for (int s = 0; s < samples; ++s) {
                const Vec<Scalar> f = unit_vector<Scalar>(w.ambient_dim(), rng);
                const double lhs = double((d[i] * f).norm());
                const double rhs = lambda1 * wi * double((pw[i] * f).norm()) +
                                   lambda2 * zi * double((pz[i] * f).norm()) +
                                   epsilon * wi * double((k.adjoint() * f).norm());
                if (lhs > rhs * (1 + tol.eq_rel) + tol.eq_abs) {
                    r.falsified_witness = f;
                    r.falsified_index = i;
                    break;
                }
            }
        }
        r.decided_by = r.falsified_witness ? Decision::falsified : Decision::undecided;
    }

    const double lo_base = std::max(0.0, (1 - lambda1) * std::sqrt(a) - epsilon * kn * wn);
    const double hi_base = (1 + lambda1) * std::sqrt(b) + epsilon * kn * wn;
    r.predicted = {lo_base * lo_base / ((1 + lambda2) * (1 + lambda2)), hi_base * hi_base / ((1 - lambda2) * (1 - lambda2)),
                   false};
    const auto zc = verify_k_fusion(z, k, tol);
    r.actual_is_k_fusion = zc.pass;
    r.actual = zc.bounds;
    r.sandwich = zc.pass && r.actual.lower >= r.predicted.lower * (1 - tol.eq_rel) - tol.eq_abs &&
                 r.actual.upper <= r.predicted.upper * (1 + tol.eq_rel) + tol.eq_abs;
    r.certified = r.hypothesis_holds && r.below_threshold;
    return r;
}

// Smallest eps with ||(T_W^* - T_Z^*) f|| <= eps ||K^* f||, both analysis
// maps taken in ambient coordinates {w_i pi_{W_i} f} and {z_i pi_{Z_i} f}.
template <typename Scalar>
double analysis_epsilon(const FusionSystem<Scalar>& w, const FusionSystem<Scalar>& z, const Mat<Scalar>& k,
                        const Tolerance& tol = {})
{
    detail::check_pair(w, z);
    const Index n = w.ambient_dim();
    Mat<Scalar> g = Mat<Scalar>::Zero(n, n);
    for (std::size_t i = 0; i < w.size(); ++i) {
        const Mat<Scalar> di = Scalar(w.weight(i)) * w.subspace(i).projector() -
                               Scalar(z.weight(i)) * z.subspace(i).projector();
        g.noalias() += di.adjoint() * di;
    }
    return std::sqrt(max_rayleigh(g, Mat<Scalar>(k * k.adjoint()), tol));
}

struct PerturbedBounds {
    FrameBounds predicted;  // ((sqrt A - eps)^2, (sqrt B + eps ||K||)^2)
    FrameBounds actual;
    bool actual_is_k_fusion = false;
    bool dominates = false;
};

template <typename Scalar>
PerturbedBounds perturbed_bounds(const FusionSystem<Scalar>& w, const FusionSystem<Scalar>& z, const Mat<Scalar>& k,
                                 double epsilon, const Tolerance& tol = {})
{
    detail::check_pair(w, z);
    const auto wc = verify_k_fusion(w, k, tol);
    if (!wc.pass)
        throw HypothesisError("perturbed_bounds: W is not a K-fusion frame");
    const double sa = std::sqrt(wc.bounds.lower), sb = std::sqrt(wc.bounds.upper);
    if (!(epsilon >= 0) || epsilon >= sa)
        throw InputError("perturbed_bounds: epsilon must lie in [0, sqrt(A))");
    const double kn = double(spectral_norm(k));
    PerturbedBounds r;
    r.predicted = {(sa - epsilon) * (sa - epsilon), (sb + epsilon * kn) * (sb + epsilon * kn), false};
    const auto zc = verify_k_fusion(z, k, tol);
    r.actual = zc.bounds;
    r.actual_is_k_fusion = zc.pass;
    r.dominates = zc.pass && r.actual.lower >= r.predicted.lower * (1 - tol.eq_rel) - tol.eq_abs &&
                  r.actual.upper <= r.predicted.upper * (1 + tol.eq_rel) + tol.eq_abs;
    return r;
}

struct ApproxDualReport {
    double norm = 0;
    bool pass = false;  // norm < 1
};

// ||K - sum z_i v_i pi_R(K) pi_{Z_i} (S_Z^{-1})^* K pi_{V_i}||: the reconstruction
// through Z with the dual V, in the form the stability argument bounds.
template <typename Scalar>
ApproxDualReport approximate_dual_norm(const FusionSystem<Scalar>& z, const FusionSystem<Scalar>& v,
                                       const Mat<Scalar>& k, const Tolerance& tol = {})
{
    if (z.size() != v.size())
        throw InputError("approximate_dual_norm: member counts differ");
    ApproxDualReport r;
    r.norm = double(spectral_norm((k - k_dual_reconstruction(z, v, k, tol)).eval()));
    r.pass = r.norm < 1;
    return r;
}

struct ThresholdReport {
    double sqrt_a = 0;
    double deviation = 0;     // ||((S_W^{-1})^* - (S_Z^{-1})^*) K||
    double z_norm = 0;        // ||(S_Z^{-1})^* K||
    double k_norm = 0;
    double numerator = 0;     // 1/2 - deviation^2 B
    double second = 0;        // numerator / (z_norm^2 k_norm^2)
    double threshold = 0;     // min(sqrt A, second)
    bool vacuous = false;     // numerator <= 0
};

template <typename Scalar>
ThresholdReport epsilon_threshold(const FusionSystem<Scalar>& w, const FusionSystem<Scalar>& z, const Mat<Scalar>& k,
                                  const Tolerance& tol = {})
{
    detail::check_pair(w, z);
    const auto wc = verify_k_fusion(w, k, tol);
    if (!wc.pass || !verify_k_fusion(z, k, tol).pass)
        throw HypothesisError("epsilon_threshold: W and Z must both be K-fusion frames");
    const Mat<Scalar> pw = sinv_on_range(w, k, tol);
    const Mat<Scalar> pz = sinv_on_range(z, k, tol);
    ThresholdReport r;
    r.sqrt_a = std::sqrt(wc.bounds.lower);
    r.deviation = double(spectral_norm(Mat<Scalar>((pw - pz).adjoint() * k)));
    r.z_norm = double(spectral_norm(Mat<Scalar>(pz.adjoint() * k)));
    r.k_norm = double(spectral_norm(k));
    r.numerator = 0.5 - r.deviation * r.deviation * wc.bounds.upper;
    const double den = r.z_norm * r.z_norm * r.k_norm * r.k_norm;
    r.second = den > 0 ? r.numerator / den : std::numeric_limits<double>::infinity();
    r.vacuous = r.numerator <= 0;
    r.threshold = std::min(r.sqrt_a, r.second);
    return r;
}

} // namespace kfusion
