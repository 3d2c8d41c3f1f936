// K-fusion frame verification, optimal bounds and the family transforms.
#pragma once

#include "kfusion/fusion_system.hpp"

#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace kfusion {

struct FrameBounds {
    double lower = 0;
    double upper = 0;
    bool optimal = false;
};

template <typename Scalar = double>
struct FrameCertificate {
    bool pass = false;
    FrameBounds bounds;
    double lower_pencil = 0;  // 1 / max_rayleigh(K K^*, S_W)
    double lower_xw = 0;      // ||pinv(T_W) K||^-2
    bool routes_agree = true;
    double residual = 0;      // part of R(K) outside R(T_W)
    Vec<Scalar> witness;      // f in R(K) not reached by T_W, when failing
    std::vector<std::string> notes;
};

namespace detail {

template <typename Scalar>
void note_zero_members(const FusionSystem<Scalar>& w, std::vector<std::string>& notes)
{
    for (std::size_t i = 0; i < w.size(); ++i)
        if (w.subspace(i).is_zero())
            notes.push_back("member " + std::to_string(i) + " is the zero subspace and was skipped");
}

inline double inverse_or_inf(double x)
{
    return x > 0 ? 1 / x : std::numeric_limits<double>::infinity();
}

inline bool close_rel(double a, double b, double rel)
{
    if (std::isinf(a) || std::isinf(b))
        return a == b;
    return std::abs(a - b) <= rel * std::max({1.0, std::abs(a), std::abs(b)});
}

} // namespace detail

// Optimal A and B with A ||K^* f||^2 <= sum w_i^2 ||pi_i f||^2 <= B ||f||^2.
// The lower bound is computed from the pencil and from the minimal solution of
// T_W X = K; they must agree. For K = 0 every A works and lower is +inf.
template <typename Scalar>
FrameCertificate<Scalar> verify_k_fusion(const FusionSystem<Scalar>& w, const Mat<Scalar>& k, const Tolerance& tol = {})
{
    if (k.rows() != w.ambient_dim())
        throw InputError("verify_k_fusion: K has " + std::to_string(k.rows()) + " rows, system lives in dimension " +
                         std::to_string(w.ambient_dim()));
    FrameCertificate<Scalar> c;
    detail::note_zero_members(w, c.notes);
    c.witness = Vec<Scalar>::Zero(w.ambient_dim());

    const Mat<Scalar> t = synthesis(w);
    const Mat<Scalar> s = t * t.adjoint();
    c.bounds.upper = double(spectral_norm(s));

    const auto inc = range_included<Scalar>(k, t, tol);
    c.residual = inc.residual;
    if (!inc.included) {
        c.pass = false;
        c.witness = inc.witness;
        c.notes.push_back("R(K) is not contained in R(T_W)");
        return c;
    }

    LinearMap<Scalar> tm(t, tol);
    const double xnorm = double(spectral_norm((tm.pinv() * k).eval()));
    c.lower_xw = detail::inverse_or_inf(xnorm * xnorm);
    c.lower_pencil = detail::inverse_or_inf(max_rayleigh((k * k.adjoint()).eval(), s, tol));
    c.routes_agree = detail::close_rel(c.lower_pencil, c.lower_xw, tol.eq_rel);
    if (!c.routes_agree)
        c.notes.push_back("pencil and X_w lower bounds disagree");
    c.bounds.lower = c.lower_pencil;
    c.bounds.optimal = true;
    c.pass = std::isfinite(c.bounds.lower) ? c.bounds.lower > 0 : true;
    if (std::isinf(c.bounds.lower))
        c.notes.push_back("K = 0: every lower bound is admissible");
    return c;
}

// Fusion frame for the subspace M: bounds of <S_W f, f> / ||f||^2 over f in M.
template <typename Scalar>
FrameCertificate<Scalar> verify_fusion_on(const FusionSystem<Scalar>& w, const Subspace<Scalar>& m,
                                          const Tolerance& tol = {})
{
    FrameCertificate<Scalar> c;
    detail::note_zero_members(w, c.notes);
    c.witness = Vec<Scalar>::Zero(w.ambient_dim());
    if (m.dim() == 0) {
        c.pass = true;
        c.bounds.lower = std::numeric_limits<double>::infinity();
        return c;
    }
    const Mat<Scalar> r = m.basis().adjoint() * frame_operator(w) * m.basis();
    Eigen::SelfAdjointEigenSolver<Mat<Scalar>> eig((r + r.adjoint()) / Scalar(2));
    const auto& lam = eig.eigenvalues();
    const double lo = std::max(0.0, double(lam(0)));
    const double hi = double(lam(lam.size() - 1));
    c.bounds = {lo, hi, true};
    c.lower_pencil = c.lower_xw = lo;
    c.pass = hi > 0 && lo > tol.rank_rel * hi;
    if (!c.pass) {
        c.witness = m.basis() * eig.eigenvectors().col(0);
        c.notes.push_back("some direction of M is not seen by the family");
    }
    return c;
}

// No member meets the span of the others.
template <typename Scalar>
bool is_minimal(const FusionSystem<Scalar>& w, const Tolerance& tol = {})
{
    const Index n = w.ambient_dim();
    for (std::size_t i = 0; i < w.size(); ++i) {
        const auto& wi = w.subspace(i);
        if (wi.is_zero())
            continue;
        Mat<Scalar> others(n, 0);
        for (std::size_t j = 0; j < w.size(); ++j) {
            if (j == i)
                continue;
            Mat<Scalar> grown(n, others.cols() + w.subspace(j).dim());
            grown << others, w.subspace(j).basis();
            others.swap(grown);
        }
        Mat<Scalar> cat(n, wi.dim() + others.cols());
        cat << wi.basis(), others;
        if (numerical_rank(cat, tol) != wi.dim() + numerical_rank(others, tol))
            return false;
    }
    return true;
}

template <typename Scalar = double>
struct Removal {
    std::size_t index = 0;
    bool still_k_fusion = false;
    FrameBounds bounds;
};

template <typename Scalar = double>
struct ExactnessReport {
    bool exact = true;
    std::vector<Removal<Scalar>> removals;
};

template <typename Scalar>
ExactnessReport<Scalar> is_exact(const FusionSystem<Scalar>& w, const Mat<Scalar>& k, const Tolerance& tol = {})
{
    if (!verify_k_fusion(w, k, tol).pass)
        throw HypothesisError("is_exact: W is not a K-fusion frame");
    ExactnessReport<Scalar> r;
    for (std::size_t j = 0; j < w.size(); ++j) {
        const auto c = verify_k_fusion(w.without(j), k, tol);
        r.removals.push_back({j, c.pass, c.bounds});
        if (c.pass)
            r.exact = false;
    }
    return r;
}

template <typename Scalar>
FusionSystem<Scalar> map_family(const FusionSystem<Scalar>& w, const Mat<Scalar>& m, const Tolerance& tol = {})
{
    FusionSystem<Scalar> out(m.rows());
    for (const auto& mem : w.members())
        out.add(mem.subspace.image(m, tol), mem.weight);
    return out;
}

template <typename Scalar = double>
struct TransformResult {
    FusionSystem<Scalar> system;
    FrameCertificate<Scalar> certificate;
};

// {K^dagger W_i}, a fusion frame for R(K^*).
template <typename Scalar>
TransformResult<Scalar> transform_kdag(const FusionSystem<Scalar>& w, const Mat<Scalar>& k, const Tolerance& tol = {})
{
    LinearMap<Scalar> km(k, tol);
    if (km.rank() == 0)
        throw InputError("transform_kdag: K = 0");
    if (k.rows() != k.cols() || k.rows() != w.ambient_dim())
        throw InputError("transform_kdag: K must be a square operator on the ambient space");
    TransformResult<Scalar> r;
    r.system = map_family(w, km.pinv(), tol);
    r.certificate = verify_fusion_on(r.system, Subspace<Scalar>(km.corange()), tol);
    return r;
}

// The matrix realizing S_W^{-1} restricted to S_W(R(K)): pinv(S_W pi_R(K)).
template <typename Scalar>
Mat<Scalar> sinv_on_range(const FusionSystem<Scalar>& w, const Mat<Scalar>& k, const Tolerance& tol = {})
{
    const Mat<Scalar> pr = projector(LinearMap<Scalar>(k, tol).range());
    return pinv((frame_operator(w) * pr).eval(), tol);
}

// {S_W^{-1} pi_{S_W(R(K))} W_i}, a fusion frame for R(K).
template <typename Scalar>
TransformResult<Scalar> transform_sinv(const FusionSystem<Scalar>& w, const Mat<Scalar>& k, const Tolerance& tol = {})
{
    if (!verify_k_fusion(w, k, tol).pass)
        throw HypothesisError("transform_sinv: W is not a K-fusion frame");
    TransformResult<Scalar> r;
    r.system = map_family(w, sinv_on_range(w, k, tol), tol);
    r.certificate = verify_fusion_on(r.system, Subspace<Scalar>(LinearMap<Scalar>(k, tol).range()), tol);
    return r;
}

template <typename Scalar = double>
struct QTransformResult {
    FusionSystem<Scalar> system;
    FrameCertificate<Scalar> qk;            // QW as a QK-fusion frame
    bool commuting = false;                 // ||KQ - QK|| small
    std::optional<FrameCertificate<Scalar>> k;  // QW as a K-fusion frame, commuting case
};

template <typename Scalar>
QTransformResult<Scalar> transform_q(const FusionSystem<Scalar>& w, const Mat<Scalar>& q, const Mat<Scalar>& k,
                                     const Tolerance& tol = {})
{
    const Index n = w.ambient_dim();
    if (q.rows() != n || q.cols() != n || numerical_rank(q, tol) != n)
        throw InputError("transform_q: Q must be invertible on the ambient space");
    QTransformResult<Scalar> r;
    r.system = map_family(w, q, tol);
    r.qk = verify_k_fusion(r.system, (q * k).eval(), tol);
    const double kq = double(spectral_norm((k * q - q * k).eval()));
    r.commuting = kq <= tol.accept(double(spectral_norm(k)) * double(spectral_norm(q)));
    if (r.commuting)
        r.k = verify_k_fusion(r.system, k, tol);
    return r;
}

template <typename Scalar = double>
struct WeakenResult {
    bool pass = false;
    FrameBounds bounds;       // optimal Q-fusion bounds of W
    double lambda_sq = 0;     // inf{l : Q Q^* <= l K K^*}
    double predicted_lower = 0;
    Vec<Scalar> witness;
};

// R(Q) within R(K) turns a K-fusion frame into a Q-fusion frame.
template <typename Scalar>
WeakenResult<Scalar> weaken_to_q(const FusionSystem<Scalar>& w, const Mat<Scalar>& k, const Mat<Scalar>& q,
                                 const Tolerance& tol = {})
{
    WeakenResult<Scalar> r;
    const auto inc = range_included<Scalar>(q, k, tol);
    r.witness = inc.witness;
    if (!inc.included)
        return r;
    const auto base = verify_k_fusion(w, k, tol);
    if (!base.pass)
        throw HypothesisError("weaken_to_q: W is not a K-fusion frame");
    const auto qc = verify_k_fusion(w, q, tol);
    r.pass = qc.pass;
    r.bounds = qc.bounds;
    r.lambda_sq = max_rayleigh((q * q.adjoint()).eval(), (k * k.adjoint()).eval(), tol);
    r.predicted_lower = r.lambda_sq > 0 ? base.bounds.lower / r.lambda_sq : std::numeric_limits<double>::infinity();
    return r;
}

enum class ImageMode { direct, intersect };

template <typename Scalar = double>
struct ImageResult {
    FusionSystem<Scalar> source;            // the family K is applied to
    FrameCertificate<Scalar> hypothesis;    // source as a fusion frame for R(K^*)
    FusionSystem<Scalar> system;            // {K W_i}
    FrameCertificate<Scalar> certificate;   // K-fusion certificate of the image
};

// {K W_i}. In intersect mode each W_i is first cut down to W_i and R(K^*);
// the cut family is reported as is, it is not assumed to stay a frame.
template <typename Scalar>
ImageResult<Scalar> k_image_frame(const FusionSystem<Scalar>& w, const Mat<Scalar>& k,
                                  ImageMode mode = ImageMode::direct, const Tolerance& tol = {})
{
    const Index n = w.ambient_dim();
    if (k.rows() != n || k.cols() != n)
        throw InputError("k_image_frame: K must be a square operator on the ambient space");
    const Subspace<Scalar> rks(LinearMap<Scalar>(k, tol).corange());
    ImageResult<Scalar> r;
    if (mode == ImageMode::direct) {
        for (std::size_t i = 0; i < w.size(); ++i)
            if (!rks.contains(w.subspace(i), tol))
                throw HypothesisError("k_image_frame: member " + std::to_string(i) + " is not inside R(K^*)");
        r.source = w;
        r.hypothesis = verify_fusion_on(w, rks, tol);
        if (!r.hypothesis.pass)
            throw HypothesisError("k_image_frame: family is not a fusion frame for R(K^*)");
    } else {
        if (!verify_k_fusion(w, Mat<Scalar>::Identity(n, n).eval(), tol).pass)
            throw HypothesisError("k_image_frame: family is not a fusion frame");
        r.source = FusionSystem<Scalar>(n);
        for (const auto& m : w.members())
            r.source.add(m.subspace.intersect(rks, tol), m.weight);
        r.hypothesis = verify_fusion_on(r.source, rks, tol);
    }
    r.system = map_family(r.source, k, tol);
    r.certificate = verify_k_fusion(r.system, k, tol);
    return r;
}

// Discrete frame: the vectors are the columns.
template <typename Scalar = double>
struct KFrame {
    Mat<Scalar> vectors;

    Index ambient_dim() const { return vectors.rows(); }
    Index size() const { return vectors.cols(); }
    Mat<Scalar> frame_operator() const { return vectors * vectors.adjoint(); }
};

template <typename Scalar>
FrameCertificate<Scalar> verify_k_frame(const KFrame<Scalar>& f, const Mat<Scalar>& k, const Tolerance& tol = {})
{
    if (k.rows() != f.ambient_dim())
        throw InputError("verify_k_frame: dimension mismatch");
    FrameCertificate<Scalar> c;
    c.witness = Vec<Scalar>::Zero(f.ambient_dim());
    const Mat<Scalar> s = f.frame_operator();
    c.bounds.upper = double(spectral_norm(s));
    const double ray = max_rayleigh((k * k.adjoint()).eval(), s, tol);
    if (std::isinf(ray)) {
        // f orthogonal to every vector yet K^* f != 0
        const Mat<Scalar> nb = LinearMap<Scalar>(f.vectors, tol).conull();
        const Svd<Scalar> e = svd((k.adjoint() * nb).eval());
        c.witness = nb * e.v.col(0);
        c.residual = double(e.singular_values(0));
        c.notes.push_back("some f with K^* f != 0 is orthogonal to the whole family");
        return c;
    }
    c.bounds.lower = c.lower_pencil = detail::inverse_or_inf(ray);
    c.bounds.optimal = true;
    c.pass = true;
    return c;
}

} // namespace kfusion
