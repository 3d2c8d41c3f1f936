// Douglas factorization: minimal X with L2 X = L1, and X_w for T_W X = K.
#pragma once

#include "kfusion/frames.hpp"

namespace kfusion {

template <typename Scalar = double>
struct DouglasSolution {
    Mat<Scalar> x;
    double norm_sq = 0;
    double alpha_inf = 0;        // inf{a : L1 L1^* <= a L2 L2^*}
    bool nullspace_match = false;  // N(X) = N(L1)
    bool range_containment = false;  // R(X) within R(L2^*)
    double residual = 0;         // ||L2 X - L1||
};

template <typename Scalar>
DouglasSolution<Scalar> douglas_solve(const Mat<Scalar>& l1, const Mat<Scalar>& l2, const Tolerance& tol = {})
{
    const auto inc = range_included<Scalar>(l1, l2, tol);
    if (!inc.included)
        throw HypothesisError("douglas_solve: R(L1) is not contained in R(L2)");
    DouglasSolution<Scalar> d;
    d.x = pinv(l2, tol) * l1;
    const double n1 = double(spectral_norm(l1));
    d.residual = double(spectral_norm((l2 * d.x - l1).eval()));
    if (d.residual > tol.eq_rel * n1 + tol.eq_abs)
        throw NumericalError("douglas_solve: L2 X = L1 not reproduced");
    const double xn = double(spectral_norm(d.x));
    d.norm_sq = xn * xn;
    d.alpha_inf = max_rayleigh((l1 * l1.adjoint()).eval(), (l2 * l2.adjoint()).eval(), tol);

    const Subspace<Scalar> n_l1(null_basis(l1, tol));
    const Subspace<Scalar> n_x(null_basis(d.x, tol));
    d.nullspace_match = n_l1.equals(n_x, tol);
    d.range_containment = range_included<Scalar>(d.x, l2.adjoint(), tol).included;
    return d;
}

// The minimal solution of T_W X = K, with its block structure.
template <typename Scalar = double>
struct XwSolution {
    FusionSystem<Scalar> system;
    DouglasSolution<Scalar> douglas;

    const Mat<Scalar>& matrix() const { return douglas.x; }

    // Rows of X_w belonging to member i: coefficients in the basis of W_i.
    Mat<Scalar> block(std::size_t i) const
    {
        return douglas.x.middleRows(system.offset(i), system.subspace(i).dim());
    }

    // X_i as an ambient operator, f -> (X_w f)_i in W_i.
    Mat<Scalar> component(std::size_t i) const { return system.subspace(i).basis() * block(i); }

    BlockVector<Scalar> apply(const Vec<Scalar>& f) const { return BlockVector<Scalar>::split(system, douglas.x * f); }
};

template <typename Scalar>
XwSolution<Scalar> x_w(const FusionSystem<Scalar>& w, const Mat<Scalar>& k, const Tolerance& tol = {})
{
    if (!verify_k_fusion(w, k, tol).pass)
        throw HypothesisError("x_w: W is not a K-fusion frame");
    return {w, douglas_solve<Scalar>(k, synthesis(w), tol)};
}

} // namespace kfusion
