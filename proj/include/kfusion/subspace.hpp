// Closed subspaces of R^n held as orthonormal bases.
#pragma once

#include "kfusion/numerics.hpp"

#include <vector>

namespace kfusion {

template <typename Scalar = double>
class Subspace {
public:
    Subspace() = default;

    // Trusts the caller: columns must already be orthonormal.
    explicit Subspace(Mat<Scalar> orthonormal_basis) : n_(orthonormal_basis.rows()), basis_(std::move(orthonormal_basis)) {}

    static Subspace zero(Index n) { return Subspace(Mat<Scalar>(n, 0)); }
    static Subspace full(Index n) { return Subspace(Mat<Scalar>::Identity(n, n)); }

    // Span of the columns of m.
    template <typename Derived>
    static Subspace span(const Eigen::MatrixBase<Derived>& m, const Tolerance& tol = {}, double ref_scale = -1)
    {
        return Subspace(range_basis(m, tol, ref_scale));
    }

    static Subspace from_spanning(const std::vector<Vec<Scalar>>& vectors, const Tolerance& tol = {})
    {
        if (vectors.empty())
            throw InputError("subspace_from_spanning: empty spanning set");
        const Index n = vectors.front().size();
        Mat<Scalar> m(n, Index(vectors.size()));
        for (Index j = 0; j < m.cols(); ++j) {
            if (vectors[j].size() != n)
                throw InputError("subspace_from_spanning: vectors differ in length");
            m.col(j) = vectors[j];
        }
        return span(m, tol);
    }

    // m(V) for a linear map m; the cut is relative to the norm of m.
    template <typename Derived>
    Subspace image(const Eigen::MatrixBase<Derived>& m, const Tolerance& tol = {}) const
    {
        if (m.cols() != n_)
            throw InputError("Subspace::image: map does not act on this space");
        if (dim() == 0)
            return zero(m.rows());
        return span((m * basis_).eval(), tol, double(spectral_norm(m)));
    }

    Index ambient_dim() const { return n_; }
    Index dim() const { return basis_.cols(); }
    bool is_zero() const { return dim() == 0; }
    const Mat<Scalar>& basis() const { return basis_; }
    Mat<Scalar> projector() const { return basis_ * basis_.adjoint(); }

    // Rank of [this | other] against rank of this.
    bool contains(const Subspace& other, const Tolerance& tol = {}) const
    {
        check_same(other);
        if (other.dim() == 0)
            return true;
        Mat<Scalar> cat(n_, dim() + other.dim());
        cat << basis_, other.basis_;
        return numerical_rank(cat, tol) == dim();
    }

    bool equals(const Subspace& other, const Tolerance& tol = {}) const
    {
        return dim() == other.dim() && contains(other, tol) && other.contains(*this, tol);
    }

    Subspace intersect(const Subspace& other, const Tolerance& tol = {}) const
    {
        check_same(other);
        if (dim() == 0 || other.dim() == 0)
            return zero(n_);
        Mat<Scalar> cat(n_, dim() + other.dim());
        cat << basis_, -other.basis_;
        const Mat<Scalar> nb = null_basis(cat, tol);
        if (nb.cols() == 0)
            return zero(n_);
        return span((basis_ * nb.topRows(dim())).eval(), tol, 1.0);
    }

    Subspace sum(const Subspace& other, const Tolerance& tol = {}) const
    {
        check_same(other);
        Mat<Scalar> cat(n_, dim() + other.dim());
        cat << basis_, other.basis_;
        return span(cat, tol, 1.0);
    }

    Subspace orthogonal_complement(const Tolerance& tol = {}) const
    {
        if (dim() == 0)
            return full(n_);
        const Mat<Scalar> p = Mat<Scalar>::Identity(n_, n_) - projector();
        return span(p, tol, 1.0);
    }

    // Largest principal-angle sine between this and other, 1 if dims differ.
    double gap(const Subspace& other) const
    {
        check_same(other);
        return double(spectral_norm((projector() - other.projector()).eval()));
    }

private:
    void check_same(const Subspace& other) const
    {
        if (other.n_ != n_)
            throw InputError("Subspace: ambient dimensions differ");
    }

    Index n_ = 0;
    Mat<Scalar> basis_;
};

// Column-range inclusion R(l1) within R(l2), decided by comparing ranks.
template <typename Scalar>
struct RangeInclusion {
    bool included = true;
    double residual = 0;   // norm of the part of l1 outside R(l2)
    Vec<Scalar> witness;   // unit vector in R(l1) with the largest escape from R(l2)
};

template <typename Scalar>
RangeInclusion<Scalar> range_included(const Mat<Scalar>& l1, const Mat<Scalar>& l2, const Tolerance& tol = {})
{
    if (l1.rows() != l2.rows())
        throw InputError("range_included: row counts differ");
    const Index n = l1.rows();
    RangeInclusion<Scalar> out;
    out.witness = Vec<Scalar>::Zero(n);
    if (l1.cols() == 0)
        return out;
    LinearMap<Scalar> m2(l2, tol);
    const Mat<Scalar> u = m2.range();
    const Mat<Scalar> escape = l1 - u * (u.adjoint() * l1);
    out.residual = double(spectral_norm(escape));

    Mat<Scalar> cat(n, l1.cols() + l2.cols());
    cat << l2, l1;
    out.included = numerical_rank(cat, tol) == m2.rank();
    if (!out.included && out.residual > 0) {
        Svd<Scalar> e = svd(escape);
        const Vec<Scalar> f = l1 * e.v.col(0);
        out.witness = f / f.norm();
    }
    return out;
}

} // namespace kfusion
