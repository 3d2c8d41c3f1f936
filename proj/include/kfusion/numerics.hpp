// Dense kernel: SVD, rank, pseudo-inverse, norms and the generalized
// Rayleigh quotient. Every rank decision in the library goes through here.
#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace kfusion {

template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using MatXd = Mat<double>;
using VecXd = Vec<double>;
using Index = Eigen::Index;

template <typename Scalar>
using RealOf = typename Eigen::NumTraits<Scalar>::Real;

// Bad shapes, nonpositive weights, malformed files.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Non-finite values or a factorization that did not converge.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A theorem's hypothesis was checked and does not hold.
class HypothesisError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Tolerance {
    double rank_rel = 1e-10;
    double eq_abs = 1e-9;
    double eq_rel = 1e-8;

    void validate() const
    {
        if (!(rank_rel > 0 && rank_rel < 1))
            throw InputError("tolerance: rank_rel must lie in (0, 1)");
        if (!(eq_abs > 0) || !(eq_rel > 0))
            throw InputError("tolerance: eq_abs and eq_rel must be positive");
    }

    // One knob for the CLI; keeps the default ratios between the three.
    static Tolerance from_scale(double x)
    {
        Tolerance t{x / 10, x, 10 * x};
        t.validate();
        return t;
    }

    // Residual acceptance used by every exact identity check.
    double accept(double scale) const { return eq_abs * (1 + scale); }
};

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& m)
{
    return m.allFinite();
}

template <typename Scalar>
struct Svd {
    Mat<Scalar> u;
    Vec<RealOf<Scalar>> singular_values;
    Mat<Scalar> v;
};

template <typename Derived>
Svd<typename Derived::Scalar> svd(const Eigen::MatrixBase<Derived>& m)
{
    using Scalar = typename Derived::Scalar;
    if (!all_finite(m))
        throw NumericalError("svd: input contains NaN or Inf");
    Svd<Scalar> out;
    if (m.rows() == 0 || m.cols() == 0) {
        out.u = Mat<Scalar>::Identity(m.rows(), m.rows());
        out.v = Mat<Scalar>::Identity(m.cols(), m.cols());
        out.singular_values.resize(0);
        return out;
    }
    Eigen::JacobiSVD<Mat<Scalar>> solver(m.eval(), Eigen::ComputeFullU | Eigen::ComputeFullV);
    if (solver.info() != Eigen::Success)
        throw NumericalError("svd: iteration did not converge");
    out.u = solver.matrixU();
    out.v = solver.matrixV();
    out.singular_values = solver.singularValues();
    if (!all_finite(out.u) || !all_finite(out.v) || !all_finite(out.singular_values))
        throw NumericalError("svd: non-finite factors");
    return out;
}

template <typename Real>
Index rank_from_singular_values(const Vec<Real>& s, double rank_rel)
{
    if (s.size() == 0 || s(0) <= 0)
        return 0;
    const Real cut = Real(rank_rel) * s(0);
    Index r = 0;
    while (r < s.size() && s(r) > cut)
        ++r;
    return r;
}

// A matrix together with its SVD and the single rank decision made on it.
template <typename Scalar>
class LinearMap {
public:
    using Real = RealOf<Scalar>;

    LinearMap() = default;
    LinearMap(Mat<Scalar> m, const Tolerance& tol)
        : m_(std::move(m)), svd_(kfusion::svd(m_)), rank_(rank_from_singular_values(svd_.singular_values, tol.rank_rel))
    {
    }

    const Mat<Scalar>& matrix() const { return m_; }
    const Svd<Scalar>& factors() const { return svd_; }
    Index rank() const { return rank_; }
    Index rows() const { return m_.rows(); }
    Index cols() const { return m_.cols(); }

    Real norm() const { return svd_.singular_values.size() ? svd_.singular_values(0) : Real(0); }

    // Orthonormal bases for R(m), N(m), R(m^*) and N(m^*).
    Mat<Scalar> range() const { return svd_.u.leftCols(rank_); }
    Mat<Scalar> null() const { return svd_.v.rightCols(m_.cols() - rank_); }
    Mat<Scalar> corange() const { return svd_.v.leftCols(rank_); }
    Mat<Scalar> conull() const { return svd_.u.rightCols(m_.rows() - rank_); }

    Mat<Scalar> pinv() const
    {
        Mat<Scalar> out = Mat<Scalar>::Zero(m_.cols(), m_.rows());
        for (Index k = 0; k < rank_; ++k)
            out.noalias() += svd_.v.col(k) * (Scalar(1) / svd_.singular_values(k)) * svd_.u.col(k).adjoint();
        return out;
    }

private:
    Mat<Scalar> m_;
    Svd<Scalar> svd_;
    Index rank_ = 0;
};

template <typename Derived>
Index numerical_rank(const Eigen::MatrixBase<Derived>& m, const Tolerance& tol = {})
{
    return rank_from_singular_values(svd(m).singular_values, tol.rank_rel);
}

template <typename Derived>
Mat<typename Derived::Scalar> pinv(const Eigen::MatrixBase<Derived>& m, const Tolerance& tol = {})
{
    return LinearMap<typename Derived::Scalar>(m.eval(), tol).pinv();
}

template <typename Derived>
RealOf<typename Derived::Scalar> spectral_norm(const Eigen::MatrixBase<Derived>& m)
{
    if (m.rows() == 0 || m.cols() == 0)
        return 0;
    if (!all_finite(m))
        throw NumericalError("spectral_norm: input contains NaN or Inf");
    Eigen::JacobiSVD<Mat<typename Derived::Scalar>> solver(m.eval());
    return solver.singularValues()(0);
}

// Orthonormal basis of the column space of m. Singular values are cut
// against ref_scale when given (the norm of the map that produced m), so an
// image that is numerically zero does not turn into a spurious direction.
template <typename Derived>
Mat<typename Derived::Scalar> range_basis(const Eigen::MatrixBase<Derived>& m, const Tolerance& tol = {},
                                          double ref_scale = -1)
{
    using Scalar = typename Derived::Scalar;
    if (m.cols() == 0)
        return Mat<Scalar>(m.rows(), 0);
    Svd<Scalar> f = svd(m);
    const auto& s = f.singular_values;
    double scale = s.size() ? double(s(0)) : 0.0;
    if (ref_scale >= 0)
        scale = std::max(scale, ref_scale);
    Index r = 0;
    while (r < s.size() && s(r) > tol.rank_rel * scale)
        ++r;
    return f.u.leftCols(r);
}

template <typename Derived>
Mat<typename Derived::Scalar> null_basis(const Eigen::MatrixBase<Derived>& m, const Tolerance& tol = {})
{
    return LinearMap<typename Derived::Scalar>(m.eval(), tol).null();
}

template <typename Derived>
RealOf<typename Derived::Scalar> asymmetry(const Eigen::MatrixBase<Derived>& m)
{
    return spectral_norm((m - m.adjoint()).eval());
}

// sup <a f, f> / <b f, f> over f outside N(b); +inf when N(b) is not inside
// N(a). For PSD a, <a f, f> = 0 on N(b) forces a N(b) = 0, so the pencil can
// be restricted to R(b) and whitened there.
template <typename DerivedA, typename DerivedB>
double max_rayleigh(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b,
                    const Tolerance& tol = {})
{
    using Scalar = typename DerivedA::Scalar;
    if (a.rows() != a.cols() || b.rows() != b.cols() || a.rows() != b.rows())
        throw InputError("max_rayleigh: a and b must be square of equal size");
    const Index n = a.rows();
    if (n == 0)
        return 0;
    const double na = spectral_norm(a);
    const double nb = spectral_norm(b);
    if (asymmetry(a) > tol.accept(na) || asymmetry(b) > tol.accept(nb))
        throw InputError("max_rayleigh: matrices are not symmetric");

    const Mat<Scalar> as = (a + a.adjoint()) / Scalar(2);
    const Mat<Scalar> bs = (b + b.adjoint()) / Scalar(2);
    Eigen::SelfAdjointEigenSolver<Mat<Scalar>> eig(bs);
    if (eig.info() != Eigen::Success)
        throw NumericalError("max_rayleigh: eigensolver failed");
    const auto& lam = eig.eigenvalues();
    const double lmax = lam(n - 1);
    if (lam(0) < -tol.accept(nb))
        throw InputError("max_rayleigh: b is not positive semidefinite");

    std::vector<Index> keep, drop;
    for (Index k = 0; k < n; ++k)
        (lmax > 0 && lam(k) > tol.rank_rel * lmax ? keep : drop).push_back(k);

    if (!drop.empty()) {
        Mat<Scalar> vn(n, Index(drop.size()));
        for (Index j = 0; j < vn.cols(); ++j)
            vn.col(j) = eig.eigenvectors().col(drop[j]);
        const double leak = spectral_norm((vn.adjoint() * as * vn).eval());
        if (leak > tol.eq_rel * na && leak > 0)
            return std::numeric_limits<double>::infinity();
    }
    if (keep.empty())
        return 0;

    Mat<Scalar> w(n, Index(keep.size()));
    for (Index j = 0; j < w.cols(); ++j)
        w.col(j) = eig.eigenvectors().col(keep[j]) / std::sqrt(lam(keep[j]));
    const Mat<Scalar> c = w.adjoint() * as * w;
    Eigen::SelfAdjointEigenSolver<Mat<Scalar>> top((c + c.adjoint()) / Scalar(2), Eigen::EigenvaluesOnly);
    return std::max(0.0, double(top.eigenvalues()(c.rows() - 1)));
}

// Orthogonal projector onto the column span of an orthonormal basis.
template <typename Derived>
Mat<typename Derived::Scalar> projector(const Eigen::MatrixBase<Derived>& basis)
{
    return basis * basis.adjoint();
}

} // namespace kfusion
