// Seeded Gaussian draws for sampling checks and instance generation.
#pragma once

#include "kfusion/numerics.hpp"

#include <cstdint>
#include <random>

namespace kfusion {

using Rng = std::mt19937_64;

template <typename Scalar = double>
Mat<Scalar> gaussian(Index rows, Index cols, Rng& rng)
{
    std::normal_distribution<double> nd(0.0, 1.0);
    Mat<Scalar> m(rows, cols);
    for (Index j = 0; j < cols; ++j)
        for (Index i = 0; i < rows; ++i)
            m(i, j) = Scalar(nd(rng));
    return m;
}

template <typename Scalar = double>
Vec<Scalar> unit_vector(Index n, Rng& rng)
{
    Vec<Scalar> v = gaussian<Scalar>(n, 1, rng);
    const auto nv = v.norm();
    return nv > 0 ? Vec<Scalar>(v / nv) : unit_vector<Scalar>(n, rng);
}

// Haar-ish orthogonal matrix from the QR of a Gaussian draw.
template <typename Scalar = double>
Mat<Scalar> random_orthogonal(Index n, Rng& rng)
{
    Eigen::HouseholderQR<Mat<Scalar>> qr(gaussian<Scalar>(n, n, rng));
    Mat<Scalar> q = qr.householderQ();
    const Mat<Scalar> r = qr.matrixQR().template triangularView<Eigen::Upper>();
    for (Index j = 0; j < n; ++j)
        if (r(j, j) < 0)
            q.col(j) = -q.col(j);
    return q;
}

} // namespace kfusion
