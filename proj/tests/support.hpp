// Instances shared by the test binaries.
#pragma once

#include "kfusion/kfusion.hpp"

#include <vector>

namespace testing_support {

using namespace kfusion;
using W = FusionSystem<double>;
using S = Subspace<double>;

inline VecXd e(Index n, Index i)
{
    return VecXd::Unit(n, i);
}

inline S span(std::initializer_list<VecXd> vs)
{
    return S::from_spanning(std::vector<VecXd>(vs));
}

struct Example3 {
    MatXd k;
    W w;
    W v;  // a K-dual different from the canonical one
    W z;  // the perturbed family
};

inline Example3 example3()
{
    const Index n = 3;
    const VecXd e1 = e(n, 0), e2 = e(n, 1), e3 = e(n, 2);
    Example3 x;
    x.k.resize(3, 3);
    x.k << 1, 0, 0, 1, 0, 0, 0, 1, 0;
    x.w = W(n);
    x.w.add(span({VecXd(e1 + e2), e3})).add(span({e3})).add(span({VecXd(e1 + e2)}));
    x.v = W(n);
    x.v.add(span({e1, e2})).add(span({e2})).add(span({e1, e3}));
    x.z = W(n);
    x.z.add(x.w.subspace(0)).add(x.w.subspace(1).sum(x.w.subspace(2))).add(x.w.subspace(2));
    return x;
}

struct Example4 {
    MatXd k;
    W w;
};

inline Example4 example4()
{
    const Index n = 4;
    Example4 x;
    x.k = MatXd::Zero(4, 4);
    x.k(0, 0) = 1;  // K e1 = e1
    x.k(0, 1) = 1;  // K e2 = e1
    x.k(1, 2) = 1;  // K e3 = e2, K e4 = 0
    x.w = W(n);
    x.w.add(span({e(n, 0), e(n, 1)})).add(span({e(n, 2)}));
    return x;
}

inline S random_subspace(Index n, Index d, Rng& rng)
{
    return S::span(gaussian(n, d, rng));
}

// Random weights in [1/2, 2] and member dimensions in [1, max_dim].
inline W random_system(Index n, Index members, Index max_dim, Rng& rng, bool unit_weights = false)
{
    std::uniform_int_distribution<Index> dims(1, std::max<Index>(1, std::min(max_dim, n)));
    std::uniform_real_distribution<double> wt(0.5, 2.0);
    W w(n);
    for (Index m = 0; m < members; ++m)
        w.add(random_subspace(n, dims(rng), rng), unit_weights ? 1.0 : wt(rng));
    return w;
}

// Rank-r operator with singular values in [1/2, 2].
inline MatXd random_operator(Index n, Index r, Rng& rng)
{
    std::uniform_real_distribution<double> sv(0.5, 2.0);
    VecXd s = VecXd::Zero(n);
    for (Index i = 0; i < r; ++i)
        s(i) = sv(rng);
    return random_orthogonal(n, rng) * s.asDiagonal() * random_orthogonal(n, rng).transpose();
}

// A K-fusion frame: members jointly span the whole space.
struct RandomInstance {
    MatXd k;
    W w;
};

inline RandomInstance random_instance(Rng& rng, Index nmin = 3, Index nmax = 8)
{
    std::uniform_int_distribution<Index> dim(nmin, nmax);
    const Index n = dim(rng);
    std::uniform_int_distribution<Index> rk(1, n);
    RandomInstance x;
    x.k = random_operator(n, rk(rng), rng);
    std::uniform_int_distribution<Index> mem(2, 5);
    for (;;) {
        x.w = random_system(n, mem(rng), (n + 1) / 2, rng);
        if (verify_k_fusion(x.w, x.k).pass)
            return x;
    }
}

} // namespace testing_support
