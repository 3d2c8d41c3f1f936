#include "kfusion/cli.hpp"

namespace kfusion::cli {

// K = U diag(s) V^T with s in [1/2, 2] on the first rank_k entries; members
// are spans of Gaussian draws of dimension between 1 and ceil(n/2).
ProblemInstance random_instance(std::uint64_t seed, Index n, Index members, Index rank_k, const Tolerance& tol)
{
    if (n < 1 || members < 1 || rank_k < 0 || rank_k > n)
        throw InputError("random: need ambient_dim >= 1, member_count >= 1 and 0 <= rank <= ambient_dim");
    Rng rng(seed);
    std::uniform_real_distribution<double> spread(0.5, 2.0);
    const MatXd u = random_orthogonal(n, rng);
    const MatXd v = random_orthogonal(n, rng);
    VecXd s = VecXd::Zero(n);
    for (Index i = 0; i < rank_k; ++i)
        s(i) = spread(rng);
    const MatXd k = u * s.asDiagonal() * v.transpose();

    std::uniform_int_distribution<Index> dims(1, std::max<Index>(1, (n + 1) / 2));
    Json doc;
    doc["name"] = "random-" + std::to_string(seed);
    doc["ambient_dim"] = n;
    Json entries = Json::array();
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j)
            entries.push_back(k(i, j));
    doc["K"] = {{"rows", n}, {"cols", n}, {"entries", entries}};
    Json w = Json::array();
    for (Index m = 0; m < members; ++m) {
        const MatXd g = gaussian(n, dims(rng), rng);
        Json span = Json::array();
        for (Index j = 0; j < g.cols(); ++j) {
            Json col = Json::array();
            for (Index i = 0; i < n; ++i)
                col.push_back(g(i, j));
            span.push_back(col);
        }
        w.push_back({{"span", span}, {"weight", 1}});
    }
    doc["systems"] = {{"W", w}};
    doc["options"] = {{"seed", seed}};
    return parse_instance(doc, tol);
}

} // namespace kfusion::cli
