// Weighted subspace families and their synthesis, analysis and frame operators.
#pragma once

#include "kfusion/subspace.hpp"

#include <string>
#include <vector>

namespace kfusion {

template <typename Scalar = double>
struct Member {
    Subspace<Scalar> subspace;
    double weight = 1;
};

template <typename Scalar = double>
class FusionSystem {
public:
    FusionSystem() = default;
    explicit FusionSystem(Index ambient_dim) : n_(ambient_dim) {}
    FusionSystem(Index ambient_dim, std::vector<Member<Scalar>> members) : n_(ambient_dim)
    {
        for (auto& m : members)
            add(std::move(m.subspace), m.weight);
    }

    FusionSystem& add(Subspace<Scalar> s, double weight = 1)
    {
        if (s.ambient_dim() != n_)
            throw InputError("FusionSystem: member " + std::to_string(size()) + " lives in the wrong space");
        if (!(weight > 0) || !std::isfinite(weight))
            throw InputError("FusionSystem: member " + std::to_string(size()) + " has a nonpositive weight");
        members_.push_back({std::move(s), weight});
        return *this;
    }

    Index ambient_dim() const { return n_; }
    std::size_t size() const { return members_.size(); }
    const Member<Scalar>& operator[](std::size_t i) const { return members_[i]; }
    const std::vector<Member<Scalar>>& members() const { return members_; }

    const Subspace<Scalar>& subspace(std::size_t i) const { return members_[i].subspace; }
    double weight(std::size_t i) const { return members_[i].weight; }

    // Column offset of block i inside the coefficient space.
    Index offset(std::size_t i) const
    {
        Index o = 0;
        for (std::size_t k = 0; k < i; ++k)
            o += members_[k].subspace.dim();
        return o;
    }
    Index coefficient_dim() const { return offset(members_.size()); }

    FusionSystem without(std::size_t j) const
    {
        FusionSystem out(n_);
        for (std::size_t i = 0; i < size(); ++i)
            if (i != j)
                out.members_.push_back(members_[i]);
        return out;
    }

    FusionSystem with_weights(double w) const
    {
        FusionSystem out(n_);
        for (const auto& m : members_)
            out.add(m.subspace, w);
        return out;
    }

private:
    Index n_ = 0;
    std::vector<Member<Scalar>> members_;
};

// T_W: block i of columns is w_i U_i.
template <typename Scalar>
Mat<Scalar> synthesis(const FusionSystem<Scalar>& w)
{
    Mat<Scalar> t(w.ambient_dim(), w.coefficient_dim());
    Index o = 0;
    for (const auto& m : w.members()) {
        t.middleCols(o, m.subspace.dim()) = Scalar(m.weight) * m.subspace.basis();
        o += m.subspace.dim();
    }
    return t;
}

template <typename Scalar>
Mat<Scalar> analysis(const FusionSystem<Scalar>& w)
{
    return synthesis(w).adjoint();
}

template <typename Scalar>
Mat<Scalar> frame_operator(const FusionSystem<Scalar>& w)
{
    Mat<Scalar> s = Mat<Scalar>::Zero(w.ambient_dim(), w.ambient_dim());
    for (const auto& m : w.members())
        s.noalias() += Scalar(m.weight * m.weight) * m.subspace.projector();
    return s;
}

// Element of the direct sum, one coefficient vector per member basis.
template <typename Scalar = double>
struct BlockVector {
    std::vector<Vec<Scalar>> blocks;

    static BlockVector split(const FusionSystem<Scalar>& w, const Vec<Scalar>& flat)
    {
        if (flat.size() != w.coefficient_dim())
            throw InputError("BlockVector: coefficient length mismatch");
        BlockVector out;
        Index o = 0;
        for (const auto& m : w.members()) {
            out.blocks.push_back(flat.segment(o, m.subspace.dim()));
            o += m.subspace.dim();
        }
        return out;
    }

    Vec<Scalar> flat() const
    {
        Index n = 0;
        for (const auto& b : blocks)
            n += b.size();
        Vec<Scalar> out(n);
        Index o = 0;
        for (const auto& b : blocks) {
            out.segment(o, b.size()) = b;
            o += b.size();
        }
        return out;
    }

    double squared_norm() const
    {
        double s = 0;
        for (const auto& b : blocks)
            s += double(b.squaredNorm());
        return s;
    }
    double norm() const { return std::sqrt(squared_norm()); }

    // Block i as an ambient vector U_i b_i.
    Vec<Scalar> ambient(const FusionSystem<Scalar>& w, std::size_t i) const { return w.subspace(i).basis() * blocks[i]; }
};

template <typename Scalar>
BlockVector<Scalar> apply_analysis(const FusionSystem<Scalar>& w, const Vec<Scalar>& f)
{
    return BlockVector<Scalar>::split(w, analysis(w) * f);
}

template <typename Scalar>
Vec<Scalar> apply_synthesis(const FusionSystem<Scalar>& w, const BlockVector<Scalar>& b)
{
    return synthesis(w) * b.flat();
}

} // namespace kfusion
