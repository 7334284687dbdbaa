#pragma once

#include "cneigh/common.hpp"

#include <algorithm>
#include <numeric>
#include <queue>
#include <utility>
#include <vector>

namespace cneigh {

/// Exact nearest-neighbour index (kd-tree) over the columns of a point
/// matrix, under squared Euclidean distance in ambient coordinates.
///
/// Ties are resolved deterministically: among points at exactly the same
/// distance the lexicographically smallest coordinate vector wins, then the
/// smallest column index. Every query reproduces a brute-force scan with the
/// same rule, bit for bit. The index is immutable after construction and safe
/// for concurrent queries.
template <typename Scalar = double>
class NNIndex {
public:
    using PointMatrix = MatrixX<Scalar>;
    using Query = Eigen::Ref<const VectorX<Scalar>>;

    static constexpr Index npos = -1;

    explicit NNIndex(PointMatrix points, Index leaf_size = 8)
        : points_(std::move(points))
        , leaf_size_(std::max<Index>(1, leaf_size))
    {
        perm_.resize(static_cast<std::size_t>(points_.cols()));
        std::iota(perm_.begin(), perm_.end(), Index{0});
        if (!perm_.empty()) {
            nodes_.reserve(2 * perm_.size() / static_cast<std::size_t>(leaf_size_) + 2);
            build(0, static_cast<Index>(perm_.size()));
        }
    }

    Index size() const noexcept { return points_.cols(); }
    const PointMatrix& points() const noexcept { return points_; }

    Scalar distance2(const Query& q, Index id) const { return (points_.col(id) - q).squaredNorm(); }

    /// True when candidate (d2a, a) beats (d2b, b) under the tie rule.
    bool better(Scalar d2a, Index a, Scalar d2b, Index b) const
    {
        if (d2a < d2b)
            return true;
        if (d2b < d2a)
            return false;
        return lex_less(a, b);
    }

    /// Column order by coordinates, then by index.
    bool lex_less(Index a, Index b) const
    {
        for (Index r = 0; r < points_.rows(); ++r) {
            if (points_(r, a) < points_(r, b))
                return true;
            if (points_(r, b) < points_(r, a))
                return false;
        }
        return a < b;
    }

    Index nearest(const Query& q) const { return nearest_excluding(q, npos); }

    Index nearest_excluding(const Query& q, Index excluded) const
    {
        if (size() - (excluded == npos ? 0 : 1) < 1)
            throw Error("insufficient points for LOO query");
        Best best;
        search1(0, q, excluded, best);
        return best.id;
    }

    /// Nearest and second-nearest point ids.
    std::pair<Index, Index> nearest_two(const Query& q) const
    {
        if (size() < 2)
            throw Error("insufficient points for LOO query");
        auto ids = k_nearest(q, 2);
        return {ids[0], ids[1]};
    }

    /// The k best points, best first. `excluded` (if not npos) is skipped.
    std::vector<Index> k_nearest(const Query& q, Index k, Index excluded = npos) const
    {
        const Index avail = size() - (excluded == npos ? 0 : 1);
        k = std::min(k, avail);
        std::vector<Cand> heap;
        if (k <= 0)
            return {};
        heap.reserve(static_cast<std::size_t>(k) + 1);
        searchk(0, q, excluded, k, heap);
        std::sort_heap(heap.begin(), heap.end(), CandWorse{this});
        std::vector<Index> out;
        out.reserve(heap.size());
        for (const auto& c : heap)
            out.push_back(c.id);
        return out;
    }

    /// Reference implementation of nearest_excluding by exhaustive scan.
    Index brute_force_nearest(const Query& q, Index excluded = npos) const
    {
        Index best = npos;
        Scalar best_d2 = 0;
        for (Index i = 0; i < size(); ++i) {
            if (i == excluded)
                continue;
            const Scalar d2 = distance2(q, i);
            if (best == npos || better(d2, i, best_d2, best)) {
                best = i;
                best_d2 = d2;
            }
        }
        if (best == npos)
            throw Error("insufficient points for LOO query");
        return best;
    }

private:
    struct Node {
        Index begin, end;
        Index split_dim = -1; // -1 for leaves
        Scalar split = 0;
        Index left = -1, right = -1;
    };

    struct Best {
        Index id = npos;
        Scalar d2 = 0;
    };

    struct Cand {
        Scalar d2;
        Index id;
    };

    // Heap order: the worst candidate sits on top.
    struct CandWorse {
        const NNIndex* self;
        bool operator()(const Cand& a, const Cand& b) const { return self->better(a.d2, a.id, b.d2, b.id); }
    };

    Index build(Index begin, Index end)
    {
        const Index id = static_cast<Index>(nodes_.size());
        nodes_.push_back(Node{begin, end});
        if (end - begin <= leaf_size_)
            return id;

        Index dim = 0;
        Scalar spread = -1;
        for (Index r = 0; r < points_.rows(); ++r) {
            Scalar lo = points_(r, perm_[static_cast<std::size_t>(begin)]), hi = lo;
            for (Index i = begin; i < end; ++i) {
                const Scalar v = points_(r, perm_[static_cast<std::size_t>(i)]);
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
            if (hi - lo > spread) {
                spread = hi - lo;
                dim = r;
            }
        }
        if (spread <= 0)
            return id; // all points coincide

        const Index mid = begin + (end - begin) / 2;
        auto first = perm_.begin() + begin;
        std::nth_element(first, perm_.begin() + mid, perm_.begin() + end,
                         [&](Index a, Index b) { return points_(dim, a) < points_(dim, b); });
        const Scalar split = points_(dim, perm_[static_cast<std::size_t>(mid)]);

        const Index left = build(begin, mid);
        const Index right = build(mid, end);
        Node& n = nodes_[static_cast<std::size_t>(id)];
        n.split_dim = dim;
        n.split = split;
        n.left = left;
        n.right = right;
        return id;
    }

    void search1(Index node_id, const Query& q, Index excluded, Best& best) const
    {
        const Node& n = nodes_[static_cast<std::size_t>(node_id)];
        if (n.split_dim < 0) {
            for (Index i = n.begin; i < n.end; ++i) {
                const Index id = perm_[static_cast<std::size_t>(i)];
                if (id == excluded)
                    continue;
                const Scalar d2 = distance2(q, id);
                if (best.id == npos || better(d2, id, best.d2, best.id))
                    best = {id, d2};
            }
            return;
        }
        const Scalar diff = q(n.split_dim) - n.split;
        const Index near = diff < 0 ? n.left : n.right;
        const Index far = diff < 0 ? n.right : n.left;
        search1(near, q, excluded, best);
        // <= keeps exact ties reachable so the tie rule can see them
        if (best.id == npos || diff * diff <= best.d2)
            search1(far, q, excluded, best);
    }

    void searchk(Index node_id, const Query& q, Index excluded, Index k, std::vector<Cand>& heap) const
    {
        const Node& n = nodes_[static_cast<std::size_t>(node_id)];
        const CandWorse worse{this};
        if (n.split_dim < 0) {
            for (Index i = n.begin; i < n.end; ++i) {
                const Index id = perm_[static_cast<std::size_t>(i)];
                if (id == excluded)
                    continue;
                const Cand c{distance2(q, id), id};
                if (static_cast<Index>(heap.size()) < k) {
                    heap.push_back(c);
                    std::push_heap(heap.begin(), heap.end(), worse);
                } else if (better(c.d2, c.id, heap.front().d2, heap.front().id)) {
                    std::pop_heap(heap.begin(), heap.end(), worse);
                    heap.back() = c;
                    std::push_heap(heap.begin(), heap.end(), worse);
                }
            }
            return;
        }
        const Scalar diff = q(n.split_dim) - n.split;
        const Index near = diff < 0 ? n.left : n.right;
        const Index far = diff < 0 ? n.right : n.left;
        searchk(near, q, excluded, k, heap);
        if (static_cast<Index>(heap.size()) < k || diff * diff <= heap.front().d2)
            searchk(far, q, excluded, k, heap);
    }

    PointMatrix points_;
    Index leaf_size_;
    std::vector<Index> perm_;
    std::vector<Node> nodes_;
};

} // namespace cneigh
