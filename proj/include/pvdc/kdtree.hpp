#pragma once

#include <algorithm>
#include <limits>
#include <numeric>

#include "pvdc/kernels.hpp"

namespace pvdc {

// Exact nearest-neighbor tree over 3D points. Median split on the widest
// axis, leaf size 16, branch-and-bound search. Results are guaranteed to
// match a linear scan exactly, including the lowest-index tie-break: the
// candidate order is the total order (d2, index), and a subtree is pruned
// only when its bounding-box distance strictly exceeds the current best, so
// no equal-distance lower-index point can ever be skipped.
template <class T>
class KdTree {
public:
    static constexpr std::size_t kLeafSize = 16;

    struct Hit {
        T d2;
        std::uint32_t index;
    };

    KdTree() = default;

    explicit KdTree(std::span<const T> xyz) { build(xyz); }

    void build(std::span<const T> xyz) {
        if (xyz.size() % 3 != 0) throw ShapeError("kdtree: coordinate array must be n*3 scalars");
        n_ = xyz.size() / 3;
        if (n_ == 0) throw ContractError("kdtree: empty point set");
        pts_.assign(xyz.begin(), xyz.end());
        perm_.resize(n_);
        std::iota(perm_.begin(), perm_.end(), std::uint32_t(0));
        nodes_.clear();
        nodes_.reserve(2 * (n_ / kLeafSize + 1));
        build_node(0, n_);
    }

    std::size_t size() const { return n_; }

    Hit nearest(const T* q) const {
        Hit best{std::numeric_limits<T>::infinity(), 0};
        search(0, q, best);
        return best;
    }

private:
    struct Node {
        T box_lo[3];
        T box_hi[3];
        std::uint32_t begin, end; // leaf point range in perm_
        std::int32_t left = -1, right = -1;
        bool leaf() const { return left < 0; }
    };

    std::int32_t build_node(std::size_t begin, std::size_t end) {
        const std::int32_t id = std::int32_t(nodes_.size());
        nodes_.emplace_back();
        Node& nd = nodes_.back();
        nd.begin = std::uint32_t(begin);
        nd.end = std::uint32_t(end);
        for (int a = 0; a < 3; ++a) {
            nd.box_lo[a] = std::numeric_limits<T>::infinity();
            nd.box_hi[a] = -std::numeric_limits<T>::infinity();
        }
        for (std::size_t i = begin; i < end; ++i) {
            const T* p = pts_.data() + perm_[i] * 3;
            for (int a = 0; a < 3; ++a) {
                nd.box_lo[a] = std::min(nd.box_lo[a], p[a]);
                nd.box_hi[a] = std::max(nd.box_hi[a], p[a]);
            }
        }
        if (end - begin <= kLeafSize) return id;

        int axis = 0;
        T widest = nd.box_hi[0] - nd.box_lo[0];
        for (int a = 1; a < 3; ++a) {
            const T w = nd.box_hi[a] - nd.box_lo[a];
            if (w > widest) {
                widest = w;
                axis = a;
            }
        }
        const std::size_t mid = begin + (end - begin) / 2;
        std::nth_element(perm_.begin() + std::ptrdiff_t(begin), perm_.begin() + std::ptrdiff_t(mid),
                         perm_.begin() + std::ptrdiff_t(end),
                         [this, axis](std::uint32_t a, std::uint32_t b) {
                             const T ca = pts_[a * 3 + std::size_t(axis)];
                             const T cb = pts_[b * 3 + std::size_t(axis)];
                             return ca < cb || (ca == cb && a < b);
                         });
        // children are appended after this node, so re-reference via index
        const std::int32_t l = build_node(begin, mid);
        const std::int32_t r = build_node(mid, end);
        nodes_[std::size_t(id)].left = l;
        nodes_[std::size_t(id)].right = r;
        return id;
    }

    T box_d2(const Node& nd, const T* q) const {
        T acc = T(0);
        for (int a = 0; a < 3; ++a) {
            T d = T(0);
            if (q[a] < nd.box_lo[a]) d = nd.box_lo[a] - q[a];
            else if (q[a] > nd.box_hi[a]) d = q[a] - nd.box_hi[a];
            acc += d * d;
        }
        return acc;
    }

    void search(std::int32_t id, const T* q, Hit& best) const {
        const Node& nd = nodes_[std::size_t(id)];
        if (nd.leaf()) {
            for (std::size_t i = nd.begin; i < nd.end; ++i) {
                const std::uint32_t pi = perm_[i];
                const T d2 = kern::sq_dist3(q, pts_.data() + pi * 3);
                if (d2 < best.d2 || (d2 == best.d2 && pi < best.index)) best = {d2, pi};
            }
            return;
        }
        const T dl = box_d2(nodes_[std::size_t(nd.left)], q);
        const T dr = box_d2(nodes_[std::size_t(nd.right)], q);
        const std::int32_t first = dl <= dr ? nd.left : nd.right;
        const std::int32_t second = dl <= dr ? nd.right : nd.left;
        const T dfirst = std::min(dl, dr), dsecond = std::max(dl, dr);
        if (dfirst <= best.d2) search(first, q, best);
        if (dsecond <= best.d2) search(second, q, best);
    }

    std::size_t n_ = 0;
    std::vector<T> pts_;
    std::vector<std::uint32_t> perm_;
    std::vector<Node> nodes_;
};

} // namespace pvdc
