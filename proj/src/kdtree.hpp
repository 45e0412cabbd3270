#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "distance.hpp"

namespace floodsom::detail {

struct Hit {
    std::size_t index;
    double dist2;
};

/// (dist2, index) lexicographic order; the selection order of every search.
inline bool hit_less(const Hit& a, const Hit& b) {
    return a.dist2 < b.dist2 || (a.dist2 == b.dist2 && a.index < b.index);
}

/**
 * Exact k-nearest search over a fixed point set.
 *
 * The tree partitions the points projected onto their leading principal
 * axes. A box in that space bounds the true distance from below (projection
 * never lengthens a vector); boxes are pruned only when the bound clears the
 * current k-th distance by a margin far above rounding error. Candidate
 * distances are always computed on the original vectors in natural order, so
 * the result equals an exhaustive scan bit for bit, ties included.
 */
class KdTree {
public:
    KdTree() = default;

    /// Point i is copied from points[i*stride, i*stride + dim).
    KdTree(const double* points, std::size_t n, std::size_t dim, std::size_t stride,
           std::size_t leaf_size = 8, std::size_t max_axes = 8);

    std::size_t size() const { return n_; }

    /// k nearest, ascending by (dist2, index). k is clamped to size().
    void knn(const double* q, std::size_t k, std::vector<Hit>& out) const {
        knn(q, k, {}, out);
    }
    /// As above, evaluating `seeds` first; a good guess tightens pruning only.
    void knn(const double* q, std::size_t k, std::span<const std::size_t> seeds,
             std::vector<Hit>& out) const;

private:
    struct Node {
        std::size_t begin, end;
        std::size_t left = 0, right = 0;  // 0: leaf (the root is never a child)
    };

    const double* point(std::size_t i) const { return points_.data() + i * dim_; }
    const double* proj(std::size_t i) const { return proj_.data() + i * axes_; }
    const double* lo(std::size_t node) const { return boxes_.data() + node * 2 * axes_; }
    const double* hi(std::size_t node) const { return lo(node) + axes_; }

    void project(const double* x, double* out) const;
    std::size_t build(std::size_t begin, std::size_t end);
    double box_bound(std::size_t node, const double* pq) const;
    void offer(std::size_t idx, const double* q, std::size_t k, std::vector<Hit>& out) const;
    void search(std::size_t node, const double* q, const double* pq, std::size_t k,
                std::vector<Hit>& out) const;

    std::size_t n_ = 0, dim_ = 0, axes_ = 0, leaf_size_ = 8;
    std::vector<double> points_;
    std::vector<double> mean_;
    std::vector<double> basis_;  // axes_ rows of length dim_
    std::vector<double> proj_;
    std::vector<std::size_t> order_;
    std::vector<Node> nodes_;
    std::vector<double> boxes_;
};

}  // namespace floodsom::detail
