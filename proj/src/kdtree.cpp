#include "kdtree.hpp"

#include <Eigen/Dense>

namespace floodsom::detail {

namespace {

/// Prune margin: projected bounds carry O(dim * eps) rounding error, far below this.
bool clears(double bound, double kth) { return bound > kth * (1.0 + 1e-9) + 1e-9; }

}  // namespace

KdTree::KdTree(const double* points, std::size_t n, std::size_t dim, std::size_t stride,
               std::size_t leaf_size, std::size_t max_axes)
    : n_(n), dim_(dim), axes_(std::min(dim, max_axes)),
      leaf_size_(std::max<std::size_t>(1, leaf_size)), points_(n * dim), mean_(dim, 0.0),
      order_(n) {
    for (std::size_t i = 0; i < n; ++i)
        std::copy(points + i * stride, points + i * stride + dim, points_.begin() + i * dim);
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    if (n_ == 0 || dim_ == 0) return;

    for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t j = 0; j < dim_; ++j) mean_[j] += point(i)[j];
    for (double& m : mean_) m /= static_cast<double>(n_);
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim_),
                                                static_cast<Eigen::Index>(dim_));
    Eigen::VectorXd centered(static_cast<Eigen::Index>(dim_));
    for (std::size_t i = 0; i < n_; ++i) {
        for (std::size_t j = 0; j < dim_; ++j)
            centered[static_cast<Eigen::Index>(j)] = point(i)[j] - mean_[j];
        cov.selfadjointView<Eigen::Lower>().rankUpdate(centered);
    }
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(
        cov.selfadjointView<Eigen::Lower>());
    // eigenvalues ascend; keep the largest axes_
    basis_.resize(axes_ * dim_);
    for (std::size_t a = 0; a < axes_; ++a) {
        const auto col = static_cast<Eigen::Index>(dim_ - 1 - a);
        for (std::size_t j = 0; j < dim_; ++j)
            basis_[a * dim_ + j] = eig.eigenvectors()(static_cast<Eigen::Index>(j), col);
    }

    proj_.resize(n_ * axes_);
    for (std::size_t i = 0; i < n_; ++i) project(point(i), proj_.data() + i * axes_);
    build(0, n_);
}

void KdTree::project(const double* x, double* out) const {
    for (std::size_t a = 0; a < axes_; ++a) {
        const double* b = basis_.data() + a * dim_;
        double s = 0.0;
        for (std::size_t j = 0; j < dim_; ++j) s += b[j] * (x[j] - mean_[j]);
        out[a] = s;
    }
}

std::size_t KdTree::build(std::size_t begin, std::size_t end) {
    const std::size_t id = nodes_.size();
    nodes_.push_back({begin, end});
    boxes_.resize(nodes_.size() * 2 * axes_);
    double* l = boxes_.data() + id * 2 * axes_;
    double* h = l + axes_;
    std::fill(l, l + axes_, std::numeric_limits<double>::infinity());
    std::fill(h, h + axes_, -std::numeric_limits<double>::infinity());
    for (std::size_t i = begin; i < end; ++i) {
        const double* p = proj(order_[i]);
        for (std::size_t a = 0; a < axes_; ++a) {
            l[a] = std::min(l[a], p[a]);
            h[a] = std::max(h[a], p[a]);
        }
    }
    if (end - begin <= leaf_size_) return id;

    std::size_t axis = 0;
    double spread = -1.0;
    for (std::size_t a = 0; a < axes_; ++a)
        if (h[a] - l[a] > spread) {
            spread = h[a] - l[a];
            axis = a;
        }
    if (!(spread > 0.0)) return id;  // all projections coincide

    const std::size_t mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + static_cast<std::ptrdiff_t>(begin),
                     order_.begin() + static_cast<std::ptrdiff_t>(mid),
                     order_.begin() + static_cast<std::ptrdiff_t>(end),
                     [&](std::size_t a, std::size_t b) {
                         const double va = proj(a)[axis], vb = proj(b)[axis];
                         return va < vb || (va == vb && a < b);
                     });
    const std::size_t left = build(begin, mid);
    const std::size_t right = build(mid, end);
    nodes_[id].left = left;
    nodes_[id].right = right;
    return id;
}

double KdTree::box_bound(std::size_t node, const double* pq) const {
    const double* l = lo(node);
    const double* h = hi(node);
    double sum = 0.0;
    for (std::size_t a = 0; a < axes_; ++a) {
        double d = 0.0;
        if (pq[a] < l[a])
            d = l[a] - pq[a];
        else if (pq[a] > h[a])
            d = pq[a] - h[a];
        sum += d * d;
    }
    return sum;
}

void KdTree::offer(std::size_t idx, const double* q, std::size_t k, std::vector<Hit>& out) const {
    for (const auto& h : out)
        if (h.index == idx) return;
    const bool full = out.size() == k;
    const double bound = full ? out.back().dist2 : std::numeric_limits<double>::infinity();
    const Hit hit{idx, squared_distance_bounded(point(idx), q, dim_, bound)};
    if (full && !hit_less(hit, out.back())) return;
    out.insert(std::upper_bound(out.begin(), out.end(), hit, hit_less), hit);
    if (out.size() > k) out.pop_back();
}

void KdTree::knn(const double* q, std::size_t k, std::span<const std::size_t> seeds,
                 std::vector<Hit>& out) const {
    out.clear();
    k = std::min(k, n_);
    if (k == 0) return;
    out.reserve(k + 1);
    for (std::size_t idx : seeds)
        if (idx < n_) offer(idx, q, k, out);
    double pq[64];
    std::vector<double> heap_pq;
    double* p = pq;
    if (axes_ > 64) {
        heap_pq.resize(axes_);
        p = heap_pq.data();
    }
    project(q, p);
    search(0, q, p, k, out);
}

void KdTree::search(std::size_t node, const double* q, const double* pq, std::size_t k,
                    std::vector<Hit>& out) const {
    const Node& nd = nodes_[node];
    if (nd.left == 0) {
        for (std::size_t i = nd.begin; i < nd.end; ++i) offer(order_[i], q, k, out);
        return;
    }
    const double bl = box_bound(nd.left, pq);
    const double br = box_bound(nd.right, pq);
    const bool left_first = bl <= br;
    const std::size_t first = left_first ? nd.left : nd.right;
    const std::size_t second = left_first ? nd.right : nd.left;
    const double b1 = left_first ? bl : br, b2 = left_first ? br : bl;
    if (out.size() < k || !clears(b1, out.back().dist2)) search(first, q, pq, k, out);
    if (out.size() < k || !clears(b2, out.back().dist2)) search(second, q, pq, k, out);
}

}  // namespace floodsom::detail
