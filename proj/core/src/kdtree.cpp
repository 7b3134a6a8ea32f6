#include "trajmc/kdtree.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "trajmc/errors.hpp"

namespace trajmc {

KdTree::KdTree(std::vector<double> points, int dim) : points_(std::move(points)), dim_(dim) {
  if (dim_ < 1 || dim_ > 8) throw DomainError("k-d tree dimension must be in [1, 8]");
  if (points_.size() % static_cast<std::size_t>(dim_) != 0) {
    throw ShapeMismatchError("point buffer is not a multiple of the dimension");
  }
  std::vector<std::size_t> order(size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  nodes_.reserve(order.size());
  root_ = order.empty() ? -1 : build(order, 0, order.size(), 0);
}

int KdTree::build(std::vector<std::size_t>& order, std::size_t lo, std::size_t hi, int depth) {
  if (lo >= hi) return -1;
  const int axis = depth % dim_;
  const std::size_t mid = lo + (hi - lo) / 2;
  auto less = [this, axis](std::size_t a, std::size_t b) {
    const double pa = points_[a * dim_ + axis];
    const double pb = points_[b * dim_ + axis];
    return pa < pb || (pa == pb && a < b);
  };
  std::nth_element(order.begin() + static_cast<std::ptrdiff_t>(lo),
                   order.begin() + static_cast<std::ptrdiff_t>(mid),
                   order.begin() + static_cast<std::ptrdiff_t>(hi), less);
  const int id = static_cast<int>(nodes_.size());
  nodes_.push_back({order[mid], axis, -1, -1});
  const int left = build(order, lo, mid, depth + 1);
  const int right = build(order, mid + 1, hi, depth + 1);
  nodes_[static_cast<std::size_t>(id)].left = left;
  nodes_[static_cast<std::size_t>(id)].right = right;
  return id;
}

double KdTree::dist2(std::size_t i, std::span<const double> q) const {
  return squared_distance(point(i), q);
}

void KdTree::search(int node, std::span<const double> q, Hit& best) const {
  if (node < 0) return;
  const Node& n = nodes_[static_cast<std::size_t>(node)];
  const double d2 = dist2(n.point, q);
  if (d2 < best.dist2 || (d2 == best.dist2 && n.point < best.index)) {
    best = {n.point, d2};
  }
  const double diff = q[static_cast<std::size_t>(n.axis)] - points_[n.point * dim_ + n.axis];
  const int near = diff < 0.0 ? n.left : n.right;
  const int far = diff < 0.0 ? n.right : n.left;
  search(near, q, best);
  // <= keeps equidistant points on the far side reachable for the tie-break.
  if (diff * diff <= best.dist2) search(far, q, best);
}

KdTree::Hit KdTree::nearest(std::span<const double> query) const {
  if (root_ < 0) throw DomainError("nearest() on an empty k-d tree");
  if (query.size() != static_cast<std::size_t>(dim_)) {
    throw ShapeMismatchError("query dimension does not match the tree");
  }
  Hit best{size(), std::numeric_limits<double>::infinity()};
  search(root_, query, best);
  return best;
}

}  // namespace trajmc
