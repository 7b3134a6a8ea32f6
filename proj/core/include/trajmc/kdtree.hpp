#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace trajmc {

/// Static k-d tree over points in R^k (k <= 8) with exact nearest-neighbour
/// queries. Ties in distance resolve to the smallest point index.
class KdTree {
 public:
  struct Hit {
    std::size_t index = 0;
    double dist2 = 0.0;
  };

  KdTree() = default;
  /// `points` is row-major, `dim` values per point.
  KdTree(std::vector<double> points, int dim);

  Hit nearest(std::span<const double> query) const;

  std::size_t size() const { return dim_ == 0 ? 0 : points_.size() / dim_; }
  int dim() const { return dim_; }
  std::span<const double> point(std::size_t i) const {
    return {points_.data() + i * dim_, static_cast<std::size_t>(dim_)};
  }

 private:
  struct Node {
    std::size_t point = 0;
    int axis = 0;
    int left = -1;
    int right = -1;
  };

  int build(std::vector<std::size_t>& order, std::size_t lo, std::size_t hi, int depth);
  void search(int node, std::span<const double> q, Hit& best) const;
  double dist2(std::size_t i, std::span<const double> q) const;

  std::vector<double> points_;
  std::vector<Node> nodes_;
  int dim_ = 0;
  int root_ = -1;
};

/// Squared Euclidean distance, summed in index order.
inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

}  // namespace trajmc
