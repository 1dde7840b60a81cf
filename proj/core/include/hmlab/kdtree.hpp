#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "hmlab/point.hpp"

namespace hmlab {

// Static k-d tree over a point cloud. Built once, queried concurrently.
class KdTree {
 public:
  KdTree() = default;
  explicit KdTree(std::span<const Point> points);

  bool empty() const { return nodes_.empty(); }
  std::size_t size() const { return points_.size(); }

  // Index of the nearest point; ties go to the lexicographically smallest point.
  std::size_t nearest(const Point& q) const;

  // Appends indices of all points with |p - c| <= r (unordered).
  void within(const Point& c, double r, std::vector<std::size_t>& out) const;

 private:
  struct Node {
    std::uint32_t begin = 0, end = 0;  // range in order_
    std::int32_t left = -1, right = -1;
    int axis = -1;
    double split = 0.0;
    Point lo, hi;  // bounding box of the range
  };

  int build(std::uint32_t begin, std::uint32_t end);
  void nearest_rec(int node, const Point& q, std::size_t& best, double& best_d2) const;
  void within_rec(int node, const Point& c, double r2, std::vector<std::size_t>& out) const;

  std::vector<Point> points_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
};

}  // namespace hmlab
