#include "hmlab/kdtree.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace hmlab {
namespace {

constexpr std::uint32_t kLeafSize = 16;

double box_dist2(const Point& q, const Point& lo, const Point& hi) {
  double s = 0.0;
  for (int i = 0; i < q.dim(); ++i) {
    double d = 0.0;
    if (q[i] < lo[i]) d = lo[i] - q[i];
    else if (q[i] > hi[i]) d = q[i] - hi[i];
    s += d * d;
  }
  return s;
}

}  // namespace

KdTree::KdTree(std::span<const Point> points) : points_(points.begin(), points.end()) {
  if (points_.empty()) return;
  order_.resize(points_.size());
  std::iota(order_.begin(), order_.end(), 0u);
  nodes_.reserve(2 * points_.size() / kLeafSize + 2);
  build(0, static_cast<std::uint32_t>(points_.size()));
}

int KdTree::build(std::uint32_t begin, std::uint32_t end) {
  const int dim = points_.front().dim();
  Node node;
  node.begin = begin;
  node.end = end;
  node.lo = points_[order_[begin]];
  node.hi = node.lo;
  for (std::uint32_t i = begin; i < end; ++i) {
    const Point& p = points_[order_[i]];
    for (int a = 0; a < dim; ++a) {
      node.lo[a] = std::min(node.lo[a], p[a]);
      node.hi[a] = std::max(node.hi[a], p[a]);
    }
  }
  const int id = static_cast<int>(nodes_.size());
  nodes_.push_back(node);
  if (end - begin <= kLeafSize) return id;

  int axis = 0;
  double widest = -1.0;
  for (int a = 0; a < dim; ++a) {
    if (node.hi[a] - node.lo[a] > widest) {
      widest = node.hi[a] - node.lo[a];
      axis = a;
    }
  }
  if (widest <= 0.0) return id;  // all points coincide

  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::uint32_t i, std::uint32_t j) { return points_[i][axis] < points_[j][axis]; });
  const int left = build(begin, mid);
  const int right = build(mid, end);
  nodes_[id].axis = axis;
  nodes_[id].split = points_[order_[mid]][axis];
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

std::size_t KdTree::nearest(const Point& q) const {
  std::size_t best = 0;
  double best_d2 = std::numeric_limits<double>::infinity();
  if (!nodes_.empty()) nearest_rec(0, q, best, best_d2);
  return best;
}

void KdTree::nearest_rec(int id, const Point& q, std::size_t& best, double& best_d2) const {
  const Node& node = nodes_[id];
  if (box_dist2(q, node.lo, node.hi) > best_d2) return;
  if (node.left < 0) {
    for (std::uint32_t i = node.begin; i < node.end; ++i) {
      const std::uint32_t k = order_[i];
      const double d2 = distance2(q, points_[k]);
      if (d2 < best_d2 || (d2 == best_d2 && lex_less(points_[k], points_[best]))) {
        best_d2 = d2;
        best = k;
      }
    }
    return;
  }
  const bool go_left = q[node.axis] < node.split;
  nearest_rec(go_left ? node.left : node.right, q, best, best_d2);
  nearest_rec(go_left ? node.right : node.left, q, best, best_d2);
}

void KdTree::within(const Point& c, double r, std::vector<std::size_t>& out) const {
  if (nodes_.empty() || r < 0.0) return;
  within_rec(0, c, r * r, out);
}

void KdTree::within_rec(int id, const Point& c, double r2, std::vector<std::size_t>& out) const {
  const Node& node = nodes_[id];
  if (box_dist2(c, node.lo, node.hi) > r2) return;
  if (node.left < 0) {
    for (std::uint32_t i = node.begin; i < node.end; ++i)
      if (distance2(c, points_[order_[i]]) <= r2) out.push_back(order_[i]);
    return;
  }
  within_rec(node.left, c, r2, out);
  within_rec(node.right, c, r2, out);
}

}  // namespace hmlab
