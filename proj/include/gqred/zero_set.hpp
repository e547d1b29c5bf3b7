#ifndef GQRED_ZERO_SET_HPP
#define GQRED_ZERO_SET_HPP

#include <functional>
#include <string>
#include <vector>

#include "gqred/action.hpp"
#include "gqred/manifold.hpp"
#include "gqred/types.hpp"

namespace gqred {

// Quadrature for the Riemannian measure of Phi^{-1}(0), built on the torus
// fibration: Gauss nodes on the moment-polytope slice {W u = lambda} and
// trapezoid grids on the torus fibers. The metric is fiber-invariant, so the
// volume density depends on the slice node only.
struct SliceNode {
  Vec u_full;    // action coordinates of every homogeneous coordinate
  Real weight;   // Gauss weight on the slice times the volume density
  Real density;  // sqrt det of the tangent Gram (per unit d sigma d theta)
};

class ZeroSetRule {
 public:
  ZeroSetRule(const ModelManifold* model, std::vector<SliceNode> slice,
              int fiber_nodes, int level);

  int level() const { return level_; }
  int fiber_nodes_per_angle() const { return fiber_; }
  int slice_count() const { return static_cast<int>(slice_.size()); }
  const SliceNode& slice_node(int s) const { return slice_[s]; }
  long long count() const;

  // Materializes the chart point of slice node s at fiber angles theta
  // (length = number of affine coordinates, one angle per non-pivot
  // homogeneous coordinate of each factor).
  ChartPoint point(int s, const Vec& theta) const;

  // Weight carried by each fiber node of slice node s.
  Real node_weight(int s) const;

  // Streaming iteration over all nodes in a fixed deterministic order.
  void for_each(const std::function<void(const ChartPoint&, Real)>& f) const;

  // sum of weights = vol(Phi^{-1}(0)) up to quadrature error.
  Real volume() const;

  void dump(const std::string& path) const;

 private:
  const ModelManifold* model_;
  std::vector<SliceNode> slice_;
  int fiber_ = 8;
  int level_ = 1;
};

struct ZeroSetOptions {
  int slice_nodes = 16;  // Gauss nodes per slice dimension
  int fiber_nodes = 8;   // trapezoid nodes per fiber angle
};

ZeroSetRule zero_set_rule(const ActionSpec& action, const ModelManifold& model,
                          int level);

ZeroSetRule zero_set_rule(const ActionSpec& action, const ModelManifold& model,
                          int level, const ZeroSetOptions& opts);

// Deterministic sample of zero-set points for pointwise checks.
std::vector<ChartPoint> zero_set_sample(const ActionSpec& action,
                                        const ModelManifold& model, int count);

}  // namespace gqred

#endif
