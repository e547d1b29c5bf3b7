#include "gqred/zero_set.hpp"

#include <cmath>
#include <fstream>

#include "gqred/quadrature.hpp"

namespace gqred {

ZeroSetRule::ZeroSetRule(const ModelManifold* model,
                         std::vector<SliceNode> slice, int fiber_nodes,
                         int level)
    : model_(model), slice_(std::move(slice)), fiber_(fiber_nodes),
      level_(level) {}

long long ZeroSetRule::count() const {
  long long fibers = 1;
  for (int a = 0; a < model_->complex_dim(); ++a) fibers *= fiber_;
  return fibers * slice_count();
}

ChartPoint ZeroSetRule::point(int s, const Vec& theta) const {
  const SliceNode& node = slice_[s];
  Vec theta_full = Vec::Zero(model_->hom_count());
  for (int i = 0; i < model_->factor_count(); ++i) {
    const int m = model_->factor(i).dim;
    const int h0 = model_->hom_offset(i);
    const int a0 = model_->affine_offset(i);
    int pivot = 0;
    for (int a = 1; a <= m; ++a)
      if (node.u_full[h0 + a] > node.u_full[h0 + pivot]) pivot = a;
    int pos = 0;
    for (int a = 0; a <= m; ++a) {
      if (a == pivot) continue;
      theta_full[h0 + a] = theta[a0 + pos];
      ++pos;
    }
  }
  return point_from_action_angle(*model_, node.u_full, theta_full);
}

Real ZeroSetRule::node_weight(int s) const {
  return slice_[s].weight *
         std::pow(kTwoPi / fiber_, model_->complex_dim());
}

void ZeroSetRule::for_each(
    const std::function<void(const ChartPoint&, Real)>& f) const {
  const int n = model_->complex_dim();
  for (int s = 0; s < slice_count(); ++s) {
    const Real w = node_weight(s);
    std::vector<int> ctr(n, 0);
    Vec theta(n);
    while (true) {
      for (int a = 0; a < n; ++a) theta[a] = kTwoPi * ctr[a] / fiber_;
      f(point(s, theta), w);
      int j = 0;
      for (; j < n; ++j) {
        if (++ctr[j] < fiber_) break;
        ctr[j] = 0;
      }
      if (j == n) break;
    }
  }
}

Real ZeroSetRule::volume() const {
  KahanSum sum;
  for (int s = 0; s < slice_count(); ++s)
    sum.add(slice_[s].weight * std::pow(kTwoPi, model_->complex_dim()));
  return sum.value();
}

void ZeroSetRule::dump(const std::string& path) const {
  std::ofstream out(path);
  out.precision(17);
  for (int s = 0; s < slice_count(); ++s) {
    for (int a = 0; a < slice_[s].u_full.size(); ++a)
      out << slice_[s].u_full[a] << ' ';
    out << slice_[s].weight << '\n';
  }
}

namespace {

Vec full_from_affine(const ModelManifold& model, const Vec& u_affine) {
  Vec u(model.hom_count());
  for (int i = 0; i < model.factor_count(); ++i) {
    const int m = model.factor(i).dim;
    const int h0 = model.hom_offset(i);
    const int a0 = model.affine_offset(i);
    Real rest = 0;
    for (int a = 1; a <= m; ++a) {
      u[h0 + a] = u_affine[a0 + a - 1];
      rest += u_affine[a0 + a - 1];
    }
    u[h0] = model.factor(i).scale - rest;
  }
  return u;
}

// sqrt det Gram of the zero-set tangent frame at the theta = 0 point of a
// slice node: one fiber tangent per non-pivot coordinate plus the slice
// direction(s). The metric is fiber-invariant so this is the full density.
Real slice_density(const ActionSpec& /*action*/, const ModelManifold& model,
                   const Vec& u_full, const std::vector<Vec>& du_full) {
  const ChartPoint q =
      point_from_action_angle(model, u_full, Vec::Zero(model.hom_count()));
  const int n = model.complex_dim();
  std::vector<CVec> tangents;

  // Fiber tangents i z_a (one per affine coordinate of q's charts).
  for (int a = 0; a < n; ++a) {
    CVec t = CVec::Zero(n);
    t[a] = Complex(0, 1) * q.affine[a];
    tangents.push_back(t);
  }

  // Slice tangents d z_b / d sigma = z_b (v_b/u_b - v_t/u_t) / 2.
  for (const Vec& v : du_full) {
    CVec t = CVec::Zero(n);
    for (int i = 0; i < model.factor_count(); ++i) {
      const int m = model.factor(i).dim;
      const int h0 = model.hom_offset(i);
      const int a0 = model.affine_offset(i);
      const int pivot = q.chart[i];
      int pos = 0;
      for (int a = 0; a <= m; ++a) {
        if (a == pivot) continue;
        const Real ub = u_full[h0 + a];
        const Real ut = u_full[h0 + pivot];
        if (ub > 0)
          t[a0 + pos] = 0.5 * q.affine[a0 + pos] *
                        (v[h0 + a] / ub - v[h0 + pivot] / ut);
        ++pos;
      }
    }
    tangents.push_back(t);
  }

  const int dim = static_cast<int>(tangents.size());
  Mat gram(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j)
      gram(i, j) = metric_pair(model, q, tangents[i], tangents[j]);
  return std::sqrt(std::max(gram.determinant(), 0.0));
}

}  // namespace

ZeroSetRule zero_set_rule(const ActionSpec& action, const ModelManifold& model,
                          int level, const ZeroSetOptions& opts) {
  if (level < 1) level = 1;
  const MomentSlice slice = solve_moment_slice(action, model);
  if (!slice.feasible)
    throw PreconditionError("zero set is empty; run validate_scenario first");
  if (slice.dim > 1)
    throw StructuralError("zero-set quadrature supports slice dimension <= 1");

  const int scale = 1 << (level - 1);
  const int n_sigma = opts.slice_nodes * scale;
  const int n_fiber = opts.fiber_nodes * scale;

  std::vector<SliceNode> nodes;
  if (slice.dim == 0) {
    SliceNode sn;
    sn.u_full = full_from_affine(model, slice.u0);
    sn.density = slice_density(action, model, sn.u_full, {});
    sn.weight = sn.density;
    nodes.push_back(sn);
  } else {
    Vec sx, sw;
    gauss_legendre(n_sigma, slice.lo, slice.hi, sx, sw);
    const Vec v_affine = slice.basis.col(0);
    Vec v_full(model.hom_count());
    for (int i = 0; i < model.factor_count(); ++i) {
      const int m = model.factor(i).dim;
      const int h0 = model.hom_offset(i);
      const int a0 = model.affine_offset(i);
      Real acc = 0;
      for (int a = 1; a <= m; ++a) {
        v_full[h0 + a] = v_affine[a0 + a - 1];
        acc += v_affine[a0 + a - 1];
      }
      v_full[h0] = -acc;
    }
    for (int j = 0; j < n_sigma; ++j) {
      SliceNode sn;
      sn.u_full =
          full_from_affine(model, Vec(slice.u0 + sx[j] * v_affine));
      sn.density = slice_density(action, model, sn.u_full, {v_full});
      sn.weight = sw[j] * sn.density;
      nodes.push_back(sn);
    }
  }
  return ZeroSetRule(&model, std::move(nodes), n_fiber, level);
}

ZeroSetRule zero_set_rule(const ActionSpec& action, const ModelManifold& model,
                          int level) {
  return zero_set_rule(action, model, level, ZeroSetOptions{});
}

std::vector<ChartPoint> zero_set_sample(const ActionSpec& action,
                                        const ModelManifold& model, int count) {
  const ZeroSetRule rule = zero_set_rule(action, model, 1);
  const int n = model.complex_dim();
  // Low-discrepancy angles from the generalized golden ratio.
  Real g = 1.0;
  for (int it = 0; it < 32; ++it) g = std::pow(1.0 + g, 1.0 / (n + 1));
  Vec alpha(n);
  for (int a = 0; a < n; ++a) alpha[a] = std::pow(1.0 / g, a + 1);

  std::vector<ChartPoint> pts;
  for (int j = 0; j < count; ++j) {
    const int s = (j * rule.slice_count()) / count;
    Vec theta(n);
    for (int a = 0; a < n; ++a) {
      const Real frac = std::fmod(0.5 + (j + 1) * alpha[a], 1.0);
      theta[a] = kTwoPi * frac;
    }
    pts.push_back(rule.point(s, theta));
  }
  return pts;
}

}  // namespace gqred
