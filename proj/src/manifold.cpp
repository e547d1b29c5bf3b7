#include "gqred/manifold.hpp"

#include <cmath>

namespace gqred {

ModelManifold::ModelManifold(std::vector<ProjectiveFactor> factors)
    : factors_(std::move(factors)) {
  if (factors_.empty()) throw StructuralError("model needs at least one factor");
  for (const auto& f : factors_) {
    if (f.dim < 1) throw StructuralError("projective factor dimension must be >= 1");
    if (f.scale < 1) throw StructuralError("factor scale must be a positive integer");
    hom_offset_.push_back(hom_count_);
    affine_offset_.push_back(complex_dim_);
    complex_dim_ += f.dim;
    hom_count_ += f.dim + 1;
  }
}

int ModelManifold::factor_of_hom(int a) const {
  for (int i = factor_count() - 1; i >= 0; --i)
    if (a >= hom_offset_[i]) return i;
  throw StructuralError("homogeneous index out of range");
}

Real ModelManifold::volume_closed_form() const {
  Real v = 1.0;
  for (const auto& f : factors_) {
    Real fac = 1.0;
    for (int j = 1; j <= f.dim; ++j) fac *= kTwoPi * f.scale / j;
    v *= fac;
  }
  return v;
}

namespace {

void check_point(const ModelManifold& model, const ChartPoint& p) {
  if (static_cast<int>(p.chart.size()) != model.factor_count() ||
      p.affine.size() != model.complex_dim())
    throw StructuralError("chart point does not match model layout");
  for (int i = 0; i < model.factor_count(); ++i)
    if (p.chart[i] < 0 || p.chart[i] > model.factor(i).dim)
      throw StructuralError("chart index out of range");
}

}  // namespace

CVec homogeneous(const ModelManifold& model, const ChartPoint& p) {
  check_point(model, p);
  CVec Z(model.hom_count());
  for (int i = 0; i < model.factor_count(); ++i) {
    const int m = model.factor(i).dim;
    const int h0 = model.hom_offset(i);
    const int a0 = model.affine_offset(i);
    int pos = 0;
    for (int a = 0; a <= m; ++a) {
      if (a == p.chart[i])
        Z[h0 + a] = Complex(1.0, 0.0);
      else
        Z[h0 + a] = p.affine[a0 + pos++];
    }
  }
  return Z;
}

ChartPoint from_homogeneous(const ModelManifold& model, const CVec& Z) {
  if (Z.size() != model.hom_count())
    throw StructuralError("homogeneous vector has wrong length");
  ChartPoint p;
  p.chart.resize(model.factor_count());
  p.affine.resize(model.complex_dim());
  for (int i = 0; i < model.factor_count(); ++i) {
    const int m = model.factor(i).dim;
    const int h0 = model.hom_offset(i);
    const int a0 = model.affine_offset(i);
    int best = 0;
    Real best_mod = std::abs(Z[h0]);
    for (int a = 1; a <= m; ++a) {
      const Real mod = std::abs(Z[h0 + a]);
      if (mod > best_mod) {
        best = a;
        best_mod = mod;
      }
    }
    if (best_mod == 0.0) throw StructuralError("zero homogeneous vector");
    p.chart[i] = best;
    const Complex pivot = Z[h0 + best];
    int pos = 0;
    for (int a = 0; a <= m; ++a)
      if (a != best) p.affine[a0 + pos++] = Z[h0 + a] / pivot;
  }
  return p;
}

ChartPoint renormalize(const ModelManifold& model, const ChartPoint& p) {
  return from_homogeneous(model, homogeneous(model, p));
}

ChartPoint to_chart(const ModelManifold& model, const ChartPoint& p,
                    const std::vector<int>& chart) {
  const CVec Z = homogeneous(model, p);
  ChartPoint q;
  q.chart = chart;
  q.affine.resize(model.complex_dim());
  for (int i = 0; i < model.factor_count(); ++i) {
    const int m = model.factor(i).dim;
    const int h0 = model.hom_offset(i);
    const int a0 = model.affine_offset(i);
    const Complex pivot = Z[h0 + chart[i]];
    if (pivot == Complex(0.0, 0.0))
      throw StructuralError("point lies outside requested chart");
    int pos = 0;
    for (int a = 0; a <= m; ++a)
      if (a != chart[i]) q.affine[a0 + pos++] = Z[h0 + a] / pivot;
  }
  return q;
}

Real point_distance_sq(const ModelManifold& model, const ChartPoint& p,
                       const ChartPoint& q) {
  const CVec Zp = homogeneous(model, p);
  const CVec Zq = homogeneous(model, q);
  Real total = 0;
  for (int i = 0; i < model.factor_count(); ++i) {
    const int m = model.factor(i).dim;
    const int h0 = model.hom_offset(i);
    const auto zp = Zp.segment(h0, m + 1);
    const auto zq = Zq.segment(h0, m + 1);
    const Real cross = std::norm(zp.dot(zq));  // |<zp, zq>|^2
    total += 1.0 - cross / (zp.squaredNorm() * zq.squaredNorm());
  }
  return total;
}

Vec action_coords(const ModelManifold& model, const ChartPoint& p) {
  const CVec Z = homogeneous(model, p);
  Vec u(model.hom_count());
  for (int i = 0; i < model.factor_count(); ++i) {
    const int m = model.factor(i).dim;
    const int h0 = model.hom_offset(i);
    const Real c = model.factor(i).scale;
    const Real nrm = Z.segment(h0, m + 1).squaredNorm();
    for (int a = 0; a <= m; ++a) u[h0 + a] = c * std::norm(Z[h0 + a]) / nrm;
  }
  return u;
}

ChartPoint point_from_action_angle(const ModelManifold& model, const Vec& u,
                                   const Vec& theta) {
  if (u.size() != model.hom_count() || theta.size() != model.hom_count())
    throw StructuralError("action-angle data has wrong length");
  CVec Z(model.hom_count());
  for (int i = 0; i < model.factor_count(); ++i) {
    const int m = model.factor(i).dim;
    const int h0 = model.hom_offset(i);
    for (int a = 0; a <= m; ++a) {
      if (u[h0 + a] < 0) throw StructuralError("negative action coordinate");
      Z[h0 + a] = std::sqrt(u[h0 + a]) *
                  Complex(std::cos(theta[h0 + a]), std::sin(theta[h0 + a]));
    }
  }
  return from_homogeneous(model, Z);
}

CMat fubini_study_g(const ProjectiveFactor& f, const CVec& z) {
  const int m = f.dim;
  const Real w = 1.0 + z.squaredNorm();
  CMat g(m, m);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) {
      Complex val = -std::conj(z[a]) * z[b];
      if (a == b) val += w;
      g(a, b) = static_cast<Real>(f.scale) * val / (w * w);
    }
  return g;
}

namespace {

// Block-diagonal Hermitian metric over all affine coordinates of p.
CMat full_g(const ModelManifold& model, const ChartPoint& p) {
  CMat g = CMat::Zero(model.complex_dim(), model.complex_dim());
  for (int i = 0; i < model.factor_count(); ++i) {
    const int m = model.factor(i).dim;
    const int a0 = model.affine_offset(i);
    g.block(a0, a0, m, m) = fubini_study_g(model.factor(i), p.affine.segment(a0, m));
  }
  return g;
}

}  // namespace

Real omega_pair(const ModelManifold& model, const ChartPoint& p, const CVec& u,
                const CVec& v) {
  const CMat g = full_g(model, p);
  const Complex s = u.transpose() * g * v.conjugate();
  return -2.0 * s.imag();
}

Real metric_pair(const ModelManifold& model, const ChartPoint& p, const CVec& u,
                 const CVec& v) {
  const CMat g = full_g(model, p);
  const Complex s = u.transpose() * g * v.conjugate();
  return 2.0 * s.real();
}

MetricData metric_at(const ModelManifold& model, const ChartPoint& p) {
  check_point(model, p);
  const int n = model.complex_dim();
  const CMat g = full_g(model, p);

  MetricData md;
  md.omega = Mat::Zero(2 * n, 2 * n);
  md.J = Mat::Zero(2 * n, 2 * n);
  md.B = Mat::Zero(2 * n, 2 * n);
  for (int a = 0; a < n; ++a) {
    md.J(2 * a + 1, 2 * a) = 1.0;   // J d/dx_a = d/dy_a
    md.J(2 * a, 2 * a + 1) = -1.0;  // J d/dy_a = -d/dx_a
  }

  // Real basis vector 2a has complex components e_a, vector 2a+1 has i e_a.
  auto cvec = [n](int idx) {
    CVec v = CVec::Zero(n);
    v[idx / 2] = (idx % 2 == 0) ? Complex(1, 0) : Complex(0, 1);
    return v;
  };
  for (int pq = 0; pq < 2 * n; ++pq) {
    const CVec vp = cvec(pq);
    for (int q = pq + 1; q < 2 * n; ++q) {
      const CVec vq = cvec(q);
      const Complex s = vp.transpose() * g * vq.conjugate();
      md.omega(pq, q) = -2.0 * s.imag();
      md.omega(q, pq) = 2.0 * s.imag();
    }
    for (int q = 0; q < 2 * n; ++q) {
      const CVec vq = cvec(q);
      const Complex s = vp.transpose() * g * vq.conjugate();
      md.B(pq, q) = 2.0 * s.real();
    }
  }

  // Closed-form Liouville density 2^n * prod det g_i; the invariant
  // liouville == sqrt(det B) is left to the caller as a consistency check.
  Real det = 1.0;
  for (int i = 0; i < model.factor_count(); ++i) {
    const int m = model.factor(i).dim;
    const int a0 = model.affine_offset(i);
    det *= g.block(a0, a0, m, m).determinant().real();
  }
  md.liouville = std::ldexp(det, n);
  return md;
}

Real liouville_at(const ModelManifold& model, const ChartPoint& p) {
  check_point(model, p);
  Real det = 1.0;
  int n = 0;
  for (int i = 0; i < model.factor_count(); ++i) {
    const int m = model.factor(i).dim;
    const int a0 = model.affine_offset(i);
    det *= fubini_study_g(model.factor(i), p.affine.segment(a0, m))
               .determinant()
               .real();
    n += m;
  }
  return std::ldexp(det, n);
}

CMat chart_transition_jacobian(const ModelManifold& model, const ChartPoint& p,
                               const std::vector<int>& chart) {
  const CVec Z = homogeneous(model, p);
  CMat T = CMat::Zero(model.complex_dim(), model.complex_dim());
  for (int i = 0; i < model.factor_count(); ++i) {
    const int m = model.factor(i).dim;
    const int h0 = model.hom_offset(i);
    const int a0 = model.affine_offset(i);
    const int t_old = p.chart[i];
    const int t_new = chart[i];
    const Complex piv = Z[h0 + t_new];
    if (piv == Complex(0, 0))
      throw StructuralError("point lies outside requested chart");
    // Homogeneous lift of d/dz_b (old chart) has dZ_{hom(b)} = 1, rest 0.
    int col = 0;
    for (int b = 0; b <= m; ++b) {
      if (b == t_old) continue;
      int row = 0;
      for (int a = 0; a <= m; ++a) {
        if (a == t_new) continue;
        // z'_a = Z_a / Z_{ t_new }
        Complex d = 0;
        if (a == b) d += 1.0 / piv;
        if (t_new == b) d -= Z[h0 + a] / (piv * piv);
        T(a0 + row, a0 + col) = d;
        ++row;
      }
      ++col;
    }
  }
  return T;
}

CVec real_to_complex_tangent(const Vec& v) {
  const int n = static_cast<int>(v.size()) / 2;
  CVec c(n);
  for (int a = 0; a < n; ++a) c[a] = Complex(v[2 * a], v[2 * a + 1]);
  return c;
}

Vec complex_to_real_tangent(const CVec& v) {
  Vec r(2 * v.size());
  for (int a = 0; a < v.size(); ++a) {
    r[2 * a] = v[a].real();
    r[2 * a + 1] = v[a].imag();
  }
  return r;
}

}  // namespace gqred
