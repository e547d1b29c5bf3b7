#ifndef GQRED_MANIFOLD_HPP
#define GQRED_MANIFOLD_HPP

#include <vector>

#include "gqred/types.hpp"

namespace gqred {

// One CP^dim factor whose symplectic class is `scale` times the Fubini-Study
// class normalized so that a line has area 2*pi.
struct ProjectiveFactor {
  int dim = 1;
  int scale = 1;
};

// A product of complex projective spaces. Points are held in affine charts;
// real tangent coordinates are ordered (Re z_1, Im z_1, ..., Re z_n, Im z_n)
// across factors.
class ModelManifold {
 public:
  explicit ModelManifold(std::vector<ProjectiveFactor> factors);

  int factor_count() const { return static_cast<int>(factors_.size()); }
  const ProjectiveFactor& factor(int i) const { return factors_[i]; }
  const std::vector<ProjectiveFactor>& factors() const { return factors_; }

  int complex_dim() const { return complex_dim_; }   // n
  int real_dim() const { return 2 * complex_dim_; }  // 2n
  int hom_count() const { return hom_count_; }       // total homogeneous coords

  int hom_offset(int i) const { return hom_offset_[i]; }
  int affine_offset(int i) const { return affine_offset_[i]; }
  int factor_of_hom(int a) const;

  // prod_i (2 pi c_i)^{m_i} / m_i!
  Real volume_closed_form() const;

 private:
  std::vector<ProjectiveFactor> factors_;
  std::vector<int> hom_offset_;
  std::vector<int> affine_offset_;
  int complex_dim_ = 0;
  int hom_count_ = 0;
};

// Point of the product in a chosen affine chart per factor. The homogeneous
// representative has the chart coordinate equal to 1; the affine vector lists
// the remaining coordinates of each factor in homogeneous order.
struct ChartPoint {
  std::vector<int> chart;
  CVec affine;
};

// Pointwise metric data in the chart of p; tensors are 2n x 2n in the fixed
// real coordinate order.
struct MetricData {
  Mat omega;
  Mat J;
  Mat B;
  Real liouville = 0;  // density of omega^n/n! against chart Lebesgue measure
};

CVec homogeneous(const ModelManifold& model, const ChartPoint& p);

// Normalizes the largest-modulus coordinate of each factor to 1.
ChartPoint from_homogeneous(const ModelManifold& model, const CVec& Z);

ChartPoint renormalize(const ModelManifold& model, const ChartPoint& p);

// Re-expresses p in the given charts (must have nonzero chart coordinate).
ChartPoint to_chart(const ModelManifold& model, const ChartPoint& p,
                    const std::vector<int>& chart);

// Chart-free squared distance, sum over factors of sin^2 of the projective
// angle; zero iff equal points.
Real point_distance_sq(const ModelManifold& model, const ChartPoint& p,
                       const ChartPoint& q);

// Action coordinates u_a = c_i |Z_a|^2 / |Z^(i)|^2 for every homogeneous
// coordinate; per-factor sums equal c_i.
Vec action_coords(const ModelManifold& model, const ChartPoint& p);

// Inverse of action_coords on the open orbit: point with moduli from u and
// phases theta (length hom_count, defined up to one overall phase per factor).
ChartPoint point_from_action_angle(const ModelManifold& model, const Vec& u,
                                   const Vec& theta);

// Hermitian matrix g_{a \bar b} of the scaled Fubini-Study metric of factor i
// at affine coordinates z (length m_i).
CMat fubini_study_g(const ProjectiveFactor& f, const CVec& z);

MetricData metric_at(const ModelManifold& model, const ChartPoint& p);

Real liouville_at(const ModelManifold& model, const ChartPoint& p);

// omega(u, v) at p for real tangent vectors given by complex chart components.
Real omega_pair(const ModelManifold& model, const ChartPoint& p, const CVec& u,
                const CVec& v);

// B(u, v) = omega(u, J v).
Real metric_pair(const ModelManifold& model, const ChartPoint& p, const CVec& u,
                 const CVec& v);

// Complex Jacobian dz'/dz of the chart transition at p toward `chart`.
CMat chart_transition_jacobian(const ModelManifold& model, const ChartPoint& p,
                               const std::vector<int>& chart);

// Real tangent vector (complex chart components) <-> real 2n vector.
CVec real_to_complex_tangent(const Vec& v);
Vec complex_to_real_tangent(const CVec& v);

}  // namespace gqred

#endif
