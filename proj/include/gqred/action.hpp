#ifndef GQRED_ACTION_HPP
#define GQRED_ACTION_HPP

#include <string>
#include <vector>

#include "gqred/manifold.hpp"
#include "gqred/types.hpp"

namespace gqred {

// Hamiltonian torus action on a ModelManifold. Row j of `weights` gives the
// integer weights of the j-th lattice generator on all homogeneous
// coordinates; `shift` is the moment-map constant; the columns of `xi_basis`
// express the orthonormal Lie-algebra basis in lattice coordinates
// (|det| = 1 so the torus has unit Haar volume).
//
// With e_j the j-th lattice generator, the group flow is
//   e^{t e_j} . Z_a = exp(-2 pi i t W_{j,a}) Z_a
// and its Hamiltonian is phi_{e_j} = 2 pi (sum_a W_{j,a} u_a - lambda_j),
// which makes i(X^xi) omega = d phi_xi and J X^xi the gradient of phi_xi.
struct ActionSpec {
  IMat weights;                 // d x hom_count
  std::vector<Rational> shift;  // lambda, length d
  Mat xi_basis;                 // d x d, defaults to the identity

  int dim() const { return static_cast<int>(weights.rows()); }
};

ActionSpec make_action(const ModelManifold& model, IMat weights,
                       std::vector<Rational> shift, Mat xi_basis = Mat());

// Homogeneous-coordinate weight vector of xi (Xi-basis coordinates).
Vec hom_weights(const ActionSpec& action, const Vec& xi);

// W u(p) - lambda in lattice-dual coordinates.
Vec moment_raw(const ActionSpec& action, const ModelManifold& model,
               const ChartPoint& p);

// Moment map in the orthonormal Xi basis (2 pi scaled).
Vec moment(const ActionSpec& action, const ModelManifold& model,
           const ChartPoint& p);

// The additive constant of `moment` at a point with vanishing weighted
// action coordinates; matches the Xi-basis scaling of lambda.
Vec lambda_in_xi_basis(const ActionSpec& action);

// Columns: X^{xi_1} .. X^{xi_d}, J X^{xi_1} .. J X^{xi_d} as real 2n-vectors.
Mat generators(const ActionSpec& action, const ModelManifold& model,
               const ChartPoint& p);

// Complex chart components of X^{xi} at p.
CVec generator_complex(const ActionSpec& action, const ModelManifold& model,
                       const ChartPoint& p, const Vec& xi);

// Group flow e^{t xi} . p (phases only).
ChartPoint group_flow(const ActionSpec& action, const ModelManifold& model,
                      const Vec& xi, Real t, const ChartPoint& p);

// Complexified flow e^{i t xi} . p: Z_a scales by exp(2 pi t w_a); switches
// charts when a coordinate leaves the safe region (modulus > 10).
ChartPoint complex_flow(const ActionSpec& action, const ModelManifold& model,
                        const Vec& xi, Real t, const ChartPoint& p);

// Image point and the complex chart Jacobian of p -> e^{i xi} . p.
struct FlowDifferential {
  ChartPoint image;
  CMat jacobian;  // n x n, chart(p) components -> chart(image) components
};
FlowDifferential complex_flow_differential(const ActionSpec& action,
                                           const ModelManifold& model,
                                           const Vec& xi, Real t,
                                           const ChartPoint& p);

// rho(xi, x0) = 2 int_0^1 phi_xi(e^{i t xi} x0) dt by adaptive line
// quadrature along the closed-form flow. Requires x0 on the zero set.
Real rho(const ActionSpec& action, const ModelManifold& model, const Vec& xi,
         const ChartPoint& x0);

// sqrt det of the d x d Gram matrix B(X^{xi_i}, X^{xi_j}).
Real orbit_volume(const ActionSpec& action, const ModelManifold& model,
                  const ChartPoint& p);

// Direct Riemannian volume of the orbit torus by trapezoid quadrature.
Real orbit_volume_quadrature(const ActionSpec& action,
                             const ModelManifold& model, const ChartPoint& p,
                             int nodes_per_dim = 16);

// Affine solution set of {W u = lambda} in the per-factor simplex product,
// in affine action coordinates (hom index 0 of each factor eliminated).
struct MomentSlice {
  Vec u0;        // particular solution, length n
  Mat basis;     // kernel basis, n x dim
  int dim = 0;   // n - rank(W)
  Real lo = 0;   // parameter range for dim == 1 slices
  Real hi = 0;
  bool consistent = false;
  bool feasible = false;
};

MomentSlice solve_moment_slice(const ActionSpec& action,
                               const ModelManifold& model);

struct ValidationCheck {
  char code;  // 'a'..'f'
  bool pass;
  std::string message;
};

struct ValidationReport {
  int k = 0;
  std::vector<ValidationCheck> checks;

  bool passed(char code) const;
  // a,b,c,d for the uncorrected bundle; a,b,c,e,f with the half-form twist.
  bool valid(bool corrected) const;
  std::string summary() const;
};

// Checks (a) 0 in the moment image, (b) 0 a regular value, (c) free action on
// the zero set (exact, via weight supports on polytope faces), (d) the lift
// to ell^k exists (k lambda integral), (e) sqrt K exists (all m_i odd),
// (f) the lift to ell^k (x) sqrt K exists (k lambda - W 1/2 integral and
// nonnegative twisted degrees).
ValidationReport validate_scenario(const ModelManifold& model,
                                   const ActionSpec& action, int k);

}  // namespace gqred

#endif
