#ifndef GQRED_INTEGRATION_HPP
#define GQRED_INTEGRATION_HPP

#include <functional>

#include "gqred/action.hpp"
#include "gqred/manifold.hpp"
#include "gqred/quadrature.hpp"
#include "gqred/sections.hpp"
#include "gqred/zero_set.hpp"

namespace gqred {

// Closed-form norm integral of a basis monomial against the Liouville volume:
// prod_i (2 pi c_i)^{m_i} (prod_a a_a!) / (D_i + m_i)! with the corrected
// normalization c_i^{-m_i/2} when the basis carries the half-form twist.
// Computed in log space, so it stays accurate for large k.
Real monomial_norm_exact(const ModelManifold& model, const SectionBasis& basis,
                         const IVec& exponents);

// <s1, s2> with the (k/2pi)^{n/2} prefactor; monomials are orthogonal, so
// this is a weighted coefficient sum.
Real upstairs_norm_sq(const ModelManifold& model, const Section& s);

// Integral over M//G of a G-invariant function on the zero set, computed as
// int_{Phi^-1(0)} f / vol(G.x) dvol without quotient coordinates. Verifies
// orbit invariance of f by sampling unless `check_invariance` is false.
Real integrate_reduced(const ActionSpec& action, const ModelManifold& model,
                       const ZeroSetRule& rule,
                       const std::function<Real(const ChartPoint&)>& f,
                       bool check_invariance = true);

// Jacobian of Lambda(xi, x0) = e^{i xi} x0 against d^d xi ^ dvol(Phi^-1(0)).
Real tau(const ActionSpec& action, const ModelManifold& model, const Vec& xi,
         const ChartPoint& x0);

struct TailEstimate {
  Real radius = 0;       // fit anchor R
  Real b = 0, D = 0;     // fitted bound b e^{-R D k}
  Real observed = 0;     // shell mass at (radius, k)
  bool monotone_R = false;
  bool monotone_k = false;
};

// Integrates the I_k integrand over shells R <= |xi| <= R_max and fits the
// exponential envelope; monotone decay in both R and k is flagged.
TailEstimate tail_monitor(const ActionSpec& action, const ModelManifold& model,
                          const ChartPoint& x0, int k, Real R);

// Truncation radius: smallest R with k rho >= target_exponent on every
// sampled ray, floored by the Hessian-based Gaussian estimate.
Real truncation_radius(const ActionSpec& action, const ModelManifold& model,
                       const ChartPoint& x0, int k,
                       Real target_exponent = 34.5);

}  // namespace gqred

#endif
