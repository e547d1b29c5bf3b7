#ifndef GQRED_REDUCTION_HPP
#define GQRED_REDUCTION_HPP

#include <string>
#include <vector>

#include "gqred/densities.hpp"
#include "gqred/integration.hpp"
#include "gqred/sections.hpp"
#include "gqred/zero_set.hpp"

namespace gqred {

// A section of the reduced bundle over M//G, represented only through
// zero-set data of its invariant upstairs representative (no coordinates on
// the quotient are ever constructed).
struct ReducedSection {
  Section upstairs;
};

// Restriction of an invariant section to the zero set (the map A_k).
ReducedSection map_A(const ActionSpec& action, const ModelManifold& model,
                     const Section& s);

// The corrected map B_k; pointwise data carries the contraction factor from
// descend_contract.
ReducedSection map_B(const ActionSpec& action, const ModelManifold& model,
                     const Section& r);

// Framed value at a zero-set point: products value(v) conj(value(w)) give the
// downstairs Hermitian pairing (including |B_k r|^2 on the diagonal).
Complex reduced_value(const ActionSpec& action, const ModelManifold& model,
                      const ReducedSection& rs, const ChartPoint& p);

// (B nu, B nu)/(theta, theta) at x0; the pointwise magnitude ratio
// |B_k r|^2([x0]) / |r|^2(x0) of the corrected descent.
Real bk_pointwise_ratio(const ActionSpec& action, const ModelManifold& model,
                        const ChartPoint& x0);

// <v, w>_down = (k/2pi)^{(n-d)/2} int_{M//G} (v, w) eps, optionally against a
// fiber-invariant symbol; evaluated on the rule with exact fiber sums.
Complex reduced_inner(const ActionSpec& action, const ModelManifold& model,
                      const ZeroSetRule& rule, const ReducedSection& v,
                      const ReducedSection& w, const Observable* symbol = nullptr);

struct GramReport {
  std::string scenario;
  int k = 0;
  bool corrected = false;
  int dim = 0;
  CMat gram_up;    // inner products with the (k/2pi)^{n/2} prefactor
  CMat gram_down;  // mapped-basis inner products, (k/2pi)^{(n-d)/2} prefactor
  Vec mu;          // generalized eigenvalues of (G_down, G_up)
  Real defect = 0; // (mu_max - mu_min)/(mu_max + mu_min)
};

struct GramOptions {
  int slice_nodes = 0;  // 0: derived from k
  int fiber_nodes = 0;  // 0: derived from k (resolves every weight difference)
};

GramReport gram_report(const ActionSpec& action, const ModelManifold& model,
                       int k, bool corrected, const GramOptions& opts = {});

struct ToeplitzMatrices {
  std::string symbol;
  int k = 0;
  int dim = 0;
  CMat upstairs;    // T_f^G in the orthonormalized invariant basis
  CMat downstairs;  // \hat T_{\hat f} in the image basis B_k r_i
  CMat conjugated;  // B_k T_f^G B_k^{-1} in the same image basis
  Real defect = 0;  // operator norm of the difference, downstairs metric
};

// Toeplitz operator with G-invariant symbol on the corrected invariant space
// and its reduction. Symbols must be functions of the action coordinates.
ToeplitzMatrices toeplitz_pair(const ActionSpec& action,
                               const ModelManifold& model, int k,
                               const Observable& f,
                               const GramOptions& opts = {});

// Invariant monomial whose lattice point a/k is nearest the target's action
// coordinates, normalized to unit upstairs norm.
Section peak_section(const ActionSpec& action, const ModelManifold& model,
                     int k, const ChartPoint& target);

// Upstairs-orthonormalized invariant monomial sections.
std::vector<Section> orthonormal_invariant_sections(const ActionSpec& action,
                                                    const ModelManifold& model,
                                                    int k, bool corrected);

// Dimension of the reduced quantum space from the reduced symplectic volume
// (Riemann-Roch at reduced complex dimension <= 1); independent of the
// upstairs weight-space count.
int reduced_dimension(const ActionSpec& action, const ModelManifold& model,
                      int k, bool corrected, int quad_level = 2);

// Integral of a function of the action coordinates against du over the
// moment polytope times (2 pi)^n (the fiber volume).
Real integrate_action_polytope(const ModelManifold& model,
                               const std::function<Real(const ChartPoint&)>& f,
                               int nodes_per_dim);

}  // namespace gqred

#endif
