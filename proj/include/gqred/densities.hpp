#ifndef GQRED_DENSITIES_HPP
#define GQRED_DENSITIES_HPP

#include <functional>
#include <string>
#include <vector>

#include "gqred/integration.hpp"

namespace gqred {

// Smooth G-invariant observable built from moment-polytope coordinates.
struct Observable {
  std::string tag;
  std::function<Real(const ChartPoint&)> eval;
};

// Tags: "one", "moment_sum" (sum_j sum_a W_{j,a} u_a), "mnormsq"
// (|W u - lambda|^2), "gauss_moment" (exp of -mnormsq).
Observable make_observable(const std::string& tag, const ActionSpec& action,
                           const ModelManifold& model);

// Leading-order Laplace value (2 pi / k)^{d/2} |det H|^{-1/2} sigma(0) for
// int sigma e^{-k rho} with rho minimized at 0 with value 0.
Real laplace_leading(const Mat& hessian, Real sigma0, Real k);

// Analytic Hessian of rho at xi = 0: 2 B(J X^{xi_i}, J X^{xi_j}).
Mat hessian_rho(const ActionSpec& action, const ModelManifold& model,
                const ChartPoint& x0);

struct DensityOptions {
  int ball_level = 64;        // ball rule exactness parameter
  Real tail_exponent = 34.5;  // k rho at the truncation radius
  bool check_convergence = true;
};

// I_k(f)([x0]) = vol(G.x0) (k/2pi)^{d/2} int tau f e^{-k rho} d xi over the
// truncated ball.
Real density_I(const ActionSpec& action, const ModelManifold& model,
               const ChartPoint& x0, int k, const Observable& f,
               const DensityOptions& opts = {});

// J_k(f)([x0]) = (k/2pi)^{d/2} 2^{d/2} int tau f e^{-int(2k phi + drift)}.
Real density_J(const ActionSpec& action, const ModelManifold& model,
               const ChartPoint& x0, int k, const Observable& f,
               const DensityOptions& opts = {});

struct DensityRow {
  int node = 0;
  Vec moment_coords;  // action coordinates of the node
  int k = 0;
  Real I = -1, J = -1;          // negative when not computed
  Real I_limit = 0, J_limit = 1;
  Real I_dev = -1, J_dev = -1;
};

struct DensityReport {
  std::string scenario;
  std::string observable;
  std::vector<int> ks;
  std::vector<DensityRow> rows;
  std::vector<Real> max_I_dev;  // per k, max over nodes (<0 if absent)
  std::vector<Real> max_J_dev;
  Real I_slope = 0;  // log-log slope of max deviation vs k (diagnostic)
  Real J_slope = 0;
};

// Tabulates I_k and J_k against their limits over zero-set nodes; ks with a
// failing uncorrected (resp. corrected) lift skip the I (resp. J) column.
DensityReport density_limits(const ActionSpec& action,
                             const ModelManifold& model,
                             const std::vector<ChartPoint>& nodes,
                             const std::vector<int>& ks, const Observable& f,
                             const DensityOptions& opts = {});

}  // namespace gqred

#endif
