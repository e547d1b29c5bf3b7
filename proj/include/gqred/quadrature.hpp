#ifndef GQRED_QUADRATURE_HPP
#define GQRED_QUADRATURE_HPP

#include <functional>
#include <string>
#include <vector>

#include "gqred/manifold.hpp"
#include "gqred/types.hpp"

namespace gqred {

// Gauss-Legendre rule on [-1, 1] (Golub-Welsch).
void gauss_legendre(int n, Vec& nodes, Vec& weights);

// Gauss-Legendre mapped to [a, b].
void gauss_legendre(int n, Real a, Real b, Vec& nodes, Vec& weights);

// Adaptive Gauss-Kronrod (G7, K15) on [a, b]. Throws NumericError when the
// requested tolerance cannot be reached.
Real integrate_gk(const std::function<Real(Real)>& f, Real a, Real b,
                  Real rel_tol = 1e-13, Real abs_tol = 1e-300,
                  int max_depth = 48);

enum class QuadDomain { Manifold, ZeroSet, LieBall, Reduced };

struct QuadratureRule {
  QuadDomain domain = QuadDomain::LieBall;
  Mat nodes;  // dim x count
  Vec weights;
  int level = 0;

  int count() const { return static_cast<int>(weights.size()); }
  void dump(const std::string& path) const;
};

// Rule on the ball of radius R in g == R^d (d <= 3), symmetric under
// xi -> -xi and exact for polynomials of degree 2*level.
QuadratureRule lie_ball_rule(int d, Real R, int level);

struct IntegrateOptions {
  int level = 2;
  bool check_convergence = true;
  Real rel_tol = 1e-8;
  Real abs_tol = 1e-13;
};

// Integral of f against the Liouville volume, via action-angle coordinates
// (tensor Gauss on the moment simplices, trapezoid on the torus fibers).
Real integrate_M(const ModelManifold& model,
                 const std::function<Real(const ChartPoint&)>& f,
                 const IntegrateOptions& opts = {});

// Single-level evaluation without the two-level convergence check.
Real integrate_M_level(const ModelManifold& model,
                       const std::function<Real(const ChartPoint&)>& f,
                       int level);

// Quadrature total volume; cross-checked against the closed form in tests.
Real total_volume(const ModelManifold& model, int level = 3);

// Fixed-order compensated (Kahan) accumulator used by all reducers.
class KahanSum {
 public:
  void add(Real x) {
    const Real y = x - carry_;
    const Real t = sum_ + y;
    carry_ = (t - sum_) - y;
    sum_ = t;
  }
  Real value() const { return sum_; }

 private:
  Real sum_ = 0;
  Real carry_ = 0;
};

}  // namespace gqred

#endif
