#ifndef GQRED_TEST_COMMON_HPP
#define GQRED_TEST_COMMON_HPP

#include <random>

#include <catch2/catch_amalgamated.hpp>

#include "gqred/action.hpp"
#include "gqred/manifold.hpp"
#include "gqred/scenario.hpp"

namespace gqtest {

using namespace gqred;

inline ModelManifold cp1() { return ModelManifold({{1, 1}}); }
inline ModelManifold cp1_scaled(int c) { return ModelManifold({{1, c}}); }
inline ModelManifold cp1xcp1() { return ModelManifold({{1, 1}, {1, 1}}); }

// S1: CP^1, weight (0,1), lambda = 1/2 (zero set = equator).
inline ActionSpec s1_action(const ModelManifold& m) {
  IMat w(1, 2);
  w << 0, 1;
  return make_action(m, w, {{1, 2}});
}

// S2: CP^1 x CP^1, weights (0,1),(0,1), lambda = 1/2 (zero set u + v = 1/2).
inline ActionSpec s2_action(const ModelManifold& m) {
  IMat w(1, 4);
  w << 0, 1, 0, 1;
  return make_action(m, w, {{1, 2}});
}

inline ChartPoint make_point(const ModelManifold& m,
                             const std::vector<Complex>& affine) {
  ChartPoint p;
  p.chart.assign(m.factor_count(), 0);
  p.affine.resize(m.complex_dim());
  for (int a = 0; a < m.complex_dim(); ++a) p.affine[a] = affine[a];
  return renormalize(m, p);
}

inline ChartPoint random_point(const ModelManifold& m, std::mt19937& rng) {
  std::normal_distribution<Real> gauss(0.0, 1.0);
  CVec Z(m.hom_count());
  for (int a = 0; a < m.hom_count(); ++a) Z[a] = Complex(gauss(rng), gauss(rng));
  return from_homogeneous(m, Z);
}

inline Vec unit_xi(int d, int j = 0) {
  Vec xi = Vec::Zero(d);
  xi[j] = 1.0;
  return xi;
}

}  // namespace gqtest

#endif
