#include "test_common.hpp"

#include <cmath>

#include "gqred/integration.hpp"

using namespace gqtest;
using Catch::Approx;

TEST_CASE("closed-form monomial norms", "[integration]") {
  const ModelManifold m = cp1();

  SECTION("reference values") {
    SectionBasis b2 = full_basis(m, 2, false);
    IVec a(2);
    a << 1, 1;
    CHECK(monomial_norm_exact(m, b2, a) == Approx(kPi / 3.0).epsilon(1e-14));

    for (int k : {1, 2, 5, 9}) {
      SectionBasis bk = full_basis(m, k, false);
      IVec e(2);
      e << 0, k;
      CHECK(monomial_norm_exact(m, bk, e) ==
            Approx(kTwoPi / (k + 1)).epsilon(1e-13));
    }

    SectionBasis b0 = full_basis(m, 0, false);
    IVec z(2);
    z << 0, 0;
    CHECK(monomial_norm_exact(m, b0, z) == Approx(kTwoPi).epsilon(1e-14));
  }

  SECTION("degree mismatch is a structural error") {
    SectionBasis b2 = full_basis(m, 2, false);
    IVec bad(2);
    bad << 1, 2;
    CHECK_THROWS_AS(monomial_norm_exact(m, b2, bad), StructuralError);
  }
}

TEST_CASE("oracle equivalence of quadrature and Beta integrals",
          "[integration]") {
  // every monomial with k <= 8 in both scenario manifolds
  int cases = 0;
  for (const ModelManifold& m : {cp1(), cp1xcp1()}) {
    for (int k : {1, 2, 4, 8}) {
      for (bool corrected : {false, true}) {
        if (corrected && k % 2 == 0 && m.factor_count() == 0) continue;
        const SectionBasis basis = full_basis(m, k, corrected);
        for (int i = 0; i < basis.dim(); ++i) {
          const Section s = monomial_section(basis, i);
          const Real quad = integrate_M(
              m, [&](const ChartPoint& p) { return magnitude(m, s, p); });
          const Real exact =
              monomial_norm_exact(m, basis, basis.exponents[i]);
          CHECK(std::abs(quad - exact) < 1e-8 * exact);
          ++cases;
        }
      }
    }
  }
  CHECK(cases >= 200);
}

TEST_CASE("reduced integrals via the coarea weight", "[integration]") {
  const ModelManifold m = cp1();
  const ActionSpec act = s1_action(m);
  const ZeroSetRule rule = zero_set_rule(act, m, 2);

  SECTION("reduced volume of the S1 point quotient") {
    const Real v = integrate_reduced(act, m, rule,
                                     [](const ChartPoint&) { return 1.0; });
    CHECK(v == Approx(1.0).epsilon(1e-10));
  }

  SECTION("weights cancel against the orbit volume") {
    const ModelManifold mm = cp1xcp1();
    const ActionSpec act2 = s2_action(mm);
    const ZeroSetRule rule2 = zero_set_rule(act2, mm, 2);
    const Real lhs = integrate_reduced(act2, mm, rule2, [&](const ChartPoint& p) {
      return orbit_volume(act2, mm, p);
    });
    CHECK(lhs == Approx(rule2.volume()).epsilon(1e-10));

    // S2 reduced volume is pi (slice length 1/2 times 2 pi)
    const Real v = integrate_reduced(act2, mm, rule2,
                                     [](const ChartPoint&) { return 1.0; });
    CHECK(v == Approx(kPi).epsilon(1e-10));

    // stable under zero-set refinement
    const Real v_fine =
        integrate_reduced(act2, mm, zero_set_rule(act2, mm, 3),
                          [](const ChartPoint&) { return 1.0; }, false);
    CHECK(std::abs(v - v_fine) < 1e-6 * std::abs(v_fine));

    // linearity in the integrand
    const Real v3 = integrate_reduced(act2, mm, rule2,
                                      [](const ChartPoint&) { return 3.25; });
    CHECK(v3 == Approx(3.25 * v).epsilon(1e-12));
  }

  SECTION("non-invariant integrands are rejected") {
    const ModelManifold mm = cp1xcp1();
    const ActionSpec act2 = s2_action(mm);
    const ZeroSetRule rule2 = zero_set_rule(act2, mm, 1);
    CHECK_THROWS_AS(
        integrate_reduced(act2, mm, rule2,
                          [&](const ChartPoint& p) {
                            const CVec Z = homogeneous(mm, p);
                            return (Z[1] * std::conj(Z[0])).real();
                          }),
        PreconditionError);
  }
}

TEST_CASE("tau is the Jacobian of Lambda", "[integration]") {
  const ModelManifold m = cp1();
  const ActionSpec act = s1_action(m);
  const ChartPoint x0 = make_point(m, {Complex(1, 0)});

  SECTION("tau(0, x0) = vol(G.x0) at 50 nodes of both scenarios") {
    const ModelManifold mm = cp1xcp1();
    const ActionSpec act2 = s2_action(mm);
    for (const ChartPoint& p : zero_set_sample(act2, mm, 50)) {
      CHECK(tau(act2, mm, Vec::Zero(1), p) ==
            Approx(orbit_volume(act2, mm, p)).epsilon(1e-8));
    }
    CHECK(tau(act, m, Vec::Zero(1), x0) ==
          Approx(kPi * std::sqrt(2.0)).epsilon(1e-10));
  }

  SECTION("closed form 4 sqrt2 pi r^2/(1+r^2)^2 for S1") {
    for (Real s : {-0.2, -0.05, 0.04, 0.13, 0.4}) {
      Vec xi(1);
      xi[0] = s;
      const Real r2 = std::exp(2.0 * kTwoPi * s);
      const Real expect = 4.0 * std::sqrt(2.0) * kPi * r2 / ((1 + r2) * (1 + r2));
      CHECK(tau(act, m, xi, x0) == Approx(expect).epsilon(1e-10));
    }
  }

  SECTION("positive on a |xi| <= 3 grid") {
    for (int j = -6; j <= 6; ++j) {
      Vec xi(1);
      xi[0] = 0.5 * j;
      CHECK(tau(act, m, xi, x0) > 0.0);
    }
  }
}

TEST_CASE("coarea self-consistency over the stable set", "[integration]") {
  const ModelManifold m = cp1();
  const ActionSpec act = s1_action(m);
  const ZeroSetRule rule = zero_set_rule(act, m, 2);
  const QuadratureRule ball = lie_ball_rule(1, 1.6, 140);

  const auto coarea_integral = [&](const std::function<Real(const ChartPoint&)>& f) {
    Real total = 0;
    rule.for_each([&](const ChartPoint& x0, Real w) {
      Real inner = 0;
      for (int j = 0; j < ball.count(); ++j) {
        const Vec xi = ball.nodes.col(j);
        inner += ball.weights[j] * tau(act, m, xi, x0) *
                 f(complex_flow(act, m, xi, 1.0, x0));
      }
      total += w * inner;
    });
    return total;
  };

  const std::vector<std::function<Real(const ChartPoint&)>> fs = {
      [](const ChartPoint&) { return 1.0; },
      [&](const ChartPoint& p) { return action_coords(m, p)[1]; },
      [&](const ChartPoint& p) {
        const Real u = action_coords(m, p)[1];
        return u * (1.0 - u);
      },
      [&](const ChartPoint& p) {
        const CVec Z = homogeneous(m, p);
        return 1.0 + (Z[0] * std::conj(Z[1])).real() / Z.squaredNorm();
      },
      [&](const ChartPoint& p) {
        return std::exp(-moment_raw(act, m, p).squaredNorm());
      }};
  for (const auto& f : fs) {
    const Real direct = integrate_M(m, f);
    const Real fibered = coarea_integral(f);
    CHECK(std::abs(direct - fibered) < 1e-5 * std::abs(direct));
  }
}

TEST_CASE("tail monitor", "[integration]") {
  const ModelManifold m = cp1();
  const ActionSpec act = s1_action(m);
  const ChartPoint x0 = make_point(m, {Complex(1, 0)});

  const TailEstimate est = tail_monitor(act, m, x0, 8, 0.35);
  CHECK(est.monotone_R);
  CHECK(est.monotone_k);
  CHECK(est.observed > 0);
  CHECK(est.D > 0);
  // the fitted envelope bounds the observed mass at the fit anchor
  CHECK(est.observed <= 1.5 * est.b * std::exp(-est.radius * est.D * 8));

  SECTION("doubling k doubles the fitted decay slope within 20%") {
    // fit oracle: slopes of log(mass) in R at fixed k
    const auto slope_at = [&](int k) {
      const TailEstimate e1 = tail_monitor(act, m, x0, k, 0.30);
      const TailEstimate e2 = tail_monitor(act, m, x0, k, 0.45);
      return (std::log(e1.observed) - std::log(e2.observed)) / 0.15;
    };
    const Real s1 = slope_at(8);
    const Real s2 = slope_at(16);
    CHECK(s2 / s1 == Approx(2.0).epsilon(0.2));
  }
}

TEST_CASE("truncation radius controls the discarded tail", "[integration]") {
  const ModelManifold m = cp1();
  const ActionSpec act = s1_action(m);
  const ChartPoint x0 = make_point(m, {Complex(1, 0)});
  for (int k : {2, 8, 32}) {
    const Real R = truncation_radius(act, m, x0, k);
    Vec xi(1);
    xi[0] = R;
    CHECK(k * rho(act, m, xi, x0) >= 34.5);
    xi[0] = -R;
    CHECK(k * rho(act, m, xi, x0) >= 34.5);
  }
}
