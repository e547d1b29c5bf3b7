#include "test_common.hpp"

#include <cmath>
#include <map>

#include "gqred/densities.hpp"

using namespace gqtest;
using Catch::Approx;

namespace {

// Closed-form S1 densities from the exact monomial norms:
//   I_k = sqrt(k/2pi) 2pi 2^k (k/2)!^2 / (k+1)!     (k even)
//   J_k = sqrt(k/2pi) sqrt(pi) G((k+1)/2) / G(k/2+1) (k odd)
Real s1_I_oracle(int k) {
  const Real lg = std::lgamma(0.5 * k + 1.0) * 2.0 - std::lgamma(k + 2.0);
  return std::sqrt(k / kTwoPi) * kTwoPi * std::exp(k * std::log(2.0) + lg);
}

Real s1_J_oracle(int k) {
  const Real lg = std::lgamma(0.5 * (k + 1.0)) - std::lgamma(0.5 * k + 1.0);
  return std::sqrt(k / kTwoPi) * std::sqrt(kPi) * std::exp(lg);
}

}  // namespace

TEST_CASE("Laplace leading-order engine", "[densities]") {
  SECTION("exact Gaussians") {
    CHECK(laplace_leading(Mat::Identity(1, 1), 1.0, 100.0) ==
          Approx(std::sqrt(kTwoPi / 100.0)).epsilon(1e-14));
    CHECK(laplace_leading(Mat::Identity(2, 2), 1.0, 7.0) ==
          Approx(kTwoPi / 7.0).epsilon(1e-14));
  }
  SECTION("determinant scaling") {
    // |det H|^{-1/2}: scaling the Hessian by c scales the value by c^{-d/2}
    CHECK(laplace_leading(4.0 * Mat::Identity(2, 2), 1.0, 7.0) ==
          Approx(0.25 * laplace_leading(Mat::Identity(2, 2), 1.0, 7.0))
              .epsilon(1e-14));
    CHECK(laplace_leading(2.0 * Mat::Identity(1, 1), 1.0, 7.0) ==
          Approx(laplace_leading(Mat::Identity(1, 1), 1.0, 7.0) / std::sqrt(2.0))
              .epsilon(1e-14));
  }
  SECTION("indefinite Hessian is rejected") {
    Mat H(2, 2);
    H << 1, 0, 0, -1;
    CHECK_THROWS_AS(laplace_leading(H, 1.0, 10.0), PreconditionError);
  }
}

TEST_CASE("Hessian of rho", "[densities]") {
  const ModelManifold m = cp1();
  const ActionSpec act = s1_action(m);
  const ChartPoint x0 = make_point(m, {Complex(1, 0)});

  SECTION("S1 equator value 4 pi^2") {
    const Mat H = hessian_rho(act, m, x0);
    REQUIRE(H.rows() == 1);
    CHECK(H(0, 0) == Approx(4.0 * kPi * kPi).epsilon(1e-12));
  }

  SECTION("det H = 2^d vol^2 at 50 nodes") {
    const ModelManifold mm = cp1xcp1();
    const ActionSpec act2 = s2_action(mm);
    for (const ChartPoint& p : zero_set_sample(act2, mm, 50)) {
      const Mat H = hessian_rho(act2, mm, p);
      const Real vol = orbit_volume(act2, mm, p);
      CHECK(H.determinant() == Approx(2.0 * vol * vol).epsilon(1e-10));
      Eigen::LLT<Mat> llt(H);
      CHECK(llt.info() == Eigen::Success);
    }
  }

  SECTION("matches second finite differences of rho") {
    const ModelManifold mm = cp1xcp1();
    const ActionSpec act2 = s2_action(mm);
    const auto nodes = zero_set_sample(act2, mm, 5);
    const Real h = 1e-4;
    for (const ChartPoint& p : nodes) {
      const Mat H = hessian_rho(act2, mm, p);
      Vec xi(1);
      xi[0] = h;
      const Real plus = rho(act2, mm, xi, p);
      xi[0] = -h;
      const Real minus = rho(act2, mm, xi, p);
      const Real fd = (plus + minus) / (h * h);
      CHECK(std::abs(fd - H(0, 0)) < 1e-5 * std::abs(H(0, 0)));
    }
  }
}

TEST_CASE("density I against the closed-form oracle", "[densities]") {
  const ModelManifold m = cp1();
  const ActionSpec act = s1_action(m);
  const ChartPoint x0 = make_point(m, {Complex(1, 0)});
  const Observable one = make_observable("one", act, m);

  SECTION("k = 2 value 4 sqrt(pi) / 3") {
    const Real I2 = density_I(act, m, x0, 2, one);
    CHECK(I2 == Approx(4.0 * std::sqrt(kPi) / 3.0).epsilon(1e-9));
    CHECK(s1_I_oracle(2) == Approx(4.0 * std::sqrt(kPi) / 3.0).epsilon(1e-13));
  }

  SECTION("matches the oracle across k") {
    for (int k : {2, 4, 8, 16, 32, 64, 128}) {
      const Real I = density_I(act, m, x0, k, one);
      CHECK(I == Approx(s1_I_oracle(k)).epsilon(1e-8));
    }
  }

  SECTION("approaches pi from the orbit volume") {
    const Real I128 = density_I(act, m, x0, 128, one);
    CHECK(std::abs(I128 - kPi) < 0.05 * kPi);
  }

  SECTION("linearity: f = 0 gives 0") {
    Observable zero{"zero", [](const ChartPoint&) { return 0.0; }};
    CHECK(density_I(act, m, x0, 4, zero) == 0.0);
  }
}

TEST_CASE("density J against the closed-form oracle", "[densities]") {
  const ModelManifold m = cp1();
  const ActionSpec act = s1_action(m);
  const ChartPoint x0 = make_point(m, {Complex(1, 0)});
  const Observable one = make_observable("one", act, m);

  SECTION("matches the Beta-integral oracle on odd k") {
    for (int k : {3, 9, 33, 63}) {
      const Real J = density_J(act, m, x0, k, one);
      CHECK(J == Approx(s1_J_oracle(k)).epsilon(1e-8));
    }
  }

  SECTION("within 5% of 1 by k = 63") {
    CHECK(std::abs(density_J(act, m, x0, 63, one) - 1.0) < 0.05);
  }

  SECTION("constant symbols scale linearly") {
    Observable c{"c", [](const ChartPoint&) { return 2.5; }};
    CHECK(density_J(act, m, x0, 9, c) ==
          Approx(2.5 * density_J(act, m, x0, 9, one)).epsilon(1e-12));
  }

  SECTION("rejects k without a corrected lift") {
    CHECK_THROWS_AS(density_J(act, m, x0, 4, one), ValidationError);
  }
}

TEST_CASE("Laplace consistency of the densities", "[densities]") {
  const ModelManifold m = cp1();
  const ActionSpec act = s1_action(m);
  const ChartPoint x0 = make_point(m, {Complex(1, 0)});
  const Observable one = make_observable("one", act, m);

  for (int k : {16, 32, 64}) {
    const Mat H = hessian_rho(act, m, x0);
    const Real vol = orbit_volume(act, m, x0);
    const Real pred = vol * std::pow(k / kTwoPi, 0.5) *
                      laplace_leading(H, tau(act, m, Vec::Zero(1), x0), k);
    const Real I = density_I(act, m, x0, k, one);
    CHECK(std::abs(I - pred) < 3.0 / k * pred);
  }
}

TEST_CASE("density sweep report", "[densities]") {
  const ModelManifold m = cp1();
  const ActionSpec act = s1_action(m);
  const Observable one = make_observable("one", act, m);
  const auto nodes = zero_set_sample(act, m, 3);

  SECTION("S1 deviations decrease and the J column tends to 1") {
    const std::vector<int> ks = {8, 9, 16, 17, 32, 33};
    const DensityReport rep = density_limits(act, m, nodes, ks, one);
    REQUIRE(rep.rows.size() == ks.size() * nodes.size());
    // I at even k strictly decreasing
    Real prevI = -1;
    for (std::size_t j = 0; j < ks.size(); ++j) {
      if (rep.max_I_dev[j] < 0) continue;
      if (prevI >= 0) CHECK(rep.max_I_dev[j] < prevI);
      prevI = rep.max_I_dev[j];
    }
    // J limits are 1 at every node
    for (const DensityRow& row : rep.rows) CHECK(row.J_limit == 1.0);
    CHECK(rep.I_slope < 0);

    // report invariants: densities positive, per-k maxima recompute
    std::map<int, Real> maxI;
    for (const DensityRow& row : rep.rows) {
      if (row.I >= 0) CHECK(row.I > 0);
      if (row.J >= 0) CHECK(row.J > 0);
      if (row.I_dev >= 0)
        maxI[row.k] = std::max(maxI.count(row.k) ? maxI[row.k] : 0.0, row.I_dev);
    }
    for (std::size_t j = 0; j < ks.size(); ++j)
      if (rep.max_I_dev[j] >= 0)
        CHECK(rep.max_I_dev[j] == Approx(maxI[ks[j]]).margin(1e-300));
  }

  SECTION("S2 max-over-nodes deviation decreases (uniformity proxy)") {
    const ModelManifold mm = cp1xcp1();
    const ActionSpec act2 = s2_action(mm);
    const auto nodes2 = zero_set_sample(act2, mm, 6);
    const Observable one2 = make_observable("one", act2, mm);
    const DensityReport rep =
        density_limits(act2, mm, nodes2, {8, 16, 32}, one2);
    REQUIRE(rep.max_I_dev.size() == 3);
    CHECK(rep.max_I_dev[1] < rep.max_I_dev[0]);
    CHECK(rep.max_I_dev[2] < rep.max_I_dev[1]);
    CHECK(rep.max_J_dev[1] < rep.max_J_dev[0]);
    CHECK(rep.max_J_dev[2] < rep.max_J_dev[1]);
  }
}

TEST_CASE("densities for a two-dimensional torus", "[densities]") {
  // Full torus on CP^1 x CP^1 at the polytope center: the reduced space is a
  // point and the orbit is the product of the two equators.
  const ModelManifold m = cp1xcp1();
  IMat w(2, 4);
  w << 0, 1, 0, 0, 0, 0, 0, 1;
  const ActionSpec act = make_action(m, w, {{1, 2}, {1, 2}});
  // each weight row has an odd sum, so the parities split as in s1
  REQUIRE(validate_scenario(m, act, 4).valid(false));
  REQUIRE(validate_scenario(m, act, 9).valid(true));

  const ChartPoint x0 = zero_set_sample(act, m, 1)[0];
  const Observable one = make_observable("one", act, m);

  SECTION("orbit volume and Hessian") {
    // product of equator lengths (pi sqrt2)^2 = 2 pi^2
    CHECK(orbit_volume(act, m, x0) == Approx(2.0 * kPi * kPi).epsilon(1e-12));
    const Mat H = hessian_rho(act, m, x0);
    REQUIRE(H.rows() == 2);
    const Real vol = orbit_volume(act, m, x0);
    CHECK(H.determinant() == Approx(4.0 * vol * vol).epsilon(1e-10));
  }

  SECTION("I_k and J_k factor over the two circles") {
    // The flow splits into the two factors, so I_k is the square of the
    // one-circle density and J_k the square of its corrected counterpart.
    const Real I8 = density_I(act, m, x0, 8, one);
    const Real lg = 2.0 * std::lgamma(5.0) - std::lgamma(10.0);
    const Real one_circle =
        std::sqrt(8.0 / kTwoPi) * kTwoPi * std::exp(8.0 * std::log(2.0) + lg);
    CHECK(I8 == Approx(one_circle * one_circle).epsilon(1e-8));

    const Real J9 = density_J(act, m, x0, 9, one);
    const Real lgj = std::lgamma(5.0) - std::lgamma(5.5);
    const Real one_circle_j =
        std::sqrt(9.0 / kTwoPi) * std::sqrt(kPi) * std::exp(lgj);
    CHECK(J9 == Approx(one_circle_j * one_circle_j).epsilon(1e-8));
    CHECK(std::abs(density_J(act, m, x0, 33, one) - 1.0) < 0.05);
  }
}

TEST_CASE("observables are orbit invariant", "[densities]") {
  const ModelManifold m = cp1xcp1();
  const ActionSpec act = s2_action(m);
  std::mt19937 rng(71);
  std::uniform_real_distribution<Real> uni(0.0, 1.0);
  for (const std::string& tag : {"one", "moment_sum", "mnormsq", "gauss_moment"}) {
    const Observable obs = make_observable(tag, act, m);
    for (int t = 0; t < 25; ++t) {
      const ChartPoint p = random_point(m, rng);
      const Real base = obs.eval(p);
      const ChartPoint q = group_flow(act, m, unit_xi(1), uni(rng), p);
      CHECK(std::abs(obs.eval(q) - base) < 1e-10 * (1.0 + std::abs(base)));
    }
  }

  SECTION("moment_sum is u + v on S2") {
    std::mt19937 rng2(3);
    const Observable obs = make_observable("moment_sum", act, m);
    const ChartPoint p = random_point(m, rng2);
    const Vec u = action_coords(m, p);
    CHECK(obs.eval(p) == Approx(u[1] + u[3]).epsilon(1e-13));
  }
}
