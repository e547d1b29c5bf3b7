#include "test_common.hpp"

#include <cmath>

#include "gqred/reduction.hpp"

using namespace gqtest;
using Catch::Approx;

TEST_CASE("map_A restricts invariant sections", "[reduction]") {
  const ModelManifold m = cp1();
  const ActionSpec act = s1_action(m);
  const SectionBasis basis = invariant_basis(act, m, 2, false);
  const Section s = monomial_section(basis, 0);
  const ReducedSection rs = map_A(act, m, s);

  SECTION("node magnitudes equal the upstairs magnitude") {
    for (const ChartPoint& p : zero_set_sample(act, m, 10)) {
      const Complex v = reduced_value(act, m, rs, p);
      CHECK(std::norm(v) == Approx(0.25).epsilon(1e-12));
      CHECK(std::norm(v) == Approx(magnitude(m, s, p)).epsilon(1e-12));
    }
  }

  SECTION("orbit constancy of node magnitudes") {
    std::mt19937 rng(3);
    std::uniform_real_distribution<Real> uni(0.0, 1.0);
    const ChartPoint p = zero_set_sample(act, m, 1)[0];
    const Real base = std::norm(reduced_value(act, m, rs, p));
    for (int t = 0; t < 20; ++t) {
      const ChartPoint q = group_flow(act, m, unit_xi(1), uni(rng), p);
      CHECK(std::abs(std::norm(reduced_value(act, m, rs, q)) - base) <
            1e-12 * base);
    }
  }

  SECTION("zero section maps to zero; non-invariant input is rejected") {
    Section zero = s;
    zero.coeffs.setZero();
    const ReducedSection rz = map_A(act, m, zero);
    const ChartPoint p = zero_set_sample(act, m, 1)[0];
    CHECK(std::abs(reduced_value(act, m, rz, p)) == 0.0);

    const Section bad = monomial_section(full_basis(m, 2, false), 0);
    CHECK_THROWS_AS(map_A(act, m, bad), PreconditionError);
  }
}

TEST_CASE("map_B carries the contraction factor", "[reduction]") {
  const ModelManifold mm = cp1xcp1();
  const ActionSpec act = s2_action(mm);
  const SectionBasis basis = invariant_basis(act, mm, 8, true);
  REQUIRE(basis.dim() == 4);

  SECTION("|B_k r|^2 = 2^{-d/2} vol |r|^2 at all sampled nodes") {
    const Section r = monomial_section(basis, 2);
    const ReducedSection rb = map_B(act, mm, r);
    for (const ChartPoint& p : zero_set_sample(act, mm, 25)) {
      const Real down = std::norm(reduced_value(act, mm, rb, p));
      const Real expect = std::pow(2.0, -0.5) * orbit_volume(act, mm, p) *
                          magnitude(mm, r, p);
      CHECK(down == Approx(expect).epsilon(1e-8));
    }
  }

  SECTION("S1 single section: downstairs magnitude is pi |r|^2") {
    const ModelManifold m = cp1();
    const ActionSpec act1 = s1_action(m);
    const SectionBasis b1 = invariant_basis(act1, m, 3, true);
    const Section r = monomial_section(b1, 0);
    const ReducedSection rb = map_B(act1, m, r);
    const ChartPoint x0 = zero_set_sample(act1, m, 1)[0];
    CHECK(std::norm(reduced_value(act1, m, rb, x0)) ==
          Approx(kPi * magnitude(m, r, x0)).epsilon(1e-10));
  }
}

TEST_CASE("A_k has full rank on the invariant basis", "[reduction]") {
  const ModelManifold mm = cp1xcp1();
  const ActionSpec act = s2_action(mm);
  for (int k : {2, 4, 8, 16}) {
    const SectionBasis basis = invariant_basis(act, mm, k, false);
    const auto nodes = zero_set_sample(act, mm, 4 * basis.dim());
    CMat values(nodes.size(), basis.dim());
    for (int i = 0; i < basis.dim(); ++i) {
      const ReducedSection rs = map_A(act, mm, monomial_section(basis, i));
      for (std::size_t j = 0; j < nodes.size(); ++j)
        values(j, i) = reduced_value(act, mm, rs, nodes[j]);
    }
    Eigen::JacobiSVD<CMat> svd(values);
    const Vec sv = svd.singularValues();
    CHECK(sv[basis.dim() - 1] > 1e-10 * sv[0]);
  }
}

TEST_CASE("Gram reports", "[reduction]") {
  const ModelManifold m = cp1();
  const ActionSpec act = s1_action(m);

  SECTION("S1 is one dimensional with mu = 1/I_k") {
    for (int k : {2, 8, 32}) {
      const GramReport rep = gram_report(act, m, k, false);
      REQUIRE(rep.dim == 1);
      CHECK(rep.defect == Approx(0.0).margin(1e-15));
      const Observable one = make_observable("one", act, m);
      const ChartPoint x0 = zero_set_sample(act, m, 1)[0];
      const Real Ik = density_I(act, m, x0, k, one);
      CHECK(rep.mu[0] == Approx(1.0 / Ik).epsilon(1e-7));
    }
  }

  SECTION("S2 uncorrected defect reflects the orbit-volume spread") {
    const ModelManifold mm = cp1xcp1();
    const ActionSpec act2 = s2_action(mm);
    const GramReport rep = gram_report(act2, mm, 16, false);
    REQUIRE(rep.dim == 9);
    CHECK(rep.defect >= 0.02);
    // Grams Hermitian positive definite, generalized eigenvalues positive
    CHECK(rep.mu.minCoeff() > 0);
    CHECK((rep.gram_up - rep.gram_up.adjoint()).norm() < 1e-12);
    CHECK((rep.gram_down - rep.gram_down.adjoint()).norm() < 1e-12);
  }

  SECTION("S2 corrected defect decreases and is below 0.05 by k = 64") {
    const ModelManifold mm = cp1xcp1();
    const ActionSpec act2 = s2_action(mm);
    Real prev = 1;
    for (int k : {16, 32, 64}) {
      const GramReport rep = gram_report(act2, mm, k, true);
      CHECK(rep.defect < prev);
      prev = rep.defect;
      if (k == 64) CHECK(rep.defect < 0.05);
    }
  }

  SECTION("empty invariant space reports no matrices") {
    // S1 at k = 2 with shift 1/4: k lambda = 1/2 not integral -> invalid
    IMat w(1, 2);
    w << 0, 1;
    const ActionSpec act4 = make_action(m, w, {{1, 4}});
    CHECK_THROWS_AS(gram_report(act4, m, 2, false), ValidationError);
    const GramReport rep = gram_report(act4, m, 4, false);
    CHECK(rep.dim == 1);  // a1 = 1
  }
}

TEST_CASE("Gram identities against the densities", "[reduction]") {
  // The unit upstairs norm of each orthonormal section
  // equals the reduced integral of its mapped magnitude weighted by I_k
  // (uncorrected) or J_k (corrected). Every ingredient is fiber-invariant,
  // so the fiber average contributes (2 pi)^n per slice node.
  const ModelManifold mm = cp1xcp1();
  const ActionSpec act = s2_action(mm);
  const Observable one = make_observable("one", act, mm);
  const int n = mm.complex_dim();
  const int d = act.dim();

  ZeroSetOptions zopts;
  zopts.slice_nodes = 28;
  zopts.fiber_nodes = 4;
  const ZeroSetRule rule = zero_set_rule(act, mm, 1, zopts);
  DensityOptions dopts;
  dopts.check_convergence = false;

  for (int k : {4, 8, 16}) {
    for (bool corrected : {false, true}) {
      const auto sections =
          orthonormal_invariant_sections(act, mm, k, corrected);
      // densities and coarea weights per slice node, shared by all sections
      std::vector<Real> weight(rule.slice_count());
      for (int s = 0; s < rule.slice_count(); ++s) {
        const ChartPoint p = rule.point(s, Vec::Zero(n));
        const Real density = corrected
                                 ? density_J(act, mm, p, k, one, dopts)
                                 : density_I(act, mm, p, k, one, dopts);
        Real w = rule.slice_node(s).weight * std::pow(kTwoPi, n) * density /
                 orbit_volume(act, mm, p);
        if (corrected) w *= bk_pointwise_ratio(act, mm, p);
        weight[s] = w;
      }
      for (const Section& sec : sections) {
        Real down = 0;
        for (int s = 0; s < rule.slice_count(); ++s)
          down += weight[s] * magnitude(mm, sec, rule.point(s, Vec::Zero(n)));
        down *= std::pow(k / kTwoPi, 0.5 * (n - d));
        CHECK(std::abs(down - 1.0) < 1e-5);
      }
    }
  }
}

TEST_CASE("Toeplitz pairs", "[reduction]") {
  const ModelManifold mm = cp1xcp1();
  const ActionSpec act = s2_action(mm);

  SECTION("identity symbol gives the identity operator") {
    const Observable one = make_observable("one", act, mm);
    const ToeplitzMatrices tm = toeplitz_pair(act, mm, 8, one);
    CHECK((tm.upstairs - CMat::Identity(tm.dim, tm.dim)).norm() < 1e-8);
    CHECK(tm.defect < 1e-8);
  }

  SECTION("moment-sum defect decreases toward zero") {
    const Observable f = make_observable("moment_sum", act, mm);
    Real prev = 10;
    for (int k : {8, 16, 32}) {
      const ToeplitzMatrices tm = toeplitz_pair(act, mm, k, f);
      CHECK(tm.defect < prev);
      prev = tm.defect;
    }
    CHECK(prev < 0.05);
  }

  SECTION("linearity in the symbol") {
    Observable c{"c", [](const ChartPoint&) { return 3.0; }};
    const Observable one = make_observable("one", act, mm);
    const ToeplitzMatrices t1 = toeplitz_pair(act, mm, 8, one);
    const ToeplitzMatrices tc = toeplitz_pair(act, mm, 8, c);
    CHECK((tc.upstairs - 3.0 * t1.upstairs).norm() < 1e-10);
    CHECK(tc.defect == Approx(3.0 * t1.defect).margin(1e-10));
  }

  SECTION("symbols that vary on orbits are rejected") {
    Observable bad{"bad", [&](const ChartPoint& p) {
                     const CVec Z = homogeneous(mm, p);
                     return (Z[1] * std::conj(Z[0])).real();
                   }};
    CHECK_THROWS_AS(toeplitz_pair(act, mm, 8, bad), PreconditionError);
  }
}

TEST_CASE("reduced Gram via explicit fiber quadrature matches the fiber sums",
          "[reduction]") {
  // Validates the analytic fiber average against a brute-force trapezoid
  // loop at low k, including the aliasing behavior of coarse fibers.
  const ModelManifold mm = cp1xcp1();
  const ActionSpec act = s2_action(mm);
  const int k = 4;
  const SectionBasis basis = invariant_basis(act, mm, k, false);
  GramOptions opts;
  opts.slice_nodes = 24;
  opts.fiber_nodes = 7;  // enough for |delta| <= 4 weights
  const GramReport rep = gram_report(act, mm, k, false, opts);

  ZeroSetOptions zopts;
  zopts.slice_nodes = 24;
  zopts.fiber_nodes = 7;
  const ZeroSetRule rule = zero_set_rule(act, mm, 1, zopts);
  const int n = mm.complex_dim();
  const int d = act.dim();
  CMat brute = CMat::Zero(basis.dim(), basis.dim());
  std::vector<Section> monos;
  for (int i = 0; i < basis.dim(); ++i)
    monos.push_back(monomial_section(basis, i));
  rule.for_each([&](const ChartPoint& p, Real w) {
    CVec v(basis.dim());
    for (int i = 0; i < basis.dim(); ++i) v[i] = framed_value(mm, monos[i], p);
    brute += w / orbit_volume(act, mm, p) * v * v.adjoint();
  });
  brute *= std::pow(k / kTwoPi, 0.5 * (n - d));
  CHECK((brute - rep.gram_down).norm() < 1e-10 * rep.gram_down.norm());
}

TEST_CASE("peak sections", "[reduction]") {
  const ModelManifold mm = cp1xcp1();
  const ActionSpec act = s2_action(mm);

  SECTION("lattice rounding of the target") {
    // target u = 1/4: |z| = 1/sqrt(3) on the first factor
    const Real r = 1.0 / std::sqrt(3.0);
    const ChartPoint target = make_point(mm, {Complex(r, 0), Complex(0, r)});
    const Section s = peak_section(act, mm, 16, target);
    int idx = -1;
    for (int i = 0; i < s.basis.dim(); ++i)
      if (s.coeffs[i] != Complex(0, 0)) idx = i;
    REQUIRE(idx >= 0);
    CHECK(s.basis.exponents[idx][1] == 4);  // a1 = k u = 4
    CHECK(s.basis.exponents[idx][3] == 4);  // b1 = 4
  }

  SECTION("downstairs norm concentrates near the target") {
    const ChartPoint target = make_point(mm, {Complex(0, 0), Complex(1, 0)});
    const int k = 64;
    const Section s = peak_section(act, mm, k, target);
    const ZeroSetRule rule = zero_set_rule(act, mm, 2);
    const Vec ut = action_coords(mm, target);
    Real inside = 0, total = 0;
    rule.for_each([&](const ChartPoint& p, Real w) {
      const Real mag = magnitude(mm, s, p) / orbit_volume(act, mm, p);
      total += w * mag;
      if ((action_coords(mm, p) - ut).norm() < 0.1 * std::sqrt(2.0))
        inside += w * mag;
    });
    CHECK(inside / total >= 0.9);
  }

  SECTION("Rayleigh quotients separate targets with different orbit volumes") {
    const int k = 64;
    const Real r = 1.0 / std::sqrt(3.0);
    const ChartPoint t1 = make_point(mm, {Complex(0, 0), Complex(1, 0)});
    const ChartPoint t2 = make_point(mm, {Complex(r, 0), Complex(0, r)});
    const ZeroSetRule rule = zero_set_rule(act, mm, 2);
    const auto rayleigh = [&](const ChartPoint& target) {
      const Section s = peak_section(act, mm, k, target);  // unit upstairs norm
      const ReducedSection rs = map_A(act, mm, s);
      return reduced_inner(act, mm, rule, rs, rs).real();
    };
    const Real q1 = rayleigh(t1);
    const Real q2 = rayleigh(t2);
    CHECK(std::abs(q1 - q2) / std::max(q1, q2) >= 0.10);
  }
}

TEST_CASE("corrected dimensions match the reduced Riemann-Roch count",
          "[reduction]") {
  const ModelManifold mm = cp1xcp1();
  const ActionSpec act = s2_action(mm);
  for (int k : {2, 4, 8, 16, 32}) {
    const int upstairs =
        static_cast<int>(invariant_exponents(act, mm, k, true).size());
    CHECK(upstairs == reduced_dimension(act, mm, k, true));
    const int upstairs_unc =
        static_cast<int>(invariant_exponents(act, mm, k, false).size());
    CHECK(upstairs_unc == reduced_dimension(act, mm, k, false));
  }

  const ModelManifold m = cp1();
  const ActionSpec act1 = s1_action(m);
  CHECK(reduced_dimension(act1, m, 3, true) == 1);
  CHECK(static_cast<int>(invariant_exponents(act1, m, 3, true).size()) == 1);
}
