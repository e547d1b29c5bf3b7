#include "test_common.hpp"

#include <cmath>

#include <fstream>

#include "gqred/zero_set.hpp"

using namespace gqtest;
using Catch::Approx;

TEST_CASE("zero-set rule for S1", "[zero_set]") {
  const ModelManifold m = cp1();
  const ActionSpec act = s1_action(m);
  const ZeroSetRule rule = zero_set_rule(act, m, 2);

  SECTION("nodes sit on the zero set") {
    Real worst = 0;
    rule.for_each([&](const ChartPoint& p, Real) {
      worst = std::max(worst, moment(act, m, p).norm());
    });
    CHECK(worst < 1e-10);
  }

  SECTION("volume is the equator length") {
    CHECK(rule.volume() == Approx(kPi * std::sqrt(2.0)).epsilon(1e-12));
  }

  SECTION("phi integrates to zero on the zero set") {
    Real total = 0;
    rule.for_each([&](const ChartPoint& p, Real w) {
      total += w * moment(act, m, p)[0];
    });
    CHECK(std::abs(total) < 1e-12);
  }
}

TEST_CASE("zero-set rule for S2 refines stably", "[zero_set]") {
  const ModelManifold m = cp1xcp1();
  const ActionSpec act = s2_action(m);

  Real worst = 0;
  const ZeroSetRule base = zero_set_rule(act, m, 1);
  base.for_each([&](const ChartPoint& p, Real) {
    worst = std::max(worst, moment(act, m, p).norm());
  });
  CHECK(worst < 1e-10);

  const Real v1 = zero_set_rule(act, m, 1).volume();
  const Real v2 = zero_set_rule(act, m, 2).volume();
  const Real v3 = zero_set_rule(act, m, 3).volume();
  // two-level Richardson reference from the finer pair
  const Real reference = v3 + (v3 - v2);
  CHECK(std::abs(v2 - reference) < 1e-6 * std::abs(reference));
  CHECK(std::abs(v2 - v3) < 1e-6 * std::abs(v3));
  // refinement error shrinks
  CHECK(std::abs(v3 - reference) <= std::abs(v1 - reference));
}

TEST_CASE("zero-set sample is deterministic and on the level set",
          "[zero_set]") {
  const ModelManifold m = cp1xcp1();
  const ActionSpec act = s2_action(m);
  const auto a = zero_set_sample(act, m, 20);
  const auto b = zero_set_sample(act, m, 20);
  REQUIRE(a.size() == 20);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(point_distance_sq(m, a[i], b[i]) < 1e-28);
    CHECK(moment(act, m, a[i]).norm() < 1e-10);
  }
}

TEST_CASE("rule tables export as plain text", "[zero_set]") {
  const ModelManifold m = cp1xcp1();
  const ActionSpec act = s2_action(m);
  const ZeroSetRule rule = zero_set_rule(act, m, 1);
  rule.dump("/tmp/gqred_zero_set.txt");
  std::ifstream in("/tmp/gqred_zero_set.txt");
  REQUIRE(in.good());
  int lines = 0;
  std::string line;
  while (std::getline(in, line)) ++lines;
  CHECK(lines == rule.slice_count());
}

TEST_CASE("empty or unsupported slices are rejected", "[zero_set]") {
  const ModelManifold m = cp1();
  IMat w(1, 2);
  w << 0, 1;
  // lambda = 2 lies outside the moment image [0, 1]
  const ActionSpec act = make_action(m, w, {{2, 1}});
  CHECK_THROWS_AS(zero_set_rule(act, m, 1), PreconditionError);
}
