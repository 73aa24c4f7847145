#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "qds/security.hpp"

using namespace qds;

static const SecurityParams kGolden{0.0378, 0.447, 939.0, 0.1410, 0.3474};

TEST_CASE("bound trivial cases") {
  CHECK(honest_abort_bound({0.1, 1.0, 500.0, 0.1, 0.5}) == 2.0);  // Th_B = e
  CHECK(repudiation_bound({0.0, 1.0, 500.0, 0.3, 0.3}) == 2.0);   // Th_C = Th_B
  CHECK(forge_bound({0.0, 0.3, 500.0, 0.1, 0.3}) == 1.0);         // P_e = Th_C
}

TEST_CASE("golden bound values") {
  const double ha = honest_abort_bound(kGolden);
  const double rep = repudiation_bound(kGolden);
  const double forge = forge_bound(kGolden);
  CHECK(ha == doctest::Approx(2.0 * std::exp(-0.1032 * 0.1032 * 939.0)));
  CHECK(ha > 9.0e-5);
  CHECK(ha < 9.1e-5);
  CHECK(rep > 9.0e-5);
  CHECK(rep < 9.1e-5);
  CHECK(forge > 8.99e-5);
  CHECK(forge < 9.1e-5);

  const SecurityReport r = security_level(kGolden);
  CHECK(r.epsilon == doctest::Approx(0.91e-4).epsilon(0.02));
  CHECK(r.epsilon >= r.p_honest_abort);
  CHECK(r.epsilon >= r.p_repudiation);
  CHECK(r.epsilon >= r.p_forge);
}

TEST_CASE("bounds decrease monotonically in L and in the gaps") {
  double prev = 3.0;
  for (double L : {0.0, 10.0, 100.0, 1000.0, 10000.0}) {
    SecurityParams p = kGolden;
    p.L = L;
    const double b = honest_abort_bound(p);
    CHECK(b < prev);
    prev = b;
  }
  SecurityParams p = kGolden;
  p.L = 0.0;
  CHECK(security_level(p).epsilon == 2.0);

  // doubling the repudiation gap shrinks the bound
  SecurityParams wide = kGolden;
  wide.th_c = kGolden.th_b + 2.0 * (kGolden.th_c - kGolden.th_b);
  CHECK(repudiation_bound(wide) < repudiation_bound(kGolden));
}

TEST_CASE("union-bound variant scales each component by M") {
  const SecurityReport r = security_level(kGolden);
  const SecurityReport u = security_level_union(kGolden, 10);
  CHECK(u.p_honest_abort == doctest::Approx(10.0 * r.p_honest_abort));
  CHECK(u.p_repudiation == doctest::Approx(10.0 * r.p_repudiation));
  CHECK(u.p_forge == doctest::Approx(10.0 * r.p_forge));
  CHECK(u.epsilon == doctest::Approx(10.0 * r.epsilon));
}

namespace {

// Independent oracle: 1000x1000 grid search over e < Th_B < Th_C < P_e,
// then one local refinement pass around the coarse minimum (the coarse grid
// alone quantizes epsilon by a few percent at large L).
double grid_oracle_epsilon(double e, double p_e, double L, int n) {
  double best = 1e300, best_b = 0.0, best_c = 0.0;
  const double span = p_e - e;
  for (int i = 1; i < n; ++i) {
    const double th_b = e + span * i / n;
    for (int j = i + 1; j < n; ++j) {
      const double th_c = e + span * j / n;
      const double eps = security_level({e, p_e, L, th_b, th_c}).epsilon;
      if (eps < best) {
        best = eps;
        best_b = th_b;
        best_c = th_c;
      }
    }
  }
  const double step = span / n;
  for (int i = -n / 2; i <= n / 2; ++i) {
    const double th_b = best_b + 4.0 * step * i / n;
    for (int j = -n / 2; j <= n / 2; ++j) {
      const double th_c = best_c + 4.0 * step * j / n;
      if (!(e < th_b && th_b < th_c && th_c < p_e)) continue;
      const double eps = security_level({e, p_e, L, th_b, th_c}).epsilon;
      if (eps < best) best = eps;
    }
  }
  return best;
}

}  // namespace

TEST_CASE("optimizer matches a dense grid oracle") {
  const OptimizedThresholds opt = optimize_thresholds(0.0378, 0.447, 939.0);
  CHECK(opt.epsilon <= 0.91e-4);
  CHECK(opt.th_b > 0.0378);
  CHECK(opt.th_c < 0.447);
  CHECK(opt.th_b < opt.th_c);

  const double oracle = grid_oracle_epsilon(0.0378, 0.447, 939.0, 1000);
  CHECK(opt.epsilon <= oracle * 1.01);
  CHECK(oracle <= opt.epsilon * 1.01);

  // second operating point, L for a 2 s run
  const OptimizedThresholds opt2 = optimize_thresholds(0.0378, 0.447, 552.0);
  const double oracle2 = grid_oracle_epsilon(0.0378, 0.447, 552.0, 1000);
  CHECK(opt2.epsilon <= oracle2 * 1.01);
  CHECK(oracle2 <= opt2.epsilon * 1.01);
}

TEST_CASE("optimizer gap structure at e=0, P_e=1") {
  const OptimizedThresholds opt = optimize_thresholds(0.0, 1.0, 400.0);
  const double a = opt.th_b;                  // honest gap
  const double b = (opt.th_c - opt.th_b) / 2; // repudiation half-gap
  const double c = 1.0 - opt.th_c;            // forge gap
  // equal-exponent condition up to the prefactor-2 corrections:
  // a = b and a^2 L - ln 2 = c^2 L
  CHECK(a == doctest::Approx(b).epsilon(0.02));
  CHECK(a * a * 400.0 - std::log(2.0) ==
        doctest::Approx(c * c * 400.0).epsilon(0.05));
}

TEST_CASE("optimizer rejects invalid inputs") {
  CHECK_THROWS_AS(optimize_thresholds(0.5, 0.4, 100.0), std::domain_error);
  CHECK_THROWS_AS(optimize_thresholds(0.4, 0.4, 100.0), std::domain_error);
  CHECK_THROWS_AS(optimize_thresholds(0.1, 0.9, 0.0), std::domain_error);
}

TEST_CASE("required_L reaches the target security level") {
  const double L = required_L(0.0378, 0.447, 1e-4);
  CHECK(L > 939.0 * 0.98 - 40.0);  // 939 within 2 percent, one-sided slack
  CHECK(L == doctest::Approx(939.0).epsilon(0.02));
  CHECK(optimize_thresholds(0.0378, 0.447, L).epsilon <= 1e-4);
  CHECK(optimize_thresholds(0.0378, 0.447, L * 0.95).epsilon > 1e-4);

  // boundary case: a vacuous target is reached at (nearly) no statistics
  const double l1 = required_L(0.0378, 0.447, 1.0);
  CHECK(l1 >= 0.0);
  CHECK(l1 < 60.0);

  CHECK_THROWS(required_L(0.0378, 0.447, 0.0));
  CHECK_THROWS(required_L(0.0378, 0.447, 2.5));
  CHECK_THROWS(required_L(0.5, 0.4, 1e-4));
}

TEST_CASE("halving the target adds about ln2 over the squared gap") {
  const double t = 1e-4;
  const double l1 = required_L(0.0378, 0.447, t);
  const double l2 = required_L(0.0378, 0.447, t / 2.0);
  const OptimizedThresholds opt = optimize_thresholds(0.0378, 0.447, l1);
  const double gap = opt.th_b - 0.0378;  // optimal squared gap (all equalized)
  CHECK(l2 - l1 == doctest::Approx(std::log(2.0) / (gap * gap)).epsilon(0.15));
}
