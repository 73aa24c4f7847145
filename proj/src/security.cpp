#include "qds/security.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace qds {

double honest_abort_bound(const SecurityParams& p) {
  const double gap = p.th_b - p.e;
  return 2.0 * std::exp(-gap * gap * p.L);
}

double repudiation_bound(const SecurityParams& p) {
  const double gap = (p.th_c - p.th_b) / 2.0;
  return 2.0 * std::exp(-gap * gap * p.L);
}

double forge_bound(const SecurityParams& p) {
  const double gap = p.p_e - p.th_c;
  return std::exp(-gap * gap * p.L);
}

SecurityReport security_level(const SecurityParams& p) {
  SecurityReport r;
  r.p_honest_abort = honest_abort_bound(p);
  r.p_repudiation = repudiation_bound(p);
  r.p_forge = forge_bound(p);
  r.epsilon = std::max({r.p_honest_abort, r.p_repudiation, r.p_forge});
  return r;
}

SecurityReport security_level_union(const SecurityParams& p,
                                    int slots_per_frame) {
  SecurityReport r = security_level(p);
  const double m = static_cast<double>(slots_per_frame);
  r.p_honest_abort *= m;
  r.p_repudiation *= m;
  r.p_forge *= m;
  r.epsilon *= m;
  return r;
}

namespace {

double epsilon_at(double e, double p_e, double L, double th_b, double th_c) {
  return security_level({e, p_e, L, th_b, th_c}).epsilon;
}

}  // namespace

OptimizedThresholds optimize_thresholds(double e, double p_e, double L) {
  if (!(e < p_e)) throw std::domain_error("infeasible: e >= P_e");
  if (!(L > 0.0)) throw std::domain_error("infeasible: L <= 0");

  // Coarse-to-fine grid search over e < Th_B < Th_C < P_e. The objective is
  // a max of three functions monotone in the threshold gaps, so it has a
  // single basin and refinement around the grid minimum is safe.
  const int n = 64;
  double lo_b = e, hi_b = p_e, lo_c = e, hi_c = p_e;
  OptimizedThresholds best{0.0, 0.0, std::numeric_limits<double>::infinity()};
  for (int round = 0; round < 8; ++round) {
    double round_best = std::numeric_limits<double>::infinity();
    double rb_b = best.th_b, rb_c = best.th_c;
    const double step_b = (hi_b - lo_b) / (n + 1);
    const double step_c = (hi_c - lo_c) / (n + 1);
    for (int i = 1; i <= n; ++i) {
      const double th_b = lo_b + step_b * i;
      for (int j = 1; j <= n; ++j) {
        const double th_c = lo_c + step_c * j;
        if (!(th_b < th_c)) continue;
        const double eps = epsilon_at(e, p_e, L, th_b, th_c);
        if (eps < round_best ||
            (eps == round_best && (th_b < rb_b || (th_b == rb_b && th_c < rb_c)))) {
          round_best = eps;
          rb_b = th_b;
          rb_c = th_c;
        }
      }
    }
    if (round_best < best.epsilon) {
      best = {rb_b, rb_c, round_best};
    }
    // Shrink the box around the incumbent.
    const double span_b = (hi_b - lo_b) * 0.12;
    const double span_c = (hi_c - lo_c) * 0.12;
    lo_b = std::max(e, best.th_b - span_b);
    hi_b = std::min(p_e, best.th_b + span_b);
    lo_c = std::max(e, best.th_c - span_c);
    hi_c = std::min(p_e, best.th_c + span_c);
  }
  return best;
}

double required_L(double e, double p_e, double epsilon_target) {
  if (!(e < p_e)) throw std::domain_error("infeasible: e >= P_e");
  if (!(epsilon_target > 0.0 && epsilon_target < 2.0))
    throw std::domain_error("epsilon target must lie in (0, 2)");

  // Optimized epsilon is strictly decreasing in L; bracket then bisect.
  double lo = 0.0, hi = 1.0;
  while (optimize_thresholds(e, p_e, hi).epsilon > epsilon_target) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e9) throw std::domain_error("epsilon target unreachable");
  }
  for (int it = 0; it < 60 && (hi - lo) > 1e-6 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (optimize_thresholds(e, p_e, mid).epsilon > epsilon_target)
      lo = mid;
    else
      hi = mid;
  }
  return hi;
}

}  // namespace qds
