#pragma once

// Security-level bounds on the three protocol failure modes, threshold
// optimization and required-sample-size solving.
//
//   Prob(Honest Abort) <= 2 exp(-(Th_B - e)^2 L)
//   Prob(Repudiation)  <= 2 exp(-((Th_C - Th_B)/2)^2 L)
//   Prob(Forge)        <=   exp(-(P_e - Th_C)^2 L)
//
// The bounds are used as stated, prefactors included; values above 1 are
// reported as-is (they are bounds, not probabilities).

namespace qds {

struct SecurityParams {
  double e = 0.0;     // system slot-error rate
  double p_e = 1.0;   // adversary's per-record slot-guess failure prob, 1 - chi
  double L = 0.0;     // expected ghost-image coincidence count
  double th_b = 0.0;  // Bob's acceptance threshold
  double th_c = 0.0;  // Charlie's verification threshold
};

struct SecurityReport {
  double p_honest_abort = 0.0;
  double p_repudiation = 0.0;
  double p_forge = 0.0;
  double epsilon = 0.0;  // max of the three
};

double honest_abort_bound(const SecurityParams& p);
double repudiation_bound(const SecurityParams& p);
double forge_bound(const SecurityParams& p);
SecurityReport security_level(const SecurityParams& p);

// Union-bound variant over the M slots of a frame, clearly a coarser reading
// of the same inequalities: every component scaled by M.
SecurityReport security_level_union(const SecurityParams& p, int slots_per_frame);

struct OptimizedThresholds {
  double th_b = 0.0;
  double th_c = 0.0;
  double epsilon = 0.0;
};

// Minimizes the max of the three bounds over e < Th_B < Th_C < P_e by
// coarse-to-fine grid search. Throws std::domain_error when e >= P_e or
// L <= 0.
OptimizedThresholds optimize_thresholds(double e, double p_e, double L);

// Smallest L whose optimized epsilon is <= epsilon_target.
double required_L(double e, double p_e, double epsilon_target);

}  // namespace qds
