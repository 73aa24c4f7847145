#pragma once

#include <cstdint>
#include <vector>

#include "qds/parties.hpp"
#include "qds/photonics.hpp"
#include "qds/records.hpp"
#include "qds/security.hpp"

// Attack strategies (Bob's forging, Alice's repudiation, channel
// eavesdropping and the selective-attack probe) with empirical success
// frequencies measured against the analytic bounds. The attackers receive
// only what they may legitimately know; the hidden keep/forward partition
// and hidden slot values have no interface here.

namespace qds {

struct AttackOutcome {
  int successes = 0;
  int trials = 0;
  double frequency = 0.0;
  double ci_low = 0.0;   // Wilson 95% interval
  double ci_high = 0.0;
  double analytic_bound = 0.0;
};

// Synthetic distribution-stage scale for messaging-stage attack trials.
// Both of a recipient's blocks carry per_slot_mean records per slot, so
// L = per_slot_mean.
struct AttackScale {
  int slots_per_frame = 10;
  double per_slot_mean = 100.0;  // <X> = <Y>
  double slot_error = 0.0378;    // e between Alice's and a recipient's records
};

// Bob forges `target` towards Charlie: he uses his forwarded X records
// (slots known exactly) plus Charlie's kept Y frames, each Y slot guessed
// wrongly with probability p_e (wrong guesses uniform over the other M-1
// slots). Success = Charlie accepts at th_c.
AttackOutcome forge_attack(const AttackScale& scale, const Message& target,
                           double p_e, double th_c, int trials,
                           std::uint64_t seed);

// Alice signs `message` but replaces a delta fraction of the signature
// elements with records whose slot mismatches the message. The hidden
// keep/forward partition splits the mismatches randomly between Bob's and
// Charlie's images. Success = Bob accepts at th_b AND Charlie rejects at
// th_c.
AttackOutcome repudiation_attack(const AttackScale& scale,
                                 const Message& message, double delta,
                                 double th_b, double th_c, int trials,
                                 std::uint64_t seed);

// A full-pipeline operating point for the channel-level attacks.
struct OperatingPoint {
  SourceParams source;
  EncodingParams encoding;
  ChannelPerturbation intrinsic;  // honest-system perturbation
  double disclose_fraction = 0.1;
};

// Runs the distribution stage with the intercept-resend perturbation at
// fraction chi and reports whether the inflated error estimate escapes the
// honest-run envelope e0 + 5 sigma.
struct EavesdropOutcome {
  double e_hat_honest = 0.0;
  double e_hat_attacked = 0.0;
  double envelope = 0.0;
  std::size_t sample_size = 0;
  bool detected = false;
};
EavesdropOutcome eavesdrop_attack(double chi, const OperatingPoint& op,
                                  std::uint64_t seed);

// Perturbs only photons whose guessed slot lies in the targeted subset
// (guesses correct with probability 1 - p_e) and reports how the error
// inflation spreads across slots.
struct SelectiveProbeReport {
  std::vector<double> baseline_error;  // per true slot
  std::vector<double> attacked_error;
  double targeted_inflation = 0.0;    // mean inflation over targeted slots
  double untargeted_inflation = 0.0;  // mean inflation over the rest
  double inflation_ratio = 0.0;       // targeted / untargeted, floor-guarded
};
SelectiveProbeReport selective_attack_probe(const std::vector<int>& targeted_slots,
                                            double chi, double p_e,
                                            const OperatingPoint& op,
                                            std::uint64_t seed);

}  // namespace qds
