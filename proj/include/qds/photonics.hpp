#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "qds/timebase.hpp"

// Monte Carlo generation of correlated photon-pair detection events for
// Alice, Bob and Charlie: homogeneous Poisson emission, 50:50 idler routing,
// detection efficiencies, Gaussian timing jitter, dark counts, and an
// eavesdropping-perturbation hook on the idler channels.

namespace qds {

enum class Party { Alice, Bob, Charlie };

struct SourceParams {
  double pair_rate = 0.0;         // pairs per second
  double duration = 0.0;          // seconds
  double alice_efficiency = 1.0;  // signal-arm detection probability
  double idler_efficiency = 1.0;  // idler-arm detection probability
  double jitter_sigma = 0.0;      // ps, per detector
  double dark_count_rate = 0.0;   // counts per second per detector
  std::uint64_t seed = 0;

  void validate() const;
};

// Per-party absolute detection times (ps), sorted ascending. pair_id keeps
// the ground-truth pair linkage for diagnostics only; it is never visible to
// the protocol parties. Dark counts carry pair_id -1.
struct RawDetections {
  std::vector<Picoseconds> alice, bob, charlie;
  std::vector<std::int64_t> alice_pair, bob_pair, charlie_pair;

  const std::vector<Picoseconds>& of(Party p) const {
    switch (p) {
      case Party::Alice: return alice;
      case Party::Bob: return bob;
      default: return charlie;
    }
  }
};

struct ChannelPerturbation {
  double eavesdrop_fraction = 0.0;   // chi: per-photon attack probability
  double intrinsic_slot_error = 0.0;  // setup-imperfection perturbation

  void validate() const;
};

RawDetections generate_pairs(const SourceParams& params);

// Intercept-resend model: each idler detection is independently touched with
// probability chi (and, independently, with the intrinsic probability); a
// touched photon's slot is re-randomized uniformly over all M slots of its
// frame, frame and bin preserved. Expected added slot error per knob q is
// q (M-1)/M.
enum class IdlerFilter { Both, BobOnly, CharlieOnly };
RawDetections apply_eavesdropping(const RawDetections& d,
                                  const ChannelPerturbation& p,
                                  const EncodingParams& params,
                                  std::uint64_t seed,
                                  IdlerFilter filter = IdlerFilter::Both);

// Encodes one party's detection times and drops every frame holding more
// than one record (multi-photon discard). Result is frame-sorted with at
// most one record per frame.
std::vector<PhotonRecord> encode_and_discard_multiphoton(
    const std::vector<Picoseconds>& times, const EncodingParams& params);

// Sifted-coincidence slot-error measurement (frame + bin matching after
// multi-photon discard), pooled over both idler channels. Used by the
// calibration loop and as an independent check in tests.
struct SlotErrorMeasurement {
  std::size_t compared = 0;  // sifted coincident frames
  std::size_t errors = 0;    // slot disagreements among them
  double rate() const {
    return compared == 0 ? 0.0
                         : static_cast<double>(errors) / static_cast<double>(compared);
  }
};
SlotErrorMeasurement measure_sifted_slot_error(const RawDetections& d,
                                               const EncodingParams& params);

// Chooses a perturbation so that the simulated end-to-end sifted slot-error
// rate matches target_e within +-0.5 percentage points, measured over a run
// of at least 1e5 coincidences. Throws CalibrationError when the base
// configuration already exceeds the target.
ChannelPerturbation calibrate_error(double target_e, const SourceParams& base,
                                    const EncodingParams& params);

struct CalibrationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace qds
