#pragma once

#include <vector>

#include "qds/records.hpp"

// Temporal ghost-imaging retrieval: correlates signature elements with a
// sifted record block into per-slot counts, decides bits and computes noise
// factors for the zero-decided slots.

namespace qds {

struct GhostImage {
  std::vector<std::int64_t> counts;  // length M
  double block_mean = 0.0;           // <X> = |block| / M, before Alice's halving
  double sigma = 0.0;                // sqrt(<X>/2), Poisson fluctuation
};

struct NoiseReport {
  Message decided;
  std::vector<int> zero_slots;    // slots decided 0, ascending
  std::vector<double> factors;    // f(i) = counts(i) / (<X>/2), same order
  double max_factor = 0.0;
};

// Per-slot coincidence counts of sig against the block. Frames of sig absent
// from the block contribute nothing.
GhostImage retrieve(const SignatureElements& sig, const RecordBlock& block,
                    int slots_per_frame);

// bit(i) = 1 iff counts(i) >= <X>/2 - sigma (non-strict, per the decision
// rule). Throws when <X> = 0 (undecidable image).
Message decide_bits(const GhostImage& img);

// Noise factors for every slot decided 0. Throws when <X> = 0.
NoiseReport noise_factors(const GhostImage& img, const Message& decided);

}  // namespace qds
