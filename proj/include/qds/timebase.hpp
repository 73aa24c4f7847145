#pragma once

#include <compare>
#include <cstdint>

// Three-layer temporal encoding: a frame holds M slots, a slot holds a few
// bins. The slot index carries message information; frame and bin indices are
// announced publicly for sifting. All times are integer picoseconds and all
// indices are 0-based.

namespace qds {

using Picoseconds = std::int64_t;

struct EncodingParams {
  Picoseconds bin_width = 20;  // ps
  int bins_per_slot = 15;
  int slots_per_frame = 10;  // M, the message width

  Picoseconds slot_period() const { return bin_width * bins_per_slot; }
  Picoseconds frame_period() const { return slot_period() * slots_per_frame; }

  // Throws std::invalid_argument on a non-positive width, bins_per_slot < 1
  // or slots_per_frame < 2.
  void validate() const;
};

struct PhotonRecord {
  std::int64_t frame = 0;
  int slot = 0;
  int bin = 0;

  auto operator<=>(const PhotonRecord&) const = default;
};

// Maps an absolute detection time to its (frame, slot, bin) indices.
// Boundary times belong to the later bin (floor semantics). Negative t is
// rejected.
PhotonRecord encode_time(Picoseconds t, const EncodingParams& params);

// Left edge of the record's bin; inverse of encode_time up to within-bin
// offset. Out-of-range slot or bin is rejected.
Picoseconds decode_record(const PhotonRecord& r, const EncodingParams& params);

}  // namespace qds
