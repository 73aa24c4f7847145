#include "qds/timebase.hpp"

#include <stdexcept>
#include <string>

namespace qds {

void EncodingParams::validate() const {
  if (bin_width <= 0)
    throw std::invalid_argument("bin_width must be positive");
  if (bins_per_slot < 1)
    throw std::invalid_argument("bins_per_slot must be at least 1");
  if (slots_per_frame < 2)
    throw std::invalid_argument("slots_per_frame must be at least 2");
}

PhotonRecord encode_time(Picoseconds t, const EncodingParams& params) {
  if (t < 0)
    throw std::invalid_argument("detection time must be non-negative, got " +
                                std::to_string(t));
  const Picoseconds T = params.frame_period();
  const Picoseconds slot_period = params.slot_period();
  PhotonRecord r;
  r.frame = t / T;
  const Picoseconds in_frame = t % T;
  r.slot = static_cast<int>(in_frame / slot_period);
  r.bin = static_cast<int>((in_frame % slot_period) / params.bin_width);
  return r;
}

Picoseconds decode_record(const PhotonRecord& r, const EncodingParams& params) {
  if (r.frame < 0 || r.slot < 0 || r.slot >= params.slots_per_frame ||
      r.bin < 0 || r.bin >= params.bins_per_slot)
    throw std::invalid_argument("photon record out of range for encoding");
  return r.frame * params.frame_period() + r.slot * params.slot_period() +
         r.bin * params.bin_width;
}

}  // namespace qds
