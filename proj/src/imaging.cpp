#include "qds/imaging.hpp"

#include <cmath>
#include <stdexcept>

namespace qds {

GhostImage retrieve(const SignatureElements& sig, const RecordBlock& block,
                    int slots_per_frame) {
  GhostImage img;
  img.counts.assign(static_cast<std::size_t>(slots_per_frame), 0);
  // Merge join over the two frame-sorted lists.
  auto rec = block.records.begin();
  for (std::int64_t frame : sig.frames) {
    while (rec != block.records.end() && rec->frame < frame) ++rec;
    if (rec == block.records.end()) break;
    if (rec->frame == frame) ++img.counts[static_cast<std::size_t>(rec->slot)];
  }
  img.block_mean =
      static_cast<double>(block.size()) / static_cast<double>(slots_per_frame);
  img.sigma = std::sqrt(img.block_mean / 2.0);
  return img;
}

Message decide_bits(const GhostImage& img) {
  if (img.block_mean <= 0.0)
    throw std::runtime_error("ghost image undecidable: empty record block");
  const double boundary = img.block_mean / 2.0 - img.sigma;
  Message m;
  m.bits.reserve(img.counts.size());
  for (std::int64_t c : img.counts)
    m.bits.push_back(static_cast<double>(c) >= boundary ? 1 : 0);
  return m;
}

NoiseReport noise_factors(const GhostImage& img, const Message& decided) {
  if (img.block_mean <= 0.0)
    throw std::runtime_error("noise factors undefined: empty record block");
  if (decided.width() != static_cast<int>(img.counts.size()))
    throw std::invalid_argument("decided message width does not match image");
  NoiseReport rep;
  rep.decided = decided;
  const double half_mean = img.block_mean / 2.0;
  for (int i = 0; i < decided.width(); ++i) {
    if (decided.bits[static_cast<std::size_t>(i)] != 0) continue;
    const double f =
        static_cast<double>(img.counts[static_cast<std::size_t>(i)]) / half_mean;
    rep.zero_slots.push_back(i);
    rep.factors.push_back(f);
    if (f > rep.max_factor) rep.max_factor = f;
  }
  return rep;
}

}  // namespace qds
