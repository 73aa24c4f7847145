#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

// Sifted protocol data shared by the party state machines, the ghost-imaging
// retrieval and the adversary harness.

namespace qds {

enum class ChannelId { X, Y };  // X = Alice-Bob, Y = Alice-Charlie

inline const char* channel_name(ChannelId c) {
  return c == ChannelId::X ? "X" : "Y";
}

// A sifted record: slot only, the bin has been consumed by sifting.
struct SiftedRecord {
  std::int64_t frame = 0;
  int slot = 0;

  auto operator<=>(const SiftedRecord&) const = default;
};

// A party's sifted collection for one quantum channel. At most one record per
// frame; records kept sorted by frame.
struct RecordBlock {
  ChannelId channel = ChannelId::X;
  std::vector<SiftedRecord> records;

  std::size_t size() const { return records.size(); }
  bool empty() const { return records.empty(); }

  // Slot of the record in `frame`, or -1 when the frame is absent.
  int slot_of(std::int64_t frame) const {
    auto it = std::lower_bound(
        records.begin(), records.end(), frame,
        [](const SiftedRecord& r, std::int64_t f) { return r.frame < f; });
    if (it == records.end() || it->frame != frame) return -1;
    return it->slot;
  }

  void sort_by_frame() {
    std::sort(records.begin(), records.end());
  }
};

// Bit vector of length M (slots_per_frame). A message is signable only if it
// is neither all-0 nor all-1.
struct Message {
  std::vector<std::uint8_t> bits;

  static Message from_string(const std::string& s);
  std::string to_string() const;

  int width() const { return static_cast<int>(bits.size()); }
  int ones() const {
    int n = 0;
    for (auto b : bits) n += b;
    return n;
  }
  bool signable() const {
    const int k = ones();
    return width() >= 2 && k > 0 && k < width();
  }

  bool operator==(const Message&) const = default;
};

// The frame numbers Alice publishes as the signature (strictly increasing).
struct SignatureElements {
  std::vector<std::int64_t> frames;

  std::size_t size() const { return frames.size(); }
  bool empty() const { return frames.empty(); }

  // Sorts and removes duplicates.
  void normalize() {
    std::sort(frames.begin(), frames.end());
    frames.erase(std::unique(frames.begin(), frames.end()), frames.end());
  }
};

}  // namespace qds
