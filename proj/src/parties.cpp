#include "qds/parties.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "qds/rng.hpp"

namespace qds {

// -- Transcript ------------------------------------------------------------

namespace {

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace

void Transcript::log(const std::string& from, const std::string& to,
                     ChannelSecurity security, const std::string& step,
                     const std::string& payload) {
  TranscriptEntry e;
  e.from = from;
  e.to = to;
  e.security = security;
  e.step = step;
  e.digest = fnv1a(payload);
  if (keep_payloads) e.payload = payload;
  entries.push_back(std::move(e));
}

void Transcript::write(std::ostream& os) const {
  for (const auto& e : entries) {
    os << e.from << "->" << e.to << ' '
       << (e.security == ChannelSecurity::Secure ? "secure" : "auth") << ' '
       << e.step << ' ' << std::hex << e.digest << std::dec << '\n';
  }
}

// -- Distribution stage ----------------------------------------------------

namespace {

// Indices of frame-coincident records in two frame-sorted lists.
std::vector<std::pair<std::size_t, std::size_t>> common_frames(
    const std::vector<PhotonRecord>& a, const std::vector<PhotonRecord>& b) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i].frame < b[j].frame) {
      ++i;
    } else if (b[j].frame < a[i].frame) {
      ++j;
    } else {
      out.emplace_back(i, j);
      ++i;
      ++j;
    }
  }
  return out;
}

std::string records_payload(const std::vector<PhotonRecord>& recs,
                            bool with_slots) {
  std::string s;
  s.reserve(recs.size() * 8);
  for (const auto& r : recs) {
    s += std::to_string(r.frame);
    if (with_slots) {
      s += '.';
      s += std::to_string(r.slot);
    }
    s += '.';
    s += std::to_string(r.bin);
    s += ' ';
  }
  return s;
}

std::string sifted_payload(const std::vector<SiftedRecord>& recs) {
  std::string s;
  s.reserve(recs.size() * 8);
  for (const auto& r : recs) {
    s += std::to_string(r.frame);
    s += '.';
    s += std::to_string(r.slot);
    s += ' ';
  }
  return s;
}

struct DisclosureResult {
  ChannelEstimate estimate;
  std::vector<std::int64_t> disclosed_frames;  // consumed from both sides
};

// Step (3) on one channel: reveal a random sample of coincident frames with
// full (frame, slot, bin) records. Slot comparison is restricted to the
// bin-matched subset so that the estimate tracks the post-sift error rate.
DisclosureResult disclose_and_estimate(const std::vector<PhotonRecord>& alice,
                                       const std::vector<PhotonRecord>& other,
                                       double fraction, Rng& rng) {
  const auto common = common_frames(alice, other);
  const std::size_t k =
      static_cast<std::size_t>(fraction * static_cast<double>(common.size()));
  std::vector<std::uint32_t> order(common.size());
  for (std::size_t i = 0; i < order.size(); ++i)
    order[i] = static_cast<std::uint32_t>(i);
  // Partial Fisher-Yates: the first k entries are a uniform sample.
  for (std::size_t i = 0; i < k && i + 1 < order.size(); ++i) {
    const std::size_t j =
        i + static_cast<std::size_t>(rng.below(order.size() - i));
    std::swap(order[i], order[j]);
  }
  DisclosureResult res;
  std::vector<SiftedRecord> sample_a, sample_b;
  for (std::size_t i = 0; i < k; ++i) {
    const auto [ia, ib] = common[order[i]];
    res.disclosed_frames.push_back(alice[ia].frame);
    if (alice[ia].bin == other[ib].bin) {
      sample_a.push_back({alice[ia].frame, alice[ia].slot});
      sample_b.push_back({other[ib].frame, other[ib].slot});
    }
  }
  std::sort(res.disclosed_frames.begin(), res.disclosed_frames.end());
  const auto [e_hat, n] = estimate_channel(sample_a, sample_b);
  res.estimate.e_hat = e_hat;
  res.estimate.sample_size = n;
  return res;
}

void remove_frames(std::vector<PhotonRecord>& recs,
                   const std::vector<std::int64_t>& frames) {
  std::erase_if(recs, [&](const PhotonRecord& r) {
    return std::binary_search(frames.begin(), frames.end(), r.frame);
  });
}

std::vector<PhotonRecord> select_frames(const std::vector<PhotonRecord>& recs,
                                        const std::vector<std::int64_t>& frames) {
  std::vector<PhotonRecord> out;
  for (const auto& r : recs)
    if (std::binary_search(frames.begin(), frames.end(), r.frame))
      out.push_back(r);
  return out;
}

// Step (4): frame-and-bin sifting; the surviving records drop their bins.
std::pair<RecordBlock, RecordBlock> sift_channel(
    const std::vector<PhotonRecord>& alice,
    const std::vector<PhotonRecord>& other, ChannelId channel) {
  RecordBlock a, b;
  a.channel = b.channel = channel;
  for (const auto& [ia, ib] : common_frames(alice, other)) {
    if (alice[ia].bin != other[ib].bin) continue;
    a.records.push_back({alice[ia].frame, alice[ia].slot});
    b.records.push_back({other[ib].frame, other[ib].slot});
  }
  return {std::move(a), std::move(b)};
}

}  // namespace

std::pair<double, std::size_t> estimate_channel(
    const std::vector<SiftedRecord>& disclosed_a,
    const std::vector<SiftedRecord>& disclosed_b) {
  auto a = disclosed_a;
  auto b = disclosed_b;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t compared = 0, errors = 0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i].frame < b[j].frame) {
      ++i;
    } else if (b[j].frame < a[i].frame) {
      ++j;
    } else {
      ++compared;
      if (a[i].slot != b[j].slot) ++errors;
      ++i;
      ++j;
    }
  }
  if (compared == 0)
    throw ProtocolError("channel estimation failed: no comparable frames");
  return {static_cast<double>(errors) / static_cast<double>(compared), compared};
}

SymmetrizedBlocks symmetrize(const RecordBlock& bob_block,
                             const RecordBlock& charlie_block,
                             std::uint64_t seed) {
  Rng rng(seed);
  auto split = [&rng](const RecordBlock& block, RecordBlock& keep,
                      RecordBlock& forward) {
    keep.channel = forward.channel = block.channel;
    std::vector<std::uint32_t> order(block.size());
    for (std::size_t i = 0; i < order.size(); ++i)
      order[i] = static_cast<std::uint32_t>(i);
    rng.shuffle(order);
    std::size_t n_keep = block.size() / 2;
    if (block.size() % 2 == 1 && rng.bernoulli(0.5)) ++n_keep;
    for (std::size_t i = 0; i < order.size(); ++i) {
      auto& dst = (i < n_keep) ? keep : forward;
      dst.records.push_back(block.records[order[i]]);
    }
    keep.sort_by_frame();
    forward.sort_by_frame();
  };
  SymmetrizedBlocks out;
  split(bob_block, out.bob_keep, out.bob_forward);
  split(charlie_block, out.charlie_keep, out.charlie_forward);
  return out;
}

PartyState run_distribution(const RawDetections& detections,
                            const EncodingParams& params,
                            double disclose_fraction, std::uint64_t seed,
                            const ChannelBounds& bounds,
                            Transcript* transcript) {
  params.validate();
  if (!(disclose_fraction > 0.0 && disclose_fraction < 1.0))
    throw std::invalid_argument("disclose_fraction must lie in (0,1)");

  if (transcript) {
    const std::string enc = "bin_width=" + std::to_string(params.bin_width) +
                            " bins_per_slot=" + std::to_string(params.bins_per_slot) +
                            " slots_per_frame=" + std::to_string(params.slots_per_frame);
    transcript->log("A", "B", ChannelSecurity::Authenticated, "encoding-announce", enc);
    transcript->log("A", "C", ChannelSecurity::Authenticated, "encoding-announce", enc);
  }

  // Step (2): encode, discard multi-photon frames.
  auto alice = encode_and_discard_multiphoton(detections.alice, params);
  auto bob = encode_and_discard_multiphoton(detections.bob, params);
  auto charlie = encode_and_discard_multiphoton(detections.charlie, params);

  // Step (3): disclose an error-estimation sample per channel; disclosed
  // frames are public and never re-enter the signature path.
  Rng disclosure_rng(derive_seed(seed, 0xd15c));
  const auto disc_x = disclose_and_estimate(alice, bob, disclose_fraction,
                                            disclosure_rng);
  if (transcript) {
    transcript->log("A", "B", ChannelSecurity::Authenticated,
                    "error-estimate-disclose",
                    records_payload(select_frames(alice, disc_x.disclosed_frames),
                                    /*with_slots=*/true));
    transcript->log("B", "A", ChannelSecurity::Authenticated,
                    "error-estimate-disclose",
                    records_payload(select_frames(bob, disc_x.disclosed_frames),
                                    /*with_slots=*/true));
  }
  remove_frames(alice, disc_x.disclosed_frames);
  remove_frames(bob, disc_x.disclosed_frames);

  const auto disc_y = disclose_and_estimate(alice, charlie, disclose_fraction,
                                            disclosure_rng);
  if (transcript) {
    transcript->log("A", "C", ChannelSecurity::Authenticated,
                    "error-estimate-disclose",
                    records_payload(select_frames(alice, disc_y.disclosed_frames),
                                    /*with_slots=*/true));
    transcript->log("C", "A", ChannelSecurity::Authenticated,
                    "error-estimate-disclose",
                    records_payload(select_frames(charlie, disc_y.disclosed_frames),
                                    /*with_slots=*/true));
  }
  remove_frames(alice, disc_y.disclosed_frames);
  remove_frames(charlie, disc_y.disclosed_frames);

  // Step (4): announce frame and bin numbers, keep matching records.
  if (transcript) {
    transcript->log("A", "B", ChannelSecurity::Authenticated, "sift-announce",
                    records_payload(alice, /*with_slots=*/false));
    transcript->log("B", "A", ChannelSecurity::Authenticated, "sift-announce",
                    records_payload(bob, /*with_slots=*/false));
    transcript->log("A", "C", ChannelSecurity::Authenticated, "sift-announce",
                    records_payload(alice, /*with_slots=*/false));
    transcript->log("C", "A", ChannelSecurity::Authenticated, "sift-announce",
                    records_payload(charlie, /*with_slots=*/false));
  }
  PartyState state;
  state.encoding = params;
  auto [xa, xb] = sift_channel(alice, bob, ChannelId::X);
  auto [ya, yc] = sift_channel(alice, charlie, ChannelId::Y);
  state.alice_x = std::move(xa);
  state.alice_y = std::move(ya);
  if (state.alice_x.empty() || state.alice_y.empty())
    throw ProtocolError("distribution failed: empty post-sift block");

  // Step (5): Bob-Charlie secret half exchange over the secure channel.
  auto sym = symmetrize(xb, yc, derive_seed(seed, 0x5e5e));
  if (transcript) {
    transcript->log("B", "C", ChannelSecurity::Secure, "symmetrize-exchange",
                    sifted_payload(sym.bob_forward.records));
    transcript->log("C", "B", ChannelSecurity::Secure, "symmetrize-exchange",
                    sifted_payload(sym.charlie_forward.records));
  }
  state.bob_keep = std::move(sym.bob_keep);
  state.charlie_from_bob = std::move(sym.bob_forward);
  state.charlie_keep = std::move(sym.charlie_keep);
  state.bob_from_charlie = std::move(sym.charlie_forward);

  if (state.bob_keep.empty() || state.bob_from_charlie.empty() ||
      state.charlie_keep.empty() || state.charlie_from_bob.empty())
    throw ProtocolError("distribution failed: empty symmetrized block");

  state.estimate_x = disc_x.estimate;
  state.estimate_x.chi_bound = bounds.chi_x;
  state.estimate_y = disc_y.estimate;
  state.estimate_y.chi_bound = bounds.chi_y;
  return state;
}

// -- Messaging stage -------------------------------------------------------

SignatureElements sign(const Message& message, const RecordBlock& alice_x,
                       const RecordBlock& alice_y, std::uint64_t seed,
                       const SignOptions& options, Transcript* transcript) {
  if (!message.signable())
    throw ProtocolError(
        "message rejected: all bits 1 or all bits 0 (or width < 2)");

  // Union of Alice's two blocks; a frame present on both channels is the
  // same photon, keep one record.
  std::vector<SiftedRecord> pool;
  pool.reserve(alice_x.size() + alice_y.size());
  pool.insert(pool.end(), alice_x.records.begin(), alice_x.records.end());
  pool.insert(pool.end(), alice_y.records.begin(), alice_y.records.end());
  std::sort(pool.begin(), pool.end());
  pool.erase(std::unique(pool.begin(), pool.end(),
                         [](const SiftedRecord& a, const SiftedRecord& b) {
                           return a.frame == b.frame;
                         }),
             pool.end());
  if (pool.empty()) throw ProtocolError("cannot sign: no records");

  if (options.halve) {
    Rng rng(seed);
    rng.shuffle(pool);
    pool.resize(pool.size() / 2);
  }

  SignatureElements sig;
  for (const auto& r : pool) {
    if (r.slot >= message.width())
      throw ProtocolError("record slot exceeds message width");
    if (message.bits[static_cast<std::size_t>(r.slot)]) sig.frames.push_back(r.frame);
  }
  sig.normalize();
  if (sig.empty()) throw ProtocolError("cannot sign: empty signature");

  if (transcript) {
    std::string payload;
    payload.reserve(sig.size() * 8);
    for (auto f : sig.frames) {
      payload += std::to_string(f);
      payload += ' ';
    }
    transcript->log("A", "B", ChannelSecurity::Authenticated, "sign-sig-frame",
                    payload);
  }
  return sig;
}

Decision recipient_decide(const RecordBlock& part_1, const RecordBlock& part_2,
                          const SignatureElements& sig, double threshold,
                          int slots_per_frame, const Message* claimed) {
  if (!(threshold > 0.0 && threshold < 1.0))
    throw std::invalid_argument("threshold must lie in (0,1)");
  Decision d;
  if (sig.empty()) {
    d.reason = "empty signature";
    return d;
  }
  d.image_1 = retrieve(sig, part_1, slots_per_frame);
  d.image_2 = retrieve(sig, part_2, slots_per_frame);
  auto total = [](const GhostImage& img) {
    std::int64_t t = 0;
    for (auto c : img.counts) t += c;
    return t;
  };
  if (total(d.image_1) == 0 || total(d.image_2) == 0) {
    d.reason = "signature has empty intersection with a record block";
    return d;
  }
  // The acceptance test is the noise factors of the message's 0-slots; with
  // no claimed message the image's own read-out supplies the 0-slot set. The
  // read-out bits stay in the reports as diagnostics either way.
  const Message decided_1 = decide_bits(d.image_1);
  const Message decided_2 = decide_bits(d.image_2);
  d.report_1 = noise_factors(d.image_1, claimed ? *claimed : decided_1);
  d.report_2 = noise_factors(d.image_2, claimed ? *claimed : decided_2);
  d.report_1.decided = decided_1;
  d.report_2.decided = decided_2;
  if (!(d.report_1.max_factor < threshold) ||
      !(d.report_2.max_factor < threshold)) {
    d.reason = "noise factor at or above threshold";
    return d;
  }
  d.accept = true;
  return d;
}

}  // namespace qds
