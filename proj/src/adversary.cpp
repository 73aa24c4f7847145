#include "qds/adversary.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "qds/rng.hpp"

namespace qds {

namespace {

void wilson_interval(AttackOutcome& o) {
  o.frequency = o.trials > 0
                    ? static_cast<double>(o.successes) / static_cast<double>(o.trials)
                    : 0.0;
  const double z = 1.959963984540054;  // 95%
  const double n = static_cast<double>(o.trials);
  if (n == 0.0) return;
  const double p = o.frequency;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half =
      z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  // clamp against rounding at p = 0 or 1 so the interval always covers p
  o.ci_low = std::min(std::max(0.0, center - half), p);
  o.ci_high = std::max(std::min(1.0, center + half), p);
}

int other_slot(int actual, int m, Rng& rng) {
  int s = static_cast<int>(rng.below(static_cast<std::uint64_t>(m - 1)));
  if (s >= actual) ++s;
  return s;
}

// Correlated Alice/recipient records on one channel: same frames, recipient
// slot equals Alice's with probability 1 - slot_error.
struct SyntheticChannel {
  std::vector<SiftedRecord> alice;
  std::vector<SiftedRecord> recipient;
};

SyntheticChannel make_channel(std::size_t n, int m, double slot_error,
                              std::int64_t frame_base, Rng& rng) {
  SyntheticChannel ch;
  ch.alice.reserve(n);
  ch.recipient.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::int64_t frame = frame_base + static_cast<std::int64_t>(i);
    const int slot = static_cast<int>(rng.below(static_cast<std::uint64_t>(m)));
    const int rslot =
        rng.bernoulli(slot_error) ? other_slot(slot, m, rng) : slot;
    ch.alice.push_back({frame, slot});
    ch.recipient.push_back({frame, rslot});
  }
  return ch;
}

}  // namespace

AttackOutcome forge_attack(const AttackScale& scale, const Message& target,
                           double p_e, double th_c, int trials,
                           std::uint64_t seed) {
  if (!target.signable())
    throw std::invalid_argument("forge target must be a signable message");
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  const int m = scale.slots_per_frame;
  if (target.width() != m)
    throw std::invalid_argument("target width must equal slots_per_frame");
  const std::size_t n =
      static_cast<std::size_t>(scale.per_slot_mean * static_cast<double>(m));

  AttackOutcome out;
  out.trials = trials;
  for (int trial = 0; trial < trials; ++trial) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(trial)));

    // Charlie's holdings. X^B_forward came from Bob: slots known to him
    // exactly. Y^C_keep slots are hidden; Bob only guesses them.
    RecordBlock x_forward{ChannelId::X, {}}, y_keep{ChannelId::Y, {}};
    SignatureElements sig;
    for (std::size_t i = 0; i < n; ++i) {
      const std::int64_t frame = static_cast<std::int64_t>(i);
      const int slot = static_cast<int>(rng.below(static_cast<std::uint64_t>(m)));
      x_forward.records.push_back({frame, slot});
      if (target.bits[static_cast<std::size_t>(slot)]) sig.frames.push_back(frame);
    }
    for (std::size_t i = 0; i < n; ++i) {
      const std::int64_t frame = static_cast<std::int64_t>(1000000000 + i);
      const int slot = static_cast<int>(rng.below(static_cast<std::uint64_t>(m)));
      y_keep.records.push_back({frame, slot});
      const int guess = rng.bernoulli(p_e) ? other_slot(slot, m, rng) : slot;
      if (target.bits[static_cast<std::size_t>(guess)]) sig.frames.push_back(frame);
    }
    sig.normalize();
    if (sig.empty()) continue;
    const Decision d =
        recipient_decide(x_forward, y_keep, sig, th_c, m, &target);
    if (d.accept) ++out.successes;
  }
  wilson_interval(out);
  out.analytic_bound =
      forge_bound({scale.slot_error, p_e, scale.per_slot_mean, 0.0, th_c});
  return out;
}

AttackOutcome repudiation_attack(const AttackScale& scale,
                                 const Message& message, double delta,
                                 double th_b, double th_c, int trials,
                                 std::uint64_t seed) {
  if (!message.signable())
    throw std::invalid_argument("message must be signable");
  if (delta < 0.0 || delta > 1.0)
    throw std::invalid_argument("delta must lie in [0,1]");
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  const int m = scale.slots_per_frame;
  if (message.width() != m)
    throw std::invalid_argument("message width must equal slots_per_frame");
  // A recipient block holds per_slot_mean * M records; the pre-exchange
  // channel block is twice that.
  const std::size_t n_channel =
      static_cast<std::size_t>(2.0 * scale.per_slot_mean * static_cast<double>(m));

  AttackOutcome out;
  out.trials = trials;
  for (int trial = 0; trial < trials; ++trial) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(trial)));

    const auto chan_x = make_channel(n_channel, m, scale.slot_error, 0, rng);
    const auto chan_y =
        make_channel(n_channel, m, scale.slot_error, 1000000000, rng);

    // Hidden exchange: Alice never sees this partition.
    RecordBlock xb{ChannelId::X, chan_x.recipient};
    RecordBlock yc{ChannelId::Y, chan_y.recipient};
    const auto sym = symmetrize(xb, yc, rng.next());

    // Alice halves her pool, selects per the message, then swaps a delta
    // fraction of the selection for slot-mismatched records.
    std::vector<SiftedRecord> pool = chan_x.alice;
    pool.insert(pool.end(), chan_y.alice.begin(), chan_y.alice.end());
    rng.shuffle(pool);
    pool.resize(pool.size() / 2);
    std::vector<SiftedRecord> selected, mismatch_pool;
    for (const auto& r : pool) {
      if (message.bits[static_cast<std::size_t>(r.slot)])
        selected.push_back(r);
      else
        mismatch_pool.push_back(r);
    }
    if (selected.empty()) continue;
    const std::size_t n_swap = std::min(
        mismatch_pool.size(),
        static_cast<std::size_t>(delta * static_cast<double>(selected.size())));
    rng.shuffle(selected);
    rng.shuffle(mismatch_pool);
    SignatureElements sig;
    for (std::size_t i = 0; i < selected.size(); ++i) {
      const auto& r = (i < n_swap) ? mismatch_pool[i] : selected[i];
      sig.frames.push_back(r.frame);
    }
    sig.normalize();

    const Decision bob = recipient_decide(sym.bob_keep, sym.charlie_forward,
                                          sig, th_b, m, &message);
    const Decision charlie = recipient_decide(sym.bob_forward, sym.charlie_keep,
                                              sig, th_c, m, &message);
    if (bob.accept && !charlie.accept) ++out.successes;
  }
  wilson_interval(out);
  out.analytic_bound = repudiation_bound(
      {scale.slot_error, 1.0, scale.per_slot_mean, th_b, th_c});
  return out;
}

EavesdropOutcome eavesdrop_attack(double chi, const OperatingPoint& op,
                                  std::uint64_t seed) {
  if (chi < 0.0 || chi > 1.0) throw std::invalid_argument("chi must lie in [0,1]");
  const RawDetections raw = generate_pairs(op.source);
  const RawDetections honest =
      apply_eavesdropping(raw, op.intrinsic, op.encoding, derive_seed(seed, 1));
  ChannelPerturbation attacked_p = op.intrinsic;
  attacked_p.eavesdrop_fraction =
      1.0 - (1.0 - attacked_p.eavesdrop_fraction) * (1.0 - chi);
  const RawDetections attacked =
      apply_eavesdropping(raw, attacked_p, op.encoding, derive_seed(seed, 1));

  const PartyState honest_state =
      run_distribution(honest, op.encoding, op.disclose_fraction,
                       derive_seed(seed, 2), {});
  const PartyState attacked_state =
      run_distribution(attacked, op.encoding, op.disclose_fraction,
                       derive_seed(seed, 2), {});

  EavesdropOutcome out;
  out.e_hat_honest = honest_state.estimate_x.e_hat;
  out.e_hat_attacked = attacked_state.estimate_x.e_hat;
  out.sample_size = attacked_state.estimate_x.sample_size;
  const double n = static_cast<double>(honest_state.estimate_x.sample_size);
  const double sigma =
      std::sqrt(std::max(out.e_hat_honest * (1.0 - out.e_hat_honest), 1e-12) / n);
  out.envelope = out.e_hat_honest + 5.0 * sigma;
  out.detected = out.e_hat_attacked > out.envelope;
  return out;
}

namespace {

struct PerSlotTally {
  std::vector<std::int64_t> compared, errors;
  explicit PerSlotTally(int m)
      : compared(static_cast<std::size_t>(m), 0),
        errors(static_cast<std::size_t>(m), 0) {}
  void add(const std::vector<PhotonRecord>& a, const std::vector<PhotonRecord>& b) {
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
      if (a[i].frame < b[j].frame) {
        ++i;
      } else if (b[j].frame < a[i].frame) {
        ++j;
      } else {
        if (a[i].bin == b[j].bin) {
          const auto s = static_cast<std::size_t>(a[i].slot);
          ++compared[s];
          if (a[i].slot != b[j].slot) ++errors[s];
        }
        ++i;
        ++j;
      }
    }
  }
  std::vector<double> rates() const {
    std::vector<double> r(compared.size(), 0.0);
    for (std::size_t s = 0; s < compared.size(); ++s)
      if (compared[s] > 0)
        r[s] = static_cast<double>(errors[s]) / static_cast<double>(compared[s]);
    return r;
  }
};

std::vector<double> per_slot_error(const RawDetections& d,
                                   const EncodingParams& enc) {
  const auto a = encode_and_discard_multiphoton(d.alice, enc);
  const auto b = encode_and_discard_multiphoton(d.bob, enc);
  const auto c = encode_and_discard_multiphoton(d.charlie, enc);
  PerSlotTally tally(enc.slots_per_frame);
  tally.add(a, b);
  tally.add(a, c);
  return tally.rates();
}

// Guess-directed perturbation of the idler channels.
RawDetections apply_selective(const RawDetections& d,
                              const std::vector<bool>& targeted, double chi,
                              double p_e, const EncodingParams& enc,
                              std::uint64_t seed) {
  RawDetections out = d;
  const int m = enc.slots_per_frame;
  const Picoseconds slot_period = enc.slot_period();
  auto attack_list = [&](std::vector<Picoseconds>& times,
                         std::vector<std::int64_t>& pairs,
                         std::uint64_t stream) {
    Rng rng(derive_seed(seed, stream));
    for (auto& t : times) {
      const PhotonRecord r = encode_time(t, enc);
      const int guess =
          rng.bernoulli(p_e) ? other_slot(r.slot, m, rng) : r.slot;
      if (!targeted[static_cast<std::size_t>(guess)]) continue;
      if (!rng.bernoulli(chi)) continue;
      const int new_slot =
          static_cast<int>(rng.below(static_cast<std::uint64_t>(m)));
      t += static_cast<Picoseconds>(new_slot - r.slot) * slot_period;
    }
    std::vector<std::size_t> order(times.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return times[a] < times[b]; });
    std::vector<Picoseconds> st(times.size());
    std::vector<std::int64_t> sp(times.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
      st[i] = times[order[i]];
      sp[i] = pairs[order[i]];
    }
    times = std::move(st);
    pairs = std::move(sp);
  };
  attack_list(out.bob, out.bob_pair, 0xb0b5);
  attack_list(out.charlie, out.charlie_pair, 0xcc55);
  return out;
}

}  // namespace

SelectiveProbeReport selective_attack_probe(const std::vector<int>& targeted_slots,
                                            double chi, double p_e,
                                            const OperatingPoint& op,
                                            std::uint64_t seed) {
  if (targeted_slots.empty())
    throw std::invalid_argument("targeted slot subset must be non-empty");
  const int m = op.encoding.slots_per_frame;
  std::vector<bool> targeted(static_cast<std::size_t>(m), false);
  for (int s : targeted_slots) {
    if (s < 0 || s >= m) throw std::invalid_argument("targeted slot out of range");
    targeted[static_cast<std::size_t>(s)] = true;
  }

  const RawDetections raw = generate_pairs(op.source);
  const RawDetections honest =
      apply_eavesdropping(raw, op.intrinsic, op.encoding, derive_seed(seed, 1));
  const RawDetections attacked =
      apply_selective(honest, targeted, chi, p_e, op.encoding, derive_seed(seed, 2));

  SelectiveProbeReport rep;
  rep.baseline_error = per_slot_error(honest, op.encoding);
  rep.attacked_error = per_slot_error(attacked, op.encoding);
  double sum_t = 0.0, sum_u = 0.0;
  int n_t = 0, n_u = 0;
  for (int s = 0; s < m; ++s) {
    const double inflation = rep.attacked_error[static_cast<std::size_t>(s)] -
                             rep.baseline_error[static_cast<std::size_t>(s)];
    if (targeted[static_cast<std::size_t>(s)]) {
      sum_t += inflation;
      ++n_t;
    } else {
      sum_u += inflation;
      ++n_u;
    }
  }
  rep.targeted_inflation = n_t > 0 ? sum_t / n_t : 0.0;
  rep.untargeted_inflation = n_u > 0 ? sum_u / n_u : 0.0;
  const double floor = 1e-6;
  rep.inflation_ratio =
      rep.targeted_inflation / std::max(rep.untargeted_inflation, floor);
  return rep;
}

}  // namespace qds
