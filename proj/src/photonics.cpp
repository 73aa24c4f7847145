#include "qds/photonics.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "qds/rng.hpp"

namespace qds {

void SourceParams::validate() const {
  if (pair_rate < 0.0) throw std::invalid_argument("pair_rate must be >= 0");
  if (!(duration > 0.0)) throw std::invalid_argument("duration must be > 0");
  if (alice_efficiency < 0.0 || alice_efficiency > 1.0)
    throw std::invalid_argument("alice_efficiency must lie in [0,1]");
  if (idler_efficiency < 0.0 || idler_efficiency > 1.0)
    throw std::invalid_argument("idler_efficiency must lie in [0,1]");
  if (jitter_sigma < 0.0) throw std::invalid_argument("jitter_sigma must be >= 0");
  if (dark_count_rate < 0.0)
    throw std::invalid_argument("dark_count_rate must be >= 0");
}

void ChannelPerturbation::validate() const {
  if (eavesdrop_fraction < 0.0 || eavesdrop_fraction > 1.0)
    throw std::invalid_argument("eavesdrop_fraction must lie in [0,1]");
  if (intrinsic_slot_error < 0.0 || intrinsic_slot_error > 1.0)
    throw std::invalid_argument("intrinsic_slot_error must lie in [0,1]");
}

namespace {

struct TaggedTime {
  Picoseconds t;
  std::int64_t pair;
  bool operator<(const TaggedTime& o) const {
    return t < o.t || (t == o.t && pair < o.pair);
  }
};

void finalize(std::vector<TaggedTime>& buf, std::vector<Picoseconds>& times,
              std::vector<std::int64_t>& pairs) {
  std::sort(buf.begin(), buf.end());
  times.reserve(buf.size());
  pairs.reserve(buf.size());
  for (const auto& e : buf) {
    times.push_back(e.t);
    pairs.push_back(e.pair);
  }
}

void append_dark_counts(std::vector<TaggedTime>& buf, double rate_per_s,
                        double duration_ps, Rng& rng) {
  if (rate_per_s <= 0.0) return;
  const double rate_per_ps = rate_per_s * 1e-12;
  double t = rng.exponential(rate_per_ps);
  while (t <= duration_ps) {
    buf.push_back({static_cast<Picoseconds>(std::llround(t)), -1});
    t += rng.exponential(rate_per_ps);
  }
}

}  // namespace

RawDetections generate_pairs(const SourceParams& params) {
  params.validate();
  Rng rng(params.seed);
  const double duration_ps = params.duration * 1e12;

  std::vector<TaggedTime> alice_buf, bob_buf, charlie_buf;
  const double expected_pairs = params.pair_rate * params.duration;
  alice_buf.reserve(
      static_cast<std::size_t>(expected_pairs * params.alice_efficiency * 1.02));

  auto detect = [&](std::vector<TaggedTime>& buf, double emission_t,
                    std::int64_t pair_id) {
    double t = emission_t;
    if (params.jitter_sigma > 0.0) t += params.jitter_sigma * rng.normal();
    if (t < 0.0 || t > duration_ps) return;
    buf.push_back({static_cast<Picoseconds>(std::llround(t)), pair_id});
  };

  if (params.pair_rate > 0.0) {
    const double rate_per_ps = params.pair_rate * 1e-12;
    double t = rng.exponential(rate_per_ps);
    std::int64_t pair_id = 0;
    while (t <= duration_ps) {
      if (rng.bernoulli(params.alice_efficiency)) detect(alice_buf, t, pair_id);
      auto& idler_buf = rng.bernoulli(0.5) ? bob_buf : charlie_buf;
      if (rng.bernoulli(params.idler_efficiency)) detect(idler_buf, t, pair_id);
      ++pair_id;
      t += rng.exponential(rate_per_ps);
    }
  }

  append_dark_counts(alice_buf, params.dark_count_rate, duration_ps, rng);
  append_dark_counts(bob_buf, params.dark_count_rate, duration_ps, rng);
  append_dark_counts(charlie_buf, params.dark_count_rate, duration_ps, rng);

  RawDetections d;
  finalize(alice_buf, d.alice, d.alice_pair);
  finalize(bob_buf, d.bob, d.bob_pair);
  finalize(charlie_buf, d.charlie, d.charlie_pair);
  return d;
}

namespace {

void perturb_idler(std::vector<Picoseconds>& times,
                   std::vector<std::int64_t>& pairs,
                   const ChannelPerturbation& p, const EncodingParams& enc,
                   Rng& rng) {
  const int m = enc.slots_per_frame;
  const Picoseconds slot_period = enc.slot_period();
  auto rerandomize = [&](Picoseconds t) {
    const PhotonRecord r = encode_time(t, enc);
    const int new_slot = static_cast<int>(rng.below(static_cast<std::uint64_t>(m)));
    return t + static_cast<Picoseconds>(new_slot - r.slot) * slot_period;
  };
  bool moved = false;
  for (auto& t : times) {
    if (p.eavesdrop_fraction > 0.0 && rng.bernoulli(p.eavesdrop_fraction)) {
      t = rerandomize(t);
      moved = true;
    }
    if (p.intrinsic_slot_error > 0.0 && rng.bernoulli(p.intrinsic_slot_error)) {
      t = rerandomize(t);
      moved = true;
    }
  }
  if (!moved) return;
  std::vector<TaggedTime> buf;
  buf.reserve(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) buf.push_back({times[i], pairs[i]});
  times.clear();
  pairs.clear();
  finalize(buf, times, pairs);
}

}  // namespace

RawDetections apply_eavesdropping(const RawDetections& d,
                                  const ChannelPerturbation& p,
                                  const EncodingParams& params,
                                  std::uint64_t seed, IdlerFilter filter) {
  p.validate();
  params.validate();
  RawDetections out = d;
  if (p.eavesdrop_fraction == 0.0 && p.intrinsic_slot_error == 0.0) return out;
  if (filter != IdlerFilter::CharlieOnly) {
    Rng rng(derive_seed(seed, 0x0b0b));
    perturb_idler(out.bob, out.bob_pair, p, params, rng);
  }
  if (filter != IdlerFilter::BobOnly) {
    Rng rng(derive_seed(seed, 0xcccc));
    perturb_idler(out.charlie, out.charlie_pair, p, params, rng);
  }
  return out;
}

std::vector<PhotonRecord> encode_and_discard_multiphoton(
    const std::vector<Picoseconds>& times, const EncodingParams& params) {
  std::vector<PhotonRecord> out;
  out.reserve(times.size());
  for (Picoseconds t : times) out.push_back(encode_time(t, params));
  // Input times are sorted, so records are frame-sorted already.
  std::vector<PhotonRecord> kept;
  kept.reserve(out.size());
  std::size_t i = 0;
  while (i < out.size()) {
    std::size_t j = i + 1;
    while (j < out.size() && out[j].frame == out[i].frame) ++j;
    if (j == i + 1) kept.push_back(out[i]);
    i = j;
  }
  return kept;
}

namespace {

void tally_channel(const std::vector<PhotonRecord>& a,
                   const std::vector<PhotonRecord>& b,
                   SlotErrorMeasurement& m) {
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i].frame < b[j].frame) {
      ++i;
    } else if (b[j].frame < a[i].frame) {
      ++j;
    } else {
      if (a[i].bin == b[j].bin) {
        ++m.compared;
        if (a[i].slot != b[j].slot) ++m.errors;
      }
      ++i;
      ++j;
    }
  }
}

}  // namespace

SlotErrorMeasurement measure_sifted_slot_error(const RawDetections& d,
                                               const EncodingParams& params) {
  const auto a = encode_and_discard_multiphoton(d.alice, params);
  const auto b = encode_and_discard_multiphoton(d.bob, params);
  const auto c = encode_and_discard_multiphoton(d.charlie, params);
  SlotErrorMeasurement m;
  tally_channel(a, b, m);
  tally_channel(a, c, m);
  return m;
}

ChannelPerturbation calibrate_error(double target_e, const SourceParams& base,
                                    const EncodingParams& params) {
  params.validate();
  base.validate();
  const int m = params.slots_per_frame;
  const double max_e = static_cast<double>(m - 1) / m;
  if (target_e < 0.0 || target_e >= max_e)
    throw CalibrationError("target error rate must lie in [0, (M-1)/M)");

  constexpr std::size_t kMinCoincidences = 100000;
  constexpr double kTolerance = 0.005;

  SourceParams run = base;
  RawDetections d = generate_pairs(run);
  SlotErrorMeasurement base_m = measure_sifted_slot_error(d, params);
  if (base_m.compared == 0)
    throw CalibrationError("no sifted coincidences: target unreachable");
  if (base_m.compared < kMinCoincidences) {
    const double scale =
        static_cast<double>(kMinCoincidences) * 1.2 / base_m.compared;
    run.duration = base.duration * scale;
    d = generate_pairs(run);
    base_m = measure_sifted_slot_error(d, params);
  }
  const double e0 = base_m.rate();
  if (e0 > target_e + kTolerance)
    throw CalibrationError("base configuration error rate " + std::to_string(e0) +
                           " already exceeds target " + std::to_string(target_e));
  if (std::abs(e0 - target_e) <= kTolerance * 0.7) return {};

  // A slot touched with probability q keeps its value only 1/M of the time:
  // e(q) = e0 + q ((M-1)/M - e0). Invert, then refine by secant on measured
  // rates.
  double q_prev = 0.0, e_prev = e0;
  double q = (target_e - e0) / (max_e - e0);
  for (int iter = 0; iter < 5; ++iter) {
    q = std::clamp(q, 0.0, 1.0);
    ChannelPerturbation p{0.0, q};
    const RawDetections pd =
        apply_eavesdropping(d, p, params, derive_seed(run.seed, 0xca11b));
    const double e_meas = measure_sifted_slot_error(pd, params).rate();
    if (std::abs(e_meas - target_e) <= kTolerance * 0.7) return p;
    const double denom = e_meas - e_prev;
    double q_next;
    if (std::abs(denom) < 1e-9) {
      q_next = q + (target_e - e_meas) / (max_e - e0);
    } else {
      q_next = q + (target_e - e_meas) * (q - q_prev) / denom;
    }
    q_prev = q;
    e_prev = e_meas;
    q = q_next;
  }
  throw CalibrationError("calibration did not converge to target " +
                         std::to_string(target_e));
}

}  // namespace qds
