#include "qds/scenario.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "qds/adversary.hpp"
#include "qds/imaging.hpp"
#include "qds/rng.hpp"
#include "qds/security.hpp"

namespace qds {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Fixed formatting so that identical runs yield byte-identical reports.
std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream os(p);
  if (!os) throw std::runtime_error("cannot write " + p.string());
  return os;
}

const json& require(const json& j, const char* key, const char* ctx) {
  auto it = j.find(key);
  if (it == j.end())
    throw ValidationError(std::string("missing field '") + key + "' in " + ctx);
  return *it;
}

ChannelConfig parse_channel(const json& j, const char* ctx) {
  ChannelConfig c;
  c.perturbation.eavesdrop_fraction =
      require(j, "eavesdrop_fraction", ctx).get<double>();
  c.perturbation.intrinsic_slot_error =
      require(j, "intrinsic_slot_error", ctx).get<double>();
  c.chi_bound = require(j, "chi_bound", ctx).get<double>();
  return c;
}

}  // namespace

RunMode mode_from_string(const std::string& s) {
  if (s == "honest") return RunMode::Honest;
  if (s == "forge") return RunMode::Forge;
  if (s == "repudiate") return RunMode::Repudiate;
  if (s == "eavesdrop") return RunMode::Eavesdrop;
  if (s == "selective") return RunMode::Selective;
  if (s == "security-only") return RunMode::SecurityOnly;
  throw ValidationError("unknown mode: " + s);
}

std::string mode_to_string(RunMode m) {
  switch (m) {
    case RunMode::Honest: return "honest";
    case RunMode::Forge: return "forge";
    case RunMode::Repudiate: return "repudiate";
    case RunMode::Eavesdrop: return "eavesdrop";
    case RunMode::Selective: return "selective";
    default: return "security-only";
  }
}

Scenario Scenario::parse(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("scenario is not valid JSON: ") + e.what());
  }
  Scenario s;
  s.mode = mode_from_string(require(j, "mode", "scenario").get<std::string>());
  s.seed = require(j, "seed", "scenario").get<std::uint64_t>();

  const bool physical = s.mode != RunMode::SecurityOnly &&
                        s.mode != RunMode::Forge && s.mode != RunMode::Repudiate;
  if (j.contains("encoding")) {
    const json& e = j["encoding"];
    s.encoding.bin_width = require(e, "bin_width_ps", "encoding").get<Picoseconds>();
    s.encoding.bins_per_slot = require(e, "bins_per_slot", "encoding").get<int>();
    s.encoding.slots_per_frame =
        require(e, "slots_per_frame", "encoding").get<int>();
  } else if (physical || s.mode == RunMode::Forge || s.mode == RunMode::Repudiate) {
    throw ValidationError("missing field 'encoding' in scenario");
  }
  if (physical) {
    const json& src = require(j, "source", "scenario");
    s.source.pair_rate = require(src, "pair_rate", "source").get<double>();
    s.source.duration = require(src, "duration", "source").get<double>();
    s.source.alice_efficiency =
        require(src, "alice_efficiency", "source").get<double>();
    s.source.idler_efficiency =
        require(src, "idler_efficiency", "source").get<double>();
    s.source.jitter_sigma = require(src, "jitter_sigma_ps", "source").get<double>();
    s.source.dark_count_rate =
        require(src, "dark_count_rate", "source").get<double>();
    s.disclose_fraction = require(j, "disclose_fraction", "scenario").get<double>();
    s.channel_x = parse_channel(require(j, "channel_x", "scenario"), "channel_x");
    s.channel_y = parse_channel(require(j, "channel_y", "scenario"), "channel_y");
  }
  if (j.contains("message"))
    s.message = Message::from_string(j["message"].get<std::string>());
  if (j.contains("thresholds")) {
    const json& t = j["thresholds"];
    if (t.is_string() && t.get<std::string>() == "optimize") {
      s.thresholds.optimize = true;
    } else {
      s.thresholds.bob = require(t, "bob", "thresholds").get<double>();
      s.thresholds.charlie = require(t, "charlie", "thresholds").get<double>();
    }
  }
  if (j.contains("abort_error_limit"))
    s.abort_error_limit = j["abort_error_limit"].get<double>();
  if (j.contains("abort_chi_limit"))
    s.abort_chi_limit = j["abort_chi_limit"].get<double>();
  if (j.contains("export_records"))
    s.export_records = j["export_records"].get<bool>();
  if (j.contains("security")) {
    const json& sec = j["security"];
    s.security.e = require(sec, "e", "security").get<double>();
    s.security.p_e = require(sec, "p_e", "security").get<double>();
    if (sec.contains("L")) s.security.L = sec["L"].get<double>();
    if (sec.contains("epsilon_target"))
      s.security.epsilon_target = sec["epsilon_target"].get<double>();
  } else if (s.mode == RunMode::SecurityOnly) {
    throw ValidationError("missing field 'security' in scenario");
  }
  if (j.contains("attack")) {
    const json& a = j["attack"];
    if (a.contains("trials")) s.attack.trials = a["trials"].get<int>();
    if (a.contains("per_slot_mean"))
      s.attack.per_slot_mean = a["per_slot_mean"].get<double>();
    if (a.contains("slot_error")) s.attack.slot_error = a["slot_error"].get<double>();
    if (a.contains("p_e")) s.attack.p_e = a["p_e"].get<double>();
    if (a.contains("deltas")) s.attack.deltas = a["deltas"].get<std::vector<double>>();
    if (a.contains("chis")) s.attack.chis = a["chis"].get<std::vector<double>>();
    if (a.contains("targeted_slots"))
      s.attack.targeted_slots = a["targeted_slots"].get<std::vector<int>>();
    if (a.contains("chi")) s.attack.chi = a["chi"].get<double>();
  }
  s.validate();
  return s;
}

Scenario Scenario::load(const fs::path& file) {
  std::ifstream is(file);
  if (!is) throw ValidationError("cannot open scenario file " + file.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return parse(ss.str());
}

void Scenario::validate() const {
  const bool signing = mode == RunMode::Honest || mode == RunMode::Forge ||
                       mode == RunMode::Repudiate;
  if (mode != RunMode::SecurityOnly) {
    encoding.validate();
    if (message.width() != 0 && message.width() != encoding.slots_per_frame)
      throw ValidationError("message length must equal slots_per_frame");
  }
  if (signing) {
    if (message.width() == 0) throw ValidationError("missing message");
    if (!message.signable())
      throw ValidationError(
          "message rejected: all bits 1 or all bits 0 are not signable");
  }
  if (mode == RunMode::Honest || mode == RunMode::Eavesdrop ||
      mode == RunMode::Selective) {
    try {
      source.validate();
      channel_x.perturbation.validate();
      channel_y.perturbation.validate();
    } catch (const std::invalid_argument& e) {
      throw ValidationError(e.what());
    }
    if (!(disclose_fraction > 0.0 && disclose_fraction < 1.0))
      throw ValidationError("disclose_fraction must lie in (0,1)");
  }
  if (signing && !thresholds.optimize) {
    if (!(thresholds.bob > 0.0 && thresholds.bob < thresholds.charlie &&
          thresholds.charlie < 1.0))
      throw ValidationError("thresholds must satisfy 0 < Th_B < Th_C < 1");
  }
  if (mode == RunMode::SecurityOnly) {
    if (!(security.e >= 0.0 && security.e < security.p_e && security.p_e <= 1.0))
      throw ValidationError("security config must satisfy 0 <= e < P_e <= 1");
    if (security.L <= 0.0 && security.epsilon_target <= 0.0)
      throw ValidationError("security config needs L or epsilon_target");
  }
  if (mode == RunMode::Selective && attack.targeted_slots.empty())
    throw ValidationError("selective mode needs attack.targeted_slots");
}

std::string Scenario::manifest_json() const {
  json j;
  j["version"] = kVersion;
  j["mode"] = mode_to_string(mode);
  j["seed"] = seed;
  j["encoding"] = {{"bin_width_ps", encoding.bin_width},
                   {"bins_per_slot", encoding.bins_per_slot},
                   {"slots_per_frame", encoding.slots_per_frame}};
  j["source"] = {{"pair_rate", source.pair_rate},
                 {"duration", source.duration},
                 {"alice_efficiency", source.alice_efficiency},
                 {"idler_efficiency", source.idler_efficiency},
                 {"jitter_sigma_ps", source.jitter_sigma},
                 {"dark_count_rate", source.dark_count_rate}};
  j["disclose_fraction"] = disclose_fraction;
  auto chan = [](const ChannelConfig& c) {
    return json{{"eavesdrop_fraction", c.perturbation.eavesdrop_fraction},
                {"intrinsic_slot_error", c.perturbation.intrinsic_slot_error},
                {"chi_bound", c.chi_bound}};
  };
  j["channel_x"] = chan(channel_x);
  j["channel_y"] = chan(channel_y);
  j["message"] = message.to_string();
  if (thresholds.optimize)
    j["thresholds"] = "optimize";
  else
    j["thresholds"] = {{"bob", thresholds.bob}, {"charlie", thresholds.charlie}};
  j["abort_error_limit"] = abort_error_limit;
  j["abort_chi_limit"] = abort_chi_limit;
  j["export_records"] = export_records;
  j["security"] = {{"e", security.e},
                   {"p_e", security.p_e},
                   {"L", security.L},
                   {"epsilon_target", security.epsilon_target}};
  j["attack"] = {{"trials", attack.trials},
                 {"per_slot_mean", attack.per_slot_mean},
                 {"slot_error", attack.slot_error},
                 {"p_e", attack.p_e},
                 {"deltas", attack.deltas},
                 {"chis", attack.chis},
                 {"targeted_slots", attack.targeted_slots},
                 {"chi", attack.chi}};
  return j.dump(2) + "\n";
}

// -- Record file -----------------------------------------------------------

void write_records(const fs::path& file, const RawDetections& d,
                   const EncodingParams& params, std::uint64_t seed) {
  auto os = open_out(file);
  os << "# qds-records v1\n";
  os << "# encoding bin_width_ps=" << params.bin_width
     << " bins_per_slot=" << params.bins_per_slot
     << " slots_per_frame=" << params.slots_per_frame << "\n";
  os << "# seed " << seed << "\n";
  auto dump = [&](char tag, const std::vector<Picoseconds>& times) {
    for (Picoseconds t : times) {
      const PhotonRecord r = encode_time(t, params);
      os << tag << ' ' << r.frame << ' ' << r.slot << ' ' << r.bin << '\n';
    }
  };
  dump('A', d.alice);
  dump('B', d.bob);
  dump('C', d.charlie);
}

LoadedRecords read_records(const fs::path& file) {
  std::ifstream is(file);
  if (!is) throw ValidationError("cannot open record file " + file.string());
  LoadedRecords out;
  std::string line;
  int line_no = 0;
  bool have_encoding = false, have_seed = false;
  auto fail = [&](const std::string& why) {
    throw ValidationError(file.string() + ":" + std::to_string(line_no) + ": " + why);
  };
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream hs(line.substr(1));
      std::string word;
      hs >> word;
      if (word == "encoding") {
        std::string kv;
        while (hs >> kv) {
          const auto eq = kv.find('=');
          if (eq == std::string::npos) fail("malformed encoding header");
          const std::string key = kv.substr(0, eq);
          const long long value = std::stoll(kv.substr(eq + 1));
          if (key == "bin_width_ps") out.encoding.bin_width = value;
          else if (key == "bins_per_slot") out.encoding.bins_per_slot = static_cast<int>(value);
          else if (key == "slots_per_frame") out.encoding.slots_per_frame = static_cast<int>(value);
          else fail("unknown encoding key " + key);
        }
        have_encoding = true;
      } else if (word == "seed") {
        hs >> out.seed;
        have_seed = true;
      }
      continue;
    }
    if (!have_encoding) fail("record before encoding header");
    std::istringstream ls(line);
    char tag;
    std::int64_t frame;
    int slot, bin;
    if (!(ls >> tag >> frame >> slot >> bin)) fail("malformed record line");
    if (tag != 'A' && tag != 'B' && tag != 'C') fail("unknown party tag");
    PhotonRecord r{frame, slot, bin};
    Picoseconds t;
    try {
      t = decode_record(r, out.encoding);
    } catch (const std::invalid_argument& e) {
      fail(e.what());
      throw;  // unreachable
    }
    auto& times = tag == 'A'   ? out.detections.alice
                  : tag == 'B' ? out.detections.bob
                               : out.detections.charlie;
    auto& pairs = tag == 'A'   ? out.detections.alice_pair
                  : tag == 'B' ? out.detections.bob_pair
                               : out.detections.charlie_pair;
    times.push_back(t);
    pairs.push_back(-1);
  }
  if (!have_encoding) throw ValidationError(file.string() + ": missing encoding header");
  if (!have_seed) throw ValidationError(file.string() + ": missing seed header");
  auto sort_party = [](std::vector<Picoseconds>& t) { std::sort(t.begin(), t.end()); };
  sort_party(out.detections.alice);
  sort_party(out.detections.bob);
  sort_party(out.detections.charlie);
  return out;
}

// -- Security exports ------------------------------------------------------

void write_threshold_surface(const fs::path& file, double e, double p_e,
                             double L, int grid) {
  auto os = open_out(file);
  os << "th_b th_c epsilon\n";
  for (int i = 1; i <= grid; ++i) {
    const double th_b = e + (p_e - e) * i / (grid + 1);
    for (int j = 1; j <= grid; ++j) {
      const double th_c = e + (p_e - e) * j / (grid + 1);
      if (!(th_b < th_c)) continue;
      const double eps = security_level({e, p_e, L, th_b, th_c}).epsilon;
      os << num(th_b) << ' ' << num(th_c) << ' ' << num(eps) << '\n';
    }
  }
}

void write_epsilon_curve(const fs::path& file, double e, double p_e,
                         double l_min, double l_max, int points) {
  auto os = open_out(file);
  os << "L th_b th_c epsilon\n";
  for (int i = 0; i < points; ++i) {
    const double L = l_min + (l_max - l_min) * i / (points - 1);
    const auto opt = optimize_thresholds(e, p_e, L);
    os << num(L) << ' ' << num(opt.th_b) << ' ' << num(opt.th_c) << ' '
       << num(opt.epsilon) << '\n';
  }
}

// -- Report helpers --------------------------------------------------------

namespace {

void write_image_table(const fs::path& file, const GhostImage& img,
                       const NoiseReport& rep) {
  auto os = open_out(file);
  os << "slot count decided_bit noise_factor\n";
  for (std::size_t i = 0; i < img.counts.size(); ++i) {
    os << i << ' ' << img.counts[i] << ' '
       << static_cast<int>(rep.decided.bits[i]) << ' ';
    auto it = std::find(rep.zero_slots.begin(), rep.zero_slots.end(),
                        static_cast<int>(i));
    if (it == rep.zero_slots.end())
      os << "-";
    else
      os << num(rep.factors[static_cast<std::size_t>(it - rep.zero_slots.begin())]);
    os << '\n';
  }
  os << "# block_mean " << num(img.block_mean) << "\n";
  os << "# sigma " << num(img.sigma) << "\n";
}

void write_security_report(const fs::path& file, const SecurityParams& p,
                           int slots, int message_ones) {
  const SecurityReport r = security_level(p);
  const SecurityReport u = security_level_union(p, slots);
  auto os = open_out(file);
  os << "e " << num(p.e) << "\n"
     << "P_e " << num(p.p_e) << "\n"
     << "L " << num(p.L) << "\n"
     << "Th_B " << num(p.th_b) << "\n"
     << "Th_C " << num(p.th_c) << "\n"
     << "slots_per_frame " << slots << "\n"
     << "message_ones " << message_ones << "\n"
     << "prob_honest_abort " << num(r.p_honest_abort) << "\n"
     << "prob_repudiation " << num(r.p_repudiation) << "\n"
     << "prob_forge " << num(r.p_forge) << "\n"
     << "epsilon " << num(r.epsilon) << "\n"
     << "# union bound over all " << slots << " slots\n"
     << "prob_honest_abort_union " << num(u.p_honest_abort) << "\n"
     << "prob_repudiation_union " << num(u.p_repudiation) << "\n"
     << "prob_forge_union " << num(u.p_forge) << "\n"
     << "epsilon_union " << num(u.epsilon) << "\n";
}

void write_attack_table(const fs::path& file, const std::string& param_name,
                        const std::vector<std::pair<double, AttackOutcome>>& rows) {
  auto os = open_out(file);
  os << param_name << " trials successes frequency ci_low ci_high bound\n";
  for (const auto& [param, o] : rows) {
    os << num(param) << ' ' << o.trials << ' ' << o.successes << ' '
       << num(o.frequency) << ' ' << num(o.ci_low) << ' ' << num(o.ci_high)
       << ' ' << num(o.analytic_bound) << '\n';
  }
}

struct ResolvedThresholds {
  double bob = 0.0, charlie = 0.0;
  bool optimized = false;
};

ResolvedThresholds resolve_thresholds(const ThresholdConfig& t, double e,
                                      double p_e, double L) {
  ResolvedThresholds r;
  if (!t.optimize) {
    r.bob = t.bob;
    r.charlie = t.charlie;
    return r;
  }
  const auto opt = optimize_thresholds(e, p_e, L);
  r.bob = opt.th_b;
  r.charlie = opt.th_c;
  r.optimized = true;
  return r;
}

int run_protocol(const Scenario& s, const RawDetections& d,
                 const fs::path& out) {
  Transcript transcript;
  auto summary = open_out(out / "summary.txt");
  summary << "mode " << mode_to_string(s.mode) << "\n";

  auto finish = [&](int status, const std::string& outcome) {
    std::ofstream ts(out / "transcript.log");
    transcript.write(ts);
    summary << "outcome " << outcome << "\n";
    summary << "exit_status " << status << "\n";
    return status;
  };

  PartyState state;
  try {
    state = run_distribution(d, s.encoding, s.disclose_fraction,
                             derive_seed(s.seed, 3),
                             {s.channel_x.chi_bound, s.channel_y.chi_bound},
                             &transcript);
  } catch (const ProtocolError& e) {
    return finish(exit_code::degenerate, std::string("degenerate: ") + e.what());
  }

  const int m = s.encoding.slots_per_frame;
  summary << "e_hat_x " << num(state.estimate_x.e_hat) << " sample "
          << state.estimate_x.sample_size << "\n";
  summary << "e_hat_y " << num(state.estimate_y.e_hat) << " sample "
          << state.estimate_y.sample_size << "\n";
  summary << "block_x_keep " << state.bob_keep.size() << "\n";
  summary << "block_y_forward " << state.bob_from_charlie.size() << "\n";
  summary << "block_x_forward " << state.charlie_from_bob.size() << "\n";
  summary << "block_y_keep " << state.charlie_keep.size() << "\n";

  if (state.estimate_x.e_hat > s.abort_error_limit ||
      state.estimate_y.e_hat > s.abort_error_limit ||
      s.channel_x.chi_bound > s.abort_chi_limit ||
      s.channel_y.chi_bound > s.abort_chi_limit)
    return finish(exit_code::channel_abort, "channel abort: e_hat or chi over limit");

  const double pooled_e =
      (state.estimate_x.e_hat * state.estimate_x.sample_size +
       state.estimate_y.e_hat * state.estimate_y.sample_size) /
      std::max<std::size_t>(
          1, state.estimate_x.sample_size + state.estimate_y.sample_size);
  const double p_e = 1.0 - s.channel_y.chi_bound;
  const double L =
      (static_cast<double>(state.bob_keep.size()) +
       static_cast<double>(state.bob_from_charlie.size())) /
      (2.0 * m);
  summary << "L " << num(L) << "\n";

  const auto th = resolve_thresholds(s.thresholds, pooled_e, p_e, L);
  summary << "th_b " << num(th.bob) << (th.optimized ? " optimized" : "") << "\n";
  summary << "th_c " << num(th.charlie) << (th.optimized ? " optimized" : "") << "\n";

  write_security_report(out / "security_report.txt",
                        {pooled_e, p_e, L, th.bob, th.charlie}, m,
                        s.message.ones());

  SignatureElements sig;
  try {
    sig = sign(s.message, state.alice_x, state.alice_y, derive_seed(s.seed, 4),
               {}, &transcript);
  } catch (const ProtocolError& e) {
    return finish(exit_code::degenerate, std::string("degenerate: ") + e.what());
  }
  summary << "sig_size " << sig.size() << "\n";

  const Decision bob = recipient_decide(state.bob_keep, state.bob_from_charlie,
                                        sig, th.bob, m, &s.message);
  write_image_table(out / "image_bob_x_keep.txt", bob.image_1, bob.report_1);
  write_image_table(out / "image_bob_y_forward.txt", bob.image_2, bob.report_2);
  if (!bob.accept)
    return finish(exit_code::bob_reject, "bob reject: " + bob.reason);

  // Step (7): Bob forwards the message and signature verbatim.
  transcript.log("B", "C", ChannelSecurity::Secure, "forward-message",
                 s.message.to_string());

  const Decision charlie = recipient_decide(state.charlie_from_bob,
                                            state.charlie_keep, sig, th.charlie,
                                            m, &s.message);
  write_image_table(out / "image_charlie_x_forward.txt", charlie.image_1,
                    charlie.report_1);
  write_image_table(out / "image_charlie_y_keep.txt", charlie.image_2,
                    charlie.report_2);
  if (!charlie.accept)
    return finish(exit_code::charlie_reject, "charlie reject: " + charlie.reason);

  return finish(exit_code::accept, "accept");
}

int run_security_only(const Scenario& s, const fs::path& out) {
  double L = s.security.L;
  std::string l_source = "configured";
  if (s.security.epsilon_target > 0.0) {
    L = required_L(s.security.e, s.security.p_e, s.security.epsilon_target);
    l_source = "required_L(epsilon_target=" + num(s.security.epsilon_target) + ")";
  }
  SecurityParams p{s.security.e, s.security.p_e, L, 0.0, 0.0};
  if (s.thresholds.optimize || s.thresholds.bob == 0.0) {
    const auto opt = optimize_thresholds(p.e, p.p_e, L);
    p.th_b = opt.th_b;
    p.th_c = opt.th_c;
  } else {
    p.th_b = s.thresholds.bob;
    p.th_c = s.thresholds.charlie;
  }
  const int slots = s.encoding.slots_per_frame;
  write_security_report(out / "security_report.txt", p, slots, s.message.ones());
  auto summary = open_out(out / "summary.txt");
  summary << "mode security-only\n";
  summary << "L " << num(L) << " (" << l_source << ")\n";
  summary << "th_b " << num(p.th_b) << "\n";
  summary << "th_c " << num(p.th_c) << "\n";
  summary << "epsilon " << num(security_level(p).epsilon) << "\n";
  summary << "exit_status 0\n";
  return exit_code::accept;
}

int run_attack(const Scenario& s, const fs::path& out) {
  const int m = s.encoding.slots_per_frame;
  const AttackScale scale{m, s.attack.per_slot_mean, s.attack.slot_error};
  const auto th = resolve_thresholds(s.thresholds, s.attack.slot_error,
                                     s.attack.p_e, s.attack.per_slot_mean);
  std::vector<std::pair<double, AttackOutcome>> rows;
  if (s.mode == RunMode::Forge) {
    rows.emplace_back(s.attack.p_e,
                      forge_attack(scale, s.message, s.attack.p_e, th.charlie,
                                   s.attack.trials, derive_seed(s.seed, 7)));
    write_attack_table(out / "attack_forge.txt", "p_e", rows);
  } else {
    std::vector<double> deltas = s.attack.deltas;
    if (deltas.empty())
      for (int i = 0; i <= 10; ++i) deltas.push_back(0.05 * i);
    for (double delta : deltas)
      rows.emplace_back(delta, repudiation_attack(scale, s.message, delta,
                                                  th.bob, th.charlie,
                                                  s.attack.trials,
                                                  derive_seed(s.seed, 8)));
    write_attack_table(out / "attack_repudiate.txt", "delta", rows);
  }
  auto summary = open_out(out / "summary.txt");
  summary << "mode " << mode_to_string(s.mode) << "\n";
  summary << "th_b " << num(th.bob) << "\n";
  summary << "th_c " << num(th.charlie) << "\n";
  for (const auto& [param, o] : rows)
    summary << "point " << num(param) << " frequency " << num(o.frequency)
            << " bound " << num(o.analytic_bound) << "\n";
  summary << "exit_status 0\n";
  return exit_code::accept;
}

int run_eavesdrop(const Scenario& s, const fs::path& out) {
  OperatingPoint op;
  op.source = s.source;
  op.source.seed = derive_seed(s.seed, 1);
  op.encoding = s.encoding;
  op.intrinsic = {0.0, s.channel_x.perturbation.intrinsic_slot_error};
  op.disclose_fraction = s.disclose_fraction;
  std::vector<double> chis = s.attack.chis;
  if (chis.empty()) chis.push_back(s.channel_x.perturbation.eavesdrop_fraction);
  auto os = open_out(out / "attack_eavesdrop.txt");
  os << "chi e_hat_honest e_hat_attacked envelope sample detected\n";
  bool any_detected = false;
  for (double chi : chis) {
    const EavesdropOutcome o = eavesdrop_attack(chi, op, derive_seed(s.seed, 9));
    os << num(chi) << ' ' << num(o.e_hat_honest) << ' ' << num(o.e_hat_attacked)
       << ' ' << num(o.envelope) << ' ' << o.sample_size << ' '
       << (o.detected ? 1 : 0) << '\n';
    any_detected = any_detected || o.detected;
  }
  auto summary = open_out(out / "summary.txt");
  summary << "mode eavesdrop\n";
  summary << "detected " << (any_detected ? 1 : 0) << "\n";
  summary << "exit_status "
          << (any_detected ? exit_code::channel_abort : exit_code::accept) << "\n";
  return any_detected ? exit_code::channel_abort : exit_code::accept;
}

int run_selective(const Scenario& s, const fs::path& out) {
  OperatingPoint op;
  op.source = s.source;
  op.source.seed = derive_seed(s.seed, 1);
  op.encoding = s.encoding;
  op.intrinsic = {0.0, s.channel_x.perturbation.intrinsic_slot_error};
  op.disclose_fraction = s.disclose_fraction;
  const SelectiveProbeReport rep = selective_attack_probe(
      s.attack.targeted_slots, s.attack.chi, s.attack.p_e, op,
      derive_seed(s.seed, 10));
  auto os = open_out(out / "attack_selective.txt");
  os << "slot targeted baseline_error attacked_error inflation\n";
  for (std::size_t i = 0; i < rep.baseline_error.size(); ++i) {
    const bool targeted =
        std::find(s.attack.targeted_slots.begin(), s.attack.targeted_slots.end(),
                  static_cast<int>(i)) != s.attack.targeted_slots.end();
    os << i << ' ' << (targeted ? 1 : 0) << ' ' << num(rep.baseline_error[i])
       << ' ' << num(rep.attacked_error[i]) << ' '
       << num(rep.attacked_error[i] - rep.baseline_error[i]) << '\n';
  }
  os << "# targeted_inflation " << num(rep.targeted_inflation) << "\n";
  os << "# untargeted_inflation " << num(rep.untargeted_inflation) << "\n";
  os << "# inflation_ratio " << num(rep.inflation_ratio) << "\n";
  auto summary = open_out(out / "summary.txt");
  summary << "mode selective\n";
  summary << "inflation_ratio " << num(rep.inflation_ratio) << "\n";
  summary << "exit_status 0\n";
  return exit_code::accept;
}

}  // namespace

int run_scenario(const Scenario& s, const fs::path& out_dir) {
  s.validate();
  fs::create_directories(out_dir);
  {
    auto os = open_out(out_dir / "manifest.json");
    os << s.manifest_json();
  }
  switch (s.mode) {
    case RunMode::SecurityOnly:
      return run_security_only(s, out_dir);
    case RunMode::Forge:
    case RunMode::Repudiate:
      return run_attack(s, out_dir);
    case RunMode::Eavesdrop:
      return run_eavesdrop(s, out_dir);
    case RunMode::Selective:
      return run_selective(s, out_dir);
    case RunMode::Honest:
      break;
  }
  SourceParams src = s.source;
  src.seed = derive_seed(s.seed, 1);
  RawDetections d = generate_pairs(src);
  d = apply_eavesdropping(d, s.channel_x.perturbation, s.encoding,
                          derive_seed(s.seed, 2), IdlerFilter::BobOnly);
  d = apply_eavesdropping(d, s.channel_y.perturbation, s.encoding,
                          derive_seed(s.seed, 2) + 1, IdlerFilter::CharlieOnly);
  if (s.export_records)
    write_records(out_dir / "records.txt", d, s.encoding, s.seed);
  return run_protocol(s, d, out_dir);
}

int replay_scenario(const Scenario& s, const fs::path& record_file,
                    const fs::path& out_dir) {
  s.validate();
  if (s.mode != RunMode::Honest)
    throw ValidationError("replay supports honest mode only");
  const LoadedRecords loaded = read_records(record_file);
  if (loaded.encoding.bin_width != s.encoding.bin_width ||
      loaded.encoding.bins_per_slot != s.encoding.bins_per_slot ||
      loaded.encoding.slots_per_frame != s.encoding.slots_per_frame)
    throw ValidationError("record file encoding differs from scenario encoding");
  fs::create_directories(out_dir);
  {
    auto os = open_out(out_dir / "manifest.json");
    os << s.manifest_json();
  }
  return run_protocol(s, loaded.detections, out_dir);
}

}  // namespace qds
