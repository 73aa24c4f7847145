#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "qds/photonics.hpp"
#include "qds/scenario.hpp"

using namespace qds;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream is(p);
  REQUIRE(is.good());
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

const char* kHonestJson = R"({
  "mode": "honest",
  "seed": 41,
  "encoding": {"bin_width_ps": 20, "bins_per_slot": 15, "slots_per_frame": 10},
  "source": {"pair_rate": 3e5, "duration": 1.0, "alice_efficiency": 0.5,
             "idler_efficiency": 0.57, "jitter_sigma_ps": 38.0,
             "dark_count_rate": 100.0},
  "disclose_fraction": 0.1,
  "channel_x": {"eavesdrop_fraction": 0.0, "intrinsic_slot_error": 0.041,
                "chi_bound": 0.553},
  "channel_y": {"eavesdrop_fraction": 0.0, "intrinsic_slot_error": 0.041,
                "chi_bound": 0.553},
  "message": "1010101010",
  "thresholds": {"bob": 0.1410, "charlie": 0.3474},
  "export_records": true
})";

}  // namespace

TEST_CASE("scenario parsing and validation") {
  const Scenario s = Scenario::parse(kHonestJson);
  CHECK(s.mode == RunMode::Honest);
  CHECK(s.seed == 41);
  CHECK(s.message.to_string() == "1010101010");
  CHECK(s.thresholds.bob == doctest::Approx(0.1410));

  CHECK_THROWS_AS(Scenario::parse("{not json"), ValidationError);
  CHECK_THROWS_AS(Scenario::parse("{\"mode\":\"honest\"}"), ValidationError);
  CHECK_THROWS_AS(Scenario::parse("{\"mode\":\"wat\",\"seed\":1}"),
                  ValidationError);

  // forbidden all-0 / all-1 messages are rejected up front
  std::string all_zero = kHonestJson;
  all_zero.replace(all_zero.find("1010101010"), 10, "0000000000");
  CHECK_THROWS_AS(Scenario::parse(all_zero), ValidationError);
  std::string all_one = kHonestJson;
  all_one.replace(all_one.find("1010101010"), 10, "1111111111");
  CHECK_THROWS_AS(Scenario::parse(all_one), ValidationError);

  // thresholds out of order
  std::string bad_th = kHonestJson;
  bad_th.replace(bad_th.find("0.1410"), 6, "0.9000");
  CHECK_THROWS_AS(Scenario::parse(bad_th), ValidationError);
}

TEST_CASE("mode names roundtrip") {
  for (RunMode m : {RunMode::Honest, RunMode::Forge, RunMode::Repudiate,
                    RunMode::Eavesdrop, RunMode::Selective, RunMode::SecurityOnly})
    CHECK(mode_from_string(mode_to_string(m)) == m);
}

TEST_CASE("manifest carries the full configuration") {
  const Scenario s = Scenario::parse(kHonestJson);
  const std::string m = s.manifest_json();
  CHECK(m.find("\"mode\": \"honest\"") != std::string::npos);
  CHECK(m.find("\"message\": \"1010101010\"") != std::string::npos);
  CHECK(m.find(kVersion) != std::string::npos);
}

TEST_CASE("record file roundtrip") {
  const fs::path dir = fresh_dir("qds_records_rt");
  SourceParams src{1e5, 0.05, 1.0, 1.0, 20.0, 0.0, 3};
  const RawDetections d = generate_pairs(src);
  const EncodingParams enc;
  write_records(dir / "r.txt", d, enc, 99);
  const LoadedRecords back = read_records(dir / "r.txt");
  CHECK(back.seed == 99);
  CHECK(back.encoding.bin_width == enc.bin_width);
  REQUIRE(back.detections.alice.size() == d.alice.size());
  REQUIRE(back.detections.bob.size() == d.bob.size());
  for (std::size_t i = 0; i < d.alice.size(); ++i) {
    // times survive up to bin quantization
    const PhotonRecord a = encode_time(d.alice[i], enc);
    const PhotonRecord b = encode_time(back.detections.alice[i], enc);
    CHECK(a == b);
    CHECK(back.detections.alice[i] == decode_record(a, enc));
  }
}

TEST_CASE("malformed record files are rejected with line numbers") {
  const fs::path dir = fresh_dir("qds_records_bad");
  {
    std::ofstream os(dir / "truncated.txt");
    os << "# qds-records v1\n";
    os << "# encoding bin_width_ps=20 bins_per_slot=15 slots_per_frame=10\n";
    os << "# seed 1\n";
    os << "A 0 3\n";  // missing bin column
  }
  CHECK_THROWS_AS(read_records(dir / "truncated.txt"), ValidationError);
  {
    std::ofstream os(dir / "range.txt");
    os << "# qds-records v1\n";
    os << "# encoding bin_width_ps=20 bins_per_slot=15 slots_per_frame=10\n";
    os << "# seed 1\n";
    os << "A 0 12 0\n";  // slot out of range
  }
  CHECK_THROWS_AS(read_records(dir / "range.txt"), ValidationError);
  {
    std::ofstream os(dir / "noheader.txt");
    os << "A 0 1 0\n";
  }
  CHECK_THROWS_AS(read_records(dir / "noheader.txt"), ValidationError);
  CHECK_THROWS_AS(read_records(dir / "absent.txt"), ValidationError);
}

TEST_CASE("security-only mode solves for L") {
  const fs::path dir = fresh_dir("qds_sec_only");
  Scenario s;
  s.mode = RunMode::SecurityOnly;
  s.thresholds.optimize = true;
  s.security = {0.0378, 0.447, 0.0, 1e-4};
  CHECK(run_scenario(s, dir) == exit_code::accept);
  const std::string rep = slurp(dir / "security_report.txt");
  double L = 0.0;
  REQUIRE(std::sscanf(rep.c_str(), "e %*f\nP_e %*f\nL %lf", &L) == 1);
  CHECK(L == doctest::Approx(939.0).epsilon(0.02));
  CHECK(rep.find("epsilon_union") != std::string::npos);
  const std::string sum = slurp(dir / "summary.txt");
  CHECK(sum.find("exit_status 0") != std::string::npos);
}

TEST_CASE("honest run, determinism and replay") {
  const Scenario s = Scenario::parse(kHonestJson);
  const fs::path run1 = fresh_dir("qds_run1");
  const fs::path run2 = fresh_dir("qds_run2");
  const fs::path rep = fresh_dir("qds_replay");

  const int status1 = run_scenario(s, run1);
  CHECK(status1 == exit_code::accept);
  CHECK(run_scenario(s, run2) == status1);

  const char* files[] = {"summary.txt",           "security_report.txt",
                         "transcript.log",        "image_bob_x_keep.txt",
                         "image_bob_y_forward.txt", "manifest.json"};
  for (const char* f : files) CHECK(slurp(run1 / f) == slurp(run2 / f));

  // replay from the exported records reproduces the reports exactly
  CHECK(replay_scenario(s, run1 / "records.txt", rep) == status1);
  for (const char* f : files) CHECK(slurp(run1 / f) == slurp(rep / f));

  // a different message over the same records: same distribution stage,
  // different signature
  Scenario other = s;
  other.message = Message::from_string("0101010101");
  const fs::path rep2 = fresh_dir("qds_replay2");
  CHECK(replay_scenario(other, run1 / "records.txt", rep2) == exit_code::accept);
  const std::string s1 = slurp(run1 / "summary.txt");
  const std::string s2 = slurp(rep2 / "summary.txt");
  auto field = [](const std::string& text, const char* key) {
    const auto pos = text.find(key);
    REQUIRE(pos != std::string::npos);
    return text.substr(pos, text.find('\n', pos) - pos);
  };
  CHECK(field(s1, "e_hat_x") == field(s2, "e_hat_x"));
  CHECK(field(s1, "e_hat_y") == field(s2, "e_hat_y"));
  CHECK(field(s1, "block_x_keep") == field(s2, "block_x_keep"));
  CHECK(slurp(run1 / "image_bob_x_keep.txt") !=
        slurp(rep2 / "image_bob_x_keep.txt"));

  // replay with mismatched encoding parameters is refused
  Scenario bad_enc = s;
  bad_enc.encoding.bins_per_slot = 5;
  CHECK_THROWS_AS(replay_scenario(bad_enc, run1 / "records.txt", rep2),
                  ValidationError);
}

TEST_CASE("channel abort exit status") {
  Scenario s = Scenario::parse(kHonestJson);
  s.abort_error_limit = 0.001;  // far below the operating error rate
  const fs::path dir = fresh_dir("qds_abort");
  CHECK(run_scenario(s, dir) == exit_code::channel_abort);
  CHECK(slurp(dir / "summary.txt").find("channel abort") != std::string::npos);
}

TEST_CASE("degenerate run exit status") {
  Scenario s = Scenario::parse(kHonestJson);
  s.source.pair_rate = 200.0;  // a handful of pairs, empty post-sift blocks
  s.source.duration = 0.01;
  const fs::path dir = fresh_dir("qds_degenerate");
  CHECK(run_scenario(s, dir) == exit_code::degenerate);
}
