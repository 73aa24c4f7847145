#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "qds/parties.hpp"
#include "qds/photonics.hpp"
#include "qds/records.hpp"
#include "qds/timebase.hpp"

// Scenario configuration, end-to-end orchestration and report emission.

namespace qds {

inline constexpr const char* kVersion = "0.1.0";

// Exit-status contract (scriptable acceptance):
//   0 accept, 10 Bob-reject, 11 Charlie-reject, 20 channel-abort or
//   attack-detected, 21 degenerate run (empty blocks), 30 validation error.
namespace exit_code {
inline constexpr int accept = 0;
inline constexpr int bob_reject = 10;
inline constexpr int charlie_reject = 11;
inline constexpr int channel_abort = 20;
inline constexpr int degenerate = 21;
inline constexpr int validation = 30;
}  // namespace exit_code

struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class RunMode { Honest, Forge, Repudiate, Eavesdrop, Selective, SecurityOnly };

RunMode mode_from_string(const std::string& s);
std::string mode_to_string(RunMode m);

struct ThresholdConfig {
  bool optimize = false;
  double bob = 0.0;
  double charlie = 0.0;
};

struct ChannelConfig {
  ChannelPerturbation perturbation;
  double chi_bound = 0.0;  // externally supplied eavesdropping bound
};

struct SecurityConfig {
  double e = 0.0;
  double p_e = 1.0;
  double L = 0.0;              // 0: derive from epsilon_target
  double epsilon_target = 0.0; // 0: use L as given
};

struct AttackConfig {
  int trials = 10000;
  double per_slot_mean = 100.0;     // synthetic L for forge/repudiate trials
  double slot_error = 0.0378;
  double p_e = 0.447;
  std::vector<double> deltas;       // repudiation sweep
  std::vector<double> chis;         // eavesdrop sweep
  std::vector<int> targeted_slots;  // selective probe
  double chi = 0.0;                 // selective probe attack fraction
};

struct Scenario {
  RunMode mode = RunMode::Honest;
  std::uint64_t seed = 0;
  EncodingParams encoding;
  SourceParams source;
  double disclose_fraction = 0.1;
  ChannelConfig channel_x, channel_y;
  Message message;
  ThresholdConfig thresholds;
  double abort_error_limit = 1.0;
  double abort_chi_limit = 1.0;
  bool export_records = false;
  SecurityConfig security;
  AttackConfig attack;

  // Parses the structured scenario file. All physical parameters are
  // explicit; missing fields are a ValidationError.
  static Scenario load(const std::filesystem::path& file);
  static Scenario parse(const std::string& json_text);
  std::string manifest_json() const;

  void validate() const;
};

// Runs the scenario end to end and writes all report artifacts into
// out_dir. Returns the exit status per the contract above.
int run_scenario(const Scenario& s, const std::filesystem::path& out_dir);

// Re-runs the protocol stages from an exported record file, bypassing
// photon generation. Identical inputs yield byte-identical reports.
int replay_scenario(const Scenario& s, const std::filesystem::path& record_file,
                    const std::filesystem::path& out_dir);

// Record file round trip: line-delimited `party frame slot bin` with a
// header carrying the encoding parameters and seed.
void write_records(const std::filesystem::path& file, const RawDetections& d,
                   const EncodingParams& params, std::uint64_t seed);
struct LoadedRecords {
  RawDetections detections;
  EncodingParams encoding;
  std::uint64_t seed = 0;
};
LoadedRecords read_records(const std::filesystem::path& file);

// Columnar exports for the security module: epsilon over a threshold grid
// at fixed L, and optimized epsilon versus L.
void write_threshold_surface(const std::filesystem::path& file, double e,
                             double p_e, double L, int grid);
void write_epsilon_curve(const std::filesystem::path& file, double e,
                         double p_e, double l_min, double l_max, int points);

}  // namespace qds
