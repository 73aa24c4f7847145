#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "qds/scenario.hpp"
#include "qds/security.hpp"

// Command-line front end: scenario runs, record replay, analytic security
// evaluation, attack campaigns and seed-swept batches.

namespace {

using namespace qds;

Scenario load_with_overrides(const std::string& scenario_file,
                             const std::string& mode_override,
                             const std::string& message_override,
                             bool seed_given, std::uint64_t seed_override) {
  Scenario s = Scenario::load(scenario_file);
  if (!mode_override.empty()) s.mode = mode_from_string(mode_override);
  if (!message_override.empty()) s.message = Message::from_string(message_override);
  if (seed_given) s.seed = seed_override;
  s.validate();
  return s;
}

int cmd_batch(const Scenario& base, int runs, const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  std::ofstream os(fs::path(out_dir) / "batch_summary.txt");
  os << "run seed exit_status\n";
  int counts[32] = {};
  for (int i = 0; i < runs; ++i) {
    Scenario s = base;
    s.seed = base.seed + static_cast<std::uint64_t>(i);
    const fs::path run_dir = fs::path(out_dir) / ("run_" + std::to_string(i));
    const int status = run_scenario(s, run_dir);
    os << i << ' ' << s.seed << ' ' << status << '\n';
    if (status >= 0 && status < 32) ++counts[status];
  }
  os << "# accept " << counts[exit_code::accept] << " bob_reject "
     << counts[exit_code::bob_reject] << " charlie_reject "
     << counts[exit_code::charlie_reject] << " channel_abort "
     << counts[exit_code::channel_abort] << " degenerate "
     << counts[exit_code::degenerate] << "\n";
  std::cout << "batch of " << runs << " runs written to " << out_dir << "\n";
  return counts[exit_code::accept] == runs ? exit_code::accept
                                           : exit_code::bob_reject;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Event-level simulator for a multi-bit temporal-ghost-imaging "
               "signature protocol"};
  app.require_subcommand(1);

  std::string scenario_file, out_dir = "out", mode_override, message_override;
  std::string records_file;
  std::uint64_t seed_override = 0;
  bool seed_given = false;

  auto add_common = [&](CLI::App* cmd, bool need_scenario) {
    auto* opt = cmd->add_option("--scenario", scenario_file, "scenario JSON file");
    if (need_scenario) opt->required();
    cmd->add_option("--out", out_dir, "output directory");
    cmd->add_option("--mode", mode_override, "override scenario mode");
    cmd->add_option("--message", message_override, "override message bits");
    cmd->add_option("--seed", seed_override, "override scenario seed")
        ->each([&](const std::string&) { seed_given = true; });
  };

  auto* run = app.add_subcommand("run", "run a scenario end to end");
  add_common(run, true);

  auto* replay = app.add_subcommand("replay", "re-run from an exported record file");
  add_common(replay, true);
  replay->add_option("--records", records_file, "record file")->required();

  auto* attack = app.add_subcommand("attack", "run an attack-mode scenario");
  add_common(attack, true);

  auto* batch = app.add_subcommand("batch", "repeat an honest scenario over seeds");
  add_common(batch, true);
  int batch_runs = 10;
  batch->add_option("--runs", batch_runs, "number of runs")
      ->check(CLI::PositiveNumber);

  auto* security = app.add_subcommand("security", "analytic bounds only");
  double sec_e = 0.0378, sec_pe = 0.447, sec_L = 0.0, sec_target = 0.0;
  int surface_grid = 0, curve_points = 0;
  double curve_min = 100.0, curve_max = 2000.0;
  security->add_option("--e", sec_e, "channel slot error rate");
  security->add_option("--p-e", sec_pe, "forger's minimum error probability");
  security->add_option("--L", sec_L, "per-slot record count");
  security->add_option("--epsilon-target", sec_target,
                       "derive L from a target security level");
  security->add_option("--out", out_dir, "output directory");
  security->add_option("--surface-grid", surface_grid,
                       "also write an epsilon threshold surface of this grid size");
  security->add_option("--curve-points", curve_points,
                       "also write optimized epsilon versus L");
  security->add_option("--curve-min", curve_min, "curve L range start");
  security->add_option("--curve-max", curve_max, "curve L range end");

  CLI11_PARSE(app, argc, argv);

  try {
    if (security->parsed()) {
      Scenario s;
      s.mode = qds::RunMode::SecurityOnly;
      s.thresholds.optimize = true;
      s.security = {sec_e, sec_pe, sec_L, sec_target};
      const int status = run_scenario(s, out_dir);
      if (surface_grid > 0) {
        double L = sec_L;
        if (sec_target > 0.0) L = required_L(sec_e, sec_pe, sec_target);
        write_threshold_surface(std::filesystem::path(out_dir) / "surface.txt",
                                sec_e, sec_pe, L, surface_grid);
      }
      if (curve_points > 1)
        write_epsilon_curve(std::filesystem::path(out_dir) / "epsilon_curve.txt",
                            sec_e, sec_pe, curve_min, curve_max, curve_points);
      std::cout << "security report written to " << out_dir << "\n";
      return status;
    }
    Scenario s = load_with_overrides(scenario_file, mode_override,
                                     message_override, seed_given, seed_override);
    if (batch->parsed()) return cmd_batch(s, batch_runs, out_dir);
    int status;
    if (replay->parsed())
      status = replay_scenario(s, records_file, out_dir);
    else
      status = run_scenario(s, out_dir);
    std::cout << "reports written to " << out_dir << " (exit status " << status
              << ")\n";
    return status;
  } catch (const qds::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return qds::exit_code::validation;
  } catch (const std::invalid_argument& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return qds::exit_code::validation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
