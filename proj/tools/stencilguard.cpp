// stencilguard: run, campaign, bitsweep, periodsweep and overhead commands.
//
// Exit codes: 0 clean or corrected, 1 usage/config error, 2 uncorrectable
// error in some run, 3 persistent error in some run.

#include <cstdlib>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "stencilguard/campaign.hpp"
#include "stencilguard/config.hpp"
#include "stencilguard/error.hpp"

namespace sg = stencilguard;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitUncorrectable = 2;
constexpr int kExitPersistent = 3;

// Flag values as given on the command line, keyed by config key.
struct Flags {
  std::map<std::string, std::string> values;
  std::string config;
  bool large = false;
  std::string out;
  std::string deltas;
  std::int64_t rep = 0;
};

void add_config_flags(CLI::App* cmd, Flags& f) {
  auto opt = [&](const std::string& name, const std::string& key, const std::string& help) {
    cmd->add_option_function<std::string>(
        name, [&f, key](const std::string& v) { f.values[key] = v; }, help);
  };
  cmd->add_option("--config", f.config, "TOML config file (flags override it)");
  cmd->add_flag("--large", f.large, "start from the 512x512x8 / 256 iterations / 100 reps defaults");
  opt("--mode", "mode", "noabft | online | offline");
  opt("--tile", "tile", "tile dims NXxNYxNZ");
  opt("--iters", "iterations", "iterations per run");
  opt("--reps", "repetitions", "repetitions");
  opt("--fault", "fault", "none | random | bit:<n>");
  opt("--bit-range", "bit_range", "bit range for random faults, <lo>-<hi> or all");
  opt("--target", "target", "domain | checksum");
  opt("--seed", "seed", "base seed; rep r uses seed ^ r");
  opt("--epsilon", "epsilon", "detection threshold");
  opt("--delta", "delta", "offline detection period (1-128)");
  opt("--dtype", "dtype", "f32 | f64");
  opt("--kernel", "kernel", "hotspot3d | five-point | average4 | identity");
  opt("--threads", "threads", "threads per run (STENCILGUARD_THREADS also sets this)");
  cmd->add_flag_function(
      "--parallel-reps", [&f](std::int64_t) { f.values["parallel_reps"] = "true"; },
      "run reps concurrently (accuracy only, no timing)");
}

sg::CampaignConfig resolve(const Flags& f) {
  sg::CampaignConfig cfg = f.large ? sg::CampaignConfig::large_tile() : sg::CampaignConfig::small_tile();
  if (!f.config.empty()) sg::apply_config_file(cfg, f.config);
  if (const char* env = std::getenv("STENCILGUARD_THREADS"); env && *env) sg::apply_setting(cfg, "threads", env);
  for (const auto& [key, value] : f.values) sg::apply_setting(cfg, key, value);
  cfg.validate();
  return cfg;
}

int outcome_code(std::int64_t uncorrectable, std::int64_t persistent) {
  if (persistent > 0) return kExitPersistent;
  if (uncorrectable > 0) return kExitUncorrectable;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Checksum-based fault tolerance for stencil sweeps"};
  app.require_subcommand(1);

  Flags run_f, camp_f, bit_f, period_f, over_f;
  auto* run = app.add_subcommand("run", "single run; prints the result as JSON");
  add_config_flags(run, run_f);
  run->add_option("--rep", run_f.rep, "repetition index");

  auto* camp = app.add_subcommand("campaign", "repeated runs; writes results.csv and summary.json");
  add_config_flags(camp, camp_f);
  camp->add_option("--out", camp_f.out, "output directory")->required();

  auto* bits = app.add_subcommand("bitsweep", "fixed-bit campaign for every bit position");
  add_config_flags(bits, bit_f);
  bits->add_option("--out", bit_f.out, "output directory")->required();

  auto* period = app.add_subcommand("periodsweep", "offline wall time across detection periods");
  add_config_flags(period, period_f);
  period->add_option("--deltas", period_f.deltas, "comma-separated periods (default 1,2,4,...,128)");
  period->add_option("--out", period_f.out, "output directory")->required();

  auto* over = app.add_subcommand("overhead", "protected vs. unprotected wall time, error-free");
  add_config_flags(over, over_f);
  over->add_option("--out", over_f.out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*run) {
      const auto cfg = resolve(run_f);
      const sg::RunResult r = sg::run_single(cfg, run_f.rep);
      std::cout << sg::run_result_json(r) << '\n';
      return outcome_code(r.uncorrectable ? 1 : 0, r.persistent ? 1 : 0);
    }
    if (*camp) {
      const auto cfg = resolve(camp_f);
      const auto res = sg::run_campaign(cfg, camp_f.out);
      std::cerr << "campaign: " << res.summary.runs << " runs, median l2 " << res.summary.l2_median
                << ", detection rate " << res.summary.detection_rate << '\n';
      return outcome_code(res.summary.uncorrectable, res.summary.persistent);
    }
    if (*bits) {
      const auto cfg = resolve(bit_f);
      const auto rows = sg::bit_position_sweep(cfg, bit_f.out);
      std::int64_t unc = 0, per = 0;
      for (const auto& r : rows) {
        unc += r.agg.uncorrectable;
        per += r.agg.persistent;
      }
      std::cerr << "bitsweep: " << rows.size() << " rows\n";
      return outcome_code(unc, per);
    }
    if (*period) {
      const auto cfg = resolve(period_f);
      const auto deltas = period_f.deltas.empty() ? sg::kDefaultDeltas : sg::parse_int_list(period_f.deltas);
      const auto rows = sg::period_sweep(cfg, deltas, period_f.out);
      std::int64_t unc = 0, per = 0;
      for (const auto& r : rows) {
        unc += r.agg.uncorrectable;
        per += r.agg.persistent;
      }
      std::cerr << "periodsweep: " << rows.size() << " rows\n";
      return outcome_code(unc, per);
    }
    if (*over) {
      const auto cfg = resolve(over_f);
      const auto r = sg::measure_overhead(cfg, over_f.out);
      std::cerr << "overhead: measured ratio " << r.ratio << " (reported " << r.reported_ratio << ")\n";
      return 0;
    }
  } catch (const sg::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const sg::InvalidParams& e) {
    std::cerr << "invalid parameters: " << e.what() << '\n';
    return kExitUsage;
  } catch (const sg::DimensionMismatch& e) {
    std::cerr << "invalid parameters: " << e.what() << '\n';
    return kExitUsage;
  } catch (const sg::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
