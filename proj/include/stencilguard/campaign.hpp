#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stencilguard/fault.hpp"
#include "stencilguard/grid.hpp"

namespace stencilguard {

enum class Mode { NoAbft, Online, Offline };
enum class FaultPolicy { None, RandomSingle, FixedBit };

std::string to_string(Mode m);
std::string to_string(FaultPolicy p);
Mode parse_mode(const std::string& text);

struct CampaignConfig {
  TileDims dims{64, 64, 8};
  std::int64_t iterations = 128;
  std::int64_t repetitions = 1000;
  Mode mode = Mode::Online;
  double epsilon = 1e-5;
  std::int64_t delta = 16;
  std::string kernel = "hotspot3d";
  std::uint64_t base_seed = 1;
  FaultPolicy fault = FaultPolicy::RandomSingle;
  int fixed_bit = 31;
  // Inclusive bit range for RandomSingle; -1 means the full element width.
  int bit_lo = -1;
  int bit_hi = -1;
  FaultTarget target = FaultTarget::Domain;
  ElementType dtype = ElementType::Binary32;
  int threads = 1;
  bool parallel_reps = false;  // accuracy-only: reps run concurrently, no timing

  // Table 1 configurations.
  static CampaignConfig small_tile();  // 64x64x8, 128 iterations, 1000 reps
  static CampaignConfig large_tile();  // 512x512x8, 256 iterations, 100 reps

  int element_width() const { return element_bits(dtype); }
  // Throws InvalidParams.
  void validate() const;
};

struct RunResult {
  std::int64_t rep = 0;
  std::uint64_t seed = 0;
  Mode mode = Mode::NoAbft;
  std::optional<FaultSpec> fault;
  bool fault_fired = false;
  std::int64_t detections = 0;   // online: flagged steps; offline: mismatching detection points
  std::int64_t corrections = 0;  // online correction records
  std::int64_t checksum_repairs = 0;
  std::int64_t rollbacks = 0;
  std::int64_t detection_points = 0;
  bool uncorrectable = false;
  bool persistent = false;
  std::string message;
  double l2_error = 0.0;
  bool exact = false;  // final tile bitwise equal to the reference
  double wall_ms = 0.0;
};

/// sqrt(sum (ref - comp)^2), accumulated in binary64. Throws LengthMismatch.
template <typename T>
double l2_error(std::span<const T> ref, std::span<const T> comp);

/// Error-free single-threaded unprotected run, computed once per
/// (kernel, dims, iterations, element type).
template <typename T>
const Tile3D<T>& reference_run(const std::string& kernel, const TileDims& dims, std::int64_t iterations);

std::uint64_t rep_seed(std::uint64_t base_seed, std::int64_t rep);

// The fault a repetition will carry, or nullopt for FaultPolicy::None.
std::optional<FaultSpec> planned_fault(const CampaignConfig& cfg, std::int64_t rep);

RunResult run_single(const CampaignConfig& cfg, std::int64_t rep);

struct Aggregates {
  std::int64_t runs = 0;
  double l2_mean = 0.0;
  double l2_median = 0.0;
  double l2_max = 0.0;
  double l2_q1 = 0.0;
  double l2_q3 = 0.0;
  double wall_mean_ms = 0.0;
  double wall_stddev_ms = 0.0;
  double detection_rate = 0.0;   // runs with >= 1 detection
  double correction_rate = 0.0;  // detected runs that were corrected or rolled back
  double exact_rate = 0.0;
  std::int64_t uncorrectable = 0;
  std::int64_t persistent = 0;
};

Aggregates aggregate(std::span<const RunResult> results);

// Linear interpolation between order statistics; q in [0, 1].
double quantile(std::vector<double> values, double q);

struct CampaignResult {
  CampaignConfig config;
  std::vector<RunResult> results;
  Aggregates summary;
};

/// Runs all repetitions (after one discarded warm-up run when timing).
/// Writes results.csv and summary.json into out_dir when given.
CampaignResult run_campaign(const CampaignConfig& cfg,
                            const std::optional<std::filesystem::path>& out_dir = std::nullopt);

struct BitRow {
  int bit = 0;
  Aggregates agg;
};

/// One FixedBit campaign per bit in [0, element width).
std::vector<BitRow> bit_position_sweep(const CampaignConfig& cfg,
                                       const std::optional<std::filesystem::path>& out_dir = std::nullopt);

struct PeriodRow {
  std::int64_t delta = 0;
  std::string scenario;  // "error-free" or "single-fault"
  Aggregates agg;
  double mean_detection_points = 0.0;
  double mean_rollbacks = 0.0;
};

inline const std::vector<std::int64_t> kDefaultDeltas{1, 2, 4, 8, 16, 32, 64, 128};

std::vector<PeriodRow> period_sweep(const CampaignConfig& cfg, const std::vector<std::int64_t>& deltas,
                                    const std::optional<std::filesystem::path>& out_dir = std::nullopt);

inline constexpr double kReportedOverhead = 1.08;

struct OverheadResult {
  double unprotected_mean_ms = 0.0;
  double protected_mean_ms = 0.0;
  double ratio = 0.0;
  double reported_ratio = kReportedOverhead;
  std::int64_t reps = 0;
};

/// Error-free NoAbft vs. cfg.mode wall time, interleaved rep by rep.
OverheadResult measure_overhead(const CampaignConfig& cfg,
                                const std::optional<std::filesystem::path>& out_dir = std::nullopt);

// Output helpers (also used by tests for round trips).
std::string results_csv_header();
std::string to_csv_row(const RunResult& r);
std::vector<RunResult> parse_results_csv(std::istream& in);
std::string config_json(const CampaignConfig& cfg);  // pretty JSON object
std::string run_result_json(const RunResult& r);

}  // namespace stencilguard
