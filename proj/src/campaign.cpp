#include "stencilguard/campaign.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "stencilguard/error.hpp"
#include "stencilguard/kernels.hpp"
#include "stencilguard/offline.hpp"
#include "stencilguard/online.hpp"
#include "stencilguard/sweep.hpp"

namespace stencilguard {

using nlohmann::json;

std::string to_string(Mode m) {
  switch (m) {
    case Mode::NoAbft:
      return "noabft";
    case Mode::Online:
      return "online";
    case Mode::Offline:
      return "offline";
  }
  return "unknown";
}

std::string to_string(FaultPolicy p) {
  switch (p) {
    case FaultPolicy::None:
      return "none";
    case FaultPolicy::RandomSingle:
      return "random";
    case FaultPolicy::FixedBit:
      return "fixed";
  }
  return "unknown";
}

Mode parse_mode(const std::string& text) {
  if (text == "noabft" || text == "none") return Mode::NoAbft;
  if (text == "online") return Mode::Online;
  if (text == "offline") return Mode::Offline;
  throw InvalidParams("unknown mode '" + text + "' (expected noabft, online or offline)");
}

CampaignConfig CampaignConfig::small_tile() { return CampaignConfig{}; }

CampaignConfig CampaignConfig::large_tile() {
  CampaignConfig c;
  c.dims = {512, 512, 8};
  c.iterations = 256;
  c.repetitions = 100;
  return c;
}

void CampaignConfig::validate() const {
  if (dims.cells() == 0) throw InvalidParams("tile dims must be >= 1");
  if (iterations < 1) throw InvalidParams("iterations must be >= 1");
  if (repetitions < 1) throw InvalidParams("repetitions must be >= 1");
  if (!(epsilon > 0.0)) throw InvalidParams("epsilon must be > 0");
  if (delta < 1 || delta > kMaxDetectionPeriod)
    throw InvalidParams("delta must be in [1, " + std::to_string(kMaxDetectionPeriod) + "]");
  if (threads < 1) throw InvalidParams("threads must be >= 1");
  const int width = element_width();
  if (fault == FaultPolicy::FixedBit && (fixed_bit < 0 || fixed_bit >= width))
    throw InvalidParams("fixed bit outside the element width");
  if ((bit_lo >= 0) != (bit_hi >= 0)) throw InvalidParams("bit range needs both ends");
  if (bit_lo >= 0 && (bit_lo > bit_hi || bit_hi >= width)) throw InvalidParams("bit range outside the element width");
  const auto names = kernel_names();
  if (std::find(names.begin(), names.end(), kernel) == names.end())
    throw InvalidParams("unknown kernel '" + kernel + "'");
}

template <typename T>
double l2_error(std::span<const T> ref, std::span<const T> comp) {
  if (ref.size() != comp.size())
    throw LengthMismatch("l2_error: " + std::to_string(ref.size()) + " vs " + std::to_string(comp.size()) + " values");
  double sum = 0.0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    const double d = static_cast<double>(ref[i]) - static_cast<double>(comp[i]);
    sum += d * d;
  }
  return std::sqrt(sum);
}

template double l2_error<float>(std::span<const float>, std::span<const float>);
template double l2_error<double>(std::span<const double>, std::span<const double>);

namespace {

template <typename T>
using BitsOfT = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;

template <typename T>
double tile_l2(const Tile3D<T>& ref, const Tile3D<T>& comp) {
  if (ref.nx() != comp.nx() || ref.ny() != comp.ny() || ref.nz() != comp.nz())
    throw LengthMismatch("l2_error: tiles differ in shape");
  double sum = 0.0;
  for (std::size_t z = 0; z < ref.nz(); ++z) {
    const auto r = ref.layer(z).values();
    const auto c = comp.layer(z).values();
    for (std::size_t i = 0; i < r.size(); ++i) {
      const double d = static_cast<double>(r[i]) - static_cast<double>(c[i]);
      sum += d * d;
    }
  }
  return std::sqrt(sum);
}

template <typename T>
bool bitwise_equal(const Tile3D<T>& a, const Tile3D<T>& b) {
  if (a.nx() != b.nx() || a.ny() != b.ny() || a.nz() != b.nz()) return false;
  for (std::size_t z = 0; z < a.nz(); ++z) {
    const auto x = a.layer(z).values();
    const auto y = b.layer(z).values();
    if (!std::equal(x.begin(), x.end(), y.begin(),
                    [](T p, T q) { return std::bit_cast<BitsOfT<T>>(p) == std::bit_cast<BitsOfT<T>>(q); }))
      return false;
  }
  return true;
}

}  // namespace

template <typename T>
const Tile3D<T>& reference_run(const std::string& kernel, const TileDims& dims, std::int64_t iterations) {
  static std::mutex mu;
  static std::map<std::string, std::unique_ptr<Tile3D<T>>> cache;
  const std::string key = kernel + "|" + std::to_string(dims.nx) + "x" + std::to_string(dims.ny) + "x" +
                          std::to_string(dims.nz) + "|" + std::to_string(iterations);
  std::lock_guard lock(mu);
  auto it = cache.find(key);
  if (it != cache.end()) return *it->second;
  const KernelSpec k = make_kernel(kernel, dims);
  TileSweeper<T> sweeper(k, dims, 1);
  Tile3D<T> cur = initial_tile<T>(k, dims);
  Tile3D<T> next(dims.nx, dims.ny, dims.nz);
  for (std::int64_t t = 0; t < iterations; ++t) {
    sweeper.run(cur, next, nullptr, nullptr);
    std::swap(cur, next);
  }
  auto& slot = cache[key];
  slot = std::make_unique<Tile3D<T>>(std::move(cur));
  return *slot;
}

template const Tile3D<float>& reference_run<float>(const std::string&, const TileDims&, std::int64_t);
template const Tile3D<double>& reference_run<double>(const std::string&, const TileDims&, std::int64_t);

std::uint64_t rep_seed(std::uint64_t base_seed, std::int64_t rep) {
  return base_seed ^ static_cast<std::uint64_t>(rep);
}

std::optional<FaultSpec> planned_fault(const CampaignConfig& cfg, std::int64_t rep) {
  const std::uint64_t seed = rep_seed(cfg.base_seed, rep);
  std::optional<FaultSpec> f;
  switch (cfg.fault) {
    case FaultPolicy::None:
      return std::nullopt;
    case FaultPolicy::RandomSingle: {
      const bool ranged = cfg.bit_lo >= 0;
      f = schedule_random_fault(seed, cfg.dims, cfg.iterations, ranged ? cfg.bit_lo : 0,
                                ranged ? cfg.bit_hi : cfg.element_width() - 1);
      break;
    }
    case FaultPolicy::FixedBit:
      f = schedule_random_fault(seed, cfg.dims, cfg.iterations, cfg.fixed_bit, cfg.fixed_bit);
      break;
  }
  f->target = cfg.target;
  return f;
}

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

template <typename T>
Tile3D<T> run_mode(const CampaignConfig& cfg, const KernelSpec& kernel, FaultInjector& injector, RunResult& r) {
  Tile3D<T> initial = initial_tile<T>(kernel, cfg.dims);
  switch (cfg.mode) {
    case Mode::NoAbft: {
      TileSweeper<T> sweeper(kernel, cfg.dims, cfg.threads);
      Tile3D<T> cur = std::move(initial);
      Tile3D<T> next(cfg.dims.nx, cfg.dims.ny, cfg.dims.nz);
      const auto start = Clock::now();
      for (std::int64_t t = 0; t < cfg.iterations; ++t) {
        const auto f = injector.due(t);
        sweeper.run(cur, next, nullptr, f ? &*f : nullptr);
        if (f) injector.disarm();
        std::swap(cur, next);
      }
      r.wall_ms = elapsed_ms(start);
      return cur;
    }
    case Mode::Online: {
      OnlineAbft<T> abft(kernel, std::move(initial), AbftOptions{cfg.epsilon, cfg.threads});
      const auto start = Clock::now();
      for (std::int64_t t = 0; t < cfg.iterations; ++t) {
        const auto f = injector.due(t);
        const StepReport rep = abft.step(f ? &*f : nullptr);
        if (f) injector.disarm();
        if (rep.detected) {
          ++r.detections;
          r.corrections += static_cast<std::int64_t>(rep.records.size());
          r.checksum_repairs += static_cast<std::int64_t>(rep.checksum_repairs);
          if (rep.uncorrectable) {
            r.uncorrectable = true;
            r.message = "iteration " + std::to_string(rep.iteration) + ": " + rep.message;
          }
        }
      }
      r.wall_ms = elapsed_ms(start);
      r.detection_points = cfg.iterations;
      return abft.tile();
    }
    case Mode::Offline: {
      OfflineOptions opts;
      opts.epsilon = cfg.epsilon;
      opts.delta = cfg.delta;
      opts.threads = cfg.threads;
      OfflineAbft<T> abft(kernel, std::move(initial), opts);
      const auto start = Clock::now();
      try {
        abft.run(cfg.iterations, injector);
      } catch (const PersistentError& e) {
        r.persistent = true;
        r.message = e.what();
      }
      r.wall_ms = elapsed_ms(start);
      r.detections = abft.stats().mismatches;
      r.rollbacks = abft.stats().rollbacks;
      r.detection_points = abft.stats().detection_points;
      return abft.tile();
    }
  }
  throw InvalidParams("unknown mode");
}

template <typename T>
RunResult run_typed(const CampaignConfig& cfg, std::int64_t rep) {
  RunResult r;
  r.rep = rep;
  r.seed = rep_seed(cfg.base_seed, rep);
  r.mode = cfg.mode;
  r.fault = planned_fault(cfg, rep);
  const KernelSpec kernel = make_kernel(cfg.kernel, cfg.dims);
  FaultInjector injector = r.fault ? FaultInjector(*r.fault) : FaultInjector();
  const Tile3D<T> out = run_mode<T>(cfg, kernel, injector, r);
  r.fault_fired = injector.fired();
  const Tile3D<T>& ref = reference_run<T>(cfg.kernel, cfg.dims, cfg.iterations);
  r.l2_error = tile_l2(ref, out);
  r.exact = bitwise_equal(ref, out);
  return r;
}

}  // namespace

RunResult run_single(const CampaignConfig& cfg, std::int64_t rep) {
  cfg.validate();
  return cfg.dtype == ElementType::Binary32 ? run_typed<float>(cfg, rep) : run_typed<double>(cfg, rep);
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) return std::nan("");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = static_cast<std::size_t>(std::ceil(pos));
  const double frac = pos - static_cast<double>(lo);
  if (lo == hi) return values[lo];
  return values[lo] + frac * (values[hi] - values[lo]);
}

Aggregates aggregate(std::span<const RunResult> results) {
  Aggregates a;
  a.runs = static_cast<std::int64_t>(results.size());
  if (results.empty()) return a;
  std::vector<double> l2;
  l2.reserve(results.size());
  double l2_sum = 0.0, wall_sum = 0.0;
  std::int64_t detected = 0, repaired = 0, exact = 0;
  for (const RunResult& r : results) {
    l2.push_back(r.l2_error);
    l2_sum += r.l2_error;
    wall_sum += r.wall_ms;
    if (r.detections > 0) {
      ++detected;
      if (!r.uncorrectable && !r.persistent && (r.corrections + r.checksum_repairs + r.rollbacks) > 0) ++repaired;
    }
    exact += r.exact ? 1 : 0;
    a.uncorrectable += r.uncorrectable ? 1 : 0;
    a.persistent += r.persistent ? 1 : 0;
  }
  const double n = static_cast<double>(results.size());
  a.l2_mean = l2_sum / n;
  a.l2_max = *std::max_element(l2.begin(), l2.end());
  a.l2_median = quantile(l2, 0.5);
  a.l2_q1 = quantile(l2, 0.25);
  a.l2_q3 = quantile(l2, 0.75);
  a.wall_mean_ms = wall_sum / n;
  double var = 0.0;
  for (const RunResult& r : results) var += (r.wall_ms - a.wall_mean_ms) * (r.wall_ms - a.wall_mean_ms);
  a.wall_stddev_ms = results.size() > 1 ? std::sqrt(var / (n - 1.0)) : 0.0;
  a.detection_rate = static_cast<double>(detected) / n;
  a.correction_rate = detected > 0 ? static_cast<double>(repaired) / static_cast<double>(detected) : 0.0;
  a.exact_rate = static_cast<double>(exact) / n;
  return a;
}

// ---- serialization ----

namespace {

json fault_json(const std::optional<FaultSpec>& f) {
  if (!f) return nullptr;
  return {{"iteration", f->iteration}, {"z", f->z}, {"x", f->x}, {"y", f->y},
          {"bit", f->bit},             {"armed", f->armed}, {"target", to_string(f->target)}};
}

json aggregates_json(const Aggregates& a) {
  return {{"runs", a.runs},
          {"l2_mean", a.l2_mean},
          {"l2_median", a.l2_median},
          {"l2_max", a.l2_max},
          {"l2_q1", a.l2_q1},
          {"l2_q3", a.l2_q3},
          {"wall_mean_ms", a.wall_mean_ms},
          {"wall_stddev_ms", a.wall_stddev_ms},
          {"detection_rate", a.detection_rate},
          {"correction_rate", a.correction_rate},
          {"exact_rate", a.exact_rate},
          {"uncorrectable", a.uncorrectable},
          {"persistent", a.persistent}};
}

json config_object(const CampaignConfig& c) {
  return {{"nx", c.dims.nx},
          {"ny", c.dims.ny},
          {"nz", c.dims.nz},
          {"iterations", c.iterations},
          {"repetitions", c.repetitions},
          {"mode", to_string(c.mode)},
          {"epsilon", c.epsilon},
          {"delta", c.delta},
          {"kernel", c.kernel},
          {"seed", c.base_seed},
          {"fault", to_string(c.fault)},
          {"fixed_bit", c.fixed_bit},
          {"bit_lo", c.bit_lo},
          {"bit_hi", c.bit_hi},
          {"target", to_string(c.target)},
          {"dtype", c.dtype == ElementType::Binary32 ? "f32" : "f64"},
          {"threads", c.threads},
          {"parallel_reps", c.parallel_reps}};
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  out << text;
}

void ensure_dir(const std::optional<std::filesystem::path>& dir) {
  if (dir) std::filesystem::create_directories(*dir);
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream s(line);
  while (std::getline(s, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

}  // namespace

std::string results_csv_header() {
  return "rep,seed,mode,fault_iteration,fault_z,fault_x,fault_y,fault_bit,fault_target,fault_fired,detections,"
         "corrections,checksum_repairs,rollbacks,detection_points,uncorrectable,persistent,exact,l2_error,wall_ms";
}

std::string to_csv_row(const RunResult& r) {
  std::ostringstream s;
  s << r.rep << ',' << r.seed << ',' << to_string(r.mode) << ',';
  if (r.fault)
    s << r.fault->iteration << ',' << r.fault->z << ',' << r.fault->x << ',' << r.fault->y << ',' << r.fault->bit
      << ',' << to_string(r.fault->target) << ',';
  else
    s << ",,,,,,";
  s << (r.fault_fired ? 1 : 0) << ',' << r.detections << ',' << r.corrections << ',' << r.checksum_repairs << ','
    << r.rollbacks << ',' << r.detection_points << ',' << (r.uncorrectable ? 1 : 0) << ','
    << (r.persistent ? 1 : 0) << ',' << (r.exact ? 1 : 0) << ',' << fmt_double(r.l2_error) << ','
    << fmt_double(r.wall_ms);
  return s.str();
}

std::vector<RunResult> parse_results_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != results_csv_header()) throw FormatError("results.csv: unexpected header");
  std::vector<RunResult> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 20) throw FormatError("results.csv: expected 20 fields, got " + std::to_string(f.size()));
    try {
      RunResult r;
      r.rep = std::stoll(f[0]);
      r.seed = std::stoull(f[1]);
      r.mode = parse_mode(f[2]);
      if (!f[3].empty()) {
        FaultSpec s;
        s.iteration = std::stoll(f[3]);
        s.z = std::stoull(f[4]);
        s.x = std::stoull(f[5]);
        s.y = std::stoull(f[6]);
        s.bit = std::stoi(f[7]);
        s.target = f[8] == "checksum" ? FaultTarget::Checksum : FaultTarget::Domain;
        r.fault = s;
      }
      r.fault_fired = f[9] == "1";
      r.detections = std::stoll(f[10]);
      r.corrections = std::stoll(f[11]);
      r.checksum_repairs = std::stoll(f[12]);
      r.rollbacks = std::stoll(f[13]);
      r.detection_points = std::stoll(f[14]);
      r.uncorrectable = f[15] == "1";
      r.persistent = f[16] == "1";
      r.exact = f[17] == "1";
      r.l2_error = std::stod(f[18]);
      r.wall_ms = std::stod(f[19]);
      out.push_back(std::move(r));
    } catch (const std::logic_error& e) {
      throw FormatError(std::string("results.csv: bad field: ") + e.what());
    }
  }
  return out;
}

std::string config_json(const CampaignConfig& cfg) { return config_object(cfg).dump(2); }

std::string run_result_json(const RunResult& r) {
  json j = {{"schema", 1},
            {"rep", r.rep},
            {"seed", r.seed},
            {"mode", to_string(r.mode)},
            {"fault", fault_json(r.fault)},
            {"fault_fired", r.fault_fired},
            {"detections", r.detections},
            {"corrections", r.corrections},
            {"checksum_repairs", r.checksum_repairs},
            {"rollbacks", r.rollbacks},
            {"detection_points", r.detection_points},
            {"uncorrectable", r.uncorrectable},
            {"persistent", r.persistent},
            {"exact", r.exact},
            {"l2_error", r.l2_error},
            {"wall_ms", r.wall_ms}};
  if (!r.message.empty()) j["message"] = r.message;
  return j.dump(2);
}

// ---- campaigns ----

namespace {

std::vector<RunResult> run_reps(const CampaignConfig& cfg) {
  cfg.validate();
  std::vector<RunResult> results(static_cast<std::size_t>(cfg.repetitions));
  if (cfg.parallel_reps) {
    CampaignConfig inner = cfg;
    inner.threads = 1;
    // Fill the reference cache before fanning out.
    (void)run_single(inner, 0);
    const auto n = static_cast<std::ptrdiff_t>(cfg.repetitions);
#pragma omp parallel for schedule(dynamic) num_threads(cfg.threads)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      RunResult r = run_single(inner, i);
      r.wall_ms = 0.0;
      results[static_cast<std::size_t>(i)] = std::move(r);
    }
    return results;
  }
  (void)run_single(cfg, 0);  // warm-up, discarded
  for (std::int64_t i = 0; i < cfg.repetitions; ++i) results[static_cast<std::size_t>(i)] = run_single(cfg, i);
  return results;
}

}  // namespace

CampaignResult run_campaign(const CampaignConfig& cfg, const std::optional<std::filesystem::path>& out_dir) {
  CampaignResult res;
  res.config = cfg;
  res.results = run_reps(cfg);
  res.summary = aggregate(res.results);
  if (out_dir) {
    ensure_dir(out_dir);
    std::string csv = results_csv_header() + "\n";
    for (const RunResult& r : res.results) csv += to_csv_row(r) + "\n";
    write_text(*out_dir / "results.csv", csv);
    json j = {{"schema", 1}, {"kind", "campaign"}, {"config", config_object(cfg)},
              {"aggregates", aggregates_json(res.summary)}};
    write_text(*out_dir / "summary.json", j.dump(2) + "\n");
  }
  return res;
}

std::vector<BitRow> bit_position_sweep(const CampaignConfig& cfg, const std::optional<std::filesystem::path>& out_dir) {
  std::vector<BitRow> rows;
  CampaignConfig c = cfg;
  c.fault = FaultPolicy::FixedBit;
  for (int bit = 0; bit < cfg.element_width(); ++bit) {
    c.fixed_bit = bit;
    const auto results = run_reps(c);
    rows.push_back({bit, aggregate(results)});
  }
  if (out_dir) {
    ensure_dir(out_dir);
    std::string csv = "bit,mode,runs,detection_rate,exact_rate,l2_q1,l2_median,l2_q3,l2_max,l2_mean\n";
    json arr = json::array();
    for (const BitRow& r : rows) {
      csv += std::to_string(r.bit) + "," + to_string(cfg.mode) + "," + std::to_string(r.agg.runs) + "," +
             fmt_double(r.agg.detection_rate) + "," + fmt_double(r.agg.exact_rate) + "," + fmt_double(r.agg.l2_q1) +
             "," + fmt_double(r.agg.l2_median) + "," + fmt_double(r.agg.l2_q3) + "," + fmt_double(r.agg.l2_max) +
             "," + fmt_double(r.agg.l2_mean) + "\n";
      json row = aggregates_json(r.agg);
      row["bit"] = r.bit;
      arr.push_back(std::move(row));
    }
    write_text(*out_dir / "bitsweep.csv", csv);
    json j = {{"schema", 1}, {"kind", "bitsweep"}, {"config", config_object(c)}, {"bits", arr}};
    write_text(*out_dir / "summary.json", j.dump(2) + "\n");
  }
  return rows;
}

std::vector<PeriodRow> period_sweep(const CampaignConfig& cfg, const std::vector<std::int64_t>& deltas,
                                    const std::optional<std::filesystem::path>& out_dir) {
  if (deltas.empty()) throw InvalidParams("period sweep needs at least one delta");
  CampaignConfig base = cfg;
  base.mode = Mode::Offline;
  base.parallel_reps = false;
  struct Cell {
    CampaignConfig cfg;
    std::string scenario;
    std::vector<RunResult> results;
  };
  std::vector<Cell> cells;
  for (std::int64_t d : deltas) {
    for (const char* scenario : {"error-free", "single-fault"}) {
      CampaignConfig c = base;
      c.delta = d;
      c.fault = std::string(scenario) == "error-free" ? FaultPolicy::None : FaultPolicy::RandomSingle;
      c.validate();
      cells.push_back({c, scenario, {}});
    }
  }
  for (Cell& cell : cells) (void)run_single(cell.cfg, 0);  // warm-up
  // Reps are interleaved across deltas so slow drift of the machine hits all
  // deltas alike.
  for (std::int64_t rep = 0; rep < base.repetitions; ++rep)
    for (Cell& cell : cells) cell.results.push_back(run_single(cell.cfg, rep));

  std::vector<PeriodRow> rows;
  for (const Cell& cell : cells) {
    PeriodRow row;
    row.delta = cell.cfg.delta;
    row.scenario = cell.scenario;
    row.agg = aggregate(cell.results);
    double dp = 0.0, rb = 0.0;
    for (const RunResult& r : cell.results) {
      dp += static_cast<double>(r.detection_points);
      rb += static_cast<double>(r.rollbacks);
    }
    row.mean_detection_points = dp / static_cast<double>(cell.results.size());
    row.mean_rollbacks = rb / static_cast<double>(cell.results.size());
    rows.push_back(row);
  }
  if (out_dir) {
    ensure_dir(out_dir);
    std::string csv =
        "delta,scenario,runs,wall_mean_ms,wall_stddev_ms,mean_detection_points,mean_rollbacks,l2_median,exact_rate\n";
    json arr = json::array();
    for (const PeriodRow& r : rows) {
      csv += std::to_string(r.delta) + "," + r.scenario + "," + std::to_string(r.agg.runs) + "," +
             fmt_double(r.agg.wall_mean_ms) + "," + fmt_double(r.agg.wall_stddev_ms) + "," +
             fmt_double(r.mean_detection_points) + "," + fmt_double(r.mean_rollbacks) + "," +
             fmt_double(r.agg.l2_median) + "," + fmt_double(r.agg.exact_rate) + "\n";
      json row = aggregates_json(r.agg);
      row["delta"] = r.delta;
      row["scenario"] = r.scenario;
      row["mean_detection_points"] = r.mean_detection_points;
      row["mean_rollbacks"] = r.mean_rollbacks;
      arr.push_back(std::move(row));
    }
    write_text(*out_dir / "periodsweep.csv", csv);
    json j = {{"schema", 1}, {"kind", "periodsweep"}, {"config", config_object(base)}, {"rows", arr}};
    write_text(*out_dir / "summary.json", j.dump(2) + "\n");
  }
  return rows;
}

OverheadResult measure_overhead(const CampaignConfig& cfg, const std::optional<std::filesystem::path>& out_dir) {
  CampaignConfig plain = cfg;
  plain.mode = Mode::NoAbft;
  plain.fault = FaultPolicy::None;
  plain.parallel_reps = false;
  CampaignConfig guarded = plain;
  guarded.mode = cfg.mode == Mode::NoAbft ? Mode::Online : cfg.mode;
  plain.validate();
  guarded.validate();
  (void)run_single(plain, 0);
  (void)run_single(guarded, 0);
  double t_plain = 0.0, t_guarded = 0.0;
  for (std::int64_t rep = 0; rep < cfg.repetitions; ++rep) {
    t_plain += run_single(plain, rep).wall_ms;
    t_guarded += run_single(guarded, rep).wall_ms;
  }
  OverheadResult r;
  r.reps = cfg.repetitions;
  r.unprotected_mean_ms = t_plain / static_cast<double>(cfg.repetitions);
  r.protected_mean_ms = t_guarded / static_cast<double>(cfg.repetitions);
  r.ratio = r.protected_mean_ms / r.unprotected_mean_ms;
  if (out_dir) {
    ensure_dir(out_dir);
    json j = {{"schema", 1},
              {"kind", "overhead"},
              {"config", config_object(guarded)},
              {"unprotected_mean_ms", r.unprotected_mean_ms},
              {"protected_mean_ms", r.protected_mean_ms},
              {"measured_ratio", r.ratio},
              {"reported_ratio", r.reported_ratio}};
    write_text(*out_dir / "summary.json", j.dump(2) + "\n");
  }
  return r;
}

}  // namespace stencilguard
