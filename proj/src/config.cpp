#include "stencilguard/config.hpp"

#include <algorithm>
#include <charconv>
#include <limits>
#include <sstream>

#define TOML_EXCEPTIONS 1
#include <toml.hpp>

#include "stencilguard/error.hpp"

namespace stencilguard {

namespace {

template <typename I>
I parse_integer(const std::string& key, const std::string& text) {
  I v{};
  const char* end = text.data() + text.size();
  auto [p, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || p != end) throw ConfigError(key + ": expected an integer, got '" + text + "'");
  return v;
}

double parse_real(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used == text.size()) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError(key + ": expected a number, got '" + text + "'");
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw ConfigError(key + ": expected true or false, got '" + text + "'");
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys{
      "tile",   "nx",        "ny",        "nz",     "iterations", "repetitions", "mode",    "epsilon",      "delta",
      "kernel", "seed",      "fault",     "fixed_bit", "bit_range", "target",    "dtype",   "threads",
      "parallel_reps"};
  return keys;
}

TileDims parse_tile(const std::string& text) {
  std::vector<std::size_t> parts;
  std::string cell;
  std::istringstream s(text);
  while (std::getline(s, cell, 'x')) parts.push_back(parse_integer<std::size_t>("tile", cell));
  if (parts.size() == 2) parts.push_back(1);
  if (parts.size() != 3 || parts[0] == 0 || parts[1] == 0 || parts[2] == 0)
    throw ConfigError("tile: expected NXxNYxNZ with positive extents, got '" + text + "'");
  return {parts[0], parts[1], parts[2]};
}

std::vector<std::int64_t> parse_int_list(const std::string& text) {
  std::vector<std::int64_t> out;
  std::string cell;
  std::istringstream s(text);
  while (std::getline(s, cell, ',')) out.push_back(parse_integer<std::int64_t>("list", cell));
  if (out.empty()) throw ConfigError("expected a comma-separated list of integers");
  return out;
}

void apply_setting(CampaignConfig& cfg, const std::string& key, const std::string& value) {
  try {
    if (key == "tile") {
      cfg.dims = parse_tile(value);
    } else if (key == "nx") {
      cfg.dims.nx = parse_integer<std::size_t>(key, value);
    } else if (key == "ny") {
      cfg.dims.ny = parse_integer<std::size_t>(key, value);
    } else if (key == "nz") {
      cfg.dims.nz = parse_integer<std::size_t>(key, value);
    } else if (key == "iterations") {
      cfg.iterations = parse_integer<std::int64_t>(key, value);
    } else if (key == "repetitions") {
      cfg.repetitions = parse_integer<std::int64_t>(key, value);
    } else if (key == "mode") {
      cfg.mode = parse_mode(value);
    } else if (key == "epsilon") {
      cfg.epsilon = parse_real(key, value);
    } else if (key == "delta") {
      cfg.delta = parse_integer<std::int64_t>(key, value);
    } else if (key == "kernel") {
      cfg.kernel = value;
    } else if (key == "seed") {
      cfg.base_seed = parse_integer<std::uint64_t>(key, value);
    } else if (key == "fault") {
      if (value == "none") {
        cfg.fault = FaultPolicy::None;
      } else if (value == "random") {
        cfg.fault = FaultPolicy::RandomSingle;
      } else if (value == "fixed") {
        cfg.fault = FaultPolicy::FixedBit;
      } else if (value.rfind("bit:", 0) == 0) {
        cfg.fault = FaultPolicy::FixedBit;
        cfg.fixed_bit = parse_integer<int>(key, value.substr(4));
      } else {
        throw ConfigError("fault: expected none, random, fixed or bit:<n>, got '" + value + "'");
      }
    } else if (key == "fixed_bit") {
      cfg.fixed_bit = parse_integer<int>(key, value);
    } else if (key == "bit_range") {
      if (value == "all") {
        cfg.bit_lo = cfg.bit_hi = -1;
      } else {
        const auto dash = value.find('-');
        if (dash == std::string::npos) throw ConfigError("bit_range: expected <lo>-<hi> or all");
        cfg.bit_lo = parse_integer<int>(key, value.substr(0, dash));
        cfg.bit_hi = parse_integer<int>(key, value.substr(dash + 1));
      }
    } else if (key == "target") {
      if (value == "domain")
        cfg.target = FaultTarget::Domain;
      else if (value == "checksum")
        cfg.target = FaultTarget::Checksum;
      else
        throw ConfigError("target: expected domain or checksum, got '" + value + "'");
    } else if (key == "dtype") {
      if (value == "f32")
        cfg.dtype = ElementType::Binary32;
      else if (value == "f64")
        cfg.dtype = ElementType::Binary64;
      else
        throw ConfigError("dtype: expected f32 or f64, got '" + value + "'");
    } else if (key == "threads") {
      cfg.threads = parse_integer<int>(key, value);
    } else if (key == "parallel_reps") {
      cfg.parallel_reps = parse_bool(key, value);
    } else {
      throw ConfigError("unknown config key '" + key + "'");
    }
  } catch (const InvalidParams& e) {
    throw ConfigError(key + ": " + e.what());
  }
}

namespace {

std::string node_text(const std::string& key, const toml::node& node) {
  if (auto s = node.value_exact<std::string>()) return *s;
  if (auto i = node.value_exact<std::int64_t>()) return std::to_string(*i);
  if (auto b = node.value_exact<bool>()) return *b ? "true" : "false";
  if (auto d = node.value_exact<double>()) {
    std::ostringstream s;
    s.precision(17);
    s << *d;
    return s.str();
  }
  throw ConfigError(key + ": unsupported value type");
}

void apply_table(CampaignConfig& cfg, const toml::table& table) {
  for (const auto& [k, node] : table) {
    const std::string key(k.str());
    const auto& keys = config_keys();
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) throw ConfigError("unknown config key '" + key + "'");
    apply_setting(cfg, key, node_text(key, node));
  }
}

}  // namespace

void apply_config_text(CampaignConfig& cfg, const std::string& toml_text) {
  try {
    apply_table(cfg, toml::parse(toml_text));
  } catch (const toml::parse_error& e) {
    throw ConfigError(std::string("config parse error: ") + std::string(e.description()));
  }
}

void apply_config_file(CampaignConfig& cfg, const std::filesystem::path& path) {
  try {
    apply_table(cfg, toml::parse_file(path.string()));
  } catch (const toml::parse_error& e) {
    throw ConfigError(path.string() + ": " + std::string(e.description()));
  }
}

}  // namespace stencilguard
