#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "stencilguard/campaign.hpp"

namespace stencilguard {

// Keys accepted in config files and by apply_setting. Flat TOML, e.g.
//   tile = "64x64x8"
//   iterations = 128
//   mode = "offline"
//   fault = "bit:31"
const std::vector<std::string>& config_keys();

/// Sets one field from its text form. Throws ConfigError for unknown keys or
/// unparsable values.
void apply_setting(CampaignConfig& cfg, const std::string& key, const std::string& value);

/// Applies every key of a TOML file on top of cfg. Unknown keys are errors.
void apply_config_file(CampaignConfig& cfg, const std::filesystem::path& path);
void apply_config_text(CampaignConfig& cfg, const std::string& toml_text);

TileDims parse_tile(const std::string& text);  // "NXxNYxNZ" or "NXxNY"
std::vector<std::int64_t> parse_int_list(const std::string& text);

}  // namespace stencilguard
