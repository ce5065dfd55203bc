#pragma once

#include "pharmaharvest/politeness.hpp"

#include <filesystem>
#include <string>
#include <string_view>

namespace pharmaharvest {

/// Settings read from `pharmaharvest.toml`. Recognised keys:
///
///   data_root = "path"
///   [politeness]
///   min_interhost_delay_ms, per_step_settle_ms, max_retries,
///   request_timeout_ms, user_agent
///   [politeness.settle_ms]
///   <source> = milliseconds
///   [service]
///   port, bind
///
/// The parser understands the TOML subset these need: tables, bare keys,
/// basic strings, integers, booleans and comments.
struct Config {
    std::filesystem::path data_root = "pharmaharvest-data";
    fetch::PolitenessPolicy politeness;
    int port = 8799;
    std::string bind = "127.0.0.1";
};

inline constexpr std::string_view kConfigFileName = "pharmaharvest.toml";

/// Throws ParseError with the offending line number.
Config parse_config(std::string_view toml);
/// Defaults when the file does not exist.
Config load_config(const std::filesystem::path& file);
/// Writes the data_root back into `file`, keeping the other settings.
void save_config(const std::filesystem::path& file, const Config& config);
std::string render_config(const Config& config);

}  // namespace pharmaharvest
