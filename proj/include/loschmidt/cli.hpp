#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace loschmidt::cli {

inline constexpr const char* kToolVersion = "1.0.0";
inline constexpr const char* kSchemaVersion = "1";

// Bad or missing configuration; carries the offending field path.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::runtime_error(what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

nlohmann::json default_config();
// Merge `overlay` into `base` recursively (objects merge, everything else replaces).
void merge_into(nlohmann::json& base, const nlohmann::json& overlay);
// key=value with a dotted key path; value parsed as JSON, else taken as a string.
void apply_override(nlohmann::json& config, const std::string& assignment);
// 64-bit FNV-1a of the canonical serialization, as 16 hex digits.
std::string config_digest(const nlohmann::json& config);

struct RunContext {
  nlohmann::json config;
  std::filesystem::path out;
  unsigned workers = 1;
};

// Each writes its files into ctx.out and returns to the caller; errors
// propagate as exceptions.
void cmd_decay(const RunContext& ctx);
void cmd_ldos(const RunContext& ctx);
void cmd_saturation(const RunContext& ctx);
void cmd_shorttime(const RunContext& ctx);
void cmd_lyapunov(const RunContext& ctx);
// Runs the subcommands twice on small configs (1 worker, then 2) and
// compares every CSV byte for byte. Returns the number of mismatches.
int cmd_selftest(const RunContext& ctx);

// Full command-line entry point; returns the process exit code
// (0 success, 2 configuration error, 3 numerical failure).
int run(const std::vector<std::string>& args);

}  // namespace loschmidt::cli
