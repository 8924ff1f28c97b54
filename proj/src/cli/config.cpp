#include <cstdint>
#include <cstdio>

#include "loschmidt/cli.hpp"

namespace loschmidt::cli {

using nlohmann::json;

json default_config() {
  return {
      {"model", "kicked_rotator"},
      {"N", 256},
      {"K1", 57.0},
      {"deltaK", 1e-3},
      {"epsilon", 1.0},
      {"tau", 1.0},
      {"theta_x", 0.0},
      {"theta_p", 0.0},
      {"kind", "both"},
      {"backend", "direct"},
      {"ensemble", {{"count", 100}, {"seed", 1}, {"state", "haar"}}},
      {"time", {{"max_kicks", 2000}, {"stride", 2}, {"t_min", 1e-6}, {"t_max", 1.0}, {"points", 200}}},
      {"analysis",
       {{"fits", true}, {"saturation", true}, {"synthetic", false}, {"synthetic_gamma", 0.1}, {"bin_width", 0.0}}},
      {"scan",
       {{"Ns", {128, 256, 512}},
        {"x_grid", {4.0, 5.656854249492381, 8.0, 11.313708498984761, 16.0, 22.627416997969522}},
        {"deltaKs", json::array()},
        {"heisenberg_multiple", 16.0},
        {"tail_points", 64}}},
      {"lyapunov", {{"K", 57.0}, {"steps", 10000}, {"ensemble", 100}}},
  };
}

namespace {

void merge_at(json& base, const json& overlay, const std::string& prefix) {
  if (!overlay.is_object()) throw ConfigError(prefix.empty() ? "<root>" : prefix, "expected a JSON object");
  for (auto it = overlay.begin(); it != overlay.end(); ++it) {
    const std::string path = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (!base.contains(it.key())) throw ConfigError(path, "unknown configuration field");
    json& target = base[it.key()];
    if (target.is_object()) {
      merge_at(target, it.value(), path);
    } else {
      target = it.value();
    }
  }
}

}  // namespace

void merge_into(json& base, const json& overlay) { merge_at(base, overlay, ""); }

void apply_override(json& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError(assignment, "--set expects key=value");
  }
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  json value = json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;

  json* node = &config;
  std::size_t start = 0;
  for (;;) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (!node->is_object() || !node->contains(part)) throw ConfigError(key, "unknown configuration field");
    node = &(*node)[part];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  if (node->is_object()) throw ConfigError(key, "cannot overwrite a section with a scalar");
  *node = value;
}

std::string config_digest(const json& config) {
  const std::string text = config.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace loschmidt::cli
