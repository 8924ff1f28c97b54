#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "loschmidt/cli.hpp"
#include "loschmidt/errors.hpp"
#include "loschmidt/parallel.hpp"

namespace loschmidt::cli {

using nlohmann::json;

namespace {

std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

int report(int code, const char* type, const std::string& field, const std::string& message) {
  std::cerr << "error code=" << code << " type=" << type << " field=" << (field.empty() ? "-" : field)
            << " message=" << quoted(message) << "\n";
  return code;
}

json load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("--config", "cannot open " + path);
  json j = json::parse(f, nullptr, false);
  if (j.is_discarded()) throw ConfigError("--config", "invalid JSON in " + path);
  return j;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"Loschmidt and pi/2-pi-pi/2 echo experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir;
  unsigned workers = default_workers();
  std::uint64_t seed = 0;
  bool seed_given = false;

  const std::vector<std::pair<std::string, std::string>> commands{
      {"decay", "averaged M_L and M_Da decay curves (decay.csv)"},
      {"ldos", "local density of states and Lorentzian fit (ldos.csv, ldos_fit.txt)"},
      {"saturation", "M_Da saturation scan and scaling exponent (scaling.csv, scaling_fit.txt)"},
      {"shorttime", "short-time quadratic and quartic laws (shorttime.csv)"},
      {"lyapunov", "Benettin estimate of the standard-map Lyapunov exponent (lyapunov.txt)"},
      {"selftest", "determinism check across worker counts"},
  };
  std::vector<CLI::App*> subs;
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "JSON configuration file");
    sub->add_option("--set", overrides, "override a field, key.path=value (repeatable)");
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option_function<std::uint64_t>(
        "--seed", [&](const std::uint64_t& s) { seed = s, seed_given = true; }, "master seed");
    subs.push_back(sub);
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report(2, "usage", "-", e.what());
  }

  std::string command;
  for (auto* s : subs)
    if (s->parsed()) command = s->get_name();

  try {
    json cfg = default_config();
    if (!config_path.empty()) merge_into(cfg, load_config(config_path));
    for (const auto& o : overrides) apply_override(cfg, o);
    if (seed_given) cfg["ensemble"]["seed"] = seed;
    RunContext ctx{cfg, out_dir.empty() ? std::filesystem::path("out") / command : std::filesystem::path(out_dir),
                   workers};
    if (command == "decay") cmd_decay(ctx);
    if (command == "ldos") cmd_ldos(ctx);
    if (command == "saturation") cmd_saturation(ctx);
    if (command == "shorttime") cmd_shorttime(ctx);
    if (command == "lyapunov") cmd_lyapunov(ctx);
    if (command == "selftest") return cmd_selftest(ctx) == 0 ? 0 : 3;
    return 0;
  } catch (const ConfigError& e) {
    return report(2, "config", e.field(), e.what());
  } catch (const SizeError& e) {
    return report(2, "size", "", e.what());
  } catch (const DomainError& e) {
    return report(2, "domain", "", e.what());
  } catch (const FitError& e) {
    return report(3, "fit", to_string(e.kind()), e.what());
  } catch (const NumericalError& e) {
    return report(3, "numerical", "", e.what());
  } catch (const std::exception& e) {
    return report(3, "internal", "", e.what());
  }
}

}  // namespace loschmidt::cli
