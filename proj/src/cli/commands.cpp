#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>

#include "loschmidt/classical.hpp"
#include "loschmidt/cli.hpp"
#include "loschmidt/echo.hpp"
#include "loschmidt/errors.hpp"
#include "loschmidt/experiments.hpp"
#include "loschmidt/models.hpp"
#include "loschmidt/numkernel.hpp"
#include "loschmidt/random.hpp"
#include "loschmidt/spectral.hpp"

namespace loschmidt::cli {

using nlohmann::json;
namespace fs = std::filesystem;
using echo::EchoKind;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ---- typed config access ---------------------------------------------------

const json& at(const json& cfg, const std::string& path) {
  const json* node = &cfg;
  std::size_t start = 0;
  for (;;) {
    const auto dot = path.find('.', start);
    const std::string part = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (!node->is_object() || !node->contains(part)) throw ConfigError(path, "missing configuration field");
    node = &(*node)[part];
    if (dot == std::string::npos) return *node;
    start = dot + 1;
  }
}

double get_real(const json& cfg, const std::string& path) {
  const json& v = at(cfg, path);
  if (!v.is_number()) throw ConfigError(path, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ConfigError(path, "must be finite");
  return d;
}

double get_positive(const json& cfg, const std::string& path) {
  const double d = get_real(cfg, path);
  if (!(d > 0.0)) throw ConfigError(path, "must be positive");
  return d;
}

double get_nonnegative(const json& cfg, const std::string& path) {
  const double d = get_real(cfg, path);
  if (!(d >= 0.0)) throw ConfigError(path, "must be nonnegative");
  return d;
}

long get_integer(const json& cfg, const std::string& path, long min_value) {
  const json& v = at(cfg, path);
  if (!v.is_number_integer()) throw ConfigError(path, "expected an integer");
  const long i = v.get<long>();
  if (i < min_value) throw ConfigError(path, "must be at least " + std::to_string(min_value));
  return i;
}

std::uint64_t get_seed(const json& cfg, const std::string& path) {
  const json& v = at(cfg, path);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
    throw ConfigError(path, "expected a nonnegative integer seed");
  }
  return v.get<std::uint64_t>();
}

bool get_bool(const json& cfg, const std::string& path) {
  const json& v = at(cfg, path);
  if (!v.is_boolean()) throw ConfigError(path, "expected true or false");
  return v.get<bool>();
}

std::string get_string(const json& cfg, const std::string& path) {
  const json& v = at(cfg, path);
  if (!v.is_string()) throw ConfigError(path, "expected a string");
  return v.get<std::string>();
}

std::size_t get_power_of_two(const json& cfg, const std::string& path) {
  const long n = get_integer(cfg, path, 2);
  if (!numkernel::is_power_of_two(static_cast<std::size_t>(n))) throw ConfigError(path, "must be a power of two");
  return static_cast<std::size_t>(n);
}

std::string get_model(const json& cfg) {
  const std::string m = get_string(cfg, "model");
  if (m != "kicked_rotator" && m != "ct_pair") throw ConfigError("model", "expected kicked_rotator or ct_pair");
  return m;
}

struct Kinds {
  bool loschmidt = false;
  bool davidson = false;
};

Kinds get_kinds(const json& cfg) {
  const std::string k = get_string(cfg, "kind");
  if (k == "M_L") return {true, false};
  if (k == "M_Da") return {false, true};
  if (k == "both") return {true, true};
  throw ConfigError("kind", "expected M_L, M_Da or both");
}

experiments::EnsembleSpec get_ensemble(const json& cfg, std::size_t n) {
  experiments::EnsembleSpec spec;
  spec.count = static_cast<std::size_t>(get_integer(cfg, "ensemble.count", 1));
  spec.seed = get_seed(cfg, "ensemble.seed");
  try {
    spec.state_kind = experiments::parse_state_kind(get_string(cfg, "ensemble.state"));
  } catch (const DomainError& e) {
    throw ConfigError("ensemble.state", e.what());
  }
  spec.n = n;
  return spec;
}

models::KickedRotatorPair get_kr_pair(const json& cfg, std::size_t n) {
  const double k1 = get_real(cfg, "K1");
  const double dk = get_nonnegative(cfg, "deltaK");
  const double tau = get_positive(cfg, "tau");
  const double tx = get_nonnegative(cfg, "theta_x");
  const double tp = get_nonnegative(cfg, "theta_p");
  if (tx >= 1.0) throw ConfigError("theta_x", "must lie in [0, 1)");
  if (tp >= 1.0) throw ConfigError("theta_p", "must lie in [0, 1)");
  return models::kr_pair(n, k1, dk, tau, tx, tp);
}

// ---- output ------------------------------------------------------------------

class CsvWriter {
 public:
  CsvWriter(const fs::path& path, const std::string& schema, const std::string& digest) : out_(path) {
    if (!out_) throw ConfigError("--out", "cannot write " + path.string());
    out_ << "# schema loschmidt/" << schema << " v" << kSchemaVersion << "\n";
    out_ << "# config fnv1a64 " << digest << "\n";
  }
  void comment(const std::string& text) { out_ << "# " << text << "\n"; }
  void header(const std::vector<std::string>& cols) { row_strings(cols); }
  void row(const std::vector<double>& values) {
    for (std::size_t i = 0; i < values.size(); ++i) out_ << (i ? "," : "") << num(values[i]);
    out_ << "\n";
  }
  void row_strings(const std::vector<std::string>& values) {
    for (std::size_t i = 0; i < values.size(); ++i) out_ << (i ? "," : "") << values[i];
    out_ << "\n";
  }

 private:
  std::ofstream out_;
};

class KeyValueWriter {
 public:
  KeyValueWriter(const fs::path& path, const std::string& schema, const std::string& digest) : out_(path) {
    if (!out_) throw ConfigError("--out", "cannot write " + path.string());
    out_ << "# schema loschmidt/" << schema << " v" << kSchemaVersion << "\n";
    out_ << "# config fnv1a64 " << digest << "\n";
  }
  void put(const std::string& key, double value) { out_ << key << " " << num(value) << "\n"; }
  void put(const std::string& key, const std::string& value) { out_ << key << " " << value << "\n"; }

 private:
  std::ofstream out_;
};

struct Manifest {
  json doc;
  std::chrono::steady_clock::time_point started = std::chrono::steady_clock::now();

  Manifest(const RunContext& ctx, const std::string& command) {
    doc["tool"] = "loschmidt";
    doc["version"] = kToolVersion;
    doc["schema_version"] = kSchemaVersion;
    doc["command"] = command;
    doc["config"] = ctx.config;
    doc["config_digest"] = config_digest(ctx.config);
    doc["master_seed"] = ctx.config["ensemble"]["seed"];
    doc["workers"] = ctx.workers;
    doc["derived"] = json::object();
    doc["files"] = json::array();
    doc["saturation_window"] = "last 25% of the simulated range, never before 10/rate (or 4 t_half when the rate is unknown)";
  }
  void seeds(const std::vector<std::uint64_t>& s) { doc["derived_seeds"] = s; }
  void file(const std::string& name) { doc["files"].push_back(name); }
  void write(const fs::path& out) {
    doc["wall_clock_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    std::ofstream f(out / "manifest.json");
    f << doc.dump(2) << "\n";
  }
};

std::vector<std::uint64_t> member_seeds(const experiments::EnsembleSpec& spec) {
  std::vector<std::uint64_t> s(spec.count);
  for (std::size_t i = 0; i < spec.count; ++i) s[i] = derive_seed(spec.seed, i);
  return s;
}

void prepare_out(const fs::path& out) {
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw ConfigError("--out", "cannot create output directory " + out.string() + ": " + ec.message());
}

std::string digest_of(const RunContext& ctx) { return config_digest(ctx.config); }

// ---- decay ---------------------------------------------------------------------

std::vector<double> kick_grid(const json& cfg, bool davidson) {
  long max_kicks = get_integer(cfg, "time.max_kicks", 2);
  long stride = get_integer(cfg, "time.stride", 1);
  if (davidson && stride % 2 != 0) {
    std::cerr << "warning: time.stride=" << stride << " coerced to " << stride + 1
              << " (M_Da needs even kick counts)\n";
    ++stride;
  }
  if (davidson && max_kicks % 2 != 0) {
    std::cerr << "warning: time.max_kicks=" << max_kicks << " coerced to " << max_kicks - 1
              << " (M_Da needs even kick counts)\n";
    --max_kicks;
  }
  std::vector<double> t;
  for (long n = 0; n <= max_kicks; n += stride) t.push_back(static_cast<double>(n));
  return t;
}

std::vector<double> linear_grid(const json& cfg) {
  const double t_max = get_positive(cfg, "time.t_max");
  const long points = get_integer(cfg, "time.points", 2);
  std::vector<double> t(static_cast<std::size_t>(points));
  for (long i = 0; i < points; ++i) t[i] = t_max * static_cast<double>(i) / static_cast<double>(points - 1);
  return t;
}

}  // namespace

void cmd_decay(const RunContext& ctx) {
  const json& cfg = ctx.config;
  const std::string model = get_model(cfg);
  const Kinds kinds = get_kinds(cfg);
  const std::string backend = get_string(cfg, "backend");
  if (backend != "direct" && backend != "spectral") throw ConfigError("backend", "expected direct or spectral");
  const bool fits = get_bool(cfg, "analysis.fits");
  prepare_out(ctx.out);
  Manifest manifest(ctx, "decay");

  std::vector<double> times;
  std::optional<models::KickedRotatorPair> pair;
  std::optional<echo::SpectralFloquet> spectral;
  std::optional<echo::ContinuousEcho> ct;
  echo::EchoInstance instance;
  echo::Backend be = echo::Backend::floquet;
  std::size_t n = 0;
  double floor = 0.0;

  if (model == "kicked_rotator") {
    n = get_power_of_two(cfg, "N");
    pair.emplace(get_kr_pair(cfg, n));
    times = kick_grid(cfg, kinds.davidson);
    if (backend == "spectral") {
      if (n > numkernel::kMaxEigenDimension) throw ConfigError("N", "spectral backend needs N <= 2048");
      spectral.emplace(*pair);
      instance = &*spectral;
    } else {
      instance = &*pair;
    }
    const auto scales = models::floquet_scales(n);
    const double gamma_gr = spectral::golden_rule_gamma(
        std::sqrt(models::floquet_sigma_l_squared(n, pair->delta_k())), scales.delta);
    manifest.doc["derived"]["Delta"] = scales.delta;
    manifest.doc["derived"]["B"] = scales.bandwidth;
    manifest.doc["derived"]["lambda_formula"] = std::log(pair->u1.k() * pair->u1.tau() / 2.0);
    manifest.doc["derived"]["gamma_golden_rule"] = gamma_gr;
  } else {
    n = static_cast<std::size_t>(get_integer(cfg, "N", 2));
    const auto hp = models::ct_pair(n, get_nonnegative(cfg, "epsilon"), get_seed(cfg, "ensemble.seed"));
    ct.emplace(hp);
    instance = &*ct;
    be = echo::Backend::ct;
    times = linear_grid(cfg);
  }
  floor = 1.0 / static_cast<double>(n);
  const auto spec = get_ensemble(cfg, n);
  manifest.seeds(member_seeds(spec));

  std::optional<experiments::EnsembleData> ml, mda;
  if (kinds.loschmidt) ml = experiments::ensemble_run(spec, be, instance, EchoKind::loschmidt, times, ctx.workers);
  if (kinds.davidson) mda = experiments::ensemble_run(spec, be, instance, EchoKind::davidson, times, ctx.workers);

  CsvWriter csv(ctx.out / "decay.csv", "decay", digest_of(ctx));
  csv.header({"time", "M_L_mean", "M_L_stderr", "M_Da_mean", "M_Da_stderr"});
  for (std::size_t i = 0; i < times.size(); ++i) {
    csv.row({times[i], ml ? ml->curve.values[i] : kNaN, ml ? ml->curve.stderr_[i] : kNaN,
             mda ? mda->curve.values[i] : kNaN, mda ? mda->curve.stderr_[i] : kNaN});
  }
  manifest.file("decay.csv");

  if (fits) {
    auto record = [&](const char* name, const std::optional<experiments::EnsembleData>& d) {
      if (!d) return;
      json entry;
      try {
        const auto r = experiments::fit_exponential_rate(d->curve, floor);
        entry["rate"] = r.rate;
        entry["rate_stderr"] = r.stderr_;
        entry["window"] = {r.t_start, r.t_end};
        try {
          const auto s = experiments::estimate_saturation(*d, r.rate);
          entry["saturation"] = s.mean;
          entry["saturation_stderr"] = s.stderr_;
          entry["saturation_window"] = {s.t_start, s.t_end};
        } catch (const FitError& e) {
          entry["saturation_status"] = to_string(e.kind());
        }
      } catch (const FitError& e) {
        entry["rate_status"] = to_string(e.kind());
      }
      manifest.doc["derived"][name] = entry;
    };
    record("M_L", ml);
    record("M_Da", mda);
  }
  manifest.write(ctx.out);
}

// ---- ldos ----------------------------------------------------------------------

void cmd_ldos(const RunContext& ctx) {
  const json& cfg = ctx.config;
  const bool synthetic = get_bool(cfg, "analysis.synthetic");
  const double requested_width = get_nonnegative(cfg, "analysis.bin_width");
  prepare_out(ctx.out);
  Manifest manifest(ctx, "ldos");

  spectral::LdosHistogram hist;
  double gamma_gr = kNaN, mda_sum = kNaN;
  std::size_t n = 0;
  if (synthetic) {
    n = static_cast<std::size_t>(get_integer(cfg, "N", 2));
    const double delta = models::floquet_scales(n).delta;
    const double gamma = get_positive(cfg, "analysis.synthetic_gamma");
    const double width = requested_width > 0.0 ? requested_width : std::max(delta, gamma / 10.0);
    hist = spectral::synthetic_lorentzian(gamma, delta, width);
    gamma_gr = gamma;
  } else {
    if (get_model(cfg) != "kicked_rotator") throw ConfigError("model", "ldos needs the kicked_rotator model");
    n = get_power_of_two(cfg, "N");
    if (n > numkernel::kMaxEigenDimension) throw ConfigError("N", "ldos needs N <= 2048 (eigendecomposition cap)");
    const auto pair = get_kr_pair(cfg, n);
    const auto e1 = numkernel::unitary_eig(pair.u1.dense());
    const auto e2 = numkernel::unitary_eig(pair.u2.dense());
    const auto ov = spectral::overlap_matrix(e1, e2);
    const double width = requested_width > 0.0 ? requested_width : spectral::default_bin_width(ov);
    hist = spectral::ldos_histogram(ov, width);
    const auto scales = models::floquet_scales(n);
    gamma_gr = spectral::golden_rule_gamma(std::sqrt(models::floquet_sigma_l_squared(n, pair.delta_k())),
                                           scales.delta);
    mda_sum = spectral::mda_saturation_oracle(ov);
    manifest.doc["derived"]["stochasticity_defect"] = ov.stochasticity_defect();
  }

  CsvWriter csv(ctx.out / "ldos.csv", "ldos", digest_of(ctx));
  csv.header({"bin_center", "density", "count"});
  for (std::size_t k = 0; k < hist.density.size(); ++k) {
    csv.row({hist.bin_centers[k], hist.density[k], static_cast<double>(hist.counts[k])});
  }
  manifest.file("ldos.csv");

  KeyValueWriter kv(ctx.out / "ldos_fit.txt", "ldos_fit", digest_of(ctx));
  kv.put("N", static_cast<double>(n));
  kv.put("delta", hist.delta);
  kv.put("bin_width", hist.bin_width);
  kv.put("normalization", hist.normalization());
  kv.put("gamma_golden_rule", gamma_gr);
  kv.put("mda_overlap_sum", mda_sum);
  kv.put("histogram_overlap_integral", spectral::histogram_overlap_integral(hist));
  try {
    const auto fit = spectral::lorentzian_fit(hist);
    kv.put("status", "fitted");
    kv.put("gamma", fit.gamma);
    kv.put("amplitude", fit.amplitude);
    kv.put("rms_residual", fit.rms_residual);
    kv.put("relative_rms", fit.relative_rms);
    kv.put("gamma_init", fit.gamma_init);
    kv.put("fit_window", fit.window);
    kv.put("bins_used", static_cast<double>(fit.bins_used));
    kv.put("gamma_fit_over_golden_rule", fit.gamma / gamma_gr);
    kv.put("lorentzian_overlap_integral", spectral::lorentzian_overlap_integral(fit, hist.delta));
    kv.put("saturation_predict",
           spectral::saturation_predict(fit.gamma, hist.delta, n, models::floquet_scales(n).bandwidth));
    manifest.doc["derived"]["gamma_fit"] = fit.gamma;
  } catch (const FitError& e) {
    kv.put("status", to_string(e.kind()));
    kv.put("reason", std::string(e.what()));
  }
  manifest.doc["derived"]["gamma_golden_rule"] = gamma_gr;
  manifest.file("ldos_fit.txt");
  manifest.write(ctx.out);
}

// ---- saturation ----------------------------------------------------------------

void cmd_saturation(const RunContext& ctx) {
  const json& cfg = ctx.config;
  const json& ns_json = at(cfg, "scan.Ns");
  if (!ns_json.is_array() || ns_json.size() < 2) throw ConfigError("scan.Ns", "needs at least two values of N");
  std::vector<std::size_t> ns;
  for (std::size_t i = 0; i < ns_json.size(); ++i) {
    const std::string path = "scan.Ns." + std::to_string(i);
    if (!ns_json[i].is_number_integer() || ns_json[i].get<long>() < 2 ||
        !numkernel::is_power_of_two(ns_json[i].get<std::size_t>())) {
      throw ConfigError("scan.Ns", "entries must be powers of two");
    }
    ns.push_back(ns_json[i].get<std::size_t>());
  }
  auto real_list = [&](const std::string& path) {
    const json& j = at(cfg, path);
    if (!j.is_array()) throw ConfigError(path, "expected an array of numbers");
    std::vector<double> v;
    for (const auto& e : j) {
      if (!e.is_number() || !(e.get<double>() > 0.0)) throw ConfigError(path, "entries must be positive numbers");
      v.push_back(e.get<double>());
    }
    return v;
  };
  const std::vector<double> dks = real_list("scan.deltaKs");
  const std::vector<double> xs = real_list("scan.x_grid");
  if (dks.empty() && xs.empty()) throw ConfigError("scan.x_grid", "either scan.deltaKs or scan.x_grid must be non-empty");
  const bool synthetic = get_bool(cfg, "analysis.synthetic");
  prepare_out(ctx.out);
  Manifest manifest(ctx, "saturation");

  experiments::ScalingScan scan;
  if (synthetic) {
    for (std::size_t n : ns) {
      const double nd = static_cast<double>(n);
      std::vector<double> grid = dks;
      if (grid.empty())
        for (double x : xs) grid.push_back(x / (nd * std::sqrt(nd)));
      for (double dk : grid) {
        auto p = experiments::make_scaling_point(n, dk, 0.0, 0.0);
        p.m_inf = std::pow(p.x, -4.0);
        p.flag = experiments::RegimeFlag::valid;
        scan.points.push_back(p);
      }
    }
    try {
      scan.fit = experiments::fit_power_law(scan.points);
      scan.fit_status = "fitted";
    } catch (const FitError& e) {
      scan.fit_status = std::string("not fitted: ") + e.what();
    }
  } else {
    experiments::ScanOptions opt;
    opt.k1 = get_real(cfg, "K1");
    const auto spec = get_ensemble(cfg, 0);
    opt.count = spec.count;
    opt.seed = spec.seed;
    opt.state_kind = spec.state_kind;
    opt.heisenberg_multiple = get_positive(cfg, "scan.heisenberg_multiple");
    opt.tail_points = static_cast<std::size_t>(get_integer(cfg, "scan.tail_points", 2));
    opt.workers = ctx.workers;
    for (std::size_t n : ns)
      if (n > numkernel::kMaxEigenDimension) throw ConfigError("scan.Ns", "entries must be <= 2048");
    scan = dks.empty() ? experiments::scaling_scan_on_x(ns, xs, opt) : experiments::scaling_scan(ns, dks, opt);
    manifest.seeds(member_seeds(spec));
  }

  CsvWriter csv(ctx.out / "scaling.csv", "scaling", digest_of(ctx));
  csv.header({"N", "deltaK", "x", "m_inf", "stderr", "regime_flag"});
  for (const auto& p : scan.points) {
    csv.row_strings({std::to_string(p.n), num(p.delta_k), num(p.x), num(p.m_inf), num(p.stderr_),
                     experiments::to_string(p.flag)});
  }
  manifest.file("scaling.csv");

  CsvWriter raw(ctx.out / "scaling_raw.csv", "scaling_raw", digest_of(ctx));
  raw.header({"N", "deltaK", "m_inf", "stderr"});
  for (const auto& p : scan.points) raw.row({static_cast<double>(p.n), p.delta_k, p.m_inf, p.stderr_});
  manifest.file("scaling_raw.csv");

  KeyValueWriter kv(ctx.out / "scaling_fit.txt", "scaling_fit", digest_of(ctx));
  if (scan.fit) {
    kv.put("status", "fitted");
    kv.put("b", scan.fit->exponent);
    kv.put("b_stderr", scan.fit->stderr_);
    kv.put("prefactor", scan.fit->prefactor);
    kv.put("n_points", static_cast<double>(scan.fit->n_points));
    manifest.doc["derived"]["b"] = scan.fit->exponent;
  } else {
    kv.put("status", "not_fitted");
    kv.put("reason", scan.fit_status);
  }
  manifest.file("scaling_fit.txt");
  manifest.write(ctx.out);
}

// ---- shorttime -----------------------------------------------------------------

void cmd_shorttime(const RunContext& ctx) {
  const json& cfg = ctx.config;
  if (get_model(cfg) != "ct_pair") throw ConfigError("model", "shorttime needs the ct_pair model");
  const std::size_t n = static_cast<std::size_t>(get_integer(cfg, "N", 2));
  const double eps = get_nonnegative(cfg, "epsilon");
  const std::uint64_t seed = get_seed(cfg, "ensemble.seed");
  const double t_min = get_positive(cfg, "time.t_min");
  const double t_max = get_positive(cfg, "time.t_max");
  if (t_max <= t_min) throw ConfigError("time.t_max", "must exceed time.t_min");
  const long points = get_integer(cfg, "time.points", 4);
  const auto spec = get_ensemble(cfg, n);
  prepare_out(ctx.out);
  Manifest manifest(ctx, "shorttime");

  const auto pair = models::ct_pair(n, eps, seed);
  const ComplexVector psi = experiments::random_state(n, derive_seed(seed, 0), spec.state_kind);
  manifest.seeds({derive_seed(seed, 0)});
  const auto rates = echo::short_time_rates(pair, psi);
  const echo::ContinuousEcho ct(pair);
  const auto times = experiments::geometric_grid(t_min, t_max, static_cast<std::size_t>(points));
  const auto seq_l = echo::canonical_sequence(EchoKind::loschmidt);
  const auto seq_da = echo::canonical_sequence(EchoKind::davidson);
  std::vector<double> dl, dda;
  for (double t : times) {
    dl.push_back(1.0 - std::norm(ct.amplitude(seq_l, psi, t)));
    dda.push_back(1.0 - std::norm(ct.amplitude(seq_da, psi, t)));
  }

  CsvWriter csv(ctx.out / "shorttime.csv", "shorttime", digest_of(ctx));
  csv.comment("sigma_L " + num(rates.sigma_l));
  csv.comment("sigma_Da " + num(rates.sigma_da));
  json derived{{"sigma_L", rates.sigma_l}, {"sigma_Da", rates.sigma_da}};
  auto report = [&](const char* name, const std::vector<double>& d, int power, double predicted) {
    try {
      const auto f = experiments::fit_short_time(times, d, power);
      csv.comment(std::string("slope_") + name + " " + num(f.slope) + " stderr " + num(f.slope_stderr));
      csv.comment(std::string("prefactor_") + name + " " + num(f.prefactor) + " predicted " + num(predicted));
      derived[std::string("slope_") + name] = f.slope;
      derived[std::string("prefactor_") + name] = f.prefactor;
      std::cout << "slope_" << name << " " << num(f.slope) << "  prefactor " << num(f.prefactor)
                << "  predicted " << num(predicted) << "\n";
    } catch (const FitError& e) {
      csv.comment(std::string("slope_") + name + " not_fitted " + to_string(e.kind()));
    }
  };
  report("L", dl, 2, rates.sigma_l * rates.sigma_l);
  report("Da", dda, 4, std::pow(rates.sigma_da, 4));
  csv.header({"t", "one_minus_M_L", "one_minus_M_Da", "pred_L", "pred_Da"});
  const double sl2 = rates.sigma_l * rates.sigma_l;
  const double sd4 = std::pow(rates.sigma_da, 4);
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double t = times[i];
    csv.row({t, dl[i], dda[i], sl2 * t * t, sd4 * t * t * t * t});
  }
  manifest.doc["derived"] = derived;
  manifest.file("shorttime.csv");
  manifest.write(ctx.out);
}

// ---- lyapunov ------------------------------------------------------------------

void cmd_lyapunov(const RunContext& ctx) {
  const json& cfg = ctx.config;
  const double k = get_real(cfg, "lyapunov.K");
  const long steps = get_integer(cfg, "lyapunov.steps", 1000);
  const long ensemble = get_integer(cfg, "lyapunov.ensemble", 10);
  const double tau = get_positive(cfg, "tau");
  const std::uint64_t seed = get_seed(cfg, "ensemble.seed");
  prepare_out(ctx.out);
  Manifest manifest(ctx, "lyapunov");
  const auto est = classical::lyapunov_estimate(k, steps, static_cast<int>(ensemble), seed, tau, ctx.workers);
  std::vector<std::uint64_t> seeds;
  for (long i = 0; i < ensemble; ++i) seeds.push_back(derive_seed(seed, static_cast<std::uint64_t>(i)));
  manifest.seeds(seeds);

  const std::string flag = est.out_of_regime ? "formula-out-of-regime" : "in-regime";
  std::cout << "lambda " << num(est.lambda) << " +- " << num(est.stderr_) << "  formula ln(K tau/2) "
            << num(est.formula) << "  " << flag << "\n";
  KeyValueWriter kv(ctx.out / "lyapunov.txt", "lyapunov", digest_of(ctx));
  kv.put("K", k);
  kv.put("tau", tau);
  kv.put("lambda", est.lambda);
  kv.put("stderr", est.stderr_);
  kv.put("formula", est.formula);
  kv.put("relative_deviation", (est.lambda - est.formula) / est.formula);
  kv.put("transient_discarded", static_cast<double>(est.transient_discarded));
  kv.put("renormalize_every", static_cast<double>(classical::kRenormalizeEvery));
  kv.put("regime", flag);
  manifest.doc["derived"] = {{"lambda", est.lambda}, {"lambda_formula", est.formula}, {"regime", flag}};
  manifest.file("lyapunov.txt");
  manifest.write(ctx.out);
}

// ---- selftest ------------------------------------------------------------------

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

struct SelftestCase {
  std::string name;
  void (*fn)(const RunContext&);
  json overlay;
};

std::vector<SelftestCase> selftest_cases() {
  return {
      {"decay_kr", cmd_decay,
       {{"N", 64}, {"deltaK", 0.01}, {"ensemble", {{"count", 8}}}, {"time", {{"max_kicks", 40}, {"stride", 2}}}}},
      {"decay_kr_spectral", cmd_decay,
       {{"N", 32}, {"deltaK", 0.01}, {"backend", "spectral"}, {"ensemble", {{"count", 6}}},
        {"time", {{"max_kicks", 200}, {"stride", 4}}}}},
      {"decay_ct", cmd_decay,
       {{"model", "ct_pair"}, {"N", 16}, {"epsilon", 0.3}, {"ensemble", {{"count", 6}}},
        {"time", {{"t_max", 2.0}, {"points", 21}}}}},
      {"ldos", cmd_ldos, {{"N", 64}, {"deltaK", 0.02}}},
      {"saturation", cmd_saturation,
       {{"ensemble", {{"count", 4}}},
        {"scan", {{"Ns", {16, 32}}, {"x_grid", {4.0, 8.0}}, {"heisenberg_multiple", 4.0}, {"tail_points", 8}}}}},
      {"shorttime", cmd_shorttime, {{"model", "ct_pair"}, {"N", 16}, {"time", {{"points", 60}}}}},
      {"lyapunov", cmd_lyapunov, {{"lyapunov", {{"K", 10.0}, {"steps", 1000}, {"ensemble", 12}}}}},
  };
}

}  // namespace

int cmd_selftest(const RunContext& ctx) {
  prepare_out(ctx.out);
  int mismatches = 0;
  std::ofstream log(ctx.out / "selftest.txt");
  for (const auto& c : selftest_cases()) {
    json cfg = default_config();
    merge_into(cfg, c.overlay);
    cfg["ensemble"]["seed"] = ctx.config["ensemble"]["seed"];
    const fs::path a = ctx.out / "run1" / c.name;
    const fs::path b = ctx.out / "run2" / c.name;
    c.fn(RunContext{cfg, a, 1});
    c.fn(RunContext{cfg, b, std::max(2u, ctx.workers)});
    for (const auto& entry : fs::directory_iterator(a)) {
      const std::string file = entry.path().filename().string();
      if (file == "manifest.json") continue;
      const bool same = slurp(entry.path()) == slurp(b / file);
      if (!same) ++mismatches;
      const std::string line = std::string(same ? "PASS" : "FAIL") + " " + c.name + "/" + file +
                               " byte-identical across worker counts";
      std::cout << line << "\n";
      log << line << "\n";
    }
  }
  std::cout << (mismatches == 0 ? "selftest PASS" : "selftest FAIL") << "\n";
  return mismatches;
}

}  // namespace loschmidt::cli
