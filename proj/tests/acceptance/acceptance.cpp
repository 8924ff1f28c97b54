// One PASS/FAIL line per acceptance criterion. Runtimes are part of each
// criterion and are measured around the whole computation.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <CLI11.hpp>

#include "loschmidt/classical.hpp"
#include "loschmidt/cli.hpp"
#include "loschmidt/echo.hpp"
#include "loschmidt/errors.hpp"
#include "loschmidt/experiments.hpp"
#include "loschmidt/models.hpp"
#include "loschmidt/numkernel.hpp"
#include "loschmidt/parallel.hpp"
#include "loschmidt/random.hpp"
#include "loschmidt/spectral.hpp"

using namespace loschmidt;
using echo::EchoKind;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void check(bool ok, const std::string& what) {
    if (!ok) pass = false;
    detail << (detail.tellp() > 0 ? "; " : "") << what << (ok ? "" : " [miss]");
  }
  void note(const std::string& what) { detail << (detail.tellp() > 0 ? "; " : "") << what; }
};

std::string fmt(double v, int digits = 4) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

unsigned g_workers = 1;

// ---- C1 ----------------------------------------------------------------------

void short_time_laws(Outcome& out) {
  const ComplexVector psi = experiments::random_state(64, derive_seed(1, 0), experiments::StateKind::haar);
  // sigma_L is linear in epsilon: rescale so that sigma_L = 1
  const double eps = 1.0 / echo::short_time_rates(models::ct_pair(64, 1.0, 1), psi).sigma_l;
  const auto pair = models::ct_pair(64, eps, 1);
  const auto rates = echo::short_time_rates(pair, psi);
  const echo::ContinuousEcho ct(pair);
  const auto times = experiments::geometric_grid(1e-7, 1.0, 500);
  const auto seq_l = echo::canonical_sequence(EchoKind::loschmidt);
  const auto seq_da = echo::canonical_sequence(EchoKind::davidson);
  std::vector<double> dl, dda;
  for (double t : times) {
    dl.push_back(1.0 - std::norm(ct.amplitude(seq_l, psi, t)));
    dda.push_back(1.0 - std::norm(ct.amplitude(seq_da, psi, t)));
  }
  const auto fl = experiments::fit_short_time(times, dl, 2);
  const auto fd = experiments::fit_short_time(times, dda, 4);
  const double sl2 = rates.sigma_l * rates.sigma_l;
  const double sd4 = std::pow(rates.sigma_da, 4);
  out.note("epsilon=" + fmt(eps) + " sigma_L=" + fmt(rates.sigma_l) + " sigma_Da=" + fmt(rates.sigma_da));
  out.check(std::abs(fl.slope - 2.0) <= 0.05, "slope_L=" + fmt(fl.slope, 5) + " (2.00+-0.05)");
  out.check(std::abs(fd.slope - 4.0) <= 0.10, "slope_Da=" + fmt(fd.slope, 5) + " (4.00+-0.10)");
  out.check(std::abs(fl.prefactor / sl2 - 1.0) <= 0.02,
            "prefactor_L/sigma_L^2=" + fmt(fl.prefactor / sl2, 5) + " (within 2%)");
  out.check(std::abs(fd.prefactor / sd4 - 1.0) <= 0.02,
            "prefactor_Da/sigma_Da^4=" + fmt(fd.prefactor / sd4, 5) + " (within 2%)");
}

// ---- C2 ----------------------------------------------------------------------

void commutator_rate(Outcome& out) {
  const auto px = ComplexMatrix::from_rows({{0.0, 1.0}, {1.0, 0.0}});
  const auto pz = ComplexMatrix::from_rows({{1.0, 0.0}, {0.0, -1.0}});
  const auto pair = models::make_pair(px, pz);
  const ComplexVector psi{1.0, 0.0};
  const auto rates = echo::short_time_rates(pair, psi);
  const double exact = std::pow(4.0, -0.25);
  out.check(std::abs(rates.sigma_da - exact) <= 1e-12, "sigma_Da=" + fmt(rates.sigma_da, 16) + " vs 4^-1/4");
  const double t = 0.05 / exact;
  const echo::ContinuousEcho ct(pair);
  const double defect = 1.0 - std::norm(ct.amplitude(echo::canonical_sequence(EchoKind::davidson), psi, t));
  const double predicted = std::pow(rates.sigma_da * t, 4);
  out.check(std::abs(defect / predicted - 1.0) <= 0.01,
            "1-M_Da=" + fmt(defect, 6) + " vs (sigma_Da t)^4=" + fmt(predicted, 6) + " (within 1%)");
}

// ---- C3 ----------------------------------------------------------------------

void ergodic_saturation(Outcome& out) {
  constexpr std::size_t n = 256;
  const double dk = 0.05;
  out.note("deltaK=" + fmt(dk) + " deltaK^4 N^5=" + fmt(std::pow(dk, 4) * std::pow(double(n), 5)) +
           " deltaK/B=" + fmt(dk / (2 * kPi)));
  const auto pair = models::kr_pair(n, 57.0, dk);
  std::vector<double> times;
  for (int t = 0; t <= 2000; ++t) times.push_back(t);
  experiments::EnsembleSpec spec{100, 3, experiments::StateKind::haar, n};
  const auto data = experiments::ensemble_run(spec, echo::Backend::floquet, &pair, EchoKind::loschmidt, times, g_workers);
  const auto sat = experiments::estimate_saturation(data, std::nan(""));
  const double ratio = sat.mean * n;
  out.check(std::abs(ratio - 1.0) <= 0.25, "M_L tail=" + fmt(sat.mean) + " +- " + fmt(sat.stderr_) +
                                               " window [" + fmt(sat.t_start) + "," + fmt(sat.t_end) +
                                               "], N*M=" + fmt(ratio) + " (1 within 25%)");
}

// ---- shared Floquet spectra ----------------------------------------------------

struct FloquetSpectra {
  numkernel::EigenSystem u1, u2;
};

FloquetSpectra spectra(std::size_t n, double k1, double dk) {
  const auto pair = models::kr_pair(n, k1, dk);
  return {numkernel::unitary_eig(pair.u1.dense()), numkernel::unitary_eig(pair.u2.dense())};
}

// ---- C4 ----------------------------------------------------------------------

void fidelity_freeze(Outcome& out) {
  constexpr std::size_t n = 256;
  const double dk = 0.3 / n;
  const auto scales = models::floquet_scales(n);
  const auto sp = spectra(n, 57.0, dk);
  const auto ov = spectral::overlap_matrix(sp.u1, sp.u2);
  const auto hist = spectral::ldos_histogram(ov, spectral::default_bin_width(ov));
  const auto fit = spectral::lorentzian_fit(hist);
  const double pig = kPi * fit.gamma;
  out.note("deltaK=" + fmt(dk) + " Gamma_fit=" + fmt(fit.gamma) + " piGamma/Delta=" + fmt(pig / scales.delta) +
           " piGamma/B=" + fmt(pig / scales.bandwidth));

  const echo::SpectralFloquet sf(sp.u1, sp.u2);
  const long t_end = 16 * n;
  const auto grid = experiments::saturation_grid(t_end, 24, 64);
  experiments::EnsembleSpec spec{100, 4, experiments::StateKind::haar, n};
  const auto data = experiments::ensemble_run(spec, echo::Backend::floquet, &sf, EchoKind::davidson, grid, g_workers);
  const auto sat = experiments::estimate_saturation(data, fit.gamma);
  const double pred = spectral::saturation_predict(fit.gamma, scales.delta, n, scales.bandwidth);
  const double ratio = sat.mean / pred;
  const double oracle = spectral::mda_saturation_oracle(ov);
  out.check(ratio >= 0.5 && ratio <= 2.0, "M_Da tail=" + fmt(sat.mean) + " +- " + fmt(sat.stderr_) +
                                              " over [" + fmt(sat.t_start) + "," + fmt(sat.t_end) +
                                              "], predicted max[(Delta/piGamma)^2,1/N]=" + fmt(pred) +
                                              ", ratio=" + fmt(ratio) + " (within factor 2)");
  out.check(sat.mean >= 5.0 / n, "N*M_Da=" + fmt(sat.mean * n) + " (>= 5)");
  out.note("diagnostic: overlap sum (1/N)sum|<u|v>|^4=" + fmt(oracle) + ", its square=" + fmt(oracle * oracle) +
           ", Delta/(piGamma)=" + fmt(scales.delta / pig));
}

// ---- C5 ----------------------------------------------------------------------

void overlap_sum_oracle(Outcome& out) {
  constexpr std::size_t n = 16;
  const double dk = 0.02;
  const auto sp = spectra(n, 57.0, dk);
  auto min_gap = [](std::vector<double> p) {
    std::sort(p.begin(), p.end());
    double g = 2 * kPi - (p.back() - p.front());
    for (std::size_t i = 1; i < p.size(); ++i) g = std::min(g, p[i] - p[i - 1]);
    return g;
  };
  const double gap = std::min(min_gap(sp.u1.values), min_gap(sp.u2.values));
  out.check(gap >= 1e-6, "min eigenphase gap=" + fmt(gap) + " (>= 1e-6)");
  const auto ov = spectral::overlap_matrix(sp.u1, sp.u2);
  const double oracle = spectral::mda_saturation_oracle(ov);
  const echo::SpectralFloquet sf(sp.u1, sp.u2);
  std::vector<long> kicks;
  for (long k = 10000; k <= 20000; k += 2) kicks.push_back(k);
  constexpr std::size_t members = 200;
  std::vector<double> per(members);
  parallel_for(members, g_workers, [&](std::size_t i) {
    const auto psi = experiments::random_state(n, derive_seed(5, i), experiments::StateKind::haar);
    const auto amps = echo::amplitude_series(sf, psi, EchoKind::davidson, kicks);
    double s = 0.0;
    for (const auto& a : amps) s += a.real();
    per[i] = s / static_cast<double>(amps.size());
  });
  double mean = 0.0;
  for (double v : per) mean += v;
  mean /= members;
  double var = 0.0;
  for (double v : per) var += (v - mean) * (v - mean);
  const double se = std::sqrt(var / (members - 1) / members);
  const double z = (mean - oracle) / se;
  out.check(std::abs(z) <= 3.0, "time-averaged Re m_Da=" + fmt(mean, 6) + " +- " + fmt(se) + " vs oracle " +
                                    fmt(oracle, 6) + ", z=" + fmt(z, 3) + " (|z| <= 3)");
}

// ---- C6 ----------------------------------------------------------------------

void golden_rule_width(Outcome& out) {
  constexpr std::size_t n = 256;
  const models::KickedRotatorMap base(n, 57.0);
  const auto u1 = numkernel::unitary_eig(base.dense());
  std::vector<double> lx, ly;
  std::string list;
  for (int k = 0; k < 5; ++k) {
    const double a = 0.3 * std::pow(1.1 / 0.3, k / 4.0);
    const double dk = a / n;
    const models::KickedRotatorMap u2map(n, 57.0 + dk);
    const auto u2 = numkernel::unitary_eig(u2map.dense());
    const auto ov = spectral::overlap_matrix(u1, u2);
    const auto fit = spectral::lorentzian_fit(spectral::ldos_histogram(ov, spectral::default_bin_width(ov)));
    lx.push_back(std::log(dk));
    ly.push_back(std::log(fit.gamma));
    const double gr = 0.5 * a * a;
    list += (k ? " " : "") + fmt(dk, 3) + ":" + fmt(fit.gamma, 3) + "(" + fmt(fit.gamma / gr, 3) + "xGR)";
  }
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) mx += lx[i], my += ly[i];
  mx /= lx.size(), my /= ly.size();
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) sxx += (lx[i] - mx) * (lx[i] - mx), sxy += (lx[i] - mx) * (ly[i] - my);
  const double slope = sxy / sxx;
  out.note("deltaK:Gamma_fit " + list);
  out.check(std::abs(slope - 2.0) <= 0.2, "log-log slope=" + fmt(slope, 4) + " (2.0+-0.2)");
}

// ---- C7 ----------------------------------------------------------------------

struct PairedRates {
  double rate_l = std::nan(""), rate_da = std::nan("");
  std::string detail;
};

PairedRates paired_rates(const models::KickedRotatorPair& pair, std::uint64_t seed) {
  const std::size_t n = pair.u1.n();
  std::vector<double> grid;
  for (int t = 0; t <= 80; t += 2) grid.push_back(t);
  for (int t = 300; t <= 400; t += 10) grid.push_back(t);
  std::vector<double> grid_l;
  for (int t = 0; t <= 80; ++t) grid_l.push_back(t);
  for (int t = 300; t <= 400; t += 10) grid_l.push_back(t);
  experiments::EnsembleSpec spec{100, seed, experiments::StateKind::haar, n};
  PairedRates r;
  auto one = [&](EchoKind kind, const std::vector<double>& times, double& rate) {
    const auto data = experiments::ensemble_run(spec, echo::Backend::floquet, &pair, kind, times, g_workers);
    double tail = 0.0;
    try {
      tail = experiments::estimate_saturation(data, std::nan("")).mean;
    } catch (const FitError&) {
    }
    const double floor = std::max(1.0 / static_cast<double>(n), tail);
    try {
      const auto f = experiments::fit_exponential_rate(data.curve, floor);
      rate = f.rate;
      r.detail += std::string(r.detail.empty() ? "" : " ") + echo::to_string(kind) + " rate=" + fmt(f.rate) + "+-" +
                  fmt(f.stderr_, 2) + " (" + std::to_string(f.n_points) + " pts, floor " + fmt(floor, 3) + ")";
    } catch (const FitError& e) {
      r.detail += std::string(r.detail.empty() ? "" : " ") + echo::to_string(kind) + " " + to_string(e.kind());
    }
  };
  one(EchoKind::loschmidt, grid_l, r.rate_l);
  one(EchoKind::davidson, grid, r.rate_da);
  return r;
}

void intermediate_decay(Outcome& out) {
  constexpr std::size_t n = 512;
  const double lambda = std::log(28.5);
  const auto est = classical::lyapunov_estimate(57.0, 10000, 100, 7, 1.0, g_workers);
  out.check(std::abs(est.lambda / lambda - 1.0) <= 0.05,
            "Benettin lambda=" + fmt(est.lambda) + "+-" + fmt(est.stderr_, 2) + " vs ln(28.5)=" + fmt(lambda) +
                " (within 5%)");

  // Gamma < lambda: golden-rule width lambda / 10
  const double dk_small = std::sqrt(2.0 * lambda / 10.0) / n;
  const auto weak = paired_rates(models::kr_pair(n, 57.0, dk_small), 8);
  out.note("Gamma<lambda: deltaK=" + fmt(dk_small) + " Gamma_GR=" + fmt(0.5 * std::pow(dk_small * n, 2)) + " " +
           weak.detail);
  const double rel = std::abs(weak.rate_da - weak.rate_l) / weak.rate_l;
  out.check(std::isfinite(rel) && rel <= 0.15, "|rate_Da-rate_L|/rate_L=" + fmt(rel) + " (<= 15%)");

  // Gamma > lambda: golden-rule width 2 lambda
  const double dk_big = std::sqrt(2.0 * 2.0 * lambda) / n;
  const auto strong = paired_rates(models::kr_pair(n, 57.0, dk_big), 9);
  out.note("Gamma>lambda: deltaK=" + fmt(dk_big) + " Gamma_GR=" + fmt(0.5 * std::pow(dk_big * n, 2)) + " " +
           strong.detail);
  const double el = std::abs(strong.rate_l / lambda - 1.0);
  const double ed = std::abs(strong.rate_da / lambda - 1.0);
  out.check(std::isfinite(el) && el <= 0.30, "rate_L/lambda-1=" + fmt(strong.rate_l / lambda - 1.0) + " (within 30%)");
  out.check(std::isfinite(ed) && ed <= 0.30, "rate_Da/lambda-1=" + fmt(strong.rate_da / lambda - 1.0) + " (within 30%)");
}

// ---- C8 ----------------------------------------------------------------------

void scaling_collapse(Outcome& out) {
  std::vector<double> xs;
  for (int k = 0; k < 6; ++k) xs.push_back(4.0 * std::pow(2.0, k / 2.0));
  experiments::ScanOptions opt;
  opt.count = 100;
  opt.seed = 10;
  opt.workers = g_workers;
  const auto scan = experiments::scaling_scan_on_x({128, 256, 512}, xs, opt);
  std::string pts;
  for (const auto& p : scan.points) {
    pts += (pts.empty() ? "" : " ") + std::to_string(p.n) + "/" + fmt(p.x, 3) + ":" + fmt(p.m_inf, 3) +
           (p.flag == experiments::RegimeFlag::valid ? "" : std::string("(") + experiments::to_string(p.flag) + ")");
  }
  out.note("points N/x:m " + pts);
  if (scan.fit) {
    out.check(scan.fit->exponent >= 3.4 && scan.fit->exponent <= 4.2,
              "b=" + fmt(scan.fit->exponent) + "+-" + fmt(scan.fit->stderr_, 2) + " from " +
                  std::to_string(scan.fit->n_points) + " points (in [3.4, 4.2])");
  } else {
    out.check(false, "exponent " + scan.fit_status);
  }
  // collapse: at each x, valid points of different N within a factor 2
  std::map<long, std::vector<double>> by_x;
  for (const auto& p : scan.points)
    if (p.flag == experiments::RegimeFlag::valid) by_x[std::lround(p.x * 1000)].push_back(p.m_inf);
  double worst = 1.0;
  int compared = 0;
  for (const auto& [x, ms] : by_x) {
    if (ms.size() < 2) continue;
    ++compared;
    worst = std::max(worst, *std::max_element(ms.begin(), ms.end()) / *std::min_element(ms.begin(), ms.end()));
  }
  out.check(compared > 0 && worst <= 2.0,
            "collapse max/min=" + fmt(worst) + " over " + std::to_string(compared) + " shared x values (<= 2)");
  // validity-boundary diagnostic: deltaK^4 N^5 >= 1 against the ergodic floor
  int at_floor = 0, boundary = 0;
  for (const auto& p : scan.points) {
    const double v = std::pow(p.delta_k, 4) * std::pow(double(p.n), 5);
    if (v < 1.0) continue;
    ++boundary;
    if (p.m_inf <= 2.0 / p.n) ++at_floor;
  }
  out.note("diagnostic: " + std::to_string(at_floor) + "/" + std::to_string(boundary) +
           " points with deltaK^4 N^5 >= 1 lie within 2x of 1/N");
}

// ---- C9 ----------------------------------------------------------------------

void determinism(Outcome& out) {
  const auto dir = std::filesystem::temp_directory_path() / ("loschmidt_acceptance_" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  cli::RunContext ctx{cli::default_config(), dir, std::max(2u, g_workers)};
  std::streambuf* saved = std::cout.rdbuf();
  std::ostringstream sink;
  std::cout.rdbuf(sink.rdbuf());
  int mismatches = -1;
  try {
    mismatches = cli::cmd_selftest(ctx);
  } catch (...) {
    std::cout.rdbuf(saved);
    throw;
  }
  std::cout.rdbuf(saved);
  int files = 0;
  std::istringstream lines(sink.str());
  for (std::string line; std::getline(lines, line);)
    if (line.rfind("PASS ", 0) == 0 || line.rfind("FAIL ", 0) == 0) ++files;
  std::filesystem::remove_all(dir);
  out.check(mismatches == 0, std::to_string(files) + " output files compared across worker counts, " +
                                 std::to_string(mismatches) + " differ");
}

// ---- C10 ---------------------------------------------------------------------

void numerics_suite(Outcome& out) {
  double fft_err = 0.0;
  for (std::size_t n = 2; n <= 64; n *= 2) {
    Rng rng(100 + n);
    ComplexVector v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = {rng.normal(), rng.normal()};
    const auto f = numkernel::fft(v, numkernel::FftDirection::forward);
    for (std::size_t k = 0; k < n; ++k) {
      Complex s = 0.0;
      for (std::size_t j = 0; j < n; ++j)
        s += v[j] * std::polar(1.0, -2.0 * kPi * double((j * k) % n) / double(n));
      fft_err = std::max(fft_err, std::abs(s / std::sqrt(double(n)) - f[k]));
    }
  }
  out.check(fft_err <= 1e-12, "FFT vs naive DFT max err=" + fmt(fft_err, 3) + " (N<=64, <= 1e-12)");

  ComplexMatrix h = models::gaussian_hermitian(64, 11);
  const auto eh = numkernel::hermitian_eig(h);
  const auto kr = models::KickedRotatorMap(64, 57.0).dense();
  const auto eu = numkernel::unitary_eig(kr);
  out.check(eh.residual <= 1e-9 && eu.residual <= 1e-9,
            "eig residuals Hermitian=" + fmt(eh.residual, 3) + " unitary=" + fmt(eu.residual, 3) + " (<= 1e-9)");
  const double ud = unitarity_defect(kr);
  out.check(ud <= 1e-10, "Floquet ||U^dagger U - I||_F=" + fmt(ud, 3) + " at N=64 (<= 1e-10)");
  const auto sp = spectra(256, 57.0, 1e-3);
  const double sd = spectral::overlap_matrix(sp.u1, sp.u2).stochasticity_defect();
  out.check(sd <= 1e-8, "overlap double stochasticity defect=" + fmt(sd, 3) + " at N=256 (<= 1e-8)");
}

struct Criterion {
  int id;
  const char* name;
  double budget_seconds;
  std::function<void(Outcome&)> run;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::vector<int> selected;
  app.add_option("--criterion", selected, "criterion number (repeatable); default all");
  app.add_option("--workers", g_workers, "worker threads");
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> criteria{
      {1, "short_time_laws", 10, short_time_laws},
      {2, "commutator_rate", 1, commutator_rate},
      {3, "ergodic_saturation", 120, ergodic_saturation},
      {4, "fidelity_freeze", 300, fidelity_freeze},
      {5, "overlap_sum_oracle", 120, overlap_sum_oracle},
      {6, "golden_rule_width", 900, golden_rule_width},
      {7, "intermediate_decay", 600, intermediate_decay},
      {8, "scaling_collapse", 2700, scaling_collapse},
      {9, "determinism", 60, determinism},
      {10, "numerics_suite", 120, numerics_suite},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    if (!selected.empty() && std::find(selected.begin(), selected.end(), c.id) == selected.end()) continue;
    Outcome out;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.run(out);
    } catch (const std::exception& e) {
      out.check(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.check(secs < c.budget_seconds, "runtime " + fmt(secs, 3) + " s (< " + fmt(c.budget_seconds) + " s)");
    std::cout << "C" << c.id << " " << (out.pass ? "PASS" : "FAIL") << " " << c.name << ": " << out.detail.str()
              << std::endl;
    failures += !out.pass;
  }
  return failures == 0 ? 0 : 1;
}
