#pragma once

// Experiment drivers: cumulant dynamics (fig1c, fig2a), frequency cumulants (fig2b), the Trotter-step
// sweep away from dual unitarity (stability) and the bath-size sweep (concentration).
//
// Every driver writes <name>_series.csv and <name>_meta.json; ensemble drivers also write
// <name>_realizations.csv with one row per (parameter, realization, t). Realization r of any sweep
// uses seed derive_seed(seed, r), so the local gate draws are shared across tau values.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "scrambler/channel.hpp"
#include "scrambler/circuit.hpp"
#include "scrambler/config.hpp"
#include "scrambler/errors.hpp"
#include "scrambler/eth.hpp"
#include "scrambler/gates.hpp"
#include "scrambler/io.hpp"
#include "scrambler/parallel.hpp"
#include "scrambler/rng.hpp"
#include "scrambler/spectral.hpp"

namespace scrambler {

inline const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = {"fig1c", "fig2a", "fig2b", "stability", "concentration"};
  return names;
}

struct ExperimentConfig {
  std::string name;
  int L = 8;
  std::vector<int> Ls;
  SweepMode sweep_mode = SweepMode::shared;
  int realizations = 1;
  std::uint64_t seed = 1;
  int t_max = 20;
  int bins = 1024;
  double nu = 20;
  bool compute_k4 = true;
  EthMethod method = EthMethod::inclusion_exclusion;
  std::vector<double> taus;
  std::vector<std::string> tau_labels;
  double tau = kPi / 4;
  double window_lo = 5, window_hi = 30;
  int t_report = 10;
  double mask = 1e-6;
  double tail_fraction = 0.01;
  JzRange jz;
  std::string boundary = "paper";
  std::uint64_t boundary_seed = 0;
  int threads = 1;
  std::int64_t max_dim = 1 << 11;
  std::filesystem::path out_dir = ".";

  void validate() const {
    bool known = false;
    for (auto& n : experiment_names()) known = known || n == name;
    if (!known) throw ValidationError("unknown experiment: " + name);
    if (realizations < 1) throw ValidationError("realizations must be at least 1");
    if (t_max < 0) throw ValidationError("t_max must be non-negative");
    if (L < 2) throw ValidationError("L must be at least 2");
    for (int l : Ls)
      if (l < 2) throw ValidationError("every entry of Ls must be at least 2");
    if (bins < 1) throw ValidationError("bins must be positive");
    if (!(nu > 0)) throw ValidationError("nu must be positive");
    if (window_lo > window_hi) throw ValidationError("window_lo exceeds window_hi");
    if (jz.lo > jz.hi) throw ValidationError("jz_lo exceeds jz_hi");
    if (boundary != "paper" && boundary != "random") throw ValidationError("boundary must be paper or random");
    if (threads < 0) throw ValidationError("threads must be non-negative");
    if (name == "stability" && taus.empty()) throw ValidationError("stability needs at least one tau");
    if (name == "concentration" && Ls.empty()) throw ValidationError("concentration needs at least one L");
  }

  nlohmann::json to_json() const {
    nlohmann::json j = {{"name", name},
                        {"L", L},
                        {"Ls", Ls},
                        {"sweep_mode", to_string(sweep_mode)},
                        {"realizations", realizations},
                        {"seed", seed},
                        {"t_max", t_max},
                        {"bins", bins},
                        {"nu", nu},
                        {"compute_k4", compute_k4},
                        {"method", to_string(method)},
                        {"taus", taus},
                        {"tau_labels", tau_labels},
                        {"tau", tau},
                        {"window", {window_lo, window_hi}},
                        {"t_report", t_report},
                        {"mask", mask},
                        {"tail_fraction", tail_fraction},
                        {"jz", {jz.lo, jz.hi}},
                        {"boundary", boundary},
                        {"boundary_seed", boundary_seed},
                        {"threads", threads},
                        {"max_dim", max_dim}};
    return j;
  }
};

/// Per-experiment defaults overridden by the config file.
inline ExperimentConfig make_experiment_config(const std::string& name, const Config& c) {
  ExperimentConfig e;
  e.name = name;
  if (name == "fig1c") {
    e.L = 10;
  } else if (name == "fig2a" || name == "fig2b") {
    e.L = 8;
  } else if (name == "stability") {
    e.L = 8;
    e.realizations = 50;
    e.t_max = 30;
    e.tau_labels = {"pi/4", "pi/5", "pi/6", "pi/8", "pi/10"};
  } else if (name == "concentration") {
    e.realizations = 50;
    e.t_max = 30;
    e.Ls = {4, 5, 6, 7, 8};
  }
  e.L = static_cast<int>(c.get_int("L", e.L));
  if (c.has("Ls")) {
    e.Ls.clear();
    for (auto& s : c.get_list("Ls", {})) e.Ls.push_back(static_cast<int>(detail::parse_double("Ls", s)));
  }
  e.sweep_mode = sweep_mode_from_string(c.get_string("sweep_mode", to_string(e.sweep_mode)));
  e.realizations = static_cast<int>(c.get_int("realizations", e.realizations));
  e.seed = static_cast<std::uint64_t>(c.get_int("seed", static_cast<std::int64_t>(e.seed)));
  e.t_max = static_cast<int>(c.get_int("t_max", e.t_max));
  e.bins = static_cast<int>(c.get_int("bins", e.bins));
  e.nu = c.get_double("nu", e.nu);
  e.compute_k4 = c.get_bool("compute_k4", e.compute_k4);
  e.method = eth_method_from_string(c.get_string("method", to_string(e.method)));
  e.tau_labels = c.get_list("taus", e.tau_labels);
  e.taus.clear();
  for (auto& s : e.tau_labels) e.taus.push_back(parse_angle("taus", s));
  e.tau = parse_angle("tau", c.get_string("tau", "pi/4"));
  e.window_lo = c.get_double("window_lo", e.window_lo);
  e.window_hi = c.get_double("window_hi", e.window_hi);
  e.t_report = static_cast<int>(c.get_int("t_report", e.t_report));
  e.mask = c.get_double("mask", e.mask);
  e.tail_fraction = c.get_double("tail_fraction", e.tail_fraction);
  e.jz.lo = c.get_double("jz_lo", e.jz.lo);
  e.jz.hi = c.get_double("jz_hi", e.jz.hi);
  e.boundary = c.get_string("boundary", e.boundary);
  e.boundary_seed = static_cast<std::uint64_t>(c.get_int("boundary_seed", 0));
  e.threads = static_cast<int>(c.get_int("threads", e.threads));
  e.max_dim = c.get_int("max_dim", e.max_dim);
  if (auto unused = c.unused_keys(); !unused.empty()) {
    std::string msg = "config: unknown keys:";
    for (auto& k : unused) msg += " " + k;
    throw ValidationError(msg);
  }
  e.validate();
  return e;
}

// ---------------------------------------------------------------------------------------------
// Ensemble statistics

struct EnsembleStats {
  std::vector<Series> realizations;
  Series analytic;
  Series mean;
  std::vector<double> rel_dev;  // E|c/C - 1|, NaN where masked
  std::vector<double> rel_var;  // var(c) / |C|^2, NaN where masked
  std::vector<bool> masked;     // |C(t)| below the mask threshold
  int skipped = 0;
};

inline EnsembleStats ensemble_stats(std::vector<Series> reals, const Series& analytic, double mask) {
  EnsembleStats s;
  s.realizations = std::move(reals);
  s.analytic = analytic;
  const std::size_t T = analytic.size();
  const double n = static_cast<double>(s.realizations.size());
  s.mean.assign(T, 0.0);
  s.rel_dev.assign(T, std::numeric_limits<double>::quiet_NaN());
  s.rel_var.assign(T, std::numeric_limits<double>::quiet_NaN());
  s.masked.assign(T, false);
  if (s.realizations.empty()) return s;
  for (auto& r : s.realizations)
    if (r.size() < T) throw ShapeError("ensemble_stats: realization shorter than the reference");
  for (std::size_t t = 0; t < T; ++t) {
    cplx m = 0;
    for (auto& r : s.realizations) m += r[t];
    m /= n;
    s.mean[t] = m;
    s.masked[t] = std::abs(analytic[t]) < mask;
    if (s.masked[t]) continue;
    double dev = 0, var = 0;
    for (auto& r : s.realizations) {
      dev += std::abs(r[t] / analytic[t] - 1.0);
      var += std::norm(r[t] - m);
    }
    s.rel_dev[t] = dev / n;
    s.rel_var[t] = var / n / std::norm(analytic[t]);
  }
  return s;
}

/// Mean of v over unmasked t in [lo, hi].
inline double window_mean(const std::vector<double>& v, const std::vector<bool>& masked, double lo, double hi) {
  double s = 0;
  int n = 0;
  for (std::size_t t = 0; t < v.size(); ++t) {
    if (t < lo || t > hi || masked[t]) continue;
    s += v[t];
    ++n;
  }
  if (n == 0) throw DomainError("window_mean: no unmasked points in the window");
  return s / n;
}

struct BoundarySetup {
  Gate gate;
  ClosedFormConstants constants;
};

inline BoundarySetup boundary_setup(const ExperimentConfig& e) {
  Gate g = e.boundary == "paper" ? paper_boundary_gate().gate : random_unitary_gate(e.boundary_seed, 2);
  return {g, closed_form_constants(g)};
}

/// Direct C2(t) for `realizations` Cartan baths at Trotter step tau. Realizations that exceed a
/// capacity guard are skipped and counted.
inline std::vector<Series> direct_c2_realizations(const BoundarySetup& bs, int L, double tau, const ExperimentConfig& e,
                                                  int* skipped = nullptr) {
  std::vector<Series> out(e.realizations);
  std::vector<char> ok(e.realizations, 0);
  parallel_for(e.realizations, e.threads, [&](std::int64_t r) {
    try {
      auto spec = cartan_bath_spec(L, bs.gate, derive_seed(e.seed, r), e.sweep_mode, tau, e.jz);
      out[r] = k_otoc_direct(spec, bs.constants.a, bs.constants.b, 2, e.t_max, e.max_dim);
      ok[r] = 1;
    } catch (const CapacityError&) {
    }
  });
  std::vector<Series> kept;
  int miss = 0;
  for (int r = 0; r < e.realizations; ++r) {
    if (ok[r])
      kept.push_back(std::move(out[r]));
    else
      ++miss;
  }
  if (skipped) *skipped = miss;
  return kept;
}

inline Series analytic_c2(const ClosedFormConstants& c, int t_max) {
  Series s;
  for (int t = 0; t <= t_max; ++t) s.push_back(c2_closed_form(c, t));
  return s;
}

// ---------------------------------------------------------------------------------------------

struct ResultBundle {
  std::string name;
  Table series;
  Table realizations;
  nlohmann::json meta;
  int skipped = 0;
};

namespace detail {

inline nlohmann::json base_meta(const ExperimentConfig& e, const BoundarySetup& bs) {
  const auto& c = bs.constants;
  return {{"config", e.to_json()},
          {"boundary_gate", gate_to_json(bs.gate)},
          {"lambda", {c.lambda.real(), c.lambda.imag()}},
          {"gamma", c.gamma},
          {"x", {c.x.real(), c.x.imag()}},
          {"y", {c.y.real(), c.y.imag()}},
          {"k2_static", c.k2_ab.real()},
          {"k4_static", c.k4_abab.real()},
          {"observable_normalization", "tr(a^2)/d = 1"}};
}

inline double nan_if(bool m, double v) { return m ? std::numeric_limits<double>::quiet_NaN() : v; }

/// Window mean, or null when the window holds no unmasked point.
inline nlohmann::json window_mean_json(const std::vector<double>& v, const std::vector<bool>& masked, double lo, double hi) {
  for (std::size_t t = 0; t < v.size(); ++t)
    if (t >= lo && t <= hi && !masked[t]) return window_mean(v, masked, lo, hi);
  return nullptr;
}

inline void add_ensemble_rows(Table& series, Table& reals, double param, const EnsembleStats& s) {
  for (std::size_t t = 0; t < s.analytic.size(); ++t)
    series.add_row({param, static_cast<double>(t), s.analytic[t].real(), s.mean[t].real(), s.mean[t].imag(), s.rel_dev[t],
                    s.rel_var[t], s.masked[t] ? 1.0 : 0.0});
  for (std::size_t r = 0; r < s.realizations.size(); ++r)
    for (std::size_t t = 0; t < s.analytic.size(); ++t)
      reals.add_row({param, static_cast<double>(r), static_cast<double>(t), s.realizations[r][t].real(),
                     s.realizations[r][t].imag()});
}

}  // namespace detail

inline ResultBundle run_fig1c(const ExperimentConfig& e) {
  const auto bs = boundary_setup(e);
  const auto an = analytic_cumulants(bs.gate, e.t_max);
  std::vector<Series> c1s(e.realizations), c2s(e.realizations);
  parallel_for(e.realizations, e.threads, [&](std::int64_t r) {
    auto spec = cartan_bath_spec(e.L, bs.gate, derive_seed(e.seed, r), e.sweep_mode, e.tau, e.jz);
    c1s[r] = k_otoc_direct(spec, bs.constants.a, bs.constants.b, 1, e.t_max, e.max_dim);
    c2s[r] = k_otoc_direct(spec, bs.constants.a, bs.constants.b, 2, e.t_max, e.max_dim);
  });
  ResultBundle rb;
  rb.name = "fig1c";
  rb.series.columns = {"t", "c2_analytic", "k2_analytic", "k4_analytic", "two_k2sq_analytic", "c1_direct", "c2_direct",
                       "c2_direct_im", "k4_direct", "two_k2sq_direct", "rel_dev"};
  const auto stats = ensemble_stats(c2s, an.c2, e.mask);
  for (int t = 0; t <= e.t_max; ++t) {
    cplx c1 = 0;
    for (auto& s : c1s) c1 += s[t];
    c1 /= static_cast<double>(e.realizations);
    const cplx c2 = stats.mean[t];
    rb.series.add_row({static_cast<double>(t), an.c2[t].real(), an.k2[t].real(), an.k4[t].real(),
                       2 * std::norm(an.k2[t]), c1.real(), c2.real(), c2.imag(), (c2 - 2.0 * c1 * c1).real(),
                       (2.0 * c1 * c1).real(), stats.rel_dev[t]});
  }
  rb.meta = detail::base_meta(e, bs);
  rb.meta["D"] = ipow(2, e.L + 1);
  return rb;
}

inline ResultBundle run_fig2a(const ExperimentConfig& e) {
  const auto bs = boundary_setup(e);
  const auto an = analytic_cumulants(bs.gate, e.t_max);
  auto spec = cartan_bath_spec(e.L, bs.gate, derive_seed(e.seed, 0), e.sweep_mode, e.tau, e.jz);
  const auto fl = build_floquet(spec, e.max_dim);
  const auto sd = diagonalize(fl, bs.constants.a, bs.constants.b, e.max_dim);
  const auto eth = eth_cumulants_time(sd, e.t_max, e.method, e.threads);
  const auto c2 = k_otoc_direct(spec, bs.constants.a, bs.constants.b, 2, e.t_max, e.max_dim);
  const auto c1 = k_otoc_direct(spec, bs.constants.a, bs.constants.b, 1, e.t_max, e.max_dim);
  ResultBundle rb;
  rb.name = "fig2a";
  rb.series.columns = {"t", "k2_eth", "k2_eth_im", "k4_eth", "k4_eth_im", "c2_eth_moment", "k2_analytic", "k4_analytic",
                       "c2_analytic", "c1_direct", "c2_direct"};
  for (int t = 0; t <= e.t_max; ++t)
    rb.series.add_row({static_cast<double>(t), eth.k2[t].real(), eth.k2[t].imag(), eth.k4[t].real(), eth.k4[t].imag(),
                       eth.moment[t].real(), an.k2[t].real(), an.k4[t].real(), an.c2[t].real(), c1[t].real(),
                       c2[t].real()});
  rb.meta = detail::base_meta(e, bs);
  rb.meta["D"] = sd.D;
  rb.meta["reconstruction_residual"] = sd.reconstruction_residual;
  rb.meta["basis_residual"] = sd.basis_residual;
  rb.meta["bulk"] = spec_to_json(spec, false);
  return rb;
}

inline ResultBundle run_fig2b(const ExperimentConfig& e) {
  const auto bs = boundary_setup(e);
  auto spec = cartan_bath_spec(e.L, bs.gate, derive_seed(e.seed, 0), e.sweep_mode, e.tau, e.jz);
  const auto fl = build_floquet(spec, e.max_dim);
  const auto sd = diagonalize(fl, bs.constants.a, bs.constants.b, e.max_dim);
  const auto grid = uniform_omega_grid(e.bins);
  FrequencyOptions opt;
  opt.nu = e.nu;
  opt.threads = e.threads;
  opt.compute_k4 = e.compute_k4;
  opt.max_dim_k4 = e.max_dim;
  const auto eth = eth_cumulants_freq(sd, grid, opt);
  const auto an = analytic_freq_cumulants(bs.constants, grid);
  const int T = smoothing_window(e.nu);
  const auto at = analytic_cumulants(bs.gate, T);
  const auto sm2 = smoothed_dtft(at.k2, grid, e.nu), sm4 = smoothed_dtft(at.k4, grid, e.nu);
  ResultBundle rb;
  rb.name = "fig2b";
  rb.series.columns = {"omega", "k2_eth", "k2_eth_im", "k4_eth", "k4_eth_im", "k2_analytic", "k4_analytic",
                       "k2_analytic_smoothed", "k4_analytic_smoothed"};
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t n = 0; n < grid.size(); ++n)
    rb.series.add_row({grid[n], eth.k2[n].real(), eth.k2[n].imag(), e.compute_k4 ? eth.k4[n].real() : nan,
                       e.compute_k4 ? eth.k4[n].imag() : nan, an.k2[n].real(), an.k4[n].real(), sm2[n].real(),
                       sm4[n].real()});
  rb.meta = detail::base_meta(e, bs);
  rb.meta["D"] = sd.D;
  rb.meta["omega_grid"] = {{"bins", e.bins}, {"lo_exclusive", -kPi}, {"hi_inclusive", kPi}};
  rb.meta["smoothing"] = {{"nu", e.nu}, {"time_window", T}};
  double peak = 0, worst = 0;
  for (auto& v : sm2) peak = std::max(peak, std::abs(v));
  for (std::size_t n = 0; n < grid.size(); ++n)
    if (std::abs(sm2[n]) >= e.tail_fraction * peak) worst = std::max(worst, std::abs(eth.k2[n] / sm2[n] - 1.0));
  rb.meta["k2_max_rel_dev_vs_smoothed"] = worst;
  rb.meta["fourier_convention"] = "k(w) = sum_t k(t) exp(-i w t); int k(w) dw/(2 pi) = k(0)";
  rb.meta["bulk"] = spec_to_json(spec, false);
  return rb;
}

inline ResultBundle run_stability(const ExperimentConfig& e) {
  const auto bs = boundary_setup(e);
  const Series ref = analytic_c2(bs.constants, e.t_max);
  ResultBundle rb;
  rb.name = "stability";
  rb.series.columns = {"tau", "t", "c2_analytic", "c2_mean", "c2_mean_im", "rel_dev", "rel_var", "masked"};
  rb.realizations.columns = {"tau", "realization", "t", "c2", "c2_im"};
  rb.meta = detail::base_meta(e, bs);
  nlohmann::json summary = nlohmann::json::array();
  int used = 0;
  for (std::size_t i = 0; i < e.taus.size(); ++i) {
    int skipped = 0;
    auto stats = ensemble_stats(direct_c2_realizations(bs, e.L, e.taus[i], e, &skipped), ref, e.mask);
    rb.skipped += skipped;
    used += static_cast<int>(stats.realizations.size());
    detail::add_ensemble_rows(rb.series, rb.realizations, e.taus[i], stats);
    nlohmann::json row = {{"tau", e.taus[i]},
                          {"label", i < e.tau_labels.size() ? e.tau_labels[i] : ""},
                          {"realizations", stats.realizations.size()},
                          {"skipped", skipped}};
    if (!stats.realizations.empty()) {
      row["mean_rel_dev"] = detail::window_mean_json(stats.rel_dev, stats.masked, e.window_lo, e.window_hi);
      row["mean_rel_var"] = detail::window_mean_json(stats.rel_var, stats.masked, e.window_lo, e.window_hi);
    }
    summary.push_back(row);
  }
  rb.meta["window"] = {e.window_lo, e.window_hi};
  rb.meta["summary"] = summary;
  rb.meta["skipped"] = rb.skipped;
  if (used == 0) throw CapacityError("stability: every realization exceeded a capacity guard");
  return rb;
}

inline ResultBundle run_concentration(const ExperimentConfig& e) {
  const auto bs = boundary_setup(e);
  const Series ref = analytic_c2(bs.constants, e.t_max);
  ResultBundle rb;
  rb.name = "concentration";
  rb.series.columns = {"L", "t", "c2_analytic", "c2_mean", "c2_mean_im", "rel_dev", "rel_var", "masked"};
  rb.realizations.columns = {"L", "realization", "t", "c2", "c2_im"};
  rb.meta = detail::base_meta(e, bs);
  nlohmann::json summary = nlohmann::json::array();
  int used = 0;
  for (int L : e.Ls) {
    int skipped = 0;
    auto stats = ensemble_stats(direct_c2_realizations(bs, L, e.tau, e, &skipped), ref, e.mask);
    rb.skipped += skipped;
    used += static_cast<int>(stats.realizations.size());
    detail::add_ensemble_rows(rb.series, rb.realizations, L, stats);
    nlohmann::json row = {{"L", L}, {"realizations", stats.realizations.size()}, {"skipped", skipped}};
    if (!stats.realizations.empty() && e.t_report <= e.t_max) {
      row["rel_dev_at_t_report"] = detail::nan_if(stats.masked[e.t_report], stats.rel_dev[e.t_report]);
      row["rel_var_at_t_report"] = detail::nan_if(stats.masked[e.t_report], stats.rel_var[e.t_report]);
    }
    summary.push_back(row);
  }
  rb.meta["t_report"] = e.t_report;
  rb.meta["summary"] = summary;
  rb.meta["skipped"] = rb.skipped;
  if (used == 0) throw CapacityError("concentration: every realization exceeded a capacity guard");
  return rb;
}

inline void write_bundle(const ResultBundle& rb, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_csv(dir / (rb.name + "_series.csv"), rb.series);
  if (!rb.realizations.columns.empty()) write_csv(dir / (rb.name + "_realizations.csv"), rb.realizations);
  write_json(dir / (rb.name + "_meta.json"), rb.meta);
}

inline ResultBundle run_experiment(const ExperimentConfig& e) {
  e.validate();
  ResultBundle rb;
  if (e.name == "fig1c")
    rb = run_fig1c(e);
  else if (e.name == "fig2a")
    rb = run_fig2a(e);
  else if (e.name == "fig2b")
    rb = run_fig2b(e);
  else if (e.name == "stability")
    rb = run_stability(e);
  else
    rb = run_concentration(e);
  write_bundle(rb, e.out_dir);
  return rb;
}

}  // namespace scrambler
