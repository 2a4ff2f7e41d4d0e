// Command-line front end: scenario loading, experiment orchestration, and
// CSV emission. Subcommands: noise-loss, detect, codesign, validate, sweep.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "obr/csv.hpp"
#include "obr/greet.hpp"
#include "obr/mc.hpp"
#include "obr/qsinr.hpp"
#include "obr/radar_model.hpp"
#include "obr/scene_io.hpp"

namespace fs = std::filesystem;
using namespace obr;

namespace {

struct CommonOpts {
  std::string scene_path;
  std::string out_dir = "out";
  std::uint64_t seed = 1;
  long trials = 10000;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--scene", opts.scene_path, "scene description file")->required();
  cmd->add_option("--out", opts.out_dir, "output directory for CSV files");
  cmd->add_option("--seed", opts.seed, "random seed");
  cmd->add_option("--trials", opts.trials, "Monte Carlo trials per estimate");
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stod(item));
  }
  return out;
}

std::string path_in(const CommonOpts& opts, const std::string& name) {
  fs::create_directories(opts.out_dir);
  return (fs::path(opts.out_dir) / name).string();
}

// Exact-phase (infinite-resolution) unit-energy waveform matched to theta0.
Eigen::VectorXcd infinite_bit_matched(const ArrayGeometry& g, double theta0, int L) {
  const int nt = g.nt();
  Eigen::VectorXcd s(static_cast<Eigen::Index>(nt) * L);
  double scale = 1.0 / std::sqrt(static_cast<double>(nt) * L);
  for (int k = 0; k < nt; ++k) {
    double psi = 2.0 * kPi * g.tx_positions(k) * std::sin(theta0) / g.wavelength;
    for (int l = 0; l < L; ++l) s(static_cast<Eigen::Index>(l) * nt + k) = std::polar(scale, psi);
  }
  return s;
}

struct DesignedPair {
  Filter w;
  Eigen::VectorXcd s;
};

// Filter/waveform source: artifacts when given, the matched one-bit pair
// otherwise.
DesignedPair resolve_pair(const RadarScene& scene, const std::string& waveform_path,
                          const std::string& filter_path) {
  DesignedPair pair;
  if (!waveform_path.empty()) {
    WaveformArtifact art = load_waveform(waveform_path);
    if (art.nt != scene.geometry.nt() || art.length != scene.code_length)
      throw std::runtime_error("waveform artifact does not match the scene dimensions");
    pair.s = art.waveform.vector();
  } else {
    pair.s = matched_phase_onebit_waveform(scene.geometry, scene.target.angle,
                                           scene.code_length)
                 .vector();
  }
  if (!filter_path.empty()) {
    pair.w = load_filter(filter_path);
    if (pair.w.w.size() != scene.snapshot_dim())
      throw std::runtime_error("filter artifact does not match the scene dimensions");
  } else {
    pair.w = Filter{mvdr_filter(pair.s, scene)};
  }
  return pair;
}

double db_stderr(const McEstimate& e) {
  return 10.0 / std::log(10.0) * e.stderr_ / e.estimate;
}

int run_noise_loss(const CommonOpts& opts, const std::string& grid) {
  RadarScene base = load_scene(opts.scene_path);
  if (!base.interferences.empty())
    throw std::runtime_error("noise-loss requires a noise-only scene (no interference)");
  std::vector<double> nrl_grid = parse_grid(grid);
  if (nrl_grid.empty()) nrl_grid = {100, 200, 500, 1000, 2000};

  double c1_db = db_from_linear(base.target.power() / base.noise_power);

  CsvWriter csv(path_in(opts, "noise_loss.csv"),
                {"nrl", "c1_db", "c2_db", "c3_db", "c4_db", "c3_mc_db",
                 "c3_mc_stderr_db", "c4_mc_db", "c4_mc_stderr_db", "trials", "seed"});
  for (double nrl_req : nrl_grid) {
    RadarScene scene = base;
    scene.code_length =
        std::max(1, static_cast<int>(std::lround(nrl_req / scene.geometry.nr())));
    int nrl = scene.snapshot_dim();

    Waveform s1 = matched_phase_onebit_waveform(scene.geometry, scene.target.angle,
                                                scene.code_length);
    double F = transmit_beampattern(scene.geometry, s1, scene.target.angle);
    double c2_db = c1_db + db_from_linear(F);
    double c3_db = c1_db + db_from_linear(2.0 / kPi);
    double c4_db = c2_db + db_from_linear(2.0 / kPi);

    Eigen::VectorXcd s_inf =
        infinite_bit_matched(scene.geometry, scene.target.angle, scene.code_length);
    McConfig mc;
    mc.trials = opts.trials;
    mc.seed = opts.seed;
    Eigen::VectorXcd w3 = channel_apply_normalized(
        scene.geometry, std::sin(scene.target.angle), scene.code_length, s_inf);
    auto est3 = qsinr_mc(w3, s_inf, scene, mc);
    Eigen::VectorXcd w4 = channel_apply_normalized(
        scene.geometry, std::sin(scene.target.angle), scene.code_length, s1.vector());
    auto est4 = qsinr_mc(w4, s1.vector(), scene, mc);

    csv.row({static_cast<double>(nrl), c1_db, c2_db, c3_db, c4_db,
             db_from_linear(est3.estimate), db_stderr(est3),
             db_from_linear(est4.estimate), db_stderr(est4), opts.trials,
             static_cast<long>(opts.seed)});
  }
  std::cout << "wrote " << path_in(opts, "noise_loss.csv") << "\n";
  return 0;
}

int run_detect(const CommonOpts& opts, double target_pf, double power_min_db,
               double power_max_db, int power_steps, const std::string& waveform_path,
               const std::string& filter_path) {
  RadarScene scene = load_scene(opts.scene_path);
  DesignedPair pair = resolve_pair(scene, waveform_path, filter_path);
  double s2 = sigma_in_sq(pair.w.w, pair.s, scene);
  Eigen::MatrixXcd A0 =
      channel_matrix(scene.geometry, scene.target.angle, scene.code_length);
  std::complex<double> beta0 = beta(pair.w.w, pair.s, A0, scene.noise_power);
  bool mc_ok = target_pf >= 10.0 / static_cast<double>(opts.trials);

  McConfig mc;
  mc.trials = opts.trials;
  mc.seed = opts.seed;

  {
    CsvWriter csv(path_in(opts, "pf_vs_threshold.csv"),
                  {"threshold", "pf_analytic", "pf_mc", "pf_mc_stderr", "trials", "seed"});
    for (int i = 0; i < 20; ++i) {
      double p = 0.9 * std::pow(1e-8 / 0.9, i / 19.0);
      double threshold = threshold_for_pf(p, s2);
      bool feasible = p >= 10.0 / static_cast<double>(opts.trials);
      if (feasible) {
        auto est = empirical_pf(pair.w.w, pair.s, scene, threshold, mc);
        csv.row({threshold, p, est.estimate, est.stderr_, opts.trials,
                 static_cast<long>(opts.seed)});
      } else {
        csv.row({threshold, p, std::string(""), std::string(""), opts.trials,
                 static_cast<long>(opts.seed)});
      }
    }
  }

  {
    if (!mc_ok)
      std::cerr << "warning: target pf " << target_pf
                << " below 10/trials, emitting analytic-only pd columns\n";
    double threshold = threshold_for_pf(target_pf, s2);
    CsvWriter csv(path_in(opts, "pd_vs_power.csv"),
                  {"power_db", "qsinr_db", "pd_analytic", "pd_mc", "pd_mc_stderr",
                   "pf_target", "trials", "seed"});
    for (int i = 0; i <= power_steps; ++i) {
      double pdb = power_min_db + (power_max_db - power_min_db) * i / power_steps;
      RadarScene sweep = scene;
      if (scene.target.kind == TargetModel::Kind::Rayleigh)
        sweep.target = TargetModel::rayleigh(scene.target.angle, linear_from_db(pdb));
      else
        sweep.target =
            TargetModel::nonfluctuating(scene.target.angle,
                                        {std::sqrt(linear_from_db(pdb)), 0.0});
      double pd_analytic =
          sweep.target.kind == TargetModel::Kind::Rayleigh
              ? pd_rft(target_pf, sweep.target.variance, beta0, s2)
              : pd_nft(target_pf, sweep.target.amplitude, beta0, s2);
      double qs_db = db_from_linear(qsinr(pair.w.w, pair.s, sweep));
      if (mc_ok) {
        auto est = empirical_pd(pair.w.w, pair.s, sweep, threshold, mc);
        csv.row({pdb, qs_db, pd_analytic, est.estimate, est.stderr_, target_pf,
                 opts.trials, static_cast<long>(opts.seed)});
      } else {
        csv.row({pdb, qs_db, pd_analytic, std::string(""), std::string(""), target_pf,
                 opts.trials, static_cast<long>(opts.seed)});
      }
    }
  }
  std::cout << "wrote " << path_in(opts, "pf_vs_threshold.csv") << " and "
            << path_in(opts, "pd_vs_power.csv") << "\n";
  return 0;
}

std::string cell_tag(double power_db, double delta) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "p%g_d%g", power_db, delta);
  return buf;
}

int run_codesign(const CommonOpts& opts, GreetConfig config,
                 const std::string& powers_text, const std::string& deltas_text) {
  RadarScene base = load_scene(opts.scene_path);
  if (base.interferences.empty())
    throw std::runtime_error("codesign requires at least one interference");
  std::vector<double> powers_db = parse_grid(powers_text);
  std::vector<double> deltas = parse_grid(deltas_text);
  if (powers_db.empty()) powers_db = {30.0};
  if (deltas.empty()) deltas = {0.0, 0.1, 0.2};
  config.seed = opts.seed;

  CsvWriter csv(path_in(opts, "codesign.csv"),
                {"power_db", "delta", "qsinr_db", "initial_qsinr_db", "rho1", "rho2",
                 "admm_iters", "alt_iters", "seed"});
  for (double pdb : powers_db) {
    for (double delta : deltas) {
      RadarScene scene = base;
      for (auto& src : scene.interferences) {
        src.power = linear_from_db(pdb);
        src.uncertainty = delta;
      }
      scene.validate();
      GreetResult res = greet(scene, config);
      double final_db = db_from_linear(qsinr(res.w, res.s, scene));
      csv.row({pdb, delta, final_db, db_from_linear(res.diag.initial_qsinr),
               config.rho1, config.rho2, static_cast<long>(config.max_admm_iters),
               static_cast<long>(config.max_altopt_iters),
               static_cast<long>(opts.seed)});

      std::string tag = cell_tag(pdb, delta);
      save_waveform(path_in(opts, "waveform_" + tag + ".txt"), res.s,
                    scene.geometry.nt());
      save_filter(path_in(opts, "filter_" + tag + ".txt"), res.w, scene.geometry.nr());
      CsvWriter diag(path_in(opts, "codesign_diag_" + tag + ".csv"),
                     {"iteration", "objective", "residual_d", "residual_c1",
                      "residual_c2", "modulus_min", "modulus_max", "seed"});
      for (std::size_t j = 0; j < res.diag.residual_d.size(); ++j)
        diag.row({static_cast<long>(j + 1), res.diag.objective_trace[j],
                  res.diag.residual_d[j], res.diag.residual_c1[j],
                  res.diag.residual_c2[j], res.diag.modulus_min[j],
                  res.diag.modulus_max[j], static_cast<long>(opts.seed)});
    }
  }
  std::cout << "wrote " << path_in(opts, "codesign.csv") << "\n";
  return 0;
}

int run_validate(const CommonOpts& opts) {
  RadarScene scene = load_scene(opts.scene_path);
  McConfig mc;
  mc.trials = opts.trials;
  mc.seed = opts.seed;

  {
    CsvWriter csv(path_in(opts, "validate_prop1.csv"),
                  {"h2_over_sigma2_db", "rae_mean", "rae_var", "mean_stderr", "trials",
                   "seed"});
    for (double db = -30.0; db <= 0.0 + 1e-9; db += 5.0) {
      double h2 = linear_from_db(db) * scene.noise_power;
      double re = std::sqrt(h2 / 2.0);
      auto rep = prop1_rae({re, re}, scene.noise_power, mc);
      csv.row({db, rep.rae_mean, rep.rae_var, rep.mean_stderr, opts.trials,
               static_cast<long>(opts.seed)});
    }
  }

  DesignedPair pair = resolve_pair(scene, "", "");
  double analytic = sigma_in_sq(pair.w.w, pair.s, scene);
  {
    // H0 variance of the filter output against the closed form
    double sum = 0.0, sum_sq = 0.0;
    for (long k = 0; k < mc.trials; ++k) {
      SplitMix64 rng(SplitMix64::derive(mc.seed, static_cast<std::uint64_t>(k)));
      const int K = scene.num_interferences();
      Eigen::VectorXd omegas(K);
      Eigen::VectorXcd xi(K);
      for (int i = 0; i < K; ++i) {
        const auto& src = scene.interferences[i];
        omegas(i) = src.uncertainty > 0.0
                        ? rng.uniform(src.mean_normalized_angle - src.uncertainty,
                                      src.mean_normalized_angle + src.uncertainty)
                        : src.mean_normalized_angle;
        xi(i) = rng.complex_gaussian(src.power);
      }
      auto [h1, h0] = noise_free_returns(scene, pair.s, xi, {0.0, 0.0}, omegas);
      Eigen::VectorXcd v(scene.snapshot_dim());
      for (int i = 0; i < scene.snapshot_dim(); ++i)
        v(i) = rng.complex_gaussian(scene.noise_power);
      double z2 = std::norm(pair.w.w.dot(one_bit_quantize(h0 + v)));
      sum += z2;
      sum_sq += z2 * z2;
    }
    double mean = sum / static_cast<double>(mc.trials);
    double se = std::sqrt((sum_sq / mc.trials - mean * mean) / mc.trials);
    CsvWriter csv(path_in(opts, "validate_sigma_in.csv"),
                  {"sigma_in_sq_analytic", "sigma_in_sq_mc", "stderr", "z_score",
                   "trials", "seed"});
    csv.row({analytic, mean, se, (mean - analytic) / se, opts.trials,
             static_cast<long>(opts.seed)});
  }

  {
    CsvWriter csv(path_in(opts, "validate_pf.csv"),
                  {"threshold", "pf_analytic", "pf_mc", "stderr", "within_3sigma",
                   "trials", "seed"});
    double p_lo = std::max(10.0 / static_cast<double>(opts.trials), 1e-6);
    for (int i = 0; i < 20; ++i) {
      double p = 0.9 * std::pow(p_lo / 0.9, i / 19.0);
      double threshold = threshold_for_pf(p, analytic);
      auto est = empirical_pf(pair.w.w, pair.s, scene, threshold, mc);
      bool ok = std::abs(est.estimate - p) <= 3.0 * std::max(est.stderr_, 1e-12);
      csv.row({threshold, p, est.estimate, est.stderr_, std::string(ok ? "1" : "0"),
               opts.trials, static_cast<long>(opts.seed)});
    }
  }
  std::cout << "wrote validation CSVs under " << opts.out_dir << "\n";
  return 0;
}

int run_sweep(const CommonOpts& opts, const std::string& deltas_text,
              const std::string& waveform_path, const std::string& filter_path,
              bool with_mc) {
  RadarScene base = load_scene(opts.scene_path);
  if (base.interferences.empty())
    throw std::runtime_error("sweep requires at least one interference");
  std::vector<double> deltas = parse_grid(deltas_text);
  if (deltas.empty()) deltas = {0.0, 0.05, 0.1, 0.15, 0.2};

  DesignedPair pair = resolve_pair(base, waveform_path, filter_path);
  McConfig mc;
  mc.trials = opts.trials;
  mc.seed = opts.seed;

  CsvWriter csv(path_in(opts, "uncertainty_sweep.csv"),
                {"delta", "qsinr_db", "qsinr_mc_db", "qsinr_mc_stderr_db", "trials",
                 "seed"});
  for (double delta : deltas) {
    RadarScene scene = base;
    for (auto& src : scene.interferences) src.uncertainty = delta;
    scene.validate();
    double qs = qsinr(pair.w.w, pair.s, scene);
    if (with_mc) {
      auto est = qsinr_mc(pair.w.w, pair.s, scene, mc);
      csv.row({delta, db_from_linear(qs), db_from_linear(est.estimate), db_stderr(est),
               opts.trials, static_cast<long>(opts.seed)});
    } else {
      csv.row({delta, db_from_linear(qs), std::string(""), std::string(""), opts.trials,
               static_cast<long>(opts.seed)});
    }
  }
  std::cout << "wrote " << path_in(opts, "uncertainty_sweep.csv") << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"one-bit MIMO radar detection analysis and joint design"};
  app.require_subcommand(1);

  CommonOpts opts;
  std::string grid;
  double target_pf = 1e-4;
  double power_min_db = -10.0, power_max_db = 30.0;
  int power_steps = 20;
  std::string waveform_path, filter_path;
  GreetConfig config;
  std::string powers_text, deltas_text;
  bool with_mc = false;

  auto* noise =
      app.add_subcommand("noise-loss", "converter-loss table on a noise-only scene");
  add_common(noise, opts);
  noise->add_option("--grid", grid, "comma list of NrL values");

  auto* detect = app.add_subcommand("detect", "false-alarm and detection curves");
  add_common(detect, opts);
  detect->add_option("--pf", target_pf, "target false-alarm for the pd table");
  detect->add_option("--power-db-min", power_min_db, "target power sweep start (dB)");
  detect->add_option("--power-db-max", power_max_db, "target power sweep end (dB)");
  detect->add_option("--power-steps", power_steps, "number of sweep intervals");
  detect->add_option("--waveform", waveform_path, "waveform artifact instead of matched");
  detect->add_option("--filter", filter_path, "filter artifact instead of MVDR");

  auto* codesign = app.add_subcommand("codesign", "GREET over a power/uncertainty grid");
  add_common(codesign, opts);
  codesign->add_option("--rho1", config.rho1, "ADMM penalty rho1");
  codesign->add_option("--rho2", config.rho2, "ADMM penalty rho2");
  codesign->add_option("--admm-iters", config.max_admm_iters, "inner iterations");
  codesign->add_option("--alt-iters", config.max_altopt_iters, "outer iterations");
  codesign->add_option("--powers-db", powers_text,
                       "comma list of interference powers (dB)");
  auto* deltas_opt =
      codesign->add_option("--deltas", deltas_text, "comma list of angle uncertainties");
  codesign->add_option("--grid", deltas_text, "alias for --deltas")->excludes(deltas_opt);

  auto* validate =
      app.add_subcommand("validate", "Monte Carlo checks of the closed forms");
  add_common(validate, opts);

  auto* sweep = app.add_subcommand("sweep", "QSINR of a fixed pair versus uncertainty");
  add_common(sweep, opts);
  sweep->add_option("--grid", deltas_text, "comma list of deltas");
  sweep->add_option("--waveform", waveform_path, "waveform artifact instead of matched");
  sweep->add_option("--filter", filter_path, "filter artifact instead of MVDR");
  sweep->add_flag("--mc", with_mc, "add Monte Carlo QSINR columns");

  CLI11_PARSE(app, argc, argv);

  try {
    if (noise->parsed()) return run_noise_loss(opts, grid);
    if (detect->parsed())
      return run_detect(opts, target_pf, power_min_db, power_max_db, power_steps,
                        waveform_path, filter_path);
    if (codesign->parsed()) return run_codesign(opts, config, powers_text, deltas_text);
    if (validate->parsed()) return run_validate(opts);
    if (sweep->parsed())
      return run_sweep(opts, deltas_text, waveform_path, filter_path, with_mc);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
