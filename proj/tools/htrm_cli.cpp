/*
 * Copyright (c) 2026, The htrm Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// htrm: command-line front end for sampling heavy-tailed random matrices,
// computing their extreme spectrum, evaluating the limit laws and running
// the Monte Carlo experiments.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "htrm/ensembles.hpp"
#include "htrm/error.hpp"
#include "htrm/experiments.hpp"
#include "htrm/limit_laws.hpp"
#include "htrm/matrix_market.hpp"
#include "htrm/report.hpp"
#include "htrm/run_config.hpp"
#include "htrm/spectral.hpp"
#include "htrm/tail_laws.hpp"

namespace {

using namespace htrm;

struct SampleFlags {
  std::string ensemble = "sparse_wigner";
  std::size_t n = 200;
  double mu = 1.0;
  std::optional<std::size_t> degree;
  std::size_t rows = 100;
  std::size_t cols = 200;
  std::string law = "crossover";
  double c = 2.0;
  std::optional<double> tail_index;
  std::optional<double> crossover;
  std::uint64_t seed = 1;
};

void add_sample_flags(CLI::App* cmd, SampleFlags& f) {
  cmd->add_option("--ensemble", f.ensemble,
                  "dense_wigner | sparse_wigner | band | regular_graph | covariance_factor | "
                  "symmetrized_covariance");
  cmd->add_option("--n", f.n, "dimension of Wigner-type ensembles");
  cmd->add_option("--mu", f.mu, "sparsity exponent: p_n = n^mu");
  cmd->add_option("--degree", f.degree, "degree k_n of graph ensembles (default round(n^mu))");
  cmd->add_option("--L", f.rows, "rows of the covariance factor");
  cmd->add_option("--M", f.cols, "columns of the covariance factor");
  cmd->add_option("--law", f.law, "crossover | gaussian");
  cmd->add_option("--c", f.c, "tail constant");
  cmd->add_option("--tail-index", f.tail_index, "tail exponent (default 2(1+1/mu), 4 for covariance)");
  cmd->add_option("--x0", f.crossover, "crossover point of the tail law");
  cmd->add_option("--seed", f.seed, "random seed");
}

EnsembleSample draw_sample(const SampleFlags& f) {
  const EnsembleKind kind = ensemble_kind_from_string(f.ensemble);
  ExperimentConfig config;
  config.ensemble = kind;
  config.n = f.n;
  config.mu = f.mu;
  config.degree = f.degree;
  config.law = law_family_from_string(f.law);
  config.c = f.c;
  config.tail_index = f.tail_index;
  config.crossover_point = f.crossover;
  Rng rng(f.seed);
  EnsembleSample s;
  if (kind == EnsembleKind::covariance_factor || kind == EnsembleKind::symmetrized_covariance) {
    config.kind = ExperimentKind::covariance_edge;
    const auto factor = sample_covariance_factor(f.rows, f.cols, entry_law(config), rng);
    s = kind == EnsembleKind::covariance_factor ? factor : symmetrize_covariance(factor);
  } else {
    if (f.n < 1) throw DomainError("--n must be at least 1");
    s = sample_ensemble(config, rng);
  }
  s.seed = f.seed;
  return s;
}

/// Writes through a temporary sibling and renames, so a failed run leaves
/// nothing behind.
template <typename Writer>
void write_output(const std::string& path, Writer&& writer) {
  if (path.empty() || path == "-") {
    writer(std::cout);
    return;
  }
  const std::filesystem::path target(path);
  const std::filesystem::path tmp = target.string() + ".partial";
  try {
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw DomainError(fmt::format("cannot write '{}'", path));
      writer(out);
      out.flush();
      if (!out) throw InternalError(fmt::format("write to '{}' failed", path));
    }
    std::filesystem::rename(tmp, target);
  } catch (...) {
    std::error_code ignored;
    std::filesystem::remove(tmp, ignored);
    throw;
  }
}

struct Grid {
  double lo = 0.0;
  double hi = 0.0;
  double step = 1.0;

  std::vector<double> points() const {
    std::vector<double> out;
    const auto count = static_cast<long long>(std::floor((hi - lo) / step + 1e-9));
    for (long long i = 0; i <= count; ++i) out.push_back(lo + static_cast<double>(i) * step);
    return out;
  }
};

Grid parse_grid(const std::string& text) {
  Grid g;
  char sep1 = 0;
  char sep2 = 0;
  std::istringstream in(text);
  in.imbue(std::locale::classic());
  if (!(in >> g.lo >> sep1 >> g.hi >> sep2 >> g.step) || sep1 != ':' || sep2 != ':' ||
      !(in >> std::ws).eof()) {
    throw DomainError(fmt::format("--grid expects lo:hi:step, got '{}'", text));
  }
  if (!(g.step > 0.0) || !(g.hi >= g.lo)) throw DomainError("--grid needs step > 0 and hi >= lo");
  if ((g.hi - g.lo) / g.step > 1e7) throw DomainError("--grid has too many points");
  return g;
}

int run_sample(const SampleFlags& f, const std::string& out) {
  const EnsembleSample s = draw_sample(f);
  write_output(out, [&](std::ostream& os) { write_matrix_market(s, os); });
  return 0;
}

int run_spectrum(const SampleFlags& f, const std::string& input, std::size_t k, double tol,
                 const std::string& out) {
  EnsembleSample s;
  if (!input.empty()) {
    std::ifstream in(input);
    if (!in) throw DomainError(fmt::format("cannot open '{}'", input));
    s = read_matrix_market(in);
  } else {
    s = draw_sample(f);
  }
  if (!s.symmetric()) s = symmetrize_covariance(s);
  EigenOptions options;
  options.k = k;
  options.tol = tol;
  const SpectralResult r = top_k_eigs(s, options);
  write_output(out, [&](std::ostream& os) {
    os << "index,eigenvalue,residual\n";
    for (std::size_t i = 0; i < r.eigenvalues.size(); ++i) {
      os << fmt::format("{},{:.17g},{:.3g}\n", i + 1, r.eigenvalues[i], r.residuals[i]);
    }
  });
  std::cerr << fmt::format("method={} iterations={} converged={}\n",
                           r.method == SolveMethod::lanczos ? "lanczos" : "dense", r.iterations,
                           r.converged ? "yes" : "no");
  return r.converged || r.method != SolveMethod::lanczos ? 0 : 2;
}

struct LimitFlags {
  std::string law;
  double c = 2.0;
  double mu = 1.0;
  double alpha = 1.0;
  int k = 1;
  std::string grid;
  std::optional<double> x;
  bool falpha = false;
  bool tau = false;
  bool stieltjes = false;
  bool quantile = false;
};

int run_limits(const LimitFlags& f, const std::string& out) {
  const int modes = (f.falpha ? 1 : 0) + (f.tau ? 1 : 0) + (f.stieltjes ? 1 : 0) + (!f.law.empty() ? 1 : 0);
  if (modes != 1) throw DomainError("limits needs exactly one of --law, --falpha, --tau, --stieltjes");
  if (f.tau) {
    write_output(out, [&](std::ostream& os) { os << fmt::format("{:.10g}\n", tau_alpha(f.alpha)); });
    return 0;
  }
  if (f.falpha || f.stieltjes) {
    auto eval = [&](double x) { return f.falpha ? f_alpha(x, f.alpha) : mp_stieltjes(x, f.alpha); };
    if (f.x && f.grid.empty()) {
      const double v = eval(*f.x);
      write_output(out, [&](std::ostream& os) { os << fmt::format("{:.10g}\n", v); });
      return 0;
    }
    if (f.grid.empty()) throw DomainError("give --x or --grid");
    std::vector<std::pair<double, double>> rows;
    for (double x : parse_grid(f.grid).points()) rows.emplace_back(x, eval(x));
    write_output(out, [&](std::ostream& os) {
      os << (f.falpha ? "x,F_alpha\n" : "z,G\n");
      for (const auto& [x, v] : rows) os << fmt::format("{:.6f},{:.10g}\n", x, v);
    });
    return 0;
  }
  const LimitKind kind = limit_kind_from_string(f.law);
  const LimitLaw law = kind == LimitKind::frechet_mu          ? LimitLaw::frechet(f.c, f.mu)
                       : kind == LimitKind::pushforward_f     ? LimitLaw::pushforward(f.c, f.mu, f.k)
                       : kind == LimitKind::poisson_intensity ? LimitLaw::poisson_point(f.c, f.mu, f.k)
                                                              : LimitLaw::covariance(f.c, f.alpha);
  std::vector<double> xs;
  if (f.x) xs.push_back(*f.x);
  if (!f.grid.empty()) xs = parse_grid(f.grid).points();
  if (xs.empty()) throw DomainError("give --x or --grid");
  std::vector<std::pair<double, double>> rows;
  for (double x : xs) rows.emplace_back(x, f.quantile ? law.quantile(x) : law.cdf(x));
  write_output(out, [&](std::ostream& os) {
    os << (f.quantile ? "u,quantile\n" : "x,cdf\n");
    for (const auto& [x, v] : rows) os << fmt::format("{:.6f},{:.6f}\n", x, v);
  });
  return 0;
}

int run_experiment_cmd(const std::string& config_path, std::optional<std::size_t> threads,
                       const std::string& out_dir) {
  RunConfig rc = load_run_config(config_path);
  if (threads) rc.experiment.threads = *threads;
  if (!out_dir.empty()) rc.output_dir = out_dir;
  validate(rc.experiment);
  const RunManifest m = run_experiment(rc.experiment);
  const RunOutputs paths = write_run_outputs(rc, m);
  render_report(m, std::cout);
  std::cout << fmt::format("\nmanifest: {}\ntrials:   {}\ncdf:      {}\n", paths.manifest.string(),
                           paths.trials.string(), paths.cdf.string());
  if (m.failed) {
    std::cerr << "htrm: run failed: " << m.failure << '\n';
    return 2;
  }
  return 0;
}

int run_report(const std::string& manifest_path, const std::string& cdf_out) {
  const RunManifest m = read_manifest(manifest_path);
  render_report(m, std::cout);
  if (!cdf_out.empty()) write_output(cdf_out, [&](std::ostream& os) { write_cdf_csv(m, os); });
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Heavy-tailed random matrices: sampling, extreme spectrum, limit laws, experiments"};
  app.require_subcommand(1);

  SampleFlags sample_flags;
  std::string sample_out = "-";
  auto* sample = app.add_subcommand("sample", "write one ensemble realization as MatrixMarket");
  add_sample_flags(sample, sample_flags);
  sample->add_option("-o,--out", sample_out, "output file ('-' for stdout)");

  SampleFlags spec_flags;
  std::string spec_input;
  std::string spec_out = "-";
  std::size_t spec_k = 1;
  double spec_tol = 1e-10;
  auto* spectrum = app.add_subcommand("spectrum", "top-k eigenvalues of a MatrixMarket file or a fresh sample");
  add_sample_flags(spectrum, spec_flags);
  spectrum->add_option("-i,--input", spec_input, "MatrixMarket input (default: draw a sample)");
  spectrum->add_option("-k,--k", spec_k, "number of eigenvalues");
  spectrum->add_option("--tol", spec_tol, "Lanczos residual tolerance");
  spectrum->add_option("-o,--out", spec_out, "output CSV ('-' for stdout)");

  LimitFlags limit_flags;
  std::string limit_out = "-";
  auto* limits = app.add_subcommand("limits", "evaluate a limit law, F_alpha, tau_alpha or G_MP on a grid");
  limits->add_option("--law", limit_flags.law, "frechet | lambda | poisson | covariance");
  limits->add_option("--c", limit_flags.c, "tail constant");
  limits->add_option("--mu", limit_flags.mu, "sparsity exponent");
  limits->add_option("--alpha", limit_flags.alpha, "aspect ratio M/L");
  limits->add_option("--k", limit_flags.k, "point index for lambda / poisson laws");
  limits->add_option("--grid", limit_flags.grid, "lo:hi:step");
  limits->add_option("--x", limit_flags.x, "single evaluation point");
  limits->add_flag("--falpha", limit_flags.falpha, "evaluate F_alpha(x)");
  limits->add_flag("--tau", limit_flags.tau, "print tau_alpha");
  limits->add_flag("--stieltjes", limit_flags.stieltjes, "evaluate G_MP(alpha)(z)");
  limits->add_flag("--quantile", limit_flags.quantile, "evaluate the quantile function instead of the CDF");
  limits->add_option("-o,--out", limit_out, "output CSV ('-' for stdout)");

  std::string config_path;
  std::optional<std::size_t> threads;
  std::string out_dir;
  auto* experiment = app.add_subcommand("experiment", "run an experiment config and write manifest + CSVs");
  experiment->add_option("config", config_path, "INI run configuration")->required();
  experiment->add_option("--threads", threads, "override the thread budget");
  experiment->add_option("--out-dir", out_dir, "override the output directory");

  std::string manifest_path;
  std::string cdf_out;
  auto* report = app.add_subcommand("report", "render a manifest as a summary table and plot-ready CSV");
  report->add_option("manifest", manifest_path, "manifest JSON")->required();
  report->add_option("--cdf-out", cdf_out, "write x,empirical_cdf,analytic_cdf here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*sample) return run_sample(sample_flags, sample_out);
    if (*spectrum) return run_spectrum(spec_flags, spec_input, spec_k, spec_tol, spec_out);
    if (*limits) return run_limits(limit_flags, limit_out);
    if (*experiment) return run_experiment_cmd(config_path, threads, out_dir);
    if (*report) return run_report(manifest_path, cdf_out);
  } catch (const DomainError& e) {
    std::cerr << "htrm: error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "htrm: internal error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
