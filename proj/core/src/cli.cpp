#include "hct/cli.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <string>

#include <CLI11.hpp>

#include "hct/config.hpp"
#include "hct/harness.hpp"

namespace hct {

namespace {

struct RunOptions {
  std::string config;
  std::string out;
  std::string algorithm;
  std::optional<std::uint64_t> seed;
  std::optional<double> budget;
  std::optional<std::size_t> repeats;
};

void add_run_options(CLI::App& cmd, RunOptions& opts, bool config_required) {
  auto* config = cmd.add_option("--config", opts.config, "Key-value experiment config file");
  if (config_required) config->required();
  cmd.add_option("--out", opts.out, "Output directory (overrides output_dir)");
  cmd.add_option("--algorithm", opts.algorithm, "adam, ssl_alm or ssw");
  cmd.add_option("--seed", opts.seed, "Base seed (overrides base_seed)");
  cmd.add_option("--budget-secs", opts.budget, "Wall-clock budget per run in seconds");
  cmd.add_option("--repeats", opts.repeats, "Number of repeats (seeds)");
}

ExperimentConfig resolve_config(const RunOptions& opts) {
  ExperimentConfig cfg;
  if (!opts.config.empty()) {
    if (!std::filesystem::exists(opts.config)) {
      throw ConfigError("config file not found: " + opts.config);
    }
    cfg = load_config(opts.config);
  }
  if (!opts.out.empty()) cfg.output_dir = opts.out;
  if (!opts.algorithm.empty()) cfg.algorithm = parse_algorithm(opts.algorithm);
  if (opts.seed) cfg.base_seed = *opts.seed;
  if (opts.budget) cfg.budget_seconds = *opts.budget;
  if (opts.repeats) cfg.repeats = *opts.repeats;
  cfg.validate();
  return cfg;
}

void report(std::ostream& out, const std::vector<RunResult>& results) {
  for (const auto& run : results) {
    out << to_string(run.algorithm) << " seed " << run.seed << ": " << run.iterations
        << " iterations";
    if (!run.trace.empty()) {
      const auto& last = run.trace.back();
      out << ", train loss " << last.train_loss << ", max train constraint "
          << last.train_constraints.maxCoeff() << ", max train hard gap "
          << last.hard_gaps_train.maxCoeff();
    }
    if (run.aborted) out << " [aborted: " << run.diagnostic << "]";
    out << '\n';
  }
}

int cmd_run(const RunOptions& opts, std::ostream& out) {
  const ExperimentConfig cfg = resolve_config(opts);
  const ExperimentData data = prepare_data(cfg);
  const auto results = run_experiment(cfg, data);
  report(out, results);
  out << "outputs written to " << cfg.output_dir.string() << '\n';
  for (const auto& r : results) {
    if (r.aborted) return kExitRuntime;
  }
  return kExitOk;
}

int cmd_compare(const RunOptions& opts, std::ostream& out) {
  const ExperimentConfig base = resolve_config(opts);
  const ExperimentData data = prepare_data(base);
  std::filesystem::create_directories(base.output_dir);
  std::ofstream table(base.output_dir / "compare_summary.csv");
  table << "algorithm,seed,iterations,final_train_loss,final_test_loss,"
           "final_max_train_constraint,final_max_test_constraint,final_max_train_hard_gap\n";
  table.precision(17);
  bool aborted = false;
  for (Algorithm algorithm : {Algorithm::Adam, Algorithm::SslAlm, Algorithm::Ssw}) {
    ExperimentConfig cfg = base;
    cfg.algorithm = algorithm;
    const auto results = run_experiment(cfg, data);
    report(out, results);
    for (const auto& r : results) {
      aborted = aborted || r.aborted;
      if (r.trace.empty()) continue;
      const auto& last = r.trace.back();
      table << to_string(algorithm) << ',' << r.seed << ',' << r.iterations << ','
            << last.train_loss << ',' << last.test_loss << ','
            << last.train_constraints.maxCoeff() << ',' << last.test_constraints.maxCoeff() << ','
            << last.hard_gaps_train.maxCoeff() << '\n';
    }
  }
  if (!table) throw DataError("cannot write compare_summary.csv");
  out << "outputs written to " << base.output_dir.string() << '\n';
  return aborted ? kExitRuntime : kExitOk;
}

}  // namespace

bool run_self_checks(std::ostream& out) {
  bool all_ok = true;
  auto line = [&](const std::string& name, bool ok, double measured) {
    out << (ok ? "PASS " : "FAIL ") << name << " (" << measured << ")\n";
    all_ok = all_ok && ok;
  };

  // Backprop against central differences on small random networks.
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> normal(0.0, 1.0);
  double worst_loss = 0.0;
  double worst_constraint = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    NetworkSpec net;
    net.input_dim = 3;
    net.hidden_dims = {4, 3};
    Vector params;
    GroupedBatch batch;
    batch.group_count = 2;
    // Redraw until no ReLU input sits near its kink.
    do {
      params = Vector::NullaryExpr(static_cast<Eigen::Index>(net.parameter_count()),
                                   [&] { return 0.5 * normal(rng); });
      batch.features = Matrix::NullaryExpr(8, 3, [&] { return normal(rng); });
    } while (min_abs_preactivation(net, params, batch.features) < 1e-4);
    batch.labels.resize(8);
    for (int i = 0; i < 8; ++i) {
      batch.labels[i] = static_cast<double>(i % 2);
      batch.groups.push_back(i < 4 ? 0 : 1);
    }
    FairnessSpec fairness;

    const Vector analytic = bce_parameter_gradient(net, params, batch);
    const Vector numeric = finite_difference_gradient(
        [&](const Vector& p) { return bce_with_logits(forward(net, p, batch.features), batch.labels); },
        params, 1e-6);
    worst_loss = std::max(worst_loss, (analytic - numeric).lpNorm<Eigen::Infinity>() /
                                          std::max(1.0, numeric.lpNorm<Eigen::Infinity>()));

    const Matrix jac = fairness_constraint_gradients(net, params, batch, fairness);
    for (Eigen::Index r = 0; r < jac.rows(); ++r) {
      const Vector fd = finite_difference_gradient(
          [&](const Vector& p) {
            return fairness_constraints(forward(net, p, batch.features), batch.groups, fairness)[r];
          },
          params, 1e-6);
      worst_constraint = std::max(worst_constraint, (jac.row(r).transpose() - fd).lpNorm<Eigen::Infinity>() /
                                                        std::max(1.0, fd.lpNorm<Eigen::Infinity>()));
    }
  }
  line("bce gradient vs finite differences", worst_loss <= 1e-5, worst_loss);
  line("fairness Jacobian vs finite differences", worst_constraint <= 1e-5, worst_constraint);

  const Vector projected = project_nonneg((Vector(3) << -1.0, 2.0, 0.0).finished());
  const bool proj_ok = projected[0] == 0.0 && projected[1] == 2.0 && projected[2] == 0.0 &&
                       project_nonneg(projected) == projected;
  line("nonnegative projection", proj_ok, projected.sum());
  return all_ok;
}

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Constrained training benchmarks: Adam, SSL-ALM and switching subgradient"};
  app.require_subcommand(1);

  RunOptions run_opts;
  auto* run = app.add_subcommand("run", "Run one algorithm for the configured repeats");
  add_run_options(*run, run_opts, true);

  RunOptions compare_opts;
  auto* compare = app.add_subcommand("compare", "Run Adam, SSL-ALM and SSw on the same data and seeds");
  add_run_options(*compare, compare_opts, false);

  SyntheticSpec synth_spec;
  std::string synth_out;
  auto* synth = app.add_subcommand("synth", "Write a synthetic grouped classification CSV");
  synth->add_option("--out", synth_out, "Output CSV path")->required();
  synth->add_option("--rows", synth_spec.rows, "Number of rows");
  synth->add_option("--groups", synth_spec.groups, "Number of protected groups");
  synth->add_option("--features", synth_spec.features, "Number of numeric features");
  synth->add_option("--gap", synth_spec.label_gap, "Label base-rate spread across groups");
  synth->add_option("--signal", synth_spec.signal, "Label signal strength");
  synth->add_option("--seed", synth_spec.seed, "Generator seed");

  auto* check = app.add_subcommand("check", "Run gradient and projection self-tests");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitConfig;
  }

  try {
    if (*run) return cmd_run(run_opts, out);
    if (*compare) return cmd_compare(compare_opts, out);
    if (*synth) {
      write_csv(make_synthetic(synth_spec), synth_out, "label", "group");
      out << "wrote " << synth_spec.rows << " rows to " << synth_out << '\n';
      return kExitOk;
    }
    if (*check) return run_self_checks(out) ? kExitOk : kExitRuntime;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitConfig;
}

int cli_main(int argc, const char* const* argv) { return cli_main(argc, argv, std::cout, std::cerr); }

}  // namespace hct
