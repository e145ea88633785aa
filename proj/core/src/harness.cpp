#include "hct/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <limits>
#include <map>
#include <stdexcept>
#include <thread>

#include <json.hpp>

namespace hct {

ExperimentData prepare_data(const ExperimentConfig& cfg) {
  Dataset full = cfg.data.csv
                     ? load_csv(*cfg.data.csv, cfg.data.label_column, cfg.data.group_column)
                     : make_synthetic(cfg.data.synthetic);
  auto [train, test] = split_train_test(full, cfg.test_fraction, cfg.split_seed);
  const ScalerParams scaler = fit_scaler(train);
  return {apply_scaler(scaler, std::move(train)), apply_scaler(scaler, std::move(test))};
}

NetworkSpec network_for(const ExperimentConfig& cfg, const Dataset& train) {
  NetworkSpec net;
  net.input_dim = static_cast<std::size_t>(train.features.cols());
  net.hidden_dims = cfg.hidden_dims;
  net.validate();
  return net;
}

TraceRecord evaluate(const NetworkSpec& net, const Vector& params, const ExperimentData& data,
                     const FairnessSpec& fairness) {
  TraceRecord r;
  const Vector train_logits = forward(net, params, data.train.features);
  const Vector test_logits = forward(net, params, data.test.features);
  r.train_loss = bce_with_logits(train_logits, data.train.labels);
  r.test_loss = bce_with_logits(test_logits, data.test.labels);
  r.train_constraints = fairness_constraints(train_logits, data.train.groups, fairness);
  r.test_constraints = fairness_constraints(test_logits, data.test.groups, fairness);
  r.hard_gaps_train =
      hard_positive_rate_report(train_logits, data.train.groups, fairness.group_count).gaps;
  r.hard_gaps_test =
      hard_positive_rate_report(test_logits, data.test.groups, fairness.group_count).gaps;
  return r;
}

// --- FairnessProblem -------------------------------------------------------

FairnessProblem::FairnessProblem(NetworkSpec net, const Dataset& train, FairnessSpec fairness,
                                 std::size_t per_group, std::uint64_t seed)
    : net_(std::move(net)),
      fairness_(fairness),
      sampler_(train, per_group),
      seed_(seed) {
  fairness_.validate();
  if (fairness_.group_count != train.group_count) {
    throw DataError("fairness group count does not match the dataset");
  }
}

GroupedBatch FairnessProblem::batch(std::uint64_t sample) const {
  GroupedBatch b = sampler_.batch(seed_, sample);
  ++batches_drawn_;
  std::vector<std::size_t> counts(b.group_count, 0);
  for (int g : b.groups) ++counts[static_cast<std::size_t>(g)];
  if (std::any_of(counts.begin(), counts.end(),
                  [&](std::size_t c) { return c != sampler_.per_group(); })) {
    ++unbalanced_batches_;
  }
  return b;
}

Vector FairnessProblem::objective_gradient(const Vector& x, std::uint64_t sample) const {
  return bce_parameter_gradient(net_, x, batch(sample));
}

ConstraintSample FairnessProblem::constraints(const Vector& x, std::uint64_t sample,
                                              bool with_jacobian) const {
  return fairness_constraint_sample(net_, x, batch(sample), fairness_, with_jacobian);
}

// --- Runs ------------------------------------------------------------------

namespace {

bool record_is_finite(const TraceRecord& r) {
  return std::isfinite(r.train_loss) && std::isfinite(r.test_loss) &&
         r.train_constraints.allFinite() && r.test_constraints.allFinite();
}

}  // namespace

RunResult run_single(const ExperimentConfig& cfg, const ExperimentData& data, std::uint64_t seed) {
  cfg.validate();
  const NetworkSpec net = network_for(cfg, data.train);
  FairnessSpec fairness;
  fairness.group_count = data.train.group_count;
  fairness.bound = cfg.fairness_bound;
  const FairnessProblem problem(net, data.train, fairness, cfg.per_group, mix_seed(seed, 0xba7c4));

  RunResult result;
  result.algorithm = cfg.algorithm;
  result.seed = seed;

  const Vector x0 = init_network(net, seed);
  SslAlmState alm;
  SswState ssw;
  AdamState adam;
  switch (cfg.algorithm) {
    case Algorithm::SslAlm:
      alm = ssl_alm_init(x0, fairness.constraint_count());
      result.min_slack = std::numeric_limits<double>::infinity();
      break;
    case Algorithm::Ssw:
      ssw = ssw_init(x0, cfg.ssw);
      break;
    case Algorithm::Adam:
      adam = adam_init(x0, cfg.adam);
      break;
  }
  auto params = [&]() -> const Vector& {
    switch (cfg.algorithm) {
      case Algorithm::SslAlm:
        return alm.x;
      case Algorithm::Ssw:
        return ssw.x;
      case Algorithm::Adam:
        break;
    }
    return adam.x;
  };

  std::uint64_t next_sample = 0;
  auto step = [&](std::uint64_t iteration) {
    switch (cfg.algorithm) {
      case Algorithm::SslAlm: {
        alm = ssl_alm_iterate(std::move(alm), problem, next_sample, cfg.ssl_alm);
        result.max_dual_norm = std::max(result.max_dual_norm, alm.y.lpNorm<Eigen::Infinity>());
        if (alm.s.size() > 0) result.min_slack = std::min(result.min_slack, alm.s.minCoeff());
        break;
      }
      case Algorithm::Ssw: {
        const double log_eps = ssw.log_eps;
        const SswEstimate estimate = ssw_iterate(ssw, problem, next_sample, cfg.ssw);
        result.switch_log.push_back({iteration, estimate.value, log_eps, ssw.last_branch});
        break;
      }
      case Algorithm::Adam:
        adam = adam_step(std::move(adam), problem.objective_gradient(adam.x, next_sample++));
        break;
    }
  };

  auto record = [&](double wall_time, std::uint64_t iteration) {
    TraceRecord r = evaluate(net, params(), data, fairness);
    r.wall_time = wall_time;
    r.iteration = iteration;
    if (cfg.algorithm == Algorithm::Ssw) r.branch = ssw.last_branch;
    if (cfg.algorithm == Algorithm::SslAlm) r.dual_norm = alm.y.lpNorm<Eigen::Infinity>();
    const bool finite = record_is_finite(r);
    result.trace.push_back(std::move(r));
    if (!finite) {
      result.aborted = true;
      result.diagnostic = "non-finite loss or constraint at iteration " + std::to_string(iteration);
    }
    return finite;
  };

  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(Clock::now() - start).count(); };

  std::uint64_t iteration = 0;
  if (!record(0.0, 0)) return result;
  while (true) {
    const double now = elapsed();
    if (now >= cfg.budget_seconds) break;
    if (cfg.max_iterations != 0 && iteration >= cfg.max_iterations) break;
    try {
      step(iteration);
    } catch (const NumericalError& e) {
      result.aborted = true;
      result.diagnostic = e.what();
      break;
    }
    ++iteration;
    if (iteration % cfg.eval_interval == 0 && !record(elapsed(), iteration)) break;
  }
  result.iterations = iteration;
  if (!result.aborted) record(elapsed(), iteration);

  result.batches_drawn = problem.batches_drawn();
  result.unbalanced_batches = problem.unbalanced_batches();
  if (!std::isfinite(result.min_slack)) result.min_slack = 0.0;
  return result;
}

RunResult run_single(const ExperimentConfig& cfg, std::uint64_t seed) {
  return run_single(cfg, prepare_data(cfg), seed);
}

std::size_t concurrency_from_env(std::size_t repeats) {
  std::size_t threads = repeats;
  if (const char* env = std::getenv("HCT_THREADS"); env != nullptr && *env != '\0') {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) threads = static_cast<std::size_t>(v);
  }
  return std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(repeats, 1));
}

std::vector<RunResult> run_repeats(const ExperimentConfig& cfg, const ExperimentData& data,
                                   std::size_t threads) {
  cfg.validate();
  if (threads == 0) threads = concurrency_from_env(cfg.repeats);
  threads = std::clamp<std::size_t>(threads, 1, cfg.repeats);

  std::vector<RunResult> results(cfg.repeats);
  std::vector<std::exception_ptr> errors(cfg.repeats);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cfg.repeats; i = next++) {
      try {
        results[i] = run_single(cfg, data, cfg.base_seed + i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

// --- Aggregation -----------------------------------------------------------

std::int64_t time_bin_index(double seconds) {
  return static_cast<std::int64_t>(std::floor(seconds * 10.0 + 0.5));
}

std::vector<std::string> trace_statistic_names(std::size_t m, std::size_t groups) {
  std::vector<std::string> names{"train_loss", "test_loss"};
  for (std::size_t i = 0; i < m; ++i) names.push_back("train_c" + std::to_string(i));
  for (std::size_t i = 0; i < m; ++i) names.push_back("test_c" + std::to_string(i));
  for (std::size_t g = 0; g < groups; ++g) names.push_back("train_gap" + std::to_string(g));
  for (std::size_t g = 0; g < groups; ++g) names.push_back("test_gap" + std::to_string(g));
  return names;
}

std::vector<double> trace_statistics(const TraceRecord& r) {
  std::vector<double> v{r.train_loss, r.test_loss};
  auto append = [&v](const Vector& x) { v.insert(v.end(), x.data(), x.data() + x.size()); };
  append(r.train_constraints);
  append(r.test_constraints);
  append(r.hard_gaps_train);
  append(r.hard_gaps_test);
  return v;
}

AggregateSeries aggregate(const std::vector<std::vector<TraceRecord>>& runs) {
  if (runs.empty()) throw std::invalid_argument("aggregate needs at least one run");

  AggregateSeries series;
  bool named = false;
  // Per run: bin -> statistics of the last record falling into it.
  std::vector<std::map<std::int64_t, std::vector<double>>> binned(runs.size());
  for (std::size_t r = 0; r < runs.size(); ++r) {
    for (const auto& record : runs[r]) {
      if (!named) {
        series.statistics =
            trace_statistic_names(static_cast<std::size_t>(record.train_constraints.size()),
                                  static_cast<std::size_t>(record.hard_gaps_train.size()));
        named = true;
      }
      auto stats = trace_statistics(record);
      if (stats.size() != series.statistics.size()) {
        throw DimensionError("trace records disagree on constraint or group count");
      }
      binned[r][time_bin_index(record.wall_time)] = std::move(stats);
    }
  }
  if (!named) return series;

  std::int64_t first = std::numeric_limits<std::int64_t>::max();
  std::int64_t last = std::numeric_limits<std::int64_t>::min();
  for (const auto& bins : binned) {
    if (bins.empty()) continue;
    first = std::min(first, bins.begin()->first);
    last = std::max(last, bins.rbegin()->first);
  }

  const std::size_t k = series.statistics.size();
  std::vector<std::map<std::int64_t, std::vector<double>>::const_iterator> cursor;
  std::vector<const std::vector<double>*> carried(runs.size(), nullptr);
  for (const auto& bins : binned) cursor.push_back(bins.begin());

  for (std::int64_t bin = first; bin <= last; ++bin) {
    AggregateRow row;
    row.time_bin = static_cast<double>(bin) / 10.0;
    row.mean.assign(k, 0.0);
    row.min.assign(k, std::numeric_limits<double>::infinity());
    row.max.assign(k, -std::numeric_limits<double>::infinity());
    std::size_t contributors = 0;
    for (std::size_t r = 0; r < runs.size(); ++r) {
      while (cursor[r] != binned[r].end() && cursor[r]->first <= bin) {
        carried[r] = &cursor[r]->second;
        ++cursor[r];
      }
      if (carried[r] == nullptr) continue;
      ++contributors;
      for (std::size_t j = 0; j < k; ++j) {
        const double v = (*carried[r])[j];
        row.mean[j] += v;
        row.min[j] = std::min(row.min[j], v);
        row.max[j] = std::max(row.max[j], v);
      }
    }
    if (contributors == 0) continue;
    for (std::size_t j = 0; j < k; ++j) {
      row.mean[j] /= static_cast<double>(contributors);
      // Summation error can push the mean a hair outside [min, max].
      row.mean[j] = std::clamp(row.mean[j], row.min[j], row.max[j]);
    }
    series.rows.push_back(std::move(row));
  }
  return series;
}

// --- Experiment output -----------------------------------------------------

std::vector<RunResult> run_experiment(const ExperimentConfig& cfg, const ExperimentData& data) {
  auto results = run_repeats(cfg, data);
  const auto& dir = cfg.output_dir;
  std::filesystem::create_directories(dir);
  const std::string name = to_string(cfg.algorithm);

  std::vector<std::vector<TraceRecord>> traces;
  nlohmann::json summary;
  summary["algorithm"] = name;
  summary["runs"] = nlohmann::json::array();
  for (const auto& run : results) {
    emit_trace_csv(run.trace, dir / ("trace_" + name + "_seed" + std::to_string(run.seed) + ".csv"));
    traces.push_back(run.trace);

    nlohmann::json entry;
    entry["seed"] = run.seed;
    entry["iterations"] = run.iterations;
    entry["aborted"] = run.aborted;
    if (run.aborted) entry["diagnostic"] = run.diagnostic;
    entry["batches_drawn"] = run.batches_drawn;
    entry["unbalanced_batches"] = run.unbalanced_batches;
    if (!run.trace.empty()) {
      const auto& final_record = run.trace.back();
      entry["final_wall_time"] = final_record.wall_time;
      entry["final_train_loss"] = final_record.train_loss;
      entry["final_test_loss"] = final_record.test_loss;
      entry["final_max_train_constraint"] = final_record.train_constraints.maxCoeff();
      entry["final_max_train_hard_gap"] = final_record.hard_gaps_train.maxCoeff();
    }
    if (cfg.algorithm == Algorithm::SslAlm) {
      entry["max_dual_norm"] = run.max_dual_norm;
      entry["min_slack"] = run.min_slack;
    }
    if (cfg.algorithm == Algorithm::Ssw) {
      std::size_t constraint_steps = 0;
      for (const auto& e : run.switch_log) constraint_steps += e.branch == Branch::Constraint;
      entry["constraint_steps"] = constraint_steps;
    }
    summary["runs"].push_back(std::move(entry));
  }

  const AggregateSeries series = aggregate(traces);
  emit_csv(series, dir / ("aggregate_" + name + ".csv"));
  emit_plot_data(series, dir, "plot_" + name);

  std::ofstream out(dir / ("summary_" + name + ".json"));
  out << summary.dump(2) << '\n';
  if (!out) throw DataError("cannot write summary to " + dir.string());
  return results;
}

}  // namespace hct
