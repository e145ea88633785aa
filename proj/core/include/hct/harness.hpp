#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hct/config.hpp"
#include "hct/data.hpp"
#include "hct/mlp.hpp"
#include "hct/objectives.hpp"
#include "hct/optimizers.hpp"

namespace hct {

/// Full-split statistics at one point of a run.
struct TraceRecord {
  double wall_time = 0.0;
  std::uint64_t iteration = 0;
  double train_loss = 0.0;
  double test_loss = 0.0;
  Vector train_constraints;  // soft, split form; length m
  Vector test_constraints;
  Vector hard_gaps_train;    // |hard rate_g - hard rate_all|; length |G|
  Vector hard_gaps_test;
  std::optional<Branch> branch;  // SSw only
  double dual_norm = 0.0;        // ||y||_inf, SSL-ALM only
};

/// One SSw decision: the estimate compared against eps_k and the branch taken.
struct SwitchEvent {
  std::uint64_t iteration = 0;
  double estimate = 0.0;
  double log_eps = 0.0;
  Branch branch = Branch::Objective;
};

struct RunResult {
  Algorithm algorithm = Algorithm::Adam;
  std::uint64_t seed = 0;
  std::vector<TraceRecord> trace;
  std::vector<SwitchEvent> switch_log;
  std::uint64_t iterations = 0;
  /// Worst values of the SSL-ALM iterate invariants over every step.
  double max_dual_norm = 0.0;
  double min_slack = 0.0;
  std::uint64_t batches_drawn = 0;
  std::uint64_t unbalanced_batches = 0;
  bool aborted = false;
  std::string diagnostic;
};

/// Scaled train/test splits ready for training.
struct ExperimentData {
  Dataset train;
  Dataset test;
};

/// Loads (or synthesizes) the data, splits with split_seed, and standardizes
/// both splits with a scaler fitted on train.
ExperimentData prepare_data(const ExperimentConfig& cfg);

NetworkSpec network_for(const ExperimentConfig& cfg, const Dataset& train);

/// Full-split evaluation of a parameter vector.
TraceRecord evaluate(const NetworkSpec& net, const Vector& params, const ExperimentData& data,
                     const FairnessSpec& fairness);

/// Balanced-minibatch view of the fairness-constrained training problem:
/// objective mean BCE, constraints the split positive-rate gaps.
class FairnessProblem final : public SampledProblem {
 public:
  FairnessProblem(NetworkSpec net, const Dataset& train, FairnessSpec fairness,
                  std::size_t per_group, std::uint64_t seed);

  std::size_t dimension() const override { return net_.parameter_count(); }
  std::size_t constraint_count() const override { return fairness_.constraint_count(); }
  Vector objective_gradient(const Vector& x, std::uint64_t sample) const override;
  ConstraintSample constraints(const Vector& x, std::uint64_t sample,
                               bool with_jacobian) const override;

  GroupedBatch batch(std::uint64_t sample) const;
  std::uint64_t batches_drawn() const { return batches_drawn_; }
  std::uint64_t unbalanced_batches() const { return unbalanced_batches_; }

 private:
  NetworkSpec net_;
  FairnessSpec fairness_;
  BalancedSampler sampler_;
  std::uint64_t seed_;
  // Audit counters; a problem instance is owned by a single run.
  mutable std::uint64_t batches_drawn_ = 0;
  mutable std::uint64_t unbalanced_batches_ = 0;
};

/// Trains one network with cfg.algorithm until the wall-clock budget (or
/// max_iterations) is reached. Statistics are recorded at iteration 0,
/// every eval_interval iterations, and once more at the stop.
RunResult run_single(const ExperimentConfig& cfg, const ExperimentData& data, std::uint64_t seed);
RunResult run_single(const ExperimentConfig& cfg, std::uint64_t seed);

/// Runs seeds base_seed .. base_seed + repeats - 1, at most `threads` at a
/// time (0: read HCT_THREADS, default repeats).
std::vector<RunResult> run_repeats(const ExperimentConfig& cfg, const ExperimentData& data,
                                   std::size_t threads = 0);

/// Worker count from HCT_THREADS, clamped to [1, repeats].
std::size_t concurrency_from_env(std::size_t repeats);

// ---------------------------------------------------------------------------
// Aggregation over repeats
// ---------------------------------------------------------------------------

struct AggregateRow {
  double time_bin = 0.0;
  std::vector<double> mean;
  std::vector<double> min;
  std::vector<double> max;
};

/// Per 0.1 s bin, mean/min/max of every traced statistic across runs.
struct AggregateSeries {
  std::vector<std::string> statistics;
  std::vector<AggregateRow> rows;
};

/// Nearest 0.1 s bin, halves rounded up: 0.24 -> 2, 0.25 -> 3.
std::int64_t time_bin_index(double seconds);

/// train_loss, test_loss, train_c*, test_c*, train_gap*, test_gap*.
std::vector<std::string> trace_statistic_names(std::size_t m, std::size_t groups);
std::vector<double> trace_statistics(const TraceRecord& record);

/// Within a run the last record of a bin represents it, and empty bins carry
/// the previous observation forward. Throws std::invalid_argument on empty input.
AggregateSeries aggregate(const std::vector<std::vector<TraceRecord>>& runs);

// ---------------------------------------------------------------------------
// CSV output
// ---------------------------------------------------------------------------

std::string trace_csv_header(std::size_t m, std::size_t groups);
void emit_trace_csv(const std::vector<TraceRecord>& trace, const std::filesystem::path& path);
std::vector<TraceRecord> parse_trace_csv(const std::filesystem::path& path);

void emit_csv(const AggregateSeries& series, const std::filesystem::path& path);
AggregateSeries parse_aggregate_csv(const std::filesystem::path& path);

/// One file per panel (loss and each constraint) named <prefix>_<panel>.csv
/// with columns time_bin, train_mean, train_min, train_max, test_mean,
/// test_min, test_max. Returns the written paths.
std::vector<std::filesystem::path> emit_plot_data(const AggregateSeries& series,
                                                  const std::filesystem::path& dir,
                                                  const std::string& prefix);

/// Writes traces, aggregate, plot data and a JSON summary for one algorithm
/// into cfg.output_dir. Returns the results for further checks.
std::vector<RunResult> run_experiment(const ExperimentConfig& cfg, const ExperimentData& data);

}  // namespace hct
