#include <doctest.h>

#include <cmath>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "hct/harness.hpp"

using namespace hct;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path dir =
      fs::temp_directory_path() / ("hct_harness_" + std::to_string(::getpid())) / name;
  fs::create_directories(dir);
  return dir;
}

TraceRecord record(double t, double loss) {
  TraceRecord r;
  r.wall_time = t;
  r.train_loss = loss;
  r.test_loss = loss + 1.0;
  r.train_constraints = Vector::Constant(2, loss);
  r.test_constraints = Vector::Constant(2, -loss);
  r.hard_gaps_train = Vector::Constant(1, 0.5);
  r.hard_gaps_test = Vector::Constant(1, 0.25);
  return r;
}

ExperimentConfig small_config(Algorithm algorithm) {
  ExperimentConfig cfg;
  cfg.algorithm = algorithm;
  cfg.data.synthetic.rows = 200;
  cfg.hidden_dims = {8};
  cfg.max_iterations = 60;
  cfg.budget_seconds = 1e6;
  cfg.eval_interval = 10;
  cfg.repeats = 2;
  return cfg;
}

}  // namespace

TEST_CASE("time bins round halves up") {
  CHECK(time_bin_index(0.0) == 0);
  CHECK(time_bin_index(0.24) == 2);
  CHECK(time_bin_index(0.25) == 3);
  CHECK(time_bin_index(0.26) == 3);
  CHECK(time_bin_index(1.04) == 10);
}

TEST_CASE("aggregate: last record per bin, carry forward, bounds") {
  // run A: bins 0, 1 (two records, the later wins), 3
  std::vector<TraceRecord> a{record(0.0, 1.0), record(0.06, 5.0), record(0.12, 3.0),
                             record(0.31, 2.0)};
  // run B: bins 0 and 2
  std::vector<TraceRecord> b{record(0.01, 2.0), record(0.2, 4.0)};
  const AggregateSeries s = aggregate({a, b});
  REQUIRE(s.rows.size() == 4);
  CHECK(s.statistics.size() == 2 + 2 * 2 + 2 * 1);
  CHECK(s.rows[0].mean[0] == doctest::Approx(1.5));
  CHECK(s.rows[1].time_bin == doctest::Approx(0.1));
  CHECK(s.rows[1].mean[0] == doctest::Approx(2.5));  // A: 3 (last in bin), B carried: 2
  CHECK(s.rows[2].mean[0] == doctest::Approx(3.5));  // A carried 3, B: 4
  CHECK(s.rows[3].mean[0] == doctest::Approx(3.0));  // A: 2, B carried 4
  CHECK(s.rows[3].min[0] == 2.0);
  CHECK(s.rows[3].max[0] == 4.0);
  for (const auto& row : s.rows) {
    for (std::size_t j = 0; j < s.statistics.size(); ++j) {
      CHECK(row.min[j] <= row.mean[j]);
      CHECK(row.mean[j] <= row.max[j]);
    }
  }

  // a run that starts late only contributes from its first bin on
  std::vector<TraceRecord> late{record(0.2, 10.0)};
  const AggregateSeries s2 = aggregate({a, late});
  CHECK(s2.rows[0].mean[0] == doctest::Approx(1.0));
  CHECK(s2.rows[2].mean[0] == doctest::Approx(6.5));
  CHECK_THROWS_AS(aggregate({}), std::invalid_argument);
}

TEST_CASE("trace and aggregate csv round trip") {
  const auto dir = scratch_dir("csv");
  std::vector<TraceRecord> trace{record(0.0, 0.1 + 0.2), record(0.123456789, 1.0 / 3.0)};
  trace[1].iteration = 20;
  emit_trace_csv(trace, dir / "trace.csv");
  const auto back = parse_trace_csv(dir / "trace.csv");
  REQUIRE(back.size() == 2);
  CHECK(back[1].wall_time == trace[1].wall_time);
  CHECK(back[1].iteration == 20);
  CHECK(back[1].train_loss == trace[1].train_loss);
  CHECK(back[0].train_constraints == trace[0].train_constraints);
  CHECK(back[1].hard_gaps_test == trace[1].hard_gaps_test);
  CHECK(trace_csv_header(2, 1) ==
        "wall_time,iteration,train_loss,test_loss,train_c0,train_c1,test_c0,test_c1,"
        "train_gap0,test_gap0");

  const AggregateSeries s = aggregate({trace, trace});
  emit_csv(s, dir / "agg.csv");
  const AggregateSeries s2 = parse_aggregate_csv(dir / "agg.csv");
  CHECK(s2.statistics == s.statistics);
  REQUIRE(s2.rows.size() == s.rows.size());
  for (std::size_t i = 0; i < s.rows.size(); ++i) {
    CHECK(s2.rows[i].mean == s.rows[i].mean);
    CHECK(s2.rows[i].min == s.rows[i].min);
    CHECK(s2.rows[i].max == s.rows[i].max);
  }

  const auto panels = emit_plot_data(s, dir, "plot_x");
  CHECK(panels.size() == 3);  // loss, c0, c1
  CHECK(fs::exists(dir / "plot_x_loss.csv"));
  CHECK(fs::exists(dir / "plot_x_c1.csv"));
}

TEST_CASE("same config and seed give identical traces") {
  for (auto alg : {Algorithm::Adam, Algorithm::SslAlm, Algorithm::Ssw}) {
    const ExperimentConfig cfg = small_config(alg);
    const ExperimentData data = prepare_data(cfg);
    const RunResult a = run_single(cfg, data, 3);
    const RunResult b = run_single(cfg, data, 3);
    CHECK(a.iterations == 60);
    REQUIRE(a.trace.size() == b.trace.size());
    CHECK(a.trace.size() == 1 + 6 + 1);
    for (std::size_t i = 0; i < a.trace.size(); ++i) {
      CHECK(a.trace[i].iteration == b.trace[i].iteration);
      CHECK(a.trace[i].train_loss == b.trace[i].train_loss);
      CHECK(a.trace[i].train_constraints == b.trace[i].train_constraints);
    }
    CHECK(a.unbalanced_batches == 0);
    CHECK(a.batches_drawn > 0);
    CHECK_FALSE(a.aborted);
    if (alg == Algorithm::Ssw) CHECK(a.switch_log.size() == 60);
    if (alg == Algorithm::SslAlm) {
      CHECK(a.min_slack >= 0.0);
      CHECK(a.max_dual_norm <= 100.0);
    }
  }
}

TEST_CASE("initial loss is near ln 2") {
  const ExperimentConfig cfg = small_config(Algorithm::Adam);
  const ExperimentData data = prepare_data(cfg);
  const TraceRecord r = evaluate(network_for(cfg, data.train), init_network(network_for(cfg, data.train), 0),
                                 data, FairnessSpec{});
  CHECK(r.train_loss == doctest::Approx(std::log(2.0)).epsilon(0.1));
  CHECK(r.train_constraints.size() == 4);
  CHECK(r.hard_gaps_train.size() == 2);
}

TEST_CASE("repeats run in parallel and write outputs") {
  ExperimentConfig cfg = small_config(Algorithm::Ssw);
  cfg.output_dir = scratch_dir("exp");
  const ExperimentData data = prepare_data(cfg);
  const auto results = run_experiment(cfg, data);
  REQUIRE(results.size() == 2);
  CHECK(results[0].seed == 0);
  CHECK(results[1].seed == 1);
  CHECK(fs::exists(cfg.output_dir / "trace_ssw_seed0.csv"));
  CHECK(fs::exists(cfg.output_dir / "trace_ssw_seed1.csv"));
  CHECK(fs::exists(cfg.output_dir / "aggregate_ssw.csv"));
  CHECK(fs::exists(cfg.output_dir / "summary_ssw.json"));
  CHECK(fs::exists(cfg.output_dir / "plot_ssw_loss.csv"));

  const auto serial = run_repeats(cfg, data, 1);
  CHECK(serial[1].trace.back().train_loss == results[1].trace.back().train_loss);
}

TEST_CASE("thread count from environment") {
  ::setenv("HCT_THREADS", "2", 1);
  CHECK(concurrency_from_env(5) == 2);
  ::setenv("HCT_THREADS", "99", 1);
  CHECK(concurrency_from_env(5) == 5);
  ::setenv("HCT_THREADS", "junk", 1);
  CHECK(concurrency_from_env(3) == 3);
  ::unsetenv("HCT_THREADS");
}

TEST_CASE("csv column counts and empty series") {
  const auto dir = scratch_dir("cols");
  const std::size_t m = 4, groups = 2;
  const auto header = trace_csv_header(m, groups);
  CHECK(std::count(header.begin(), header.end(), ',') + 1 == 2 + 2 * (1 + m + groups));

  TraceRecord r = record(0.0, 1.0);
  r.train_constraints = Vector::Zero(4);
  r.test_constraints = Vector::Zero(4);
  r.hard_gaps_train = Vector::Zero(2);
  r.hard_gaps_test = Vector::Zero(2);
  emit_csv(aggregate({{r}}), dir / "agg.csv");
  std::ifstream in(dir / "agg.csv");
  std::string line;
  std::getline(in, line);
  CHECK(std::count(line.begin(), line.end(), ',') + 1 == 1 + 6 * (1 + m + groups));

  emit_csv(AggregateSeries{}, dir / "empty.csv");
  std::ifstream empty(dir / "empty.csv");
  std::string all((std::istreambuf_iterator<char>(empty)), std::istreambuf_iterator<char>());
  CHECK(all == "time_bin\n");
  CHECK(parse_aggregate_csv(dir / "empty.csv").rows.empty());
}
