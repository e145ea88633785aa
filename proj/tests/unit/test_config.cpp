#include <doctest.h>

#include <sstream>

#include "hct/config.hpp"

using namespace hct;

TEST_CASE("defaults") {
  const ExperimentConfig cfg;
  CHECK(cfg.ssl_alm.mu == 2.0);
  CHECK(cfg.ssl_alm.rho == 1.0);
  CHECK(cfg.ssl_alm.tau == 0.05);
  CHECK(cfg.ssl_alm.eta == 0.1);
  CHECK(cfg.ssl_alm.beta == 0.5);
  CHECK(cfg.ssl_alm.dual_bound == 100.0);
  CHECK(cfg.ssw.eta_f == 0.01);
  CHECK(cfg.ssw.eps0 == 0.1);
  CHECK(cfg.fairness_bound == 0.05);
  CHECK(cfg.budget_seconds == 60.0);
  CHECK(cfg.repeats == 5);
  CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("parse key = value lines") {
  std::istringstream in(
      "# comment\n"
      "algorithm = SSW\n"
      "network.hidden = 8, 4   # trailing comment\n"
      "ssw.eps0=0.2\n"
      "\n"
      "repeats = 3\n"
      "data.csv = /tmp/x.csv\n");
  const ExperimentConfig cfg = parse_config(in);
  CHECK(cfg.algorithm == Algorithm::Ssw);
  CHECK(cfg.hidden_dims == std::vector<std::size_t>{8, 4});
  CHECK(cfg.ssw.eps0 == 0.2);
  CHECK(cfg.repeats == 3);
  REQUIRE(cfg.data.csv);
  CHECK(cfg.data.csv->string() == "/tmp/x.csv");
}

TEST_CASE("format_config round trips") {
  ExperimentConfig cfg;
  cfg.algorithm = Algorithm::Adam;
  cfg.adam.lr = 0.1 + 0.2;
  cfg.hidden_dims.clear();
  cfg.max_iterations = 17;
  std::istringstream in(format_config(cfg));
  const ExperimentConfig back = parse_config(in);
  CHECK(format_config(back) == format_config(cfg));
  CHECK(back.adam.lr == cfg.adam.lr);
  CHECK(back.hidden_dims.empty());
  CHECK(config_keys().size() == 35);
}

TEST_CASE("config errors") {
  ExperimentConfig cfg;
  CHECK_THROWS_AS(set_config_value(cfg, "nope", "1"), ConfigError);
  CHECK_THROWS_AS(set_config_value(cfg, "repeats", "-1"), ConfigError);
  CHECK_THROWS_AS(set_config_value(cfg, "ssl_alm.tau", "fast"), ConfigError);
  CHECK_THROWS_AS(set_config_value(cfg, "algorithm", "sgd"), ConfigError);
  std::istringstream in("just words\n");
  CHECK_THROWS_AS(parse_config(in), ConfigError);
  cfg.test_fraction = 1.5;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.ssl_alm.beta = 2.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/hct.cfg"), ConfigError);
  CHECK(parse_algorithm("SSL-ALM") == Algorithm::SslAlm);
}
