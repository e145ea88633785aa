#include "hct/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

namespace hct {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

double to_double(const std::string& key, const std::string& value) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw ConfigError("config key '" + key + "': '" + value + "' is not a number");
  }
  return out;
}

std::uint64_t to_uint(const std::string& key, const std::string& value) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw ConfigError("config key '" + key + "': '" + value + "' is not a non-negative integer");
  }
  return out;
}

std::string from_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<std::size_t> to_dims(const std::string& key, const std::string& value) {
  std::vector<std::size_t> dims;
  if (trim(value).empty() || lower(trim(value)) == "none") return dims;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) dims.push_back(to_uint(key, trim(item)));
  return dims;
}

std::string from_dims(const std::vector<std::size_t>& dims) {
  if (dims.empty()) return "none";
  std::string out;
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(dims[i]);
  }
  return out;
}

struct Field {
  std::string key;
  std::function<void(ExperimentConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

template <typename Member>
Field real_field(std::string key, Member member) {
  return {std::move(key),
          [member](ExperimentConfig& c, const std::string& k, const std::string& v) {
            member(c) = to_double(k, v);
          },
          [member](const ExperimentConfig& c) {
            return from_double(member(c));
          }};
}

template <typename Member>
Field count_field(std::string key, Member member) {
  return {std::move(key),
          [member](ExperimentConfig& c, const std::string& k, const std::string& v) {
            using T = std::remove_reference_t<decltype(member(c))>;
            member(c) = static_cast<T>(to_uint(k, v));
          },
          [member](const ExperimentConfig& c) {
            return std::to_string(member(c));
          }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f;
    f.push_back({"algorithm",
                  [](ExperimentConfig& c, const std::string&, const std::string& v) {
                    c.algorithm = parse_algorithm(v);
                  },
                  [](const ExperimentConfig& c) { return to_string(c.algorithm); }});
    f.push_back({"data.csv",
                  [](ExperimentConfig& c, const std::string&, const std::string& v) {
                    if (v.empty()) {
                      c.data.csv.reset();
                    } else {
                      c.data.csv = v;
                    }
                  },
                  [](const ExperimentConfig& c) {
                    return c.data.csv ? c.data.csv->string() : std::string{};
                  }});
    f.push_back({"data.label_column",
                  [](ExperimentConfig& c, const std::string&, const std::string& v) {
                    c.data.label_column = v;
                  },
                  [](const ExperimentConfig& c) { return c.data.label_column; }});
    f.push_back({"data.group_column",
                  [](ExperimentConfig& c, const std::string&, const std::string& v) {
                    c.data.group_column = v;
                  },
                  [](const ExperimentConfig& c) { return c.data.group_column; }});
    f.push_back(count_field("synth.rows", [](auto& c) -> auto& { return c.data.synthetic.rows; }));
    f.push_back(count_field("synth.groups", [](auto& c) -> auto& { return c.data.synthetic.groups; }));
    f.push_back(count_field("synth.features", [](auto& c) -> auto& { return c.data.synthetic.features; }));
    f.push_back(real_field("synth.label_gap", [](auto& c) -> auto& { return c.data.synthetic.label_gap; }));
    f.push_back(real_field("synth.signal", [](auto& c) -> auto& { return c.data.synthetic.signal; }));
    f.push_back(count_field("synth.seed", [](auto& c) -> auto& { return c.data.synthetic.seed; }));
    f.push_back({"network.hidden",
                  [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                    c.hidden_dims = to_dims(k, v);
                  },
                  [](const ExperimentConfig& c) { return from_dims(c.hidden_dims); }});
    f.push_back(real_field("fairness.bound", [](auto& c) -> auto& { return c.fairness_bound; }));
    f.push_back(real_field("ssl_alm.mu", [](auto& c) -> auto& { return c.ssl_alm.mu; }));
    f.push_back(real_field("ssl_alm.rho", [](auto& c) -> auto& { return c.ssl_alm.rho; }));
    f.push_back(real_field("ssl_alm.tau", [](auto& c) -> auto& { return c.ssl_alm.tau; }));
    f.push_back(real_field("ssl_alm.eta", [](auto& c) -> auto& { return c.ssl_alm.eta; }));
    f.push_back(real_field("ssl_alm.beta", [](auto& c) -> auto& { return c.ssl_alm.beta; }));
    f.push_back(real_field("ssl_alm.dual_bound", [](auto& c) -> auto& { return c.ssl_alm.dual_bound; }));
    f.push_back(real_field("ssw.eta_f", [](auto& c) -> auto& { return c.ssw.eta_f; }));
    f.push_back(real_field("ssw.eta_c", [](auto& c) -> auto& { return c.ssw.eta_c; }));
    f.push_back(real_field("ssw.eps0", [](auto& c) -> auto& { return c.ssw.eps0; }));
    f.push_back(count_field("ssw.samples", [](auto& c) -> auto& { return c.ssw.constraint_samples; }));
    f.push_back(real_field("adam.lr", [](auto& c) -> auto& { return c.adam.lr; }));
    f.push_back(real_field("adam.beta1", [](auto& c) -> auto& { return c.adam.beta1; }));
    f.push_back(real_field("adam.beta2", [](auto& c) -> auto& { return c.adam.beta2; }));
    f.push_back(real_field("adam.eps", [](auto& c) -> auto& { return c.adam.eps_hat; }));
    f.push_back(real_field("budget_seconds", [](auto& c) -> auto& { return c.budget_seconds; }));
    f.push_back(count_field("repeats", [](auto& c) -> auto& { return c.repeats; }));
    f.push_back(count_field("per_group", [](auto& c) -> auto& { return c.per_group; }));
    f.push_back(count_field("base_seed", [](auto& c) -> auto& { return c.base_seed; }));
    f.push_back(count_field("split_seed", [](auto& c) -> auto& { return c.split_seed; }));
    f.push_back(real_field("test_fraction", [](auto& c) -> auto& { return c.test_fraction; }));
    f.push_back(count_field("eval_interval", [](auto& c) -> auto& { return c.eval_interval; }));
    f.push_back(count_field("max_iterations", [](auto& c) -> auto& { return c.max_iterations; }));
    f.push_back({"output_dir",
                  [](ExperimentConfig& c, const std::string&, const std::string& v) {
                    c.output_dir = v;
                  },
                  [](const ExperimentConfig& c) { return c.output_dir.string(); }});
    return f;
  }();
  return table;
}

}  // namespace

std::string to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::Adam:
      return "adam";
    case Algorithm::SslAlm:
      return "ssl_alm";
    case Algorithm::Ssw:
      return "ssw";
  }
  return "unknown";
}

Algorithm parse_algorithm(const std::string& name) {
  const auto n = lower(trim(name));
  if (n == "adam") return Algorithm::Adam;
  if (n == "ssl_alm" || n == "ssl-alm" || n == "sslalm") return Algorithm::SslAlm;
  if (n == "ssw") return Algorithm::Ssw;
  throw ConfigError("unknown algorithm '" + name + "' (expected adam, ssl_alm or ssw)");
}

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError(msg); };
  if (!(budget_seconds > 0.0)) fail("budget_seconds must be > 0");
  if (repeats < 1) fail("repeats must be >= 1");
  if (per_group < 1) fail("per_group must be >= 1");
  if (eval_interval < 1) fail("eval_interval must be >= 1");
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) fail("test_fraction must lie in (0, 1)");
  if (!(fairness_bound > 0.0)) fail("fairness.bound must be > 0");
  for (auto h : hidden_dims) {
    if (h == 0) fail("network.hidden widths must be >= 1");
  }
  try {
    ssl_alm.validate();
    ssw.validate();
    adam.validate();
    if (!data.csv) data.synthetic.validate();
  } catch (const std::invalid_argument& e) {
    fail(e.what());
  }
}

void set_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  for (const auto& field : fields()) {
    if (field.key == key) {
      field.set(cfg, key, trim(value));
      return;
    }
  }
  throw ConfigError("unknown config key '" + key + "'");
}

ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig cfg;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    set_config_value(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  return parse_config(in);
}

std::string format_config(const ExperimentConfig& cfg) {
  std::string out;
  for (const auto& field : fields()) out += field.key + " = " + field.get(cfg) + "\n";
  return out;
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& field : fields()) k.push_back(field.key);
    return k;
  }();
  return keys;
}

}  // namespace hct
