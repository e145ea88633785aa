#include "hct/data.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <unordered_map>

namespace hct {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(trim(std::string_view(line).substr(start)));
      break;
    }
    fields.push_back(trim(std::string_view(line).substr(start, comma - start)));
    start = comma + 1;
  }
  return fields;
}

bool parse_double(const std::string& cell, double& out) {
  if (cell.empty()) return false;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && std::isfinite(out);
}

double parse_label(const std::string& cell, std::size_t line_no) {
  std::string lower = cell;
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "true") return 1.0;
  if (lower == "false") return 0.0;
  double v = 0.0;
  if (parse_double(cell, v) && (v == 0.0 || v == 1.0)) return v;
  throw DataError("line " + std::to_string(line_no) + ": label '" + cell + "' is not binary");
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void Dataset::validate() const {
  const Eigen::Index n = features.rows();
  require_same_size(labels.size(), n, "dataset labels");
  require_same_size(static_cast<Eigen::Index>(groups.size()), n, "dataset groups");
  if (!feature_names.empty()) {
    require_same_size(static_cast<Eigen::Index>(feature_names.size()), features.cols(),
                      "feature names");
  }
  if (group_count == 0) throw DataError("dataset has no groups");
  std::vector<std::size_t> counts(group_count, 0);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int g = groups[static_cast<std::size_t>(i)];
    if (g < 0 || static_cast<std::size_t>(g) >= group_count) {
      throw DataError("group id out of range at row " + std::to_string(i));
    }
    ++counts[static_cast<std::size_t>(g)];
    if (labels[i] != 0.0 && labels[i] != 1.0) {
      throw DataError("non-binary label at row " + std::to_string(i));
    }
  }
  for (std::size_t g = 0; g < group_count; ++g) {
    if (counts[g] == 0) throw DataError("group " + std::to_string(g) + " has no rows");
  }
}

Dataset Dataset::subset(const std::vector<Eigen::Index>& rows) const {
  Dataset out;
  out.features.resize(static_cast<Eigen::Index>(rows.size()), features.cols());
  out.labels.resize(static_cast<Eigen::Index>(rows.size()));
  out.groups.resize(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto r = rows[i];
    const auto ii = static_cast<Eigen::Index>(i);
    out.features.row(ii) = features.row(r);
    out.labels[ii] = labels[r];
    out.groups[i] = groups[static_cast<std::size_t>(r)];
  }
  out.group_count = group_count;
  out.feature_names = feature_names;
  out.group_names = group_names;
  return out;
}

Dataset load_csv(const std::filesystem::path& path, const std::string& label_column,
                 const std::string& group_column) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());

  std::string line;
  if (!std::getline(in, line)) throw DataError(path.string() + ": missing header row");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  const auto header = split_fields(line);

  std::ptrdiff_t label_idx = -1;
  std::ptrdiff_t group_idx = -1;
  std::vector<std::size_t> feature_cols;
  Dataset ds;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == label_column) {
      label_idx = static_cast<std::ptrdiff_t>(c);
    } else if (header[c] == group_column) {
      group_idx = static_cast<std::ptrdiff_t>(c);
    } else {
      feature_cols.push_back(c);
      ds.feature_names.push_back(header[c]);
    }
  }
  if (label_idx < 0) throw DataError(path.string() + ": missing label column '" + label_column + "'");
  if (group_idx < 0) throw DataError(path.string() + ": missing group column '" + group_column + "'");

  std::vector<double> values;
  std::vector<double> labels;
  std::unordered_map<std::string, int> group_ids;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != header.size()) {
      throw DataError("line " + std::to_string(line_no) + ": expected " +
                      std::to_string(header.size()) + " fields, got " +
                      std::to_string(fields.size()));
    }
    for (auto c : feature_cols) {
      double v = 0.0;
      if (!parse_double(fields[c], v)) {
        throw DataError("line " + std::to_string(line_no) + ": non-numeric value '" + fields[c] +
                        "' in column '" + header[c] + "'");
      }
      values.push_back(v);
    }
    labels.push_back(parse_label(fields[static_cast<std::size_t>(label_idx)], line_no));
    const auto& gname = fields[static_cast<std::size_t>(group_idx)];
    auto [it, inserted] = group_ids.try_emplace(gname, static_cast<int>(ds.group_names.size()));
    if (inserted) ds.group_names.push_back(gname);
    ds.groups.push_back(it->second);
  }

  const auto n = static_cast<Eigen::Index>(labels.size());
  const auto d = static_cast<Eigen::Index>(feature_cols.size());
  ds.features = Eigen::Map<const Matrix>(values.data(), n, d);
  ds.labels = Eigen::Map<const Vector>(labels.data(), n);
  ds.group_count = ds.group_names.size();
  if (n == 0) throw DataError(path.string() + ": no data rows");
  ds.validate();
  return ds;
}

void write_csv(const Dataset& ds, const std::filesystem::path& path,
               const std::string& label_column, const std::string& group_column) {
  ds.validate();
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  for (Eigen::Index j = 0; j < ds.features.cols(); ++j) {
    out << (ds.feature_names.empty() ? "x" + std::to_string(j)
                                     : ds.feature_names[static_cast<std::size_t>(j)])
        << ',';
  }
  out << label_column << ',' << group_column << '\n';
  for (Eigen::Index i = 0; i < ds.size(); ++i) {
    for (Eigen::Index j = 0; j < ds.features.cols(); ++j) {
      out << format_double(ds.features(i, j)) << ',';
    }
    const auto g = static_cast<std::size_t>(ds.groups[static_cast<std::size_t>(i)]);
    out << (ds.labels[i] != 0.0 ? 1 : 0) << ','
        << (g < ds.group_names.size() ? ds.group_names[g] : std::to_string(g)) << '\n';
  }
  if (!out) throw DataError("write failed for " + path.string());
}

ScalerParams fit_scaler(const Dataset& train) {
  if (train.size() == 0) throw DataError("cannot fit a scaler on an empty dataset");
  ScalerParams params;
  const double n = static_cast<double>(train.size());
  params.means = train.features.colwise().mean().transpose();
  const Matrix centered = train.features.rowwise() - params.means.transpose();
  params.stds = (centered.colwise().squaredNorm().transpose() / n).cwiseSqrt();
  for (Eigen::Index j = 0; j < params.stds.size(); ++j) {
    if (!(params.stds[j] > 0.0)) params.stds[j] = 1.0;
  }
  return params;
}

Dataset apply_scaler(const ScalerParams& params, Dataset ds) {
  require_same_size(params.means.size(), ds.features.cols(), "scaler means");
  require_same_size(params.stds.size(), ds.features.cols(), "scaler stds");
  ds.features = (ds.features.rowwise() - params.means.transpose()).array().rowwise() /
                params.stds.transpose().array();
  return ds;
}

std::pair<Dataset, Dataset> split_train_test(const Dataset& ds, double test_fraction,
                                             std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw std::invalid_argument("test fraction must lie in (0, 1)");
  }
  const auto n = static_cast<std::size_t>(ds.size());
  // The epsilon absorbs representation error, e.g. 10 * 0.8 = 7.999...
  const auto train_n = static_cast<std::size_t>(
      std::floor(static_cast<double>(n) * (1.0 - test_fraction) + 1e-9));
  if (train_n == 0 || train_n >= n) throw DataError("split leaves an empty side");

  std::vector<Eigen::Index> order(n);
  for (int attempt = 0; attempt < 100; ++attempt) {
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::mt19937_64 rng(mix_seed(seed, 0x5b11700 + static_cast<std::uint64_t>(attempt)));
    std::shuffle(order.begin(), order.end(), rng);

    std::vector<Eigen::Index> train_rows(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(train_n));
    std::vector<Eigen::Index> test_rows(order.begin() + static_cast<std::ptrdiff_t>(train_n), order.end());
    std::sort(train_rows.begin(), train_rows.end());
    std::sort(test_rows.begin(), test_rows.end());

    Dataset train = ds.subset(train_rows);
    Dataset test = ds.subset(test_rows);
    try {
      train.validate();
      test.validate();
    } catch (const DataError&) {
      continue;
    }
    return {std::move(train), std::move(test)};
  }
  throw DataError("could not draw a split with every group on both sides in 100 attempts");
}

BalancedSampler::BalancedSampler(const Dataset& ds, std::size_t per_group)
    : ds_(&ds), per_group_(per_group), members_(ds.group_count) {
  if (per_group == 0) throw std::invalid_argument("per_group must be >= 1");
  for (Eigen::Index i = 0; i < ds.size(); ++i) {
    const int g = ds.groups[static_cast<std::size_t>(i)];
    if (g < 0 || static_cast<std::size_t>(g) >= ds.group_count) {
      throw DataError("group id out of range at row " + std::to_string(i));
    }
    members_[static_cast<std::size_t>(g)].push_back(i);
  }
  for (std::size_t g = 0; g < members_.size(); ++g) {
    if (members_[g].empty()) throw DataError("group " + std::to_string(g) + " has no rows");
  }
}

GroupedBatch BalancedSampler::batch(std::uint64_t seed, std::uint64_t step) const {
  const auto size = static_cast<Eigen::Index>(batch_size());
  GroupedBatch out;
  out.features.resize(size, ds_->features.cols());
  out.labels.resize(size);
  out.groups.resize(static_cast<std::size_t>(size));
  out.group_count = members_.size();

  std::mt19937_64 rng(mix_seed(seed, step));
  Eigen::Index row = 0;
  for (std::size_t g = 0; g < members_.size(); ++g) {
    const auto& rows = members_[g];
    std::uniform_int_distribution<std::size_t> pick(0, rows.size() - 1);
    for (std::size_t k = 0; k < per_group_; ++k, ++row) {
      const Eigen::Index src = rows[pick(rng)];
      out.features.row(row) = ds_->features.row(src);
      out.labels[row] = ds_->labels[src];
      out.groups[static_cast<std::size_t>(row)] = static_cast<int>(g);
    }
  }
  return out;
}

GroupedBatch balanced_minibatch(const Dataset& ds, std::size_t per_group, std::uint64_t seed,
                                std::uint64_t step) {
  return BalancedSampler(ds, per_group).batch(seed, step);
}

void SyntheticSpec::validate() const {
  if (rows < groups) throw std::invalid_argument("synthetic rows must be >= groups");
  if (groups < 2) throw std::invalid_argument("synthetic data needs >= 2 groups");
  if (features < 2) throw std::invalid_argument("synthetic data needs >= 2 features");
  if (!(label_gap >= 0.0 && label_gap < 1.0)) {
    throw std::invalid_argument("synthetic label gap must lie in [0, 1)");
  }
}

Dataset make_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  const auto n = static_cast<Eigen::Index>(spec.rows);
  const auto d = static_cast<Eigen::Index>(spec.features);
  const auto groups = spec.groups;

  Dataset ds;
  ds.features.resize(n, d);
  ds.labels.resize(n);
  ds.groups.resize(spec.rows);
  ds.group_count = groups;
  for (std::size_t g = 0; g < groups; ++g) ds.group_names.push_back("g" + std::to_string(g));
  for (Eigen::Index j = 0; j < d; ++j) ds.feature_names.push_back("x" + std::to_string(j));

  std::mt19937_64 rng(mix_seed(spec.seed, 0x5e7));
  std::uniform_int_distribution<std::size_t> pick_group(0, groups - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, 1.0);
  const double centre = 0.5 * static_cast<double>(groups - 1);

  for (Eigen::Index i = 0; i < n; ++i) {
    // The first rows cycle through groups so every group is present.
    const std::size_t g = static_cast<std::size_t>(i) < groups ? static_cast<std::size_t>(i)
                                                               : pick_group(rng);
    const double position = static_cast<double>(g) / static_cast<double>(groups - 1);
    const double base_rate = 0.5 + spec.label_gap * (position - 0.5);
    const double y = unit(rng) < base_rate ? 1.0 : 0.0;

    ds.groups[static_cast<std::size_t>(i)] = static_cast<int>(g);
    ds.labels[i] = y;
    ds.features(i, 0) = (static_cast<double>(g) - centre) + 0.5 * noise(rng);
    for (Eigen::Index j = 1; j < d; ++j) {
      const double weight = spec.signal / std::sqrt(static_cast<double>(j));
      ds.features(i, j) = (2.0 * y - 1.0) * weight + noise(rng);
    }
  }
  ds.validate();
  return ds;
}

}  // namespace hct
