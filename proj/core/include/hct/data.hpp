#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "hct/objectives.hpp"
#include "hct/types.hpp"

namespace hct {

/// Tabular binary-classification data with a protected group per row. The
/// group column is not part of the features.
struct Dataset {
  Matrix features;
  Vector labels;
  std::vector<int> groups;
  std::size_t group_count = 0;
  std::vector<std::string> feature_names;
  /// Original group value for each id, in first-appearance order.
  std::vector<std::string> group_names;

  Eigen::Index size() const { return features.rows(); }
  /// Throws DataError when shapes, labels, or group ids are inconsistent.
  void validate() const;
  /// Rows selected by index, preserving group_count and names.
  Dataset subset(const std::vector<Eigen::Index>& rows) const;
};

Dataset load_csv(const std::filesystem::path& path, const std::string& label_column,
                 const std::string& group_column);

/// Writes the group column last, after the label column.
void write_csv(const Dataset& ds, const std::filesystem::path& path,
               const std::string& label_column, const std::string& group_column);

struct ScalerParams {
  Vector means;
  Vector stds;
};

/// Population mean and standard deviation per column; zero-variance
/// columns get std 1.
ScalerParams fit_scaler(const Dataset& train);
Dataset apply_scaler(const ScalerParams& params, Dataset ds);

/// Train size floor(N * (1 - test_fraction)). A split that leaves a group
/// empty on either side is redrawn, up to 100 attempts.
std::pair<Dataset, Dataset> split_train_test(const Dataset& ds, double test_fraction,
                                             std::uint64_t seed);

/// Draws per_group rows (with replacement) from every group. The draw is a
/// pure function of (seed, step).
class BalancedSampler {
 public:
  BalancedSampler(const Dataset& ds, std::size_t per_group);

  GroupedBatch batch(std::uint64_t seed, std::uint64_t step) const;
  std::size_t per_group() const { return per_group_; }
  std::size_t batch_size() const { return per_group_ * members_.size(); }

 private:
  const Dataset* ds_;
  std::size_t per_group_;
  std::vector<std::vector<Eigen::Index>> members_;
};

GroupedBatch balanced_minibatch(const Dataset& ds, std::size_t per_group, std::uint64_t seed,
                                std::uint64_t step);

/// Synthetic stand-in for census-style income data. Group g has label base
/// rate 0.5 + label_gap * (g / (groups - 1) - 0.5); feature 0 is a noisy
/// proxy of the group, the rest carry label signal of decreasing strength.
struct SyntheticSpec {
  std::size_t rows = 2000;
  std::size_t groups = 2;
  std::size_t features = 9;
  double label_gap = 0.3;
  double signal = 0.5;
  std::uint64_t seed = 7;

  void validate() const;
};

Dataset make_synthetic(const SyntheticSpec& spec);

}  // namespace hct
