#include "hct/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

namespace hct {

namespace {

using ConstMatrixMap = Eigen::Map<const Matrix>;
using MatrixMap = Eigen::Map<Matrix>;

void check_shapes(const NetworkSpec& spec, const Vector& params, const Matrix& features) {
  spec.validate();
  require_same_size(params.size(), static_cast<Eigen::Index>(spec.parameter_count()),
                    "network parameters");
  require_same_size(features.cols(), static_cast<Eigen::Index>(spec.input_dim),
                    "feature columns");
}

}  // namespace

std::vector<std::size_t> NetworkSpec::layer_widths() const {
  std::vector<std::size_t> widths;
  widths.reserve(hidden_dims.size() + 2);
  widths.push_back(input_dim);
  widths.insert(widths.end(), hidden_dims.begin(), hidden_dims.end());
  widths.push_back(output_dim);
  return widths;
}

std::size_t NetworkSpec::parameter_count() const {
  const auto widths = layer_widths();
  std::size_t count = 0;
  for (std::size_t l = 1; l < widths.size(); ++l) {
    count += widths[l - 1] * widths[l] + widths[l];
  }
  return count;
}

void NetworkSpec::validate() const {
  if (output_dim != 1) {
    throw std::invalid_argument("network output_dim must be 1 for binary classification");
  }
  for (auto w : layer_widths()) {
    if (w == 0) throw std::invalid_argument("network layer widths must be >= 1");
  }
}

Vector init_network(const NetworkSpec& spec, std::uint64_t seed) {
  spec.validate();
  Vector params = Vector::Zero(static_cast<Eigen::Index>(spec.parameter_count()));
  std::mt19937_64 rng(mix_seed(seed, 0x1e7));
  const auto widths = spec.layer_widths();
  Eigen::Index offset = 0;
  for (std::size_t l = 1; l < widths.size(); ++l) {
    const auto in = static_cast<Eigen::Index>(widths[l - 1]);
    const auto out = static_cast<Eigen::Index>(widths[l]);
    const double bound = std::sqrt(1.0 / static_cast<double>(in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (Eigen::Index i = 0; i < in * out; ++i) params[offset + i] = dist(rng);
    offset += in * out + out;  // biases stay zero
  }
  return params;
}

ForwardPass forward_pass(const NetworkSpec& spec, const Vector& params, const Matrix& features) {
  check_shapes(spec, params, features);
  const auto widths = spec.layer_widths();
  const std::size_t layers = widths.size() - 1;

  ForwardPass pass;
  pass.activations.reserve(layers);
  pass.activations.push_back(features);

  Eigen::Index offset = 0;
  for (std::size_t l = 1; l <= layers; ++l) {
    const auto in = static_cast<Eigen::Index>(widths[l - 1]);
    const auto out = static_cast<Eigen::Index>(widths[l]);
    ConstMatrixMap weights(params.data() + offset, out, in);
    const auto bias = params.segment(offset + in * out, out).transpose();
    offset += in * out + out;

    Matrix z = pass.activations.back() * weights.transpose();
    z.rowwise() += bias;
    if (l == layers) {
      pass.logits = z.col(0);
    } else {
      pass.activations.push_back(z.cwiseMax(0.0));
    }
  }
  return pass;
}

Vector forward(const NetworkSpec& spec, const Vector& params, const Matrix& features) {
  return forward_pass(spec, params, features).logits;
}

Vector backward(const NetworkSpec& spec, const Vector& params, const ForwardPass& pass,
                const Vector& upstream) {
  require_same_size(upstream.size(), pass.logits.size(), "upstream gradient");
  const auto widths = spec.layer_widths();
  const std::size_t layers = widths.size() - 1;
  require_same_size(static_cast<Eigen::Index>(pass.activations.size()),
                    static_cast<Eigen::Index>(layers), "forward pass depth");

  Vector grad(params.size());
  // delta holds d(sum upstream*logit)/d(pre-activation) of the current layer.
  Matrix delta = upstream;

  Eigen::Index offset = params.size();
  for (std::size_t l = layers; l >= 1; --l) {
    const auto in = static_cast<Eigen::Index>(widths[l - 1]);
    const auto out = static_cast<Eigen::Index>(widths[l]);
    offset -= in * out + out;
    const Matrix& input = pass.activations[l - 1];

    MatrixMap grad_w(grad.data() + offset, out, in);
    grad_w.noalias() = delta.transpose() * input;
    grad.segment(offset + in * out, out) = delta.colwise().sum().transpose();

    if (l > 1) {
      ConstMatrixMap weights(params.data() + offset, out, in);
      Matrix next = delta * weights;
      // ReLU'(0) = 0: post-activation > 0 iff pre-activation > 0.
      delta = next.cwiseProduct((input.array() > 0.0).cast<double>().matrix());
    }
  }
  return grad;
}

Vector backward(const NetworkSpec& spec, const Vector& params, const Matrix& features,
                const Vector& upstream) {
  require_same_size(upstream.size(), features.rows(), "upstream gradient");
  return backward(spec, params, forward_pass(spec, params, features), upstream);
}

double min_abs_preactivation(const NetworkSpec& spec, const Vector& params, const Matrix& features) {
  check_shapes(spec, params, features);
  const auto widths = spec.layer_widths();
  const std::size_t layers = widths.size() - 1;
  double closest = std::numeric_limits<double>::infinity();
  Matrix activation = features;
  Eigen::Index offset = 0;
  for (std::size_t l = 1; l < layers; ++l) {
    const auto in = static_cast<Eigen::Index>(widths[l - 1]);
    const auto out = static_cast<Eigen::Index>(widths[l]);
    ConstMatrixMap weights(params.data() + offset, out, in);
    Matrix z = activation * weights.transpose();
    z.rowwise() += params.segment(offset + in * out, out).transpose();
    offset += in * out + out;
    if (z.size() > 0) closest = std::min(closest, z.cwiseAbs().minCoeff());
    activation = z.cwiseMax(0.0);
  }
  return closest;
}

Vector finite_difference_gradient(const std::function<double(const Vector&)>& loss,
                                  const Vector& params, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("finite difference step must be positive");
  Vector grad(params.size());
  Vector probe = params;
  for (Eigen::Index i = 0; i < params.size(); ++i) {
    const double original = probe[i];
    probe[i] = original + h;
    const double up = loss(probe);
    probe[i] = original - h;
    const double down = loss(probe);
    probe[i] = original;
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

}  // namespace hct
