#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "hct/types.hpp"

namespace hct {

enum class Activation { ReLU };

/// Shape of a dense feed-forward network with ReLU hidden layers and a
/// linear (logit) output.
struct NetworkSpec {
  std::size_t input_dim = 9;
  std::vector<std::size_t> hidden_dims{64, 32};
  Activation activation = Activation::ReLU;
  std::size_t output_dim = 1;

  /// Layer widths including input and output: {in, h1, ..., out}.
  std::vector<std::size_t> layer_widths() const;
  std::size_t parameter_count() const;
  /// Throws std::invalid_argument if any width is zero or output_dim != 1.
  void validate() const;
};

/// Activations retained from a forward pass so several backward passes
/// (one per Jacobian row) can share it.
struct ForwardPass {
  /// activations[0] is the input batch; activations[l] is the post-ReLU
  /// output of hidden layer l.
  std::vector<Matrix> activations;
  Vector logits;
};

/// Weights uniform on [-1/sqrt(fan_in), 1/sqrt(fan_in)], biases zero.
/// Layout per layer: row-major W (out x in) followed by b (out).
Vector init_network(const NetworkSpec& spec, std::uint64_t seed);

Vector forward(const NetworkSpec& spec, const Vector& params, const Matrix& features);

ForwardPass forward_pass(const NetworkSpec& spec, const Vector& params, const Matrix& features);

/// Gradient of sum_i upstream_i * logit_i with respect to params.
Vector backward(const NetworkSpec& spec, const Vector& params, const Matrix& features,
                const Vector& upstream);

Vector backward(const NetworkSpec& spec, const Vector& params, const ForwardPass& pass,
                const Vector& upstream);

/// Smallest |pre-activation| over all hidden ReLU units and batch rows;
/// infinity for a network without hidden layers. Finite-difference checks
/// are only meaningful when this exceeds the probe step.
double min_abs_preactivation(const NetworkSpec& spec, const Vector& params, const Matrix& features);

/// Central differences, one coordinate at a time. Used as a test oracle.
Vector finite_difference_gradient(const std::function<double(const Vector&)>& loss,
                                  const Vector& params, double h);

}  // namespace hct
