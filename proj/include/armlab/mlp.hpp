#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "armlab/types.hpp"

namespace armlab {

/// Per-dimension standardization statistics (std floored at 1e-8).
struct NormStats {
  Vec mean;
  Vec std;
};

/// Columns of `data` are samples.
NormStats fit_normalization(const Mat& data);

Vec normalize(const NormStats& stats, const Vec& v);
Vec denormalize(const NormStats& stats, const Vec& v);

/// Fully connected rectifier network with a linear output layer, plus the
/// input/output standardization it was trained with. Inference saturates the
/// denormalized torque to `torque_bounds`.
struct EmulatorNet {
  std::vector<Mat> weights;  ///< layer l maps sizes[l] -> sizes[l+1]
  std::vector<Vec> biases;
  NormStats in_norm;
  NormStats out_norm;
  Vec torque_bounds;

  int input_dim() const { return weights.empty() ? 0 : static_cast<int>(weights.front().cols()); }
  int output_dim() const { return weights.empty() ? 0 : static_cast<int>(weights.back().rows()); }
  std::vector<int> layer_sizes() const;
};

/// Seeded fan-in-scaled uniform init; normalization starts as the identity.
EmulatorNet make_net(const std::vector<int>& sizes, std::uint64_t seed);

/// Normalize -> hidden rectifiers -> linear output -> denormalize -> saturate.
Vec mlp_forward(const EmulatorNet& net, const Vec& s);

/// Batch pass in normalized space (columns are samples). When `activations`
/// is given it receives [input, hidden..., output] for backprop.
Mat forward_normalized(const EmulatorNet& net, const Mat& x, std::vector<Mat>* activations);

struct Gradients {
  std::vector<Mat> d_weights;
  std::vector<Vec> d_biases;
};

/// Mean-squared-error loss over the batch (normalized units, squared norm
/// summed over outputs) and its parameter gradients.
double backprop(const EmulatorNet& net, const Mat& x, const Mat& y, Gradients* grads);

struct TrainConfig {
  int batch = 256;
  double learning_rate = 1e-3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  int epochs = 300;
  double validation_fraction = 0.1;
  std::uint64_t seed = 0;
};

struct TrainHistory {
  std::vector<double> train_mse;
  std::vector<double> val_mse;
};

/// Mini-batch Adam on the MSE loss. Splits train/validation by the seeded
/// shuffle, fits the normalization on the training split, and is fully
/// deterministic in (data, config). Zero epochs leaves the net untouched.
/// Throws (naming the epoch) if the loss turns non-finite.
TrainHistory train(EmulatorNet& net, const Mat& inputs, const Mat& targets,
                   const TrainConfig& cfg);

/// Mean of |target - f(input)|^2 in normalized units over the given columns.
double evaluate_mse(const EmulatorNet& net, const Mat& inputs, const Mat& targets);

void save_net(const EmulatorNet& net, const std::string& path);
EmulatorNet load_net(const std::string& path);

}  // namespace armlab
