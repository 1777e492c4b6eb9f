#include "armlab/mlp.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "armlab/feedback.hpp"

namespace armlab {
namespace {

constexpr double kStdFloor = 1e-8;

void check_net(const EmulatorNet& net) {
  if (net.weights.empty() || net.weights.size() != net.biases.size())
    throw std::invalid_argument("net: empty or inconsistent layer list");
}

}  // namespace

NormStats fit_normalization(const Mat& data) {
  if (data.cols() == 0) throw std::invalid_argument("fit_normalization: empty dataset");
  NormStats stats;
  stats.mean = data.rowwise().mean();
  const Mat centered = data.colwise() - stats.mean;
  stats.std = (centered.array().square().rowwise().sum() / data.cols()).sqrt();
  stats.std = stats.std.cwiseMax(kStdFloor);
  return stats;
}

Vec normalize(const NormStats& stats, const Vec& v) {
  return (v - stats.mean).cwiseQuotient(stats.std);
}

Vec denormalize(const NormStats& stats, const Vec& v) {
  return v.cwiseProduct(stats.std) + stats.mean;
}

std::vector<int> EmulatorNet::layer_sizes() const {
  std::vector<int> sizes;
  if (weights.empty()) return sizes;
  sizes.push_back(static_cast<int>(weights.front().cols()));
  for (const Mat& w : weights) sizes.push_back(static_cast<int>(w.rows()));
  return sizes;
}

EmulatorNet make_net(const std::vector<int>& sizes, std::uint64_t seed) {
  if (sizes.size() < 2) throw std::invalid_argument("make_net: need input and output sizes");
  for (int s : sizes)
    if (s < 1) throw std::invalid_argument("make_net: layer sizes must be positive");
  EmulatorNet net;
  std::mt19937_64 rng(seed);
  for (size_t l = 0; l + 1 < sizes.size(); ++l) {
    const int fan_in = sizes[l];
    const double scale = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> u(-scale, scale);
    Mat w(sizes[l + 1], fan_in);
    for (int r = 0; r < w.rows(); ++r)
      for (int c = 0; c < w.cols(); ++c) w(r, c) = u(rng);
    net.weights.push_back(std::move(w));
    net.biases.push_back(Vec::Zero(sizes[l + 1]));
  }
  net.in_norm.mean = Vec::Zero(sizes.front());
  net.in_norm.std = Vec::Ones(sizes.front());
  net.out_norm.mean = Vec::Zero(sizes.back());
  net.out_norm.std = Vec::Ones(sizes.back());
  net.torque_bounds = (sizes.back() == 6)
                          ? (Vec(6) << 102, 102, 66, 34, 34, 34).finished()
                          : Vec(Vec::Constant(sizes.back(), 102.0));
  return net;
}

Mat forward_normalized(const EmulatorNet& net, const Mat& x, std::vector<Mat>* activations) {
  check_net(net);
  if (x.rows() != net.input_dim())
    throw std::invalid_argument("forward: input dimension mismatch");
  Mat a = x;
  if (activations) {
    activations->clear();
    activations->push_back(a);
  }
  for (size_t l = 0; l < net.weights.size(); ++l) {
    Mat z = (net.weights[l] * a).colwise() + net.biases[l];
    if (l + 1 < net.weights.size()) z = z.cwiseMax(0.0);  // hidden rectifier
    a = std::move(z);
    if (activations) activations->push_back(a);
  }
  return a;
}

Vec mlp_forward(const EmulatorNet& net, const Vec& s) {
  if (!s.allFinite()) throw std::invalid_argument("mlp_forward: non-finite input");
  const Mat out = forward_normalized(net, normalize(net.in_norm, s), nullptr);
  const Vec tau = denormalize(net.out_norm, out.col(0));
  if (!tau.allFinite()) throw std::runtime_error("mlp_forward: non-finite output");
  return saturate(tau, net.torque_bounds);
}

double backprop(const EmulatorNet& net, const Mat& x, const Mat& y, Gradients* grads) {
  check_net(net);
  const long batch = x.cols();
  if (y.cols() != batch || y.rows() != net.output_dim())
    throw std::invalid_argument("backprop: target shape mismatch");

  std::vector<Mat> acts;
  const Mat out = forward_normalized(net, x, &acts);
  const Mat residual = out - y;
  const double loss = residual.squaredNorm() / static_cast<double>(batch);

  if (grads) {
    const size_t layers = net.weights.size();
    grads->d_weights.assign(layers, Mat());
    grads->d_biases.assign(layers, Vec());
    Mat delta = (2.0 / static_cast<double>(batch)) * residual;
    for (size_t l = layers; l-- > 0;) {
      grads->d_weights[l] = delta * acts[l].transpose();
      grads->d_biases[l] = delta.rowwise().sum();
      if (l > 0) {
        delta = net.weights[l].transpose() * delta;
        delta = delta.cwiseProduct((acts[l].array() > 0.0).cast<double>().matrix());
      }
    }
  }
  return loss;
}

TrainHistory train(EmulatorNet& net, const Mat& inputs, const Mat& targets,
                   const TrainConfig& cfg) {
  TrainHistory history;
  if (cfg.epochs == 0) return history;
  check_net(net);
  const long total = inputs.cols();
  if (targets.cols() != total) throw std::invalid_argument("train: input/target count mismatch");
  if (cfg.batch < 1) throw std::invalid_argument("train: batch must be >= 1");
  if (cfg.learning_rate <= 0.0) throw std::invalid_argument("train: learning rate must be > 0");
  if (cfg.validation_fraction <= 0.0 || cfg.validation_fraction >= 1.0)
    throw std::invalid_argument("train: validation fraction must be in (0, 1)");

  std::mt19937_64 rng(cfg.seed);
  std::vector<long> order(total);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  const long val_count = std::max<long>(1, std::lround(cfg.validation_fraction * total));
  const long train_count = total - val_count;
  if (train_count < 1) throw std::invalid_argument("train: no training samples left");

  Mat train_x(inputs.rows(), train_count), train_y(targets.rows(), train_count);
  Mat val_x(inputs.rows(), val_count), val_y(targets.rows(), val_count);
  for (long i = 0; i < train_count; ++i) {
    train_x.col(i) = inputs.col(order[val_count + i]);
    train_y.col(i) = targets.col(order[val_count + i]);
  }
  for (long i = 0; i < val_count; ++i) {
    val_x.col(i) = inputs.col(order[i]);
    val_y.col(i) = targets.col(order[i]);
  }

  net.in_norm = fit_normalization(train_x);
  net.out_norm = fit_normalization(train_y);
  auto standardize = [](const NormStats& stats, Mat& m) {
    m = (m.colwise() - stats.mean).array().colwise() / stats.std.array();
  };
  standardize(net.in_norm, train_x);
  standardize(net.out_norm, train_y);
  standardize(net.in_norm, val_x);
  standardize(net.out_norm, val_y);

  // Adam state.
  const size_t layers = net.weights.size();
  std::vector<Mat> m_w(layers), v_w(layers);
  std::vector<Vec> m_b(layers), v_b(layers);
  for (size_t l = 0; l < layers; ++l) {
    m_w[l] = Mat::Zero(net.weights[l].rows(), net.weights[l].cols());
    v_w[l] = m_w[l];
    m_b[l] = Vec::Zero(net.biases[l].size());
    v_b[l] = m_b[l];
  }

  std::vector<long> batch_order(train_count);
  std::iota(batch_order.begin(), batch_order.end(), 0);
  long adam_t = 0;
  Gradients grads;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(batch_order.begin(), batch_order.end(), rng);
    double epoch_loss = 0.0;
    long batches = 0;
    for (long start = 0; start < train_count; start += cfg.batch) {
      const long size = std::min<long>(cfg.batch, train_count - start);
      Mat bx(train_x.rows(), size), by(train_y.rows(), size);
      for (long i = 0; i < size; ++i) {
        bx.col(i) = train_x.col(batch_order[start + i]);
        by.col(i) = train_y.col(batch_order[start + i]);
      }
      const double loss = backprop(net, bx, by, &grads);
      if (!std::isfinite(loss))
        throw std::runtime_error("train: loss diverged at epoch " + std::to_string(epoch));
      epoch_loss += loss;
      ++batches;

      ++adam_t;
      const double bias1 = 1.0 - std::pow(cfg.adam_beta1, adam_t);
      const double bias2 = 1.0 - std::pow(cfg.adam_beta2, adam_t);
      for (size_t l = 0; l < layers; ++l) {
        m_w[l] = cfg.adam_beta1 * m_w[l] + (1.0 - cfg.adam_beta1) * grads.d_weights[l];
        v_w[l] = cfg.adam_beta2 * v_w[l] +
                 (1.0 - cfg.adam_beta2) * grads.d_weights[l].cwiseProduct(grads.d_weights[l]);
        net.weights[l] -=
            cfg.learning_rate *
            ((m_w[l] / bias1).array() / ((v_w[l] / bias2).array().sqrt() + cfg.adam_eps))
                .matrix();
        m_b[l] = cfg.adam_beta1 * m_b[l] + (1.0 - cfg.adam_beta1) * grads.d_biases[l];
        v_b[l] = cfg.adam_beta2 * v_b[l] +
                 (1.0 - cfg.adam_beta2) * grads.d_biases[l].cwiseProduct(grads.d_biases[l]);
        net.biases[l] -=
            cfg.learning_rate *
            ((m_b[l] / bias1).array() / ((v_b[l] / bias2).array().sqrt() + cfg.adam_eps))
                .matrix();
      }
    }
    history.train_mse.push_back(epoch_loss / std::max<long>(1, batches));
    const Mat val_out = forward_normalized(net, val_x, nullptr);
    history.val_mse.push_back((val_out - val_y).squaredNorm() / static_cast<double>(val_count));
  }
  return history;
}

double evaluate_mse(const EmulatorNet& net, const Mat& inputs, const Mat& targets) {
  if (inputs.cols() == 0) throw std::invalid_argument("evaluate_mse: empty dataset");
  Mat x = (inputs.colwise() - net.in_norm.mean).array().colwise() / net.in_norm.std.array();
  Mat y = (targets.colwise() - net.out_norm.mean).array().colwise() / net.out_norm.std.array();
  const Mat out = forward_normalized(net, x, nullptr);
  return (out - y).squaredNorm() / static_cast<double>(inputs.cols());
}

void save_net(const EmulatorNet& net, const std::string& path) {
  check_net(net);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write net file: " + path);
  out << std::setprecision(17);
  out << "armlab-net 1\n";
  out << "layers";
  for (int s : net.layer_sizes()) out << ' ' << s;
  out << '\n';
  auto put = [&out](const char* key, const Vec& v) {
    out << key;
    for (int i = 0; i < v.size(); ++i) out << ' ' << v[i];
    out << '\n';
  };
  put("in_mean", net.in_norm.mean);
  put("in_std", net.in_norm.std);
  put("out_mean", net.out_norm.mean);
  put("out_std", net.out_norm.std);
  put("torque_bounds", net.torque_bounds);
  for (size_t l = 0; l < net.weights.size(); ++l) {
    out << "W" << l;
    const Mat& w = net.weights[l];
    for (int r = 0; r < w.rows(); ++r)
      for (int c = 0; c < w.cols(); ++c) out << ' ' << w(r, c);
    out << '\n';
    put(("b" + std::to_string(l)).c_str(), net.biases[l]);
  }
}

EmulatorNet load_net(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open net file: " + path);
  std::string magic;
  int version = 0;
  in >> magic >> version;
  if (magic != "armlab-net" || version != 1)
    throw std::runtime_error(path + ": not an armlab-net v1 file");

  auto expect_key = [&in, &path](const std::string& want) {
    std::string key;
    in >> key;
    if (key != want) throw std::runtime_error(path + ": expected field '" + want + "', got '" + key + "'");
  };
  auto read_vec = [&in, &path](long size) {
    Vec v(size);
    for (long i = 0; i < size; ++i)
      if (!(in >> v[i])) throw std::runtime_error(path + ": truncated numeric field");
    return v;
  };

  expect_key("layers");
  std::vector<int> sizes;
  {
    std::string rest;
    std::getline(in, rest);
    std::istringstream ss(rest);
    for (int s; ss >> s;) sizes.push_back(s);
  }
  if (sizes.size() < 2) throw std::runtime_error(path + ": needs at least two layer sizes");

  EmulatorNet net;
  expect_key("in_mean");
  net.in_norm.mean = read_vec(sizes.front());
  expect_key("in_std");
  net.in_norm.std = read_vec(sizes.front());
  expect_key("out_mean");
  net.out_norm.mean = read_vec(sizes.back());
  expect_key("out_std");
  net.out_norm.std = read_vec(sizes.back());
  expect_key("torque_bounds");
  net.torque_bounds = read_vec(sizes.back());
  for (size_t l = 0; l + 1 < sizes.size(); ++l) {
    expect_key("W" + std::to_string(l));
    Mat w(sizes[l + 1], sizes[l]);
    for (int r = 0; r < w.rows(); ++r)
      for (int c = 0; c < w.cols(); ++c)
        if (!(in >> w(r, c))) throw std::runtime_error(path + ": truncated weight matrix");
    net.weights.push_back(std::move(w));
    expect_key("b" + std::to_string(l));
    net.biases.push_back(read_vec(sizes[l + 1]));
  }
  if ((net.in_norm.std.array() <= 0.0).any() || (net.out_norm.std.array() <= 0.0).any())
    throw std::runtime_error(path + ": normalization std must be positive");
  return net;
}

}  // namespace armlab
