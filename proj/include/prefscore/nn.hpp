#pragma once

// Minimal feed-forward scorer trained with a pairwise logistic loss.
//
// Layout: for each hidden width h, dense -> batch norm -> activation; then a
// dense layer to one unit followed by the output activation (ReLU6 by
// default, so scores live in [0, 6]). Everything is double precision and
// single-threaded so results are bit-reproducible for a fixed seed.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "prefscore/error.hpp"
#include "prefscore/random.hpp"

namespace prefscore {

// Row-major dense matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::vector<double>& values() { return data_; }
  const std::vector<double>& values() const { return data_; }

  void resize(std::size_t rows, std::size_t cols) {
    rows_ = rows;
    cols_ = cols;
    data_.assign(rows * cols, 0.0);
  }

  static Matrix from_rows(std::span<const std::vector<double>> rows) {
    Matrix m(rows.size(), rows.empty() ? 0 : rows.front().size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (rows[r].size() != m.cols_) throw SchemaError("ragged rows in Matrix::from_rows");
      std::copy(rows[r].begin(), rows[r].end(), m.row(r).begin());
    }
    return m;
  }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

enum class Activation { Identity, ReLU, ReLU6 };

inline std::string activation_name(Activation a) {
  switch (a) {
    case Activation::Identity: return "identity";
    case Activation::ReLU: return "relu";
    case Activation::ReLU6: return "relu6";
  }
  return "identity";
}

inline Activation parse_activation(std::string_view s) {
  if (s == "identity") return Activation::Identity;
  if (s == "relu") return Activation::ReLU;
  if (s == "relu6") return Activation::ReLU6;
  throw ConfigError("unknown activation '" + std::string(s) + "'");
}

inline constexpr double kReLU6Centre = 3.0;

inline double relu6(double x) { return std::min(std::max(x, 0.0), 6.0); }

inline double activate(Activation a, double x) {
  switch (a) {
    case Activation::Identity: return x;
    case Activation::ReLU: return std::max(x, 0.0);
    case Activation::ReLU6: return relu6(x);
  }
  return x;
}

// Derivative w.r.t. the pre-activation; kinks take the zero side.
inline double activate_grad(Activation a, double x) {
  switch (a) {
    case Activation::Identity: return 1.0;
    case Activation::ReLU: return x > 0.0 ? 1.0 : 0.0;
    case Activation::ReLU6: return (x > 0.0 && x < 6.0) ? 1.0 : 0.0;
  }
  return 1.0;
}

enum class Mode { Train, Eval };

struct DenseLayer {
  Matrix weights;             // out x in
  std::vector<double> bias;   // empty when the layer feeds batch norm
};

struct BatchNormLayer {
  std::vector<double> gamma;
  std::vector<double> beta;
  std::vector<double> running_mean;
  std::vector<double> running_var;
  double momentum = 0.1;
  double epsilon = 1e-5;
};

struct NetworkConfig {
  std::size_t input_dim = 0;
  std::vector<std::size_t> hidden_dims{64, 32};
  Activation hidden_activation = Activation::ReLU;
  Activation output_activation = Activation::ReLU6;
  bool batch_norm = true;
  std::uint64_t init_seed = 0;
  double bn_momentum = 0.1;
  double bn_epsilon = 1e-5;

  void validate() const {
    if (input_dim == 0) throw ConfigError("network input_dim must be positive");
    for (auto h : hidden_dims)
      if (h == 0) throw ConfigError("hidden layer widths must be positive");
    if (!(bn_momentum > 0.0 && bn_momentum < 1.0)) throw ConfigError("bn_momentum must lie in (0, 1)");
    if (!(bn_epsilon > 0.0)) throw ConfigError("bn_epsilon must be positive");
  }
};

// Gradients in the canonical parameter order of Network::parameters().
struct Gradients {
  std::vector<std::vector<double>> tensors;
};

struct ParameterRef {
  std::string name;
  std::span<double> values;
};

class Network {
 public:
  Network() = default;

  // Seeded uniform fan-in initialisation: W ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)),
  // zero hidden bias, gamma = 1, beta = 0, running stats (0, 1). A ReLU6 output
  // starts its bias mid-band at 3 so no score begins clamped at 0.
  explicit Network(const NetworkConfig& config) : config_(config) {
    config_.validate();
    Rng rng(config_.init_seed);
    std::size_t fan_in = config_.input_dim;
    auto make_dense = [&](std::size_t out, bool with_bias) {
      DenseLayer layer;
      layer.weights = Matrix(out, fan_in);
      const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
      for (double& w : layer.weights.values()) w = rng.uniform(-bound, bound);
      if (with_bias) layer.bias.assign(out, 0.0);
      return layer;
    };
    for (std::size_t h : config_.hidden_dims) {
      dense_.push_back(make_dense(h, !config_.batch_norm));
      if (config_.batch_norm) {
        BatchNormLayer bn;
        bn.gamma.assign(h, 1.0);
        bn.beta.assign(h, 0.0);
        bn.running_mean.assign(h, 0.0);
        bn.running_var.assign(h, 1.0);
        bn.momentum = config_.bn_momentum;
        bn.epsilon = config_.bn_epsilon;
        norms_.push_back(std::move(bn));
      }
      fan_in = h;
    }
    dense_.push_back(make_dense(1, true));
    if (config_.output_activation == Activation::ReLU6) dense_.back().bias[0] = kReLU6Centre;
  }

  const NetworkConfig& config() const { return config_; }
  std::vector<DenseLayer>& dense_layers() { return dense_; }
  const std::vector<DenseLayer>& dense_layers() const { return dense_; }
  std::vector<BatchNormLayer>& batch_norms() { return norms_; }
  const std::vector<BatchNormLayer>& batch_norms() const { return norms_; }

  std::size_t hidden_count() const { return config_.hidden_dims.size(); }

  // Canonical order: per hidden layer weights, [bias], [gamma, beta]; then
  // output weights and bias.
  std::vector<ParameterRef> parameters() {
    std::vector<ParameterRef> out;
    for (std::size_t l = 0; l < dense_.size(); ++l) {
      const std::string tag = l < hidden_count() ? "hidden" + std::to_string(l) : "output";
      out.push_back({tag + ".weights", dense_[l].weights.values()});
      if (!dense_[l].bias.empty()) out.push_back({tag + ".bias", dense_[l].bias});
      if (l < norms_.size()) {
        out.push_back({tag + ".gamma", norms_[l].gamma});
        out.push_back({tag + ".beta", norms_[l].beta});
      }
    }
    return out;
  }

  Gradients zero_gradients() {
    Gradients g;
    for (const auto& p : parameters()) g.tensors.emplace_back(p.values.size(), 0.0);
    return g;
  }

  // Eval-mode forward: running statistics only, no state change.
  std::vector<double> predict(const Matrix& batch) const {
    check_input(batch);
    Matrix x = batch;
    Matrix z;
    for (std::size_t l = 0; l < hidden_count(); ++l) {
      affine(dense_[l], x, z);
      if (config_.batch_norm) {
        const auto& bn = norms_[l];
        for (std::size_t r = 0; r < z.rows(); ++r) {
          auto row = z.row(r);
          for (std::size_t c = 0; c < row.size(); ++c)
            row[c] = bn.gamma[c] * (row[c] - bn.running_mean[c]) /
                         std::sqrt(bn.running_var[c] + bn.epsilon) +
                     bn.beta[c];
        }
      }
      for (double& v : z.values()) v = activate(config_.hidden_activation, v);
      std::swap(x, z);
    }
    affine(dense_.back(), x, z);
    std::vector<double> scores(z.rows());
    for (std::size_t r = 0; r < z.rows(); ++r) scores[r] = activate(config_.output_activation, z(r, 0));
    return scores;
  }

  std::vector<double> forward(const Matrix& batch, Mode mode) {
    if (mode == Mode::Eval) return predict(batch);
    return forward_train(batch, /*update_running=*/true);
  }

  // Train-mode forward with batch statistics; caches activations for
  // backward(). update_running=false leaves running statistics untouched.
  std::vector<double> forward_train(const Matrix& batch, bool update_running) {
    check_input(batch);
    if (config_.batch_norm && batch.rows() < 2)
      throw ConfigError("Train-mode forward needs a batch of at least 2 samples");
    const std::size_t n = batch.rows();
    cache_.valid = false;
    cache_.inputs.resize(hidden_count() + 1);
    cache_.xhat.resize(hidden_count());
    cache_.pre_activation.resize(hidden_count());
    cache_.inv_std.resize(hidden_count());
    cache_.inputs[0] = batch;

    for (std::size_t l = 0; l < hidden_count(); ++l) {
      Matrix& z = cache_.pre_activation[l];
      affine(dense_[l], cache_.inputs[l], z);
      const std::size_t width = z.cols();
      if (config_.batch_norm) {
        auto& bn = norms_[l];
        Matrix& xhat = cache_.xhat[l];
        xhat.resize(n, width);
        auto& inv_std = cache_.inv_std[l];
        inv_std.assign(width, 0.0);
        for (std::size_t c = 0; c < width; ++c) {
          double mean = 0.0;
          for (std::size_t r = 0; r < n; ++r) mean += z(r, c);
          mean /= static_cast<double>(n);
          double var = 0.0;
          for (std::size_t r = 0; r < n; ++r) {
            const double d = z(r, c) - mean;
            var += d * d;
          }
          var /= static_cast<double>(n);
          inv_std[c] = 1.0 / std::sqrt(var + bn.epsilon);
          for (std::size_t r = 0; r < n; ++r) {
            xhat(r, c) = (z(r, c) - mean) * inv_std[c];
            z(r, c) = bn.gamma[c] * xhat(r, c) + bn.beta[c];
          }
          if (update_running) {
            const double unbiased = var * static_cast<double>(n) / static_cast<double>(n - 1);
            bn.running_mean[c] = (1.0 - bn.momentum) * bn.running_mean[c] + bn.momentum * mean;
            bn.running_var[c] = (1.0 - bn.momentum) * bn.running_var[c] + bn.momentum * unbiased;
          }
        }
      }
      Matrix& next = cache_.inputs[l + 1];
      next.resize(n, width);
      for (std::size_t i = 0; i < z.values().size(); ++i)
        next.values()[i] = activate(config_.hidden_activation, z.values()[i]);
    }
    affine(dense_.back(), cache_.inputs.back(), cache_.output_pre);
    std::vector<double> scores(n);
    for (std::size_t r = 0; r < n; ++r)
      scores[r] = activate(config_.output_activation, cache_.output_pre(r, 0));
    cache_.valid = true;
    return scores;
  }

  // Pre-activation output values of the last Train-mode forward.
  std::span<const double> last_output_pre_activation() const {
    return cache_.output_pre.values();
  }

  // Gradients of a scalar loss given dL/dscore for every sample of the last
  // Train-mode forward. Overwrites `grads`.
  void backward(std::span<const double> dscores, Gradients& grads) {
    if (!cache_.valid) throw ConfigError("backward called without a preceding Train-mode forward");
    const std::size_t n = cache_.inputs[0].rows();
    if (dscores.size() != n)
      throw ConfigError("backward: got " + std::to_string(dscores.size()) +
                        " score gradients for a cached batch of " + std::to_string(n));
    if (grads.tensors.empty()) grads = zero_gradients();
    for (auto& t : grads.tensors) std::fill(t.begin(), t.end(), 0.0);

    // Parameter tensor index of each layer's first tensor.
    std::vector<std::size_t> first_tensor(dense_.size());
    {
      std::size_t idx = 0;
      for (std::size_t l = 0; l < dense_.size(); ++l) {
        first_tensor[l] = idx;
        idx += 1 + (dense_[l].bias.empty() ? 0 : 1) + (l < norms_.size() ? 2 : 0);
      }
    }

    Matrix delta(n, 1);
    for (std::size_t r = 0; r < n; ++r)
      delta(r, 0) = dscores[r] * activate_grad(config_.output_activation, cache_.output_pre(r, 0));

    Matrix upstream;
    for (std::size_t l = dense_.size(); l-- > 0;) {
      const DenseLayer& layer = dense_[l];
      const Matrix& input = cache_.inputs[l];
      std::size_t t = first_tensor[l];
      dense_backward(layer, input, delta, grads.tensors[t],
                     layer.bias.empty() ? nullptr : &grads.tensors[t + 1], l > 0 ? &upstream : nullptr);
      if (l == 0) break;

      // Back through activation (and batch norm) of hidden layer l-1.
      const std::size_t h = l - 1;
      const Matrix& z = cache_.pre_activation[h];
      for (std::size_t i = 0; i < upstream.values().size(); ++i)
        upstream.values()[i] *= activate_grad(config_.hidden_activation, z.values()[i]);
      if (config_.batch_norm) {
        const auto& bn = norms_[h];
        const Matrix& xhat = cache_.xhat[h];
        const std::size_t tn = first_tensor[h] + 1 + (dense_[h].bias.empty() ? 0 : 1);
        auto& dgamma = grads.tensors[tn];
        auto& dbeta = grads.tensors[tn + 1];
        const double count = static_cast<double>(n);
        for (std::size_t c = 0; c < upstream.cols(); ++c) {
          double sum_dy = 0.0, sum_dy_xhat = 0.0;
          for (std::size_t r = 0; r < n; ++r) {
            sum_dy += upstream(r, c);
            sum_dy_xhat += upstream(r, c) * xhat(r, c);
          }
          dgamma[c] = sum_dy_xhat;
          dbeta[c] = sum_dy;
          const double scale = bn.gamma[c] * cache_.inv_std[h][c] / count;
          for (std::size_t r = 0; r < n; ++r)
            upstream(r, c) =
                scale * (count * upstream(r, c) - sum_dy - xhat(r, c) * sum_dy_xhat);
        }
      }
      delta = std::move(upstream);
      upstream = Matrix();
    }
  }

 private:
  struct Cache {
    bool valid = false;
    std::vector<Matrix> inputs;          // input to each dense layer
    std::vector<Matrix> pre_activation;  // hidden values fed to the activation
    std::vector<Matrix> xhat;            // normalised values (batch norm)
    std::vector<std::vector<double>> inv_std;
    Matrix output_pre;
  };

  void check_input(const Matrix& batch) const {
    if (batch.cols() != config_.input_dim)
      throw SchemaError("network expects " + std::to_string(config_.input_dim) +
                        " features, got " + std::to_string(batch.cols()));
    if (batch.rows() == 0) throw ConfigError("empty batch");
  }

  static void affine(const DenseLayer& layer, const Matrix& x, Matrix& out) {
    const Matrix& w = layer.weights;
    out.resize(x.rows(), w.rows());
    for (std::size_t r = 0; r < x.rows(); ++r) {
      const double* xr = x.row(r).data();
      for (std::size_t o = 0; o < w.rows(); ++o) {
        const double* wo = w.row(o).data();
        double acc = layer.bias.empty() ? 0.0 : layer.bias[o];
        for (std::size_t i = 0; i < w.cols(); ++i) acc += wo[i] * xr[i];
        out(r, o) = acc;
      }
    }
  }

  static void dense_backward(const DenseLayer& layer, const Matrix& input, const Matrix& delta,
                             std::vector<double>& dweights, std::vector<double>* dbias,
                             Matrix* dinput) {
    const Matrix& w = layer.weights;
    const std::size_t in = w.cols();
    for (std::size_t r = 0; r < delta.rows(); ++r) {
      const double* xr = input.row(r).data();
      for (std::size_t o = 0; o < w.rows(); ++o) {
        const double d = delta(r, o);
        if (d == 0.0) continue;
        double* gw = dweights.data() + o * in;
        for (std::size_t i = 0; i < in; ++i) gw[i] += d * xr[i];
        if (dbias) (*dbias)[o] += d;
      }
    }
    if (dinput) {
      dinput->resize(delta.rows(), in);
      for (std::size_t r = 0; r < delta.rows(); ++r) {
        double* dx = dinput->row(r).data();
        for (std::size_t o = 0; o < w.rows(); ++o) {
          const double d = delta(r, o);
          if (d == 0.0) continue;
          const double* wo = w.row(o).data();
          for (std::size_t i = 0; i < in; ++i) dx[i] += d * wo[i];
        }
      }
    }
  }

  NetworkConfig config_;
  std::vector<DenseLayer> dense_;
  std::vector<BatchNormLayer> norms_;
  Cache cache_;
};

// ---------------------------------------------------------------------------
// Pairwise objective

// P(i ranked above j) = 1 / (1 + exp(-(s_i - s_j))).
inline double pairwise_probability(double s_i, double s_j) {
  const double d = s_i - s_j;
  if (d >= 0.0) return 1.0 / (1.0 + std::exp(-d));
  const double e = std::exp(d);
  return e / (1.0 + e);
}

inline double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

struct PairLoss {
  double loss = 0.0;
  double d_si = 0.0;
  double d_sj = 0.0;
};

// Binary cross-entropy of the pairwise probability, written as
// softplus(-(2Y-1)(s_i - s_j)) so it stays finite for any score gap.
inline PairLoss pairwise_loss(double s_i, double s_j, int target) {
  const double sign = target ? 1.0 : -1.0;
  const double p = pairwise_probability(s_i, s_j);
  return {softplus(-sign * (s_i - s_j)), p - target, target - p};
}

struct PairBatchResult {
  double mean_loss = 0.0;
  std::size_t saturated_pairs = 0;  // both members outside the open (0, 6) band
};

// Mean pair loss over a batch of pairs and its gradients. Rows [0, B) of
// `stacked` hold the first members, rows [B, 2B) the second members; both
// halves share one Train-mode forward so batch statistics span both sides.
inline PairBatchResult pair_batch_gradients(Network& net, const Matrix& stacked,
                                            std::span<const int> targets, Gradients& grads,
                                            bool update_running = true) {
  const std::size_t b = targets.size();
  if (stacked.rows() != 2 * b) throw ConfigError("stacked pair batch must have 2B rows");
  const auto scores = net.forward_train(stacked, update_running);
  std::vector<double> dscores(2 * b, 0.0);
  PairBatchResult result;
  const double inv_b = 1.0 / static_cast<double>(b);
  const auto pre = net.last_output_pre_activation();
  const bool bounded = net.config().output_activation == Activation::ReLU6;
  for (std::size_t p = 0; p < b; ++p) {
    const auto pl = pairwise_loss(scores[p], scores[b + p], targets[p]);
    result.mean_loss += pl.loss * inv_b;
    dscores[p] = pl.d_si * inv_b;
    dscores[b + p] = pl.d_sj * inv_b;
    if (bounded) {
      auto saturated = [](double x) { return x <= 0.0 || x >= 6.0; };
      if (saturated(pre[p]) && saturated(pre[b + p])) ++result.saturated_pairs;
    }
  }
  net.backward(dscores, grads);
  return result;
}

// ---------------------------------------------------------------------------
// Adam

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
  std::uint64_t step = 0;
};

inline void optimizer_step(Network& net, const Gradients& grads, AdamState& state,
                           const AdamConfig& hp) {
  auto params = net.parameters();
  if (grads.tensors.size() != params.size())
    throw ConfigError("gradient tensors do not match network parameters");
  for (std::size_t t = 0; t < params.size(); ++t) {
    if (grads.tensors[t].size() != params[t].values.size())
      throw ConfigError("gradient shape mismatch for " + params[t].name);
    for (std::size_t i = 0; i < grads.tensors[t].size(); ++i)
      if (!std::isfinite(grads.tensors[t][i]))
        throw NumericError("non-finite gradient in " + params[t].name + "[" + std::to_string(i) +
                           "] at optimizer step " + std::to_string(state.step + 1));
  }
  if (state.m.empty()) {
    for (const auto& p : params) {
      state.m.emplace_back(p.values.size(), 0.0);
      state.v.emplace_back(p.values.size(), 0.0);
    }
  }
  ++state.step;
  const double correction1 = 1.0 - std::pow(hp.beta1, static_cast<double>(state.step));
  const double correction2 = 1.0 - std::pow(hp.beta2, static_cast<double>(state.step));
  for (std::size_t t = 0; t < params.size(); ++t) {
    auto& m = state.m[t];
    auto& v = state.v[t];
    const auto& g = grads.tensors[t];
    auto values = params[t].values;
    for (std::size_t i = 0; i < values.size(); ++i) {
      m[i] = hp.beta1 * m[i] + (1.0 - hp.beta1) * g[i];
      v[i] = hp.beta2 * v[i] + (1.0 - hp.beta2) * g[i] * g[i];
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      values[i] -= hp.learning_rate * m_hat / (std::sqrt(v_hat) + hp.epsilon);
    }
  }
}

// ---------------------------------------------------------------------------
// Finite-difference gradient check

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::string worst_parameter;
  std::size_t checked = 0;
  // Partials where both estimates are below kFiniteDifferenceResolution.
  std::size_t below_resolution = 0;
  bool passed = false;
};

// With step 1e-5 one ulp of an O(1) loss moves the central difference by
// about 5.6e-12. Partials that are exactly zero (e.g. any parameter that only
// shifts every score uniformly, which the pairwise loss ignores) therefore
// read as pure noise; below this magnitude both estimates count as agreeing.
inline constexpr double kFiniteDifferenceResolution = 1e-10;

// Compares every analytic partial of the mean pair loss against central
// differences (step 1e-5). Relative error is |ga - gf| / max(1e-8, |ga| + |gf|).
// The network's parameters are first moved to a seeded generic point (random
// gamma/beta, output bias centred in the ReLU6 band) and the batch is
// `pairs` random Gaussian pairs with random targets.
inline GradCheckResult grad_check(const NetworkConfig& config, std::uint64_t seed,
                                  double tolerance, std::size_t pairs = 8, double step = 1e-5) {
  NetworkConfig cfg = config;
  cfg.init_seed = seed;
  Network net(cfg);
  Rng rng(derive_seed(seed, 1));
  for (auto& bn : net.batch_norms()) {
    for (double& g : bn.gamma) g = rng.uniform(0.5, 1.5);
    for (double& b : bn.beta) b = rng.uniform(-0.5, 0.5);
  }
  for (auto& layer : net.dense_layers())
    for (double& b : layer.bias) b = rng.uniform(-0.5, 0.5);
  if (cfg.output_activation == Activation::ReLU6) net.dense_layers().back().bias[0] = kReLU6Centre;

  Matrix stacked(2 * pairs, cfg.input_dim);
  for (double& x : stacked.values()) x = rng.normal();
  std::vector<int> targets(pairs);
  for (int& t : targets) t = static_cast<int>(rng.below(2));

  Gradients analytic = net.zero_gradients();
  pair_batch_gradients(net, stacked, targets, analytic, /*update_running=*/false);

  auto loss_at = [&]() {
    Gradients scratch = net.zero_gradients();
    return pair_batch_gradients(net, stacked, targets, scratch, false).mean_loss;
  };

  GradCheckResult result;
  auto params = net.parameters();
  for (std::size_t t = 0; t < params.size(); ++t) {
    auto values = params[t].values;
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double original = values[i];
      values[i] = original + step;
      const double up = loss_at();
      values[i] = original - step;
      const double down = loss_at();
      values[i] = original;
      const double fd = (up - down) / (2.0 * step);
      const double ga = analytic.tensors[t][i];
      ++result.checked;
      if (std::abs(ga) < kFiniteDifferenceResolution && std::abs(fd) < kFiniteDifferenceResolution) {
        ++result.below_resolution;
        continue;
      }
      const double rel = std::abs(ga - fd) / std::max(1e-8, std::abs(ga) + std::abs(fd));
      if (rel > result.max_relative_error) {
        result.max_relative_error = rel;
        result.worst_parameter = params[t].name + "[" + std::to_string(i) + "]";
      }
    }
  }
  result.passed = result.max_relative_error < tolerance;
  return result;
}

}  // namespace prefscore
