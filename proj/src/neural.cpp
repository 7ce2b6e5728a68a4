#include "qos/neural.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "qos/error.hpp"
#include "qos/kernels.hpp"
#include "qos/rng.hpp"

namespace qos {

std::string_view to_string(Activation a) { return a == Activation::sigmoid ? "sigmoid" : "tanh"; }

Activation parse_activation(std::string_view text) {
  if (text == "sigmoid") return Activation::sigmoid;
  if (text == "tanh") return Activation::tanh;
  throw InputError("unknown activation '" + std::string(text) + "' (expected sigmoid or tanh)");
}

std::string_view to_string(TargetScaling s) { return s == TargetScaling::none ? "none" : "minmax"; }

TargetScaling parse_target_scaling(std::string_view text) {
  if (text == "none") return TargetScaling::none;
  if (text == "minmax") return TargetScaling::minmax;
  throw InputError("unknown target scaling '" + std::string(text) + "' (expected none or minmax)");
}

void MlpConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
    throw InputError("learning rate must be > 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw InputError("momentum must lie in [0, 1)");
  if (max_epochs < 1) throw InputError("max epochs must be >= 1");
  if (!(min_gradient > 0.0)) throw InputError("min gradient must be > 0");
  for (auto h : hidden_sizes)
    if (h == 0) throw InputError("hidden layer sizes must be >= 1");
}

namespace {

void activate(Activation act, std::span<double> v) {
  if (act == Activation::sigmoid) {
    for (double& x : v) x = 1.0 / (1.0 + std::exp(-x));
  } else {
    for (double& x : v) x = std::tanh(x);
  }
}

// Derivative expressed through the activation's output.
double activation_slope(Activation act, double a) {
  return act == Activation::sigmoid ? a * (1.0 - a) : 1.0 - a * a;
}

// Per-network scratch buffers for one forward/backward pass.
struct Pass {
  std::vector<std::vector<double>> act;    // act[0] = scaled input, act[l+1] = layer l output
  std::vector<std::vector<double>> delta;  // delta[l] = dJ/dz for layer l

  explicit Pass(const std::vector<DenseLayer>& layers) {
    act.resize(layers.size() + 1);
    delta.resize(layers.size());
    act[0].resize(layers.front().weights.cols());
    for (std::size_t l = 0; l < layers.size(); ++l) {
      act[l + 1].resize(layers[l].weights.rows());
      delta[l].resize(layers[l].weights.rows());
    }
  }
};

double forward(const std::vector<DenseLayer>& layers, Activation activation, Pass& pass) {
  const auto& k = kernels::active();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const Grid& w = layers[l].weights;
    k.gemv(w.data().data(), layers[l].bias.data(), pass.act[l].data(), pass.act[l + 1].data(),
           w.rows(), w.cols());
    if (l + 1 < layers.size()) activate(activation, pass.act[l + 1]);
  }
  return pass.act.back()[0];
}

// Fills pass.delta from dJ/d(output) and returns the squared L2 norm of the
// full parameter gradient.
double backward(const std::vector<DenseLayer>& layers, Activation activation, Pass& pass,
                double dout) {
  const auto& k = kernels::active();
  pass.delta.back()[0] = dout;
  double norm2 = 0.0;
  for (std::size_t l = layers.size(); l-- > 0;) {
    const auto& d = pass.delta[l];
    const auto& in = pass.act[l];
    const double dd = k.dot(d.data(), d.data(), d.size());
    norm2 += dd * (k.dot(in.data(), in.data(), in.size()) + 1.0);
    if (l == 0) break;
    auto& prev = pass.delta[l - 1];
    std::fill(prev.begin(), prev.end(), 0.0);
    const Grid& w = layers[l].weights;
    k.gemv_t(w.data().data(), d.data(), prev.data(), w.rows(), w.cols());
    for (std::size_t i = 0; i < prev.size(); ++i) prev[i] *= activation_slope(activation, in[i]);
  }
  return norm2;
}

void scale_input(const Mlp& m, std::span<const double> x, std::vector<double>& out) {
  const auto& lo = m.input_min();
  const auto& inv = m.input_inv_range();
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = (x[i] - lo[i]) * inv[i];
}

void check_finite(std::span<const double> v, const char* what) {
  for (double x : v)
    if (!std::isfinite(x)) throw InputError(std::string("non-finite value in ") + what);
}

}  // namespace

Mlp Mlp::make(std::size_t input_dim, std::span<const std::size_t> hidden, Activation activation,
              std::uint64_t seed) {
  if (input_dim == 0) throw InputError("network input dimension must be >= 1");
  Mlp m;
  m.activation_ = activation;
  m.input_min_.assign(input_dim, 0.0);
  m.input_inv_range_.assign(input_dim, 1.0);
  Rng rng(seed);
  std::size_t fan_in = input_dim;
  auto add_layer = [&](std::size_t out) {
    DenseLayer layer{Grid(out, fan_in), std::vector<double>(out)};
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (double& w : layer.weights.data()) w = rng.uniform(-bound, bound);
    for (double& b : layer.bias) b = rng.uniform(-bound, bound);
    m.layers_.push_back(std::move(layer));
    fan_in = out;
  };
  for (auto h : hidden) add_layer(h);
  add_layer(1);
  return m;
}

double Mlp::predict(std::span<const double> input) const {
  if (input.size() != input_dim()) {
    throw InputError("network expects " + std::to_string(input_dim()) + " inputs, got " +
                     std::to_string(input.size()));
  }
  Pass pass(layers_);
  scale_input(*this, input, pass.act[0]);
  return target_offset_ + target_scale_ * forward(layers_, activation_, pass);
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += l.weights.data().size() + l.bias.size();
  return n;
}

Mlp train(const MlpConfig& config, const Grid& inputs, std::span<const double> targets,
          TrainStats* stats) {
  config.validate();
  const std::size_t n = inputs.rows();
  const std::size_t dim = inputs.cols();
  if (n == 0) throw InputError("training needs at least one sample");
  if (targets.size() != n) {
    throw InputError("got " + std::to_string(n) + " input rows but " +
                     std::to_string(targets.size()) + " targets");
  }
  check_finite(inputs.data(), "network inputs");
  check_finite(targets, "network targets");

  Mlp model = Mlp::make(dim, config.hidden_sizes, config.activation,
                        derive_seed(config.seed, "mlp-init"));

  for (std::size_t f = 0; f < dim; ++f) {
    double lo = inputs(0, f);
    double hi = lo;
    for (std::size_t i = 1; i < n; ++i) {
      lo = std::min(lo, inputs(i, f));
      hi = std::max(hi, inputs(i, f));
    }
    model.input_min()[f] = lo;
    model.input_inv_range()[f] = hi > lo ? 1.0 / (hi - lo) : 0.0;
  }
  if (config.target_scaling == TargetScaling::minmax) {
    const auto [lo, hi] = std::minmax_element(targets.begin(), targets.end());
    model.target_offset() = *lo;
    model.target_scale() = *hi > *lo ? *hi - *lo : 1.0;
  }

  Grid scaled(n, dim);
  std::vector<double> label(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> row(dim);
    scale_input(model, inputs.row(i), row);
    std::copy(row.begin(), row.end(), scaled.row(i).begin());
    label[i] = (targets[i] - model.target_offset()) / model.target_scale();
  }

  auto& layers = model.layers();
  const Activation act = config.activation;
  const auto& k = kernels::active();
  const double lr = config.learning_rate;
  const double mu = config.momentum;
  const std::size_t batch = config.batch_size == 0 ? n : std::min(config.batch_size, n);

  std::vector<Grid> vel_w;
  std::vector<std::vector<double>> vel_b;
  std::vector<Grid> grad_w;
  std::vector<std::vector<double>> grad_b;
  for (const auto& l : layers) {
    vel_w.emplace_back(l.weights.rows(), l.weights.cols());
    vel_b.emplace_back(l.bias.size(), 0.0);
    if (batch > 1) {
      grad_w.emplace_back(l.weights.rows(), l.weights.cols());
      grad_b.emplace_back(l.bias.size(), 0.0);
    }
  }

  Pass pass(layers);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(derive_seed(config.seed, "mlp-order"));
  TrainStats local;

  for (std::size_t epoch = 0; epoch < config.max_epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    double loss = 0.0;
    double norm_sum = 0.0;
    std::size_t updates = 0;
    std::size_t in_batch = 0;

    for (std::size_t pos = 0; pos < n; ++pos) {
      const std::size_t s = order[pos];
      std::copy(scaled.row(s).begin(), scaled.row(s).end(), pass.act[0].begin());
      const double err = forward(layers, act, pass) - label[s];
      loss += 0.5 * err * err;
      const double norm2 = backward(layers, act, pass, err);

      if (batch == 1) {
        for (std::size_t l = 0; l < layers.size(); ++l) {
          Grid& w = layers[l].weights;
          const double* in = pass.act[l].data();
          for (std::size_t r = 0; r < w.rows(); ++r) {
            const double d = pass.delta[l][r];
            k.momentum_step(w.row(r).data(), vel_w[l].row(r).data(), in, -lr * d, mu, w.cols());
          }
          k.momentum_step(layers[l].bias.data(), vel_b[l].data(), pass.delta[l].data(), -lr, mu,
                          layers[l].bias.size());
        }
        norm_sum += std::sqrt(norm2);
        ++updates;
        continue;
      }

      for (std::size_t l = 0; l < layers.size(); ++l) {
        const double* in = pass.act[l].data();
        for (std::size_t r = 0; r < grad_w[l].rows(); ++r) {
          k.axpy(pass.delta[l][r], in, grad_w[l].row(r).data(), grad_w[l].cols());
        }
        k.axpy(1.0, pass.delta[l].data(), grad_b[l].data(), grad_b[l].size());
      }
      if (++in_batch < batch && pos + 1 < n) continue;

      const double inv = 1.0 / static_cast<double>(in_batch);
      double g2 = 0.0;
      for (std::size_t l = 0; l < layers.size(); ++l) {
        auto& gw = grad_w[l].data();
        auto& gb = grad_b[l];
        g2 += k.dot(gw.data(), gw.data(), gw.size()) + k.dot(gb.data(), gb.data(), gb.size());
        k.momentum_step(layers[l].weights.data().data(), vel_w[l].data().data(), gw.data(),
                        -lr * inv, mu, gw.size());
        k.momentum_step(layers[l].bias.data(), vel_b[l].data(), gb.data(), -lr * inv, mu,
                        gb.size());
        std::fill(gw.begin(), gw.end(), 0.0);
        std::fill(gb.begin(), gb.end(), 0.0);
      }
      norm_sum += std::sqrt(g2) * inv;
      ++updates;
      in_batch = 0;
    }

    local.epochs = epoch + 1;
    local.epoch_loss.push_back(loss / static_cast<double>(n));
    local.last_gradient_norm = norm_sum / static_cast<double>(updates);
    if (!std::isfinite(local.epoch_loss.back())) {
      throw PipelineError("network training diverged (non-finite loss)");
    }
    if (local.last_gradient_norm < config.min_gradient) {
      local.converged = true;
      break;
    }
  }
  if (stats) *stats = std::move(local);
  return model;
}

double gradient_check(const Mlp& model, std::span<const double> input, double target) {
  if (input.size() != model.input_dim()) {
    throw InputError("gradient check input has the wrong length");
  }
  const auto& layers = model.layers();
  const double scale = model.target_scale();

  Pass pass(layers);
  scale_input(model, input, pass.act[0]);
  const double pred = model.target_offset() + scale * forward(layers, model.activation(), pass);
  backward(layers, model.activation(), pass, scale * (pred - target));

  auto loss = [&](const Mlp& m) {
    const double e = m.predict(input) - target;
    return 0.5 * e * e;
  };
  constexpr double h = 1e-5;
  Mlp probe = model;
  double worst = 0.0;
  auto compare = [&](double analytic, double& param) {
    const double saved = param;
    param = saved + h;
    const double up = loss(probe);
    param = saved - h;
    const double down = loss(probe);
    param = saved;
    const double numeric = (up - down) / (2.0 * h);
    const double err = std::abs(analytic - numeric) /
                       std::max(std::abs(analytic) + std::abs(numeric), 1e-6);
    worst = std::max(worst, err);
  };

  for (std::size_t l = 0; l < layers.size(); ++l) {
    auto& w = probe.layers()[l].weights;
    for (std::size_t r = 0; r < w.rows(); ++r) {
      const double d = pass.delta[l][r];
      for (std::size_t c = 0; c < w.cols(); ++c) compare(d * pass.act[l][c], w(r, c));
      compare(d, probe.layers()[l].bias[r]);
    }
  }
  return worst;
}

}  // namespace qos
