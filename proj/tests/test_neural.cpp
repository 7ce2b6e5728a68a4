#include <doctest.h>

#include <cmath>
#include <vector>

#include "qos/error.hpp"
#include "qos/neural.hpp"
#include "qos/rng.hpp"

using namespace qos;

namespace {

MlpConfig small(std::vector<std::size_t> hidden, std::size_t epochs) {
  MlpConfig c;
  c.hidden_sizes = std::move(hidden);
  c.max_epochs = epochs;
  c.min_gradient = 1e-9;
  return c;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// 0.5 * mean squared error of a model over rows of x.
double half_mse(const Mlp& m, const Grid& x, const std::vector<double>& y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const double e = m.predict(x.row(i)) - y[i];
    s += 0.5 * e * e;
  }
  return s / double(x.rows());
}

Mlp random_net(Rng& rng, std::size_t dim, std::vector<std::size_t> hidden, Activation act) {
  Mlp m = Mlp::make(dim, hidden, act, rng.next());
  for (std::size_t f = 0; f < dim; ++f) {
    m.input_min()[f] = rng.uniform(-1, 1);
    m.input_inv_range()[f] = rng.uniform(0.2, 2.0);
  }
  m.target_offset() = rng.uniform(-1, 1);
  m.target_scale() = rng.uniform(0.5, 3.0);
  return m;
}

}  // namespace

TEST_CASE("constant targets") {
  Rng rng(4);
  Grid x(50, 3);
  for (double& v : x.data()) v = rng.uniform(0, 10);
  const std::vector<double> y(50, 3.7);
  const Mlp m = train(small({6}, 150), x, y);
  for (std::size_t i = 0; i < 50; ++i) CHECK(m.predict(x.row(i)) == doctest::Approx(3.7).epsilon(0.01));
}

TEST_CASE("linear ground truth is learnt") {
  Rng rng(9);
  auto sample = [&](std::size_t n, Grid& x, std::vector<double>& y) {
    x = Grid(n, 2);
    y.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      x(i, 0) = rng.uniform(0, 1);
      x(i, 1) = rng.uniform(0, 1);
      y[i] = 2 * x(i, 0) + 3 * x(i, 1);
    }
  };
  Grid x, xt;
  std::vector<double> y, yt;
  sample(200, x, y);
  sample(100, xt, yt);
  const Mlp m = train(small({16}, 200), x, y);
  CHECK(2.0 * half_mse(m, xt, yt) < 1e-2);
}

TEST_CASE("training is bit-reproducible") {
  Rng rng(1);
  Grid x(40, 4);
  std::vector<double> y(40);
  for (double& v : x.data()) v = rng.uniform(0, 2);
  for (double& v : y) v = rng.uniform(0, 5);
  for (std::size_t batch : {1u, 8u, 0u}) {
    MlpConfig c = small({5, 3}, 20);
    c.batch_size = batch;
    TrainStats sa, sb;
    const Mlp a = train(c, x, y, &sa);
    const Mlp b = train(c, x, y, &sb);
    CHECK(a == b);
    CHECK(sa.epoch_loss == sb.epoch_loss);
    c.seed = 2;
    CHECK_FALSE(train(c, x, y) == a);
  }
}

TEST_CASE("zero weights return the output bias") {
  Mlp m = Mlp::make(3, std::vector<std::size_t>{4}, Activation::sigmoid, 1);
  for (auto& l : m.layers()) {
    for (double& w : l.weights.data()) w = 0.0;
    for (double& b : l.bias) b = 0.0;
  }
  m.layers().back().bias[0] = 1.25;
  const double in1[] = {0, 0, 0};
  const double in2[] = {5, -3, 100};
  CHECK(m.predict(in1) == 1.25);
  CHECK(m.predict(in2) == 1.25);
}

TEST_CASE("hand-evaluated 2-2-1 forward pass") {
  Mlp m = Mlp::make(2, std::vector<std::size_t>{2}, Activation::sigmoid, 1);
  auto& h = m.layers()[0];
  h.weights(0, 0) = 0.5;
  h.weights(0, 1) = -1.0;
  h.weights(1, 0) = 2.0;
  h.weights(1, 1) = 0.25;
  h.bias = {0.1, -0.2};
  auto& o = m.layers()[1];
  o.weights(0, 0) = 1.5;
  o.weights(0, 1) = -0.5;
  o.bias = {0.3};
  const double x[] = {1.0, 2.0};
  const double expect = 0.3 + 1.5 * sigmoid(0.5 - 2.0 + 0.1) - 0.5 * sigmoid(2.0 + 0.5 - 0.2);
  CHECK(m.predict(x) == doctest::Approx(expect).epsilon(1e-14));

  // Scaling: x' = (x - 1) * 0.5, output mapped through 2 + 3 y.
  m.input_min() = {1.0, 1.0};
  m.input_inv_range() = {0.5, 0.5};
  m.target_offset() = 2.0;
  m.target_scale() = 3.0;
  const double y = 0.3 + 1.5 * sigmoid(-0.5 + 0.1) - 0.5 * sigmoid(0.125 - 0.2);
  CHECK(m.predict(x) == doctest::Approx(2.0 + 3.0 * y).epsilon(1e-14));

  Mlp t = Mlp::make(1, std::vector<std::size_t>{1}, Activation::tanh, 1);
  t.layers()[0].weights(0, 0) = 0.7;
  t.layers()[0].bias = {0.0};
  t.layers()[1].weights(0, 0) = 2.0;
  t.layers()[1].bias = {0.0};
  const double one[] = {1.0};
  CHECK(t.predict(one) == doctest::Approx(2.0 * std::tanh(0.7)));
  CHECK(m.parameter_count() == 9);
}

TEST_CASE("initial weights respect the fan-in bound") {
  const Mlp m = Mlp::make(16, std::vector<std::size_t>{9, 4}, Activation::sigmoid, 5);
  std::size_t fan = 16;
  for (const auto& l : m.layers()) {
    for (double w : l.weights.data()) CHECK(std::abs(w) <= 1.0 / std::sqrt(double(fan)));
    fan = l.weights.rows();
  }
  CHECK(Mlp::make(16, std::vector<std::size_t>{9, 4}, Activation::sigmoid, 5) == m);
}

TEST_CASE("gradient check on random networks") {
  Rng rng(77);
  double worst = 0.0;
  for (int n = 0; n < 20; ++n) {
    const std::size_t dim = 1 + rng.index(6);
    std::vector<std::size_t> hidden;
    for (std::size_t l = 0, depth = rng.index(3); l < depth; ++l) hidden.push_back(1 + rng.index(7));
    const Activation act = rng.index(2) ? Activation::tanh : Activation::sigmoid;
    const Mlp m = random_net(rng, dim, hidden, act);
    std::vector<double> x(dim);
    for (double& v : x) v = rng.uniform(-2, 2);
    worst = std::max(worst, gradient_check(m, x, rng.uniform(-2, 2)));
  }
  CHECK(worst < 1e-4);
}

TEST_CASE("gradient check edge cases") {
  Rng rng(3);
  const Mlp linear = random_net(rng, 4, {}, Activation::sigmoid);
  const double x[] = {0.3, -1.0, 2.0, 0.5};
  CHECK(gradient_check(linear, x, 1.5) < 1e-7);

  Mlp zero = Mlp::make(3, std::vector<std::size_t>{2}, Activation::sigmoid, 1);
  for (auto& l : zero.layers()) {
    for (double& w : l.weights.data()) w = 0.0;
    for (double& b : l.bias) b = 0.0;
  }
  const double z[] = {0, 0, 0};
  CHECK(gradient_check(zero, z, 0.0) == 0.0);
  CHECK_THROWS_AS(gradient_check(zero, x, 0.0), InputError);
}

TEST_CASE("one full-batch step follows the finite-difference gradient") {
  Rng rng(12);
  Grid x(6, 3);
  std::vector<double> y(6);
  for (double& v : x.data()) v = rng.uniform(0, 4);
  for (double& v : y) v = rng.uniform(0, 2);

  MlpConfig c = small({3}, 1);
  c.batch_size = 0;
  c.momentum = 0.0;
  c.learning_rate = 0.05;
  const Mlp trained = train(c, x, y);

  // Rebuild the starting point: same initial draw, same min-max scaling.
  Mlp start = Mlp::make(3, c.hidden_sizes, c.activation, derive_seed(c.seed, "mlp-init"));
  start.input_min() = trained.input_min();
  start.input_inv_range() = trained.input_inv_range();

  const double h = 1e-6;
  for (std::size_t l = 0; l < start.layers().size(); ++l) {
    auto& w = start.layers()[l].weights.data();
    for (std::size_t p = 0; p < w.size(); ++p) {
      const double saved = w[p];
      w[p] = saved + h;
      const double up = half_mse(start, x, y);
      w[p] = saved - h;
      const double down = half_mse(start, x, y);
      w[p] = saved;
      const double grad = (up - down) / (2 * h);
      CHECK(trained.layers()[l].weights.data()[p] ==
            doctest::Approx(saved - c.learning_rate * grad).epsilon(1e-7));
    }
  }
}

TEST_CASE("full-batch loss of a linear model never rises") {
  Rng rng(5);
  Grid x(30, 3);
  std::vector<double> y(30);
  for (double& v : x.data()) v = rng.uniform(0, 1);
  for (std::size_t i = 0; i < 30; ++i) y[i] = 1 + x(i, 0) - 2 * x(i, 2) + rng.uniform(-0.1, 0.1);
  MlpConfig c = small({}, 200);
  c.batch_size = 0;
  c.momentum = 0.0;
  c.learning_rate = 0.1;
  TrainStats s;
  train(c, x, y, &s);
  REQUIRE(s.epoch_loss.size() == 200);
  for (std::size_t e = 1; e < s.epoch_loss.size(); ++e) CHECK(s.epoch_loss[e] <= s.epoch_loss[e - 1]);
}

TEST_CASE("gradient-norm stopping rule") {
  Grid x(10, 1);
  for (std::size_t i = 0; i < 10; ++i) x(i, 0) = double(i);
  const std::vector<double> y(10, 0.5);
  MlpConfig c = small({}, 5000);
  c.min_gradient = 1e-3;
  TrainStats s;
  train(c, x, y, &s);
  CHECK(s.converged);
  CHECK(s.epochs < 5000);
  CHECK(s.last_gradient_norm < 1e-3);
}

TEST_CASE("minmax target scaling") {
  Rng rng(8);
  Grid x(60, 2);
  std::vector<double> y(60);
  for (std::size_t i = 0; i < 60; ++i) {
    x(i, 0) = rng.uniform(0, 1);
    x(i, 1) = rng.uniform(0, 1);
    y[i] = 500 + 300 * x(i, 0);
  }
  MlpConfig c = small({8}, 150);
  c.target_scaling = TargetScaling::minmax;
  const Mlp m = train(c, x, y);
  CHECK(m.target_scale() == doctest::Approx(*std::max_element(y.begin(), y.end()) -
                                            *std::min_element(y.begin(), y.end())));
  CHECK(std::sqrt(2.0 * half_mse(m, x, y)) < 15.0);
}

TEST_CASE("configuration and input errors") {
  Grid x(3, 2, 1.0);
  std::vector<double> y(3, 1.0);
  MlpConfig c = small({2}, 2);
  c.learning_rate = 0.0;
  CHECK_THROWS_AS(train(c, x, y), InputError);
  c = small({2}, 2);
  c.momentum = 1.0;
  CHECK_THROWS_AS(train(c, x, y), InputError);
  c = small({0}, 2);
  CHECK_THROWS_AS(train(c, x, y), InputError);
  c = small({2}, 2);
  CHECK_THROWS_AS(train(c, x, std::vector<double>(2, 1.0)), InputError);
  y[1] = std::nan("");
  CHECK_THROWS_AS(train(c, x, y), InputError);
  CHECK_THROWS_AS(train(c, Grid(0, 2), std::vector<double>{}), InputError);

  const Mlp m = Mlp::make(2, std::vector<std::size_t>{}, Activation::tanh, 1);
  const double three[] = {1, 2, 3};
  CHECK_THROWS_AS(m.predict(three), InputError);
  CHECK(parse_activation("tanh") == Activation::tanh);
  CHECK_THROWS_AS(parse_activation("relu"), InputError);
  CHECK(parse_target_scaling("minmax") == TargetScaling::minmax);
}
