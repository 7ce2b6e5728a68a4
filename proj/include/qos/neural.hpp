#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "qos/matrix.hpp"

namespace qos {

enum class Activation { sigmoid, tanh };
std::string_view to_string(Activation a);
Activation parse_activation(std::string_view text);

enum class TargetScaling { none, minmax };
std::string_view to_string(TargetScaling s);
TargetScaling parse_target_scaling(std::string_view text);

struct MlpConfig {
  std::vector<std::size_t> hidden_sizes{256, 128};
  double learning_rate = 0.01;
  double momentum = 0.9;
  std::size_t max_epochs = 50;
  double min_gradient = 1e-5;
  std::uint64_t seed = 1;
  Activation activation = Activation::sigmoid;
  // Samples per update; 0 means the whole training set (full batch).
  std::size_t batch_size = 1;
  TargetScaling target_scaling = TargetScaling::none;

  // Throws InputError on out-of-range values.
  void validate() const;
};

struct DenseLayer {
  Grid weights;               // out x in, row-major
  std::vector<double> bias;   // out

  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

// Feedforward regressor: hidden layers use the configured activation, the
// output layer is affine with a single unit. Inputs are min-max scaled with
// the training set's ranges; the output is mapped back through the target
// scaling.
class Mlp {
 public:
  Mlp() = default;

  // Randomly initialised network (uniform in +-1/sqrt(fan_in)) with
  // identity input and target scaling.
  static Mlp make(std::size_t input_dim, std::span<const std::size_t> hidden,
                  Activation activation, std::uint64_t seed);

  std::size_t input_dim() const { return input_min_.size(); }
  std::size_t output_dim() const { return 1; }
  Activation activation() const { return activation_; }

  // Throws InputError on a length mismatch.
  double predict(std::span<const double> input) const;

  std::vector<DenseLayer>& layers() { return layers_; }
  const std::vector<DenseLayer>& layers() const { return layers_; }

  // x_scaled = (x - min) * inv_range; prediction = offset + scale * output.
  std::vector<double>& input_min() { return input_min_; }
  std::vector<double>& input_inv_range() { return input_inv_range_; }
  const std::vector<double>& input_min() const { return input_min_; }
  const std::vector<double>& input_inv_range() const { return input_inv_range_; }
  double& target_offset() { return target_offset_; }
  double& target_scale() { return target_scale_; }
  double target_offset() const { return target_offset_; }
  double target_scale() const { return target_scale_; }

  std::size_t parameter_count() const;

  friend bool operator==(const Mlp&, const Mlp&) = default;

 private:
  std::vector<DenseLayer> layers_;
  Activation activation_ = Activation::sigmoid;
  std::vector<double> input_min_;
  std::vector<double> input_inv_range_;
  double target_offset_ = 0.0;
  double target_scale_ = 1.0;
};

struct TrainStats {
  std::size_t epochs = 0;
  bool converged = false;             // stopped on the gradient-norm rule
  double last_gradient_norm = 0.0;    // epoch mean of per-update norms
  std::vector<double> epoch_loss;     // mean 0.5 * err^2 in scaled units, per epoch
};

// SGD with momentum on 0.5 * (output - target)^2, sample order reshuffled
// every epoch under config.seed. Stops after max_epochs or once the epoch
// mean of the per-update gradient L2 norm drops below min_gradient. Inputs
// is one sample per row.
Mlp train(const MlpConfig& config, const Grid& inputs, std::span<const double> targets,
          TrainStats* stats = nullptr);

// Worst relative error |a - n| / max(|a| + |n|, 1e-6) between analytic and
// central-difference (step 1e-5) gradients of 0.5 * (predict(x) - y)^2 over
// every parameter.
double gradient_check(const Mlp& model, std::span<const double> input, double target);

}  // namespace qos
