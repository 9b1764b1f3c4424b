#pragma once

// Small dense networks with hand-written reverse mode, Adam, and the
// tanh-squashed Gaussian used by the actor.
//
// Batches are column-major: every column of an input matrix is one sample.

#include <Eigen/Dense>

#include <stdexcept>
#include <vector>

#include "seads/binary_io.hpp"
#include "seads/rng.hpp"

namespace seads::nn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Output nonlinearity. `gaussian` splits the output into a mean half and a
/// log-std half clamped to [kLogStdMin, kLogStdMax].
enum class OutputHead : std::uint8_t { linear = 0, sigmoid = 1, gaussian = 2 };

inline constexpr double kLogStdMin = -20.0;
inline constexpr double kLogStdMax = 2.0;

struct Layer {
  Matrix weight;  // out x in
  Vector bias;
};

struct MlpGradients {
  std::vector<Matrix> weight;
  std::vector<Vector> bias;

  void set_zero();
  bool all_finite() const;
  MlpGradients& operator+=(const MlpGradients& other);
};

/// Activations retained by a training forward pass.
struct MlpCache {
  std::vector<Matrix> inputs;  // input of every layer
  Matrix last_pre;             // pre-activation of the output layer
  bool valid = false;
};

class Mlp {
 public:
  Mlp() = default;
  /// `sizes` = {input, hidden..., output}; weights and biases drawn from
  /// U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
  Mlp(const std::vector<int>& sizes, OutputHead head, Rng& rng);

  int input_dim() const { return static_cast<int>(layers_.front().weight.cols()); }
  int output_dim() const { return static_cast<int>(layers_.back().weight.rows()); }
  OutputHead head() const { return head_; }
  std::vector<Layer>& layers() { return layers_; }
  const std::vector<Layer>& layers() const { return layers_; }
  std::size_t num_parameters() const;

  Matrix forward(const Matrix& input) const;
  Matrix forward(const Matrix& input, MlpCache& cache) const;

  /// Back-propagates `grad_output` (d loss / d output). Parameter gradients
  /// are written into `grads` when non-null; returns d loss / d input.
  Matrix backward(const MlpCache& cache, const Matrix& grad_output, MlpGradients* grads) const;

  MlpGradients zero_gradients() const;

  /// this <- tau * online + (1 - tau) * this
  void soft_update_from(const Mlp& online, double tau);

  void write(BinaryWriter& out) const;
  static Mlp read(BinaryReader& in);

  friend bool operator==(const Mlp& a, const Mlp& b);

 private:
  void check_input(const Matrix& input) const;
  Matrix apply_head(const Matrix& pre) const;

  std::vector<Layer> layers_;
  OutputHead head_ = OutputHead::linear;
};

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  AdamConfig config;
  std::int64_t step = 0;
  MlpGradients first_moment;
  MlpGradients second_moment;

  static AdamState for_network(const Mlp& net, AdamConfig config);
  void write(BinaryWriter& out) const;
  static AdamState read(BinaryReader& in);
};

/// One bias-corrected Adam update of `net`. Throws NumericalError on
/// non-finite gradients, leaving `net` and `state` untouched.
void adam_step(Mlp& net, const MlpGradients& grads, AdamState& state);

/// Batch of reparameterized samples a = tanh(mean + std * noise).
struct SquashedGaussian {
  Matrix mean;
  Matrix log_std;
  Matrix noise;
  Matrix action;
  RowVector log_prob;  // includes the tanh change-of-variables term
};

/// `head_out` holds [mean; log_std] as produced by an OutputHead::gaussian net.
SquashedGaussian squashed_gaussian(const Matrix& head_out, const Matrix& noise);
SquashedGaussian squashed_gaussian(const Matrix& head_out, Rng& rng);
/// tanh(mean) for every column.
Matrix squashed_mode(const Matrix& head_out);

/// Gradient w.r.t. [mean; log_std] of sum(grad_action .* action) + grad_log_prob * log_prob^T.
Matrix squashed_gaussian_backward(const SquashedGaussian& sample, const Matrix& grad_action,
                                  const RowVector& grad_log_prob);

}  // namespace seads::nn
