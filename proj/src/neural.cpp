#include "seads/neural.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace seads::nn {

namespace {

Matrix sigmoid(const Matrix& x) {
  return x.unaryExpr([](double v) {
    if (v >= 0) return 1.0 / (1.0 + std::exp(-v));
    const double e = std::exp(v);
    return e / (1.0 + e);
  });
}

// log(1 + exp(x)) without overflow
double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

void write_matrix(BinaryWriter& out, const Matrix& m) {
  out.put<std::uint32_t>(static_cast<std::uint32_t>(m.rows()));
  out.put<std::uint32_t>(static_cast<std::uint32_t>(m.cols()));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) out.put<double>(m(r, c));
}

Matrix read_matrix(BinaryReader& in) {
  const auto rows = in.get<std::uint32_t>();
  const auto cols = in.get<std::uint32_t>();
  if (rows > (1u << 16) || cols > (1u << 16)) throw FormatError("matrix shape out of range");
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = in.get<double>();
  return m;
}

void write_vector(BinaryWriter& out, const Vector& v) {
  out.put<std::uint32_t>(static_cast<std::uint32_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) out.put<double>(v(i));
}

Vector read_vector(BinaryReader& in) {
  const auto n = in.get<std::uint32_t>();
  if (n > (1u << 16)) throw FormatError("vector length out of range");
  Vector v(n);
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = in.get<double>();
  return v;
}

}  // namespace

void MlpGradients::set_zero() {
  for (auto& w : weight) w.setZero();
  for (auto& b : bias) b.setZero();
}

bool MlpGradients::all_finite() const {
  for (const auto& w : weight)
    if (!w.allFinite()) return false;
  for (const auto& b : bias)
    if (!b.allFinite()) return false;
  return true;
}

MlpGradients& MlpGradients::operator+=(const MlpGradients& other) {
  for (std::size_t i = 0; i < weight.size(); ++i) {
    weight[i] += other.weight[i];
    bias[i] += other.bias[i];
  }
  return *this;
}

Mlp::Mlp(const std::vector<int>& sizes, OutputHead head, Rng& rng) : head_(head) {
  if (sizes.size() < 2) throw std::invalid_argument("Mlp needs at least an input and an output size");
  for (int s : sizes)
    if (s <= 0) throw std::invalid_argument("Mlp layer sizes must be positive");
  if (head == OutputHead::gaussian && sizes.back() % 2 != 0)
    throw std::invalid_argument("gaussian head needs an even output size");
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(sizes[l]));
    Layer layer{Matrix(sizes[l + 1], sizes[l]), Vector(sizes[l + 1])};
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r)
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) layer.weight(r, c) = bound * unit(rng);
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r) layer.bias(r) = bound * unit(rng);
    layers_.push_back(std::move(layer));
  }
}

std::size_t Mlp::num_parameters() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
  return n;
}

void Mlp::check_input(const Matrix& input) const {
  if (layers_.empty()) throw std::logic_error("Mlp used before initialization");
  if (input.rows() != input_dim())
    throw std::invalid_argument("Mlp input has " + std::to_string(input.rows()) + " rows, expected " +
                                std::to_string(input_dim()));
}

Matrix Mlp::apply_head(const Matrix& pre) const {
  switch (head_) {
    case OutputHead::linear: return pre;
    case OutputHead::sigmoid: return sigmoid(pre);
    case OutputHead::gaussian: {
      Matrix out = pre;
      const auto m = pre.rows() / 2;
      out.bottomRows(m) = pre.bottomRows(m).cwiseMax(kLogStdMin).cwiseMin(kLogStdMax);
      return out;
    }
  }
  return pre;
}

Matrix Mlp::forward(const Matrix& input) const {
  check_input(input);
  Matrix x = input;
  for (std::size_t l = 0; l + 1 < layers_.size(); ++l) {
    Matrix pre = layers_[l].weight * x;
    pre.colwise() += layers_[l].bias;
    x = pre.cwiseMax(0.0);
  }
  Matrix pre = layers_.back().weight * x;
  pre.colwise() += layers_.back().bias;
  return apply_head(pre);
}

Matrix Mlp::forward(const Matrix& input, MlpCache& cache) const {
  check_input(input);
  cache.inputs.resize(layers_.size());
  cache.inputs[0] = input;
  for (std::size_t l = 0; l + 1 < layers_.size(); ++l) {
    Matrix pre = layers_[l].weight * cache.inputs[l];
    pre.colwise() += layers_[l].bias;
    cache.inputs[l + 1] = pre.cwiseMax(0.0);
  }
  cache.last_pre = layers_.back().weight * cache.inputs.back();
  cache.last_pre.colwise() += layers_.back().bias;
  cache.valid = true;
  return apply_head(cache.last_pre);
}

Matrix Mlp::backward(const MlpCache& cache, const Matrix& grad_output, MlpGradients* grads) const {
  if (!cache.valid || cache.inputs.size() != layers_.size())
    throw std::logic_error("Mlp::backward called without a matching forward cache");
  if (grad_output.rows() != output_dim() || grad_output.cols() != cache.last_pre.cols())
    throw std::invalid_argument("Mlp::backward gradient shape mismatch");

  Matrix g = grad_output;
  switch (head_) {
    case OutputHead::linear: break;
    case OutputHead::sigmoid: {
      const Matrix s = sigmoid(cache.last_pre);
      g = g.cwiseProduct(s.cwiseProduct((1.0 - s.array()).matrix()));
      break;
    }
    case OutputHead::gaussian: {
      const auto m = g.rows() / 2;
      for (Eigen::Index c = 0; c < g.cols(); ++c)
        for (Eigen::Index r = m; r < g.rows(); ++r) {
          const double raw = cache.last_pre(r, c);
          if (raw < kLogStdMin || raw > kLogStdMax) g(r, c) = 0.0;
        }
      break;
    }
  }

  if (grads && grads->weight.size() != layers_.size()) *grads = zero_gradients();
  for (std::size_t l = layers_.size(); l-- > 0;) {
    if (grads) {
      grads->weight[l].noalias() = g * cache.inputs[l].transpose();
      grads->bias[l] = g.rowwise().sum();
    }
    Matrix gx = layers_[l].weight.transpose() * g;
    if (l > 0) gx = gx.cwiseProduct((cache.inputs[l].array() > 0.0).cast<double>().matrix());
    g = std::move(gx);
  }
  return g;
}

MlpGradients Mlp::zero_gradients() const {
  MlpGradients g;
  for (const auto& l : layers_) {
    g.weight.push_back(Matrix::Zero(l.weight.rows(), l.weight.cols()));
    g.bias.push_back(Vector::Zero(l.bias.size()));
  }
  return g;
}

void Mlp::soft_update_from(const Mlp& online, double tau) {
  if (online.layers_.size() != layers_.size()) throw std::invalid_argument("soft update between different shapes");
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    layers_[l].weight = tau * online.layers_[l].weight + (1.0 - tau) * layers_[l].weight;
    layers_[l].bias = tau * online.layers_[l].bias + (1.0 - tau) * layers_[l].bias;
  }
}

// Layout: u32 layer count, u8 head, then per layer u32 rows, u32 cols,
// rows*cols f64 (row-major), u32 rows, rows f64 bias.
void Mlp::write(BinaryWriter& out) const {
  out.put<std::uint32_t>(static_cast<std::uint32_t>(layers_.size()));
  out.put<std::uint8_t>(static_cast<std::uint8_t>(head_));
  for (const auto& l : layers_) {
    write_matrix(out, l.weight);
    write_vector(out, l.bias);
  }
}

Mlp Mlp::read(BinaryReader& in) {
  Mlp net;
  const auto count = in.get<std::uint32_t>();
  if (count == 0 || count > 64) throw FormatError("network layer count out of range");
  const auto head = in.get<std::uint8_t>();
  if (head > 2) throw FormatError("unknown network output head");
  net.head_ = static_cast<OutputHead>(head);
  for (std::uint32_t i = 0; i < count; ++i) {
    Layer l{read_matrix(in), read_vector(in)};
    if (l.bias.size() != l.weight.rows()) throw FormatError("bias length does not match weight rows");
    if (!net.layers_.empty() && net.layers_.back().weight.rows() != l.weight.cols())
      throw FormatError("incompatible consecutive layer shapes");
    net.layers_.push_back(std::move(l));
  }
  return net;
}

bool operator==(const Mlp& a, const Mlp& b) {
  if (a.head_ != b.head_ || a.layers_.size() != b.layers_.size()) return false;
  for (std::size_t l = 0; l < a.layers_.size(); ++l) {
    const auto& x = a.layers_[l];
    const auto& y = b.layers_[l];
    if (x.weight.rows() != y.weight.rows() || x.weight.cols() != y.weight.cols()) return false;
    if (x.weight != y.weight || x.bias != y.bias) return false;
  }
  return true;
}

AdamState AdamState::for_network(const Mlp& net, AdamConfig config) {
  return AdamState{config, 0, net.zero_gradients(), net.zero_gradients()};
}

void AdamState::write(BinaryWriter& out) const {
  out.put<double>(config.learning_rate);
  out.put<double>(config.beta1);
  out.put<double>(config.beta2);
  out.put<double>(config.epsilon);
  out.put<std::int64_t>(step);
  out.put<std::uint32_t>(static_cast<std::uint32_t>(first_moment.weight.size()));
  for (std::size_t l = 0; l < first_moment.weight.size(); ++l) {
    write_matrix(out, first_moment.weight[l]);
    write_vector(out, first_moment.bias[l]);
    write_matrix(out, second_moment.weight[l]);
    write_vector(out, second_moment.bias[l]);
  }
}

AdamState AdamState::read(BinaryReader& in) {
  AdamState s;
  s.config.learning_rate = in.get<double>();
  s.config.beta1 = in.get<double>();
  s.config.beta2 = in.get<double>();
  s.config.epsilon = in.get<double>();
  s.step = in.get<std::int64_t>();
  const auto count = in.get<std::uint32_t>();
  if (count > 64) throw FormatError("optimizer layer count out of range");
  for (std::uint32_t l = 0; l < count; ++l) {
    s.first_moment.weight.push_back(read_matrix(in));
    s.first_moment.bias.push_back(read_vector(in));
    s.second_moment.weight.push_back(read_matrix(in));
    s.second_moment.bias.push_back(read_vector(in));
  }
  return s;
}

void adam_step(Mlp& net, const MlpGradients& grads, AdamState& state) {
  auto& layers = net.layers();
  if (grads.weight.size() != layers.size() || state.first_moment.weight.size() != layers.size())
    throw std::invalid_argument("adam_step: gradient/optimizer shapes do not match the network");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    if (grads.weight[l].rows() != layers[l].weight.rows() || grads.weight[l].cols() != layers[l].weight.cols() ||
        grads.bias[l].size() != layers[l].bias.size())
      throw std::invalid_argument("adam_step: gradient shape mismatch in layer " + std::to_string(l));
  }
  if (!grads.all_finite()) throw NumericalError("adam_step: non-finite gradient");

  const auto& c = state.config;
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double corr1 = 1.0 - std::pow(c.beta1, t);
  const double corr2 = 1.0 - std::pow(c.beta2, t);
  auto update = [&](auto& param, const auto& g, auto& m, auto& v) {
    m = c.beta1 * m + (1.0 - c.beta1) * g;
    v = c.beta2 * v + (1.0 - c.beta2) * g.cwiseAbs2();
    param.array() -= c.learning_rate * (m.array() / corr1) / ((v.array() / corr2).sqrt() + c.epsilon);
  };
  for (std::size_t l = 0; l < layers.size(); ++l) {
    update(layers[l].weight, grads.weight[l], state.first_moment.weight[l], state.second_moment.weight[l]);
    update(layers[l].bias, grads.bias[l], state.first_moment.bias[l], state.second_moment.bias[l]);
  }
}

SquashedGaussian squashed_gaussian(const Matrix& head_out, const Matrix& noise) {
  const auto m = head_out.rows() / 2;
  if (noise.rows() != m || noise.cols() != head_out.cols())
    throw std::invalid_argument("squashed_gaussian: noise shape mismatch");
  SquashedGaussian s;
  s.mean = head_out.topRows(m);
  s.log_std = head_out.bottomRows(m);
  s.noise = noise;
  const Matrix pre = s.mean + s.log_std.array().exp().matrix().cwiseProduct(noise);
  s.action = pre.array().tanh().matrix();
  const double half_log_2pi = 0.5 * std::log(2.0 * std::numbers::pi);
  s.log_prob = RowVector::Zero(head_out.cols());
  for (Eigen::Index c = 0; c < head_out.cols(); ++c) {
    double lp = 0.0;
    for (Eigen::Index r = 0; r < m; ++r) {
      const double u = pre(r, c);
      // log(1 - tanh(u)^2) = 2 (log 2 - u - softplus(-2u))
      const double log_jac = 2.0 * (std::numbers::ln2 - u - softplus(-2.0 * u));
      lp += -0.5 * noise(r, c) * noise(r, c) - s.log_std(r, c) - half_log_2pi - log_jac;
    }
    s.log_prob(c) = lp;
  }
  return s;
}

SquashedGaussian squashed_gaussian(const Matrix& head_out, Rng& rng) {
  Matrix noise(head_out.rows() / 2, head_out.cols());
  for (Eigen::Index c = 0; c < noise.cols(); ++c)
    for (Eigen::Index r = 0; r < noise.rows(); ++r) noise(r, c) = standard_normal(rng);
  return squashed_gaussian(head_out, noise);
}

Matrix squashed_mode(const Matrix& head_out) { return head_out.topRows(head_out.rows() / 2).array().tanh().matrix(); }

Matrix squashed_gaussian_backward(const SquashedGaussian& sample, const Matrix& grad_action,
                                  const RowVector& grad_log_prob) {
  const auto m = sample.mean.rows();
  const auto b = sample.mean.cols();
  Matrix out(2 * m, b);
  for (Eigen::Index c = 0; c < b; ++c)
    for (Eigen::Index r = 0; r < m; ++r) {
      const double a = sample.action(r, c);
      // d log_prob / d u = 2 tanh(u); d a / d u = 1 - a^2
      const double g_u = grad_action(r, c) * (1.0 - a * a) + grad_log_prob(c) * 2.0 * a;
      out(r, c) = g_u;
      out(m + r, c) = g_u * std::exp(sample.log_std(r, c)) * sample.noise(r, c) - grad_log_prob(c);
    }
  return out;
}

}  // namespace seads::nn
