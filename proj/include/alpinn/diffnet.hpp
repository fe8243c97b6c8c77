#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace alpinn::diffnet {

/// Largest spatial dimension and largest network output handled by the jet
/// machinery (geometry is 1D-3D, fields are scalar or 3-vectors).
inline constexpr int kMaxDim = 3;

using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Weights and biases of a dense tanh MLP, stored in one flat vector.
///
/// Flat layout, layer by layer: the weight matrix of layer l in row-major
/// order (shape layer_sizes[l+1] x layer_sizes[l]) followed by its bias.
/// Parameter gradients use the same layout.
class MlpParams {
 public:
  MlpParams() = default;
  /// Zero-initialized parameters. Throws InvalidArchitecture.
  explicit MlpParams(std::vector<int> layer_sizes);

  const std::vector<int>& layer_sizes() const noexcept { return sizes_; }
  int num_layers() const noexcept { return static_cast<int>(sizes_.size()) - 1; }
  int input_dim() const noexcept { return sizes_.front(); }
  int output_dim() const noexcept { return sizes_.back(); }
  Eigen::Index size() const noexcept { return flat_.size(); }

  Eigen::Map<RowMajorMatrix> weight(int layer);
  Eigen::Map<const RowMajorMatrix> weight(int layer) const;
  Eigen::Map<Eigen::VectorXd> bias(int layer);
  Eigen::Map<const Eigen::VectorXd> bias(int layer) const;

  Eigen::Index weight_offset(int layer) const noexcept { return offsets_[layer]; }
  Eigen::Index bias_offset(int layer) const noexcept {
    return offsets_[layer] + static_cast<Eigen::Index>(sizes_[layer + 1]) * sizes_[layer];
  }

  Eigen::VectorXd& flat() noexcept { return flat_; }
  const Eigen::VectorXd& flat() const noexcept { return flat_; }

 private:
  std::vector<int> sizes_;
  std::vector<Eigen::Index> offsets_;
  Eigen::VectorXd flat_;
};

/// Sum over layers of (fan_out * fan_in + fan_out).
Eigen::Index parameter_count(std::span<const int> layer_sizes);

/// Xavier-uniform weights in [-a, a], a = sqrt(6 / (fan_in + fan_out)), zero biases.
MlpParams init_mlp(std::vector<int> layer_sizes, std::uint64_t seed);

/// Plain feedforward pass: affine + tanh on hidden layers, affine output.
Eigen::VectorXd forward(const MlpParams& params, const Eigen::Ref<const Eigen::VectorXd>& x);

/// Which spatial derivatives a jet evaluation carries.
///  - value:     output only
///  - gradient:  + first derivatives
///  - laplacian: + trace of the Hessian (cheaper than the full Hessian)
///  - hessian:   + full symmetric Hessian (laplacian filled as its trace)
enum class JetOrder { value = 0, gradient = 1, laplacian = 2, hessian = 3 };

/// Value and spatial derivatives of a vector field at one point.
///
/// Fixed capacity: at most kMaxDim outputs and inputs. grad[k][i] is
/// d value[k] / dx_i; hess[k][i][j] the second derivative. The same type
/// carries adjoints (seeds) in reverse passes.
struct JetValue {
  int outputs = 0;
  int inputs = 0;
  JetOrder order = JetOrder::value;
  std::array<double, kMaxDim> value{};
  std::array<std::array<double, kMaxDim>, kMaxDim> grad{};
  std::array<double, kMaxDim> lap{};
  std::array<std::array<std::array<double, kMaxDim>, kMaxDim>, kMaxDim> hess{};

  JetValue() = default;
  JetValue(int outputs_, int inputs_, JetOrder order_) : outputs(outputs_), inputs(inputs_), order(order_) {}

  bool has_gradient() const noexcept { return order >= JetOrder::gradient; }
  bool has_laplacian() const noexcept { return order >= JetOrder::laplacian; }
  bool has_hessian() const noexcept { return order == JetOrder::hessian; }
};

/// Exact value/gradient (order 1) or value/gradient/Hessian (order 2) of the
/// raw network output with respect to its input.
JetValue jet(const MlpParams& params, const Eigen::Ref<const Eigen::VectorXd>& x, int order);

/// Index of each derivative channel for a given input dimension and order.
class ChannelLayout {
 public:
  ChannelLayout(int inputs, JetOrder order);

  int count() const noexcept { return count_; }
  int inputs() const noexcept { return inputs_; }
  JetOrder order() const noexcept { return order_; }
  static constexpr int value() noexcept { return 0; }
  int grad(int i) const noexcept { return 1 + i; }
  int laplacian() const noexcept { return 1 + inputs_; }
  /// Hessian channel for i <= j.
  int hessian(int i, int j) const noexcept { return 1 + inputs_ + pair_index_[i][j]; }
  int num_pairs() const noexcept { return inputs_ * (inputs_ + 1) / 2; }

 private:
  int inputs_;
  JetOrder order_;
  int count_;
  std::array<std::array<int, kMaxDim>, kMaxDim> pair_index_{};
};

/// Batched jet evaluation with a matching reverse pass.
///
/// forward() propagates values and the requested spatial derivatives for a
/// batch of points (columns). Every channel of every layer is stored, so
/// backward() can pull an adjoint on the output channels back to the
/// parameters. Matrices are laid out channel-major: channel c of a batch of B
/// points occupies columns [c*B, (c+1)*B).
///
/// The evaluator keeps a reference to the parameters; they must not change
/// between forward() and backward().
class BatchJet {
 public:
  BatchJet(const MlpParams& params, JetOrder order);

  const ChannelLayout& layout() const noexcept { return layout_; }
  int batch() const noexcept { return batch_; }

  void forward(const Eigen::Ref<const Eigen::MatrixXd>& points);

  /// outputs x B block of one output channel.
  auto output(int channel) const { return outputs_.middleCols(static_cast<Eigen::Index>(channel) * batch_, batch_); }
  JetValue point(int b) const;

  /// Adjoint of the output channels, zeroed by forward().
  Eigen::MatrixXd& output_adjoint() noexcept { return output_bar_; }
  /// Adds a per-point adjoint into output_adjoint().
  void add_adjoint(int b, const JetValue& seed);

  /// Accumulates d(<output_adjoint, outputs>)/d(theta) into grad.
  void backward(Eigen::Ref<Eigen::VectorXd> grad);

 private:
  void affine_forward(int layer, Eigen::MatrixXd& out);
  void activate(int layer);
  void activation_backward(int layer, Eigen::MatrixXd& bar);

  const MlpParams* params_;
  ChannelLayout layout_;
  int batch_ = 0;
  Eigen::MatrixXd input_;
  std::vector<Eigen::MatrixXd> pre_;   // pre-activation channels per hidden layer
  std::vector<Eigen::MatrixXd> act_;   // activation channels per hidden layer
  std::vector<Eigen::ArrayXXd> slope_; // tanh' per hidden layer (n x B)
  std::vector<Eigen::ArrayXXd> tval_;  // tanh per hidden layer (n x B)
  Eigen::MatrixXd outputs_;
  Eigen::MatrixXd output_bar_;
  Eigen::MatrixXd bar_a_;
  Eigen::MatrixXd bar_z_;
};

/// A sum over points of a loss depending on the network jet at each point.
///
/// loss(jet, seed) returns the contribution at one point and writes
/// d(contribution)/d(jet) into seed (pre-sized, zeroed).
struct JetTerm {
  Eigen::MatrixXd points;  // inputs x P
  JetOrder order = JetOrder::value;
  std::function<double(const JetValue& jet, JetValue& seed)> loss;
};

/// A term acting on the flat parameter vector directly; returns its value and
/// adds its gradient into grad.
using DirectTerm = std::function<double(const Eigen::VectorXd& theta, Eigen::VectorXd& grad)>;

/// Scalar objective built from network jets and direct parameter terms.
struct Objective {
  std::vector<JetTerm> jet_terms;
  std::vector<DirectTerm> direct_terms;
};

/// Value and exact parameter gradient of an objective. Throws NumericError if
/// the value is not finite.
double value_and_gradient(const Objective& objective, const MlpParams& params, Eigen::VectorXd& grad);

Eigen::VectorXd param_gradient(const Objective& objective, const MlpParams& params);

}  // namespace alpinn::diffnet
