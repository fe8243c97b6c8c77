#include "alpinn/diffnet.hpp"

#include "alpinn/error.hpp"

#include <cmath>
#include <random>
#include <sstream>
#include <string>

namespace alpinn::diffnet {

namespace {

void check_architecture(const std::vector<int>& sizes) {
  if (sizes.size() < 2) {
    throw InvalidArchitecture("an MLP needs at least an input and an output layer");
  }
  for (int s : sizes) {
    if (s < 1) throw InvalidArchitecture("layer sizes must be positive, got " + std::to_string(s));
  }
}

constexpr Eigen::Index kChunk = 256;

}  // namespace

MlpParams::MlpParams(std::vector<int> layer_sizes) : sizes_(std::move(layer_sizes)) {
  check_architecture(sizes_);
  Eigen::Index offset = 0;
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    offsets_.push_back(offset);
    offset += static_cast<Eigen::Index>(sizes_[l + 1]) * sizes_[l] + sizes_[l + 1];
  }
  flat_ = Eigen::VectorXd::Zero(offset);
}

Eigen::Map<RowMajorMatrix> MlpParams::weight(int layer) {
  return {flat_.data() + offsets_[layer], sizes_[layer + 1], sizes_[layer]};
}

Eigen::Map<const RowMajorMatrix> MlpParams::weight(int layer) const {
  return {flat_.data() + offsets_[layer], sizes_[layer + 1], sizes_[layer]};
}

Eigen::Map<Eigen::VectorXd> MlpParams::bias(int layer) {
  return {flat_.data() + bias_offset(layer), sizes_[layer + 1]};
}

Eigen::Map<const Eigen::VectorXd> MlpParams::bias(int layer) const {
  return {flat_.data() + bias_offset(layer), sizes_[layer + 1]};
}

Eigen::Index parameter_count(std::span<const int> layer_sizes) {
  check_architecture({layer_sizes.begin(), layer_sizes.end()});
  Eigen::Index n = 0;
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    n += static_cast<Eigen::Index>(layer_sizes[l + 1]) * layer_sizes[l] + layer_sizes[l + 1];
  }
  return n;
}

MlpParams init_mlp(std::vector<int> layer_sizes, std::uint64_t seed) {
  MlpParams params(std::move(layer_sizes));
  std::mt19937_64 rng(seed);
  for (int l = 0; l < params.num_layers(); ++l) {
    const auto& sizes = params.layer_sizes();
    const double bound = std::sqrt(6.0 / (sizes[l] + sizes[l + 1]));
    std::uniform_real_distribution<double> dist(-bound, bound);
    auto w = params.weight(l);
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = dist(rng);
    }
  }
  return params;
}

Eigen::VectorXd forward(const MlpParams& params, const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (x.size() != params.input_dim()) {
    std::ostringstream msg;
    msg << "network expects " << params.input_dim() << " inputs, got " << x.size();
    throw ShapeError(msg.str());
  }
  Eigen::VectorXd a = x;
  for (int l = 0; l < params.num_layers(); ++l) {
    Eigen::VectorXd z = params.weight(l) * a + params.bias(l);
    if (l + 1 < params.num_layers()) {
      a = z.array().tanh().matrix();
    } else {
      a = std::move(z);
    }
  }
  return a;
}

ChannelLayout::ChannelLayout(int inputs, JetOrder order) : inputs_(inputs), order_(order) {
  if (inputs < 1 || inputs > kMaxDim) {
    throw ShapeError("jets support 1 to 3 spatial inputs, got " + std::to_string(inputs));
  }
  int k = 0;
  for (int i = 0; i < inputs; ++i) {
    for (int j = i; j < inputs; ++j) {
      pair_index_[i][j] = k;
      pair_index_[j][i] = k;
      ++k;
    }
  }
  switch (order) {
    case JetOrder::value: count_ = 1; break;
    case JetOrder::gradient: count_ = 1 + inputs; break;
    case JetOrder::laplacian: count_ = 2 + inputs; break;
    case JetOrder::hessian: count_ = 1 + inputs + num_pairs(); break;
  }
}

JetValue jet(const MlpParams& params, const Eigen::Ref<const Eigen::VectorXd>& x, int order) {
  if (order != 1 && order != 2) throw PreconditionError("jet order must be 1 or 2");
  if (x.size() != params.input_dim()) {
    throw ShapeError("jet point dimension does not match the network input");
  }
  if (params.output_dim() > kMaxDim) {
    throw ShapeError("jets support at most 3 network outputs");
  }
  BatchJet engine(params, order == 1 ? JetOrder::gradient : JetOrder::hessian);
  engine.forward(x);
  return engine.point(0);
}

BatchJet::BatchJet(const MlpParams& params, JetOrder order)
    : params_(&params), layout_(params.input_dim(), order) {
  if (params.output_dim() > kMaxDim && order != JetOrder::value) {
    throw ShapeError("jets support at most 3 network outputs");
  }
  const int hidden = params.num_layers() - 1;
  pre_.resize(hidden);
  act_.resize(hidden);
  slope_.resize(hidden);
  tval_.resize(hidden);
}

void BatchJet::affine_forward(int layer, Eigen::MatrixXd& out) {
  const auto w = params_->weight(layer);
  const auto b = params_->bias(layer);
  const Eigen::Index nb = batch_;
  out.resize(w.rows(), static_cast<Eigen::Index>(layout_.count()) * nb);
  if (layer == 0) {
    // Input channels are x, unit vectors and zeros: no GEMM needed beyond the value.
    out.leftCols(nb).noalias() = w * input_;
    out.leftCols(nb).colwise() += b;
    if (layout_.order() >= JetOrder::gradient) {
      for (int i = 0; i < layout_.inputs(); ++i) {
        out.middleCols(layout_.grad(i) * nb, nb) = w.col(i).replicate(1, nb);
      }
      const int first_second = 1 + layout_.inputs();
      out.rightCols((layout_.count() - first_second) * nb).setZero();
    }
  } else {
    out.noalias() = w * act_[layer - 1];
    out.leftCols(nb).colwise() += b;
  }
}

void BatchJet::activate(int layer) {
  const Eigen::Index nb = batch_;
  const Eigen::MatrixXd& z = pre_[layer];
  Eigen::MatrixXd& a = act_[layer];
  a.resize(z.rows(), z.cols());
  auto& t = tval_[layer];
  auto& s = slope_[layer];
  t = z.leftCols(nb).array().tanh();
  s = 1.0 - t.square();
  a.leftCols(nb) = t.matrix();
  if (layout_.order() == JetOrder::value) return;

  const auto ch = [nb](const Eigen::MatrixXd& m, int c) { return m.middleCols(c * nb, nb).array(); };
  const auto out = [&a, nb](int c) { return a.middleCols(c * nb, nb).array(); };
  const int d = layout_.inputs();
  for (int i = 0; i < d; ++i) out(layout_.grad(i)) = s * ch(z, layout_.grad(i));

  if (layout_.order() == JetOrder::laplacian) {
    Eigen::ArrayXXd sq = ch(z, layout_.grad(0)).square();
    for (int i = 1; i < d; ++i) sq += ch(z, layout_.grad(i)).square();
    out(layout_.laplacian()) = s * ch(z, layout_.laplacian()) - 2.0 * t * s * sq;
  } else if (layout_.order() == JetOrder::hessian) {
    const Eigen::ArrayXXd t2 = -2.0 * t * s;
    for (int i = 0; i < d; ++i) {
      for (int j = i; j < d; ++j) {
        const int c = layout_.hessian(i, j);
        out(c) = s * ch(z, c) + t2 * ch(z, layout_.grad(i)) * ch(z, layout_.grad(j));
      }
    }
  }
}

void BatchJet::forward(const Eigen::Ref<const Eigen::MatrixXd>& points) {
  if (points.rows() != params_->input_dim()) {
    std::ostringstream msg;
    msg << "network expects " << params_->input_dim() << " inputs, got " << points.rows();
    throw ShapeError(msg.str());
  }
  batch_ = static_cast<int>(points.cols());
  input_ = points;
  const int layers = params_->num_layers();
  for (int l = 0; l < layers; ++l) {
    if (l + 1 == layers) {
      affine_forward(l, outputs_);
    } else {
      affine_forward(l, pre_[l]);
      activate(l);
    }
  }
  output_bar_.setZero(outputs_.rows(), outputs_.cols());
}

JetValue BatchJet::point(int b) const {
  JetValue out(static_cast<int>(outputs_.rows()), layout_.inputs(), layout_.order());
  const Eigen::Index nb = batch_;
  const int d = layout_.inputs();
  for (int k = 0; k < out.outputs; ++k) {
    out.value[k] = outputs_(k, b);
    if (out.has_gradient()) {
      for (int i = 0; i < d; ++i) out.grad[k][i] = outputs_(k, layout_.grad(i) * nb + b);
    }
    if (layout_.order() == JetOrder::laplacian) {
      out.lap[k] = outputs_(k, layout_.laplacian() * nb + b);
    } else if (layout_.order() == JetOrder::hessian) {
      double trace = 0.0;
      for (int i = 0; i < d; ++i) {
        for (int j = i; j < d; ++j) {
          const double h = outputs_(k, layout_.hessian(i, j) * nb + b);
          out.hess[k][i][j] = h;
          out.hess[k][j][i] = h;
        }
        trace += out.hess[k][i][i];
      }
      out.lap[k] = trace;
    }
  }
  return out;
}

void BatchJet::add_adjoint(int b, const JetValue& seed) {
  const Eigen::Index nb = batch_;
  const int d = layout_.inputs();
  const int m = static_cast<int>(outputs_.rows());
  for (int k = 0; k < m; ++k) {
    output_bar_(k, b) += seed.value[k];
    if (layout_.order() == JetOrder::value) continue;
    for (int i = 0; i < d; ++i) output_bar_(k, layout_.grad(i) * nb + b) += seed.grad[k][i];
    if (layout_.order() == JetOrder::laplacian) {
      output_bar_(k, layout_.laplacian() * nb + b) += seed.lap[k];
    } else if (layout_.order() == JetOrder::hessian) {
      for (int i = 0; i < d; ++i) {
        output_bar_(k, layout_.hessian(i, i) * nb + b) += seed.hess[k][i][i] + seed.lap[k];
        for (int j = i + 1; j < d; ++j) {
          output_bar_(k, layout_.hessian(i, j) * nb + b) += seed.hess[k][i][j] + seed.hess[k][j][i];
        }
      }
    }
  }
}

// Pulls the adjoint of the tanh outputs back to the pre-activation channels.
// With t = tanh(z), s = t' = 1 - t^2, t'' = -2ts, t''' = -2s^2 + 4t^2 s:
//   a      = t
//   a_i    = s z_i
//   a_L    = s z_L + t'' sum_i z_i^2
//   a_ij   = s z_ij + t'' z_i z_j
void BatchJet::activation_backward(int layer, Eigen::MatrixXd& bar) {
  const Eigen::Index nb = batch_;
  const Eigen::MatrixXd& z = pre_[layer];
  const auto& t = tval_[layer];
  const auto& s = slope_[layer];
  const auto ch = [nb](const Eigen::MatrixXd& m, int c) { return m.middleCols(c * nb, nb).array(); };

  bar_z_.resize(bar.rows(), bar.cols());
  const auto zb = [this, nb](int c) { return bar_z_.middleCols(c * nb, nb).array(); };
  zb(0) = s * ch(bar, 0);
  if (layout_.order() == JetOrder::value) {
    bar.swap(bar_z_);
    return;
  }

  const Eigen::ArrayXXd t2 = -2.0 * t * s;
  const int d = layout_.inputs();
  for (int i = 0; i < d; ++i) {
    const int c = layout_.grad(i);
    zb(c) = s * ch(bar, c);
    zb(0) += t2 * ch(bar, c) * ch(z, c);
  }
  if (layout_.order() == JetOrder::laplacian) {
    const int cl = layout_.laplacian();
    const auto abar = ch(bar, cl);
    zb(cl) = s * abar;
    Eigen::ArrayXXd sq = Eigen::ArrayXXd::Zero(z.rows(), nb);
    for (int i = 0; i < d; ++i) {
      const int c = layout_.grad(i);
      zb(c) += 2.0 * t2 * abar * ch(z, c);
      sq += ch(z, c).square();
    }
    const Eigen::ArrayXXd t3 = -2.0 * s.square() + 4.0 * t.square() * s;
    zb(0) += (t2 * ch(z, cl) + t3 * sq) * abar;
  } else if (layout_.order() == JetOrder::hessian) {
    const Eigen::ArrayXXd t3 = -2.0 * s.square() + 4.0 * t.square() * s;
    for (int i = 0; i < d; ++i) {
      for (int j = i; j < d; ++j) {
        const int c = layout_.hessian(i, j);
        const auto abar = ch(bar, c);
        const auto zi = ch(z, layout_.grad(i));
        const auto zj = ch(z, layout_.grad(j));
        zb(c) = s * abar;
        if (i == j) {
          zb(layout_.grad(i)) += 2.0 * t2 * abar * zi;
        } else {
          zb(layout_.grad(i)) += t2 * abar * zj;
          zb(layout_.grad(j)) += t2 * abar * zi;
        }
        zb(0) += (t2 * ch(z, c) + t3 * zi * zj) * abar;
      }
    }
  }
  bar.swap(bar_z_);
}

void BatchJet::backward(Eigen::Ref<Eigen::VectorXd> grad) {
  if (grad.size() != params_->size()) throw ShapeError("gradient buffer has the wrong length");
  const Eigen::Index nb = batch_;
  const int layers = params_->num_layers();
  bar_a_ = output_bar_;
  for (int l = layers - 1; l >= 0; --l) {
    if (l + 1 < layers) activation_backward(l, bar_a_);
    const auto w = params_->weight(l);
    Eigen::Map<RowMajorMatrix> gw(grad.data() + params_->weight_offset(l), w.rows(), w.cols());
    Eigen::Map<Eigen::VectorXd> gb(grad.data() + params_->bias_offset(l), w.rows());
    gb += bar_a_.leftCols(nb).rowwise().sum();
    if (l == 0) {
      gw.noalias() += bar_a_.leftCols(nb) * input_.transpose();
      if (layout_.order() >= JetOrder::gradient) {
        for (int i = 0; i < layout_.inputs(); ++i) {
          gw.col(i) += bar_a_.middleCols(layout_.grad(i) * nb, nb).rowwise().sum();
        }
      }
    } else {
      gw.noalias() += bar_a_ * act_[l - 1].transpose();
      Eigen::MatrixXd next = w.transpose() * bar_a_;
      bar_a_.swap(next);
    }
  }
}

double value_and_gradient(const Objective& objective, const MlpParams& params, Eigen::VectorXd& grad) {
  grad = Eigen::VectorXd::Zero(params.size());
  double total = 0.0;
  for (const auto& term : objective.jet_terms) {
    BatchJet engine(params, term.order);
    const Eigen::Index n = term.points.cols();
    for (Eigen::Index start = 0; start < n; start += kChunk) {
      const Eigen::Index count = std::min(kChunk, n - start);
      engine.forward(term.points.middleCols(start, count));
      for (int b = 0; b < count; ++b) {
        const JetValue jv = engine.point(b);
        JetValue seed(jv.outputs, jv.inputs, jv.order);
        total += term.loss(jv, seed);
        engine.add_adjoint(b, seed);
      }
      engine.backward(grad);
    }
  }
  for (const auto& term : objective.direct_terms) total += term(params.flat(), grad);
  if (!std::isfinite(total)) {
    std::ostringstream msg;
    msg << "objective is not finite: " << total;
    throw NumericError(msg.str());
  }
  return total;
}

Eigen::VectorXd param_gradient(const Objective& objective, const MlpParams& params) {
  Eigen::VectorXd grad;
  value_and_gradient(objective, params, grad);
  return grad;
}

}  // namespace alpinn::diffnet
