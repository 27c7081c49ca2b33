#pragma once

// Second-order truncated Taylor propagation through a tanh network, batched
// over points, with the matching reverse sweep for parameter gradients.
//
// A batch carries C channels per point: the value, K first-order tangent
// directions and S second-order coefficients (i, j). Channels are laid out as
// column blocks, so every layer's affine map is a single GEMM over C*N
// columns; only the value block receives the bias.

#include <algorithm>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "hcpinn/errors.hpp"
#include "hcpinn/network.hpp"

namespace hcpinn {

/// Value and the first two derivatives of a scalar output along one input
/// coordinate.
struct SpatialJet {
  double value = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
};

/// Channel structure of a jet batch.
struct JetLayout {
  std::size_t directions = 0;
  /// Second-order coefficients d^2/(dv_i dv_j), i <= j.
  std::vector<std::pair<std::size_t, std::size_t>> second;

  std::size_t channels() const { return 1 + directions + second.size(); }
  static constexpr std::size_t value() { return 0; }
  std::size_t first(std::size_t k) const { return 1 + k; }
  std::size_t second_at(std::size_t s) const { return 1 + directions + s; }

  /// Index into `second` of the pair (i, j), or -1.
  long find_second(std::size_t i, std::size_t j) const {
    if (i > j) std::swap(i, j);
    for (std::size_t s = 0; s < second.size(); ++s) {
      if (second[s].first == i && second[s].second == j) return static_cast<long>(s);
    }
    return -1;
  }

  void validate() const {
    for (auto [i, j] : second) {
      if (i > j || j >= directions) throw ConfigError("invalid second-order channel");
    }
  }
};

/// Cached forward sweep. Holds everything the reverse sweep needs.
struct NetworkTrace {
  JetLayout layout;
  Eigen::Index points = 0;
  /// Input activations of every layer, all channels (width x C*N).
  std::vector<Eigen::MatrixXd> inputs;
  /// Pre-activations of every hidden layer, all channels.
  std::vector<Eigen::MatrixXd> pre;
  /// Network output, all channels (1 x C*N).
  Eigen::RowVectorXd output;

  double out(std::size_t channel, Eigen::Index point) const {
    return output(static_cast<Eigen::Index>(channel) * points + point);
  }
  auto out_block(std::size_t channel) const {
    return output.segment(static_cast<Eigen::Index>(channel) * points, points);
  }
};

namespace detail {

// Elementwise phases run in tiles so the tanh derivative factors stay in L1.
inline constexpr Eigen::Index kTile = 512;

using Seg = Eigen::Map<Eigen::ArrayXd>;
using ConstSeg = Eigen::Map<const Eigen::ArrayXd>;

/// Hidden-layer activation of all channels: a = tanh-jet(z).
inline void activate(const JetLayout& layout, const Eigen::MatrixXd& z, Eigen::MatrixXd& a, Eigen::Index n) {
  const Eigen::Index blk = z.rows() * n;
  Eigen::ArrayXd s1(kTile), s2(kTile);
  for (Eigen::Index o = 0; o < blk; o += kTile) {
    const Eigen::Index len = std::min(kTile, blk - o);
    auto zs = [&](std::size_t c) { return ConstSeg(z.data() + static_cast<Eigen::Index>(c) * blk + o, len); };
    auto as = [&](std::size_t c) { return Seg(a.data() + static_cast<Eigen::Index>(c) * blk + o, len); };
    auto v = as(0);
    v = fast_tanh(zs(0));
    s1.head(len) = 1.0 - v.square();
    s2.head(len) = -2.0 * v * s1.head(len);
    for (std::size_t k = 0; k < layout.directions; ++k) {
      as(layout.first(k)) = s1.head(len) * zs(layout.first(k));
    }
    for (std::size_t s = 0; s < layout.second.size(); ++s) {
      auto [i, j] = layout.second[s];
      as(layout.second_at(s)) =
          s2.head(len) * zs(layout.first(i)) * zs(layout.first(j)) + s1.head(len) * zs(layout.second_at(s));
    }
  }
}

/// Pre-activation adjoint zb from the activation adjoint ab.
inline void activate_adjoint(const JetLayout& layout, const Eigen::MatrixXd& z, const Eigen::MatrixXd& a,
                             const Eigen::MatrixXd& ab, Eigen::MatrixXd& zb, Eigen::Index n) {
  const Eigen::Index blk = z.rows() * n;
  Eigen::ArrayXd s1(kTile), s2(kTile), s3(kTile);
  for (Eigen::Index o = 0; o < blk; o += kTile) {
    const Eigen::Index len = std::min(kTile, blk - o);
    auto zs = [&](std::size_t c) { return ConstSeg(z.data() + static_cast<Eigen::Index>(c) * blk + o, len); };
    auto abs_ = [&](std::size_t c) { return ConstSeg(ab.data() + static_cast<Eigen::Index>(c) * blk + o, len); };
    auto zbs = [&](std::size_t c) { return Seg(zb.data() + static_cast<Eigen::Index>(c) * blk + o, len); };
    const ConstSeg v(a.data() + o, len);
    s1.head(len) = 1.0 - v.square();
    s2.head(len) = -2.0 * v * s1.head(len);
    s3.head(len) = s1.head(len) * (6.0 * v.square() - 2.0);
    auto zb0 = zbs(0);
    zb0 = abs_(0) * s1.head(len);
    for (std::size_t k = 0; k < layout.directions; ++k) {
      const auto c = layout.first(k);
      zbs(c) = abs_(c) * s1.head(len);
      zb0 += abs_(c) * s2.head(len) * zs(c);
    }
    for (std::size_t s = 0; s < layout.second.size(); ++s) {
      auto [i, j] = layout.second[s];
      const auto c = layout.second_at(s);
      const auto ci = layout.first(i);
      const auto cj = layout.first(j);
      const auto g = abs_(c);
      zbs(c) = g * s1.head(len);
      zbs(ci) += g * s2.head(len) * zs(cj);
      zbs(cj) += g * s2.head(len) * zs(ci);
      zb0 += g * (s3.head(len) * zs(ci) * zs(cj) + s2.head(len) * zs(c));
    }
  }
}

}  // namespace detail

/// Zeroed input matrix for `points` points with the given layout.
inline Eigen::MatrixXd make_jet_input(const JetLayout& layout, std::size_t width, Eigen::Index points) {
  return Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(width),
                               static_cast<Eigen::Index>(layout.channels()) * points);
}

/// Forward Taylor sweep. `input` is (input width x C*N) in channel-block
/// layout; derivative blocks hold the input tangents / second coefficients.
inline NetworkTrace trace_forward(const NetworkParams& params, const JetLayout& layout,
                                  Eigen::MatrixXd input, Eigen::Index points) {
  layout.validate();
  const auto channels = layout.channels();
  if (input.rows() != static_cast<Eigen::Index>(params.input_width()) ||
      input.cols() != static_cast<Eigen::Index>(channels) * points) {
    throw ConfigError("jet input shape does not match network input width and layout");
  }
  NetworkTrace tr;
  tr.layout = layout;
  tr.points = points;
  const std::size_t last = params.num_layers() - 1;
  tr.inputs.reserve(last + 1);
  tr.pre.reserve(last);
  tr.inputs.push_back(std::move(input));

  const Eigen::Index n = points;
  for (std::size_t l = 0; l <= last; ++l) {
    Eigen::MatrixXd z = params.weight(l) * tr.inputs.back();
    z.leftCols(n).colwise() += params.bias(l);
    if (l == last) {
      tr.output = z.row(0);
      break;
    }
    Eigen::MatrixXd a(z.rows(), z.cols());
    detail::activate(layout, z, a, n);
    tr.pre.push_back(std::move(z));
    tr.inputs.push_back(std::move(a));
  }
  return tr;
}

/// Reverse sweep: accumulates dL/dtheta into `grad` given dL/d(output) for
/// every channel of every point (1 x C*N, same layout as trace.output).
inline void trace_backward(const NetworkParams& params, const NetworkTrace& tr,
                           const Eigen::RowVectorXd& output_adjoint, NetworkParams& grad) {
  if (!grad.same_shape(params)) throw ConfigError("gradient shape does not match parameters");
  if (output_adjoint.size() != tr.output.size()) {
    throw ConfigError("output adjoint size does not match trace");
  }
  const auto& layout = tr.layout;
  const Eigen::Index n = tr.points;
  const std::size_t last = params.num_layers() - 1;

  Eigen::MatrixXd zbar = output_adjoint;
  for (std::size_t li = last + 1; li-- > 0;) {
    const Eigen::MatrixXd& in = tr.inputs[li];
    grad.weight(li).noalias() += zbar * in.transpose();
    grad.bias(li) += zbar.leftCols(n).rowwise().sum();
    if (li == 0) break;

    // Adjoint of this layer's input = adjoint of the previous layer's output.
    Eigen::MatrixXd abar = params.weight(li).transpose() * zbar;

    Eigen::MatrixXd zb(abar.rows(), abar.cols());
    detail::activate_adjoint(layout, tr.pre[li - 1], in, abar, zb, n);
    zbar = std::move(zb);
  }
}

/// Jet of the network output along input coordinate `coord` at one point.
inline SpatialJet network_jet(const NetworkParams& params, std::span<const double> input,
                              std::size_t coord) {
  if (input.size() != params.input_width() || coord >= input.size()) {
    throw ConfigError("jet input does not match network input width");
  }
  JetLayout layout{1, {{0, 0}}};
  Eigen::MatrixXd in = make_jet_input(layout, input.size(), 1);
  for (std::size_t i = 0; i < input.size(); ++i) in(static_cast<Eigen::Index>(i), 0) = input[i];
  in(static_cast<Eigen::Index>(coord), 1) = 1.0;
  auto tr = trace_forward(params, layout, std::move(in), 1);
  return {tr.out(0, 0), tr.out(1, 0), tr.out(2, 0)};
}

}  // namespace hcpinn
