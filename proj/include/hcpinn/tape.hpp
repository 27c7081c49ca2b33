#pragma once

#include <cmath>
#include <cstddef>
#include <deque>
#include <functional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "hcpinn/errors.hpp"
#include "hcpinn/network.hpp"
#include "hcpinn/taylor.hpp"

namespace hcpinn {

/// Records network evaluations (jet traces) and the backward closures of
/// whatever is computed from them. Network evaluations are leaves: their
/// inputs are constants, so the reverse pass first runs the deferred
/// closures newest-first (which seed the node adjoints) and then sweeps each
/// trace back into the parameter gradient.
class Tape {
 public:
  explicit Tape(const NetworkParams& params) : params_(&params) {}

  const NetworkParams& params() const { return *params_; }

  std::size_t evaluate(const JetLayout& layout, Eigen::MatrixXd input, Eigen::Index points) {
    nodes_.push_back({trace_forward(*params_, layout, std::move(input), points), {}});
    return nodes_.size() - 1;
  }

  const NetworkTrace& trace(std::size_t node) const { return nodes_.at(node).trace; }

  /// dL/d(output) of a node, all channels; zero until written.
  Eigen::RowVectorXd& adjoint(std::size_t node) {
    auto& n = nodes_.at(node);
    if (n.adjoint.size() == 0) n.adjoint = Eigen::RowVectorXd::Zero(n.trace.output.size());
    return n.adjoint;
  }

  void defer(std::function<void()> backward) { deferred_.push_back(std::move(backward)); }

  std::size_t size() const { return nodes_.size(); }

  NetworkParams backward() {
    for (auto it = deferred_.rbegin(); it != deferred_.rend(); ++it) (*it)();
    deferred_.clear();
    NetworkParams grad = params_->zeros_like();
    for (const auto& n : nodes_) {
      if (n.adjoint.size() != 0) trace_backward(*params_, n.trace, n.adjoint, grad);
    }
    return grad;
  }

 private:
  struct Node {
    NetworkTrace trace;
    Eigen::RowVectorXd adjoint;
  };
  const NetworkParams* params_;
  std::deque<Node> nodes_;
  std::vector<std::function<void()>> deferred_;
};

struct LossAndGradient {
  double loss = 0.0;
  NetworkParams gradient;
};

/// dL/dtheta for a loss built on a tape. The evaluator records network
/// evaluations, writes the adjoints of whatever it consumed and returns L.
template <class Evaluator>
LossAndGradient loss_gradient(const NetworkParams& params, Evaluator&& evaluator) {
  Tape tape(params);
  const double loss = std::forward<Evaluator>(evaluator)(tape);
  if (!std::isfinite(loss)) throw TrainingError("non-finite loss", -1);
  return {loss, tape.backward()};
}

}  // namespace hcpinn
