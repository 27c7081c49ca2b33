#pragma once

// Assembly of network input jets from spatial points: the embedding features
// with their x-derivatives, followed by time passed through unchanged.

#include <cstddef>
#include <span>

#include <Eigen/Dense>

#include "hcpinn/embedding.hpp"
#include "hcpinn/errors.hpp"
#include "hcpinn/taylor.hpp"

namespace hcpinn {

/// Derivatives requested of a 1D model evaluation.
struct JetRequest {
  bool dx = false;
  bool dxx = false;
  bool dt = false;
  bool dxt = false;
};

/// Network channel plan for a request; -1 marks absent channels.
struct ChannelPlan {
  JetLayout layout;
  long dx = -1;
  long dt = -1;
  long dxx = -1;
  long dxt = -1;
};

inline ChannelPlan plan_channels(const JetRequest& r) {
  ChannelPlan p;
  long x_dir = -1;
  long t_dir = -1;
  if (r.dx || r.dxx || r.dxt) x_dir = static_cast<long>(p.layout.directions++);
  if (r.dt || r.dxt) t_dir = static_cast<long>(p.layout.directions++);
  if (r.dxx) p.layout.second.emplace_back(x_dir, x_dir);
  if (r.dxt) p.layout.second.emplace_back(x_dir, t_dir);
  if (x_dir >= 0) p.dx = static_cast<long>(p.layout.first(x_dir));
  if (t_dir >= 0) p.dt = static_cast<long>(p.layout.first(t_dir));
  if (r.dxx) p.dxx = static_cast<long>(p.layout.second_at(p.layout.find_second(x_dir, x_dir)));
  if (r.dxt) p.dxt = static_cast<long>(p.layout.second_at(p.layout.find_second(x_dir, t_dir)));
  return p;
}

/// Network input (features + t) for 1D points in channel-block layout.
inline Eigen::MatrixXd embed_input(const Embedding& emb, const ChannelPlan& plan,
                                   std::span<const double> x, std::span<const double> t) {
  if (emb.dims() != 1) throw ConfigError("1D input assembly needs a one-dimensional embedding");
  if (x.size() != t.size()) throw ConfigError("x and t batches differ in length");
  const auto n = static_cast<Eigen::Index>(x.size());
  const auto nf = static_cast<Eigen::Index>(emb.size());
  Eigen::MatrixXd in = make_jet_input(plan.layout, emb.size() + 1, n);
  const auto& feats = emb.features();
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index f = 0; f < nf; ++f) {
      const auto& feat = feats[static_cast<std::size_t>(f)];
      in(f, j) = Embedding::feature_value(feat, x[j]);
      if (plan.dx >= 0 || plan.dxx >= 0) {
        auto [d1, d2] = Embedding::feature_derivatives(feat, x[j]);
        if (plan.dx >= 0) in(f, plan.dx * n + j) = d1;
        if (plan.dxx >= 0) in(f, plan.dxx * n + j) = d2;
      }
    }
    in(nf, j) = t[j];
    if (plan.dt >= 0) in(nf, plan.dt * n + j) = 1.0;
  }
  return in;
}

}  // namespace hcpinn
