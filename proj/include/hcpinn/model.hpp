#pragma once

// Batched evaluation of a constrained 1D model on a tape, used for training.

#include <algorithm>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "hcpinn/constraints.hpp"
#include "hcpinn/embedding.hpp"
#include "hcpinn/inputs.hpp"
#include "hcpinn/tape.hpp"

namespace hcpinn {

/// Per-point transformed outputs of a batch. Entries for derivatives that
/// were not requested are left empty.
struct BatchJets {
  Eigen::VectorXd u, ux, uxx, ut;
};

/// Outputs of a recorded batch plus the adjoint slots the loss fills in.
struct BatchEval {
  std::shared_ptr<const BatchJets> out;
  std::shared_ptr<BatchJets> adj;
};

/// Embedding + constraint strategy for the 1D diffusion benchmarks. The
/// network parameters are supplied per evaluation.
class PinnModel {
 public:
  PinnModel(EmbeddingSpec embedding, ConstraintSpec constraint)
      : embedding_(std::move(embedding)), constraint_(std::move(constraint)) {
    constraint_.validate();
    if (constraint_.geometry == Geometry::hyperrect) {
      throw ConfigError("batched training supports one-dimensional geometries only");
    }
    const auto& es = embedding_.spec();
    if (constraint_.strategy == Strategy::new_hc) {
      const bool one_sided = constraint_.geometry == Geometry::one_sided_lo ||
                             constraint_.geometry == Geometry::one_sided_hi;
      const auto want = one_sided ? EmbeddingKind::hc_cosine_one_sided : EmbeddingKind::hc_cosine;
      if (es.kind != want) {
        throw ConfigError("new_hc needs a " + std::string(to_string(want)) + " embedding, got " +
                          std::string(to_string(es.kind)));
      }
      if (one_sided && es.anchor != (constraint_.geometry == Geometry::one_sided_lo ? Anchor::lo : Anchor::hi)) {
        throw ConfigError("one-sided embedding anchor does not match constraint side");
      }
    }
    if (es.domain_lo != constraint_.domain_lo || es.domain_hi != constraint_.domain_hi) {
      throw ConfigError("embedding and constraint domains differ");
    }
  }

  const Embedding& embedding() const { return embedding_; }
  const EmbeddingSpec& embedding_spec() const { return embedding_.spec(); }
  const ConstraintSpec& constraint() const { return constraint_; }
  Strategy strategy() const { return constraint_.strategy; }
  bool hard() const { return constraint_.strategy != Strategy::soft; }
  std::size_t input_width() const { return embedding_.size() + 1; }

  /// Records the batch on the tape and returns the transformed outputs.
  BatchEval evaluate(Tape& tape, std::span<const double> x, std::span<const double> t,
                     const JetRequest& req) const {
    if (tape.params().input_width() != input_width()) {
      throw ConfigError("network input width does not match model embedding");
    }
    const auto n = static_cast<Eigen::Index>(x.size());
    const auto plan = plan_channels(req);
    const auto node = tape.evaluate(plan.layout, embed_input(embedding_, plan, x, t), n);
    const auto& tr = tape.trace(node);

    auto out = std::make_shared<BatchJets>();
    auto adj = std::make_shared<BatchJets>();
    out->u = tr.out_block(0).transpose();
    adj->u = Eigen::VectorXd::Zero(n);
    if (req.dx) {
      out->ux = tr.out_block(plan.dx).transpose();
      adj->ux = Eigen::VectorXd::Zero(n);
    }
    if (req.dxx) {
      out->uxx = tr.out_block(plan.dxx).transpose();
      adj->uxx = Eigen::VectorXd::Zero(n);
    }
    if (req.dt) {
      out->ut = tr.out_block(plan.dt).transpose();
      adj->ut = Eigen::VectorXd::Zero(n);
    }

    if (constraint_.strategy == Strategy::existing_hc) {
      apply_existing(tape, node, plan, *out, adj, x, t, req);
    } else if (constraint_.strategy == Strategy::new_hc) {
      for (Eigen::Index j = 0; j < n; ++j) {
        const auto s = shift_polynomial(constraint_, x[j]);
        out->u(j) += s.v;
        if (req.dx) out->ux(j) += s.d1;
        if (req.dxx) out->uxx(j) += s.d2;
      }
    }

    if (constraint_.strategy != Strategy::existing_hc) {
      tape.defer([&tape, node, plan, adj, n] {
        auto& a = tape.adjoint(node);
        a.segment(0, n) += adj->u.transpose();
        if (adj->ux.size()) a.segment(plan.dx * n, n) += adj->ux.transpose();
        if (adj->uxx.size()) a.segment(plan.dxx * n, n) += adj->uxx.transpose();
        if (adj->ut.size()) a.segment(plan.dt * n, n) += adj->ut.transpose();
      });
    }
    return {out, adj};
  }

  /// Transformed values only, evaluated in chunks without recording.
  Eigen::VectorXd values(const NetworkParams& params, std::span<const double> x,
                         std::span<const double> t, std::size_t chunk = 4096) const {
    Eigen::VectorXd out(static_cast<Eigen::Index>(x.size()));
    for (std::size_t start = 0; start < x.size(); start += chunk) {
      const std::size_t len = std::min(chunk, x.size() - start);
      Tape tape(params);
      auto ev = evaluate(tape, x.subspan(start, len), t.subspan(start, len), {});
      out.segment(static_cast<Eigen::Index>(start), static_cast<Eigen::Index>(len)) = ev.out->u;
    }
    return out;
  }

 private:
  // Inner jets at (0,t_j) and (1,t_j) for every point; the transformed
  // outputs are linear in them, so the backward closure is the transpose.
  void apply_existing(Tape& tape, std::size_t node, const ChannelPlan& plan, BatchJets& out,
                      const std::shared_ptr<BatchJets>& adj, std::span<const double> x,
                      std::span<const double> t, const JetRequest& req) const {
    const auto n = static_cast<Eigen::Index>(x.size());
    const JetRequest breq{true, false, req.dt, req.dt};
    const auto bplan = plan_channels(breq);
    std::vector<double> zeros(x.size(), 0.0), ones(x.size(), 1.0);
    const auto n0 = tape.evaluate(bplan.layout, embed_input(embedding_, bplan, zeros, t), n);
    const auto n1 = tape.evaluate(bplan.layout, embed_input(embedding_, bplan, ones, t), n);
    const auto& t0 = tape.trace(n0);
    const auto& t1 = tape.trace(n1);

    const double fa = constraint_.flux_lo[0];
    const double fb = constraint_.flux_hi[0];
    auto coeffs = std::make_shared<std::vector<std::pair<ShiftJet, ShiftJet>>>();
    coeffs->reserve(x.size());
    for (Eigen::Index j = 0; j < n; ++j) {
      PointJet in{out.u(j), req.dx ? out.ux(j) : 0.0, req.dxx ? out.uxx(j) : 0.0,
                  req.dt ? out.ut(j) : 0.0, 0.0};
      PointJet b0{t0.out(0, j), t0.out(bplan.dx, j), 0.0, 0.0, req.dt ? t0.out(bplan.dxt, j) : 0.0};
      PointJet b1{t1.out(0, j), t1.out(bplan.dx, j), 0.0, 0.0, req.dt ? t1.out(bplan.dxt, j) : 0.0};
      const auto r = existing_hc_combine(in, b0, b1, x[j], fa, fb);
      out.u(j) = r.u;
      if (req.dx) out.ux(j) = r.ux;
      if (req.dxx) out.uxx(j) = r.uxx;
      if (req.dt) out.ut(j) = r.ut;
      coeffs->emplace_back(shift_lo_cubic(x[j], 0.0, 1.0), shift_hi_cubic(x[j], 0.0, 1.0));
    }

    tape.defer([&tape, node, n0, n1, plan, bplan, adj, coeffs, n] {
      auto& a = tape.adjoint(node);
      auto& a0 = tape.adjoint(n0);
      auto& a1 = tape.adjoint(n1);
      for (Eigen::Index j = 0; j < n; ++j) {
        const auto& [p, q] = (*coeffs)[static_cast<std::size_t>(j)];
        const double gu = adj->u(j);
        const double gx = adj->ux.size() ? adj->ux(j) : 0.0;
        const double gxx = adj->uxx.size() ? adj->uxx(j) : 0.0;
        const double gt = adj->ut.size() ? adj->ut(j) : 0.0;
        a(j) += gu;
        if (plan.dx >= 0 && adj->ux.size()) a(plan.dx * n + j) += gx;
        if (plan.dxx >= 0) a(plan.dxx * n + j) += gxx;
        if (plan.dt >= 0) a(plan.dt * n + j) += gt;
        a0(bplan.dx * n + j) -= p.v * gu + p.d1 * gx + p.d2 * gxx;
        a1(bplan.dx * n + j) -= q.v * gu + q.d1 * gx + q.d2 * gxx;
        if (bplan.dxt >= 0) {
          a0(bplan.dxt * n + j) -= p.v * gt;
          a1(bplan.dxt * n + j) -= q.v * gt;
        }
      }
    });
  }

  Embedding embedding_;
  ConstraintSpec constraint_;
};

/// Point-wise view of a PinnModel with fixed parameters.
class BoundModel {
 public:
  BoundModel(const NetworkParams& params, const PinnModel& model)
      : model_(&model), inner_(params, model.embedding_spec()) {}

  PointJet jet(double x, double t) const { return apply_constraint(inner_, x, t, model_->constraint()); }
  double value(double x, double t) const { return jet(x, t).u; }

 private:
  const PinnModel* model_;
  EmbeddedNetwork inner_;
};

}  // namespace hcpinn
