#pragma once

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "hcpinn/adam.hpp"
#include "hcpinn/constraints.hpp"
#include "hcpinn/embedding.hpp"
#include "hcpinn/errors.hpp"
#include "hcpinn/model.hpp"
#include "hcpinn/network.hpp"
#include "hcpinn/oracle.hpp"
#include "hcpinn/problem.hpp"
#include "hcpinn/tape.hpp"

namespace hcpinn {

/// Everything needed to replay one training run.
struct RunConfig {
  std::string problem = "low_frequency";
  /// Custom initial condition; when set, `problem` is only a label.
  std::string initial_condition;
  double diffusivity = 0.0;

  Strategy strategy = Strategy::soft;
  bool normalized_shift = false;

  EmbeddingKind embedding = EmbeddingKind::identity;
  /// Number of frequencies (ignored for identity).
  std::size_t n_freq = 0;
  double sigma = 20.0;
  /// Explicit frequencies; overrides sampling when non-empty.
  std::vector<double> frequencies;

  std::vector<std::size_t> hidden{50, 50, 50};
  double learning_rate = 1e-4;
  std::optional<std::size_t> iterations = 20000;
  std::optional<double> wall_clock_seconds;

  CollocationCounts counts = CollocationCounts::desk();
  bool resample_collocation = false;
  LossWeights weights;

  std::uint64_t seed_weights = 0;
  std::uint64_t seed_collocation = 0;
  std::uint64_t seed_frequencies = 0;

  std::size_t eval_nx = 256;
  std::size_t eval_nt = 101;
  std::size_t series_terms = 200;

  void validate() const {
    if (iterations.has_value() == wall_clock_seconds.has_value()) {
      throw ConfigError("exactly one of iterations and wall_clock_seconds must be set");
    }
    if (wall_clock_seconds && !(*wall_clock_seconds >= 0.0)) throw ConfigError("wall-clock budget must be >= 0");
    if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
    if (hidden.empty()) throw ConfigError("network needs at least one hidden layer");
    if (embedding != EmbeddingKind::identity && frequencies.empty() && n_freq == 0) {
      throw ConfigError("embedding needs n_freq or explicit frequencies");
    }
    if (embedding == EmbeddingKind::hc_cosine_hyperrect || embedding == EmbeddingKind::hc_cosine_one_sided) {
      throw ConfigError("runs use the unit interval; embedding kind not supported in training");
    }
    weights.validate();
  }
};

struct HistoryRow {
  std::size_t iteration = 0;
  double total = 0.0;
  double pde = 0.0;
  double ic = 0.0;
  double bc = 0.0;
};

struct RunMetrics {
  RunConfig config;
  std::vector<double> frequencies;
  std::vector<HistoryRow> history;
  std::size_t iterations = 0;
  double ms_per_iter = 0.0;
  double total_seconds = 0.0;
  double best_loss = std::numeric_limits<double>::infinity();
  std::size_t best_loss_iteration = 0;
  /// Relative L2 error of the best-loss checkpoint.
  double rel_l2 = std::numeric_limits<double>::quiet_NaN();
  /// Largest boundary loss seen (diagnostic for hard constraints).
  double max_bc_loss = 0.0;
  double improvement_pct = std::numeric_limits<double>::quiet_NaN();
  bool diverged = false;
  std::string divergence;
  NetworkParams best_params;
};

inline DiffusionProblem make_problem(const RunConfig& c) {
  if (c.initial_condition.empty()) return builtin_problem(c.problem);
  return custom_problem(c.problem, c.initial_condition, c.diffusivity);
}

inline EmbeddingSpec make_embedding(const RunConfig& c) {
  switch (c.embedding) {
    case EmbeddingKind::identity: return embedding::identity();
    case EmbeddingKind::random_cos_sin: {
      if (!c.frequencies.empty()) {
        EmbeddingSpec s;
        s.kind = EmbeddingKind::random_cos_sin;
        s.frequencies = c.frequencies;
        s.sigma = c.sigma;
        return s;
      }
      return embedding::random_cos_sin(c.n_freq, c.sigma, c.seed_frequencies);
    }
    case EmbeddingKind::hc_cosine: {
      if (!c.frequencies.empty()) return embedding::hc_cosine(c.frequencies);
      return embedding::hc_cosine_sampled(c.n_freq, c.sigma, c.seed_frequencies);
    }
    default: break;
  }
  throw ConfigError("embedding kind not supported in training runs");
}

inline PinnModel make_model(const RunConfig& c, const DiffusionProblem& p) {
  ConstraintSpec cs;
  cs.strategy = c.strategy;
  cs.flux_lo = {p.flux_lo};
  cs.flux_hi = {p.flux_hi};
  cs.normalized_shift = c.normalized_shift;
  return PinnModel(make_embedding(c), cs);
}

inline std::vector<std::size_t> layer_sizes(const RunConfig& c, const PinnModel& m) {
  std::vector<std::size_t> sizes{m.input_width()};
  sizes.insert(sizes.end(), c.hidden.begin(), c.hidden.end());
  sizes.push_back(1);
  return sizes;
}

struct RunOptions {
  /// Record every k-th iteration in the loss history (0 disables).
  std::size_t history_every = 1;
  /// Called every `progress_every` iterations with (iteration, loss).
  std::function<void(std::size_t, const LossBreakdown&)> progress;
  std::size_t progress_every = 1000;
};

/// Full-batch Adam training with best-loss checkpointing.
inline RunMetrics run(const RunConfig& config, const RunOptions& options = {}) {
  using Clock = std::chrono::steady_clock;
  config.validate();
  const auto problem = make_problem(config);
  const auto model = make_model(config, problem);
  const auto series = series_solution(problem, config.series_terms);

  RunMetrics m;
  m.config = config;
  m.frequencies = model.embedding_spec().frequencies;

  NetworkParams params = glorot_uniform(layer_sizes(config, model), config.seed_weights);
  auto adam = AdamState::fresh(params, config.learning_rate);
  auto colloc = sample_collocation(config.counts, config.seed_collocation);
  m.best_params = params;

  const auto start = Clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(Clock::now() - start).count(); };
  std::size_t it = 0;
  for (;; ++it) {
    if (config.iterations && it >= *config.iterations) break;
    if (config.wall_clock_seconds && elapsed() >= *config.wall_clock_seconds) break;

    Tape tape(params);
    LossBreakdown loss;
    try {
      loss = composite_loss(tape, model, problem, colloc, config.weights);
    } catch (const TrainingError& e) {
      m.diverged = true;
      m.divergence = e.what();
      break;
    }
    if (!std::isfinite(loss.total)) {
      m.diverged = true;
      m.divergence = "non-finite total loss";
      break;
    }
    if (options.history_every && it % options.history_every == 0) {
      m.history.push_back({it, loss.total, loss.pde, loss.ic, loss.bc});
    }
    if (model.hard()) m.max_bc_loss = std::max(m.max_bc_loss, loss.bc);
    if (loss.total < m.best_loss) {
      m.best_loss = loss.total;
      m.best_loss_iteration = it;
      m.best_params = params;
    }
    if (options.progress && options.progress_every && it % options.progress_every == 0) {
      options.progress(it, loss);
    }
    auto grad = tape.backward();
    if (!grad.all_finite()) {
      m.diverged = true;
      m.divergence = "non-finite gradient";
      break;
    }
    adam_update(params, grad, adam);
    if (config.resample_collocation) {
      colloc = sample_collocation(config.counts, config.seed_collocation + it + 1);
    }
  }
  m.iterations = it;
  m.total_seconds = elapsed();
  m.ms_per_iter = it ? 1000.0 * m.total_seconds / static_cast<double>(it) : 0.0;

  if (it == 0 && !m.diverged) {
    const auto loss = composite_loss(params, model, problem, colloc, config.weights);
    m.best_loss = loss.total;
    if (model.hard()) m.max_bc_loss = loss.bc;
  }

  const EvalGrid grid(config.eval_nx, config.eval_nt);
  const auto values = model.values(m.best_params, grid.x, grid.t);
  m.rel_l2 = relative_l2_error({values.data(), static_cast<std::size_t>(values.size())}, series, grid);
  return m;
}

/// 100 (1 - err / err_ref): +50 is half the reference error, -100 twice.
inline double relative_improvement(double err, double err_ref) {
  if (!(err > 0.0) || !(err_ref > 0.0)) {
    throw ConfigError("relative improvement needs positive errors");
  }
  return 100.0 * (1.0 - err / err_ref);
}

enum class ReferenceRule {
  /// Most accurate soft-constraint run of the problem, any embedding.
  best_soft,
  /// Soft-constraint run without embedding.
  soft_identity,
};

inline ReferenceRule reference_rule_from_string(const std::string& s) {
  if (s == "best_soft") return ReferenceRule::best_soft;
  if (s == "soft_identity") return ReferenceRule::soft_identity;
  throw ConfigError("unknown reference rule '" + s + "'");
}

/// Fills improvement_pct for every run relative to its problem's reference.
inline std::vector<RunMetrics> compare_suite(std::vector<RunMetrics> runs,
                                             ReferenceRule rule = ReferenceRule::best_soft) {
  std::map<std::string, double> reference;
  for (const auto& r : runs) {
    if (r.config.strategy != Strategy::soft || r.diverged) continue;
    if (rule == ReferenceRule::soft_identity && r.config.embedding != EmbeddingKind::identity) continue;
    auto [pos, inserted] = reference.try_emplace(r.config.problem, r.rel_l2);
    if (!inserted) pos->second = std::min(pos->second, r.rel_l2);
  }
  for (auto& r : runs) {
    auto ref = reference.find(r.config.problem);
    if (ref == reference.end()) {
      throw ConfigError("no reference soft-constraint run for problem '" + r.config.problem + "'");
    }
    r.improvement_pct = relative_improvement(r.rel_l2, ref->second);
  }
  return runs;
}

/// Mean milliseconds per training iteration after `warmup` untimed ones.
inline double timing_probe(const RunConfig& config, std::size_t warmup, std::size_t measured_iters) {
  if (measured_iters < 10) throw ConfigError("timing probe needs at least 10 measured iterations");
  auto c = config;
  c.iterations = warmup + measured_iters;
  c.wall_clock_seconds.reset();
  c.validate();
  const auto problem = make_problem(c);
  const auto model = make_model(c, problem);
  NetworkParams params = glorot_uniform(layer_sizes(c, model), c.seed_weights);
  auto adam = AdamState::fresh(params, c.learning_rate);
  const auto colloc = sample_collocation(c.counts, c.seed_collocation);
  auto step = [&] {
    Tape tape(params);
    composite_loss(tape, model, problem, colloc, c.weights);
    adam_update(params, tape.backward(), adam);
  };
  for (std::size_t i = 0; i < warmup; ++i) step();
  const auto t0 = std::chrono::steady_clock::now();
  for (std::size_t i = 0; i < measured_iters; ++i) step();
  const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return ms / static_cast<double>(measured_iters);
}

/// Wall-clock budget (seconds) equal to the time `reference` needs for its
/// iteration budget, estimated with a timing probe.
inline double fixed_time_budget(const RunConfig& reference, std::size_t warmup = 5, std::size_t measured = 20) {
  if (!reference.iterations) throw ConfigError("fixed-time reference needs an iteration budget");
  return timing_probe(reference, warmup, measured) * static_cast<double>(*reference.iterations) / 1000.0;
}

}  // namespace hcpinn
