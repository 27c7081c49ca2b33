#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hcpinn/constraints.hpp"
#include "hcpinn/errors.hpp"
#include "hcpinn/expression.hpp"
#include "hcpinn/model.hpp"
#include "hcpinn/tape.hpp"

namespace hcpinn {

/// a * cos(pi * n * x)
struct CosineMode {
  double amplitude = 0.0;
  int frequency = 0;
};

/// du/dt = D d2u/dx2 on [0,1]^2 with u(x,0) = g(x) and Neumann data
/// du/dx(0,t) = flux_lo, du/dx(1,t) = flux_hi.
struct DiffusionProblem {
  std::string name;
  std::function<double(double)> initial_condition;
  double diffusivity = 1.0;
  double flux_lo = 0.0;
  double flux_hi = 0.0;
  /// Exact cosine expansion of g, when known.
  std::vector<CosineMode> cosine_modes;

  double g(double x) const { return initial_condition(x); }

  void validate() const {
    if (!initial_condition) throw ConfigError("problem '" + name + "' has no initial condition");
    if (!(diffusivity > 0.0) || !std::isfinite(diffusivity)) {
      throw ConfigError("diffusivity must be positive and finite");
    }
  }
};

inline const std::vector<std::string>& builtin_problem_names() {
  static const std::vector<std::string> names{"low_frequency", "high_frequency", "multiscale",
                                              "polynom3", "polynom4"};
  return names;
}

inline DiffusionProblem builtin_problem(const std::string& name) {
  using std::numbers::pi;
  DiffusionProblem p;
  p.name = name;
  if (name == "low_frequency") {
    p.initial_condition = [](double x) { return std::cos(2.0 * pi * x); };
    p.diffusivity = 1.0 / ((2.0 * pi) * (2.0 * pi));
    p.cosine_modes = {{1.0, 2}};
  } else if (name == "high_frequency") {
    p.initial_condition = [](double x) { return std::cos(50.0 * pi * x); };
    p.diffusivity = 1.0 / ((50.0 * pi) * (50.0 * pi));
    p.cosine_modes = {{1.0, 50}};
  } else if (name == "multiscale") {
    p.initial_condition = [](double x) { return std::cos(2.0 * pi * x) + 0.1 * std::cos(50.0 * pi * x); };
    p.diffusivity = 1.0 / ((50.0 * pi) * (50.0 * pi));
    p.cosine_modes = {{1.0, 2}, {0.1, 50}};
  } else if (name == "polynom3") {
    p.initial_condition = [](double x) { return 3.0 * x * x - 2.0 * x * x * x; };
    p.diffusivity = 1.0 / (pi * pi);
  } else if (name == "polynom4") {
    p.initial_condition = [](double x) {
      const double x2 = x * x;
      return 16.0 * x2 * x2 - 32.0 * x2 * x + 16.0 * x2;
    };
    p.diffusivity = 1.0 / (pi * pi);
  } else {
    throw ConfigError("unknown problem '" + name + "'");
  }
  return p;
}

/// Problem with g given as an expression over x.
inline DiffusionProblem custom_problem(std::string name, const std::string& expression, double diffusivity,
                                       double flux_lo = 0.0, double flux_hi = 0.0) {
  auto expr = Expression::parse(expression);
  DiffusionProblem p;
  p.name = std::move(name);
  p.initial_condition = [expr](double x) { return expr(x); };
  p.diffusivity = diffusivity;
  p.flux_lo = flux_lo;
  p.flux_hi = flux_hi;
  p.validate();
  return p;
}

struct CollocationCounts {
  std::size_t pde = 20000;
  std::size_t ic = 500;
  std::size_t bc = 1000;

  static CollocationCounts full() { return {20000, 500, 1000}; }
  static CollocationCounts desk() { return {4000, 200, 200}; }
};

struct CollocationSet {
  std::vector<double> pde_x, pde_t;
  std::vector<double> ic_x;
  /// Boundary side as a coordinate, 0.0 or 1.0.
  std::vector<double> bc_x, bc_t;
  std::uint64_t seed = 0;

  CollocationCounts counts() const { return {pde_x.size(), ic_x.size(), bc_x.size()}; }
};

/// Uniform i.i.d. points; the boundary side is a fair coin.
inline CollocationSet sample_collocation(const CollocationCounts& counts, std::uint64_t seed) {
  if (counts.pde == 0 || counts.ic == 0 || counts.bc == 0) {
    throw ConfigError("collocation counts must be positive");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::bernoulli_distribution side(0.5);
  CollocationSet c;
  c.seed = seed;
  c.pde_x.resize(counts.pde);
  c.pde_t.resize(counts.pde);
  for (std::size_t j = 0; j < counts.pde; ++j) {
    c.pde_x[j] = unit(rng);
    c.pde_t[j] = unit(rng);
  }
  c.ic_x.resize(counts.ic);
  for (auto& x : c.ic_x) x = unit(rng);
  c.bc_x.resize(counts.bc);
  c.bc_t.resize(counts.bc);
  for (std::size_t j = 0; j < counts.bc; ++j) {
    c.bc_x[j] = side(rng) ? 1.0 : 0.0;
    c.bc_t[j] = unit(rng);
  }
  return c;
}

struct LossWeights {
  double pde = 1.0;
  double ic = 1.0;
  double bc = 1.0;

  void validate() const {
    if (!(pde > 0.0 && ic > 0.0 && bc > 0.0)) throw ConfigError("loss weights must be positive");
  }
};

struct LossBreakdown {
  double total = 0.0;
  double pde = 0.0;
  double ic = 0.0;
  double bc = 0.0;
};

namespace detail {

/// Order-insensitive mean of squares (Neumaier-compensated).
inline double mean_square(const Eigen::VectorXd& r) {
  double sum = 0.0;
  double comp = 0.0;
  for (Eigen::Index j = 0; j < r.size(); ++j) {
    const double v = r(j) * r(j);
    const double t = sum + v;
    comp += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
    sum = t;
  }
  return (sum + comp) / static_cast<double>(r.size());
}

inline void check_finite(const Eigen::VectorXd& r, long batch, const char* what) {
  for (Eigen::Index j = 0; j < r.size(); ++j) {
    if (!std::isfinite(r(j))) {
      throw TrainingError(std::string("non-finite ") + what + " residual at point " + std::to_string(j), batch,
                          static_cast<long>(j));
    }
  }
}

inline std::vector<double> initial_values(const DiffusionProblem& p, std::span<const double> x) {
  std::vector<double> g(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) g[j] = p.g(x[j]);
  return g;
}

inline double side_flux(const DiffusionProblem& p, double side) { return side == 0.0 ? p.flux_lo : p.flux_hi; }

struct Residuals {
  Eigen::VectorXd pde, ic, bc;
};

inline LossBreakdown reduce(const Residuals& r, const LossWeights& w, bool hard) {
  check_finite(r.pde, 0, "PDE");
  check_finite(r.ic, 1, "initial-condition");
  check_finite(r.bc, 2, "boundary");
  LossBreakdown l;
  l.pde = mean_square(r.pde);
  l.ic = mean_square(r.ic);
  l.bc = mean_square(r.bc);
  l.total = w.pde * l.pde + w.ic * l.ic + (hard ? 0.0 : w.bc * l.bc);
  return l;
}

}  // namespace detail

/// Batch ids carried by TrainingError from composite_loss.
enum LossBatch : long { kPdeBatch = 0, kIcBatch = 1, kBcBatch = 2 };

/// Composite PINN loss recorded on a tape; the adjoints of the total are
/// written so tape.backward() yields dL/dtheta. For hard-constrained models
/// the boundary term is computed as a diagnostic with zero weight.
inline LossBreakdown composite_loss(Tape& tape, const PinnModel& model, const DiffusionProblem& problem,
                                    const CollocationSet& c, const LossWeights& w) {
  w.validate();
  const bool hard = model.hard();
  detail::Residuals r;

  auto pde = model.evaluate(tape, c.pde_x, c.pde_t, {false, true, true, false});
  r.pde = pde.out->ut - problem.diffusivity * pde.out->uxx;

  const std::vector<double> t0(c.ic_x.size(), 0.0);
  auto ic = model.evaluate(tape, c.ic_x, t0, {});
  r.ic = ic.out->u - Eigen::Map<const Eigen::VectorXd>(detail::initial_values(problem, c.ic_x).data(),
                                                       static_cast<Eigen::Index>(c.ic_x.size()));

  auto bc = model.evaluate(tape, c.bc_x, c.bc_t, {true, false, false, false});
  r.bc = bc.out->ux;
  for (Eigen::Index j = 0; j < r.bc.size(); ++j) r.bc(j) -= detail::side_flux(problem, c.bc_x[j]);

  const auto loss = detail::reduce(r, w, hard);

  const double kp = 2.0 * w.pde / static_cast<double>(r.pde.size());
  pde.adj->ut += kp * r.pde;
  pde.adj->uxx -= (kp * problem.diffusivity) * r.pde;
  ic.adj->u += (2.0 * w.ic / static_cast<double>(r.ic.size())) * r.ic;
  if (!hard) bc.adj->ux += (2.0 * w.bc / static_cast<double>(r.bc.size())) * r.bc;
  return loss;
}

/// Composite loss without recording gradients.
inline LossBreakdown composite_loss(const NetworkParams& params, const PinnModel& model,
                                    const DiffusionProblem& problem, const CollocationSet& c,
                                    const LossWeights& w) {
  Tape tape(params);
  return composite_loss(tape, model, problem, c, w);
}

/// Point-wise composite loss for any model exposing jet(x, t); used to check
/// the batched path and to evaluate reference solutions.
template <InnerModel M>
LossBreakdown composite_loss(const M& model, const DiffusionProblem& problem, const CollocationSet& c,
                             const LossWeights& w, bool hard) {
  w.validate();
  detail::Residuals r;
  r.pde.resize(static_cast<Eigen::Index>(c.pde_x.size()));
  for (std::size_t j = 0; j < c.pde_x.size(); ++j) {
    const auto jet = model.jet(c.pde_x[j], c.pde_t[j]);
    r.pde(static_cast<Eigen::Index>(j)) = jet.ut - problem.diffusivity * jet.uxx;
  }
  r.ic.resize(static_cast<Eigen::Index>(c.ic_x.size()));
  for (std::size_t j = 0; j < c.ic_x.size(); ++j) {
    r.ic(static_cast<Eigen::Index>(j)) = model.jet(c.ic_x[j], 0.0).u - problem.g(c.ic_x[j]);
  }
  r.bc.resize(static_cast<Eigen::Index>(c.bc_x.size()));
  for (std::size_t j = 0; j < c.bc_x.size(); ++j) {
    r.bc(static_cast<Eigen::Index>(j)) =
        model.jet(c.bc_x[j], c.bc_t[j]).ux - detail::side_flux(problem, c.bc_x[j]);
  }
  return detail::reduce(r, w, hard);
}

}  // namespace hcpinn
