#pragma once

// Reference solutions of the Neumann diffusion problem on [0,1]:
//
//   u(x,t) = a0/2 + sum_{j=1}^N a_j exp(-D pi^2 j^2 t) cos(pi j x),
//   a_j    = 2 int_0^1 g(x) cos(pi j x) dx.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <numeric>
#include <sstream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "hcpinn/constraints.hpp"
#include "hcpinn/errors.hpp"
#include "hcpinn/problem.hpp"

namespace hcpinn {

inline constexpr double kQuadratureTolerance = 1e-12;

/// Adaptive Gauss-Kronrod integral over [a, b]; throws when the error
/// estimate exceeds `abs_tol`.
inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double abs_tol = kQuadratureTolerance, long index = -1) {
  double error = 0.0;
  double l1 = 0.0;
  const double v =
      boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 15, 1e-13, &error, &l1);
  if (!(error <= abs_tol) || !std::isfinite(v)) {
    std::ostringstream msg;
    msg << "quadrature did not converge (error estimate " << std::scientific << error << ")";
    throw NumericError(msg.str(), index);
  }
  return v;
}

/// Sum of one 61-point Kronrod rule per equal panel. Panels are refined
/// adaptively only when the summed estimate misses the tolerance.
inline double integrate_panels(const std::function<double(double)>& f, double a, double b, std::size_t panels,
                               double abs_tol = kQuadratureTolerance, long index = -1) {
  using Rule = boost::math::quadrature::gauss_kronrod<double, 61>;
  panels = std::max<std::size_t>(panels, 1);
  const double h = (b - a) / static_cast<double>(panels);
  std::vector<double> value(panels), error(panels);
  auto bounds = [&](std::size_t i) {
    const double lo = a + h * static_cast<double>(i);
    return std::pair{lo, i + 1 == panels ? b : lo + h};
  };
  for (std::size_t i = 0; i < panels; ++i) {
    const auto [lo, hi] = bounds(i);
    value[i] = Rule::integrate(f, lo, hi, 0, 0.0, &error[i]);
  }
  auto sum = [](const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); };
  if (!(sum(error) <= abs_tol)) {
    const double share = abs_tol / static_cast<double>(panels);
    for (std::size_t i = 0; i < panels; ++i) {
      if (error[i] <= share) continue;
      const auto [lo, hi] = bounds(i);
      value[i] = Rule::integrate(f, lo, hi, 15, 1e-13, &error[i]);
    }
  }
  const double total = sum(value);
  const double error_sum = sum(error);
  if (!(error_sum <= abs_tol) || !std::isfinite(total)) {
    std::ostringstream msg;
    msg << "quadrature did not converge (error estimate " << std::scientific << error_sum << ")";
    throw NumericError(msg.str(), index);
  }
  return total;
}

struct FourierSeriesSolution {
  std::vector<double> coefficients;  // a_0 ... a_N
  double diffusivity = 1.0;

  std::size_t truncation() const { return coefficients.empty() ? 0 : coefficients.size() - 1; }

  void validate() const {
    if (coefficients.size() < 2) throw ConfigError("series truncation must be at least 1");
    if (!(diffusivity > 0.0)) throw ConfigError("series diffusivity must be positive");
    for (double a : coefficients) {
      if (!std::isfinite(a)) throw NumericError("non-finite series coefficient");
    }
  }
};

/// a_0 ... a_N by quadrature.
inline std::vector<double> fourier_coefficients(const std::function<double(double)>& g, std::size_t n) {
  using std::numbers::pi;
  std::vector<double> a(n + 1);
  for (std::size_t j = 0; j <= n; ++j) {
    const double k = pi * static_cast<double>(j);
    // One panel per half period keeps each piece smooth for the Kronrod rule.
    a[j] = 2.0 * integrate_panels([&](double x) { return g(x) * std::cos(k * x); }, 0.0, 1.0, j,
                                  kQuadratureTolerance, static_cast<long>(j));
  }
  return a;
}

/// Coefficients of a problem: exact for cosine-sum initial conditions,
/// quadrature otherwise.
inline std::vector<double> fourier_coefficients(const DiffusionProblem& p, std::size_t n) {
  if (p.cosine_modes.empty()) return fourier_coefficients(p.initial_condition, n);
  std::vector<double> a(n + 1, 0.0);
  for (const auto& m : p.cosine_modes) {
    if (m.frequency < 0 || static_cast<std::size_t>(m.frequency) > n) {
      throw ConfigError("cosine mode beyond series truncation");
    }
    // cos(0) = 1 contributes a_0 = 2; cos(pi n x) contributes a_n = 1.
    a[static_cast<std::size_t>(m.frequency)] += (m.frequency == 0 ? 2.0 : 1.0) * m.amplitude;
  }
  return a;
}

inline FourierSeriesSolution series_solution(const DiffusionProblem& p, std::size_t n = 200) {
  p.validate();
  if (p.flux_lo != 0.0 || p.flux_hi != 0.0) {
    throw ConfigError("the cosine series solves the zero-flux problem only");
  }
  FourierSeriesSolution s{fourier_coefficients(p, n), p.diffusivity};
  s.validate();
  return s;
}

/// Value and term-wise derivatives of the truncated series.
inline PointJet series_jet(const FourierSeriesSolution& s, double x, double t) {
  using std::numbers::pi;
  PointJet out;
  out.u = 0.5 * s.coefficients[0];
  for (std::size_t j = 1; j < s.coefficients.size(); ++j) {
    const double a = s.coefficients[j];
    if (a == 0.0) continue;
    const double k = pi * static_cast<double>(j);
    const double rate = s.diffusivity * k * k;
    const double decay = a * std::exp(-rate * t);
    const double c = std::cos(k * x);
    // sin(pi j x) vanishes exactly at the ends; the rounded argument does not.
    const double sn = (x == 0.0 || x == 1.0) ? 0.0 : std::sin(k * x);
    out.u += decay * c;
    out.ux -= decay * k * sn;
    out.uxx -= decay * k * k * c;
    out.ut -= rate * decay * c;
    out.uxt += rate * decay * k * sn;
  }
  return out;
}

inline double series_eval(const FourierSeriesSolution& s, double x, double t) { return series_jet(s, x, t).u; }

/// Series as a model, for loss evaluation.
struct SeriesModel {
  const FourierSeriesSolution* solution;
  PointJet jet(double x, double t) const { return series_jet(*solution, x, t); }
  double value(double x, double t) const { return series_eval(*solution, x, t); }
};

/// Uniform tensor grid on [0,1]^2, x varying fastest.
struct EvalGrid {
  std::size_t nx = 256;
  std::size_t nt = 101;
  std::vector<double> x, t;

  EvalGrid(std::size_t nx_, std::size_t nt_) : nx(nx_), nt(nt_) {
    if (nx < 2 || nt < 2) throw ConfigError("evaluation grid needs at least 2 points per axis");
    x.reserve(nx * nt);
    t.reserve(nx * nt);
    for (std::size_t k = 0; k < nt; ++k) {
      for (std::size_t i = 0; i < nx; ++i) {
        x.push_back(static_cast<double>(i) / static_cast<double>(nx - 1));
        t.push_back(static_cast<double>(k) / static_cast<double>(nt - 1));
      }
    }
  }
  std::size_t size() const { return x.size(); }
};

/// ||model - series|| / ||series|| over grid points, given model values in
/// grid order.
inline double relative_l2_error(std::span<const double> model_values, const FourierSeriesSolution& s,
                                const EvalGrid& grid) {
  if (model_values.size() != grid.size()) throw ConfigError("model values do not match evaluation grid");
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double ref = series_eval(s, grid.x[i], grid.t[i]);
    const double d = model_values[i] - ref;
    num += d * d;
    den += ref * ref;
  }
  if (den == 0.0) throw NumericError("reference solution has zero norm on the evaluation grid");
  return std::sqrt(num) / std::sqrt(den);
}

template <class F>
  requires std::invocable<const F&, double, double>
double relative_l2_error(const F& model, const FourierSeriesSolution& s, std::size_t nx, std::size_t nt) {
  const EvalGrid grid(nx, nt);
  std::vector<double> v(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) v[i] = model(grid.x[i], grid.t[i]);
  return relative_l2_error(v, s, grid);
}

/// max |u_t - D u_xx| of the series at the given (x, t) points.
inline double residual_self_check(const FourierSeriesSolution& s, std::span<const double> x,
                                  std::span<const double> t) {
  if (x.size() != t.size()) throw ConfigError("x and t sample counts differ");
  double worst = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const auto j = series_jet(s, x[i], t[i]);
    worst = std::max(worst, std::abs(j.ut - s.diffusivity * j.uxx));
  }
  return worst;
}

/// CSV dump "x,t,u" of the series on a grid.
inline void write_oracle_csv(const FourierSeriesSolution& s, const EvalGrid& grid,
                             const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot open " + path.string());
  os.precision(17);
  os << "x,t,u\n";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    os << grid.x[i] << ',' << grid.t[i] << ',' << series_eval(s, grid.x[i], grid.t[i]) << '\n';
  }
}

}  // namespace hcpinn
