#pragma once

// Neumann boundary handling. Hard constraints are output transformations of
// an inner model (network composed with its input embedding):
//
//   existing_hc   u = N(x,t) - p(x) N_x(0,t) - q(x) N_x(1,t) + A p(x) + B q(x)
//   new_hc        u = N(gamma(x), t) + shift(x)
//
// with p(x) = x(1-x)^2, q(x) = x^2(x-1) on the unit interval, and the
// geometry-specific shift polynomials below for general intervals, one-sided
// conditions and hyperrectangles.

#include <cmath>
#include <concepts>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "hcpinn/embedding.hpp"
#include "hcpinn/errors.hpp"
#include "hcpinn/inputs.hpp"
#include "hcpinn/network.hpp"
#include "hcpinn/taylor.hpp"

namespace hcpinn {

enum class Strategy { soft, existing_hc, new_hc };
enum class Geometry { unit_interval, general_interval, one_sided_lo, one_sided_hi, hyperrect };

inline std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::soft: return "soft";
    case Strategy::existing_hc: return "existing_hc";
    case Strategy::new_hc: return "new_hc";
  }
  return "?";
}

inline std::string_view to_string(Geometry g) {
  switch (g) {
    case Geometry::unit_interval: return "unit_interval";
    case Geometry::general_interval: return "general_interval";
    case Geometry::one_sided_lo: return "one_sided_lo";
    case Geometry::one_sided_hi: return "one_sided_hi";
    case Geometry::hyperrect: return "hyperrect";
  }
  return "?";
}

inline Strategy strategy_from_string(std::string_view s) {
  for (auto v : {Strategy::soft, Strategy::existing_hc, Strategy::new_hc}) {
    if (to_string(v) == s) return v;
  }
  throw ConfigError("unknown strategy '" + std::string(s) + "'");
}

inline Geometry geometry_from_string(std::string_view s) {
  for (auto v : {Geometry::unit_interval, Geometry::general_interval, Geometry::one_sided_lo,
                 Geometry::one_sided_hi, Geometry::hyperrect}) {
    if (to_string(v) == s) return v;
  }
  throw ConfigError("unknown geometry '" + std::string(s) + "'");
}

struct ConstraintSpec {
  Strategy strategy = Strategy::soft;
  Geometry geometry = Geometry::unit_interval;
  std::vector<double> flux_lo{0.0};
  std::vector<double> flux_hi{0.0};
  std::vector<double> domain_lo{0.0};
  std::vector<double> domain_hi{1.0};
  /// Divide the general-interval shift terms by (hi - lo)^2 so the achieved
  /// boundary derivative equals the flux on any interval.
  bool normalized_shift = false;

  std::size_t dims() const { return domain_lo.size(); }
  double lo() const { return domain_lo.at(0); }
  double hi() const { return domain_hi.at(0); }

  void validate() const {
    if (domain_lo.empty() || domain_lo.size() != domain_hi.size()) {
      throw ConfigError("constraint domain bounds must be non-empty and of equal length");
    }
    for (std::size_t i = 0; i < dims(); ++i) {
      if (!(domain_lo[i] < domain_hi[i])) throw ConfigError("constraint domain requires lo < hi");
    }
    switch (geometry) {
      case Geometry::unit_interval:
        if (dims() != 1 || lo() != 0.0 || hi() != 1.0) {
          throw ConfigError("unit_interval geometry requires the domain [0, 1]");
        }
        [[fallthrough]];
      case Geometry::general_interval:
        if (dims() != 1) throw ConfigError("interval geometry is one-dimensional");
        if (flux_lo.size() != 1 || flux_hi.size() != 1) {
          throw ConfigError("interval geometry needs one flux per end");
        }
        break;
      case Geometry::one_sided_lo:
      case Geometry::one_sided_hi: {
        if (dims() != 1) throw ConfigError("one-sided geometry is one-dimensional");
        const bool at_lo = geometry == Geometry::one_sided_lo;
        const auto& used = at_lo ? flux_lo : flux_hi;
        const auto& unused = at_lo ? flux_hi : flux_lo;
        if (used.size() != 1 || !unused.empty()) {
          throw ConfigError("one-sided geometry carries exactly one flux value");
        }
        break;
      }
      case Geometry::hyperrect:
        if (flux_lo.size() != dims() || flux_hi.size() != dims()) {
          throw ConfigError("hyperrect flux vectors must have one entry per dimension");
        }
        break;
    }
    if (strategy == Strategy::existing_hc && geometry != Geometry::unit_interval) {
      throw ConfigError("existing_hc is defined on the unit interval only");
    }
  }
};

/// Transformed 1D model output and its derivatives at one point.
struct PointJet {
  double u = 0.0;
  double ux = 0.0;
  double uxx = 0.0;
  double ut = 0.0;
  double uxt = 0.0;
};

/// Value and spatial gradient at one point of a d-dimensional model.
struct PointGradient {
  double u = 0.0;
  std::vector<double> grad;
};

/// Anything evaluable to a 1D jet.
template <class M>
concept InnerModel = requires(const M& m, double x, double t) {
  { m.jet(x, t) } -> std::convertible_to<PointJet>;
};

/// Value and x-derivatives of a polynomial shift term.
struct ShiftJet {
  double v = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
};

/// (x-lo)(hi-x)^2 and its derivatives; derivative (hi-lo)^2 at lo, 0 at hi.
inline ShiftJet shift_lo_cubic(double x, double lo, double hi) {
  const double a = x - lo;
  const double b = hi - x;
  return {a * b * b, b * b - 2.0 * a * b, 2.0 * a - 4.0 * b};
}

/// (x-lo)^2(x-hi) and its derivatives; derivative 0 at lo, (hi-lo)^2 at hi.
inline ShiftJet shift_hi_cubic(double x, double lo, double hi) {
  const double a = x - lo;
  const double c = x - hi;
  return {a * a * c, 2.0 * a * c + a * a, 2.0 * c + 4.0 * a};
}

/// The explicit shift term that adds the prescribed fluxes for 1D
/// geometries; zero for soft constraints.
inline ShiftJet shift_polynomial(const ConstraintSpec& spec, double x) {
  if (spec.strategy == Strategy::soft) return {};
  switch (spec.geometry) {
    case Geometry::unit_interval:
    case Geometry::general_interval: {
      const double lo = spec.lo();
      const double hi = spec.hi();
      const double scale = spec.normalized_shift ? 1.0 / ((hi - lo) * (hi - lo)) : 1.0;
      const double a = spec.flux_lo[0] * scale;
      const double b = spec.flux_hi[0] * scale;
      const auto p = shift_lo_cubic(x, lo, hi);
      const auto q = shift_hi_cubic(x, lo, hi);
      return {a * p.v + b * q.v, a * p.d1 + b * q.d1, a * p.d2 + b * q.d2};
    }
    case Geometry::one_sided_lo: return {(x - spec.lo()) * spec.flux_lo[0], spec.flux_lo[0], 0.0};
    case Geometry::one_sided_hi: return {(x - spec.hi()) * spec.flux_hi[0], spec.flux_hi[0], 0.0};
    case Geometry::hyperrect: break;
  }
  throw ConfigError("hyperrect shift is not one-dimensional");
}

/// Hyperrectangle shift sum
///   sum_i A_i (x_i - lo_i) prod_{j!=i} (hi_j - x_j)^2
///       + B_i (x_i - hi_i) prod_{j!=i} (x_j - lo_j)^2
/// and its gradient.
inline PointGradient hyperrect_shift(std::span<const double> x, const ConstraintSpec& spec) {
  const std::size_t d = spec.dims();
  if (x.size() != d) throw ConfigError("point dimension does not match constraint domain");
  PointGradient out{0.0, std::vector<double>(d, 0.0)};
  for (std::size_t i = 0; i < d; ++i) {
    const double a = spec.flux_lo[i];
    const double b = spec.flux_hi[i];
    if (a == 0.0 && b == 0.0) continue;
    auto term = [&](double flux, double anchor_i, auto factor) {
      // flux * (x_i - anchor_i) * prod_{j!=i} factor(j)^2
      double prod = 1.0;
      for (std::size_t j = 0; j < d; ++j) {
        if (j != i) prod *= factor(j) * factor(j);
      }
      out.u += flux * (x[i] - anchor_i) * prod;
      out.grad[i] += flux * prod;
      for (std::size_t k = 0; k < d; ++k) {
        if (k == i) continue;
        double p = 1.0;
        for (std::size_t j = 0; j < d; ++j) {
          if (j != i && j != k) p *= factor(j) * factor(j);
        }
        // d/dx_k factor(k)^2 = 2 factor(k) * dfactor/dx_k
        out.grad[k] += flux * (x[i] - anchor_i) * p * 2.0 * factor(k) * factor.slope(k);
      }
    };
    struct HiGap {
      std::span<const double> x;
      const ConstraintSpec& s;
      double operator()(std::size_t j) const { return s.domain_hi[j] - x[j]; }
      double slope(std::size_t) const { return -1.0; }
    };
    struct LoGap {
      std::span<const double> x;
      const ConstraintSpec& s;
      double operator()(std::size_t j) const { return x[j] - s.domain_lo[j]; }
      double slope(std::size_t) const { return 1.0; }
    };
    if (a != 0.0) term(a, spec.domain_lo[i], HiGap{x, spec});
    if (b != 0.0) term(b, spec.domain_hi[i], LoGap{x, spec});
  }
  return out;
}

/// Network composed with an input embedding; the inner model u^NN of every
/// strategy. Derivatives are taken with respect to the physical coordinates.
class EmbeddedNetwork {
 public:
  EmbeddedNetwork(const NetworkParams& params, EmbeddingSpec spec)
      : params_(&params), embedding_(std::move(spec)) {
    if (params.input_width() != embedding_.size() + 1) {
      throw ConfigError("network input width " + std::to_string(params.input_width()) +
                        " does not match embedding features + time (" +
                        std::to_string(embedding_.size() + 1) + ")");
    }
  }

  const NetworkParams& params() const { return *params_; }
  const Embedding& embedding() const { return embedding_; }

  PointJet jet(double x, double t) const {
    const auto plan = plan_channels({true, true, true, true});
    auto tr = trace_forward(*params_, plan.layout, embed_input(embedding_, plan, {&x, 1}, {&t, 1}), 1);
    return {tr.out(0, 0), tr.out(plan.dx, 0), tr.out(plan.dxx, 0), tr.out(plan.dt, 0),
            tr.out(plan.dxt, 0)};
  }

  double value(double x, double t) const {
    auto in = embedding_({&x, 1});
    in.push_back(t);
    return forward(*params_, in);
  }

  /// Value and gradient with respect to every spatial coordinate.
  PointGradient gradient(std::span<const double> x, double t) const {
    const std::size_t d = embedding_.dims();
    if (x.size() != d) throw ConfigError("point dimension does not match embedding domain");
    JetLayout layout{d, {}};
    Eigen::MatrixXd in = make_jet_input(layout, embedding_.size() + 1, 1);
    const auto& feats = embedding_.features();
    for (std::size_t f = 0; f < feats.size(); ++f) {
      const auto& ft = feats[f];
      const auto r = static_cast<Eigen::Index>(f);
      in(r, 0) = Embedding::feature_value(ft, x[ft.dim]);
      in(r, static_cast<Eigen::Index>(layout.first(ft.dim))) =
          Embedding::feature_derivatives(ft, x[ft.dim]).first;
    }
    in(static_cast<Eigen::Index>(feats.size()), 0) = t;
    auto tr = trace_forward(*params_, layout, std::move(in), 1);
    PointGradient out{tr.out(0, 0), std::vector<double>(d)};
    for (std::size_t i = 0; i < d; ++i) out.grad[i] = tr.out(layout.first(i), 0);
    return out;
  }

 private:
  const NetworkParams* params_;
  Embedding embedding_;
};

/// Derivative-subtraction combination for the existing hard constraint,
/// given the inner jets at (x,t), (0,t) and (1,t).
inline PointJet existing_hc_combine(const PointJet& in, const PointJet& at0, const PointJet& at1,
                                    double x, double flux_lo, double flux_hi) {
  const auto p = shift_lo_cubic(x, 0.0, 1.0);
  const auto q = shift_hi_cubic(x, 0.0, 1.0);
  const double c0 = flux_lo - at0.ux;
  const double c1 = flux_hi - at1.ux;
  return {in.u + c0 * p.v + c1 * q.v,
          in.ux + c0 * p.d1 + c1 * q.d1,
          in.uxx + c0 * p.d2 + c1 * q.d2,
          in.ut - p.v * at0.uxt - q.v * at1.uxt,
          in.uxt - p.d1 * at0.uxt - q.d1 * at1.uxt};
}

inline PointJet add_shift(PointJet j, const ShiftJet& s) {
  j.u += s.v;
  j.ux += s.d1;
  j.uxx += s.d2;
  return j;
}

template <InnerModel M>
PointJet existing_hc_transform(const M& inner, double x, double t, const ConstraintSpec& spec) {
  if (spec.strategy != Strategy::existing_hc) throw ConfigError("spec strategy is not existing_hc");
  spec.validate();
  return existing_hc_combine(inner.jet(x, t), inner.jet(0.0, t), inner.jet(1.0, t), x,
                             spec.flux_lo[0], spec.flux_hi[0]);
}

namespace detail {
inline void require_embedding(const EmbeddedNetwork& inner, EmbeddingKind kind) {
  if (inner.embedding().spec().kind != kind) {
    throw ConfigError("new hard constraint needs a " + std::string(to_string(kind)) +
                      " embedding, got " + std::string(to_string(inner.embedding().spec().kind)));
  }
}
inline void require_domain(const EmbeddedNetwork& inner, const ConstraintSpec& spec) {
  const auto& es = inner.embedding().spec();
  if (es.domain_lo != spec.domain_lo || es.domain_hi != spec.domain_hi) {
    throw ConfigError("embedding and constraint domains differ");
  }
}
}  // namespace detail

inline PointJet new_hc_transform(const EmbeddedNetwork& inner, double x, double t,
                                 const ConstraintSpec& spec) {
  if (spec.strategy != Strategy::new_hc) throw ConfigError("spec strategy is not new_hc");
  if (spec.geometry != Geometry::unit_interval) throw ConfigError("new_hc_transform expects unit_interval");
  spec.validate();
  detail::require_embedding(inner, EmbeddingKind::hc_cosine);
  detail::require_domain(inner, spec);
  return add_shift(inner.jet(x, t), shift_polynomial(spec, x));
}

inline PointJet general_interval_transform(const EmbeddedNetwork& inner, double x, double t,
                                           const ConstraintSpec& spec) {
  if (spec.geometry != Geometry::general_interval && spec.geometry != Geometry::unit_interval) {
    throw ConfigError("general_interval_transform expects an interval geometry");
  }
  spec.validate();
  detail::require_embedding(inner, EmbeddingKind::hc_cosine);
  detail::require_domain(inner, spec);
  auto s = spec;
  s.strategy = Strategy::new_hc;
  return add_shift(inner.jet(x, t), shift_polynomial(s, x));
}

inline PointJet one_sided_transform(const EmbeddedNetwork& inner, double x, double t,
                                    const ConstraintSpec& spec) {
  if (spec.geometry != Geometry::one_sided_lo && spec.geometry != Geometry::one_sided_hi) {
    throw ConfigError("one_sided_transform expects a one-sided geometry");
  }
  spec.validate();
  detail::require_embedding(inner, EmbeddingKind::hc_cosine_one_sided);
  detail::require_domain(inner, spec);
  const Anchor want = spec.geometry == Geometry::one_sided_lo ? Anchor::lo : Anchor::hi;
  if (inner.embedding().spec().anchor != want) {
    throw ConfigError("one-sided embedding anchor does not match constraint side");
  }
  auto s = spec;
  s.strategy = Strategy::new_hc;
  return add_shift(inner.jet(x, t), shift_polynomial(s, x));
}

inline PointGradient hyperrect_transform(const EmbeddedNetwork& inner, std::span<const double> x,
                                         double t, const ConstraintSpec& spec) {
  if (spec.geometry != Geometry::hyperrect) throw ConfigError("hyperrect_transform expects hyperrect");
  spec.validate();
  const auto kind = inner.embedding().spec().kind;
  if (kind != EmbeddingKind::hc_cosine_hyperrect && kind != EmbeddingKind::identity) {
    throw ConfigError("hyperrect transform needs an hc_cosine_hyperrect embedding");
  }
  detail::require_domain(inner, spec);
  auto out = inner.gradient(x, t);
  const auto s = hyperrect_shift(x, spec);
  out.u += s.u;
  for (std::size_t i = 0; i < out.grad.size(); ++i) out.grad[i] += s.grad[i];
  return out;
}

/// Applies the configured 1D strategy to an embedded network.
inline PointJet apply_constraint(const EmbeddedNetwork& inner, double x, double t,
                                 const ConstraintSpec& spec) {
  switch (spec.strategy) {
    case Strategy::soft: return inner.jet(x, t);
    case Strategy::existing_hc: return existing_hc_transform(inner, x, t, spec);
    case Strategy::new_hc:
      switch (spec.geometry) {
        case Geometry::unit_interval: return new_hc_transform(inner, x, t, spec);
        case Geometry::general_interval: return general_interval_transform(inner, x, t, spec);
        case Geometry::one_sided_lo:
        case Geometry::one_sided_hi: return one_sided_transform(inner, x, t, spec);
        case Geometry::hyperrect: break;
      }
  }
  throw ConfigError("hyperrect models have no 1D jet");
}

}  // namespace hcpinn
