#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "hcpinn/errors.hpp"

namespace hcpinn {

enum class EmbeddingKind {
  identity,
  random_cos_sin,
  hc_cosine,
  hc_cosine_one_sided,
  hc_cosine_hyperrect,
};

/// Which end of the interval a one-sided embedding is flat at.
enum class Anchor { lo, hi };

inline std::string_view to_string(EmbeddingKind k) {
  switch (k) {
    case EmbeddingKind::identity: return "identity";
    case EmbeddingKind::random_cos_sin: return "random_cos_sin";
    case EmbeddingKind::hc_cosine: return "hc_cosine";
    case EmbeddingKind::hc_cosine_one_sided: return "hc_cosine_one_sided";
    case EmbeddingKind::hc_cosine_hyperrect: return "hc_cosine_hyperrect";
  }
  return "?";
}

inline EmbeddingKind embedding_kind_from_string(std::string_view s) {
  for (auto k : {EmbeddingKind::identity, EmbeddingKind::random_cos_sin, EmbeddingKind::hc_cosine,
                 EmbeddingKind::hc_cosine_one_sided, EmbeddingKind::hc_cosine_hyperrect}) {
    if (to_string(k) == s) return k;
  }
  throw ConfigError("unknown embedding kind '" + std::string(s) + "'");
}

/// Input transformation applied to the spatial coordinates. Time is never
/// embedded; it is appended to the features unchanged.
struct EmbeddingSpec {
  EmbeddingKind kind = EmbeddingKind::identity;
  std::vector<double> frequencies;
  std::vector<double> domain_lo{0.0};
  std::vector<double> domain_hi{1.0};
  std::uint64_t rng_seed = 0;
  double sigma = 20.0;
  Anchor anchor = Anchor::lo;
  /// hc_cosine_hyperrect only: dimensions left as identity features.
  std::vector<bool> passthrough;

  std::size_t dims() const { return domain_lo.size(); }

  bool is_passthrough(std::size_t dim) const {
    return dim < passthrough.size() && passthrough[dim];
  }

  /// Spatial derivative of every feature vanishes on the constrained
  /// boundary.
  bool derivative_vanishing() const {
    return kind == EmbeddingKind::hc_cosine || kind == EmbeddingKind::hc_cosine_one_sided ||
           kind == EmbeddingKind::hc_cosine_hyperrect;
  }

  std::size_t feature_count() const {
    switch (kind) {
      case EmbeddingKind::identity: return dims();
      case EmbeddingKind::random_cos_sin: return 2 * frequencies.size();
      case EmbeddingKind::hc_cosine:
      case EmbeddingKind::hc_cosine_one_sided: return frequencies.size();
      case EmbeddingKind::hc_cosine_hyperrect: {
        std::size_t n = 0;
        for (std::size_t i = 0; i < dims(); ++i) n += is_passthrough(i) ? 1 : frequencies.size();
        return n;
      }
    }
    return 0;
  }

  void validate() const {
    if (domain_lo.empty() || domain_lo.size() != domain_hi.size()) {
      throw ConfigError("embedding domain bounds must be non-empty and of equal length");
    }
    for (std::size_t i = 0; i < dims(); ++i) {
      if (!(domain_lo[i] < domain_hi[i])) throw ConfigError("embedding domain requires lo < hi");
    }
    if (kind != EmbeddingKind::identity && kind != EmbeddingKind::hc_cosine_hyperrect && dims() != 1) {
      throw ConfigError(std::string(to_string(kind)) + " embeds a single spatial coordinate");
    }
    if (kind == EmbeddingKind::identity) return;
    if (frequencies.empty()) throw ConfigError("embedding needs at least one frequency");
    for (double b : frequencies) {
      if (!std::isfinite(b)) throw ConfigError("embedding frequencies must be finite");
    }
    if (kind == EmbeddingKind::random_cos_sin) return;
    if (frequencies.front() != 1.0) throw ConfigError("hard-constraint frequency list must begin with 1");
    for (double b : frequencies) {
      if (b == 0.0) throw ConfigError("hard-constraint frequencies must be nonzero");
      if (kind != EmbeddingKind::hc_cosine_one_sided && b != std::round(b)) {
        throw ConfigError("hard-constraint frequency " + std::to_string(b) + " is not an integer");
      }
    }
  }
};

/// Samples (1, b2, ..., bn): nonzero, distinct, nonnegative integers drawn by
/// rounding N(0, sigma) samples. Zeros and repeats are redrawn; negative
/// draws are folded to their absolute value since cos is even.
inline std::vector<double> sample_integer_frequencies(std::size_t n, double sigma, std::uint64_t seed) {
  if (n == 0) throw ConfigError("frequency count must be at least 1");
  if (!(sigma > 0.0)) throw ConfigError("sigma must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, sigma);
  std::vector<double> out{1.0};
  while (out.size() < n) {
    const double b = std::abs(std::round(dist(rng)));
    if (b == 0.0 || std::find(out.begin(), out.end(), b) != out.end()) continue;
    out.push_back(b);
  }
  return out;
}

/// Real frequencies b_i ~ N(0, sigma) for the random cos/sin embedding.
inline std::vector<double> sample_real_frequencies(std::size_t m, double sigma, std::uint64_t seed) {
  if (!(sigma > 0.0)) throw ConfigError("sigma must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, sigma);
  std::vector<double> out(m);
  for (auto& b : out) b = dist(rng);
  return out;
}

namespace embedding {

inline EmbeddingSpec identity(std::vector<double> lo = {0.0}, std::vector<double> hi = {1.0}) {
  EmbeddingSpec s;
  s.domain_lo = std::move(lo);
  s.domain_hi = std::move(hi);
  return s;
}

inline EmbeddingSpec random_cos_sin(std::size_t m, double sigma, std::uint64_t seed) {
  EmbeddingSpec s;
  s.kind = EmbeddingKind::random_cos_sin;
  s.frequencies = sample_real_frequencies(m, sigma, seed);
  s.sigma = sigma;
  s.rng_seed = seed;
  return s;
}

inline EmbeddingSpec hc_cosine(std::vector<double> freqs, double lo = 0.0, double hi = 1.0) {
  EmbeddingSpec s;
  s.kind = EmbeddingKind::hc_cosine;
  s.frequencies = std::move(freqs);
  s.domain_lo = {lo};
  s.domain_hi = {hi};
  s.validate();
  return s;
}

inline EmbeddingSpec hc_cosine_sampled(std::size_t n, double sigma, std::uint64_t seed) {
  auto s = hc_cosine(sample_integer_frequencies(n, sigma, seed));
  s.sigma = sigma;
  s.rng_seed = seed;
  return s;
}

inline EmbeddingSpec hc_cosine_one_sided(std::vector<double> freqs, double lo, double hi,
                                         Anchor anchor = Anchor::lo) {
  EmbeddingSpec s;
  s.kind = EmbeddingKind::hc_cosine_one_sided;
  s.frequencies = std::move(freqs);
  s.domain_lo = {lo};
  s.domain_hi = {hi};
  s.anchor = anchor;
  s.validate();
  return s;
}

inline EmbeddingSpec hc_cosine_hyperrect(std::vector<double> freqs, std::vector<double> lo,
                                         std::vector<double> hi, std::vector<bool> passthrough = {}) {
  EmbeddingSpec s;
  s.kind = EmbeddingKind::hc_cosine_hyperrect;
  s.frequencies = std::move(freqs);
  s.domain_lo = std::move(lo);
  s.domain_hi = std::move(hi);
  s.passthrough = std::move(passthrough);
  s.validate();
  return s;
}

}  // namespace embedding

/// One scalar feature: a function of a single spatial coordinate.
struct Feature {
  enum class Shape { identity, cosine, sine };
  Shape shape = Shape::identity;
  std::size_t dim = 0;
  double rate = 0.0;    // angular rate k in cos(k (x - origin))
  double origin = 0.0;
  double sign = 1.0;    // -1 reflects the coordinate about origin

  double phase(double x) const { return rate * sign * (x - origin); }
};

/// Precomputed feature list for a spec, in output order.
class Embedding {
 public:
  Embedding() : Embedding(EmbeddingSpec{}) {}

  explicit Embedding(EmbeddingSpec spec) : spec_(std::move(spec)) {
    spec_.validate();
    using std::numbers::pi;
    const auto& s = spec_;
    auto scaled = [&](std::size_t d, double b, double half) {
      return half * pi * b / (s.domain_hi[d] - s.domain_lo[d]);
    };
    switch (s.kind) {
      case EmbeddingKind::identity:
        for (std::size_t d = 0; d < s.dims(); ++d) features_.push_back({Feature::Shape::identity, d});
        break;
      case EmbeddingKind::random_cos_sin:
        for (double b : s.frequencies) {
          const double k = scaled(0, b, 1.0);
          features_.push_back({Feature::Shape::cosine, 0, k, s.domain_lo[0]});
          features_.push_back({Feature::Shape::sine, 0, k, s.domain_lo[0]});
        }
        break;
      case EmbeddingKind::hc_cosine:
        for (double b : s.frequencies) {
          features_.push_back({Feature::Shape::cosine, 0, scaled(0, b, 1.0), s.domain_lo[0]});
        }
        break;
      case EmbeddingKind::hc_cosine_one_sided: {
        const bool lo = s.anchor == Anchor::lo;
        for (double b : s.frequencies) {
          features_.push_back({Feature::Shape::cosine, 0, scaled(0, b, 0.5),
                               lo ? s.domain_lo[0] : s.domain_hi[0], lo ? 1.0 : -1.0});
        }
        break;
      }
      case EmbeddingKind::hc_cosine_hyperrect:
        for (std::size_t d = 0; d < s.dims(); ++d) {
          if (s.is_passthrough(d)) {
            features_.push_back({Feature::Shape::identity, d});
            continue;
          }
          for (double b : s.frequencies) {
            features_.push_back({Feature::Shape::cosine, d, scaled(d, b, 1.0), s.domain_lo[d]});
          }
        }
        break;
    }
  }

  const EmbeddingSpec& spec() const { return spec_; }
  const std::vector<Feature>& features() const { return features_; }
  std::size_t size() const { return features_.size(); }
  std::size_t dims() const { return spec_.dims(); }

  std::vector<double> operator()(std::span<const double> x) const {
    if (x.size() != dims()) throw ConfigError("point dimension does not match embedding domain");
    std::vector<double> out;
    out.reserve(size());
    for (const auto& f : features_) out.push_back(feature_value(f, x[f.dim]));
    return out;
  }

  static double feature_value(const Feature& f, double x) {
    switch (f.shape) {
      case Feature::Shape::identity: return x;
      case Feature::Shape::cosine: return std::cos(f.phase(x));
      case Feature::Shape::sine: return std::sin(f.phase(x));
    }
    return 0.0;
  }

  /// d/dx and d^2/dx^2 of a feature with respect to its own coordinate.
  static std::pair<double, double> feature_derivatives(const Feature& f, double x) {
    const double k = f.rate * f.sign;
    switch (f.shape) {
      case Feature::Shape::identity: return {1.0, 0.0};
      case Feature::Shape::cosine: {
        const double p = f.phase(x);
        return {-k * std::sin(p), -k * k * std::cos(p)};
      }
      case Feature::Shape::sine: {
        const double p = f.phase(x);
        return {k * std::cos(p), -k * k * std::sin(p)};
      }
    }
    return {0.0, 0.0};
  }

 private:
  EmbeddingSpec spec_;
  std::vector<Feature> features_;
};

// Point-wise embedding operations. Each checks that the spec kind matches.

namespace detail {
inline std::vector<double> embed_checked(const EmbeddingSpec& spec, EmbeddingKind kind,
                                         std::span<const double> x) {
  if (spec.kind != kind) {
    throw ConfigError("embedding spec kind is " + std::string(to_string(spec.kind)) + ", expected " +
                      std::string(to_string(kind)));
  }
  return Embedding(spec)(x);
}
}  // namespace detail

inline std::vector<double> random_cos_sin_embed(double x, const EmbeddingSpec& spec) {
  return detail::embed_checked(spec, EmbeddingKind::random_cos_sin, {&x, 1});
}

inline std::vector<double> hc_cosine_embed(double x, const EmbeddingSpec& spec) {
  return detail::embed_checked(spec, EmbeddingKind::hc_cosine, {&x, 1});
}

inline std::vector<double> hc_cosine_embed_one_sided(double x, const EmbeddingSpec& spec) {
  return detail::embed_checked(spec, EmbeddingKind::hc_cosine_one_sided, {&x, 1});
}

inline std::vector<double> hc_cosine_embed_hyperrect(std::span<const double> x, const EmbeddingSpec& spec) {
  return detail::embed_checked(spec, EmbeddingKind::hc_cosine_hyperrect, x);
}

}  // namespace hcpinn
