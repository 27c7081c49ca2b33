#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "hcpinn/constraints.hpp"
#include "hcpinn/model.hpp"

using namespace hcpinn;

namespace {

struct LinearProbe {
  PointJet jet(double x, double) const { return {x, 1.0, 0.0, 0.0, 0.0}; }
};

struct ConstantProbe {
  double c;
  PointJet jet(double, double) const { return {c, 0.0, 0.0, 0.0, 0.0}; }
};

ConstraintSpec interval(Strategy s, double a, double b, double lo = 0.0, double hi = 1.0) {
  ConstraintSpec c;
  c.strategy = s;
  c.geometry = (lo == 0.0 && hi == 1.0) ? Geometry::unit_interval : Geometry::general_interval;
  c.flux_lo = {a};
  c.flux_hi = {b};
  c.domain_lo = {lo};
  c.domain_hi = {hi};
  return c;
}

}  // namespace

TEST(ExistingHc, ConstantModelPassesThrough) {
  const auto spec = interval(Strategy::existing_hc, 0.0, 0.0);
  for (double x : {0.0, 0.3, 1.0}) EXPECT_EQ(existing_hc_transform(ConstantProbe{2.5}, x, 0.1, spec).u, 2.5);
}

TEST(ExistingHc, LinearProbeClosedForm) {
  const auto spec = interval(Strategy::existing_hc, 0.0, 0.0);
  for (double x : {0.0, 0.25, 0.6, 1.0}) {
    const auto j = existing_hc_transform(LinearProbe{}, x, 0.0, spec);
    EXPECT_NEAR(j.u, x - x * (1 - x) * (1 - x) - x * x * (x - 1), 1e-15);
  }
  EXPECT_NEAR(existing_hc_transform(LinearProbe{}, 0.0, 0.0, spec).ux, 0.0, 1e-15);
  EXPECT_NEAR(existing_hc_transform(LinearProbe{}, 1.0, 0.0, spec).ux, 0.0, 1e-15);
}

TEST(ExistingHc, RandomNetworkHitsFluxes) {
  const auto spec = interval(Strategy::existing_hc, 0.7, -1.3);
  const auto p = glorot_uniform(mlp_sizes(2, 3, 100), 31);
  const EmbeddedNetwork net(p, embedding::identity());
  for (double t : {0.0, 0.4, 1.0}) {
    EXPECT_NEAR(existing_hc_transform(net, 0.0, t, spec).ux, 0.7, 1e-10);
    EXPECT_NEAR(existing_hc_transform(net, 1.0, t, spec).ux, -1.3, 1e-10);
  }
}

TEST(ExistingHc, RestrictedToUnitInterval) {
  auto spec = interval(Strategy::existing_hc, 0.0, 0.0, 0.0, 2.0);
  EXPECT_THROW(spec.validate(), ConfigError);
}

TEST(ExistingHc, AgreesWithNewHcForConstantInner) {
  const auto e = interval(Strategy::existing_hc, 0.4, -2.0);
  const auto n = interval(Strategy::new_hc, 0.4, -2.0);
  for (double x : {0.0, 0.33, 0.8, 1.0}) {
    const auto a = existing_hc_transform(ConstantProbe{-0.6}, x, 0.5, e);
    const auto b = add_shift(ConstantProbe{-0.6}.jet(x, 0.5), shift_polynomial(n, x));
    EXPECT_NEAR(a.u, b.u, 1e-14);
    EXPECT_NEAR(a.ux, b.ux, 1e-14);
    EXPECT_NEAR(a.uxx, b.uxx, 1e-13);
  }
}

TEST(NewHc, ZeroFluxBoundaryDerivativeIsExactlyZero) {
  const auto spec = interval(Strategy::new_hc, 0.0, 0.0);
  const auto p = glorot_uniform({3, 30, 30, 1}, 4);
  const EmbeddedNetwork net(p, embedding::hc_cosine({1, 6}));
  EXPECT_EQ(new_hc_transform(net, 0.0, 0.3, spec).ux, 0.0);
  EXPECT_LT(std::abs(new_hc_transform(net, 1.0, 0.3, spec).ux), 1e-13);
  EXPECT_NEAR(new_hc_transform(net, 0.42, 0.3, spec).u, net.value(0.42, 0.3), 1e-15);
}

TEST(NewHc, ShiftPolynomialDerivatives) {
  const auto spec = interval(Strategy::new_hc, 1.25, -0.5);
  EXPECT_EQ(shift_polynomial(spec, 0.0).d1, 1.25);
  EXPECT_EQ(shift_polynomial(spec, 1.0).d1, -0.5);
  EXPECT_EQ(shift_polynomial(spec, 0.0).v, 0.0);
  EXPECT_EQ(shift_polynomial(spec, 1.0).v, 0.0);
}

TEST(NewHc, RandomNetworkHitsFluxes) {
  const auto spec = interval(Strategy::new_hc, 2.0, -3.0);
  const auto p = glorot_uniform({4, 40, 40, 40, 1}, 8);
  const EmbeddedNetwork net(p, embedding::hc_cosine({1, 5, 12}));
  for (double t : {0.0, 0.5, 1.0}) {
    EXPECT_NEAR(new_hc_transform(net, 0.0, t, spec).ux, 2.0, 1e-10);
    EXPECT_NEAR(new_hc_transform(net, 1.0, t, spec).ux, -3.0, 1e-10);
  }
}

TEST(NewHc, RejectsNonVanishingEmbedding) {
  const auto spec = interval(Strategy::new_hc, 0.0, 0.0);
  EXPECT_THROW(PinnModel(embedding::random_cos_sin(3, 2.0, 1), spec), ConfigError);
  EXPECT_THROW(PinnModel(embedding::identity(), spec), ConfigError);
  const auto p = glorot_uniform({7, 4, 1}, 1);
  const EmbeddedNetwork net(p, embedding::random_cos_sin(3, 2.0, 1));
  EXPECT_THROW(new_hc_transform(net, 0.5, 0.5, spec), ConfigError);
}

TEST(GeneralInterval, VerbatimShiftScalesFlux) {
  auto spec = interval(Strategy::new_hc, 1.0, 0.0, 0.0, 2.0);
  EXPECT_EQ(shift_polynomial(spec, 0.0).d1, 4.0);
  spec.normalized_shift = true;
  EXPECT_EQ(shift_polynomial(spec, 0.0).d1, 1.0);
  spec.flux_lo = {0.0};
  spec.flux_hi = {-0.75};
  EXPECT_EQ(shift_polynomial(spec, 2.0).d1, -0.75);
}

TEST(GeneralInterval, UnitIntervalReducesToNewHc) {
  const auto spec = interval(Strategy::new_hc, 0.3, 0.9);
  const auto p = glorot_uniform({3, 10, 1}, 5);
  const EmbeddedNetwork net(p, embedding::hc_cosine({1, 2}));
  for (double x : {0.0, 0.4, 1.0}) {
    const auto a = general_interval_transform(net, x, 0.2, spec);
    const auto b = new_hc_transform(net, x, 0.2, spec);
    EXPECT_EQ(a.u, b.u);
    EXPECT_EQ(a.ux, b.ux);
  }
}

TEST(GeneralInterval, ZeroFluxesGiveFlatBoundary) {
  const auto spec = interval(Strategy::new_hc, 0.0, 0.0, -1.5, 0.5);
  const auto p = glorot_uniform({4, 20, 20, 1}, 6);
  const EmbeddedNetwork net(p, embedding::hc_cosine({1, 3, 4}, -1.5, 0.5));
  EXPECT_LT(std::abs(general_interval_transform(net, -1.5, 0.7, spec).ux), 1e-12);
  EXPECT_LT(std::abs(general_interval_transform(net, 0.5, 0.7, spec).ux), 1e-12);
}

TEST(GeneralInterval, RejectsEmptyInterval) {
  auto spec = interval(Strategy::new_hc, 0.0, 0.0, 1.0, 1.0);
  EXPECT_THROW(spec.validate(), ConfigError);
}

TEST(OneSided, HitsFluxAtAnchorOnly) {
  ConstraintSpec spec;
  spec.strategy = Strategy::new_hc;
  spec.geometry = Geometry::one_sided_lo;
  spec.flux_lo = {1.5};
  spec.flux_hi = {};
  const auto p = glorot_uniform({3, 20, 20, 1}, 12);
  const EmbeddedNetwork net(p, embedding::hc_cosine_one_sided({1, 2.5}, 0.0, 1.0));
  EXPECT_NEAR(one_sided_transform(net, 0.0, 0.4, spec).ux, 1.5, 1e-10);
  EXPECT_GT(std::abs(one_sided_transform(net, 1.0, 0.4, spec).ux - 1.5), 0.0);

  spec.flux_lo = {0.0};
  EXPECT_EQ(one_sided_transform(net, 0.0, 0.4, spec).ux, 0.0);
}

TEST(OneSided, HighSideAndAnchorChecks) {
  ConstraintSpec spec;
  spec.strategy = Strategy::new_hc;
  spec.geometry = Geometry::one_sided_hi;
  spec.flux_lo = {};
  spec.flux_hi = {-0.8};
  const auto p = glorot_uniform({2, 20, 1}, 13);
  const EmbeddedNetwork hi(p, embedding::hc_cosine_one_sided({1}, 0.0, 1.0, Anchor::hi));
  EXPECT_NEAR(one_sided_transform(hi, 1.0, 0.1, spec).ux, -0.8, 1e-12);
  const EmbeddedNetwork lo(p, embedding::hc_cosine_one_sided({1}, 0.0, 1.0, Anchor::lo));
  EXPECT_THROW(one_sided_transform(lo, 1.0, 0.1, spec), ConfigError);

  spec.flux_lo = {0.0};
  EXPECT_THROW(spec.validate(), ConfigError);
}

TEST(Hyperrect, ShiftTermExample) {
  ConstraintSpec spec;
  spec.strategy = Strategy::new_hc;
  spec.geometry = Geometry::hyperrect;
  spec.domain_lo = {0.0, 0.0};
  spec.domain_hi = {1.0, 1.0};
  spec.flux_lo = {1.0, 0.0};
  spec.flux_hi = {0.0, 0.0};
  const auto s = hyperrect_shift(std::vector<double>{0.0, 0.5}, spec);
  EXPECT_DOUBLE_EQ(s.grad[0], 0.25);
  EXPECT_DOUBLE_EQ(s.u, 0.0);
}

TEST(Hyperrect, ShiftGradientMatchesFiniteDifferences) {
  ConstraintSpec spec;
  spec.strategy = Strategy::new_hc;
  spec.geometry = Geometry::hyperrect;
  spec.domain_lo = {0.0, -1.0, 0.5};
  spec.domain_hi = {1.0, 1.0, 2.0};
  spec.flux_lo = {0.3, -1.1, 0.0};
  spec.flux_hi = {0.9, 0.4, -0.7};
  std::vector<double> x{0.2, 0.3, 1.1};
  const auto s = hyperrect_shift(x, spec);
  const double h = 1e-6;
  for (std::size_t k = 0; k < 3; ++k) {
    auto xp = x, xm = x;
    xp[k] += h;
    xm[k] -= h;
    const double fd = (hyperrect_shift(xp, spec).u - hyperrect_shift(xm, spec).u) / (2 * h);
    EXPECT_NEAR(s.grad[k], fd, 1e-8);
  }
}

TEST(Hyperrect, ZeroFluxFacesAreFlat) {
  ConstraintSpec spec;
  spec.strategy = Strategy::new_hc;
  spec.geometry = Geometry::hyperrect;
  spec.domain_lo = {0.0, 0.0};
  spec.domain_hi = {1.0, 2.0};
  spec.flux_lo = {0.0, 0.0};
  spec.flux_hi = {0.0, 0.0};
  const auto p = glorot_uniform({5, 20, 20, 1}, 14);
  const EmbeddedNetwork net(p, embedding::hc_cosine_hyperrect({1, 2}, {0.0, 0.0}, {1.0, 2.0}));
  for (int i = 0; i < 5; ++i) {
    const double s = i / 4.0;
    EXPECT_LT(std::abs(hyperrect_transform(net, std::vector<double>{0.0, 2 * s}, 0.3, spec).grad[0]), 1e-10);
    EXPECT_LT(std::abs(hyperrect_transform(net, std::vector<double>{1.0, 2 * s}, 0.3, spec).grad[0]), 1e-10);
    EXPECT_LT(std::abs(hyperrect_transform(net, std::vector<double>{s, 0.0}, 0.3, spec).grad[1]), 1e-10);
    EXPECT_LT(std::abs(hyperrect_transform(net, std::vector<double>{s, 2.0}, 0.3, spec).grad[1]), 1e-10);
  }
}

TEST(Hyperrect, OneDimensionZeroFluxMatchesInterval) {
  ConstraintSpec h;
  h.strategy = Strategy::new_hc;
  h.geometry = Geometry::hyperrect;
  h.domain_lo = {0.0};
  h.domain_hi = {1.0};
  h.flux_lo = {0.0};
  h.flux_hi = {0.0};
  const auto p = glorot_uniform({3, 12, 1}, 15);
  const EmbeddedNetwork hnet(p, embedding::hc_cosine_hyperrect({1, 3}, {0.0}, {1.0}));
  const EmbeddedNetwork inet(p, embedding::hc_cosine({1, 3}));
  const auto spec = interval(Strategy::new_hc, 0.0, 0.0);
  for (double x : {0.0, 0.45, 1.0}) {
    const auto a = hyperrect_transform(hnet, std::vector<double>{x}, 0.6, h);
    const auto b = general_interval_transform(inet, x, 0.6, spec);
    EXPECT_NEAR(a.u, b.u, 1e-15);
    EXPECT_NEAR(a.grad[0], b.ux, 1e-13);
  }
}

TEST(Hyperrect, FluxLengthMismatchThrows) {
  ConstraintSpec h;
  h.strategy = Strategy::new_hc;
  h.geometry = Geometry::hyperrect;
  h.domain_lo = {0.0, 0.0};
  h.domain_hi = {1.0, 1.0};
  h.flux_lo = {0.0};
  h.flux_hi = {0.0, 0.0};
  EXPECT_THROW(h.validate(), ConfigError);
}

TEST(PinnModel, BatchedMatchesPointwise) {
  for (auto strategy : {Strategy::soft, Strategy::existing_hc, Strategy::new_hc}) {
    const auto emb = strategy == Strategy::new_hc ? embedding::hc_cosine({1, 7}) : embedding::identity();
    const PinnModel model(emb, interval(strategy, 0.25, -0.6));
    const auto p = glorot_uniform(mlp_sizes(model.input_width(), 2, 16), 3);
    const BoundModel point(p, model);
    const std::vector<double> xs{0.0, 0.3, 0.71, 1.0}, ts{0.5, 0.0, 0.9, 0.2};
    Tape tape(p);
    const auto ev = model.evaluate(tape, xs, ts, {true, true, true, false});
    for (Eigen::Index j = 0; j < 4; ++j) {
      const auto pj = point.jet(xs[j], ts[j]);
      EXPECT_NEAR(ev.out->u(j), pj.u, 1e-14) << to_string(strategy);
      EXPECT_NEAR(ev.out->ux(j), pj.ux, 1e-13) << to_string(strategy);
      EXPECT_NEAR(ev.out->uxx(j), pj.uxx, 1e-12) << to_string(strategy);
      EXPECT_NEAR(ev.out->ut(j), pj.ut, 1e-13) << to_string(strategy);
    }
  }
}

TEST(Strategy, StringRoundTrip) {
  for (auto s : {Strategy::soft, Strategy::existing_hc, Strategy::new_hc}) {
    EXPECT_EQ(strategy_from_string(to_string(s)), s);
  }
  for (auto g : {Geometry::unit_interval, Geometry::general_interval, Geometry::one_sided_lo,
                 Geometry::one_sided_hi, Geometry::hyperrect}) {
    EXPECT_EQ(geometry_from_string(to_string(g)), g);
  }
  EXPECT_THROW(strategy_from_string("hard"), ConfigError);
}
