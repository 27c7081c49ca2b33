#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "hcpinn/constraints.hpp"
#include "hcpinn/inputs.hpp"
#include "hcpinn/tape.hpp"
#include "hcpinn/taylor.hpp"

using namespace hcpinn;

namespace {

double rel_err(double got, double want) { return std::abs(got - want) / std::max(std::abs(want), 1e-8); }

// Loss through the jet path at one point: (u_t - D u_xx)^2 + u^2.
double pde_point_loss(const NetworkParams& p, const EmbeddingSpec& e, double x, double t, double d) {
  const auto j = EmbeddedNetwork(p, e).jet(x, t);
  const double r = j.ut - d * j.uxx;
  return r * r + j.u * j.u;
}

}  // namespace

TEST(Jet, OneUnitNetworkClosedForm) {
  // u = v tanh(w x + c t + b) + b2
  NetworkParams p({2, 1, 1});
  p.weight(0) << 1.7, -0.4;
  p.bias(0) << 0.2;
  p.weight(1) << 0.9;
  p.bias(1) << -0.1;
  const double x = 0.3, t = 0.6;
  const double a = std::tanh(1.7 * x - 0.4 * t + 0.2);
  const double s1 = 1 - a * a;
  const double s2 = -2 * a * s1;
  const auto j = network_jet(p, std::vector<double>{x, t}, 0);
  EXPECT_NEAR(j.value, 0.9 * a - 0.1, 1e-15);
  EXPECT_NEAR(j.d1, 0.9 * 1.7 * s1, 1e-15);
  EXPECT_NEAR(j.d2, 0.9 * 1.7 * 1.7 * s2, 1e-15);
}

TEST(Jet, LinearRegionApproximatesSquare) {
  // Two tiny units: u = (tanh(e x + 1) + tanh(-e x + 1) - 2 tanh 1) / (e^2 tanh''(1))
  // approaches x^2 as e -> 0; d2 tends to 2 and d1 to 2x.
  const double e = 1e-3;
  const double t1 = std::tanh(1.0);
  const double s1 = 1 - t1 * t1;
  const double s2 = -2 * t1 * s1;
  NetworkParams p({1, 2, 1});
  p.weight(0) << e, -e;
  p.bias(0) << 1.0, 1.0;
  p.weight(1) << 1.0 / (e * e * s2), 1.0 / (e * e * s2);
  p.bias(1) << -2.0 * t1 / (e * e * s2);
  const double x = 0.4;
  const auto j = network_jet(p, std::vector<double>{x}, 0);
  EXPECT_NEAR(j.value, x * x, 1e-5);
  EXPECT_NEAR(j.d1, 2 * x, 1e-5);
  EXPECT_NEAR(j.d2, 2.0, 1e-5);
}

TEST(Jet, EmbeddedDerivativeVanishesAtZero) {
  const auto p = glorot_uniform({2, 20, 20, 1}, 9);
  const EmbeddedNetwork net(p, embedding::hc_cosine({1}));
  EXPECT_EQ(net.jet(0.0, 0.4).ux, 0.0);
  EXPECT_NE(net.jet(0.3, 0.4).ux, 0.0);
}

TEST(Jet, MatchesFiniteDifferencesOnRandomNetworks) {
  const double h = 1e-4;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto p = glorot_uniform({2, 30, 30, 30, 1}, seed);
    const EmbeddedNetwork net(p, embedding::identity());
    const double x = 0.1 + 0.04 * static_cast<double>(seed), t = 0.5;
    const auto j = net.jet(x, t);
    const double fp = net.value(x + h, t), fm = net.value(x - h, t), f0 = net.value(x, t);
    EXPECT_LT(rel_err(j.ux, (fp - fm) / (2 * h)), 1e-5) << "seed " << seed;
    EXPECT_LT(rel_err(j.uxx, (fp - 2 * f0 + fm) / (h * h)), 1e-4) << "seed " << seed;
    const double tp = net.value(x, t + h), tm = net.value(x, t - h);
    EXPECT_LT(rel_err(j.ut, (tp - tm) / (2 * h)), 1e-5) << "seed " << seed;
    const double xt = (net.value(x + h, t + h) - net.value(x + h, t - h) - net.value(x - h, t + h) +
                       net.value(x - h, t - h)) /
                      (4 * h * h);
    EXPECT_LT(rel_err(j.uxt, xt), 1e-4) << "seed " << seed;
  }
}

TEST(Jet, ThroughEmbeddingMatchesFiniteDifferences) {
  const double h = 1e-5;
  const auto spec = embedding::hc_cosine({1, 3, 7});
  const auto p = glorot_uniform({4, 25, 25, 1}, 4);
  const EmbeddedNetwork net(p, spec);
  for (double x : {0.13, 0.5, 0.77}) {
    const auto j = net.jet(x, 0.2);
    const double fp = net.value(x + h, 0.2), fm = net.value(x - h, 0.2), f0 = net.value(x, 0.2);
    EXPECT_LT(rel_err(j.ux, (fp - fm) / (2 * h)), 1e-5);
    EXPECT_LT(rel_err(j.uxx, (fp - 2 * f0 + fm) / (h * h)), 1e-3);
  }
}

TEST(Gradient, ConstantLossIsZero) {
  const auto p = glorot_uniform({2, 8, 1}, 1);
  const auto r = loss_gradient(p, [](Tape&) { return 3.0; });
  EXPECT_EQ(r.loss, 3.0);
  for (double g : r.gradient.data()) EXPECT_EQ(g, 0.0);
}

TEST(Gradient, NonFiniteLossThrows) {
  const auto p = glorot_uniform({2, 8, 1}, 1);
  EXPECT_THROW(loss_gradient(p, [](Tape&) { return std::nan(""); }), TrainingError);
}

TEST(Gradient, SquaredOutputMatchesFiniteDifferences) {
  const auto p = glorot_uniform({2, 10, 10, 1}, 2);
  const std::vector<double> x0{0.3, 0.8};
  const auto r = loss_gradient(p, [&](Tape& tape) {
    JetLayout layout{0, {}};
    Eigen::MatrixXd in(2, 1);
    in << x0[0], x0[1];
    const auto node = tape.evaluate(layout, in, 1);
    const double u = tape.trace(node).out(0, 0);
    tape.defer([&tape, node, u] { tape.adjoint(node)(0) += 2 * u; });
    return u * u;
  });
  const double h = 1e-6;
  auto f = [&](const NetworkParams& q) {
    const double u = forward(q, x0);
    return u * u;
  };
  for (std::size_t i = 0; i < p.size(); ++i) {
    auto qp = p, qm = p;
    qp.data()[i] += h;
    qm.data()[i] -= h;
    const double fd = (f(qp) - f(qm)) / (2 * h);
    if (std::abs(fd) > 1e-8) {
      EXPECT_LT(rel_err(r.gradient.data()[i], fd), 1e-4) << "param " << i;
    }
  }
}

TEST(Gradient, SecondOrderLossMatchesFiniteDifferences) {
  const auto spec = embedding::hc_cosine({1, 2});
  const double d = 0.05;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto p = glorot_uniform({3, 12, 12, 1}, 100 + seed);
    const double x = 0.15 + 0.03 * static_cast<double>(seed), t = 0.35;
    const Embedding emb(spec);
    const auto r = loss_gradient(p, [&](Tape& tape) {
      const auto plan = plan_channels({false, true, true, false});
      const auto node = tape.evaluate(plan.layout, embed_input(emb, plan, {&x, 1}, {&t, 1}), 1);
      const auto& tr = tape.trace(node);
      const double u = tr.out(0, 0);
      const double res = tr.out(plan.dt, 0) - d * tr.out(plan.dxx, 0);
      tape.defer([&tape, node, plan, res, u, d] {
        auto& a = tape.adjoint(node);
        a(0) += 2 * u;
        a(plan.dt) += 2 * res;
        a(plan.dxx) -= 2 * d * res;
      });
      return res * res + u * u;
    });
    EXPECT_NEAR(r.loss, pde_point_loss(p, spec, x, t, d), 1e-14);
    const double h = 1e-6;
    for (std::size_t i = 0; i < p.size(); i += 3) {
      auto qp = p, qm = p;
      qp.data()[i] += h;
      qm.data()[i] -= h;
      const double fd = (pde_point_loss(qp, spec, x, t, d) - pde_point_loss(qm, spec, x, t, d)) / (2 * h);
      if (std::abs(fd) > 1e-8) {
        EXPECT_LT(rel_err(r.gradient.data()[i], fd), 1e-4) << "seed " << seed << " param " << i;
      }
    }
  }
}

TEST(Trace, BatchedEqualsPointwise) {
  const auto p = glorot_uniform({3, 16, 16, 1}, 21);
  const Embedding emb(embedding::hc_cosine({1, 4}));
  const std::vector<double> xs{0.0, 0.2, 0.55, 1.0}, ts{0.1, 0.9, 0.3, 0.0};
  const auto plan = plan_channels({true, true, true, true});
  const auto tr = trace_forward(p, plan.layout, embed_input(emb, plan, xs, ts), 4);
  for (Eigen::Index j = 0; j < 4; ++j) {
    const auto one = trace_forward(p, plan.layout, embed_input(emb, plan, {&xs[j], 1}, {&ts[j], 1}), 1);
    for (std::size_t c = 0; c < plan.layout.channels(); ++c) {
      EXPECT_NEAR(tr.out(c, j), one.out(c, 0), 1e-14);
    }
  }
}

TEST(Trace, RejectsBadShapes) {
  const auto p = glorot_uniform({2, 4, 1}, 1);
  JetLayout layout{1, {{0, 0}}};
  EXPECT_THROW(trace_forward(p, layout, Eigen::MatrixXd::Zero(2, 4), 1), ConfigError);
  EXPECT_THROW(trace_forward(p, JetLayout{1, {{0, 1}}}, Eigen::MatrixXd::Zero(2, 3), 1), ConfigError);
}
