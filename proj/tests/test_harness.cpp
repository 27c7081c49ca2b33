#include <gtest/gtest.h>

#include <cmath>

#include "hcpinn/harness.hpp"

using namespace hcpinn;

namespace {

RunConfig small(const std::string& problem, Strategy s, EmbeddingKind e = EmbeddingKind::identity) {
  RunConfig c;
  c.problem = problem;
  c.strategy = s;
  c.embedding = e;
  if (e != EmbeddingKind::identity) c.n_freq = 3;
  c.hidden = {12, 12};
  c.counts = {200, 40, 40};
  c.iterations = 30;
  c.seed_weights = 1;
  c.seed_collocation = 2;
  c.seed_frequencies = 3;
  c.eval_nx = 32;
  c.eval_nt = 11;
  return c;
}

RunMetrics fake(const std::string& problem, Strategy s, double err) {
  RunMetrics m;
  m.config.problem = problem;
  m.config.strategy = s;
  m.rel_l2 = err;
  return m;
}

}  // namespace

TEST(RelativeImprovement, Calibration) {
  EXPECT_EQ(relative_improvement(0.5, 1.0), 50.0);
  EXPECT_EQ(relative_improvement(2.0, 1.0), -100.0);
  EXPECT_EQ(relative_improvement(3e-3, 3e-3), 0.0);
  EXPECT_THROW(relative_improvement(0.0, 1.0), ConfigError);
  EXPECT_THROW(relative_improvement(1.0, -1.0), ConfigError);
}

TEST(CompareSuite, SyntheticErrors) {
  auto out = compare_suite({fake("p", Strategy::soft, 4), fake("p", Strategy::new_hc, 2),
                            fake("p", Strategy::existing_hc, 8)});
  EXPECT_EQ(out[0].improvement_pct, 0.0);
  EXPECT_EQ(out[1].improvement_pct, 50.0);
  EXPECT_EQ(out[2].improvement_pct, -100.0);
}

TEST(CompareSuite, BestSoftPerProblem) {
  auto soft_emb = fake("a", Strategy::soft, 1.0);
  soft_emb.config.embedding = EmbeddingKind::random_cos_sin;
  auto out = compare_suite({fake("a", Strategy::soft, 4), soft_emb, fake("a", Strategy::new_hc, 0.5),
                            fake("b", Strategy::soft, 2), fake("b", Strategy::new_hc, 1)});
  EXPECT_EQ(out[0].improvement_pct, -300.0);
  EXPECT_EQ(out[1].improvement_pct, 0.0);
  EXPECT_EQ(out[2].improvement_pct, 50.0);
  EXPECT_EQ(out[4].improvement_pct, 50.0);

  out = compare_suite({fake("a", Strategy::soft, 4), soft_emb}, ReferenceRule::soft_identity);
  EXPECT_EQ(out[1].improvement_pct, 75.0);
}

TEST(CompareSuite, MissingReferenceThrows) {
  EXPECT_THROW(compare_suite({fake("a", Strategy::new_hc, 1.0)}), ConfigError);
  EXPECT_THROW(compare_suite({fake("a", Strategy::soft, 1.0), fake("b", Strategy::new_hc, 1.0)}), ConfigError);
}

TEST(CompareSuite, TableLayout) {
  // 9 methods x 5 problems, one soft row per problem.
  std::vector<RunMetrics> runs;
  for (const auto& p : builtin_problem_names()) {
    for (int m = 0; m < 9; ++m) runs.push_back(fake(p, m == 0 ? Strategy::soft : Strategy::new_hc, 1.0 + m));
  }
  const auto out = compare_suite(runs);
  EXPECT_EQ(out.size(), 45u);
  for (const auto& r : out) EXPECT_TRUE(std::isfinite(r.improvement_pct));
}

TEST(Run, ZeroBudgetGivesUntrainedError) {
  auto c = small("low_frequency", Strategy::soft);
  c.iterations = 0;
  const auto m = run(c);
  EXPECT_EQ(m.iterations, 0u);
  EXPECT_TRUE(std::isfinite(m.best_loss));
  EXPECT_GT(m.rel_l2, 0.5);
  EXPECT_LT(m.rel_l2, 3.0);
  EXPECT_TRUE(m.history.empty());
}

TEST(Run, DeterministicPerSeed) {
  for (auto s : {Strategy::soft, Strategy::existing_hc, Strategy::new_hc}) {
    const auto c = small("polynom3", s, s == Strategy::new_hc ? EmbeddingKind::hc_cosine : EmbeddingKind::identity);
    const auto a = run(c);
    const auto b = run(c);
    EXPECT_EQ(a.best_params, b.best_params) << to_string(s);
    EXPECT_EQ(a.rel_l2, b.rel_l2);
    EXPECT_EQ(a.best_loss, b.best_loss);
    ASSERT_EQ(a.history.size(), b.history.size());
    for (std::size_t i = 0; i < a.history.size(); ++i) EXPECT_EQ(a.history[i].total, b.history[i].total);
  }
}

TEST(Run, LossDecreasesAndCheckpointIsBest) {
  auto c = small("low_frequency", Strategy::new_hc, EmbeddingKind::hc_cosine);
  c.learning_rate = 3e-3;
  c.iterations = 200;
  const auto m = run(c);
  EXPECT_EQ(m.history.size(), 200u);
  EXPECT_LT(m.best_loss, m.history.front().total);
  double best = m.history.front().total;
  for (const auto& h : m.history) best = std::min(best, h.total);
  EXPECT_EQ(m.best_loss, best);
  EXPECT_EQ(m.history[m.best_loss_iteration].total, best);
  EXPECT_FALSE(m.diverged);
  EXPECT_GT(m.ms_per_iter, 0.0);
}

TEST(Run, HardConstraintBoundaryDiagnosticStaysZero) {
  for (auto s : {Strategy::existing_hc, Strategy::new_hc}) {
    auto c = small("multiscale", s, s == Strategy::new_hc ? EmbeddingKind::hc_cosine : EmbeddingKind::identity);
    c.learning_rate = 1e-2;
    c.iterations = 100;
    const auto m = run(c);
    EXPECT_LT(m.max_bc_loss, 1e-18) << to_string(s);
    for (const auto& h : m.history) EXPECT_LT(h.bc, 1e-18);
  }
}

TEST(Run, DivergenceIsFlagged) {
  auto c = small("low_frequency", Strategy::soft);
  c.learning_rate = 1e300;
  c.iterations = 50;
  const auto m = run(c);
  EXPECT_TRUE(m.diverged);
  EXPECT_FALSE(m.divergence.empty());
  EXPECT_TRUE(m.best_params.all_finite());
  EXPECT_TRUE(std::isfinite(m.rel_l2));
}

TEST(Run, WallClockBudget) {
  auto c = small("polynom4", Strategy::soft);
  c.iterations.reset();
  c.wall_clock_seconds = 0.2;
  const auto m = run(c);
  EXPECT_GT(m.iterations, 0u);
  EXPECT_GE(m.total_seconds, 0.2);
}

TEST(Run, RejectsInvalidConfig) {
  auto c = small("low_frequency", Strategy::new_hc, EmbeddingKind::random_cos_sin);
  EXPECT_THROW(run(c), ConfigError);
  c = small("low_frequency", Strategy::soft);
  c.wall_clock_seconds = 1.0;
  EXPECT_THROW(run(c), ConfigError);
  c = small("nope", Strategy::soft);
  EXPECT_THROW(run(c), ConfigError);
}

TEST(Timing, ProbeIsPositive) {
  const auto c = small("low_frequency", Strategy::soft);
  const double ms = timing_probe(c, 1, 10);
  EXPECT_GT(ms, 0.0);
  EXPECT_TRUE(std::isfinite(ms));
  EXPECT_THROW(timing_probe(c, 1, 5), ConfigError);
  EXPECT_GT(fixed_time_budget(c, 1, 10), 0.0);
}
