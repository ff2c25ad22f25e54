#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "grassroots/montecarlo.hpp"

using namespace grassroots;

namespace {

SweepSpec small_spec(ScenarioKind kind) {
  SweepSpec s;
  s.scenario.kind = kind;
  s.scenario.n = 64;
  s.scenario.max_iters = 400;
  s.phi_list = {60.0, 75.0, 90.0};
  s.degree_list = {2, 3, 4, 6};
  s.runs_per_cell = 10;
  s.master_seed = 17;
  return s;
}

RunRecord record(std::size_t degree, std::optional<double> mbar) {
  RunRecord r{ScenarioKind::nearby, 60.0, degree, 0, std::nullopt};
  if (mbar) {
    RunOutcome o;
    o.mbar_final = *mbar;
    o.t_final = 100;
    o.flags = classify_outcome(*mbar);
    r.outcome = o;
  }
  return r;
}

}  // namespace

TEST(RunSeed, DependsOnEveryCoordinate) {
  const auto base = run_seed(1, ScenarioKind::hubs, 60.0, 4, 0);
  EXPECT_EQ(base, run_seed(1, ScenarioKind::hubs, 60.0, 4, 0));
  std::set<std::uint64_t> seen{base,
                               run_seed(2, ScenarioKind::hubs, 60.0, 4, 0),
                               run_seed(1, ScenarioKind::nearby, 60.0, 4, 0),
                               run_seed(1, ScenarioKind::hubs, 61.0, 4, 0),
                               run_seed(1, ScenarioKind::hubs, 60.0, 5, 0),
                               run_seed(1, ScenarioKind::hubs, 60.0, 4, 1)};
  EXPECT_EQ(seen.size(), 6u);
}

TEST(ExecuteRun, Reproducible) {
  auto spec = small_spec(ScenarioKind::nearby);
  spec.scenario.n = 256;
  spec.scenario.max_iters = 10000;
  const auto a = execute_run(spec, 90.0, 8, 3);
  const auto b = execute_run(spec, 90.0, 8, 3);
  ASSERT_TRUE(a.outcome && b.outcome);
  EXPECT_EQ(a.outcome->mbar_final, b.outcome->mbar_final);
  EXPECT_EQ(a.outcome->t_final, b.outcome->t_final);
}

TEST(SimulateRun, LowDegreeTargetsRarelyNeedRegeneration) {
  ScenarioConfig cfg;
  cfg.kind = ScenarioKind::random;
  cfg.innovator_degree = 2;
  cfg.max_iters = 1;
  int first_try = 0;
  for (std::uint64_t s = 0; s < 100; ++s) first_try += simulate_run(cfg, s, 1000).networks_generated == 1;
  EXPECT_GE(first_try, 99);
}

TEST(SimulateRun, InnovatorHasRequestedDegree) {
  ScenarioConfig cfg;
  cfg.kind = ScenarioKind::hubs;
  cfg.phi_deg = 80.0;
  cfg.max_iters = 50;
  for (std::size_t d : {2u, 7u, 30u}) {
    cfg.innovator_degree = d;
    const auto r = simulate_run(cfg, 1234 + d, 1000);
    ASSERT_FALSE(r.regen_failed);
    EXPECT_EQ(r.net.degree(r.innovator), d);
    EXPECT_EQ(r.beta.size(), 256u);
  }
}

TEST(SimulateRun, RegenerationFailureIsReported) {
  ScenarioConfig cfg;
  cfg.n = 16;
  cfg.innovator_degree = 15;
  const auto r = simulate_run(cfg, 5, 7);
  EXPECT_TRUE(r.regen_failed);
  EXPECT_EQ(r.networks_generated, 7u);
}

TEST(ExecuteSweep, UnbiasedCategoricalRunsGoExtinct) {
  SweepSpec s;
  s.scenario.kind = ScenarioKind::unbiased;
  s.phi_list = {75.0};
  s.degree_list = {2, 8, 24};
  s.runs_per_cell = 10;
  s.master_seed = 3;
  for (const auto& c : execute_sweep(s).cells) {
    EXPECT_EQ(c.runs, 10u);
    EXPECT_EQ(c.n_survival, 0u);
  }
}

TEST(ExecuteSweep, GridShapeAndNesting) {
  const auto spec = small_spec(ScenarioKind::nearby);
  const auto res = execute_sweep(spec, {.workers = 1, .on_record = {}});
  ASSERT_EQ(res.runs.size(), 120u);
  ASSERT_EQ(res.cells.size(), 12u);
  EXPECT_EQ(res.cells[0].phi_deg, 60.0);
  EXPECT_EQ(res.cells[0].innovator_degree, 2u);
  EXPECT_EQ(res.cells[5].phi_deg, 75.0);
  EXPECT_EQ(res.cells[5].innovator_degree, 3u);
  for (const auto& c : res.cells) {
    EXPECT_EQ(c.runs + c.n_regen_failures, 10u);
    EXPECT_LE(c.n_completion, c.n_dominance);
    EXPECT_LE(c.n_dominance, c.n_survival);
    EXPECT_LE(c.n_survival, c.runs);
  }
  for (std::size_t i = 0; i < res.runs.size(); ++i) EXPECT_EQ(res.runs[i].run_index, i % 10);
}

TEST(ExecuteSweep, WorkerCountDoesNotChangeResults) {
  const auto spec = small_spec(ScenarioKind::random);
  std::vector<std::size_t> order1, order4;
  const auto one = execute_sweep(spec, {.workers = 1, .on_record = [&](const RunRecord& r) { order1.push_back(r.run_index + 100 * r.degree); }});
  const auto four = execute_sweep(spec, {.workers = 4, .on_record = [&](const RunRecord& r) { order4.push_back(r.run_index + 100 * r.degree); }});
  ASSERT_EQ(one.runs.size(), four.runs.size());
  for (std::size_t i = 0; i < one.runs.size(); ++i) {
    ASSERT_EQ(one.runs[i].outcome->mbar_final, four.runs[i].outcome->mbar_final);
    ASSERT_EQ(one.runs[i].outcome->t_final, four.runs[i].outcome->t_final);
  }
  for (std::size_t i = 0; i < one.cells.size(); ++i) {
    EXPECT_EQ(one.cells[i].mean_mbar_final, four.cells[i].mean_mbar_final);
    EXPECT_EQ(one.cells[i].n_survival, four.cells[i].n_survival);
  }
  EXPECT_EQ(order1, order4);
  EXPECT_EQ(order1.size(), 120u);
}

TEST(ExecuteSweep, RegenerationFailuresSurfaceInCells) {
  SweepSpec s;
  s.scenario.n = 16;
  s.scenario.max_iters = 20;
  s.phi_list = {60.0};
  s.degree_list = {2, 15};
  s.runs_per_cell = 3;
  s.regen_limit = 5;
  const auto res = execute_sweep(s);
  EXPECT_EQ(res.cells[1].runs, 0u);
  EXPECT_EQ(res.cells[1].n_regen_failures, 3u);
  EXPECT_TRUE(std::isnan(res.cells[1].mean_mbar_final));
  EXPECT_FALSE(res.runs.back().outcome.has_value());
}

TEST(ExecuteSweep, RejectsInvalidSpecs) {
  auto s = small_spec(ScenarioKind::neutral);
  EXPECT_THROW(execute_sweep(s), ConfigError);  // neutral with phi != 45
  s = small_spec(ScenarioKind::hubs);
  s.runs_per_cell = 0;
  EXPECT_THROW(execute_sweep(s), ConfigError);
}

TEST(AggregateCell, MeanAndSampleSd) {
  const std::vector<RunRecord> rs{record(4, 0.5), record(4, 1.0), record(4, 0.0), record(4, std::nullopt)};
  const auto c = aggregate_cell(60.0, 4, rs);
  EXPECT_EQ(c.runs, 3u);
  EXPECT_EQ(c.n_regen_failures, 1u);
  EXPECT_EQ(c.n_survival, 2u);
  EXPECT_EQ(c.n_dominance, 2u);
  EXPECT_EQ(c.n_completion, 1u);
  EXPECT_DOUBLE_EQ(c.mean_mbar_final, 0.5);
  EXPECT_DOUBLE_EQ(c.sd_mbar_final, 0.5);
  EXPECT_DOUBLE_EQ(c.mean_t_final, 100.0);
}

TEST(OrderedAppender, EmitsInIndexOrder) {
  std::vector<std::optional<RunRecord>> slots(5);
  std::vector<std::size_t> seen;
  OrderedAppender app(slots, [&](const RunRecord& r) { seen.push_back(r.run_index); });
  for (std::size_t i : {3u, 1u, 4u, 0u, 2u}) {
    slots[i] = RunRecord{ScenarioKind::random, 60.0, 2, i, std::nullopt};
    app.publish(i);
    if (i == 3 || i == 1 || i == 4) {
      EXPECT_TRUE(seen.empty());
    }
  }
  EXPECT_EQ(seen, (std::vector<std::size_t>{0, 1, 2, 3, 4}));
}

TEST(EmpiricalDegreePmf, MatchesPreferentialAttachmentShape) {
  const auto pmf = empirical_degree_pmf(256, 2, 200, 1);
  EXPECT_NEAR(std::accumulate(pmf.begin(), pmf.end(), 0.0), 1.0, 1e-12);
  EXPECT_EQ(pmf[0], 0.0);
  EXPECT_EQ(pmf[1], 0.0);
  // asymptotic BA law 12 / (k (k+1) (k+2)) gives 0.5, 0.2, 0.1
  EXPECT_NEAR(pmf[2], 0.5, 0.05);
  EXPECT_NEAR(pmf[3], 0.2, 0.03);
  EXPECT_NEAR(pmf[4], 0.1, 0.02);
}

TEST(ConditionalDegree, BayesByHand) {
  // P(c|2) = 1/2, P(c|4) = 1; prior 0.6 / 0.2  ->  posterior 0.3/0.5, 0.2/0.5
  const std::vector<RunRecord> rs{record(2, 1.0), record(2, 0.0), record(4, 1.0), record(4, 1.0)};
  const std::vector<double> pmf{0.0, 0.0, 0.6, 0.0, 0.2, 0.2};
  const auto t = conditional_degree_distribution(rs, pmf);
  ASSERT_EQ(t.size(), 2u);
  EXPECT_DOUBLE_EQ(t[0].p_cascade_given_degree, 0.5);
  EXPECT_DOUBLE_EQ(t[1].p_cascade_given_degree, 1.0);
  EXPECT_DOUBLE_EQ(*t[0].p_degree_given_cascade, 0.6);
  EXPECT_DOUBLE_EQ(*t[1].p_degree_given_cascade, 0.4);
}

TEST(ConditionalDegree, UniformLikelihoodGivesThePrior) {
  const std::vector<RunRecord> rs{record(2, 1.0), record(3, 1.0), record(5, 1.0)};
  const std::vector<double> pmf{0.0, 0.0, 0.5, 0.3, 0.1, 0.1};
  const auto t = conditional_degree_distribution(rs, pmf);
  EXPECT_DOUBLE_EQ(*t[0].p_degree_given_cascade, 0.5 / 0.9);
  EXPECT_DOUBLE_EQ(*t[1].p_degree_given_cascade, 0.3 / 0.9);
  EXPECT_DOUBLE_EQ(*t[2].p_degree_given_cascade, 0.1 / 0.9);
}

TEST(ConditionalDegree, NoCascadesAndNoRecords) {
  const std::vector<RunRecord> rs{record(2, 0.0), record(3, 0.3)};
  const std::vector<double> pmf{0.0, 0.0, 0.5, 0.5};
  const auto t = conditional_degree_distribution(rs, pmf);
  for (const auto& row : t) EXPECT_FALSE(row.p_degree_given_cascade.has_value());
  // survival is a weaker class and does occur at degree 3
  const auto s = conditional_degree_distribution(rs, pmf, CascadeClass::survival);
  EXPECT_DOUBLE_EQ(*s[1].p_degree_given_cascade, 1.0);
  EXPECT_THROW(conditional_degree_distribution(std::vector<RunRecord>{}, pmf), DomainError);
}
