#include <cmath>

#include <gtest/gtest.h>

#include "aesop/errors.hpp"
#include "aesop/seve.hpp"

namespace aesop::seve {
namespace {

MarginalDistribution uniform01() { return {{{0.0}, {1.0}}, {0.5, 0.5}}; }
MarginalDistribution point(double v) { return {{{v}}, {1.0}}; }

// Brute-force argmin of E|v - mu| over a fine 1-D grid.
double grid_argmin_l1(const MarginalDistribution& d, double lo, double hi, std::vector<double>* flat) {
  double best = std::numeric_limits<double>::infinity(), arg = lo;
  for (int i = 0; i <= 4000; ++i) {
    const double mu = lo + (hi - lo) * i / 4000.0;
    double e = 0;
    for (std::size_t k = 0; k < d.probs.size(); ++k) e += d.probs[k] * std::abs(d.support[k][0] - mu);
    if (e < best - 1e-12) {
      best = e;
      arg = mu;
      flat->clear();
    }
    if (std::abs(e - best) <= 1e-12) flat->push_back(mu);
  }
  return arg;
}

TEST(BiasPoint, MeanAndMedian) {
  EXPECT_EQ(bias_point(uniform01(), BiasLoss::kL2)[0], 0.5);
  EXPECT_EQ(bias_point(uniform01(), BiasLoss::kL1)[0], 0.5);
  std::vector<double> flat;
  grid_argmin_l1(uniform01(), -1, 2, &flat);
  // The grid step is 7.5e-4; the flat interval is [0, 1].
  EXPECT_NEAR(flat.front(), 0.0, 1e-3);
  EXPECT_NEAR(flat.back(), 1.0, 1e-3);
  EXPECT_EQ(bias_point(std::vector<Vec>{{0.0}, {0.0}, {3.0}}, BiasLoss::kL1)[0], 0.0);
}

TEST(SeVe, DocumentedCases) {
  auto r = decompose_se_ve(DiscreteJointDistribution::product(uniform01(), point(0.5)), BiasLoss::kL2);
  EXPECT_NEAR(r.se, 0.0, 1e-15);
  EXPECT_NEAR(r.ve, 0.0, 1e-15);
  r = decompose_se_ve(DiscreteJointDistribution::product(uniform01(), point(1.0)), BiasLoss::kL2);
  EXPECT_NEAR(r.se, 0.25, 1e-15);
  EXPECT_NEAR(r.ve, 0.0, 1e-15);
  r = decompose_se_ve(DiscreteJointDistribution::product(uniform01(), uniform01()), BiasLoss::kL2);
  EXPECT_NEAR(r.se, 0.0, 1e-15);
  EXPECT_NEAR(r.ve, 0.25, 1e-15);
  EXPECT_TRUE(r.closed_form_applies);
}

TEST(SeVe, ExpectedLossSplitsIntoBiasAndVariance) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 20; ++i) {
    const auto joint = random_independent_joint(rng);
    for (auto loss : {BiasLoss::kL1, BiasLoss::kL2}) {
      const auto r = decompose_se_ve(joint, loss);
      const MarginalDistribution y = joint.marginal_y();
      double base = 0;
      for (std::size_t k = 0; k < y.probs.size(); ++k) base += y.probs[k] * loss_value(y.support[k], r.mu_y, loss);
      EXPECT_NEAR(expected_loss(joint, loss), base + r.se + r.ve, 1e-12);
      EXPECT_GE(r.se, -1e-12);
    }
  }
}

TEST(SeVe, DependentJointSkipsClosedForm) {
  DiscreteJointDistribution d{{{0.0}, {1.0}}, {{0.0}, {1.0}}, {{0.5, 0.0}, {0.0, 0.5}}};
  EXPECT_FALSE(d.independent());
  const auto r = decompose_se_ve(d, BiasLoss::kL2);
  EXPECT_FALSE(r.closed_form_applies);
  // y_hat = y exactly: zero loss, so the variance term is minus the bias-point loss.
  EXPECT_NEAR(r.ve, -0.25, 1e-15);
}

TEST(SeVe, ValidationRejectsBadProbabilities) {
  DiscreteJointDistribution d{{{0.0}}, {{0.0}}, {{0.7}}};
  EXPECT_THROW(d.validate(), DomainError);
  DiscreteJointDistribution dims{{{0.0}}, {{0.0, 1.0}}, {{1.0}}};
  EXPECT_THROW(dims.validate(), Error);
}

TEST(Toy, DegenerateUnimodalPosteriorBothModesConverge) {
  const ToyInverseProblem problem{.x = 0.5, .means = {0.3}, .weights = {1.0}, .stddev = 0.0};
  ToyRunConfig cfg;
  cfg.steps = 2000;
  for (auto mode : {ToyLossMode::kPixel, ToyLossMode::kAesopAnalytic}) {
    const ToyReport r = run_toy_experiment(problem, mode, cfg, 1);
    EXPECT_FALSE(r.aborted);
    EXPECT_LT(r.final_mean_error, 0.05);
  }
}

TEST(Toy, DivergenceAbortsWithStep) {
  ToyRunConfig cfg;
  cfg.steps = 200;
  cfg.lr = 1e6;
  const ToyReport r = run_toy_experiment({}, ToyLossMode::kPixel, cfg, 1);
  EXPECT_TRUE(r.aborted);
  EXPECT_GE(r.abort_step, 0);
}

TEST(Toy, SeededRunsRepeat) {
  ToyRunConfig cfg;
  cfg.steps = 100;
  const ToyReport a = run_toy_experiment({}, ToyLossMode::kAesopAnalytic, cfg, 9);
  const ToyReport b = run_toy_experiment({}, ToyLossMode::kAesopAnalytic, cfg, 9);
  EXPECT_EQ(a.final_std, b.final_std);
  EXPECT_EQ(a.final_mean_error, b.final_mean_error);
}

}  // namespace
}  // namespace aesop::seve
