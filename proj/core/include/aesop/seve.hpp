#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace aesop::seve {

using Vec = std::vector<double>;

/// L1: sum of absolute differences. L2: squared Euclidean distance.
enum class BiasLoss { kL1, kL2 };

double loss_value(const Vec& a, const Vec& b, BiasLoss loss);

struct MarginalDistribution {
  std::vector<Vec> support;
  std::vector<double> probs;
};

/// Finite joint distribution of (y, y_hat); probs[i][j] = p(y_i, y_hat_j).
struct DiscreteJointDistribution {
  std::vector<Vec> support_y;
  std::vector<Vec> support_yhat;
  std::vector<std::vector<double>> probs;

  /// Throws DomainError unless supports are non-empty, dimensions agree,
  /// probabilities are non-negative and sum to 1 within 1e-12.
  void validate() const;
  MarginalDistribution marginal_y() const;
  MarginalDistribution marginal_yhat() const;
  /// True when p(y, y_hat) = p(y) p(y_hat) within `tol` everywhere.
  bool independent(double tol = 1e-12) const;
  /// p(y) p(y_hat) on the given supports.
  static DiscreteJointDistribution product(const MarginalDistribution& y, const MarginalDistribution& yhat);
};

/// argmin_mu E[L(v, mu)]: the mean for L2, the coordinatewise weighted
/// median for L1 with ties broken at the midpoint of the flat interval.
/// Product of two random marginals: support sizes in [1, max_support], a
/// shared dimension in [1, max_dim], coordinates uniform in [-2, 2] and
/// probabilities from normalized uniform weights.
DiscreteJointDistribution random_independent_joint(std::mt19937_64& rng, int max_support = 6, int max_dim = 3);

Vec bias_point(const MarginalDistribution& dist, BiasLoss loss);
/// Equal-weight samples.
Vec bias_point(const std::vector<Vec>& samples, BiasLoss loss);

struct BiasOperatorResult {
  Vec mu_y;
  Vec mu_yhat;
  /// By enumeration: E_y[L(y, mu_yhat) - L(y, mu_y)].
  double se = 0;
  /// By enumeration: E_{y,yhat}[L(y, yhat) - L(y, mu_yhat)].
  double ve = 0;
  /// L2 closed forms |mu_yhat - mu_y|^2 and E|yhat - mu_yhat|^2 (L2 only).
  double se_closed = 0;
  double ve_closed = 0;
  /// The VE closed form holds when y and y_hat are independent.
  bool closed_form_applies = false;
};

/// Exact SE/VE by enumeration. For L2 with independent y and y_hat, throws
/// DomainError when enumeration and closed forms differ by more than 1e-9.
BiasOperatorResult decompose_se_ve(const DiscreteJointDistribution& dist, BiasLoss loss);

/// E_{y,yhat}[L(y, yhat)].
double expected_loss(const DiscreteJointDistribution& dist, BiasLoss loss);

/// Variance of y about its mean, E|y - mu_y|^2.
double variance(const MarginalDistribution& dist);

/// Scalar posterior p(y|x): Gaussian mixture.
struct ToyInverseProblem {
  double x = 0.5;
  Vec means = {-1.0, 1.0};
  Vec weights = {0.5, 0.5};
  double stddev = 0.0;

  void validate() const;
  double posterior_mean() const;
};

enum class ToyLossMode { kPixel, kAesopAnalytic };

struct ToyRunConfig {
  std::int64_t steps = 2000;
  int batch = 128;
  double lr = 0.02;
  int hidden = 16;
  /// Initial output offset, so that training starts away from the target mean.
  double init_offset = 0.5;
  /// Output std at initialization; the output layer is rescaled to reach it.
  double init_std = 1.0;
  int eval_samples = 4096;
  /// Noise draws per step for the bias point in aesop_analytic mode.
  int bias_samples = 2048;
  std::int64_t record_every = 10;
};

struct ToyTrajectoryPoint {
  std::int64_t step = 0;
  double mean_error = 0;
  double std = 0;
  double loss = 0;
};

struct ToyReport {
  std::vector<ToyTrajectoryPoint> trajectory;
  double initial_mean_error = 0;
  double initial_std = 0;
  double final_mean_error = 0;
  double final_std = 0;
  bool aborted = false;
  std::int64_t abort_step = -1;
};

/// Trains a 2-layer tanh perceptron (inputs x and Gaussian noise z) by SGD.
/// Pixel mode: mean (y_hat - y)^2 with y drawn from the posterior. Analytic
/// mode: (batch mean of y_hat - posterior mean)^2. Statistics are measured
/// on a fixed noise set.
ToyReport run_toy_experiment(const ToyInverseProblem& problem, ToyLossMode mode, const ToyRunConfig& cfg,
                             std::uint64_t seed);

/// step,mean_error,std,loss
void write_toy_csv(const ToyReport& report, const std::filesystem::path& path);

}  // namespace aesop::seve
