#include "aesop/seve.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <fmt/format.h>

#include "aesop/csv.hpp"
#include "aesop/errors.hpp"

namespace aesop::seve {

namespace {

constexpr double kNormTolerance = 1e-12;
constexpr double kClosedFormTolerance = 1e-9;

double l2sq(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

// Weighted median of one coordinate, midpoint of the flat interval on ties.
double weighted_median(std::vector<std::pair<double, double>> vp) {
  std::sort(vp.begin(), vp.end());
  double cum = 0.0;
  for (std::size_t i = 0; i < vp.size(); ++i) {
    cum += vp[i].second;
    if (std::abs(cum - 0.5) <= kNormTolerance) {
      std::size_t j = i + 1;
      while (j < vp.size() && vp[j].second == 0.0) ++j;
      return j < vp.size() ? 0.5 * (vp[i].first + vp[j].first) : vp[i].first;
    }
    if (cum > 0.5) return vp[i].first;
  }
  return vp.back().first;
}

void check_marginal(const MarginalDistribution& d) {
  if (d.support.empty() || d.support.size() != d.probs.size()) throw DomainError("distribution support is empty");
  double total = 0.0;
  for (double p : d.probs) {
    if (p < 0.0) throw DomainError("negative probability");
    total += p;
  }
  if (std::abs(total - 1.0) > kNormTolerance) {
    throw DomainError(fmt::format("probabilities sum to {}, not 1", total));
  }
}

}  // namespace

double loss_value(const Vec& a, const Vec& b, BiasLoss loss) {
  if (a.size() != b.size()) throw DimensionError("loss operands differ in dimension");
  if (loss == BiasLoss::kL2) return l2sq(a, b);
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s;
}

void DiscreteJointDistribution::validate() const {
  if (support_y.empty() || support_yhat.empty()) throw DomainError("joint distribution has an empty support");
  const std::size_t dim = support_y.front().size();
  for (const auto& v : support_y)
    if (v.size() != dim) throw DimensionError("support_y vectors differ in dimension");
  for (const auto& v : support_yhat)
    if (v.size() != dim) throw DimensionError("support_yhat dimension differs from support_y");
  if (probs.size() != support_y.size()) throw DimensionError("probability rows must match support_y");
  double total = 0.0;
  for (const auto& row : probs) {
    if (row.size() != support_yhat.size()) throw DimensionError("probability columns must match support_yhat");
    for (double p : row) {
      if (p < 0.0) throw DomainError("negative probability");
      total += p;
    }
  }
  if (std::abs(total - 1.0) > kNormTolerance) {
    throw DomainError(fmt::format("joint probabilities sum to {}, not 1", total));
  }
}

MarginalDistribution DiscreteJointDistribution::marginal_y() const {
  MarginalDistribution m{support_y, Vec(support_y.size(), 0.0)};
  for (std::size_t i = 0; i < probs.size(); ++i)
    for (double p : probs[i]) m.probs[i] += p;
  return m;
}

MarginalDistribution DiscreteJointDistribution::marginal_yhat() const {
  MarginalDistribution m{support_yhat, Vec(support_yhat.size(), 0.0)};
  for (const auto& row : probs)
    for (std::size_t j = 0; j < row.size(); ++j) m.probs[j] += row[j];
  return m;
}

bool DiscreteJointDistribution::independent(double tol) const {
  const auto my = marginal_y();
  const auto mh = marginal_yhat();
  for (std::size_t i = 0; i < probs.size(); ++i)
    for (std::size_t j = 0; j < probs[i].size(); ++j) {
      if (std::abs(probs[i][j] - my.probs[i] * mh.probs[j]) > tol) return false;
    }
  return true;
}

DiscreteJointDistribution DiscreteJointDistribution::product(const MarginalDistribution& y,
                                                             const MarginalDistribution& yhat) {
  DiscreteJointDistribution d;
  d.support_y = y.support;
  d.support_yhat = yhat.support;
  d.probs.assign(y.support.size(), Vec(yhat.support.size(), 0.0));
  for (std::size_t i = 0; i < y.probs.size(); ++i)
    for (std::size_t j = 0; j < yhat.probs.size(); ++j) d.probs[i][j] = y.probs[i] * yhat.probs[j];
  return d;
}

Vec bias_point(const MarginalDistribution& dist, BiasLoss loss) {
  check_marginal(dist);
  const std::size_t dim = dist.support.front().size();
  Vec mu(dim, 0.0);
  if (loss == BiasLoss::kL2) {
    for (std::size_t i = 0; i < dist.support.size(); ++i)
      for (std::size_t k = 0; k < dim; ++k) mu[k] += dist.probs[i] * dist.support[i][k];
    return mu;
  }
  for (std::size_t k = 0; k < dim; ++k) {
    std::vector<std::pair<double, double>> vp;
    for (std::size_t i = 0; i < dist.support.size(); ++i) vp.emplace_back(dist.support[i][k], dist.probs[i]);
    mu[k] = weighted_median(std::move(vp));
  }
  return mu;
}

Vec bias_point(const std::vector<Vec>& samples, BiasLoss loss) {
  if (samples.empty()) throw DomainError("bias point of an empty sample");
  return bias_point(MarginalDistribution{samples, Vec(samples.size(), 1.0 / samples.size())}, loss);
}

double variance(const MarginalDistribution& dist) {
  const Vec mu = bias_point(dist, BiasLoss::kL2);
  double v = 0.0;
  for (std::size_t i = 0; i < dist.support.size(); ++i) v += dist.probs[i] * l2sq(dist.support[i], mu);
  return v;
}

double expected_loss(const DiscreteJointDistribution& dist, BiasLoss loss) {
  dist.validate();
  double e = 0.0;
  for (std::size_t i = 0; i < dist.support_y.size(); ++i)
    for (std::size_t j = 0; j < dist.support_yhat.size(); ++j) {
      e += dist.probs[i][j] * loss_value(dist.support_y[i], dist.support_yhat[j], loss);
    }
  return e;
}

DiscreteJointDistribution random_independent_joint(std::mt19937_64& rng, int max_support, int max_dim) {
  if (max_support < 1 || max_dim < 1) throw DomainError("random joint needs positive support and dimension");
  std::uniform_int_distribution<int> dim_dist(1, max_dim);
  std::uniform_int_distribution<int> size_dist(1, max_support);
  std::uniform_real_distribution<double> coord(-2.0, 2.0);
  std::uniform_real_distribution<double> weight(0.05, 1.0);
  const int dim = dim_dist(rng);
  const auto marginal = [&]() {
    MarginalDistribution m;
    const int n = size_dist(rng);
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      Vec v(static_cast<std::size_t>(dim));
      for (double& c : v) c = coord(rng);
      m.support.push_back(std::move(v));
      m.probs.push_back(weight(rng));
      total += m.probs.back();
    }
    for (double& p : m.probs) p /= total;
    return m;
  };
  const MarginalDistribution y = marginal();
  const MarginalDistribution yhat = marginal();
  return DiscreteJointDistribution::product(y, yhat);
}

BiasOperatorResult decompose_se_ve(const DiscreteJointDistribution& dist, BiasLoss loss) {
  dist.validate();
  const auto my = dist.marginal_y();
  const auto mh = dist.marginal_yhat();
  BiasOperatorResult r;
  r.mu_y = bias_point(my, loss);
  r.mu_yhat = bias_point(mh, loss);
  for (std::size_t i = 0; i < my.support.size(); ++i) {
    r.se += my.probs[i] * (loss_value(my.support[i], r.mu_yhat, loss) - loss_value(my.support[i], r.mu_y, loss));
  }
  for (std::size_t i = 0; i < dist.support_y.size(); ++i)
    for (std::size_t j = 0; j < dist.support_yhat.size(); ++j) {
      r.ve += dist.probs[i][j] * (loss_value(dist.support_y[i], dist.support_yhat[j], loss) -
                                  loss_value(dist.support_y[i], r.mu_yhat, loss));
    }
  if (loss == BiasLoss::kL2) {
    r.se_closed = l2sq(r.mu_yhat, r.mu_y);
    r.ve_closed = variance(mh);
    r.closed_form_applies = dist.independent();
    if (r.closed_form_applies &&
        (std::abs(r.se - r.se_closed) > kClosedFormTolerance || std::abs(r.ve - r.ve_closed) > kClosedFormTolerance)) {
      throw DomainError(fmt::format("SE/VE enumeration ({}, {}) disagrees with closed forms ({}, {})", r.se, r.ve,
                                    r.se_closed, r.ve_closed));
    }
  }
  return r;
}

void ToyInverseProblem::validate() const {
  if (means.empty() || means.size() != weights.size()) throw DomainError("posterior mixture is empty or ragged");
  double total = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw DomainError("negative mixture weight");
    total += w;
  }
  if (std::abs(total - 1.0) > kNormTolerance) throw DomainError("mixture weights must sum to 1");
  if (stddev < 0.0) throw DomainError("posterior stddev must be non-negative");
}

double ToyInverseProblem::posterior_mean() const {
  double m = 0.0;
  for (std::size_t k = 0; k < means.size(); ++k) m += weights[k] * means[k];
  return m;
}

namespace {

struct Mlp {
  int hidden;
  Vec w1x, w1z, b1, w2;
  double b2 = 0.0;

  double forward(double x, double z, Vec* h) const {
    double out = b2;
    for (int k = 0; k < hidden; ++k) {
      const double a = std::tanh(w1x[k] * x + w1z[k] * z + b1[k]);
      if (h) (*h)[k] = a;
      out += w2[k] * a;
    }
    return out;
  }
};

struct Stats {
  double mean;
  double std;
};

Stats evaluate(const Mlp& net, double x, const Vec& noise) {
  double s = 0.0, s2 = 0.0;
  for (double z : noise) {
    const double y = net.forward(x, z, nullptr);
    s += y;
    s2 += y * y;
  }
  const double n = static_cast<double>(noise.size());
  const double m = s / n;
  return {m, std::sqrt(std::max(s2 / n - m * m, 0.0))};
}

}  // namespace

ToyReport run_toy_experiment(const ToyInverseProblem& problem, ToyLossMode mode, const ToyRunConfig& cfg,
                             std::uint64_t seed) {
  problem.validate();
  if (cfg.batch < 2 || cfg.bias_samples < 1 || cfg.hidden < 1 || cfg.steps < 0) {
    throw DomainError("invalid toy run configuration");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::discrete_distribution<int> component(problem.weights.begin(), problem.weights.end());

  Mlp net{cfg.hidden, Vec(cfg.hidden), Vec(cfg.hidden), Vec(cfg.hidden), Vec(cfg.hidden)};
  for (int k = 0; k < cfg.hidden; ++k) {
    net.w1x[k] = normal(rng);
    net.w1z[k] = normal(rng);
    net.b1[k] = 0.1 * normal(rng);
    // Output weights share the sign of the noise weights: the initial
    // generator is monotone in z, so its spread does not cancel out.
    net.w2[k] = std::copysign(std::abs(normal(rng)), net.w1z[k]) / std::sqrt(static_cast<double>(cfg.hidden));
  }
  Vec eval_noise(static_cast<std::size_t>(cfg.eval_samples));
  for (double& z : eval_noise) z = normal(rng);
  const double mu = problem.posterior_mean();
  const double std0 = evaluate(net, problem.x, eval_noise).std;
  if (std0 > 0.0) {
    for (double& w : net.w2) w *= cfg.init_std / std0;
  }
  net.b2 += mu + cfg.init_offset - evaluate(net, problem.x, eval_noise).mean;

  ToyReport report;
  const Stats s0 = evaluate(net, problem.x, eval_noise);
  report.initial_mean_error = std::abs(s0.mean - mu);
  report.initial_std = s0.std;

  Vec h(cfg.hidden), yhat(cfg.batch), z(cfg.batch), target(cfg.batch);
  std::vector<Vec> hs(cfg.batch, Vec(cfg.hidden));
  for (std::int64_t step = 0; step <= cfg.steps; ++step) {
    for (int b = 0; b < cfg.batch; ++b) {
      z[b] = normal(rng);
      const int c = component(rng);
      target[b] = problem.means[c] + problem.stddev * normal(rng);
      yhat[b] = net.forward(problem.x, z[b], &hs[b]);
    }
    const double batch_mean = std::accumulate(yhat.begin(), yhat.end(), 0.0) / cfg.batch;
    double loss = 0.0;
    Vec dy(cfg.batch);
    if (mode == ToyLossMode::kPixel) {
      for (int b = 0; b < cfg.batch; ++b) {
        loss += (yhat[b] - target[b]) * (yhat[b] - target[b]) / cfg.batch;
        dy[b] = 2.0 * (yhat[b] - target[b]) / cfg.batch;
      }
    } else {
      // Bias point of the output distribution from an independent noise batch
      // held constant: the gradient is then unbiased for (E[yhat] - mu)^2 and
      // carries no variance term.
      double bias = 0.0;
      for (int b = 0; b < cfg.bias_samples; ++b) bias += net.forward(problem.x, normal(rng), &h);
      bias /= cfg.bias_samples;
      loss = (batch_mean - mu) * (batch_mean - mu);
      std::fill(dy.begin(), dy.end(), 2.0 * (bias - mu) / cfg.batch);
    }
    if (!std::isfinite(loss)) {
      report.aborted = true;
      report.abort_step = step;
      return report;
    }
    if (cfg.record_every > 0 && (step % cfg.record_every == 0 || step == cfg.steps)) {
      const Stats st = evaluate(net, problem.x, eval_noise);
      report.trajectory.push_back({step, std::abs(st.mean - mu), st.std, loss});
    }
    if (step == cfg.steps) break;

    Vec gw1x(cfg.hidden, 0.0), gw1z(cfg.hidden, 0.0), gb1(cfg.hidden, 0.0), gw2(cfg.hidden, 0.0);
    double gb2 = 0.0;
    for (int b = 0; b < cfg.batch; ++b) {
      gb2 += dy[b];
      for (int k = 0; k < cfg.hidden; ++k) {
        gw2[k] += dy[b] * hs[b][k];
        const double da = dy[b] * net.w2[k] * (1.0 - hs[b][k] * hs[b][k]);
        gw1x[k] += da * problem.x;
        gw1z[k] += da * z[b];
        gb1[k] += da;
      }
    }
    net.b2 -= cfg.lr * gb2;
    for (int k = 0; k < cfg.hidden; ++k) {
      net.w2[k] -= cfg.lr * gw2[k];
      net.w1x[k] -= cfg.lr * gw1x[k];
      net.w1z[k] -= cfg.lr * gw1z[k];
      net.b1[k] -= cfg.lr * gb1[k];
    }
  }
  const Stats sf = evaluate(net, problem.x, eval_noise);
  report.final_mean_error = std::abs(sf.mean - mu);
  report.final_std = sf.std;
  return report;
}

void write_toy_csv(const ToyReport& report, const std::filesystem::path& path) {
  CsvWriter out(path, {"step", "mean_error", "std", "loss"});
  for (const auto& p : report.trajectory) {
    out.row({std::to_string(p.step), format_number(p.mean_error), format_number(p.std), format_number(p.loss)});
  }
}

}  // namespace aesop::seve
