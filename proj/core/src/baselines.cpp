#include "cpd/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace cpd {

namespace {

bool is_linear_family(LearnerFamily f) {
  return f == LearnerFamily::LeastSquares || f == LearnerFamily::Ridge;
}

bool is_logistic_family(LearnerFamily f) {
  return f == LearnerFamily::Logistic || f == LearnerFamily::L1Logistic;
}

double ridge_of(const LearnerSpec& spec) {
  return spec.family == LearnerFamily::Ridge ? spec.get("lambda", 1.0) : 0.0;
}

void check_weighted_family(const LearnerSpec& spec) {
  if (!is_linear_family(spec.family) && !is_logistic_family(spec.family))
    throw ValidationError(
        "weighted fitting is supported for least-squares and logistic families only");
}

double clipped_mean(const TimeSeriesDataset& data) {
  return std::clamp(data.y.mean(), -data.bound, data.bound);
}

}  // namespace

std::vector<double> default_cgf_lambda_grid(int count) {
  // log-spaced in forgetting strength: 1-lambda geometric from 1e-1 to 1e-4
  std::vector<double> grid(count);
  for (int i = 0; i < count; ++i) {
    const double f = count == 1 ? 0.0 : double(i) / (count - 1);
    grid[i] = 1.0 - 0.1 * std::pow(1e-3, f);
  }
  return grid;
}

std::vector<int> default_caf_window_grid(int m, int count) {
  const double lo = std::min(10, m);
  std::vector<int> grid;
  for (int i = 0; i < count; ++i) {
    const double f = count == 1 ? 1.0 : double(i) / (count - 1);
    grid.push_back(static_cast<int>(std::lround(lo * std::pow(m / lo, f))));
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

Eigen::VectorXd cgf_timeline(const TimeSeriesDataset& data, const LearnerSpec& spec,
                             double lambda, int stride) {
  data.validate();
  check_weighted_family(spec);
  if (lambda <= 0.0 || lambda >= 1.0)
    throw ValidationError("CGF lambda must be in (0,1)");
  if (stride < 1) throw ValidationError("stride must be >= 1");

  const int m = data.size();
  const int p = data.view_dim(spec.view);
  Eigen::VectorXd errors(m);
  const double mean = clipped_mean(data);
  errors(0) = (mean - data.y(0)) * (mean - data.y(0));

  if (is_linear_family(spec.family)) {
    IncrementalLeastSquares acc(p, ridge_of(spec), spec.view, data.bound);
    Hypothesis h = Hypothesis::constant(0.0, data.bound, spec.view);
    for (int t = 1; t < m; ++t) {
      acc.scale(lambda);
      acc.add_row(data.x.row(t - 1).head(p).transpose(), data.y(t - 1));
      if ((t - 1) % stride == 0) h = acc.solve();
      const double r = h.predict(data.x.row(t).transpose(), data.old_features) - data.y(t);
      errors(t) = r * r;
    }
    return errors;
  }

  // logistic families: weighted refit per evaluated point
  SolverConfig cfg{spec.get("tol", 1e-8), static_cast<int>(spec.get("max_iter", 500))};
  Hypothesis h = Hypothesis::constant(0.0, data.bound, spec.view);
  for (int t = 1; t < m; ++t) {
    if ((t - 1) % stride == 0) {
      Eigen::VectorXd w(t);
      for (int i = 0; i < t; ++i) w(i) = std::pow(lambda, t - 1 - i);
      const Eigen::MatrixXd design = data.x.block(0, 0, t, p);
      const Eigen::VectorXd targets = data.y.head(t);
      h = spec.family == LearnerFamily::Logistic
              ? weighted_logistic_fit(design, targets, w, spec.view, data.bound, cfg)
                    .hypothesis
              : l1_logistic_fit(design, targets, spec.get("l1_lambda", 1e-3),
                                spec.view, data.bound, cfg)
                    .hypothesis;
    }
    const double r = h.predict(data.x.row(t).transpose(), data.old_features) - data.y(t);
    errors(t) = r * r;
  }
  return errors;
}

Eigen::VectorXd caf_timeline(const TimeSeriesDataset& data, const LearnerSpec& spec,
                             int window) {
  data.validate();
  check_weighted_family(spec);
  if (window < 1) throw ValidationError("CAF window must be >= 1");
  const int m = data.size();
  const int p = data.view_dim(spec.view);
  Eigen::VectorXd errors(m);
  const double mean = clipped_mean(data);
  errors(0) = (mean - data.y(0)) * (mean - data.y(0));

  if (is_linear_family(spec.family)) {
    IncrementalLeastSquares acc(p, ridge_of(spec), spec.view, data.bound);
    for (int t = 1; t < m; ++t) {
      acc.add_row(data.x.row(t - 1).head(p).transpose(), data.y(t - 1));
      if (t - 1 - window >= 0)
        acc.remove_row(data.x.row(t - 1 - window).head(p).transpose(),
                       data.y(t - 1 - window));
      const Hypothesis h = acc.solve();
      const double r = h.predict(data.x.row(t).transpose(), data.old_features) - data.y(t);
      errors(t) = r * r;
    }
    return errors;
  }

  SolverConfig cfg{spec.get("tol", 1e-8), static_cast<int>(spec.get("max_iter", 500))};
  for (int t = 1; t < m; ++t) {
    const int begin = std::max(0, t - window);
    const Eigen::MatrixXd design = data.x.block(begin, 0, t - begin, p);
    const Eigen::VectorXd targets = data.y.segment(begin, t - begin);
    const Hypothesis h =
        spec.family == LearnerFamily::Logistic
            ? logistic_fit(design, targets, spec.view, data.bound, cfg).hypothesis
            : l1_logistic_fit(design, targets, spec.get("l1_lambda", 1e-3),
                              spec.view, data.bound, cfg)
                  .hypothesis;
    const double r = h.predict(data.x.row(t).transpose(), data.old_features) - data.y(t);
    errors(t) = r * r;
  }
  return errors;
}

SweepResult sweep_best_cgf(const TimeSeriesDataset& data, const LearnerSpec& spec,
                           const std::vector<double>& lambda_grid, int stride) {
  if (lambda_grid.empty()) throw ValidationError("empty CGF lambda grid");
  std::vector<double> grid = lambda_grid;
  std::sort(grid.begin(), grid.end());
  SweepResult best;
  best.mean_error = std::numeric_limits<double>::infinity();
  for (double lambda : grid) {
    Eigen::VectorXd tl = cgf_timeline(data, spec, lambda, stride);
    const double err = tl.mean();
    if (err < best.mean_error) {
      best = SweepResult{lambda, std::move(tl), err};
    }
  }
  return best;
}

SweepResult sweep_best_caf(const TimeSeriesDataset& data, const LearnerSpec& spec,
                           const std::vector<int>& window_grid) {
  if (window_grid.empty()) throw ValidationError("empty CAF window grid");
  std::vector<int> grid = window_grid;
  std::sort(grid.begin(), grid.end());
  SweepResult best;
  best.mean_error = std::numeric_limits<double>::infinity();
  for (int window : grid) {
    Eigen::VectorXd tl = caf_timeline(data, spec, window);
    const double err = tl.mean();
    if (err < best.mean_error) {
      best = SweepResult{double(window), std::move(tl), err};
    }
  }
  return best;
}

std::optional<int> mcsprt_detect(const Eigen::MatrixXd& features,
                                 const McsprtConfig& config) {
  const int m = static_cast<int>(features.rows());
  const int n = static_cast<int>(features.cols());
  if (config.burn_in < 2) throw ValidationError("MCSPRT burn-in must be >= 2");
  if (config.burn_in >= m)
    throw ValidationError("MCSPRT burn-in must be smaller than the series length");

  const Eigen::VectorXd mu =
      features.topRows(config.burn_in).colwise().mean().transpose();
  Eigen::VectorXd sd(n);
  for (int j = 0; j < n; ++j) {
    const auto col = features.col(j).head(config.burn_in);
    const double var =
        (col.array() - mu(j)).square().sum() / (config.burn_in - 1);
    sd(j) = std::sqrt(std::max(var, 1e-24));
  }

  Eigen::VectorXd s_up = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd s_dn = Eigen::VectorXd::Zero(n);
  for (int t = config.burn_in; t < m; ++t) {
    for (int j = 0; j < n; ++j) {
      const double z = (features(t, j) - mu(j)) / sd(j);
      s_up(j) = std::max(0.0, s_up(j) + z - config.drift);
      s_dn(j) = std::max(0.0, s_dn(j) - z - config.drift);
      if (s_up(j) > config.threshold || s_dn(j) > config.threshold)
        return t + 1;  // 1-based
    }
  }
  return std::nullopt;
}

Eigen::VectorXd random_split_timeline(const TimeSeriesDataset& data,
                                      const LearnerSpec& spec, int num_trials,
                                      std::uint64_t seed) {
  data.validate();
  if (num_trials < 1) throw ValidationError("num_trials must be >= 1");
  const int m = data.size();
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> draw(1, m + 1);

  LearnerSpec spec1 = spec;
  spec1.view = FeatureView::OldOnly;
  LearnerSpec spec2 = spec;
  spec2.view = FeatureView::All;

  Eigen::VectorXd total = Eigen::VectorXd::Zero(m);
  for (int trial = 0; trial < num_trials; ++trial) {
    const int t0 = draw(rng);
    SplitModel model;
    model.t_hat = t0;
    model.h1 = fit_segment(spec1, data, 0, t0 - 1).hypothesis;
    model.h2 = fit_segment(spec2, data, t0 - 1, m).hypothesis;
    total += predict_timeline(data, model);
  }
  return total / num_trials;
}

}  // namespace cpd
