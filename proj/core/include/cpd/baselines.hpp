#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "cpd/learners.hpp"
#include "cpd/risk.hpp"

namespace cpd {

enum class BaselineMethod { CGF, CAF, MCSPRT, RS };

struct McsprtConfig {
  int burn_in = 200;       // rows used to estimate per-coordinate mean/std
  double threshold = 30.0; // sized so burn-in estimation error cannot fire
  double drift = 0.5;      // CUSUM reference value, in standardized units
};

struct BaselineConfig {
  BaselineMethod method = BaselineMethod::CAF;
  std::vector<double> cgf_lambda_grid;   // defaults to 100 log-spaced in [0.9, 0.9999]
  std::vector<int> caf_window_grid;      // defaults to 100 log-spaced in [10, m]
  McsprtConfig mcsprt;
  int rs_trials = 100;
  std::uint64_t seed = 0;
  int cgf_stride = 1;  // refit every `stride` evaluation points
};

std::vector<double> default_cgf_lambda_grid(int count = 100);
std::vector<int> default_caf_window_grid(int m, int count = 100);

// Concept drift with gradual forgetting: at each evaluation index t, fit on
// rows 1..t-1 with weights lambda^(t-1-i), predict row t.  The first point
// is predicted by the global response mean.
Eigen::VectorXd cgf_timeline(const TimeSeriesDataset& data, const LearnerSpec& spec,
                             double lambda, int stride = 1);

// Concept drift with abrupt forgetting: fit on rows max(1, t-window)..t-1.
Eigen::VectorXd caf_timeline(const TimeSeriesDataset& data, const LearnerSpec& spec,
                             int window);

struct SweepResult {
  double best_param = 0.0;  // lambda for CGF, window for CAF
  Eigen::VectorXd timeline;
  double mean_error = 0.0;
};

// Grid element minimizing mean timeline error; ties toward the smaller
// parameter.
SweepResult sweep_best_cgf(const TimeSeriesDataset& data, const LearnerSpec& spec,
                           const std::vector<double>& lambda_grid, int stride = 1);
SweepResult sweep_best_caf(const TimeSeriesDataset& data, const LearnerSpec& spec,
                           const std::vector<int>& window_grid);

// Unsupervised multivariate CUSUM on the inputs only: standardizes with
// burn-in mean/variance, runs two-sided per-coordinate CUSUMs, flags the
// first index where any statistic crosses the threshold.  Returns a
// 1-based index, or nullopt when no change is detected.
std::optional<int> mcsprt_detect(const Eigen::MatrixXd& features,
                                 const McsprtConfig& config);

// Pointwise mean of per-point squared-error timelines over `num_trials`
// uniformly drawn splits t0 in {1..m+1}.
Eigen::VectorXd random_split_timeline(const TimeSeriesDataset& data,
                                      const LearnerSpec& spec, int num_trials,
                                      std::uint64_t seed);

}  // namespace cpd
