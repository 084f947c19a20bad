#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "cpd/dataset.hpp"
#include "cpd/hypothesis.hpp"

namespace cpd {

// Fitted two-hypothesis split.  t_hat uses the 1-based convention:
// rows t < t_hat are modeled by h1, rows t >= t_hat by h2, and
// t_hat = m+1 means "no change within the data".
struct SplitModel {
  Hypothesis h1;
  Hypothesis h2;
  int t_hat = 1;
  double empirical_risk = 0.0;
  std::optional<double> true_risk;
};

// Fitted multi-change model.  change_times are nondecreasing segment ends
// in {0..m}: segment j+1 covers rows t_j+1 .. t_{j+1} (1-based), with
// t_0 = 0 and t_{K+1} = m implied.
struct MultiSplitModel {
  std::vector<Hypothesis> hypotheses;  // K+1
  std::vector<int> change_times;       // K
  double empirical_risk = 0.0;
};

// (1/m) [ sum_{t<t0} (h1(x_t)-y_t)^2 + sum_{t>=t0} (h2(x_t)-y_t)^2 ],
// t0 in {1..m+1}; empty sums are zero.
double empirical_risk(const TimeSeriesDataset& data, const Hypothesis& h1,
                      const Hypothesis& h2, int t0);

// Same form with the true means eta_t in place of y_t.
double true_risk(const TimeSeriesDataset& data, const Hypothesis& h1,
                 const Hypothesis& h2, int t0);

// (1/m) sum_j sum_{t=t_j+1}^{t_{j+1}} (h_{j+1}(x_t)-y_t)^2 with t_0=0,
// t_{K+1}=m; change_times nondecreasing in [0,m].
double multi_empirical_risk(const TimeSeriesDataset& data,
                            const std::vector<Hypothesis>& hypotheses,
                            const std::vector<int>& change_times);

// Per-point squared errors under the split model's side assignment.
Eigen::VectorXd predict_timeline(const TimeSeriesDataset& data,
                                 const SplitModel& model);

// Per-point squared errors under a multi-change model.
Eigen::VectorXd predict_timeline(const TimeSeriesDataset& data,
                                 const MultiSplitModel& model);

}  // namespace cpd
