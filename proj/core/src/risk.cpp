#include "cpd/risk.hpp"

#include <string>

namespace cpd {

namespace {

double split_risk(const TimeSeriesDataset& data, const Eigen::VectorXd& target,
                  const Hypothesis& h1, const Hypothesis& h2, int t0) {
  const int m = data.size();
  if (t0 < 1 || t0 > m + 1)
    throw ValidationError("t0 out of range {1.." + std::to_string(m + 1) + "}");
  double sse = 0.0;
  for (int t = 0; t < m; ++t) {
    const Hypothesis& h = (t + 1 < t0) ? h1 : h2;
    const double r = h.predict(data.x.row(t).transpose(), data.old_features) - target(t);
    sse += r * r;
  }
  return sse / m;
}

}  // namespace

double empirical_risk(const TimeSeriesDataset& data, const Hypothesis& h1,
                      const Hypothesis& h2, int t0) {
  return split_risk(data, data.y, h1, h2, t0);
}

double true_risk(const TimeSeriesDataset& data, const Hypothesis& h1,
                 const Hypothesis& h2, int t0) {
  if (!data.eta)
    throw ValidationError("true risk unavailable: dataset has no eta column");
  return split_risk(data, *data.eta, h1, h2, t0);
}

double multi_empirical_risk(const TimeSeriesDataset& data,
                            const std::vector<Hypothesis>& hypotheses,
                            const std::vector<int>& change_times) {
  const int m = data.size();
  if (hypotheses.size() != change_times.size() + 1)
    throw ValidationError("need exactly K+1 hypotheses for K change times");
  int prev = 0;
  for (int c : change_times) {
    if (c < prev) throw ValidationError("change_times must be nondecreasing");
    if (c > m) throw ValidationError("change time out of range [0,m]");
    prev = c;
  }
  double sse = 0.0;
  std::size_t seg = 0;
  for (int t = 0; t < m; ++t) {
    while (seg < change_times.size() && t >= change_times[seg]) ++seg;
    const double r =
        hypotheses[seg].predict(data.x.row(t).transpose(), data.old_features) - data.y(t);
    sse += r * r;
  }
  return sse / m;
}

Eigen::VectorXd predict_timeline(const TimeSeriesDataset& data,
                                 const SplitModel& model) {
  const int m = data.size();
  if (model.t_hat < 1 || model.t_hat > m + 1)
    throw ValidationError("split model t_hat out of range for this dataset");
  Eigen::VectorXd errors(m);
  for (int t = 0; t < m; ++t) {
    const Hypothesis& h = (t + 1 < model.t_hat) ? model.h1 : model.h2;
    const double r = h.predict(data.x.row(t).transpose(), data.old_features) - data.y(t);
    errors(t) = r * r;
  }
  return errors;
}

Eigen::VectorXd predict_timeline(const TimeSeriesDataset& data,
                                 const MultiSplitModel& model) {
  const int m = data.size();
  Eigen::VectorXd errors(m);
  std::size_t seg = 0;
  for (int t = 0; t < m; ++t) {
    while (seg < model.change_times.size() && t >= model.change_times[seg]) ++seg;
    const double r =
        model.hypotheses[seg].predict(data.x.row(t).transpose(), data.old_features) -
        data.y(t);
    errors(t) = r * r;
  }
  return errors;
}

}  // namespace cpd
