#include "cpd/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace cpd {

namespace {

using Clock = std::chrono::steady_clock;

std::vector<double> to_vector(const Eigen::VectorXd& v) {
  return {v.data(), v.data() + v.size()};
}

int effective_window(const HarnessConfig& config, int m) {
  if (config.smoothing_window > 0) return config.smoothing_window;
  return std::max(1, m / 100);
}

DetectionReport from_split(const std::string& name, const TimeSeriesDataset& data,
                           const SplitModel& model, const HarnessConfig& config) {
  DetectionReport r;
  r.method = name;
  r.t_hat = model.t_hat;
  r.errors = to_vector(predict_timeline(data, model));
  r.empirical_risk = model.empirical_risk;
  r.true_risk = model.true_risk;
  if (config.p1 && config.p2)
    r.bound = theorem1_bound(data.size(), data.bound, config.delta, *config.p1,
                             *config.p2, name == "sas-grid" || name == "sasf");
  return r;
}

DetectionReport run_one(const std::string& method, const TimeSeriesDataset& data,
                        const HarnessConfig& config) {
  const int m = data.size();
  DetectionReport r;
  if (method == "sas") {
    r = from_split(method, data, sas_detect(data, config.search), config);
  } else if (method == "sas-grid") {
    r = from_split(method, data, sas_grid_detect(data, config.search), config);
  } else if (method == "sasf") {
    r = from_split(method, data, sasf_detect(data, config.search), config);
  } else if (method == "multi") {
    const std::vector<LearnerSpec> specs(config.multi_k + 1, config.srm.learner);
    const MultiSplitModel model =
        multi_change_detect(data, config.multi_k, specs, config.srm.candidates,
                            config.srm.explicit_boundaries);
    r.method = method;
    r.change_times = model.change_times;
    r.errors = to_vector(predict_timeline(data, model));
    r.empirical_risk = model.empirical_risk;
  } else if (method == "srm") {
    const SrmSelection sel = srm_select_k(data, config.srm);
    r.method = method;
    r.change_times = sel.model.change_times;
    r.errors = to_vector(predict_timeline(data, sel.model));
    r.empirical_risk = sel.model.empirical_risk;
    r.config_echo["k_hat"] = sel.k_hat;
  } else if (method == "penalized") {
    const PenalizedSplit p = penalized_sas_detect(
        data, config.kernel_gamma1, config.kernel_lambda1, config.kernel_gamma2,
        config.kernel_lambda2, config.search.candidates,
        config.search.explicit_candidates);
    r = from_split(method, data, p.model, config);
    r.config_echo["penalized_objective"] = p.penalized_objective;
    r.config_echo["penalty1"] = p.penalty1;
    r.config_echo["penalty2"] = p.penalty2;
  } else if (method == "cgf") {
    const auto grid = config.baseline.cgf_lambda_grid.empty()
                          ? default_cgf_lambda_grid()
                          : config.baseline.cgf_lambda_grid;
    const SweepResult s = sweep_best_cgf(data, config.search.learner2, grid,
                                         config.baseline.cgf_stride);
    r.method = method;
    r.errors = to_vector(s.timeline);
    r.empirical_risk = s.mean_error;
    r.config_echo["best_lambda"] = s.best_param;
  } else if (method == "caf") {
    const auto grid = config.baseline.caf_window_grid.empty()
                          ? default_caf_window_grid(m)
                          : config.baseline.caf_window_grid;
    const SweepResult s = sweep_best_caf(data, config.search.learner2, grid);
    r.method = method;
    r.errors = to_vector(s.timeline);
    r.empirical_risk = s.mean_error;
    r.config_echo["best_window"] = static_cast<int>(s.best_param);
  } else if (method == "mcsprt") {
    const auto hit = mcsprt_detect(data.x, config.baseline.mcsprt);
    SplitModel model;
    if (hit) {
      model.t_hat = *hit;
      model.h1 = fit_segment(config.search.learner1, data, 0, *hit - 1).hypothesis;
      model.h2 = fit_segment(config.search.learner2, data, *hit - 1, m).hypothesis;
    } else {
      // no detection: a single hypothesis over the entire dataset
      model.t_hat = m + 1;
      model.h1 = fit_segment(config.search.learner2, data, 0, m).hypothesis;
      model.h2 = model.h1;
    }
    model.empirical_risk = empirical_risk(data, model.h1, model.h2, model.t_hat);
    if (data.eta)
      model.true_risk = true_risk(data, model.h1, model.h2, model.t_hat);
    r = from_split(method, data, model, config);
    if (!hit) r.t_hat = std::nullopt;
  } else if (method == "rs") {
    const Eigen::VectorXd tl = random_split_timeline(
        data, config.search.learner2, config.baseline.rs_trials, config.seed);
    r.method = method;
    r.errors = to_vector(tl);
    r.empirical_risk = tl.mean();
    r.config_echo["num_trials"] = config.baseline.rs_trials;
  } else {
    throw ValidationError("unknown method name: " + method);
  }

  r.smoothed = moving_average(r.errors, effective_window(config, m));
  double sum = 0.0;
  for (double e : r.errors) sum += e;
  r.mean_mse = sum / r.errors.size();
  r.seed = config.seed;
  return r;
}

}  // namespace

std::vector<std::string> known_methods() {
  return {"sas", "sas-grid", "sasf",   "multi",  "srm",
          "penalized", "cgf", "caf", "mcsprt", "rs"};
}

std::vector<DetectionReport> run_experiment(const TimeSeriesDataset& data,
                                            const std::vector<std::string>& methods,
                                            const HarnessConfig& config) {
  data.validate();
  std::vector<DetectionReport> reports;
  reports.reserve(methods.size());
  for (const auto& method : methods) {
    const auto start = Clock::now();
    DetectionReport r = run_one(method, data, config);
    if (config.include_timing)
      r.wall_ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
    reports.push_back(std::move(r));
  }
  return reports;
}

std::vector<double> moving_average(const std::vector<double>& timeline, int window) {
  if (window < 1) throw ValidationError("moving-average window must be >= 1");
  const int m = static_cast<int>(timeline.size());
  const int half = window / 2;
  std::vector<double> out(m);
  // prefix sums make each centered window O(1)
  std::vector<double> prefix(m + 1, 0.0);
  for (int i = 0; i < m; ++i) prefix[i + 1] = prefix[i] + timeline[i];
  for (int t = 0; t < m; ++t) {
    const int lo = std::max(0, t - half);
    const int hi = std::min(m - 1, t + half);
    out[t] = (prefix[hi + 1] - prefix[lo]) / (hi - lo + 1);
  }
  return out;
}

ExcessRiskSummary excess_risk_summary(const TimeSeriesDataset& data,
                                      const SplitModel& model,
                                      const SearchConfig& search, int p1, int p2,
                                      double delta) {
  if (!data.eta)
    throw ValidationError("excess risk summary requires eta");
  // reference triple: the identical search run against the true means
  TimeSeriesDataset noiseless = data;
  noiseless.y = *data.eta;
  const SplitModel reference = sas_detect(noiseless, search);

  ExcessRiskSummary s;
  const double fitted = true_risk(data, model.h1, model.h2, model.t_hat);
  const double best =
      true_risk(data, reference.h1, reference.h2, reference.t_hat);
  s.excess = fitted - best;
  s.bound = theorem1_bound(data.size(), data.bound, delta, p1, p2);
  s.holds = s.excess <= s.bound;
  return s;
}

std::vector<BenchRow> bench(const TimeSeriesDataset& data,
                            const std::vector<std::string>& methods,
                            int repetitions, const HarnessConfig& config) {
  if (repetitions < 1) throw ValidationError("repetitions must be >= 1");
  std::vector<BenchRow> rows;
  for (const auto& method : methods) {
    BenchRow row;
    row.method = method;
    for (int rep = 0; rep < repetitions; ++rep) {
      const auto start = Clock::now();
      run_one(method, data, config);
      row.raw_ms.push_back(
          std::chrono::duration<double, std::milli>(Clock::now() - start).count());
    }
    std::vector<double> sorted = row.raw_ms;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    row.median_ms = n % 2 == 1 ? sorted[n / 2]
                               : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
    rows.push_back(std::move(row));
  }
  return rows;
}

nlohmann::json report_to_json(const DetectionReport& r) {
  nlohmann::json j;
  j["method"] = r.method;
  if (r.t_hat) j["t_hat"] = *r.t_hat;
  else j["t_hat"] = nullptr;
  j["change_times"] = r.change_times;
  j["errors"] = r.errors;
  j["smoothed"] = r.smoothed;
  j["mean_mse"] = r.mean_mse;
  j["empirical_risk"] = r.empirical_risk;
  if (r.true_risk) j["true_risk"] = *r.true_risk;
  if (r.bound) j["bound"] = *r.bound;
  j["wall_ms"] = r.wall_ms;
  j["seed"] = r.seed;
  j["config"] = r.config_echo;
  return j;
}

DetectionReport report_from_json(const nlohmann::json& j) {
  DetectionReport r;
  r.method = j.at("method").get<std::string>();
  if (!j.at("t_hat").is_null()) r.t_hat = j.at("t_hat").get<int>();
  r.change_times = j.at("change_times").get<std::vector<int>>();
  r.errors = j.at("errors").get<std::vector<double>>();
  r.smoothed = j.at("smoothed").get<std::vector<double>>();
  r.mean_mse = j.at("mean_mse").get<double>();
  r.empirical_risk = j.at("empirical_risk").get<double>();
  if (j.contains("true_risk")) r.true_risk = j.at("true_risk").get<double>();
  if (j.contains("bound")) r.bound = j.at("bound").get<double>();
  r.wall_ms = j.at("wall_ms").get<double>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.config_echo = j.at("config");
  return r;
}

}  // namespace cpd
