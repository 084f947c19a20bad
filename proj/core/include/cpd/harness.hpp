#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "cpd/baselines.hpp"
#include "cpd/detection.hpp"

namespace cpd {

// Everything a single experiment run needs; individual methods read only
// their own slice.
struct HarnessConfig {
  SearchConfig search;
  SrmConfig srm;
  BaselineConfig baseline;
  int multi_k = 1;
  double kernel_gamma1 = 1.0, kernel_lambda1 = 1.0;
  double kernel_gamma2 = 1.0, kernel_lambda2 = 1.0;
  std::optional<int> p1, p2;  // pseudo-dimensions for bound reporting
  double delta = 0.05;
  int smoothing_window = 0;  // 0 = m/100
  std::uint64_t seed = 0;
  bool include_timing = true;  // false zeroes wall_ms for byte-reproducible output
};

struct DetectionReport {
  std::string method;
  std::optional<int> t_hat;        // single-split methods
  std::vector<int> change_times;   // multi-change methods
  std::vector<double> errors;      // per-point squared errors, length m
  std::vector<double> smoothed;    // moving-average rendering of errors
  double mean_mse = 0.0;
  double empirical_risk = 0.0;
  std::optional<double> true_risk;
  std::optional<double> bound;
  double wall_ms = 0.0;
  std::uint64_t seed = 0;
  nlohmann::json config_echo;
};

nlohmann::json report_to_json(const DetectionReport& report);
DetectionReport report_from_json(const nlohmann::json& j);

// Known method names: sas, sas-grid, sasf, multi, srm, penalized, cgf,
// caf, mcsprt, rs.
std::vector<std::string> known_methods();

std::vector<DetectionReport> run_experiment(const TimeSeriesDataset& data,
                                            const std::vector<std::string>& methods,
                                            const HarnessConfig& config);

// Centered moving average with shrinking edges; length preserved.
std::vector<double> moving_average(const std::vector<double>& timeline, int window);

struct ExcessRiskSummary {
  double excess = 0.0;
  double bound = 0.0;
  bool holds = false;
};

// Excess true risk of `model` relative to the same search rerun against
// eta (the in-search-space reference), with the generalization bound.
ExcessRiskSummary excess_risk_summary(const TimeSeriesDataset& data,
                                      const SplitModel& model,
                                      const SearchConfig& search, int p1, int p2,
                                      double delta);

struct BenchRow {
  std::string method;
  double median_ms = 0.0;
  std::vector<double> raw_ms;
};

std::vector<BenchRow> bench(const TimeSeriesDataset& data,
                            const std::vector<std::string>& methods,
                            int repetitions, const HarnessConfig& config);

}  // namespace cpd
