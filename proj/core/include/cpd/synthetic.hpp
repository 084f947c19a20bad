#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "cpd/dataset.hpp"

namespace cpd {

// Two zero-mean Gaussian regimes over n inputs plus a response: input
// correlations are equicorrelated at rho_input, and the input-output
// correlation vector carries rho_high on the relevant half and rho_low on
// the other, with the halves swapped between regimes.  The stated target
// correlations can be jointly infeasible (the implied covariance is not
// PSD); in that case the cross-correlation vector is uniformly rescaled so
// that c' Sxx^-1 c = feasibility_margin, preserving the high:low contrast.
struct SyntheticSpec {
  int num_inputs = 40;       // even; full-scale setting uses 1000
  double rho_input = 0.2;
  double rho_low = 0.1;
  double rho_high = 0.7;
  int m = 2000;              // full-scale setting uses 10000
  int change_at = 1000;      // rows 1..change_at come from regime 1
  std::uint64_t seed = 0;
  double feasibility_margin = 0.9;

  void validate() const {
    if (num_inputs < 2 || num_inputs % 2 != 0)
      throw ValidationError("num_inputs must be an even integer >= 2");
    if (!(rho_input > 0.0 && rho_input < 1.0))
      throw ValidationError("rho_input must be in (0,1)");
    if (!(rho_low >= 0.0 && rho_low < rho_high && rho_high < 1.0))
      throw ValidationError("need 0 <= rho_low < rho_high < 1");
    if (m < 1 || change_at < 1 || change_at > m)
      throw ValidationError("need 1 <= change_at <= m");
    if (!(feasibility_margin > 0.0 && feasibility_margin <= 1.0))
      throw ValidationError("feasibility_margin must be in (0,1]");
  }
};

struct RegimeCovariance {
  Eigen::MatrixXd sigma;     // (n+1) x (n+1), response last
  double feasibility_scale;  // s <= 1 applied to the cross-correlation vector
  Eigen::VectorXd cond_mean_weights;  // Sxx^-1 c (scaled), for E[y|x]
};

// Joint covariance for regime 1 or 2.  Regime 1 puts rho_high on the
// second feature half; regime 2 swaps the halves.
RegimeCovariance build_covariance(const SyntheticSpec& spec, int regime);

// Exact Gaussian conditional mean E[y|x] in the given regime
// (pre-normalization scale).
double conditional_mean_oracle(const SyntheticSpec& spec, int regime,
                               const Eigen::Ref<const Eigen::VectorXd>& x);

struct GeneratedDataset {
  TimeSeriesDataset data;
  double scale_regime1 = 1.0;
  double scale_regime2 = 1.0;
  Normalization normalization;
};

// Samples the benchmark: rows 1..change_at from regime 1, the rest from
// regime 2, responses min-max normalized to [0,1] with eta transformed
// identically.  The regime-2-relevant half (the first) is marked "new".
GeneratedDataset generate(const SyntheticSpec& spec);

// Feature-addition benchmark: d old features always relevant, k new
// features that only influence the response after the change.
TimeSeriesDataset generate_feature_addition(int m, int d, int k, int change_at,
                                            double noise_sd, std::uint64_t seed);

}  // namespace cpd
