#pragma once

#include <functional>
#include <vector>

#include "cpd/learners.hpp"
#include "cpd/risk.hpp"

namespace cpd {

enum class CandidateKind { Full, SqrtGrid, Explicit };

// Configuration for the split searches.  Ties at equal empirical risk are
// always broken toward the LARGEST t0, so "no change" (t0 = m+1) wins on
// tie-heavy degenerate data.
struct SearchConfig {
  CandidateKind candidates = CandidateKind::Full;
  std::vector<int> explicit_candidates;  // t0 values, sorted, in {1..m+1}
  LearnerSpec learner1{LearnerFamily::LeastSquares, {}, 1, FeatureView::OldOnly};
  LearnerSpec learner2{LearnerFamily::LeastSquares, {}, 1, FeatureView::All};
  double delta = 0.05;
  int threads = 1;
};

struct SrmConfig {
  int max_k = 2;
  LearnerSpec learner{LearnerFamily::LeastSquares, {}, 2, FeatureView::All};
  double delta = 0.05;
  CandidateKind candidates = CandidateKind::SqrtGrid;
  std::vector<int> explicit_boundaries;  // segment ends in {0..m}
  int threads = 1;
};

using SegmentFitter =
    std::function<Hypothesis(const TimeSeriesDataset&, int begin, int end)>;

SegmentFitter make_segment_fitter(const LearnerSpec& spec);

// Candidate split values t0 in {1..m+1} for the given kind.  The sqrt grid
// is {i*floor(sqrt(m)/B)} augmented with {1, m+1}; it falls back to the
// full set when B > sqrt(m).
std::vector<int> split_candidates(const TimeSeriesDataset& data, CandidateKind kind,
                                  const std::vector<int>& explicit_candidates = {});

// Exhaustive ERM over candidate splits with caller-supplied per-side
// fitters.  Deterministic regardless of thread count.
SplitModel sas_detect_with(const TimeSeriesDataset& data,
                           const std::vector<int>& candidates,
                           const SegmentFitter& fit1, const SegmentFitter& fit2,
                           int threads = 1);

// Search-and-Split: fit learner1 on rows before each candidate t0 and
// learner2 on the rest, keep the empirical-risk minimizer.
SplitModel sas_detect(const TimeSeriesDataset& data, const SearchConfig& config);

// SaS restricted to the sqrt(m)-spaced candidate grid.
SplitModel sas_grid_detect(const TimeSeriesDataset& data, const SearchConfig& config);

// Grid search where the post-split model is built by updating an
// old-feature fit with a least-squares correction on the new features
// (h2 = clip(f_old + g)).  Falls back to sas_grid_detect when the dataset
// has no new features or the families are not least-squares.
SplitModel sasf_detect(const TimeSeriesDataset& data, const SearchConfig& config);

// Boundary candidates in {0..m} for the multi-change search.
std::vector<int> boundary_candidates(const TimeSeriesDataset& data,
                                     CandidateKind kind,
                                     const std::vector<int>& explicit_boundaries = {});

// Minimizes multi_empirical_risk over nondecreasing K-tuples of boundaries
// from the candidate set, by segment-cost dynamic programming.
MultiSplitModel multi_change_detect(const TimeSeriesDataset& data, int num_changes,
                                    const std::vector<LearnerSpec>& specs,
                                    CandidateKind candidates = CandidateKind::Full,
                                    const std::vector<int>& explicit_boundaries = {});

// 11 B sqrt( (2 ln(2 (m+1)^K (K+2)^2 / delta) + sum_j 3 p_j ln(e m B / p_j)) / m )
double srm_penalty(int num_changes, int m, double bound, double delta,
                   const std::vector<int>& pseudo_dims);

struct SrmSelection {
  MultiSplitModel model;
  int k_hat = 0;
  std::vector<double> objectives;  // empirical risk + penalty, per K
};

// Sweeps K in {0..max_k}, selecting the minimizer of empirical risk plus
// the SRM penalty; ties toward smaller K.
SrmSelection srm_select_k(const TimeSeriesDataset& data, const SrmConfig& config);

struct PenalizedSplit {
  SplitModel model;             // empirical_risk is the UNpenalized risk
  double penalized_objective = 0.0;  // m*R + lambda1*A1 + lambda2*A2
  double penalty1 = 0.0;
  double penalty2 = 0.0;
};

// Penalized ERM with Gaussian-kernel ridge on both sides: each per-side fit
// minimizes SSE + lambda_i * alpha'G alpha, and t0 minimizes the summed
// penalized objective.
PenalizedSplit penalized_sas_detect(const TimeSeriesDataset& data, double gamma1,
                                    double lambda1, double gamma2, double lambda2,
                                    CandidateKind candidates = CandidateKind::Full,
                                    const std::vector<int>& explicit_candidates = {});

// 22 B sqrt( (2 ln(2(m+1)/delta) + sum_j 3 p_j ln(e m B / p_j)) / m );
// grid_variant swaps the leading constant for 26.
double theorem1_bound(int m, double bound, double delta, int p1, int p2,
                      bool grid_variant = false);

}  // namespace cpd
