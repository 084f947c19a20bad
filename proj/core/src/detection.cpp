#include "cpd/detection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>
#include <unordered_map>

namespace cpd {

namespace {

void parallel_for(int n, int threads, const std::function<void(int)>& body) {
  threads = std::max(1, std::min(threads, n));
  if (threads == 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int w = 0; w < threads; ++w)
    pool.emplace_back([&, w] {
      for (int i = w; i < n; i += threads) body(i);
    });
  for (auto& t : pool) t.join();
}

bool is_linear_family(LearnerFamily f) {
  return f == LearnerFamily::LeastSquares || f == LearnerFamily::Ridge;
}

double ridge_of(const LearnerSpec& spec) {
  return spec.family == LearnerFamily::Ridge ? spec.get("lambda", 1.0) : 0.0;
}

// Among exact risk ties, the largest candidate wins (prefer "no change").
int argmin_prefer_last(const std::vector<double>& risks) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(risks.size()); ++i)
    if (risks[i] <= risks[best]) best = i;
  return best;
}

void validate_split_candidates(const std::vector<int>& cands, int m) {
  if (cands.empty()) throw ValidationError("empty candidate set");
  for (std::size_t i = 0; i < cands.size(); ++i) {
    if (cands[i] < 1 || cands[i] > m + 1)
      throw ValidationError("candidate t0 out of range {1..m+1}");
    if (i > 0 && cands[i] <= cands[i - 1])
      throw ValidationError("explicit candidates must be sorted and unique");
  }
}

// Moment-based sweep for least-squares / ridge learners: one prefix and one
// suffix accumulator, a solve per candidate.
SplitModel sas_linear_sweep(const TimeSeriesDataset& data,
                            const std::vector<int>& candidates,
                            const LearnerSpec& spec1, const LearnerSpec& spec2) {
  const int m = data.size();
  const int p1 = data.view_dim(spec1.view);
  const int p2 = data.view_dim(spec2.view);
  const int n_cand = static_cast<int>(candidates.size());

  std::vector<double> prefix_sse(n_cand), suffix_sse(n_cand);
  IncrementalLeastSquares prefix(p1, ridge_of(spec1), spec1.view, data.bound);
  {
    int next = 0, row = 0;
    while (next < n_cand) {
      const int need = candidates[next] - 1;  // prefix length for this t0
      while (row < need) {
        prefix.add_row(data.x.row(row).head(p1).transpose(), data.y(row));
        ++row;
      }
      prefix_sse[next++] = prefix.residual_sse();
    }
  }
  IncrementalLeastSquares suffix(p2, ridge_of(spec2), spec2.view, data.bound);
  {
    int next = n_cand - 1, row = m - 1;
    while (next >= 0) {
      const int first = candidates[next] - 1;  // first suffix row, 0-based
      while (row >= first) {
        suffix.add_row(data.x.row(row).head(p2).transpose(), data.y(row));
        --row;
      }
      suffix_sse[next--] = suffix.residual_sse();
    }
  }

  std::vector<double> risks(n_cand);
  for (int i = 0; i < n_cand; ++i)
    risks[i] = (prefix_sse[i] + suffix_sse[i]) / m;
  const int best = argmin_prefer_last(risks);
  const int t_hat = candidates[best];

  SplitModel model;
  model.t_hat = t_hat;
  model.h1 = fit_segment(spec1, data, 0, t_hat - 1).hypothesis;
  model.h2 = fit_segment(spec2, data, t_hat - 1, m).hypothesis;
  model.empirical_risk = empirical_risk(data, model.h1, model.h2, t_hat);
  if (data.eta) model.true_risk = true_risk(data, model.h1, model.h2, t_hat);
  return model;
}

struct SegmentCostCache {
  const TimeSeriesDataset& data;
  const LearnerSpec& spec;
  std::unordered_map<long long, double> sse;

  // SSE of the fitted segment over rows [begin, end), clipped predictions.
  double operator()(int begin, int end) {
    const long long key =
        static_cast<long long>(begin) * (data.size() + 2) + end;
    auto it = sse.find(key);
    if (it != sse.end()) return it->second;
    const Hypothesis h = fit_segment(spec, data, begin, end).hypothesis;
    double total = 0.0;
    for (int t = begin; t < end; ++t) {
      const double r =
          h.predict(data.x.row(t).transpose(), data.old_features) - data.y(t);
      total += r * r;
    }
    sse.emplace(key, total);
    return total;
  }
};

MultiSplitModel multi_change_dp(const TimeSeriesDataset& data, int num_changes,
                                const std::vector<LearnerSpec>& specs,
                                const std::vector<int>& boundaries,
                                std::vector<SegmentCostCache>& costs) {
  const int m = data.size();
  MultiSplitModel model;
  if (num_changes == 0) {
    model.hypotheses.push_back(fit_segment(specs[0], data, 0, m).hypothesis);
    model.empirical_risk = multi_empirical_risk(data, model.hypotheses, {});
    return model;
  }
  const int nb = static_cast<int>(boundaries.size());
  const double inf = std::numeric_limits<double>::infinity();

  // layer[j][i] = best SSE of segments 1..j+1 given t_{j+1} = boundaries[i]
  std::vector<double> cur(nb), prev(nb);
  std::vector<std::vector<int>> parent(num_changes, std::vector<int>(nb, -1));
  for (int i = 0; i < nb; ++i) cur[i] = costs[0](0, boundaries[i]);
  for (int j = 1; j < num_changes; ++j) {
    prev.swap(cur);
    for (int i = 0; i < nb; ++i) {
      double best = inf;
      int arg = -1;
      for (int i2 = 0; i2 <= i; ++i2) {
        const double v = prev[i2] + costs[j](boundaries[i2], boundaries[i]);
        if (v < best) {
          best = v;
          arg = i2;
        }
      }
      cur[i] = best;
      parent[j][i] = arg;
    }
  }
  double best = inf;
  int last = -1;
  for (int i = 0; i < nb; ++i) {
    const double v = cur[i] + costs[num_changes](boundaries[i], m);
    if (v < best) {
      best = v;
      last = i;
    }
  }

  std::vector<int> picks(num_changes);
  picks[num_changes - 1] = last;
  for (int j = num_changes - 1; j > 0; --j)
    picks[j - 1] = parent[j][picks[j]];
  model.change_times.resize(num_changes);
  for (int j = 0; j < num_changes; ++j)
    model.change_times[j] = boundaries[picks[j]];

  int begin = 0;
  for (int j = 0; j <= num_changes; ++j) {
    const int end = j < num_changes ? model.change_times[j] : m;
    model.hypotheses.push_back(fit_segment(specs[j], data, begin, end).hypothesis);
    begin = end;
  }
  model.empirical_risk =
      multi_empirical_risk(data, model.hypotheses, model.change_times);
  return model;
}

}  // namespace

SegmentFitter make_segment_fitter(const LearnerSpec& spec) {
  return [spec](const TimeSeriesDataset& data, int begin, int end) {
    return fit_segment(spec, data, begin, end).hypothesis;
  };
}

std::vector<int> split_candidates(const TimeSeriesDataset& data, CandidateKind kind,
                                  const std::vector<int>& explicit_candidates) {
  const int m = data.size();
  std::vector<int> cands;
  switch (kind) {
    case CandidateKind::Full:
      cands.resize(m + 1);
      for (int i = 0; i < m + 1; ++i) cands[i] = i + 1;
      break;
    case CandidateKind::SqrtGrid: {
      const int step = static_cast<int>(std::floor(std::sqrt(double(m)) / data.bound));
      if (step < 1) return split_candidates(data, CandidateKind::Full);
      cands.push_back(1);
      for (int t = step; t <= m + 1; t += step) cands.push_back(t);
      cands.push_back(m + 1);
      std::sort(cands.begin(), cands.end());
      cands.erase(std::unique(cands.begin(), cands.end()), cands.end());
      break;
    }
    case CandidateKind::Explicit:
      cands = explicit_candidates;
      break;
  }
  validate_split_candidates(cands, m);
  return cands;
}

SplitModel sas_detect_with(const TimeSeriesDataset& data,
                           const std::vector<int>& candidates,
                           const SegmentFitter& fit1, const SegmentFitter& fit2,
                           int threads) {
  data.validate();
  const int m = data.size();
  validate_split_candidates(candidates, m);
  const int n_cand = static_cast<int>(candidates.size());

  std::vector<double> risks(n_cand);
  parallel_for(n_cand, threads, [&](int i) {
    const int t0 = candidates[i];
    const Hypothesis h1 = fit1(data, 0, t0 - 1);
    const Hypothesis h2 = fit2(data, t0 - 1, m);
    risks[i] = empirical_risk(data, h1, h2, t0);
  });

  const int best = argmin_prefer_last(risks);
  const int t_hat = candidates[best];
  SplitModel model;
  model.t_hat = t_hat;
  model.h1 = fit1(data, 0, t_hat - 1);
  model.h2 = fit2(data, t_hat - 1, m);
  model.empirical_risk = empirical_risk(data, model.h1, model.h2, t_hat);
  if (data.eta) model.true_risk = true_risk(data, model.h1, model.h2, t_hat);
  return model;
}

SplitModel sas_detect(const TimeSeriesDataset& data, const SearchConfig& config) {
  data.validate();
  const auto candidates =
      split_candidates(data, config.candidates, config.explicit_candidates);
  if (is_linear_family(config.learner1.family) &&
      is_linear_family(config.learner2.family))
    return sas_linear_sweep(data, candidates, config.learner1, config.learner2);
  return sas_detect_with(data, candidates, make_segment_fitter(config.learner1),
                         make_segment_fitter(config.learner2), config.threads);
}

SplitModel sas_grid_detect(const TimeSeriesDataset& data, const SearchConfig& config) {
  SearchConfig grid = config;
  grid.candidates = CandidateKind::SqrtGrid;
  grid.explicit_candidates.clear();
  return sas_detect(data, grid);
}

SplitModel sasf_detect(const TimeSeriesDataset& data, const SearchConfig& config) {
  data.validate();
  if (data.new_features == 0 || !is_linear_family(config.learner1.family) ||
      !is_linear_family(config.learner2.family))
    return sas_grid_detect(data, config);

  const int m = data.size();
  const int d = data.old_features;
  const int k = data.new_features;
  const auto candidates = split_candidates(data, CandidateKind::SqrtGrid);
  const int n_cand = static_cast<int>(candidates.size());
  const double ridge1 = ridge_of(config.learner1);
  const double ridge2 = ridge_of(config.learner2);

  const int p1 = data.view_dim(config.learner1.view);
  std::vector<double> prefix_sse(n_cand);
  {
    IncrementalLeastSquares prefix(p1, ridge1, config.learner1.view, data.bound);
    int next = 0, row = 0;
    while (next < n_cand) {
      while (row < candidates[next] - 1) {
        prefix.add_row(data.x.row(row).head(p1).transpose(), data.y(row));
        ++row;
      }
      prefix_sse[next++] = prefix.residual_sse();
    }
  }

  // Suffix pass: old-feature base fit from running moments, then a
  // least-squares correction on the new features against its residual.
  auto corrected_suffix = [&](int t0, const Hypothesis& f_old) {
    const int first = t0 - 1;
    const int len = m - first;
    Eigen::VectorXd residual(len);
    const LinearModel& base = f_old.linear();
    for (int t = 0; t < len; ++t) {
      double s = base.intercept;
      if (base.weights.size() > 0)
        s += base.weights.dot(data.x.row(first + t).head(d));
      residual(t) = data.y(first + t) - s;
    }
    const Eigen::MatrixXd design = data.x.block(first, d, len, k);
    const Hypothesis g =
        least_squares_fit(design, residual, ridge2, FeatureView::All, data.bound)
            .hypothesis;
    const LinearModel& gm = g.linear();
    Eigen::VectorXd w = Eigen::VectorXd::Zero(d + k);
    if (base.weights.size() > 0) w.head(d) = base.weights;
    if (gm.weights.size() > 0) w.tail(k) = gm.weights;
    return Hypothesis(LinearModel{w, base.intercept + gm.intercept, false},
                      FeatureView::All, data.bound);
  };

  std::vector<double> risks(n_cand);
  std::vector<Hypothesis> h2s(n_cand);
  {
    IncrementalLeastSquares suffix_old(d, ridge2, FeatureView::OldOnly, data.bound);
    int next = n_cand - 1, row = m - 1;
    while (next >= 0) {
      const int first = candidates[next] - 1;
      while (row >= first) {
        suffix_old.add_row(data.x.row(row).head(d).transpose(), data.y(row));
        --row;
      }
      h2s[next] = corrected_suffix(candidates[next], suffix_old.solve());
      double sse = 0.0;
      for (int t = first; t < m; ++t) {
        const double r = h2s[next].predict(data.x.row(t).transpose(), d) - data.y(t);
        sse += r * r;
      }
      risks[next] = (prefix_sse[next] + sse) / m;
      --next;
    }
  }

  const int best = argmin_prefer_last(risks);
  SplitModel model;
  model.t_hat = candidates[best];
  model.h1 = fit_segment(config.learner1, data, 0, model.t_hat - 1).hypothesis;
  model.h2 = h2s[best];
  model.empirical_risk = empirical_risk(data, model.h1, model.h2, model.t_hat);
  if (data.eta) model.true_risk = true_risk(data, model.h1, model.h2, model.t_hat);
  return model;
}

std::vector<int> boundary_candidates(const TimeSeriesDataset& data,
                                     CandidateKind kind,
                                     const std::vector<int>& explicit_boundaries) {
  const int m = data.size();
  std::vector<int> b;
  switch (kind) {
    case CandidateKind::Full:
      b.resize(m + 1);
      for (int i = 0; i <= m; ++i) b[i] = i;
      break;
    case CandidateKind::SqrtGrid: {
      const int step = static_cast<int>(std::floor(std::sqrt(double(m)) / data.bound));
      if (step < 1) return boundary_candidates(data, CandidateKind::Full);
      b.push_back(0);
      for (int t = step; t < m; t += step) b.push_back(t);
      b.push_back(m);
      std::sort(b.begin(), b.end());
      b.erase(std::unique(b.begin(), b.end()), b.end());
      break;
    }
    case CandidateKind::Explicit:
      b = explicit_boundaries;
      for (std::size_t i = 0; i < b.size(); ++i) {
        if (b[i] < 0 || b[i] > m)
          throw ValidationError("boundary candidate out of range [0,m]");
        if (i > 0 && b[i] <= b[i - 1])
          throw ValidationError("explicit boundaries must be sorted and unique");
      }
      break;
  }
  if (b.empty()) throw ValidationError("empty boundary candidate set");
  return b;
}

MultiSplitModel multi_change_detect(const TimeSeriesDataset& data, int num_changes,
                                    const std::vector<LearnerSpec>& specs,
                                    CandidateKind candidates,
                                    const std::vector<int>& explicit_boundaries) {
  data.validate();
  if (num_changes < 0 || num_changes > data.size())
    throw ValidationError("number of change times must be in [0,m]");
  if (static_cast<int>(specs.size()) != num_changes + 1)
    throw ValidationError("need exactly K+1 learner specs");
  const auto boundaries =
      boundary_candidates(data, candidates, explicit_boundaries);
  if (num_changes > static_cast<int>(boundaries.size()))
    throw ValidationError("K exceeds the candidate boundary count");
  std::vector<SegmentCostCache> costs;
  costs.reserve(specs.size());
  for (const auto& s : specs) costs.push_back(SegmentCostCache{data, s, {}});
  return multi_change_dp(data, num_changes, specs, boundaries, costs);
}

double srm_penalty(int num_changes, int m, double bound, double delta,
                   const std::vector<int>& pseudo_dims) {
  if (num_changes < 0 || m < 1 || bound < 1.0 || delta <= 0.0 || delta >= 1.0)
    throw ValidationError("invalid srm_penalty inputs");
  if (static_cast<int>(pseudo_dims.size()) != num_changes + 1)
    throw ValidationError("need K+1 pseudo-dimensions");
  // ln(2 (m+1)^K (K+2)^2 / delta), expanded to avoid overflow
  double log_term = std::log(2.0) + num_changes * std::log(double(m) + 1.0) +
                    2.0 * std::log(double(num_changes) + 2.0) - std::log(delta);
  double dim_term = 0.0;
  for (int p : pseudo_dims) {
    if (p < 1) throw ValidationError("pseudo-dimension must be >= 1");
    dim_term += 3.0 * p * std::log(std::exp(1.0) * m * bound / p);
  }
  return 11.0 * bound * std::sqrt((2.0 * log_term + dim_term) / m);
}

SrmSelection srm_select_k(const TimeSeriesDataset& data, const SrmConfig& config) {
  data.validate();
  const int m = data.size();
  const auto boundaries =
      boundary_candidates(data, config.candidates, config.explicit_boundaries);
  if (config.max_k > static_cast<int>(boundaries.size()) || config.max_k > m)
    throw ValidationError("max_K exceeds the candidate boundary count");

  // one shared cost cache: every K layer uses the same learner
  std::vector<SegmentCostCache> shared{SegmentCostCache{data, config.learner, {}}};

  SrmSelection sel;
  double best = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= config.max_k; ++k) {
    std::vector<LearnerSpec> specs(k + 1, config.learner);
    std::vector<SegmentCostCache> layered(k + 1, shared[0]);
    MultiSplitModel model = multi_change_dp(data, k, specs, boundaries, layered);
    for (auto& c : layered) shared[0].sse.merge(c.sse);
    const std::vector<int> dims(k + 1, config.learner.pseudo_dimension);
    const double objective =
        model.empirical_risk + srm_penalty(k, m, data.bound, config.delta, dims);
    sel.objectives.push_back(objective);
    if (objective < best) {
      best = objective;
      sel.model = std::move(model);
      sel.k_hat = k;
    }
  }
  return sel;
}

PenalizedSplit penalized_sas_detect(const TimeSeriesDataset& data, double gamma1,
                                    double lambda1, double gamma2, double lambda2,
                                    CandidateKind candidates,
                                    const std::vector<int>& explicit_candidates) {
  data.validate();
  if (lambda1 <= 0.0 || lambda2 <= 0.0)
    throw ValidationError("penalized search requires lambda > 0 on both sides");
  const int m = data.size();
  const auto cands = split_candidates(data, candidates, explicit_candidates);

  const LearnerSpec spec1{LearnerFamily::KernelRidge,
                          {{"gamma", gamma1}, {"lambda", lambda1}},
                          1,
                          FeatureView::OldOnly};
  const LearnerSpec spec2{LearnerFamily::KernelRidge,
                          {{"gamma", gamma2}, {"lambda", lambda2}},
                          1,
                          FeatureView::All};

  double best_obj = std::numeric_limits<double>::infinity();
  PenalizedSplit out;
  for (int t0 : cands) {
    const FitResult f1 = fit_segment(spec1, data, 0, t0 - 1);
    const FitResult f2 = fit_segment(spec2, data, t0 - 1, m);
    // per-side penalized objective (SSE + lambda * alpha'G alpha); empty
    // segments contribute 0
    const double obj = f1.diag.final_objective + f2.diag.final_objective;
    if (obj <= best_obj) {
      best_obj = obj;
      out.model.t_hat = t0;
      out.model.h1 = f1.hypothesis;
      out.model.h2 = f2.hypothesis;
      out.penalty1 = f1.hypothesis.is_linear() ? 0.0 : penalty_value(f1.hypothesis);
      out.penalty2 = f2.hypothesis.is_linear() ? 0.0 : penalty_value(f2.hypothesis);
    }
  }
  out.penalized_objective = best_obj;
  out.model.empirical_risk =
      empirical_risk(data, out.model.h1, out.model.h2, out.model.t_hat);
  if (data.eta)
    out.model.true_risk =
        true_risk(data, out.model.h1, out.model.h2, out.model.t_hat);
  return out;
}

double theorem1_bound(int m, double bound, double delta, int p1, int p2,
                      bool grid_variant) {
  if (p1 < 1 || p2 < 1) throw ValidationError("pseudo-dimensions must be >= 1");
  if (m < std::max(p1, p2))
    throw ValidationError("requires m >= max(p1, p2)");
  if (bound < 1.0) throw ValidationError("bound B must be >= 1");
  if (delta <= 0.0 || delta >= 1.0) throw ValidationError("delta must be in (0,1)");
  const double log_term = 2.0 * std::log(2.0 * (double(m) + 1.0) / delta);
  const double dim_term =
      3.0 * p1 * std::log(std::exp(1.0) * m * bound / p1) +
      3.0 * p2 * std::log(std::exp(1.0) * m * bound / p2);
  const double c = grid_variant ? 26.0 : 22.0;
  return c * bound * std::sqrt((log_term + dim_term) / m);
}

}  // namespace cpd
