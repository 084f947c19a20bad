#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>

#include "cpd/dataset.hpp"
#include "cpd/hypothesis.hpp"

namespace cpd {

enum class LearnerFamily { LeastSquares, Ridge, Logistic, L1Logistic, KernelRidge };

// Declarative learner choice.  pseudo_dimension is user-declared and feeds
// only the bound calculators.
struct LearnerSpec {
  LearnerFamily family = LearnerFamily::LeastSquares;
  std::map<std::string, double> hyper;  // "lambda", "gamma", "l1_lambda", "tol", "max_iter"
  int pseudo_dimension = 1;
  FeatureView view = FeatureView::All;

  double get(const std::string& name, double fallback) const {
    auto it = hyper.find(name);
    return it == hyper.end() ? fallback : it->second;
  }
  void validate() const;
};

struct FitDiagnostics {
  int iterations = 0;
  double final_objective = 0.0;
  bool converged = true;
  double gradient_norm = 0.0;
  double jitter = 0.0;  // regularization added to rescue an ill-conditioned solve
};

struct FitResult {
  Hypothesis hypothesis;
  FitDiagnostics diag;
};

struct SolverConfig {
  double tol = 1e-8;
  int max_iter = 500;
};

// design: rows x features, no intercept column (added internally).
// ridge_lambda = 0 with a rank-deficient design returns the minimum-norm
// solution.  Empty segments return the constant-0 hypothesis so every
// candidate split stays searchable.
FitResult least_squares_fit(const Eigen::MatrixXd& design, const Eigen::VectorXd& y,
                            double ridge_lambda, FeatureView view, double bound);

// Weighted variant; weights must be nonnegative.
FitResult weighted_least_squares_fit(const Eigen::MatrixXd& design,
                                     const Eigen::VectorXd& y,
                                     const Eigen::VectorXd& weights,
                                     double ridge_lambda, FeatureView view,
                                     double bound);

// Cross-entropy with fractional targets in [0,1], damped Newton.
FitResult logistic_fit(const Eigen::MatrixXd& design, const Eigen::VectorXd& y,
                       FeatureView view, double bound, SolverConfig cfg = {});

FitResult weighted_logistic_fit(const Eigen::MatrixXd& design,
                                const Eigen::VectorXd& y,
                                const Eigen::VectorXd& weights, FeatureView view,
                                double bound, SolverConfig cfg = {});

// Cross-entropy + l1_lambda * ||w||_1 (intercept unpenalized), proximal
// gradient with backtracking.
FitResult l1_logistic_fit(const Eigen::MatrixXd& design, const Eigen::VectorXd& y,
                          double l1_lambda, FeatureView view, double bound,
                          SolverConfig cfg = {});

// alpha solves (G + lambda I) alpha = y,  G_ij = exp(-gamma ||x_i - x_j||^2).
FitResult kernel_ridge_fit(const Eigen::MatrixXd& design, const Eigen::VectorXd& y,
                           double gamma, double lambda, FeatureView view,
                           double bound);

// lambda * alpha' G alpha for a fitted kernel hypothesis.
double penalty_value(const Hypothesis& h);

// Soft-threshold operator used by the proximal step; exposed for testing.
double soft_threshold(double v, double threshold);

// Running least-squares moments (X'X, X'y with intercept) over a growing
// prefix of rows.  Single-owner; not shareable mid-stream.
class IncrementalLeastSquares {
 public:
  IncrementalLeastSquares(int num_features, double ridge_lambda, FeatureView view,
                          double bound);

  void add_row(const Eigen::Ref<const Eigen::VectorXd>& x, double y);
  void remove_row(const Eigen::Ref<const Eigen::VectorXd>& x, double y);
  void scale(double factor);  // exponential discounting of past rows
  int count() const { return count_; }

  // Hypothesis for the rows seen so far; agrees with a batch refit.
  Hypothesis solve() const;
  // Residual sum of squares of solve() on the accumulated rows, computed
  // from the moments (unclipped predictions).
  double residual_sse() const;

 private:
  Eigen::MatrixXd moments_;  // (p+1) x (p+1), intercept last
  Eigen::VectorXd rhs_;      // p+1
  double yy_ = 0.0;
  int count_ = 0;
  double ridge_lambda_;
  FeatureView view_;
  double bound_;
};

// Fits `spec` on dataset rows [begin, end) using the columns selected by
// spec.view.  The uniform entry point used by every split search.
FitResult fit_segment(const LearnerSpec& spec, const TimeSeriesDataset& data,
                      int begin, int end);

}  // namespace cpd
