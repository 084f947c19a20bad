#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <variant>

#include "cpd/dataset.hpp"

namespace cpd {

// Affine score w.x + b, optionally passed through a sigmoid (logistic
// families).  An empty weight vector is a constant predictor.
struct LinearModel {
  Eigen::VectorXd weights;
  double intercept = 0.0;
  bool sigmoid = false;
};

// Kernel expansion sum_i alpha_i exp(-gamma ||x_i - x||^2) over stored
// support inputs (already restricted to the fitted feature view).
struct KernelExpansion {
  Eigen::MatrixXd support;  // n x view_dim
  Eigen::VectorXd alpha;    // n
  double gamma = 1.0;
  double reg_lambda = 0.0;
};

// A fitted predictor.  Predictions are clipped to [-B, B]: the hypothesis
// classes map into [-B, B] but fitted scores need not, and clipping never
// increases squared error against bounded targets.
class Hypothesis {
 public:
  Hypothesis() = default;
  Hypothesis(LinearModel m, FeatureView view, double bound)
      : model_(std::move(m)), view_(view), bound_(bound) {}
  Hypothesis(KernelExpansion m, FeatureView view, double bound)
      : model_(std::move(m)), view_(view), bound_(bound) {}

  static Hypothesis constant(double value, double bound,
                             FeatureView view = FeatureView::All) {
    return Hypothesis(LinearModel{Eigen::VectorXd(), value, false}, view, bound);
  }

  FeatureView view() const { return view_; }
  double bound() const { return bound_; }

  bool is_linear() const { return std::holds_alternative<LinearModel>(model_); }
  const LinearModel& linear() const { return std::get<LinearModel>(model_); }
  const KernelExpansion& kernel() const { return std::get<KernelExpansion>(model_); }

  // `x_full` is a full feature row; the hypothesis selects its own view.
  double predict(const Eigen::Ref<const Eigen::VectorXd>& x_full,
                 int old_features) const {
    const int n = view_ == FeatureView::OldOnly
                      ? old_features
                      : static_cast<int>(x_full.size());
    double score;
    if (const auto* lin = std::get_if<LinearModel>(&model_)) {
      score = lin->intercept;
      if (lin->weights.size() > 0) {
        if (lin->weights.size() != n)
          throw ValidationError("hypothesis/feature dimension mismatch");
        score += lin->weights.dot(x_full.head(n));
      }
      if (lin->sigmoid) score = 1.0 / (1.0 + std::exp(-score));
    } else {
      const auto& k = std::get<KernelExpansion>(model_);
      if (k.support.cols() != n)
        throw ValidationError("hypothesis/feature dimension mismatch");
      score = 0.0;
      for (Eigen::Index i = 0; i < k.support.rows(); ++i) {
        const double d2 = (k.support.row(i).transpose() - x_full.head(n)).squaredNorm();
        score += k.alpha(i) * std::exp(-k.gamma * d2);
      }
    }
    return std::clamp(score, -bound_, bound_);
  }

 private:
  std::variant<LinearModel, KernelExpansion> model_{LinearModel{}};
  FeatureView view_ = FeatureView::All;
  double bound_ = 1.0;
};

}  // namespace cpd
