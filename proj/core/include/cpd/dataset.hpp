#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <optional>

#include "cpd/errors.hpp"

namespace cpd {

// Which feature columns a predictor sees: the first `old_features` columns,
// or the full row.
enum class FeatureView { OldOnly, All };

// Immutable time-ordered batch of (x_t, y_t) rows, t = 1..m.  The first
// `old_features` columns are the original features; the remaining
// `new_features` columns are the ones added / reinterpreted later.
// Responses (and the optional true means eta) are bounded by `bound`.
struct TimeSeriesDataset {
  Eigen::MatrixXd x;                  // m x (old_features + new_features)
  Eigen::VectorXd y;                  // m
  std::optional<Eigen::VectorXd> eta; // true means E[Y_t], if known
  int old_features = 1;
  int new_features = 0;
  double bound = 1.0;                 // B >= 1

  int size() const { return static_cast<int>(y.size()); }
  int dim() const { return old_features + new_features; }
  int view_dim(FeatureView v) const {
    return v == FeatureView::OldOnly ? old_features : dim();
  }

  void validate() const {
    const int m = size();
    if (m < 1) throw ValidationError("dataset must contain at least one row");
    if (x.rows() != m) throw ValidationError("feature/response row count mismatch");
    if (old_features < 1 || new_features < 0)
      throw ValidationError("invalid feature partition");
    if (x.cols() != dim())
      throw ValidationError("feature matrix width does not match d + k");
    if (bound < 1.0) throw ValidationError("bound B must be >= 1");
    if (!x.allFinite()) throw ValidationError("non-finite feature value");
    if (!y.allFinite()) throw ValidationError("non-finite response value");
    if (y.cwiseAbs().maxCoeff() > bound)
      throw ValidationError("|y_t| exceeds bound B");
    if (eta) {
      if (eta->size() != m) throw ValidationError("eta length mismatch");
      if (!eta->allFinite()) throw ValidationError("non-finite eta value");
      if (eta->cwiseAbs().maxCoeff() > bound)
        throw ValidationError("|eta_t| exceeds bound B");
    }
  }
};

// Affine transform recorded by min-max normalization so results can be
// mapped back to the original scale.
struct Normalization {
  double offset = 0.0;
  double scale = 1.0;  // y_norm = (y - offset) / scale
};

// Min-max normalizes responses (and eta, identically) into [0,1].
// Constant responses map to 0.5.
inline Normalization minmax_normalize(TimeSeriesDataset& data) {
  Normalization n;
  const double lo = data.y.minCoeff();
  const double hi = data.y.maxCoeff();
  if (hi > lo) {
    n.offset = lo;
    n.scale = hi - lo;
    data.y = (data.y.array() - lo) / n.scale;
    if (data.eta) *data.eta = (data.eta->array() - lo) / n.scale;
  } else {
    n.offset = lo - 0.5;
    n.scale = 1.0;
    data.y.setConstant(0.5);
    if (data.eta) *data.eta = (data.eta->array() - n.offset);
  }
  data.bound = std::max(1.0, data.bound);
  return n;
}

}  // namespace cpd
