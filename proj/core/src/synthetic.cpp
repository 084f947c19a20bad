#include "cpd/synthetic.hpp"

#include <cmath>
#include <random>

namespace cpd {

namespace {

// Target input-output correlation vector for a regime, pre-scaling.
// Regime 1: rho_high on the second feature half; regime 2: on the first.
Eigen::VectorXd cross_correlations(const SyntheticSpec& spec, int regime) {
  const int n = spec.num_inputs;
  const int half = n / 2;
  Eigen::VectorXd c(n);
  if (regime == 1) {
    c.head(half).setConstant(spec.rho_low);
    c.tail(half).setConstant(spec.rho_high);
  } else if (regime == 2) {
    c.head(half).setConstant(spec.rho_high);
    c.tail(half).setConstant(spec.rho_low);
  } else {
    throw ValidationError("regime must be 1 or 2");
  }
  return c;
}

}  // namespace

RegimeCovariance build_covariance(const SyntheticSpec& spec, int regime) {
  spec.validate();
  const int n = spec.num_inputs;
  const double rho = spec.rho_input;
  Eigen::VectorXd c = cross_correlations(spec, regime);

  // equicorrelation inverse: Sxx^-1 = (I - rho/(1-rho+n*rho) J) / (1-rho)
  const double denom = 1.0 - rho + n * rho;
  auto quad_form = [&](const Eigen::VectorXd& v) {
    const double s = v.sum();
    return (v.squaredNorm() - rho * s * s / denom) / (1.0 - rho);
  };

  double v = quad_form(c);
  double scale = 1.0;
  if (v > spec.feasibility_margin) {
    scale = std::sqrt(spec.feasibility_margin / v);
    c *= scale;
  }

  RegimeCovariance out;
  out.feasibility_scale = scale;
  out.cond_mean_weights =
      (c - (rho * c.sum() / denom) * Eigen::VectorXd::Ones(n)) / (1.0 - rho);

  out.sigma = Eigen::MatrixXd::Constant(n + 1, n + 1, rho);
  out.sigma.diagonal().setOnes();
  out.sigma.col(n).head(n) = c;
  out.sigma.row(n).head(n) = c.transpose();

  Eigen::LLT<Eigen::MatrixXd> llt(out.sigma);
  if (llt.info() != Eigen::Success)
    throw NumericError("regime covariance failed positive-definite factorization");
  return out;
}

double conditional_mean_oracle(const SyntheticSpec& spec, int regime,
                               const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (x.size() != spec.num_inputs)
    throw ValidationError("oracle input dimension mismatch");
  return build_covariance(spec, regime).cond_mean_weights.dot(x);
}

GeneratedDataset generate(const SyntheticSpec& spec) {
  spec.validate();
  const int n = spec.num_inputs;
  const int half = n / 2;
  const int m = spec.m;

  const RegimeCovariance r1 = build_covariance(spec, 1);
  const RegimeCovariance r2 = build_covariance(spec, 2);
  const Eigen::MatrixXd l1 = Eigen::LLT<Eigen::MatrixXd>(r1.sigma).matrixL();
  const Eigen::MatrixXd l2 = Eigen::LLT<Eigen::MatrixXd>(r2.sigma).matrixL();

  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  Eigen::MatrixXd x(m, n);
  Eigen::VectorXd y(m), eta(m), z(n + 1);
  for (int t = 0; t < m; ++t) {
    const bool first = t < spec.change_at;
    for (int i = 0; i <= n; ++i) z(i) = gauss(rng);
    const Eigen::VectorXd row = (first ? l1 : l2) * z;
    // column order: regime-1-relevant half first ("old"), the half that
    // becomes relevant after the change last ("new")
    x.row(t).head(half) = row.segment(half, half).transpose();
    x.row(t).segment(half, half) = row.head(half).transpose();
    y(t) = row(n);
    eta(t) = (first ? r1 : r2).cond_mean_weights.dot(row.head(n));
  }

  GeneratedDataset out;
  out.scale_regime1 = r1.feasibility_scale;
  out.scale_regime2 = r2.feasibility_scale;
  out.data.x = std::move(x);
  out.data.y = std::move(y);
  out.data.eta = std::move(eta);
  out.data.old_features = half;
  out.data.new_features = half;
  out.data.bound = 1.0;
  out.normalization = minmax_normalize(out.data);
  // conditional means are interior to the sample range except in tiny
  // samples; clamp so the bound invariant holds regardless
  *out.data.eta = out.data.eta->cwiseMax(0.0).cwiseMin(1.0);
  out.data.validate();
  return out;
}

TimeSeriesDataset generate_feature_addition(int m, int d, int k, int change_at,
                                            double noise_sd, std::uint64_t seed) {
  if (m < 1 || d < 1 || k < 0 || change_at < 1 || change_at > m)
    throw ValidationError("invalid feature-addition benchmark parameters");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  Eigen::VectorXd w_old(d), w_new(k);
  for (int i = 0; i < d; ++i) w_old(i) = gauss(rng);
  for (int i = 0; i < k; ++i) w_new(i) = gauss(rng);
  if (d > 0) w_old /= std::sqrt(double(d));
  if (k > 0) w_new /= std::sqrt(double(std::max(k, 1)));

  Eigen::MatrixXd x(m, d + k);
  Eigen::VectorXd y(m), eta(m);
  for (int t = 0; t < m; ++t) {
    for (int j = 0; j < d + k; ++j) x(t, j) = gauss(rng);
    double mean = w_old.dot(x.row(t).head(d));
    if (t + 1 >= change_at && k > 0) mean += w_new.dot(x.row(t).tail(k));
    eta(t) = mean;
    y(t) = mean + noise_sd * gauss(rng);
  }

  TimeSeriesDataset data;
  data.x = std::move(x);
  data.y = std::move(y);
  data.eta = std::move(eta);
  data.old_features = d;
  data.new_features = k;
  data.bound = 1.0;
  minmax_normalize(data);
  *data.eta = data.eta->cwiseMax(0.0).cwiseMin(1.0);
  data.validate();
  return data;
}

}  // namespace cpd
