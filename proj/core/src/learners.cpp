#include "cpd/learners.hpp"

#include <algorithm>
#include <cmath>

namespace cpd {

namespace {

constexpr double kProbClamp = 1e-12;

// Solves (M + ridge * diag(1..1,0)) w = rhs for augmented moments
// (intercept last, unpenalized).  ridge = 0 uses an eigendecomposition
// pseudo-inverse, which yields the minimum-norm solution of the normal
// equations and keeps weights of all-zero columns at exactly 0.
Eigen::VectorXd solve_moments(Eigen::MatrixXd M, const Eigen::VectorXd& rhs,
                              double ridge) {
  const Eigen::Index q = M.rows();
  if (ridge > 0.0) {
    for (Eigen::Index i = 0; i + 1 < q; ++i) M(i, i) += ridge;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(M);
    if (ldlt.info() == Eigen::Success) return ldlt.solve(rhs);
    // fall through to the pseudo-inverse on factorization failure
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
  if (es.info() != Eigen::Success)
    throw NumericError("eigendecomposition failed in least-squares solve");
  const Eigen::VectorXd& ev = es.eigenvalues();
  const double cutoff = ev.cwiseAbs().maxCoeff() * 1e-12;
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(q);
  for (Eigen::Index i = 0; i < q; ++i)
    if (std::abs(ev(i)) > cutoff && cutoff > 0.0) inv(i) = 1.0 / ev(i);
  return es.eigenvectors() * inv.asDiagonal() * (es.eigenvectors().transpose() * rhs);
}

FitResult constant_zero(FeatureView view, double bound) {
  FitResult r;
  r.hypothesis = Hypothesis::constant(0.0, bound, view);
  return r;
}

double logistic_objective(const Eigen::MatrixXd& design, const Eigen::VectorXd& y,
                          const Eigen::VectorXd& weights, const Eigen::VectorXd& w,
                          double b) {
  double obj = 0.0;
  for (Eigen::Index t = 0; t < design.rows(); ++t) {
    const double s = design.row(t).dot(w) + b;
    const double p = std::clamp(1.0 / (1.0 + std::exp(-s)), kProbClamp, 1.0 - kProbClamp);
    obj -= weights(t) * (y(t) * std::log(p) + (1.0 - y(t)) * std::log(1.0 - p));
  }
  return obj;
}

void logistic_gradient(const Eigen::MatrixXd& design, const Eigen::VectorXd& y,
                       const Eigen::VectorXd& weights, const Eigen::VectorXd& w,
                       double b, Eigen::VectorXd& gw, double& gb,
                       Eigen::VectorXd* probs = nullptr) {
  gw.setZero(design.cols());
  gb = 0.0;
  for (Eigen::Index t = 0; t < design.rows(); ++t) {
    const double s = design.row(t).dot(w) + b;
    const double p = 1.0 / (1.0 + std::exp(-s));
    const double r = weights(t) * (p - y(t));
    gw += r * design.row(t).transpose();
    gb += r;
    if (probs) (*probs)(t) = p;
  }
}

void check_targets(const Eigen::VectorXd& y) {
  if (y.size() > 0 && (y.minCoeff() < 0.0 || y.maxCoeff() > 1.0))
    throw ValidationError("logistic targets must lie in [0,1]");
}

}  // namespace

void LearnerSpec::validate() const {
  if (pseudo_dimension < 1)
    throw ValidationError("pseudo_dimension must be >= 1");
  if (get("lambda", 0.0) < 0.0) throw ValidationError("lambda must be >= 0");
  if (get("l1_lambda", 0.0) < 0.0) throw ValidationError("l1_lambda must be >= 0");
  if (get("gamma", 1.0) <= 0.0) throw ValidationError("gamma must be > 0");
  if (get("tol", 1e-8) <= 0.0) throw ValidationError("tol must be > 0");
  if (get("max_iter", 500) < 1) throw ValidationError("max_iter must be >= 1");
  if (family == LearnerFamily::KernelRidge && get("lambda", 1.0) <= 0.0)
    throw ValidationError("kernel ridge requires lambda > 0");
}

double soft_threshold(double v, double threshold) {
  if (v > threshold) return v - threshold;
  if (v < -threshold) return v + threshold;
  return 0.0;
}

FitResult least_squares_fit(const Eigen::MatrixXd& design, const Eigen::VectorXd& y,
                            double ridge_lambda, FeatureView view, double bound) {
  return weighted_least_squares_fit(design, y, Eigen::VectorXd::Ones(y.size()),
                                    ridge_lambda, view, bound);
}

FitResult weighted_least_squares_fit(const Eigen::MatrixXd& design,
                                     const Eigen::VectorXd& y,
                                     const Eigen::VectorXd& weights,
                                     double ridge_lambda, FeatureView view,
                                     double bound) {
  const Eigen::Index n = design.rows();
  if (n == 0) return constant_zero(view, bound);
  const Eigen::Index p = design.cols();
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(p + 1, p + 1);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(p + 1);
  for (Eigen::Index t = 0; t < n; ++t) {
    const double wt = weights(t);
    M.topLeftCorner(p, p).noalias() +=
        wt * design.row(t).transpose() * design.row(t);
    M.topRightCorner(p, 1) += wt * design.row(t).transpose();
    M(p, p) += wt;
    rhs.head(p) += wt * y(t) * design.row(t).transpose();
    rhs(p) += wt * y(t);
  }
  M.bottomLeftCorner(1, p) = M.topRightCorner(p, 1).transpose();
  const Eigen::VectorXd sol = solve_moments(M, rhs, ridge_lambda);

  FitResult r;
  r.hypothesis = Hypothesis(LinearModel{sol.head(p), sol(p), false}, view, bound);
  double sse = 0.0;
  for (Eigen::Index t = 0; t < n; ++t) {
    const double d = design.row(t).dot(sol.head(p)) + sol(p) - y(t);
    sse += weights(t) * d * d;
  }
  r.diag.final_objective = sse + ridge_lambda * sol.head(p).squaredNorm();
  return r;
}

FitResult logistic_fit(const Eigen::MatrixXd& design, const Eigen::VectorXd& y,
                       FeatureView view, double bound, SolverConfig cfg) {
  return weighted_logistic_fit(design, y, Eigen::VectorXd::Ones(y.size()), view,
                               bound, cfg);
}

FitResult weighted_logistic_fit(const Eigen::MatrixXd& design,
                                const Eigen::VectorXd& y,
                                const Eigen::VectorXd& weights, FeatureView view,
                                double bound, SolverConfig cfg) {
  const Eigen::Index n = design.rows();
  if (n == 0) return constant_zero(view, bound);
  check_targets(y);
  const Eigen::Index p = design.cols();

  Eigen::VectorXd w = Eigen::VectorXd::Zero(p);
  double b = 0.0;
  double obj = logistic_objective(design, y, weights, w, b);
  Eigen::VectorXd gw(p), probs(n);
  double gb;

  FitDiagnostics diag;
  int iter = 0;
  for (; iter < cfg.max_iter; ++iter) {
    logistic_gradient(design, y, weights, w, b, gw, gb, &probs);
    const double gnorm = std::sqrt(gw.squaredNorm() + gb * gb);
    diag.gradient_norm = gnorm;
    if (gnorm <= cfg.tol) break;

    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(p + 1, p + 1);
    for (Eigen::Index t = 0; t < n; ++t) {
      const double v = weights(t) * probs(t) * (1.0 - probs(t));
      H.topLeftCorner(p, p).noalias() +=
          v * design.row(t).transpose() * design.row(t);
      H.topRightCorner(p, 1) += v * design.row(t).transpose();
      H(p, p) += v;
    }
    H.bottomLeftCorner(1, p) = H.topRightCorner(p, 1).transpose();
    H.diagonal().array() += 1e-10 * (1.0 + H.diagonal().maxCoeff());

    Eigen::VectorXd g(p + 1);
    g.head(p) = gw;
    g(p) = gb;
    Eigen::VectorXd step = Eigen::LDLT<Eigen::MatrixXd>(H).solve(g);

    // damped Newton: halve until the objective decreases
    double alpha = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 60; ++ls) {
      const Eigen::VectorXd wt = w - alpha * step.head(p);
      const double bt = b - alpha * step(p);
      const double cand = logistic_objective(design, y, weights, wt, bt);
      if (cand <= obj - 1e-4 * alpha * g.dot(step) || cand < obj) {
        w = wt;
        b = bt;
        obj = cand;
        moved = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!moved) break;
  }
  logistic_gradient(design, y, weights, w, b, gw, gb);
  diag.gradient_norm = std::sqrt(gw.squaredNorm() + gb * gb);
  diag.iterations = iter;
  diag.final_objective = obj;
  diag.converged = diag.gradient_norm <= cfg.tol;

  FitResult r;
  r.hypothesis = Hypothesis(LinearModel{w, b, true}, view, bound);
  r.diag = diag;
  return r;
}

FitResult l1_logistic_fit(const Eigen::MatrixXd& design, const Eigen::VectorXd& y,
                          double l1_lambda, FeatureView view, double bound,
                          SolverConfig cfg) {
  const Eigen::Index n = design.rows();
  if (n == 0) return constant_zero(view, bound);
  check_targets(y);
  if (l1_lambda < 0.0) throw ValidationError("l1_lambda must be >= 0");
  const Eigen::Index p = design.cols();
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);

  Eigen::VectorXd w = Eigen::VectorXd::Zero(p);
  double b = 0.0;
  double f = logistic_objective(design, y, ones, w, b);
  double step = 1.0;
  Eigen::VectorXd gw(p);
  double gb;

  FitDiagnostics diag;
  int iter = 0;
  for (; iter < cfg.max_iter; ++iter) {
    logistic_gradient(design, y, ones, w, b, gw, gb);
    Eigen::VectorXd wn(p);
    double bn, fn;
    // backtracking on the smooth part's quadratic model
    for (int bt = 0;; ++bt) {
      for (Eigen::Index i = 0; i < p; ++i)
        wn(i) = soft_threshold(w(i) - step * gw(i), step * l1_lambda);
      bn = b - step * gb;
      fn = logistic_objective(design, y, ones, wn, bn);
      const Eigen::VectorXd dw = wn - w;
      const double db = bn - b;
      const double quad = f + gw.dot(dw) + gb * db +
                          (dw.squaredNorm() + db * db) / (2.0 * step);
      if (fn <= quad + 1e-12 || bt >= 60) break;
      step *= 0.5;
    }
    const double move = std::sqrt((wn - w).squaredNorm() + (bn - b) * (bn - b));
    diag.gradient_norm = move / step;  // prox-gradient mapping norm
    w = wn;
    b = bn;
    f = fn;
    if (diag.gradient_norm <= cfg.tol) {
      ++iter;
      break;
    }
    step *= 1.2;
  }
  diag.iterations = iter;
  diag.final_objective = f + l1_lambda * w.lpNorm<1>();
  diag.converged = diag.gradient_norm <= cfg.tol;

  FitResult r;
  r.hypothesis = Hypothesis(LinearModel{w, b, true}, view, bound);
  r.diag = diag;
  return r;
}

FitResult kernel_ridge_fit(const Eigen::MatrixXd& design, const Eigen::VectorXd& y,
                           double gamma, double lambda, FeatureView view,
                           double bound) {
  if (gamma <= 0.0) throw ValidationError("kernel bandwidth gamma must be > 0");
  if (lambda <= 0.0) throw ValidationError("kernel ridge requires lambda > 0");
  const Eigen::Index n = design.rows();
  if (n == 0) return constant_zero(view, bound);

  Eigen::MatrixXd G(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    G(i, i) = 1.0;
    for (Eigen::Index j = 0; j < i; ++j) {
      const double d2 = (design.row(i) - design.row(j)).squaredNorm();
      G(i, j) = G(j, i) = std::exp(-gamma * d2);
    }
  }

  FitDiagnostics diag;
  Eigen::VectorXd alpha;
  double jitter = 0.0;
  for (int attempt = 0; attempt < 8; ++attempt) {
    Eigen::MatrixXd A = G;
    A.diagonal().array() += lambda + jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(A);
    if (llt.info() == Eigen::Success) {
      alpha = llt.solve(y);
      const double res = (A * alpha - y).norm();
      if (res <= 1e-8 * std::max(y.norm(), 1e-300)) {
        diag.gradient_norm = res;
        diag.jitter = jitter;
        break;
      }
    }
    jitter = jitter == 0.0 ? 1e-12 : jitter * 100.0;
    if (attempt == 7)
      throw NumericError("kernel ridge system unsolvable even with jitter");
  }
  diag.final_objective =
      (G * alpha - y).squaredNorm() + lambda * alpha.dot(G * alpha);
  diag.converged = true;

  FitResult r;
  r.hypothesis = Hypothesis(KernelExpansion{design, alpha, gamma, lambda}, view, bound);
  r.diag = diag;
  return r;
}

double penalty_value(const Hypothesis& h) {
  const KernelExpansion& k = h.kernel();
  const Eigen::Index n = k.support.rows();
  double quad = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      const double d2 = (k.support.row(i) - k.support.row(j)).squaredNorm();
      quad += k.alpha(i) * k.alpha(j) * std::exp(-k.gamma * d2);
    }
  return k.reg_lambda * quad;
}

IncrementalLeastSquares::IncrementalLeastSquares(int num_features,
                                                 double ridge_lambda,
                                                 FeatureView view, double bound)
    : moments_(Eigen::MatrixXd::Zero(num_features + 1, num_features + 1)),
      rhs_(Eigen::VectorXd::Zero(num_features + 1)),
      ridge_lambda_(ridge_lambda),
      view_(view),
      bound_(bound) {}

void IncrementalLeastSquares::add_row(const Eigen::Ref<const Eigen::VectorXd>& x,
                                      double y) {
  const Eigen::Index p = rhs_.size() - 1;
  moments_.topLeftCorner(p, p).noalias() += x * x.transpose();
  moments_.topRightCorner(p, 1) += x;
  moments_.bottomLeftCorner(1, p) += x.transpose();
  moments_(p, p) += 1.0;
  rhs_.head(p) += y * x;
  rhs_(p) += y;
  yy_ += y * y;
  ++count_;
}

void IncrementalLeastSquares::remove_row(const Eigen::Ref<const Eigen::VectorXd>& x,
                                         double y) {
  const Eigen::Index p = rhs_.size() - 1;
  moments_.topLeftCorner(p, p).noalias() -= x * x.transpose();
  moments_.topRightCorner(p, 1) -= x;
  moments_.bottomLeftCorner(1, p) -= x.transpose();
  moments_(p, p) -= 1.0;
  rhs_.head(p) -= y * x;
  rhs_(p) -= y;
  yy_ -= y * y;
  --count_;
}

void IncrementalLeastSquares::scale(double factor) {
  moments_ *= factor;
  rhs_ *= factor;
  yy_ *= factor;
}

Hypothesis IncrementalLeastSquares::solve() const {
  if (count_ == 0) return Hypothesis::constant(0.0, bound_, view_);
  const Eigen::Index p = rhs_.size() - 1;
  const Eigen::VectorXd sol = solve_moments(moments_, rhs_, ridge_lambda_);
  return Hypothesis(LinearModel{sol.head(p), sol(p), false}, view_, bound_);
}

double IncrementalLeastSquares::residual_sse() const {
  if (count_ == 0) return yy_;
  const Eigen::VectorXd sol = solve_moments(moments_, rhs_, ridge_lambda_);
  const double sse = yy_ - 2.0 * sol.dot(rhs_) + sol.dot(moments_ * sol);
  return std::max(0.0, sse);
}

FitResult fit_segment(const LearnerSpec& spec, const TimeSeriesDataset& data,
                      int begin, int end) {
  spec.validate();
  if (begin < 0 || end > data.size() || begin > end)
    throw ValidationError("segment out of range");
  const int len = end - begin;
  const int p = data.view_dim(spec.view);
  if (len == 0) return constant_zero(spec.view, data.bound);
  const Eigen::MatrixXd design = data.x.block(begin, 0, len, p);
  const Eigen::VectorXd y = data.y.segment(begin, len);
  SolverConfig cfg{spec.get("tol", 1e-8),
                   static_cast<int>(spec.get("max_iter", 500))};
  switch (spec.family) {
    case LearnerFamily::LeastSquares:
      return least_squares_fit(design, y, 0.0, spec.view, data.bound);
    case LearnerFamily::Ridge:
      return least_squares_fit(design, y, spec.get("lambda", 1.0), spec.view,
                               data.bound);
    case LearnerFamily::Logistic:
      return logistic_fit(design, y, spec.view, data.bound, cfg);
    case LearnerFamily::L1Logistic:
      return l1_logistic_fit(design, y, spec.get("l1_lambda", 1e-3), spec.view,
                             data.bound, cfg);
    case LearnerFamily::KernelRidge:
      return kernel_ridge_fit(design, y, spec.get("gamma", 1.0),
                              spec.get("lambda", 1.0), spec.view, data.bound);
  }
  throw ValidationError("unknown learner family");
}

}  // namespace cpd
