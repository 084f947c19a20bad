#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "cpd/dataset.hpp"
#include "cpd/risk.hpp"
#include "test_util.hpp"

using cpd::FeatureView;
using cpd::Hypothesis;
using cpd::LinearModel;
using cpd::TimeSeriesDataset;

TEST_CASE("dataset validation rejects malformed inputs") {
  auto data = testutil::random_dataset(10, 2, 1, 1);
  CHECK_NOTHROW(data.validate());

  auto bad = data;
  bad.y(3) = 2.5;  // beyond bound
  CHECK_THROWS_AS(bad.validate(), cpd::ValidationError);

  bad = data;
  bad.x(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(bad.validate(), cpd::ValidationError);

  bad = data;
  bad.old_features = 0;
  CHECK_THROWS_AS(bad.validate(), cpd::ValidationError);

  bad = data;
  bad.bound = 0.5;
  CHECK_THROWS_AS(bad.validate(), cpd::ValidationError);

  bad = data;
  bad.eta = Eigen::VectorXd::Zero(7);  // wrong length
  CHECK_THROWS_AS(bad.validate(), cpd::ValidationError);

  bad = data;
  bad.y.resize(0);
  CHECK_THROWS_AS(bad.validate(), cpd::ValidationError);
}

TEST_CASE("minmax normalization maps responses into [0,1]") {
  auto data = testutil::random_dataset(50, 2, 0, 2, 3.0);
  data.eta = data.y;
  const double lo = data.y.minCoeff(), hi = data.y.maxCoeff();
  const auto n = cpd::minmax_normalize(data);
  CHECK(n.offset == doctest::Approx(lo));
  CHECK(n.scale == doctest::Approx(hi - lo));
  CHECK(data.y.minCoeff() == doctest::Approx(0.0));
  CHECK(data.y.maxCoeff() == doctest::Approx(1.0));
  // eta transformed identically
  CHECK((*data.eta - data.y).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
  // round trip
  Eigen::VectorXd back = data.y.array() * n.scale + n.offset;
  CHECK(back.minCoeff() == doctest::Approx(lo));
  CHECK(back.maxCoeff() == doctest::Approx(hi));
}

TEST_CASE("constant responses normalize to 0.5") {
  auto data = testutil::random_dataset(10, 1, 0, 4);
  data.y.setConstant(0.37);
  cpd::minmax_normalize(data);
  CHECK(data.y.minCoeff() == doctest::Approx(0.5));
  CHECK(data.y.maxCoeff() == doctest::Approx(0.5));
}

TEST_CASE("hypothesis predict respects view, sigmoid, and clipping") {
  Eigen::VectorXd x(3);
  x << 0.5, -1.0, 2.0;

  LinearModel lin;
  lin.weights = Eigen::VectorXd(2);
  lin.weights << 1.0, 2.0;
  lin.intercept = 0.25;
  Hypothesis h_old(lin, FeatureView::OldOnly, 1.0);
  // sees only the first 2 of 3 columns: 0.5*1 + (-1)*2 + 0.25 = -1.25 -> clip
  CHECK(h_old.predict(x, 2) == doctest::Approx(-1.0));

  LinearModel all;
  all.weights = Eigen::VectorXd(3);
  all.weights << 0.1, 0.1, 0.1;
  all.intercept = 0.0;
  Hypothesis h_all(all, FeatureView::All, 1.0);
  CHECK(h_all.predict(x, 2) == doctest::Approx(0.15));

  LinearModel sig = all;
  sig.sigmoid = true;
  Hypothesis h_sig(sig, FeatureView::All, 1.0);
  CHECK(h_sig.predict(x, 2) == doctest::Approx(1.0 / (1.0 + std::exp(-0.15))));

  // constant predictor ignores features entirely
  const auto c = Hypothesis::constant(0.7, 1.0);
  CHECK(c.predict(x, 2) == doctest::Approx(0.7));

  // dimension mismatch is an error, not silent truncation
  LinearModel wrong;
  wrong.weights = Eigen::VectorXd::Ones(5);
  Hypothesis h_wrong(wrong, FeatureView::All, 1.0);
  CHECK_THROWS_AS(h_wrong.predict(x, 2), cpd::ValidationError);
}

TEST_CASE("empirical risk matches a hand computation") {
  TimeSeriesDataset data;
  data.x = Eigen::MatrixXd::Zero(4, 1);
  data.y.resize(4);
  data.y << 0.0, 0.2, 0.4, 0.8;
  data.old_features = 1;
  data.bound = 1.0;

  const auto h1 = Hypothesis::constant(0.1, 1.0, FeatureView::OldOnly);
  const auto h2 = Hypothesis::constant(0.6, 1.0);

  // t0 = 3: rows 1,2 under h1; rows 3,4 under h2
  const double expect = (0.01 + 0.01 + 0.04 + 0.04) / 4.0;
  CHECK(cpd::empirical_risk(data, h1, h2, 3) == doctest::Approx(expect));
  // t0 = 1: everything under h2
  const double all_h2 = (0.36 + 0.16 + 0.04 + 0.04) / 4.0;
  CHECK(cpd::empirical_risk(data, h1, h2, 1) == doctest::Approx(all_h2));
  // t0 = m+1: everything under h1
  const double all_h1 = (0.01 + 0.01 + 0.09 + 0.49) / 4.0;
  CHECK(cpd::empirical_risk(data, h1, h2, 5) == doctest::Approx(all_h1));
  // out of range t0 rejected
  CHECK_THROWS_AS(cpd::empirical_risk(data, h1, h2, 0), cpd::ValidationError);
  CHECK_THROWS_AS(cpd::empirical_risk(data, h1, h2, 6), cpd::ValidationError);
}

TEST_CASE("true risk uses eta in place of y") {
  auto data = testutil::random_dataset(6, 1, 0, 9);
  data.eta = Eigen::VectorXd::Constant(6, 0.3);
  const auto h1 = Hypothesis::constant(0.3, 1.0, FeatureView::OldOnly);
  const auto h2 = Hypothesis::constant(0.0, 1.0);
  CHECK(cpd::true_risk(data, h1, h2, 7) == doctest::Approx(0.0));
  CHECK(cpd::true_risk(data, h1, h2, 4) == doctest::Approx(3 * 0.09 / 6.0));

  data.eta.reset();
  CHECK_THROWS_AS(cpd::true_risk(data, h1, h2, 4), cpd::ValidationError);
}

TEST_CASE("multi-change risk reduces to the single-split risk at K=1") {
  auto data = testutil::random_dataset(12, 2, 1, 11);
  const auto h1 = Hypothesis::constant(0.2, 1.0, FeatureView::OldOnly);
  const auto h2 = Hypothesis::constant(-0.1, 1.0);
  for (int t0 = 1; t0 <= 13; ++t0) {
    // boundary convention: segment 1 ends at t0-1 (rows 1..t0-1)
    const double multi = cpd::multi_empirical_risk(data, {h1, h2}, {t0 - 1});
    CHECK(multi == doctest::Approx(cpd::empirical_risk(data, h1, h2, t0)));
  }
  CHECK_THROWS_AS(cpd::multi_empirical_risk(data, {h1, h2}, {13}),
                  cpd::ValidationError);
  CHECK_THROWS_AS(cpd::multi_empirical_risk(data, {h1, h2}, {5, 3}),
                  cpd::ValidationError);
  CHECK_THROWS_AS(cpd::multi_empirical_risk(data, {h1}, {5}),
                  cpd::ValidationError);
}

TEST_CASE("timeline errors sum to m times the risk") {
  auto data = testutil::random_dataset(20, 2, 1, 13);
  cpd::SplitModel model;
  model.h1 = Hypothesis::constant(0.15, 1.0, FeatureView::OldOnly);
  model.h2 = Hypothesis::constant(-0.25, 1.0);
  model.t_hat = 8;
  const Eigen::VectorXd tl = cpd::predict_timeline(data, model);
  REQUIRE(tl.size() == 20);
  CHECK(tl.sum() / 20.0 ==
        doctest::Approx(cpd::empirical_risk(data, model.h1, model.h2, 8))
            .epsilon(1e-12));

  cpd::MultiSplitModel mm;
  mm.hypotheses = {model.h1, model.h2, Hypothesis::constant(0.0, 1.0)};
  mm.change_times = {5, 12};
  const Eigen::VectorXd tl2 = cpd::predict_timeline(data, mm);
  CHECK(tl2.sum() / 20.0 ==
        doctest::Approx(cpd::multi_empirical_risk(data, mm.hypotheses,
                                                  mm.change_times))
            .epsilon(1e-12));
}
