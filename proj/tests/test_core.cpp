#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "narx/json_io.hpp"
#include "narx/types.hpp"

#include <random>

using namespace narx;

TEST_CASE("time series invariants") {
  CHECK_NOTHROW(TimeSeries(Vector::Zero(3), Vector::Zero(3), 1.0));
  CHECK_THROWS_AS(TimeSeries(Vector::Zero(3), Vector::Zero(4), 1.0), std::invalid_argument);
  CHECK_THROWS_AS(TimeSeries(Vector::Zero(0), Vector::Zero(0), 1.0), std::invalid_argument);
  CHECK_THROWS_AS(TimeSeries(Vector::Zero(3), Vector::Zero(3), 0.0), std::invalid_argument);
  Vector bad = Vector::Zero(3);
  bad(1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(TimeSeries(bad, Vector::Zero(3), 1.0), std::invalid_argument);
}

TEST_CASE("arx model invariants") {
  Vector a(1), b(1);
  a << 0.5;
  b << 1.0;
  CHECK_NOTHROW(ArxModel(a, b, 0, OperatingPoint{0.0, 0.0}));
  CHECK_THROWS_AS(ArxModel(Vector(), b, 0, OperatingPoint{}), std::invalid_argument);
  CHECK_THROWS_AS(ArxModel(a, b, -1, OperatingPoint{}), std::invalid_argument);
}

TEST_CASE("feature descriptor canonical form") {
  // The same monomial with terms in different orders compares equal.
  auto f1 = FeatureDescriptor::monomial(
      {FeatureTerm{Var::Input, 1, 1}, FeatureTerm{Var::Output, 2, 1}});
  auto f2 = FeatureDescriptor::monomial(
      {FeatureTerm{Var::Output, 2, 1}, FeatureTerm{Var::Input, 1, 1}});
  CHECK(f1 == f2);
  CHECK(f1.name() == "y[k-2]*u[k-1]");

  // Repeated factors merge into one exponent.
  auto sq = FeatureDescriptor::monomial(
      {FeatureTerm{Var::Output, 1, 1}, FeatureTerm{Var::Output, 1, 1}});
  CHECK(sq == FeatureDescriptor::monomial({FeatureTerm{Var::Output, 1, 2}}));
  CHECK(sq.degree() == 2);
  CHECK(sq.name() == "y[k-1]^2");

  CHECK(FeatureDescriptor::constant().is_constant());
  CHECK(FeatureDescriptor::constant().name() == "1");
  CHECK(FeatureDescriptor::constant().degree() == 0);
  CHECK_THROWS_AS(FeatureDescriptor::monomial({FeatureTerm{Var::Output, 0, 1}}),
                  std::invalid_argument);

  auto prod = FeatureDescriptor::linear(Var::Output, 1) * FeatureDescriptor::linear(Var::Input, 1);
  CHECK(prod.name() == "y[k-1]*u[k-1]");
  CHECK(prod * FeatureDescriptor::constant() == prod);
}

TEST_CASE("p-narx model invariants") {
  std::vector<FeatureDescriptor> feats{FeatureDescriptor::constant(),
                                       FeatureDescriptor::linear(Var::Output, 1)};
  Vector beta(2);
  beta << 0.1, 0.9;
  CHECK_NOTHROW(PNarxModel(feats, beta, 1, 1));

  // Duplicate features rejected.
  std::vector<FeatureDescriptor> dup{FeatureDescriptor::linear(Var::Output, 1),
                                     FeatureDescriptor::linear(Var::Output, 1)};
  CHECK_THROWS_AS(PNarxModel(dup, beta, 1, 1), std::invalid_argument);

  // Lags must stay within the declared orders.
  std::vector<FeatureDescriptor> deep{FeatureDescriptor::constant(),
                                      FeatureDescriptor::linear(Var::Output, 3)};
  CHECK_THROWS_AS(PNarxModel(deep, beta, 2, 2), std::invalid_argument);
}

TEST_CASE("fusion config validation") {
  FusionConfig config;
  CHECK_NOTHROW(config.validate());
  config.gamma = 1.0;
  CHECK_THROWS_AS(config.validate(), std::invalid_argument);
  config.gamma = 0.0;
  CHECK_THROWS_AS(config.validate(), std::invalid_argument);
  config.gamma = 0.5;
  config.cv_folds = 1;
  CHECK_THROWS_AS(config.validate(), std::invalid_argument);
}

TEST_CASE("json round trips") {
  std::mt19937 rng(7);
  std::normal_distribution<double> dist(0.0, 1.0);

  for (int trial = 0; trial < 20; ++trial) {
    Vector a = Vector::NullaryExpr(2, [&](Index) { return dist(rng); });
    Vector b = Vector::NullaryExpr(3, [&](Index) { return dist(rng); });
    ArxModel model(a, b, trial % 3, OperatingPoint{dist(rng), dist(rng)});
    ArxModel back = io::arx_from_json(io::serialize(model));
    CHECK(back.a() == model.a());
    CHECK(back.b() == model.b());
    CHECK(back.delay() == model.delay());
    CHECK(back.op() == model.op());
  }

  std::vector<FeatureDescriptor> feats{
      FeatureDescriptor::constant(), FeatureDescriptor::linear(Var::Output, 1),
      FeatureDescriptor::monomial({FeatureTerm{Var::Output, 2, 2}}),
      FeatureDescriptor::monomial({FeatureTerm{Var::Output, 1, 1}, FeatureTerm{Var::Input, 3, 1}})};
  Vector beta(4);
  beta << -0.25, 0.5, 1.0 / 3.0, 1e-7;
  PNarxModel pnarx(feats, beta, 3, 3);
  PNarxModel pback = io::pnarx_from_json(io::serialize(pnarx));
  CHECK(pback.features() == pnarx.features());
  CHECK(pback.coefficients() == pnarx.coefficients());
  CHECK(pback.n_y() == pnarx.n_y());
  CHECK(pback.n_u() == pnarx.n_u());

  FusionConfig config;
  config.gamma = 0.75;
  config.seed = 42;
  config.lambda_grid.count = 50;
  FusionConfig cback = io::config_from_json(io::serialize(config));
  CHECK(cback == config);

  // "auto" lambda grid resolves to the defaults.
  io::json j = io::serialize(config);
  j["lambda_grid"] = "auto";
  CHECK(io::config_from_json(j).lambda_grid == LambdaGridSpec{});

  TimeSeries ts(Vector::NullaryExpr(5, [&](Index) { return dist(rng); }),
                Vector::NullaryExpr(5, [&](Index) { return dist(rng); }), 0.5);
  TimeSeries tback = io::timeseries_from_json(io::serialize(ts));
  CHECK(tback.u() == ts.u());
  CHECK(tback.y() == ts.y());
  CHECK(tback.dt() == ts.dt());
}

TEST_CASE("timeseries csv round trip") {
  Vector u(3), y(3);
  u << 0.1, 0.2, 0.30000000000001;
  y << 1.0, -2.5, 3.14159265358979;
  TimeSeries ts(u, y, 1.0);
  const std::string path = "test_core_ts.csv";
  io::write_timeseries_csv(path, ts);
  TimeSeries back = io::read_timeseries_csv(path, 1.0);
  CHECK(back.size() == ts.size());
  for (Index k = 0; k < ts.size(); ++k) {
    CHECK(back.u()(k) == doctest::Approx(ts.u()(k)).epsilon(1e-11));
    CHECK(back.y()(k) == doctest::Approx(ts.y()(k)).epsilon(1e-11));
  }
}
