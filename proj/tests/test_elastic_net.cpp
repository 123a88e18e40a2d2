#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "narx/elastic_net.hpp"
#include "narx/lifting.hpp"

#include <cmath>
#include <random>
#include <set>

using namespace narx;
using namespace narx::sparse;

namespace {

struct Instance {
  Vector Y;
  Matrix Z;
};

// Random dense instance; column 0 is an intercept column of ones.
Instance random_instance(Index n, Index p, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  Instance inst;
  inst.Z.resize(n, p);
  inst.Z.col(0).setOnes();
  for (Index j = 1; j < p; ++j) {
    for (Index i = 0; i < n; ++i) inst.Z(i, j) = dist(rng);
  }
  inst.Y = Vector::NullaryExpr(n, [&](Index) { return dist(rng); });
  return inst;
}

double soft(double x, double t) { return x > t ? x - t : (x < -t ? x + t : 0.0); }

// Optimality conditions checked from scratch: for every penalized column the
// converged coefficient must be a fixed point of the exact one-dimensional
// minimizer.
double kkt_violation(const Vector& Y, const Matrix& Z, const ElasticNetFit& fit,
                     int intercept_column) {
  const Vector r = Y - Z * fit.beta;
  double worst = 0.0;
  for (Index j = 0; j < Z.cols(); ++j) {
    const double c = Z.col(j).squaredNorm();
    if (c <= 0.0) continue;
    const double rho = Z.col(j).dot(r) + c * fit.beta(j);
    double target;
    if (j == intercept_column) {
      target = rho / c;
    } else {
      target = soft(rho, fit.lambda * fit.gamma) / (c + fit.lambda * (1.0 - fit.gamma));
    }
    worst = std::max(worst, std::abs(target - fit.beta(j)));
  }
  return worst;
}

}  // namespace

TEST_CASE("standardize: population convention") {
  Matrix Z(3, 2);
  Z.col(0).setOnes();
  Z.col(1) << 1.0, 2.0, 3.0;
  Standardization s = standardize(Z);
  CHECK(s.mean(1) == doctest::Approx(2.0));
  CHECK(s.scale(1) == doctest::Approx(std::sqrt(2.0 / 3.0)).epsilon(1e-12));
  CHECK(s.Z_std(0, 1) == doctest::Approx(-1.224744871391589).epsilon(1e-12));
  CHECK(s.Z_std(1, 1) == doctest::Approx(0.0));
  CHECK(s.Z_std(2, 1) == doctest::Approx(1.224744871391589).epsilon(1e-12));
  CHECK((s.Z_std.col(0).array() == 1.0).all());
  CHECK_FALSE(s.excluded[1]);
}

TEST_CASE("standardize: idempotent on standardized columns") {
  Instance inst = random_instance(50, 4, 1);
  Standardization first = standardize(inst.Z);
  Standardization second = standardize(first.Z_std);
  CHECK((second.Z_std - first.Z_std).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("standardize: constant columns are flagged and excluded") {
  Matrix Z(4, 3);
  Z.col(0).setOnes();
  Z.col(1) << 1, 2, 3, 4;
  Z.col(2).setConstant(7.0);
  Standardization s = standardize(Z);
  CHECK(s.excluded[2]);
  CHECK_FALSE(s.excluded[1]);
  CHECK((s.Z_std.col(2).array() == 0.0).all());
}

TEST_CASE("coordinate descent at lambda = 0 matches least squares") {
  Instance inst = random_instance(40, 6, 2);
  ElasticNetFit fit = coordinate_descent(inst.Y, inst.Z, 0.0, 0.5);
  REQUIRE(fit.converged);
  Vector ols = inst.Z.colPivHouseholderQr().solve(inst.Y);
  CHECK((fit.beta - ols).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("coordinate descent at tiny gamma matches closed-form ridge") {
  Instance inst = random_instance(50, 5, 3);
  const double lambda = 3.7;
  const double gamma = 1e-6;
  SolverOptions opts;
  opts.intercept_column = -1;  // penalize everything for a clean closed form
  ElasticNetFit fit = coordinate_descent(inst.Y, inst.Z, lambda, gamma, opts);
  REQUIRE(fit.converged);

  Matrix ridge_lhs = inst.Z.transpose() * inst.Z;
  ridge_lhs.diagonal().array() += lambda * (1.0 - gamma);
  Vector ridge = ridge_lhs.ldlt().solve(inst.Z.transpose() * inst.Y);
  CHECK((fit.beta - ridge).cwiseAbs().maxCoeff() < 1e-4);
}

TEST_CASE("coordinate descent: one-dimensional closed form") {
  // Single orthonormal column: beta = S(rho, lambda gamma) / (1 + lambda (1 - gamma)).
  const Index n = 16;
  Matrix Z(n, 1);
  Z.setOnes();
  Z /= Z.col(0).norm();  // unit norm
  std::mt19937 rng(5);
  std::normal_distribution<double> dist(0.0, 1.0);
  Vector Y = Vector::NullaryExpr(n, [&](Index) { return dist(rng); });
  const double rho = Z.col(0).dot(Y);

  SolverOptions opts;
  opts.intercept_column = -1;
  for (double lambda : {0.0, 0.1, 0.5, 2.0}) {
    for (double gamma : {0.25, 0.5, 0.9}) {
      ElasticNetFit fit = coordinate_descent(Y, Z, lambda, gamma, opts);
      const double expected = soft(rho, lambda * gamma) / (1.0 + lambda * (1.0 - gamma));
      CHECK(std::abs(fit.beta(0) - expected) < 1e-12);
    }
  }
}

TEST_CASE("objective is non-increasing sweep by sweep") {
  Instance inst = random_instance(60, 8, 7);
  Standardization s = standardize(inst.Z);
  const double lambda = 5.0;
  const double gamma = 0.5;

  SolverOptions one_sweep;
  one_sweep.max_sweeps = 1;
  Vector beta = Vector::Zero(inst.Z.cols());
  double prev = elastic_net_objective(inst.Y, s.Z_std, beta, lambda, gamma);
  for (int sweep = 0; sweep < 40; ++sweep) {
    ElasticNetFit fit =
        coordinate_descent(inst.Y, s.Z_std, lambda, gamma, one_sweep, &beta, &s.excluded);
    beta = fit.beta;
    const double now = elastic_net_objective(inst.Y, s.Z_std, beta, lambda, gamma);
    CHECK(now <= prev + 1e-9 * std::abs(prev));
    prev = now;
  }
}

TEST_CASE("kkt conditions hold at convergence") {
  for (unsigned seed = 0; seed < 20; ++seed) {
    Instance inst = random_instance(30 + seed % 21, 4 + seed % 7, 100 + seed);
    Standardization s = standardize(inst.Z);
    Vector grid = lambda_path(inst.Y, s.Z_std, 0.5, 5, 3.0, 0, &s.excluded);
    SolverOptions opts;
    Vector warm = Vector::Zero(inst.Z.cols());
    for (Index gi = 0; gi < grid.size(); ++gi) {
      ElasticNetFit fit =
          coordinate_descent(inst.Y, s.Z_std, grid(gi), 0.5, opts, &warm, &s.excluded);
      warm = fit.beta;
      REQUIRE(fit.converged);
      CHECK(kkt_violation(inst.Y, s.Z_std, fit, 0) <= 10.0 * opts.tol);
    }
  }
}

TEST_CASE("lambda_path endpoints and scaling") {
  Instance inst = random_instance(40, 6, 11);
  Standardization s = standardize(inst.Z);
  const double gamma = 0.5;

  Vector grid = lambda_path(inst.Y, s.Z_std, gamma, 2, 4.0, 0, &s.excluded);
  REQUIRE(grid.size() == 2);
  CHECK(grid(1) == doctest::Approx(grid(0) * 1e-4).epsilon(1e-12));

  // At lambda_max every penalized coefficient is zero (up to the float noise
  // the intercept update injects through imperfect column centering).
  ElasticNetFit fit = coordinate_descent(inst.Y, s.Z_std, grid(0), gamma, {}, nullptr,
                                         &s.excluded);
  REQUIRE(fit.converged);
  CHECK(fit.beta.tail(fit.beta.size() - 1).cwiseAbs().maxCoeff() < 1e-12);

  // Doubling Y doubles lambda_max.
  Vector doubled = lambda_path(2.0 * inst.Y, s.Z_std, gamma, 2, 4.0, 0, &s.excluded);
  CHECK(doubled(0) == doctest::Approx(2.0 * grid(0)).epsilon(1e-12));

  // Degenerate all-zero target collapses to a single zero.
  Vector none = lambda_path(Vector::Zero(40), s.Z_std, gamma, 5, 4.0, 0, &s.excluded);
  REQUIRE(none.size() == 1);
  CHECK(none(0) == 0.0);
}

namespace {

// Two-block problem whose target is an exact sparse combination of columns.
lift::RegressionProblem realizable_problem(Index rows_per_block, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  lift::RegressionProblem problem;
  const Index p = 6;
  problem.Z.resize(2 * rows_per_block, p);
  problem.Z.col(0).setOnes();
  for (Index j = 1; j < p; ++j) {
    for (Index i = 0; i < 2 * rows_per_block; ++i) problem.Z(i, j) = dist(rng);
  }
  problem.Y = (2.0 * problem.Z.col(1) - 1.5 * problem.Z.col(3)).array() + 0.5;
  problem.descriptors.push_back(FeatureDescriptor::constant());
  for (int j = 1; j < p; ++j) {
    problem.descriptors.push_back(FeatureDescriptor::linear(Var::Output, j));
  }
  for (Index i = 0; i < 2 * rows_per_block; ++i) {
    problem.op_index.push_back(i < rows_per_block ? 0 : 1);
  }
  return problem;
}

}  // namespace

TEST_CASE("cross_validate: realizable target reaches near-zero error") {
  lift::RegressionProblem problem = realizable_problem(60, 13);
  Standardization s = standardize(problem.Z);
  // Deep grid: on noise-free realizable data CV error keeps falling with
  // lambda, so the reachable floor is set by the smallest grid point.
  Vector grid = lambda_path(problem.Y, s.Z_std, 0.5, 30, 8.0, 0, &s.excluded);
  CvReport report = cross_validate(problem, 0.5, 3, grid);

  CHECK(report.lambda_grid.size() == grid.size());
  CHECK(report.mean_mse.size() == grid.size());
  Index chosen = -1;
  for (Index gi = 0; gi < grid.size(); ++gi) {
    if (grid(gi) == report.chosen_lambda) chosen = gi;
  }
  REQUIRE(chosen >= 0);  // the chosen lambda is a member of the grid
  CHECK(report.mean_mse(chosen) == report.mean_mse.minCoeff());
  CHECK(report.mean_mse(chosen) < 1e-8);
}

TEST_CASE("cross_validate: fold arithmetic and errors") {
  lift::RegressionProblem problem = realizable_problem(10, 19);  // 10 rows per block
  Standardization s = standardize(problem.Z);
  Vector grid = lambda_path(problem.Y, s.Z_std, 0.5, 5, 4.0, 0, &s.excluded);
  CvReport report = cross_validate(problem, 0.5, 2, grid);
  CHECK(report.fold_mse.rows() == 2);
  CHECK(report.fold_assignment.find("2 contiguous folds") != std::string::npos);

  CHECK_THROWS_AS(cross_validate(problem, 0.5, 11, grid), Error);  // fold with zero rows
  CHECK_NOTHROW(write_cv_csv(report, "test_cv_curve.csv"));
}

TEST_CASE("select_features") {
  std::vector<FeatureDescriptor> descriptors{FeatureDescriptor::constant(),
                                             FeatureDescriptor::linear(Var::Output, 1),
                                             FeatureDescriptor::linear(Var::Input, 1)};
  ElasticNetFit fit;
  fit.beta = (Vector(3) << 1.0, 0.0, 0.0).finished();
  fit.converged = true;

  CHECK_THROWS_AS(select_features(fit, descriptors, 1e-6), EmptySelectionError);

  fit.beta << 1.0, 0.5, -1e-9;
  Selection loose = select_features(fit, descriptors, 0.0);
  CHECK(loose.indices == std::vector<int>{0, 1, 2});  // epsilon 0 keeps all nonzero

  Selection tight = select_features(fit, descriptors, 1e-6);
  CHECK(tight.indices == std::vector<int>{0, 1});
  CHECK(tight.features[1].name() == "y[k-1]");

  fit.converged = false;
  CHECK_THROWS_AS(select_features(fit, descriptors, 0.0), Error);
}

TEST_CASE("refit_ols") {
  std::mt19937 rng(23);
  std::normal_distribution<double> dist(0.0, 1.0);
  Vector z = Vector::NullaryExpr(30, [&](Index) { return dist(rng); });
  Matrix Z(30, 1);
  Z.col(0) = z;
  OlsFit fit = refit_ols(3.0 * z, Z);
  CHECK(fit.beta(0) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(fit.residual_norm < 1e-12);

  Matrix dup(30, 2);
  dup.col(0) = z;
  dup.col(1) = z;
  CHECK_THROWS_AS(refit_ols(3.0 * z, dup), RankDeficiencyError);
}

TEST_CASE("selection is invariant to positive column rescaling") {
  lift::RegressionProblem problem = realizable_problem(50, 29);
  auto run = [&](const Matrix& Z) {
    Standardization s = standardize(Z);
    Vector grid = lambda_path(problem.Y, s.Z_std, 0.5, 20, 4.0, 0, &s.excluded);
    Vector warm = Vector::Zero(Z.cols());
    ElasticNetFit fit;
    for (Index gi = 0; gi < grid.size(); ++gi) {
      fit = coordinate_descent(problem.Y, s.Z_std, grid(gi), 0.5, {}, &warm, &s.excluded);
      warm = fit.beta;
    }
    Selection sel = select_features(fit, problem.descriptors, 1e-6, &s.excluded);
    return sel.indices;
  };

  std::vector<int> base = run(problem.Z);
  Matrix scaled = problem.Z;
  scaled.col(1) *= 7.3;
  scaled.col(4) *= 0.002;
  CHECK(run(scaled) == base);
}

TEST_CASE("refit dominance over the shrunken coefficients") {
  lift::RegressionProblem problem = realizable_problem(40, 31);
  // Perturb the target so the regression is not exactly realizable.
  std::mt19937 rng(37);
  std::normal_distribution<double> noise(0.0, 0.05);
  for (Index i = 0; i < problem.Y.size(); ++i) problem.Y(i) += noise(rng);

  Standardization s = standardize(problem.Z);
  Vector grid = lambda_path(problem.Y, s.Z_std, 0.5, 20, 2.0, 0, &s.excluded);
  Vector warm = Vector::Zero(problem.Z.cols());
  ElasticNetFit fit;
  for (Index gi = 0; gi < grid.size() / 2; ++gi) {
    fit = coordinate_descent(problem.Y, s.Z_std, grid(gi), 0.5, {}, &warm, &s.excluded);
    warm = fit.beta;
  }
  Selection sel = select_features(fit, problem.descriptors, 1e-6, &s.excluded);

  // Shrunken coefficients mapped back to raw coordinates on the same support.
  Vector beta_raw = Vector::Zero(static_cast<Index>(sel.indices.size()));
  double intercept = fit.beta(0);
  for (std::size_t c = 1; c < sel.indices.size(); ++c) {
    const Index j = sel.indices[c];
    beta_raw(static_cast<Index>(c)) = fit.beta(j) / s.scale(j);
    intercept -= fit.beta(j) * s.mean(j) / s.scale(j);
  }
  beta_raw(0) = intercept;

  Matrix Z_sel(problem.Z.rows(), static_cast<Index>(sel.indices.size()));
  for (std::size_t c = 0; c < sel.indices.size(); ++c) {
    Z_sel.col(static_cast<Index>(c)) = problem.Z.col(sel.indices[c]);
  }
  OlsFit refit = refit_ols(problem.Y, Z_sel);
  const double rss_refit = (problem.Y - Z_sel * refit.beta).squaredNorm();
  const double rss_shrunk = (problem.Y - Z_sel * beta_raw).squaredNorm();
  CHECK(rss_refit <= rss_shrunk + 1e-9 * rss_shrunk);
}
