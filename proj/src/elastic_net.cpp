#include "narx/elastic_net.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

namespace narx::sparse {

namespace {

double soft_threshold(double x, double t) {
  if (x > t) return x - t;
  if (x < -t) return x + t;
  return 0.0;
}

std::string format_g12(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

bool is_excluded(const std::vector<bool>* excluded, Index j) {
  return excluded && (*excluded)[static_cast<std::size_t>(j)];
}

// Contiguous [begin, end) row ranges of each operating-point block.
std::vector<std::pair<Index, Index>> block_ranges(const std::vector<int>& op_index) {
  std::vector<std::pair<Index, Index>> ranges;
  Index begin = 0;
  for (Index r = 1; r <= static_cast<Index>(op_index.size()); ++r) {
    if (r == static_cast<Index>(op_index.size()) ||
        op_index[static_cast<std::size_t>(r)] != op_index[static_cast<std::size_t>(begin)]) {
      ranges.emplace_back(begin, r);
      begin = r;
    }
  }
  return ranges;
}

}  // namespace

Standardization standardize(const Matrix& Z) {
  const Index n = Z.rows();
  const Index p = Z.cols();
  if (n < 1 || p < 1) throw std::invalid_argument("standardize: empty matrix");

  Standardization s;
  s.Z_std = Z;
  s.mean = Vector::Zero(p);
  s.scale = Vector::Ones(p);
  s.excluded.assign(static_cast<std::size_t>(p), false);

  for (Index j = 1; j < p; ++j) {
    const double mean = Z.col(j).mean();
    const double var = (Z.col(j).array() - mean).square().sum() / static_cast<double>(n);
    s.mean(j) = mean;
    if (var > 0.0) {
      s.scale(j) = std::sqrt(var);
      s.Z_std.col(j) = (Z.col(j).array() - mean) / s.scale(j);
    } else {
      // Constant column: center to zero, flag, and keep scale 1 so the
      // transform stays invertible.
      s.Z_std.col(j).setZero();
      s.excluded[static_cast<std::size_t>(j)] = true;
    }
  }
  return s;
}

ElasticNetFit coordinate_descent(const Vector& Y, const Matrix& Z, double lambda, double gamma,
                                 const SolverOptions& opts, const Vector* warm_start,
                                 const std::vector<bool>* excluded) {
  const Index n = Z.rows();
  const Index p = Z.cols();
  if (Y.size() != n) throw std::invalid_argument("coordinate_descent: Y/Z row mismatch");
  if (lambda < 0.0) throw std::invalid_argument("coordinate_descent: lambda must be >= 0");
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw std::invalid_argument("coordinate_descent: gamma must lie strictly inside (0,1)");
  }
  if (excluded && static_cast<Index>(excluded->size()) != p) {
    throw std::invalid_argument("coordinate_descent: excluded mask size mismatch");
  }
  if (warm_start && warm_start->size() != p) {
    throw std::invalid_argument("coordinate_descent: warm start size mismatch");
  }

  // Gram formulation: per-coordinate work is O(p) regardless of n.
  const Matrix G = Z.transpose() * Z;
  const Vector b = Z.transpose() * Y;
  const Vector c = G.diagonal();

  ElasticNetFit fit;
  fit.lambda = lambda;
  fit.gamma = gamma;
  fit.beta = warm_start ? *warm_start : Vector::Zero(p);

  Vector g = G * fit.beta;  // maintained G * beta
  const double l1 = lambda * gamma;
  const double l2 = lambda * (1.0 - gamma);

  for (int sweep = 1; sweep <= opts.max_sweeps; ++sweep) {
    double max_delta = 0.0;
    for (Index j = 0; j < p; ++j) {
      if (is_excluded(excluded, j) || c(j) <= 0.0) continue;
      const double rho = b(j) - g(j) + c(j) * fit.beta(j);
      const bool penalized = (j != opts.intercept_column);
      const double updated =
          penalized ? soft_threshold(rho, l1) / (c(j) + l2) : rho / c(j);
      if (!std::isfinite(updated)) {
        throw Error("coordinate_descent: non-finite update in column " + std::to_string(j));
      }
      const double delta = updated - fit.beta(j);
      if (delta != 0.0) {
        g += G.col(j) * delta;
        fit.beta(j) = updated;
        max_delta = std::max(max_delta, std::abs(delta));
      }
    }
    fit.n_iter = sweep;
    if (max_delta < opts.tol) {
      fit.converged = true;
      break;
    }
  }
  return fit;
}

double elastic_net_objective(const Vector& Y, const Matrix& Z, const Vector& beta,
                             double lambda, double gamma, int intercept_column,
                             const std::vector<bool>* excluded) {
  double l1 = 0.0;
  double l2 = 0.0;
  for (Index j = 0; j < beta.size(); ++j) {
    if (j == intercept_column || is_excluded(excluded, j)) continue;
    l1 += std::abs(beta(j));
    l2 += beta(j) * beta(j);
  }
  const double rss = (Y - Z * beta).squaredNorm();
  return 0.5 * rss + lambda * (gamma * l1 + 0.5 * (1.0 - gamma) * l2);
}

Vector lambda_path(const Vector& Y, const Matrix& Z, double gamma, int grid_size,
                   double decades, int intercept_column, const std::vector<bool>* excluded) {
  if (grid_size < 2) throw std::invalid_argument("lambda_path: grid size must be >= 2");
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw std::invalid_argument("lambda_path: gamma must lie strictly inside (0,1)");
  }
  double lambda_max = 0.0;
  for (Index j = 0; j < Z.cols(); ++j) {
    if (j == intercept_column || is_excluded(excluded, j)) continue;
    lambda_max = std::max(lambda_max, std::abs(Z.col(j).dot(Y)));
  }
  lambda_max /= gamma;
  if (lambda_max <= 0.0) {
    return Vector::Constant(1, 0.0);
  }
  Vector grid(grid_size);
  for (int i = 0; i < grid_size; ++i) {
    grid(i) = lambda_max * std::pow(10.0, -decades * static_cast<double>(i) /
                                              static_cast<double>(grid_size - 1));
  }
  return grid;
}

CvReport cross_validate(const lift::RegressionProblem& problem, double gamma, int folds,
                        const Vector& grid, const SolverOptions& opts) {
  if (folds < 2) throw std::invalid_argument("cross_validate: need k >= 2 folds");
  if (grid.size() < 1) throw std::invalid_argument("cross_validate: empty lambda grid");
  const Index n = problem.Y.size();
  const Index p = problem.Z.cols();
  if (n < 1 || static_cast<Index>(problem.op_index.size()) != n) {
    throw std::invalid_argument("cross_validate: malformed problem");
  }

  const auto ranges = block_ranges(problem.op_index);

  // Per-block contiguous slices; fold f takes slice f of every block.
  std::vector<std::vector<Index>> fold_rows(static_cast<std::size_t>(folds));
  for (const auto& [begin, end] : ranges) {
    const Index len = end - begin;
    if (len < folds) throw Error("cross_validate: fold with zero rows (block too short)");
    for (int f = 0; f < folds; ++f) {
      const Index lo = begin + len * f / folds;
      const Index hi = begin + len * (f + 1) / folds;
      for (Index r = lo; r < hi; ++r) fold_rows[static_cast<std::size_t>(f)].push_back(r);
    }
  }

  CvReport report;
  report.lambda_grid = grid;
  report.fold_mse.resize(folds, grid.size());

  for (int f = 0; f < folds; ++f) {
    const auto& test_rows = fold_rows[static_cast<std::size_t>(f)];
    std::vector<bool> in_test(static_cast<std::size_t>(n), false);
    for (Index r : test_rows) in_test[static_cast<std::size_t>(r)] = true;

    const Index n_test = static_cast<Index>(test_rows.size());
    const Index n_train = n - n_test;
    Matrix Z_train(n_train, p), Z_test(n_test, p);
    Vector Y_train(n_train), Y_test(n_test);
    Index it = 0, iv = 0;
    for (Index r = 0; r < n; ++r) {
      if (in_test[static_cast<std::size_t>(r)]) {
        Z_test.row(iv) = problem.Z.row(r);
        Y_test(iv++) = problem.Y(r);
      } else {
        Z_train.row(it) = problem.Z.row(r);
        Y_train(it++) = problem.Y(r);
      }
    }

    const Standardization std_train = standardize(Z_train);
    // Apply the training transform to the held-out block.
    Matrix Z_test_std = Z_test;
    for (Index j = 1; j < p; ++j) {
      Z_test_std.col(j) = (Z_test.col(j).array() - std_train.mean(j)) / std_train.scale(j);
    }

    Vector warm = Vector::Zero(p);
    for (Index gi = 0; gi < grid.size(); ++gi) {
      const ElasticNetFit fit = coordinate_descent(Y_train, std_train.Z_std, grid(gi), gamma,
                                                   opts, &warm, &std_train.excluded);
      warm = fit.beta;
      const Vector pred = Z_test_std * fit.beta;
      report.fold_mse(f, gi) = (Y_test - pred).squaredNorm() / static_cast<double>(n_test);
    }
  }

  report.mean_mse = report.fold_mse.colwise().mean();
  report.std_mse.resize(grid.size());
  for (Index gi = 0; gi < grid.size(); ++gi) {
    const double m = report.mean_mse(gi);
    const double ss = (report.fold_mse.col(gi).array() - m).square().sum();
    report.std_mse(gi) = std::sqrt(ss / std::max<Index>(1, folds - 1));
  }

  // Grid is descending, so scanning with strict '<' keeps the largest lambda
  // among ties.
  Index best = 0;
  for (Index gi = 1; gi < grid.size(); ++gi) {
    if (report.mean_mse(gi) < report.mean_mse(best)) best = gi;
  }
  report.chosen_lambda = grid(best);

  std::string sizes;
  for (const auto& [begin, end] : ranges) {
    if (!sizes.empty()) sizes += ",";
    sizes += std::to_string(end - begin);
  }
  report.fold_assignment = std::to_string(folds) +
                           " contiguous folds per operating-point block; block rows [" + sizes +
                           "]";
  return report;
}

void write_cv_csv(const CvReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << "lambda,mean_mse,std_mse";
  for (Index f = 0; f < report.fold_mse.rows(); ++f) out << ",fold" << f;
  out << "\n";
  for (Index gi = 0; gi < report.lambda_grid.size(); ++gi) {
    out << format_g12(report.lambda_grid(gi)) << "," << format_g12(report.mean_mse(gi)) << ","
        << format_g12(report.std_mse(gi));
    for (Index f = 0; f < report.fold_mse.rows(); ++f) {
      out << "," << format_g12(report.fold_mse(f, gi));
    }
    out << "\n";
  }
}

Selection select_features(const ElasticNetFit& fit,
                          const std::vector<FeatureDescriptor>& descriptors,
                          double epsilon_sel, const std::vector<bool>* excluded) {
  if (!fit.converged) {
    throw Error("select_features: elastic-net fit did not converge");
  }
  if (static_cast<Index>(descriptors.size()) != fit.beta.size()) {
    throw std::invalid_argument("select_features: descriptor/coefficient mismatch");
  }
  if (epsilon_sel < 0.0) throw std::invalid_argument("select_features: epsilon_sel must be >= 0");

  Selection sel;
  sel.indices.push_back(0);
  sel.features.push_back(descriptors.front());
  for (Index j = 1; j < fit.beta.size(); ++j) {
    if (is_excluded(excluded, j)) continue;
    if (std::abs(fit.beta(j)) > epsilon_sel) {
      sel.indices.push_back(static_cast<int>(j));
      sel.features.push_back(descriptors[static_cast<std::size_t>(j)]);
    }
  }
  if (sel.indices.size() <= 1) {
    throw EmptySelectionError("select_features: no feature beyond the intercept survives "
                              "(lambda too large)");
  }
  return sel;
}

OlsFit refit_ols(const Vector& Y, const Matrix& Z_selected) {
  if (Z_selected.rows() != Y.size()) throw std::invalid_argument("refit_ols: shape mismatch");
  if (Z_selected.cols() < 1) throw std::invalid_argument("refit_ols: no columns selected");
  Eigen::ColPivHouseholderQR<Matrix> qr(Z_selected);
  if (qr.rank() < Z_selected.cols()) {
    throw RankDeficiencyError("refit_ols: selected columns are linearly dependent");
  }
  OlsFit fit;
  fit.beta = qr.solve(Y);
  fit.residual_norm = (Z_selected * fit.beta - Y).norm();
  return fit;
}

}  // namespace narx::sparse
