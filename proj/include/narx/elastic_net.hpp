#pragma once

#include "narx/lifting.hpp"
#include "narx/types.hpp"

#include <string>
#include <vector>

namespace narx::sparse {

/// Column-wise standardization of a feature matrix. Non-constant columns are
/// centered and scaled to unit population standard deviation; the intercept
/// column (index 0 by convention) is left untouched. Columns with zero
/// variance are flagged in `excluded`: they are centered to zero, never
/// penalized and never selected.
struct Standardization {
  Matrix Z_std;
  Vector mean;
  Vector scale;
  std::vector<bool> excluded;
};

Standardization standardize(const Matrix& Z);

struct ElasticNetFit {
  Vector beta;  // over all columns of the matrix the solver saw
  double lambda = 0.0;
  double gamma = 0.5;
  int n_iter = 0;
  bool converged = false;
};

struct SolverOptions {
  double tol = 1e-8;       // convergence threshold on max coefficient update
  int max_sweeps = 100000;
  int intercept_column = 0;  // unpenalized column; -1 for none
};

/// Cyclic coordinate descent for the elastic net
///
///   min_beta  1/2 ||Y - Z beta||_2^2  +  lambda ( gamma ||beta||_1
///                                                 + (1-gamma)/2 ||beta||_2^2 )
///
/// where the penalty runs over all columns except the intercept and any
/// excluded ones. Each coordinate update is the exact one-dimensional
/// minimizer beta_j <- S(rho_j, lambda*gamma) / (c_j + lambda*(1-gamma)),
/// so the objective is non-increasing per sweep.
ElasticNetFit coordinate_descent(const Vector& Y, const Matrix& Z, double lambda, double gamma,
                                 const SolverOptions& opts = {},
                                 const Vector* warm_start = nullptr,
                                 const std::vector<bool>* excluded = nullptr);

/// The objective minimized by coordinate_descent, for monitoring and tests.
double elastic_net_objective(const Vector& Y, const Matrix& Z, const Vector& beta,
                             double lambda, double gamma, int intercept_column = 0,
                             const std::vector<bool>* excluded = nullptr);

/// Descending log-spaced grid from lambda_max = max_j |z_j' Y| / gamma (the
/// smallest lambda that zeroes every penalized coefficient when columns are
/// centered) down to lambda_max * 10^-decades. Degenerate problems (all-zero
/// Y) yield the single value {0}.
Vector lambda_path(const Vector& Y, const Matrix& Z, double gamma, int grid_size,
                   double decades = 4.0, int intercept_column = 0,
                   const std::vector<bool>* excluded = nullptr);

struct CvReport {
  Vector lambda_grid;
  Vector mean_mse;
  Vector std_mse;
  Matrix fold_mse;  // folds x grid
  double chosen_lambda = 0.0;
  std::string fold_assignment;
};

/// K-fold cross-validation over the lambda grid. Folds are contiguous row
/// slices drawn per operating-point block (limiting serial-correlation
/// leakage); fits are warm-started along the descending grid, standardization
/// is fit on each training split only, and the held-out score is the
/// one-step-ahead MSE. Ties in mean MSE resolve to the larger lambda.
CvReport cross_validate(const lift::RegressionProblem& problem, double gamma, int folds,
                        const Vector& grid, const SolverOptions& opts = {});

/// Export the CV curve (lambda, mean, std, per-fold MSE) as CSV.
void write_cv_csv(const CvReport& report, const std::string& path);

struct Selection {
  std::vector<int> indices;  // column indices into the problem, intercept first
  std::vector<FeatureDescriptor> features;
};

/// Keep descriptors whose standardized |beta_j| exceeds epsilon_sel; the
/// intercept is always retained. Throws EmptySelectionError when nothing but
/// the intercept survives (lambda too large).
Selection select_features(const ElasticNetFit& fit,
                          const std::vector<FeatureDescriptor>& descriptors,
                          double epsilon_sel, const std::vector<bool>* excluded = nullptr);

struct OlsFit {
  Vector beta;
  double residual_norm = 0.0;
};

/// Exact least squares via rank-revealing QR; throws RankDeficiencyError when
/// the selected columns are linearly dependent.
OlsFit refit_ols(const Vector& Y, const Matrix& Z_selected);

}  // namespace narx::sparse
