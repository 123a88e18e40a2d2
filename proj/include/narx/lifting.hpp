#pragma once

#include "narx/types.hpp"

#include <string>
#include <vector>

namespace narx::lift {

/// One operating point's regression block: targets plus feature rows, columns
/// described by `descriptors`.
struct FeatureBlock {
  Vector targets;
  Matrix rows;
  std::vector<FeatureDescriptor> descriptors;
};

/// Stacked multi-operating-point regression Y = Z beta. Column 0 of Z is the
/// intercept (all ones); op_index records the originating block per row.
struct RegressionProblem {
  Vector Y;
  Matrix Z;
  std::vector<FeatureDescriptor> descriptors;
  std::vector<int> op_index;
};

/// Lagged linear regressors: for each usable sample k the row is
/// [y(k-1)..y(k-n_y), u(k-1)..u(k-n_u)] with target y(k). Rows with
/// incomplete history are dropped, so the block has N - max(n_y, n_u) rows.
FeatureBlock build_lagged(const TimeSeries& data, int n_y, int n_u);

/// Polynomial lifting: prepends the intercept column and appends every
/// monomial of the linear features with total degree in [2, degree], each
/// exactly once in canonical order. For degree 2 this appends
/// n_l (n_l + 1) / 2 columns.
FeatureBlock lift_polynomial(const FeatureBlock& linear, int degree);

/// Number of non-constant columns produced by lifting n_l linear features to
/// the given degree. For degree 2 this is (n_l^2 + 3 n_l) / 2.
Index polynomial_feature_count(int n_l, int degree);

/// Row-concatenation of per-operating-point blocks (which must share an
/// identical descriptor list), with row provenance recorded.
RegressionProblem stack(const std::vector<FeatureBlock>& blocks);

/// Evaluate features at one history point. y_lags(i) is the output at lag
/// i+1, u_lags(j) the input at lag j+1; the intercept evaluates to 1.
Vector evaluate_features(const std::vector<FeatureDescriptor>& features,
                         const Vector& y_lags, const Vector& u_lags);

/// CSV export (descriptor names as header) for external inspection.
void write_problem_csv(const RegressionProblem& problem, const std::string& path);

}  // namespace narx::lift
