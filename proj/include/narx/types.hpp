#pragma once

#include <Eigen/Dense>

#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace narx {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A free-run simulation left the configured magnitude bound.
struct DivergenceError : Error {
  DivergenceError(Index sample_index, double value);
  Index sample;
};

/// Regressor matrix (or a selected sub-matrix) is numerically rank deficient.
struct RankDeficiencyError : Error {
  using Error::Error;
};

/// Feature selection kept nothing but the intercept.
struct EmptySelectionError : Error {
  using Error::Error;
};

constexpr double kDefaultDivergenceBound = 1e6;

/// Steady-state input/output pair anchoring a local model.
struct OperatingPoint {
  double u_s = 0.0;
  double y_s = 0.0;

  void validate() const;
  friend bool operator==(const OperatingPoint&, const OperatingPoint&) = default;
};

/// Sampled scalar input/output trajectory with a fixed sampling interval.
/// Immutable after construction; u and y always have equal length N >= 1.
class TimeSeries {
 public:
  TimeSeries(Vector u, Vector y, double dt = 1.0);

  const Vector& u() const { return u_; }
  const Vector& y() const { return y_; }
  double dt() const { return dt_; }
  Index size() const { return y_.size(); }

 private:
  Vector u_;
  Vector y_;
  double dt_;
};

/// Local linear difference-equation model in deviation variables around an
/// operating point:
///
///   y~(k) = sum_i a_i y~(k-i) + sum_j b_j u~(k-delay-j),   i = 1..n_a, j = 1..n_b
///
/// with y~ = y - y_s and u~ = u - u_s. The first input lag is delay+1, so a
/// step in u is first visible in y after delay+1 samples.
class ArxModel {
 public:
  ArxModel(Vector a, Vector b, int delay, OperatingPoint op);

  const Vector& a() const { return a_; }
  const Vector& b() const { return b_; }
  int delay() const { return delay_; }
  const OperatingPoint& op() const { return op_; }
  int n_a() const { return static_cast<int>(a_.size()); }
  int n_b() const { return static_cast<int>(b_.size()); }

 private:
  Vector a_;
  Vector b_;
  int delay_;
  OperatingPoint op_;
};

enum class Var : std::uint8_t { Output = 0, Input = 1 };

/// One factor of a monomial regressor: variable identity, lag and exponent.
struct FeatureTerm {
  Var var = Var::Output;
  int lag = 1;
  int exponent = 1;

  friend auto operator<=>(const FeatureTerm&, const FeatureTerm&) = default;
};

/// Symbolic identity of one regressor: either the constant 1 or a product of
/// lagged input/output terms with integer exponents. Terms are kept in a
/// canonical order (outputs before inputs, lags ascending, equal factors
/// merged), so two descriptors are equal iff structurally identical.
class FeatureDescriptor {
 public:
  static FeatureDescriptor constant();
  static FeatureDescriptor monomial(std::vector<FeatureTerm> terms);
  /// Single linear term y(k-lag) or u(k-lag).
  static FeatureDescriptor linear(Var var, int lag);

  bool is_constant() const { return terms_.empty(); }
  const std::vector<FeatureTerm>& terms() const { return terms_; }
  /// Total polynomial degree (0 for the constant feature).
  int degree() const;
  /// Largest lag referenced for the given variable (0 if none).
  int max_lag(Var var) const;
  /// Product of two descriptors; the constant acts as identity.
  friend FeatureDescriptor operator*(const FeatureDescriptor& lhs, const FeatureDescriptor& rhs);

  /// Human-readable name, e.g. "1", "y[k-1]", "u[k-2]^2", "y[k-1]*u[k-1]".
  std::string name() const;

  friend auto operator<=>(const FeatureDescriptor&, const FeatureDescriptor&) = default;

 private:
  std::vector<FeatureTerm> terms_;  // empty means constant
};

/// Sparse global polynomial NARX model: selected features plus re-identified
/// coefficients, all in absolute plant units.
class PNarxModel {
 public:
  PNarxModel(std::vector<FeatureDescriptor> features, Vector coefficients, int n_y, int n_u);

  const std::vector<FeatureDescriptor>& features() const { return features_; }
  const Vector& coefficients() const { return coefficients_; }
  int n_y() const { return n_y_; }
  int n_u() const { return n_u_; }
  Index feature_count() const { return static_cast<Index>(features_.size()); }

 private:
  std::vector<FeatureDescriptor> features_;
  Vector coefficients_;
  int n_y_;
  int n_u_;
};

/// Log-spaced regularization grid: `count` values from lambda_max down to
/// lambda_max * 10^-decades, descending for warm starts.
struct LambdaGridSpec {
  int count = 100;
  double decades = 4.0;

  void validate() const;
  friend bool operator==(const LambdaGridSpec&, const LambdaGridSpec&) = default;
};

/// All knobs of one fusion run.
struct FusionConfig {
  int n_y = 3;
  int n_u = 3;
  int degree = 2;
  double gamma = 0.5;
  LambdaGridSpec lambda_grid{};
  int cv_folds = 3;
  double epsilon_sel = 1e-6;
  std::uint32_t seed = 1;
  int n_samples = 448;     // per-operating-point simulation length N
  int n_validation = 155;  // validation length N_v
  // Local model structure used when models are manufactured from a plant.
  int n_a = 2;
  int n_b = 2;
  int delay = 0;

  void validate() const;
  friend bool operator==(const FusionConfig&, const FusionConfig&) = default;
};

}  // namespace narx
