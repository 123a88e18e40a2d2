#include "narx/types.hpp"

#include <algorithm>
#include <cmath>

namespace narx {

DivergenceError::DivergenceError(Index sample_index, double value)
    : Error("simulation diverged at sample " + std::to_string(sample_index) +
            " (|y| = " + std::to_string(value) + ")"),
      sample(sample_index) {}

void OperatingPoint::validate() const {
  if (!std::isfinite(u_s) || !std::isfinite(y_s)) {
    throw std::invalid_argument("operating point must be finite");
  }
}

TimeSeries::TimeSeries(Vector u, Vector y, double dt)
    : u_(std::move(u)), y_(std::move(y)), dt_(dt) {
  if (u_.size() != y_.size()) {
    throw std::invalid_argument("time series: u and y must have equal length");
  }
  if (y_.size() < 1) {
    throw std::invalid_argument("time series: need at least one sample");
  }
  if (!(dt_ > 0.0)) {
    throw std::invalid_argument("time series: sampling interval must be > 0");
  }
  if (!u_.allFinite() || !y_.allFinite()) {
    throw std::invalid_argument("time series: all samples must be finite");
  }
}

ArxModel::ArxModel(Vector a, Vector b, int delay, OperatingPoint op)
    : a_(std::move(a)), b_(std::move(b)), delay_(delay), op_(op) {
  if (a_.size() < 1 || b_.size() < 1) {
    throw std::invalid_argument("arx model: need n_a >= 1 and n_b >= 1");
  }
  if (delay_ < 0) {
    throw std::invalid_argument("arx model: delay must be >= 0");
  }
  if (!a_.allFinite() || !b_.allFinite()) {
    throw std::invalid_argument("arx model: coefficients must be finite");
  }
  op_.validate();
}

FeatureDescriptor FeatureDescriptor::constant() { return FeatureDescriptor{}; }

FeatureDescriptor FeatureDescriptor::monomial(std::vector<FeatureTerm> terms) {
  if (terms.empty()) {
    throw std::invalid_argument("feature: monomial needs at least one term (use constant())");
  }
  for (const auto& t : terms) {
    if (t.lag < 1) throw std::invalid_argument("feature: lag must be >= 1");
    if (t.exponent < 1) throw std::invalid_argument("feature: exponent must be >= 1");
  }
  std::sort(terms.begin(), terms.end(),
            [](const FeatureTerm& l, const FeatureTerm& r) {
              return std::tie(l.var, l.lag) < std::tie(r.var, r.lag);
            });
  // Merge factors that share (variable, lag) by summing exponents.
  std::vector<FeatureTerm> merged;
  for (const auto& t : terms) {
    if (!merged.empty() && merged.back().var == t.var && merged.back().lag == t.lag) {
      merged.back().exponent += t.exponent;
    } else {
      merged.push_back(t);
    }
  }
  FeatureDescriptor d;
  d.terms_ = std::move(merged);
  return d;
}

FeatureDescriptor FeatureDescriptor::linear(Var var, int lag) {
  return monomial({FeatureTerm{var, lag, 1}});
}

int FeatureDescriptor::degree() const {
  int d = 0;
  for (const auto& t : terms_) d += t.exponent;
  return d;
}

int FeatureDescriptor::max_lag(Var var) const {
  int m = 0;
  for (const auto& t : terms_) {
    if (t.var == var) m = std::max(m, t.lag);
  }
  return m;
}

FeatureDescriptor operator*(const FeatureDescriptor& lhs, const FeatureDescriptor& rhs) {
  if (lhs.is_constant()) return rhs;
  if (rhs.is_constant()) return lhs;
  std::vector<FeatureTerm> terms = lhs.terms_;
  terms.insert(terms.end(), rhs.terms_.begin(), rhs.terms_.end());
  return FeatureDescriptor::monomial(std::move(terms));
}

std::string FeatureDescriptor::name() const {
  if (is_constant()) return "1";
  std::string out;
  for (const auto& t : terms_) {
    if (!out.empty()) out += "*";
    out += (t.var == Var::Output) ? "y" : "u";
    out += "[k-" + std::to_string(t.lag) + "]";
    if (t.exponent > 1) out += "^" + std::to_string(t.exponent);
  }
  return out;
}

PNarxModel::PNarxModel(std::vector<FeatureDescriptor> features, Vector coefficients,
                       int n_y, int n_u)
    : features_(std::move(features)),
      coefficients_(std::move(coefficients)),
      n_y_(n_y),
      n_u_(n_u) {
  if (n_y_ < 0 || n_u_ < 0) {
    throw std::invalid_argument("p-narx model: lag orders must be >= 0");
  }
  if (static_cast<Index>(features_.size()) != coefficients_.size()) {
    throw std::invalid_argument("p-narx model: features and coefficients must align");
  }
  if (features_.empty()) {
    throw std::invalid_argument("p-narx model: need at least one feature");
  }
  if (!coefficients_.allFinite()) {
    throw std::invalid_argument("p-narx model: coefficients must be finite");
  }
  for (const auto& f : features_) {
    if (f.max_lag(Var::Output) > n_y_ || f.max_lag(Var::Input) > n_u_) {
      throw std::invalid_argument("p-narx model: feature '" + f.name() +
                                  "' exceeds the declared lag orders");
    }
  }
  std::vector<FeatureDescriptor> sorted = features_;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw std::invalid_argument("p-narx model: duplicate features");
  }
}

void LambdaGridSpec::validate() const {
  if (count < 2) throw std::invalid_argument("lambda grid: need at least 2 points");
  if (!(decades > 0.0)) throw std::invalid_argument("lambda grid: decades must be > 0");
}

void FusionConfig::validate() const {
  if (n_y < 1 || n_u < 1) throw std::invalid_argument("config: n_y and n_u must be >= 1");
  if (degree < 1) throw std::invalid_argument("config: degree must be >= 1");
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw std::invalid_argument("config: gamma must lie strictly inside (0,1)");
  }
  lambda_grid.validate();
  if (cv_folds < 2) throw std::invalid_argument("config: cv_folds must be >= 2");
  if (epsilon_sel < 0.0) throw std::invalid_argument("config: epsilon_sel must be >= 0");
  if (n_samples <= std::max(n_y, n_u) + 10) {
    throw std::invalid_argument("config: N too small for the requested lags");
  }
  if (n_validation <= std::max(n_y, n_u)) {
    throw std::invalid_argument("config: N_v must exceed the maximum lag");
  }
  if (n_a < 1 || n_b < 1) throw std::invalid_argument("config: n_a and n_b must be >= 1");
  if (delay < 0) throw std::invalid_argument("config: delay must be >= 0");
}

}  // namespace narx
