#include "narx/lifting.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace narx::lift {

namespace {

// Appends every monomial of total degree `degree` over the base columns,
// enumerated as non-decreasing index tuples in lexicographic order.
void append_monomials(const FeatureBlock& linear, int degree, std::vector<int>& tuple,
                      int next_min, Matrix& out, Index& col,
                      std::vector<FeatureDescriptor>& descriptors) {
  const int n_l = static_cast<int>(linear.descriptors.size());
  if (static_cast<int>(tuple.size()) == degree) {
    Vector column = Vector::Ones(linear.rows.rows());
    FeatureDescriptor desc = FeatureDescriptor::constant();
    for (int idx : tuple) {
      column = column.cwiseProduct(linear.rows.col(idx));
      desc = desc * linear.descriptors[static_cast<std::size_t>(idx)];
    }
    out.col(col++) = column;
    descriptors.push_back(desc);
    return;
  }
  for (int idx = next_min; idx < n_l; ++idx) {
    tuple.push_back(idx);
    append_monomials(linear, degree, tuple, idx, out, col, descriptors);
    tuple.pop_back();
  }
}

std::string format_g12(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

}  // namespace

FeatureBlock build_lagged(const TimeSeries& data, int n_y, int n_u) {
  if (n_y < 1 || n_u < 1) throw std::invalid_argument("build_lagged: need n_y >= 1 and n_u >= 1");
  const Index n = data.size();
  const Index max_lag = std::max(n_y, n_u);
  if (n <= max_lag) throw Error("build_lagged: series too short for the requested lags");

  const Index rows = n - max_lag;
  const Index n_l = n_y + n_u;
  FeatureBlock block;
  block.targets.resize(rows);
  block.rows.resize(rows, n_l);
  block.descriptors.reserve(static_cast<std::size_t>(n_l));
  for (int i = 1; i <= n_y; ++i) block.descriptors.push_back(FeatureDescriptor::linear(Var::Output, i));
  for (int j = 1; j <= n_u; ++j) block.descriptors.push_back(FeatureDescriptor::linear(Var::Input, j));

  const Vector& y = data.y();
  const Vector& u = data.u();
  for (Index r = 0; r < rows; ++r) {
    const Index k = max_lag + r;
    for (int i = 1; i <= n_y; ++i) block.rows(r, i - 1) = y(k - i);
    for (int j = 1; j <= n_u; ++j) block.rows(r, n_y + j - 1) = u(k - j);
    block.targets(r) = y(k);
  }
  return block;
}

Index polynomial_feature_count(int n_l, int degree) {
  if (n_l < 1 || degree < 1) throw std::invalid_argument("feature count: n_l and degree must be >= 1");
  // Multisets of size d from n_l symbols: C(n_l + d - 1, d), summed over d = 1..degree.
  Index total = 0;
  for (int d = 1; d <= degree; ++d) {
    Index c = 1;
    for (int i = 1; i <= d; ++i) c = c * (n_l + i - 1) / i;
    total += c;
  }
  return total;
}

FeatureBlock lift_polynomial(const FeatureBlock& linear, int degree) {
  if (degree < 1) throw std::invalid_argument("lift_polynomial: degree must be >= 1");
  const Index n_l = linear.rows.cols();
  if (static_cast<Index>(linear.descriptors.size()) != n_l) {
    throw std::invalid_argument("lift_polynomial: descriptor/column mismatch");
  }

  const Index total = 1 + polynomial_feature_count(static_cast<int>(n_l), degree);
  FeatureBlock out;
  out.targets = linear.targets;
  out.rows.resize(linear.rows.rows(), total);
  out.descriptors.reserve(static_cast<std::size_t>(total));

  out.rows.col(0).setOnes();
  out.descriptors.push_back(FeatureDescriptor::constant());
  out.rows.middleCols(1, n_l) = linear.rows;
  out.descriptors.insert(out.descriptors.end(), linear.descriptors.begin(),
                         linear.descriptors.end());

  Index col = 1 + n_l;
  for (int d = 2; d <= degree; ++d) {
    std::vector<int> tuple;
    append_monomials(linear, d, tuple, 0, out.rows, col, out.descriptors);
  }
  return out;
}

RegressionProblem stack(const std::vector<FeatureBlock>& blocks) {
  if (blocks.empty()) throw std::invalid_argument("stack: need at least one block");
  const auto& descriptors = blocks.front().descriptors;
  Index rows = 0;
  for (const auto& b : blocks) {
    if (b.descriptors != descriptors) {
      throw Error("stack: descriptor mismatch between operating-point blocks");
    }
    rows += b.rows.rows();
  }

  RegressionProblem problem;
  problem.descriptors = descriptors;
  problem.Y.resize(rows);
  problem.Z.resize(rows, static_cast<Index>(descriptors.size()));
  problem.op_index.reserve(static_cast<std::size_t>(rows));
  Index offset = 0;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const auto& b = blocks[i];
    problem.Y.segment(offset, b.rows.rows()) = b.targets;
    problem.Z.middleRows(offset, b.rows.rows()) = b.rows;
    problem.op_index.insert(problem.op_index.end(), static_cast<std::size_t>(b.rows.rows()),
                            static_cast<int>(i));
    offset += b.rows.rows();
  }
  if (!problem.Y.allFinite() || !problem.Z.allFinite()) {
    throw Error("stack: regression problem contains non-finite values");
  }
  return problem;
}

Vector evaluate_features(const std::vector<FeatureDescriptor>& features,
                         const Vector& y_lags, const Vector& u_lags) {
  Vector out(static_cast<Index>(features.size()));
  for (std::size_t f = 0; f < features.size(); ++f) {
    const auto& desc = features[f];
    if (desc.max_lag(Var::Output) > y_lags.size() || desc.max_lag(Var::Input) > u_lags.size()) {
      throw Error("evaluate_features: insufficient history for feature '" + desc.name() + "'");
    }
    // Repeated multiplication in canonical term order, matching the product
    // order used when lifting columns, so the two routes agree bit-exactly.
    double v = 1.0;
    for (const auto& t : desc.terms()) {
      const double base = (t.var == Var::Output) ? y_lags(t.lag - 1) : u_lags(t.lag - 1);
      for (int e = 0; e < t.exponent; ++e) v *= base;
    }
    out(static_cast<Index>(f)) = v;
  }
  return out;
}

void write_problem_csv(const RegressionProblem& problem, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << "y";
  for (const auto& d : problem.descriptors) out << "," << d.name();
  out << ",op\n";
  for (Index r = 0; r < problem.Y.size(); ++r) {
    out << format_g12(problem.Y(r));
    for (Index c = 0; c < problem.Z.cols(); ++c) out << "," << format_g12(problem.Z(r, c));
    out << "," << problem.op_index[static_cast<std::size_t>(r)] << "\n";
  }
}

}  // namespace narx::lift
