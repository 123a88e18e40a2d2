#include "narx/local_ident.hpp"

#include <algorithm>
#include <cmath>

namespace narx::local_ident {

ArxFit fit_arx(const TimeSeries& data, const OperatingPoint& op, int n_a, int n_b, int delay) {
  op.validate();
  if (n_a < 1 || n_b < 1) throw std::invalid_argument("fit_arx: need n_a >= 1 and n_b >= 1");
  if (delay < 0) throw std::invalid_argument("fit_arx: delay must be >= 0");
  const Index n = data.size();
  if (n <= n_a + n_b + delay + 10) {
    throw Error("fit_arx: series too short for the requested structure");
  }

  const Vector du = data.u().array() - op.u_s;
  const Vector dy = data.y().array() - op.y_s;

  const Index first = std::max<Index>(n_a, delay + n_b);
  const Index rows = n - first;
  const Index cols = n_a + n_b;
  Matrix phi(rows, cols);
  Vector target(rows);
  for (Index r = 0; r < rows; ++r) {
    const Index k = first + r;
    for (int i = 1; i <= n_a; ++i) phi(r, i - 1) = dy(k - i);
    for (int j = 1; j <= n_b; ++j) phi(r, n_a + j - 1) = du(k - delay - j);
    target(r) = dy(k);
  }

  Eigen::ColPivHouseholderQR<Matrix> qr(phi);
  if (qr.rank() < cols) {
    throw RankDeficiencyError("fit_arx: regressor matrix is rank deficient (insufficient excitation)");
  }
  Vector theta = qr.solve(target);

  const double rms = std::sqrt((phi * theta - target).squaredNorm() / static_cast<double>(rows));
  ArxModel model(theta.head(n_a), theta.tail(n_b), delay, op);
  return ArxFit{std::move(model), rms, rows};
}

TimeSeries simulate_arx(const ArxModel& model, const Vector& u, double dt,
                        double divergence_bound) {
  if (!u.allFinite()) throw std::invalid_argument("simulate_arx: inputs must be finite");
  const Index n = u.size();
  if (n < 1) throw std::invalid_argument("simulate_arx: need at least one input sample");

  const Vector& a = model.a();
  const Vector& b = model.b();
  const int delay = model.delay();
  const Vector du = u.array() - model.op().u_s;

  Vector dy = Vector::Zero(n);
  for (Index k = 0; k < n; ++k) {
    double v = 0.0;
    for (Index i = 1; i <= a.size(); ++i) {
      if (k - i >= 0) v += a(i - 1) * dy(k - i);
    }
    for (Index j = 1; j <= b.size(); ++j) {
      const Index idx = k - delay - j;
      if (idx >= 0) v += b(j - 1) * du(idx);
    }
    dy(k) = v;
    const double y_abs = v + model.op().y_s;
    if (!std::isfinite(y_abs) || std::abs(y_abs) > divergence_bound) {
      throw DivergenceError(k, y_abs);
    }
  }
  return TimeSeries(u, dy.array() + model.op().y_s, dt);
}

std::vector<ArxFit> make_local_models(const plants::Plant& plant,
                                      const std::vector<OperatingPoint>& ops,
                                      const LocalExperiment& exp) {
  if (ops.empty()) throw std::invalid_argument("make_local_models: need at least one operating point");
  for (std::size_t i = 0; i < ops.size(); ++i) {
    for (std::size_t j = i + 1; j < ops.size(); ++j) {
      if (ops[i] == ops[j]) {
        throw std::invalid_argument("make_local_models: operating points must be distinct");
      }
    }
  }

  std::vector<ArxFit> fits;
  fits.reserve(ops.size());
  for (std::size_t i = 0; i < ops.size(); ++i) {
    const OperatingPoint& op = ops[i];
    const double amplitude =
        std::max(exp.prbs_amplitude_frac * std::abs(op.u_s), exp.prbs_amplitude_floor);
    const std::uint32_t seed = exp.seed + 0x9e3779b9u * static_cast<std::uint32_t>(i + 1);
    const Vector u = plants::gen_prbs(exp.n_samples, amplitude, op.u_s,
                                      exp.prbs_switch_period, seed);
    const TimeSeries data = plants::simulate_near(plant, op, u, exp.warmup, exp.dt);
    fits.push_back(fit_arx(data, op, exp.n_a, exp.n_b, exp.delay));
  }
  return fits;
}

}  // namespace narx::local_ident
