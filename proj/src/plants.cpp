#include "narx/plants.hpp"

#include <cmath>
#include <random>

namespace narx::plants {

namespace {

constexpr double kPi = 3.14159265358979323846;

void check_divergence(double y, Index k, double bound) {
  if (!std::isfinite(y) || std::abs(y) > bound) {
    throw DivergenceError(k, y);
  }
}

// Bisection on [lo, hi]; requires a sign change. Converges to machine
// precision in at most `max_iter` halvings, then verifies the residual.
template <typename F>
double bisect(F&& f, double lo, double hi, double residual_tol, const char* what) {
  double flo = f(lo);
  double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0.0) == (fhi > 0.0)) {
    throw Error(std::string(what) + ": no sign change in search bracket [" +
                std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
  double mid = lo;
  for (int it = 0; it < 200; ++it) {
    mid = 0.5 * (lo + hi);
    double fm = f(mid);
    if (fm == 0.0) break;
    if ((fm > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
    if (hi - lo < 1e-16 * (1.0 + std::abs(mid))) break;
  }
  if (std::abs(f(mid)) >= residual_tol) {
    throw Error(std::string(what) + ": steady-state solve did not converge");
  }
  return mid;
}

// xorshift32 -- a 32-bit linear-feedback shift register.
struct Lfsr32 {
  explicit Lfsr32(std::uint32_t seed) : state(seed != 0 ? seed : 0x6d2b79f5u) {}
  std::uint32_t next() {
    state ^= state << 13;
    state ^= state >> 17;
    state ^= state << 5;
    return state;
  }
  bool bit() { return (next() >> 31) != 0; }
  std::uint32_t state;
};

}  // namespace

void ConicalTankPlant::validate() const {
  if (!(D > 0.0) || !(H > 0.0) || !(C_d > 0.0)) {
    throw std::invalid_argument("tank: D, H and C_d must be > 0");
  }
}

double ConicalTankPlant::alpha() const { return 4.0 * H * H / (kPi * D * D); }

HammersteinWienerPlant::HammersteinWienerPlant(double noise_variance, std::uint32_t noise_seed)
    : a_(3), b_(2), noise_variance_(noise_variance), noise_seed_(noise_seed) {
  a_ << 1.0, -0.45, -0.35;
  b_ << 0.5, -0.25;
  if (noise_variance_ < 0.0) {
    throw std::invalid_argument("hw: noise variance must be >= 0");
  }
  // Stability of the autoregressive part: roots of z^2 - 0.45 z - 0.35.
  Eigen::Matrix2d companion;
  companion << -a_(1), -a_(2), 1.0, 0.0;
  for (const auto& root : companion.eigenvalues()) {
    if (std::abs(root) >= 1.0) {
      throw std::invalid_argument("hw: A-polynomial has a root outside the unit circle");
    }
  }
}

double HammersteinWienerPlant::g(double s) const {
  const double arg = 1.0 + 0.6 * s;
  if (arg < 0.0) {
    throw Error("hw: output nonlinearity domain error (1 + 0.6 s < 0, s = " +
                std::to_string(s) + ")");
  }
  return (1.0 / 0.3) * (-1.0 + std::sqrt(arg));
}

TimeSeries simulate_toy(const ToyNarxPlant& plant, const Vector& u,
                        std::array<double, 2> y_init, double dt) {
  if (!u.allFinite()) throw std::invalid_argument("toy: inputs must be finite");
  if (!std::isfinite(y_init[0]) || !std::isfinite(y_init[1])) {
    throw std::invalid_argument("toy: initial outputs must be finite");
  }
  const Index n = u.size();
  Vector y(n);
  if (n > 0) y(0) = y_init[0];
  if (n > 1) y(1) = y_init[1];
  for (Index k = 2; k < n; ++k) {
    y(k) = plant.step(y(k - 1), y(k - 2), u(k - 1), u(k - 2));
    check_divergence(y(k), k, plant.divergence_bound);
  }
  return TimeSeries(u, std::move(y), dt);
}

TankSimResult simulate_tank(const ConicalTankPlant& plant, const Vector& q_i,
                            double h0, double dt) {
  plant.validate();
  if (!(dt > 0.0)) throw std::invalid_argument("tank: dt must be > 0");
  if (!(h0 > 0.0) || !(h0 <= plant.H)) {
    throw std::invalid_argument("tank: h0 must lie in (0, H]");
  }
  if (q_i.size() < 1) throw std::invalid_argument("tank: need at least one inflow sample");
  if (!q_i.allFinite() || (q_i.array() < 0.0).any()) {
    throw std::invalid_argument("tank: inflow must be finite and >= 0");
  }

  const double alpha = plant.alpha();
  auto rhs = [&](double h, double q) {
    h = std::max(h, plant.h_min);  // the ODE divides by h^2
    return alpha * (q - plant.C_d * std::sqrt(h)) / (h * h);
  };

  const Index n = q_i.size();
  Vector y(n);
  y(0) = h0;
  bool clamped = false;
  double h = h0;
  for (Index k = 1; k < n; ++k) {
    const double q = q_i(k - 1);
    const double k1 = rhs(h, q);
    const double k2 = rhs(h + 0.5 * dt * k1, q);
    const double k3 = rhs(h + 0.5 * dt * k2, q);
    const double k4 = rhs(h + dt * k3, q);
    h += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (h < plant.h_min) {
      h = plant.h_min;
      clamped = true;
    } else if (h > plant.H) {
      h = plant.H;
      clamped = true;
    }
    y(k) = h;
  }
  return TankSimResult{TimeSeries(q_i, std::move(y), dt), clamped};
}

Vector hw_linear_block(const HammersteinWienerPlant& plant, const Vector& x) {
  const Vector& a = plant.a_poly();
  const Vector& b = plant.b_poly();
  const Index n = x.size();
  Vector s = Vector::Zero(n);
  for (Index t = 0; t < n; ++t) {
    double v = 0.0;
    for (Index i = 1; i < a.size(); ++i) {
      if (t - i >= 0) v -= a(i) * s(t - i);
    }
    for (Index j = 0; j < b.size(); ++j) {
      if (t - 1 - j >= 0) v += b(j) * x(t - 1 - j);
    }
    s(t) = v;
  }
  return s;
}

TimeSeries simulate_hw(const HammersteinWienerPlant& plant, const Vector& u, double dt) {
  if (!u.allFinite()) throw std::invalid_argument("hw: inputs must be finite");
  Vector x(u.size());
  for (Index t = 0; t < u.size(); ++t) x(t) = plant.f(u(t));
  Vector s = hw_linear_block(plant, x);
  if (plant.noise_variance() > 0.0) {
    std::mt19937 rng(plant.noise_seed());
    std::normal_distribution<double> dist(0.0, std::sqrt(plant.noise_variance()));
    for (Index t = 0; t < s.size(); ++t) s(t) += dist(rng);
  }
  Vector y(s.size());
  for (Index t = 0; t < s.size(); ++t) y(t) = plant.g(s(t));
  return TimeSeries(u, std::move(y), dt);
}

OperatingPoint solve_steady_state(const ToyNarxPlant& plant, double u_s) {
  // Fixed point of the recursion at constant input:
  //   0.5 y^2 + (0.25 - 0.1 u) y - 1.25 u = 0, positive root.
  auto residual = [&](double y) { return plant.step(y, y, u_s, u_s) - y; };
  const double y_s = bisect(residual, 0.0, 10.0, 1e-10, "toy");
  return OperatingPoint{u_s, y_s};
}

OperatingPoint solve_steady_state(const ConicalTankPlant& plant, double q_s) {
  plant.validate();
  if (!(q_s > 0.0)) throw std::invalid_argument("tank: steady inflow must be > 0");
  auto residual = [&](double h) { return q_s - plant.C_d * std::sqrt(h); };
  const double h_s = bisect(residual, plant.h_min, plant.H, 1e-10, "tank");
  return OperatingPoint{q_s, h_s};
}

OperatingPoint solve_steady_state(const HammersteinWienerPlant& plant, double u_s) {
  // The chain is feedforward, so the steady state is closed-form: the linear
  // block's DC gain is B(1)/A(1).
  const Vector& a = plant.a_poly();
  const Vector& b = plant.b_poly();
  const double dc = b.sum() / a.sum();
  const double s = dc * plant.f(u_s);
  return OperatingPoint{u_s, plant.g(s)};
}

OperatingPoint solve_steady_state(const Plant& plant, double u_s) {
  return std::visit([&](const auto& p) { return solve_steady_state(p, u_s); }, plant);
}

Vector gen_prbs(Index length, double amplitude, double u_center, int switch_period,
                std::uint32_t seed) {
  if (length < 1) throw std::invalid_argument("prbs: length must be >= 1");
  if (switch_period < 1) throw std::invalid_argument("prbs: switch_period must be >= 1");
  if (!(amplitude >= 0.0)) throw std::invalid_argument("prbs: amplitude must be >= 0");
  Lfsr32 lfsr(seed);
  Vector u(length);
  double level = u_center;
  for (Index k = 0; k < length; ++k) {
    if (k % switch_period == 0) {
      level = u_center + (lfsr.bit() ? amplitude : -amplitude);
    }
    u(k) = level;
  }
  return u;
}

Vector gen_step(Index length, double u_before, double u_after, Index step_index) {
  if (length < 1) throw std::invalid_argument("step: length must be >= 1");
  if (step_index < 0 || step_index >= length) {
    throw std::invalid_argument("step: step_index out of range");
  }
  Vector u(length);
  for (Index k = 0; k < length; ++k) u(k) = (k < step_index) ? u_before : u_after;
  return u;
}

TimeSeries simulate_near(const Plant& plant, const OperatingPoint& op, const Vector& u,
                         int warmup, double dt) {
  op.validate();
  if (warmup < 0) throw std::invalid_argument("simulate_near: warmup must be >= 0");
  Vector full(warmup + u.size());
  full.head(warmup).setConstant(op.u_s);
  full.tail(u.size()) = u;

  TimeSeries sim = std::visit(
      [&](const auto& p) -> TimeSeries {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, ToyNarxPlant>) {
          return simulate_toy(p, full, {op.y_s, op.y_s}, dt);
        } else if constexpr (std::is_same_v<P, ConicalTankPlant>) {
          TankSimResult r = simulate_tank(p, full, op.y_s, dt);
          if (r.clamped) {
            throw Error("simulate_near: tank level clamped during experiment");
          }
          return r.ts;
        } else {
          return simulate_hw(p, full, dt);
        }
      },
      plant);

  return TimeSeries(sim.u().tail(u.size()), sim.y().tail(u.size()), dt);
}

}  // namespace narx::plants
