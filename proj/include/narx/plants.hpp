#pragma once

#include "narx/types.hpp"

#include <array>
#include <cstdint>
#include <variant>

namespace narx::plants {

/// Quadratic NARX benchmark plant:
///
///   y(k) = 0.5 y(k-1) + 0.25 y(k-2) - 0.5 y^2(k-2)
///        + 0.1 y(k-1) u(k-1) + u(k-1) + 0.25 u(k-2)
struct ToyNarxPlant {
  double divergence_bound = kDefaultDivergenceBound;

  /// Right-hand side of the recursion.
  double step(double y1, double y2, double u1, double u2) const {
    return 0.5 * y1 + 0.25 * y2 - 0.5 * y2 * y2 + 0.1 * y1 * u1 + u1 + 0.25 * u2;
  }
};

/// Conical tank level process:  dh/dt = alpha (q_i - C_d sqrt(h)) / h^2
/// with alpha = 4 H^2 / (pi D^2). The state is clamped to [h_min, H].
struct ConicalTankPlant {
  double D = 30.0;    // max diameter, cm
  double H = 62.0;    // max height, cm
  double C_d = 1.0;   // valve constant
  double h_min = 1e-3;

  void validate() const;
  double alpha() const;
};

/// Hammerstein-Wiener benchmark: static input map x = f(u), linear block
/// A(z) s = B(z) x with zero initial conditions, static output map y = g(s).
///
///   A(z) = 1 - 0.45 z^-1 - 0.35 z^-2
///   B(z) = 0.5 z^-1 - 0.25 z^-2
///   f(u) = 0.5 u - 0.18 u^2
///   g(s) = (1/0.3) (-1 + sqrt(1 + 0.6 s)),  defined for 1 + 0.6 s >= 0
///
/// Optional zero-mean Gaussian noise v(t) is added to s(t) before g (it does
/// not feed back into the linear recursion).
class HammersteinWienerPlant {
 public:
  explicit HammersteinWienerPlant(double noise_variance = 0.0, std::uint32_t noise_seed = 0);

  const Vector& a_poly() const { return a_; }  // {1, -0.45, -0.35}
  const Vector& b_poly() const { return b_; }  // {0.5, -0.25}
  double noise_variance() const { return noise_variance_; }
  std::uint32_t noise_seed() const { return noise_seed_; }

  double f(double u) const { return 0.5 * u - 0.18 * u * u; }
  double g(double s) const;  // throws Error if 1 + 0.6 s < 0

 private:
  Vector a_;
  Vector b_;
  double noise_variance_;
  std::uint32_t noise_seed_;
};

using Plant = std::variant<ToyNarxPlant, ConicalTankPlant, HammersteinWienerPlant>;

/// Free-run simulation of the toy plant. y_init supplies the first two output
/// samples; the recursion produces the rest. Output length equals input length.
TimeSeries simulate_toy(const ToyNarxPlant& plant, const Vector& u,
                        std::array<double, 2> y_init, double dt = 1.0);

struct TankSimResult {
  TimeSeries ts;
  bool clamped = false;  // state hit [h_min, H] at least once
};

/// Fixed-step RK4 integration of the tank ODE with zero-order-hold inflow.
/// y(0) = h0; y(k) is the level after integrating step k with inflow q_i(k-1).
TankSimResult simulate_tank(const ConicalTankPlant& plant, const Vector& q_i,
                            double h0, double dt);

/// Linear block of the Hammerstein-Wiener plant alone: A(z) s = B(z) x with
/// zero initial conditions.
Vector hw_linear_block(const HammersteinWienerPlant& plant, const Vector& x);

TimeSeries simulate_hw(const HammersteinWienerPlant& plant, const Vector& u, double dt = 1.0);

OperatingPoint solve_steady_state(const ToyNarxPlant& plant, double u_s);
OperatingPoint solve_steady_state(const ConicalTankPlant& plant, double q_s);
OperatingPoint solve_steady_state(const HammersteinWienerPlant& plant, double u_s);
OperatingPoint solve_steady_state(const Plant& plant, double u_s);

/// Two-level pseudo-random binary signal: u_center +/- amplitude, the level is
/// held for switch_period samples and chosen by a seeded LFSR. Deterministic
/// for a fixed seed.
Vector gen_prbs(Index length, double amplitude, double u_center, int switch_period,
                std::uint32_t seed);

/// u_before for k < step_index, u_after afterwards.
Vector gen_step(Index length, double u_before, double u_after, Index step_index);

/// Simulate a plant under input u, starting near the given operating point:
/// prepends `warmup` samples held at op.u_s and drops them from the result.
/// The toy plant starts at (y_s, y_s), the tank at h0 = y_s, the HW plant at
/// its natural zero initial conditions. Throws if the tank trajectory clamps
/// (clamped data would corrupt identification experiments).
TimeSeries simulate_near(const Plant& plant, const OperatingPoint& op, const Vector& u,
                         int warmup, double dt);

}  // namespace narx::plants
