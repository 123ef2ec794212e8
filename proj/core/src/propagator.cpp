#include "critcycle/propagator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "critcycle/errors.hpp"

namespace critcycle {

namespace {

Matrix2 lyapunov_rhs(const DriftMatrices& m, const Matrix2& r) {
  return m.drift * r + r * m.drift.transposed() + m.diffusion;
}

// Lower Cholesky factor of a symmetric positive-definite 2x2 matrix.
Matrix2 cholesky(const Matrix2& r) {
  const double l00 = std::sqrt(r.a);
  const double l10 = r.c / l00;
  return {l00, 0.0, l10, std::sqrt(r.determinant()) / l00};
}

// The transfer matrix is carried in extended precision: its rounding enters det R
// amplified by |S|^2, which grows as 3^m under phase-matched driving.
struct WideMatrix2 {
  long double a, b, c, d;

  static WideMatrix2 identity() { return {1.0L, 0.0L, 0.0L, 1.0L}; }
  WideMatrix2 operator+(const WideMatrix2& o) const { return {a + o.a, b + o.b, c + o.c, d + o.d}; }
  friend WideMatrix2 operator*(long double s, const WideMatrix2& m) {
    return {s * m.a, s * m.b, s * m.c, s * m.d};
  }
  friend WideMatrix2 operator*(const Matrix2& l, const WideMatrix2& r) {
    return {l.a * r.a + l.b * r.c, l.a * r.b + l.b * r.d, l.c * r.a + l.d * r.c,
            l.c * r.b + l.d * r.d};
  }
  WideMatrix2 operator*(const Matrix2& r) const {
    return {a * r.a + b * r.c, a * r.b + b * r.d, c * r.a + d * r.c, c * r.b + d * r.d};
  }
  bool is_finite() const {
    return std::isfinite(a) && std::isfinite(b) && std::isfinite(c) && std::isfinite(d);
  }
};

struct Assembled {
  CovarianceState state;
  double det_drift;  // |det(M)^2 - exact| / exact, as integrated
};

// R = M M^T + Sigma with det(M)^2 = exp(-2 kappa t) det R0 exactly (Liouville:
// det S = exp(int tr W~) = exp(-kappa t)). Then
//   det R = det(M)^2 + det Sigma + tr(adj(M M^T) Sigma),
// a sum of non-negative terms, so it stays resolved long after det of the rounded
// entries has cancelled away. The integrated det(M)^2 is kept as a drift diagnostic.
Assembled assemble(const WideMatrix2& m, const Matrix2& sigma, long double exact_pure_det) {
  using ld = long double;
  const ld a = m.a * m.a + m.b * m.b;
  const ld b = m.a * m.c + m.b * m.d;
  const ld d = m.c * m.c + m.d * m.d;
  const ld det_m = m.a * m.d - m.b * m.c;
  const ld sa = sigma.a;
  const ld sb = sigma.b;
  const ld sd = sigma.d;
  const ld det = exact_pure_det + (sa * sd - sb * sb) + (d * sa - 2 * b * sb + a * sd);
  const auto drift = static_cast<double>(std::fabs(det_m * det_m - exact_pure_det) / exact_pure_det);
  const auto off = static_cast<double>(b + sb);
  const Matrix2 r{static_cast<double>(a + sa), off, off, static_cast<double>(d + sd)};
  return {CovarianceState(r, static_cast<double>(det)), drift};
}

}  // namespace

void validate(const NoiseParams& noise) {
  if (!(noise.kappa >= 0.0) || !std::isfinite(noise.kappa)) {
    throw ParameterError("noise: kappa must be finite and non-negative");
  }
  if (!(noise.n_th >= 0.0) || !std::isfinite(noise.n_th)) {
    throw ParameterError("noise: n_th must be finite and non-negative");
  }
}

DriftMatrices drift_matrices(double g, double omega, const NoiseParams& noise) {
  if (!(omega > 0.0)) throw ParameterError("drift_matrices: omega must be positive");
  const double damping = -0.5 * noise.kappa;
  const double diffusion = noise.kappa * (2.0 * noise.n_th + 1.0);
  return {Matrix2{damping, omega * (1.0 - g * g), -omega, damping},
          Matrix2::diagonal(diffusion, diffusion)};
}

int default_steps_per_half_cycle(double tau, double omega) {
  return std::max(5000, static_cast<int>(std::ceil(100.0 * omega * tau)));
}

double max_step(double tau, double omega) { return std::min(tau / 1000.0, 0.01 / omega); }

std::vector<double> Trajectory::boson_numbers() const {
  std::vector<double> out;
  out.reserve(states.size());
  for (const auto& s : states) out.push_back(boson_number(s));
  return out;
}

std::vector<double> Trajectory::purities() const {
  std::vector<double> out;
  out.reserve(states.size());
  for (const auto& s : states) out.push_back(purity(s));
  return out;
}

Trajectory evolve(const CovarianceState& initial, const ProtocolSchedule& schedule, double omega,
                  const NoiseParams& noise, const EvolveOptions& options) {
  validate(schedule);
  validate(noise);
  if (!(omega > 0.0) || !std::isfinite(omega)) throw ParameterError("evolve: omega must be positive");
  if (!initial.is_centered()) throw ParameterError("evolve: initial state must have zero mean");

  const double tau = schedule.tau;
  const int n = options.steps_per_half_cycle > 0 ? options.steps_per_half_cycle
                                                 : default_steps_per_half_cycle(tau, omega);
  const double h = tau / n;
  if (h > max_step(tau, omega) * (1.0 + 1e-12)) {
    std::ostringstream msg;
    msg << "evolve: step " << h << " exceeds min(tau/1000, 0.01/omega) = " << max_step(tau, omega);
    throw ParameterError(msg.str());
  }

  Trajectory traj;
  traj.step = h;
  traj.steps_per_half_cycle = n;
  traj.cycles = schedule.cycles;
  if (omega * tau < 1.0) {
    traj.warnings.emplace_back("omega*tau < 1: the cycle is shorter than the mode period");
  }

  const std::size_t total_steps = static_cast<std::size_t>(2 * schedule.cycles) * n;
  traj.times.reserve(total_steps + 1);
  traj.states.reserve(total_steps + 1);
  traj.times.push_back(0.0);
  traj.states.push_back(initial);

  const double g_peak = schedule.g_tau * options.coupling_scale;
  const Matrix2 r0_factor = cholesky(initial.covariance());
  const long double r0_det = initial.determinant();
  // R(t) = S R0 S^T + Sigma with dS/dt = W~ S, S(0) = I and Sigma obeying the full
  // Lyapunov equation from Sigma(0) = 0. Both are the same linear equation split by
  // superposition. S stays O(sqrt|R|), and R0 = L L^T gives S R0 S^T = (S L)(S L)^T, which
  // keeps det R resolved under strong squeezing.
  WideMatrix2 transfer = WideMatrix2::identity();
  Matrix2 noise_part{};
  const bool noisy = noise.kappa > 0.0;
  std::size_t k = 0;
  for (int half = 0; half < 2 * schedule.cycles; ++half) {
    const bool rising = half % 2 == 0;
    // Coupling from the local ramp coordinate, so turning points are exact grid points.
    const auto coupling = [&](double local) {
      const double u = local / tau;
      return g_peak * ramp_profile(schedule.ramp, rising ? u : 1.0 - u);
    };
    for (int j = 0; j < n; ++j) {
      const double local = j * h;
      const DriftMatrices m0 = drift_matrices(coupling(local), omega, noise);
      const DriftMatrices mh = drift_matrices(coupling(local + 0.5 * h), omega, noise);
      const DriftMatrices m1 = drift_matrices(coupling(j + 1 == n ? tau : local + h), omega, noise);

      const long double hl = h;
      const WideMatrix2 s1 = m0.drift * transfer;
      const WideMatrix2 s2 = mh.drift * (transfer + (0.5L * hl) * s1);
      const WideMatrix2 s3 = mh.drift * (transfer + (0.5L * hl) * s2);
      const WideMatrix2 s4 = m1.drift * (transfer + hl * s3);
      transfer = transfer + (hl / 6.0L) * (s1 + 2.0L * s2 + 2.0L * s3 + s4);

      if (noisy) {
        const Matrix2 k1 = lyapunov_rhs(m0, noise_part);
        const Matrix2 k2 = lyapunov_rhs(mh, noise_part + (0.5 * h) * k1);
        const Matrix2 k3 = lyapunov_rhs(mh, noise_part + (0.5 * h) * k2);
        const Matrix2 k4 = lyapunov_rhs(m1, noise_part + h * k3);
        noise_part = (noise_part + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)).symmetrized();
      }

      ++k;
      const double t = static_cast<double>(k) * tau / n;
      if (!transfer.is_finite() || !noise_part.is_finite()) {
        std::ostringstream msg;
        msg << "evolve: covariance became non-finite at t = " << t;
        throw NumericalError(msg.str());
      }
      const long double pure_det =
          std::exp(-2.0L * noise.kappa * static_cast<long double>(t)) * r0_det;
      Assembled next = assemble(transfer * r0_factor, noise_part, pure_det);
      traj.max_det_drift = std::fmax(traj.max_det_drift, next.det_drift);
      traj.times.push_back(t);
      traj.states.push_back(std::move(next.state));
    }
  }
  return traj;
}

std::vector<CycleRecord> cycle_samples(const Trajectory& trajectory) {
  std::vector<CycleRecord> out;
  out.reserve(trajectory.cycles);
  for (int m = 1; m <= trajectory.cycles; ++m) {
    const std::size_t idx = trajectory.cycle_index(m);
    const CovarianceState& s = trajectory.states.at(idx);
    out.push_back({m, trajectory.times.at(idx), boson_number(s), purity(s),
                   squeezing_decomposition(s), s.covariance()});
  }
  return out;
}

}  // namespace critcycle
