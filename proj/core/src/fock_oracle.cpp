#include "critcycle/fock_oracle.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <algorithm>
#include <complex>
#include <sstream>

namespace critcycle {

namespace {

using cd = std::complex<double>;
constexpr cd kI{0.0, 1.0};
constexpr double kNegativeEigenTolerance = 1e-9;

// Pentadiagonal real symmetric Hamiltonian: diagonal and the +-2 band.
struct BandedHamiltonian {
  Eigen::VectorXd diag;
  Eigen::VectorXd band2;  // H(n, n+2) = H(n+2, n)
};

BandedHamiltonian hamiltonian(int dim, double g, double omega) {
  const double c = 0.25 * g * g * omega;
  BandedHamiltonian h{Eigen::VectorXd(dim), Eigen::VectorXd::Zero(std::max(dim - 2, 0))};
  for (int n = 0; n < dim; ++n) h.diag[n] = omega * n - c * (2.0 * n + 1.0);
  for (int n = 0; n + 2 < dim; ++n) h.band2[n] = c * std::sqrt((n + 1.0) * (n + 2.0));
  return h;
}

// -i H psi
void schroedinger_rhs(const BandedHamiltonian& h, const Eigen::VectorXcd& psi, Eigen::VectorXcd& out) {
  const int dim = static_cast<int>(psi.size());
  for (int n = 0; n < dim; ++n) {
    cd acc = h.diag[n] * psi[n];
    if (n + 2 < dim) acc += h.band2[n] * psi[n + 2];
    if (n >= 2) acc += h.band2[n - 2] * psi[n - 2];
    out[n] = -kI * acc;
  }
}

// -i [H, rho] + kappa (n_th + 1) D[a] rho + kappa n_th D[a^dag] rho
void lindblad_rhs(const BandedHamiltonian& h, const NoiseParams& noise, const Eigen::MatrixXcd& rho,
                  Eigen::MatrixXcd& out) {
  const int dim = static_cast<int>(rho.rows());
  const double down = noise.kappa * (noise.n_th + 1.0);
  const double up = noise.kappa * noise.n_th;
  for (int j = 0; j < dim; ++j) {
    for (int i = 0; i < dim; ++i) {
      cd h_rho = h.diag[i] * rho(i, j);
      if (i + 2 < dim) h_rho += h.band2[i] * rho(i + 2, j);
      if (i >= 2) h_rho += h.band2[i - 2] * rho(i - 2, j);
      cd rho_h = rho(i, j) * h.diag[j];
      if (j + 2 < dim) rho_h += rho(i, j + 2) * h.band2[j];
      if (j >= 2) rho_h += rho(i, j - 2) * h.band2[j - 2];
      cd value = -kI * (h_rho - rho_h);

      if (down != 0.0 || up != 0.0) {
        // a rho a^dag, a^dag rho a and the anticommutators with a^dag a, a a^dag.
        const cd lower = (i + 1 < dim && j + 1 < dim)
                             ? std::sqrt((i + 1.0) * (j + 1.0)) * rho(i + 1, j + 1)
                             : cd{0.0};
        const cd raise = (i >= 1 && j >= 1) ? std::sqrt(double(i) * j) * rho(i - 1, j - 1) : cd{0.0};
        value += down * (lower - 0.5 * (i + j) * rho(i, j));
        value += up * (raise - 0.5 * (i + j + 2.0) * rho(i, j));
      }
      out(i, j) = value;
    }
  }
}

template <typename State>
struct RkBuffers {
  State k1, k2, k3, k4, tmp;
};

template <typename State, typename Rhs>
void rk4_step(State& y, double h, const Rhs& rhs, const BandedHamiltonian& h0,
              const BandedHamiltonian& hh, const BandedHamiltonian& h1,
              RkBuffers<State>& w) {
  rhs(h0, y, w.k1);
  w.tmp = y + (0.5 * h) * w.k1;
  rhs(hh, w.tmp, w.k2);
  w.tmp = y + (0.5 * h) * w.k2;
  rhs(hh, w.tmp, w.k3);
  w.tmp = y + h * w.k3;
  rhs(h1, w.tmp, w.k4);
  y += (h / 6.0) * (w.k1 + 2.0 * w.k2 + 2.0 * w.k3 + w.k4);
}

void check_dim(int dim) {
  if (dim < kMinFockDim) {
    std::ostringstream msg;
    msg << "Fock truncation " << dim << " below minimum " << kMinFockDim;
    throw ParameterError(msg.str());
  }
}

Eigen::MatrixXcd hermitian_sqrt(const Eigen::MatrixXcd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(m);
  const Eigen::VectorXd& ev = solver.eigenvalues();
  if (ev.minCoeff() < -kNegativeEigenTolerance) {
    std::ostringstream msg;
    msg << "density matrix has eigenvalue " << ev.minCoeff();
    throw NumericalError(msg.str());
  }
  const Eigen::VectorXd roots = ev.cwiseMax(0.0).cwiseSqrt();
  return solver.eigenvectors() * roots.asDiagonal() * solver.eigenvectors().adjoint();
}

// <a> and <a^2>
std::pair<cd, cd> ladder_moments(const FockState& state) {
  const int dim = state.dim();
  cd a1{0.0};
  cd a2{0.0};
  if (state.is_pure()) {
    const Eigen::VectorXcd& psi = state.amplitudes();
    for (int n = 0; n + 1 < dim; ++n) a1 += std::conj(psi[n]) * std::sqrt(n + 1.0) * psi[n + 1];
    for (int n = 0; n + 2 < dim; ++n) {
      a2 += std::conj(psi[n]) * std::sqrt((n + 1.0) * (n + 2.0)) * psi[n + 2];
    }
  } else {
    const Eigen::MatrixXcd rho = state.density_matrix();
    for (int n = 0; n + 1 < dim; ++n) a1 += rho(n + 1, n) * std::sqrt(n + 1.0);
    for (int n = 0; n + 2 < dim; ++n) a2 += rho(n + 2, n) * std::sqrt((n + 1.0) * (n + 2.0));
  }
  return {a1, a2};
}

}  // namespace

FockState FockState::pure(Eigen::VectorXcd amplitudes) {
  check_dim(static_cast<int>(amplitudes.size()));
  return FockState(std::move(amplitudes));
}

FockState FockState::mixed(Eigen::MatrixXcd density) {
  if (density.rows() != density.cols()) throw ParameterError("density matrix must be square");
  check_dim(static_cast<int>(density.rows()));
  return FockState(std::move(density));
}

int FockState::dim() const {
  return is_pure() ? static_cast<int>(amplitudes().size())
                   : static_cast<int>(std::get<Eigen::MatrixXcd>(data_).rows());
}

Eigen::MatrixXcd FockState::density_matrix() const {
  if (is_pure()) return amplitudes() * amplitudes().adjoint();
  return std::get<Eigen::MatrixXcd>(data_);
}

Eigen::VectorXd FockState::populations() const {
  if (is_pure()) return amplitudes().cwiseAbs2();
  return std::get<Eigen::MatrixXcd>(data_).diagonal().real();
}

FockState fock_vacuum(int dim) { return fock_number_state(dim, 0); }

FockState fock_number_state(int dim, int n) {
  check_dim(dim);
  if (n < 0 || n >= dim) throw ParameterError("Fock level outside truncation");
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(dim);
  psi[n] = 1.0;
  return FockState::pure(std::move(psi));
}

FockState fock_thermal(int dim, double n_th) {
  check_dim(dim);
  if (!(n_th >= 0.0)) throw ParameterError("thermal occupation must be non-negative");
  if (n_th == 0.0) return FockState::mixed(fock_vacuum(dim).density_matrix());
  const double ratio = n_th / (n_th + 1.0);
  Eigen::VectorXd p(dim);
  double weight = 1.0;
  for (int n = 0; n < dim; ++n) {
    p[n] = weight;
    weight *= ratio;
  }
  p /= p.sum();
  return FockState::mixed(p.cast<cd>().asDiagonal());
}

double tail_population(const FockState& state) {
  const Eigen::VectorXd pops = state.populations();
  const int dim = state.dim();
  // Rounded up: at D = 16 a single top level can be an odd one that squeezed states never fill.
  const int start = dim - (dim + 9) / 10;
  return pops.tail(dim - start).sum();
}

int default_fock_dim(int cycles) { return cycles <= 2 ? 128 : 256; }

FockState evolve_fock(const FockState& initial, const ProtocolSchedule& schedule, double omega,
                      const NoiseParams& noise, const FockEvolveOptions& options) {
  validate(schedule);
  validate(noise);
  if (!(omega > 0.0)) throw ParameterError("evolve_fock: omega must be positive");
  if (options.steps_per_half_cycle < 1) throw ParameterError("evolve_fock: steps must be positive");

  const int dim = initial.dim();
  const int n = options.steps_per_half_cycle;
  const double tau = schedule.tau;
  const double h = tau / n;
  const double g_peak = schedule.g_tau * options.coupling_scale;
  const bool unitary = noise.kappa == 0.0 && initial.is_pure();

  const auto run = [&](auto y, auto rhs) {
    using State = decltype(y);
    RkBuffers<State> work{y, y, y, y, y};
    for (int half = 0; half < 2 * schedule.cycles; ++half) {
      const bool rising = half % 2 == 0;
      const auto coupling = [&](double local) {
        const double u = local / tau;
        return g_peak * ramp_profile(schedule.ramp, rising ? u : 1.0 - u);
      };
      for (int j = 0; j < n; ++j) {
        const double local = j * h;
        const BandedHamiltonian h0 = hamiltonian(dim, coupling(local), omega);
        const BandedHamiltonian hh = hamiltonian(dim, coupling(local + 0.5 * h), omega);
        const BandedHamiltonian h1 = hamiltonian(dim, coupling(j + 1 == n ? tau : local + h), omega);
        rk4_step(y, h, rhs, h0, hh, h1, work);
      }
      if (!y.allFinite()) {
        std::ostringstream msg;
        msg << "evolve_fock: state became non-finite by t = " << (half + 1) * tau;
        throw NumericalError(msg.str());
      }
    }
    return y;
  };

  FockState result = unitary
      ? FockState::pure(run(initial.amplitudes(),
                            [](const BandedHamiltonian& hm, const Eigen::VectorXcd& s,
                               Eigen::VectorXcd& o) { schroedinger_rhs(hm, s, o); }))
      : FockState::mixed(run(initial.density_matrix(),
                             [&noise](const BandedHamiltonian& hm, const Eigen::MatrixXcd& s,
                                      Eigen::MatrixXcd& o) { lindblad_rhs(hm, noise, s, o); }));

  if (options.check_tail) {
    const double tail = tail_population(result);
    if (tail > kTailTolerance) {
      std::ostringstream msg;
      msg << "Fock truncation D = " << dim << " not converged (tail population " << tail
          << "); retry with D = " << 2 * dim;
      throw OracleConvergenceError(msg.str(), 2 * dim);
    }
  }
  return result;
}

double fock_boson_number(const FockState& state) {
  const Eigen::VectorXd pops = state.populations();
  double n = 0.0;
  for (int k = 0; k < pops.size(); ++k) n += k * pops[k];
  return n;
}

CovarianceState covariance_of(const FockState& state) {
  const auto [a1, a2] = ladder_moments(state);
  const double n = fock_boson_number(state);
  const double mean_x = 2.0 * a1.real();
  const double mean_p = 2.0 * a1.imag();
  const double xx = 2.0 * a2.real() + 2.0 * n + 1.0 - mean_x * mean_x;
  const double pp = -2.0 * a2.real() + 2.0 * n + 1.0 - mean_p * mean_p;
  const double xp = 2.0 * a2.imag() - mean_x * mean_p;
  return CovarianceState(Matrix2{xx, xp, xp, pp}, Vec2{mean_x, mean_p});
}

double quadrature_fourth_cumulant(const FockState& state) {
  const int dim = state.dim();
  // x acting on the truncated space; the top levels are empty for converged states.
  Eigen::MatrixXcd x = Eigen::MatrixXcd::Zero(dim, dim);
  for (int k = 0; k + 1 < dim; ++k) {
    x(k, k + 1) = std::sqrt(k + 1.0);
    x(k + 1, k) = std::sqrt(k + 1.0);
  }
  if (state.is_pure()) {
    const Eigen::VectorXcd x1 = x * state.amplitudes();
    const Eigen::VectorXcd x2 = x * x1;
    const double second = x1.squaredNorm();
    return x2.squaredNorm() - 3.0 * second * second;
  }
  const Eigen::MatrixXcd rho = state.density_matrix();
  const Eigen::MatrixXcd x2 = x * x;
  const double second = (rho * x2).trace().real();
  const double fourth = (rho * x2 * x2).trace().real();
  return fourth - 3.0 * second * second;
}

double fidelity(const FockState& lhs, const FockState& rhs) {
  if (lhs.dim() != rhs.dim()) throw ParameterError("fidelity: truncations differ");
  if (lhs.is_pure() && rhs.is_pure()) return std::abs(lhs.amplitudes().dot(rhs.amplitudes()));
  const Eigen::MatrixXcd root = hermitian_sqrt(lhs.density_matrix());
  Eigen::MatrixXcd inner = root * rhs.density_matrix() * root;
  inner = 0.5 * (inner + inner.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(inner, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd& ev = solver.eigenvalues();
  if (ev.minCoeff() < -kNegativeEigenTolerance) {
    throw NumericalError("fidelity: negative eigenvalue in sqrt(rho) sigma sqrt(rho)");
  }
  return ev.cwiseMax(0.0).cwiseSqrt().sum();
}

double bures_qfi(const FockState& minus, const FockState& plus, double eps) {
  if (!(eps > 0.0)) throw ParameterError("bures_qfi: eps must be positive");
  const double f = std::fmin(fidelity(minus, plus), 1.0);
  const double bures_sq = 2.0 * (1.0 - f);
  return bures_sq / (eps * eps);
}

}  // namespace critcycle
