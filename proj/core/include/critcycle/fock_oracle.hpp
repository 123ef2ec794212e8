#pragma once

#include <Eigen/Dense>
#include <variant>

#include "critcycle/errors.hpp"
#include "critcycle/gaussian_state.hpp"
#include "critcycle/propagator.hpp"
#include "critcycle/protocol.hpp"

namespace critcycle {

/**
 * Truncated Fock-space reference for the Gaussian pipeline.
 *
 * The generator is the master equation itself (Hamiltonian plus thermal
 * dissipator) on a D-level truncation, so it shares no code with the covariance
 * propagator. The Hamiltonian couples g to the p quadrature,
 *   H = omega a^dag a - (g^2 omega / 4) p^2,   p = i(a^dag - a),
 * which is the operator whose Heisenberg drift is the covariance drift above.
 */
class FockState {
 public:
  static FockState pure(Eigen::VectorXcd amplitudes);
  static FockState mixed(Eigen::MatrixXcd density);

  int dim() const;
  bool is_pure() const { return std::holds_alternative<Eigen::VectorXcd>(data_); }
  /// Valid only for pure states.
  const Eigen::VectorXcd& amplitudes() const { return std::get<Eigen::VectorXcd>(data_); }
  Eigen::MatrixXcd density_matrix() const;

  /// Population of each Fock level.
  Eigen::VectorXd populations() const;

 private:
  explicit FockState(std::variant<Eigen::VectorXcd, Eigen::MatrixXcd> data) : data_(std::move(data)) {}
  std::variant<Eigen::VectorXcd, Eigen::MatrixXcd> data_;
};

/// Thrown when the truncation is too small for the evolved state.
class OracleConvergenceError : public NumericalError {
 public:
  OracleConvergenceError(const std::string& what, int suggested_dim)
      : NumericalError(what), suggested_dim_(suggested_dim) {}
  int suggested_dim() const { return suggested_dim_; }

 private:
  int suggested_dim_;
};

inline constexpr int kMinFockDim = 16;
inline constexpr double kTailTolerance = 1e-8;

FockState fock_vacuum(int dim);
FockState fock_number_state(int dim, int n);
/// Truncated and renormalised Bose-Einstein state.
FockState fock_thermal(int dim, double n_th);

struct FockEvolveOptions {
  int steps_per_half_cycle{20000};
  double coupling_scale{1.0};
  bool check_tail{true};
};

/// Population held by the top 10% of levels (rounded up to whole levels).
double tail_population(const FockState& state);

/// Default truncation: 128 up to two cycles, 256 for three.
int default_fock_dim(int cycles);

/**
 * RK4 integration of the Schroedinger equation (kappa = 0, pure input) or of the
 * Lindblad equation, on the same grid layout as evolve(). Throws
 * OracleConvergenceError if the final tail population exceeds 1e-8.
 */
FockState evolve_fock(const FockState& initial, const ProtocolSchedule& schedule, double omega,
                      const NoiseParams& noise, const FockEvolveOptions& options = {});

double fock_boson_number(const FockState& state);

/// Symmetrised second moments of x = a + a^dag and p = i(a^dag - a).
CovarianceState covariance_of(const FockState& state);

/// <x^4> - 3 <x^2>^2; zero for centered Gaussian states.
double quadrature_fourth_cumulant(const FockState& state);

/// Uhlmann fidelity Tr sqrt(sqrt(rho) sigma sqrt(rho)).
double fidelity(const FockState& lhs, const FockState& rhs);

/// I = 4 (d_B / 2 eps)^2 from states at parameter -eps and +eps.
double bures_qfi(const FockState& minus, const FockState& plus, double eps);

}  // namespace critcycle
