#pragma once

#include "critcycle/matrix2.hpp"

namespace critcycle {

/// Tolerances shared by every covariance-level check.
inline constexpr double kSymmetryTolerance = 1e-12;
inline constexpr double kPhysicalityTolerance = 1e-9;
inline constexpr double kRejectionTolerance = 1e-6;

/// Allowed shortfall of det(R) below 1: 1e-9, or the rounding floor of det R for
/// strongly squeezed states, whichever is larger.
double physicality_tolerance(const Matrix2& r);

/**
 * Single-mode Gaussian state in the quadrature convention
 * x = a + a^dagger, p = i(a^dagger - a).
 *
 * The covariance R satisfies det(R) >= 1 (vacuum has R = identity). Construction
 * validates symmetry and physicality; once built, a state is an immutable value.
 */
class CovarianceState {
 public:
  /// Throws UnphysicalStateError when R is asymmetric, non-finite, or det(R) < 1 - physicality_tolerance(R).
  explicit CovarianceState(const Matrix2& covariance, Vec2 mean = {});

  /**
   * For producers that know det(R) more accurately than the rounded entries
   * resolve it (the propagator forms it in extended precision). The supplied
   * value must agree with the entries to within physicality_tolerance(R) and is
   * itself held to det >= 1 - 1e-9.
   */
  CovarianceState(const Matrix2& covariance, double determinant, Vec2 mean = {});

  const Matrix2& covariance() const { return covariance_; }
  double determinant() const { return determinant_; }
  const Vec2& mean() const { return mean_; }
  bool is_centered() const { return mean_.x == 0.0 && mean_.p == 0.0; }

  friend bool operator==(const CovarianceState&, const CovarianceState&) = default;

 private:
  Matrix2 covariance_;
  double determinant_;
  Vec2 mean_;
};

struct SqueezingDecomposition {
  double magnitude{0.0};           // |s|
  double angle{0.0};               // theta in (-pi, pi]
  double thermal_occupation{0.0};  // n_kappa
};

CovarianceState vacuum_state();

/// R = (2 n_beta + 1) I. Throws ParameterError for negative or non-finite occupation.
CovarianceState thermal_state(double n_beta);

/// N = (Tr R - 2) / 4, with round-off below zero clamped.
double boson_number(const CovarianceState& state);

/// P = det(R)^(-1/2), clamped to at most 1.
double purity(const CovarianceState& state);

/**
 * Splits R into squeezing magnitude, squeezing angle and thermal occupation.
 *
 * The angle is 2 atan2(v_p, v_x) for the minor-axis eigenvector v with v_x >= 0,
 * folded into (-pi, pi]. Isotropic states report angle 0.
 */
SqueezingDecomposition squeezing_decomposition(const CovarianceState& state);

/// Inverse of squeezing_decomposition: Rot(theta/2) diag(lambda_min, lambda_max) Rot(theta/2)^T.
Matrix2 reconstruct_covariance(const SqueezingDecomposition& decomposition);

/// W(X) = P / (2 pi) exp(-(X - <X>)^T R^-1 (X - <X>)).
double wigner_at(const CovarianceState& state, Vec2 point);

/// Folds an angle into (-pi, pi].
double fold_angle(double angle);

}  // namespace critcycle
