#include "critcycle/gaussian_state.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "critcycle/errors.hpp"

namespace critcycle {

namespace {

constexpr double kDegenerateSplitting = 1e-12;

struct Eigen2 {
  double low;
  double high;
};

// Closed-form eigenvalues of a symmetric 2x2 matrix. The small one comes from
// det / high, which avoids the cancellation in half_trace - radius.
Eigen2 symmetric_eigenvalues(const Matrix2& r, double det) {
  const double half_trace = 0.5 * r.trace();
  const double half_gap = 0.5 * (r.a - r.d);
  const double high = half_trace + std::hypot(half_gap, r.b);
  return {det / high, high};
}

}  // namespace

double physicality_tolerance(const Matrix2& r) {
  // det R cannot be resolved below the rounding of its two products.
  const double rounding = 16.0 * std::numeric_limits<double>::epsilon() *
                          (std::fabs(r.a * r.d) + std::fabs(r.b * r.c));
  return std::fmax(kPhysicalityTolerance, rounding);
}

namespace {

void check_entries(const Matrix2& covariance, Vec2 mean) {
  if (!covariance.is_finite() || !std::isfinite(mean.x) || !std::isfinite(mean.p)) {
    throw UnphysicalStateError("covariance state has non-finite entries");
  }
  if (std::fabs(covariance.b - covariance.c) > kSymmetryTolerance) {
    std::ostringstream msg;
    msg << "covariance matrix is not symmetric (R01 - R10 = " << covariance.b - covariance.c << ")";
    throw UnphysicalStateError(msg.str());
  }
}

[[noreturn]] void throw_unphysical(double det) {
  std::ostringstream msg;
  msg.precision(17);
  msg << "covariance matrix violates the uncertainty relation (det R = " << det << ")";
  throw UnphysicalStateError(msg.str());
}

}  // namespace

CovarianceState::CovarianceState(const Matrix2& covariance, Vec2 mean)
    : covariance_(covariance), determinant_(covariance.determinant()), mean_(mean) {
  check_entries(covariance, mean);
  if (covariance.a <= 0.0 || determinant_ < 1.0 - physicality_tolerance(covariance)) {
    throw_unphysical(determinant_);
  }
}

CovarianceState::CovarianceState(const Matrix2& covariance, double determinant, Vec2 mean)
    : covariance_(covariance), determinant_(determinant), mean_(mean) {
  check_entries(covariance, mean);
  if (!std::isfinite(determinant) ||
      std::fabs(determinant - covariance.determinant()) > physicality_tolerance(covariance)) {
    throw UnphysicalStateError("supplied determinant disagrees with the covariance entries");
  }
  if (covariance.a <= 0.0 || determinant_ < 1.0 - kPhysicalityTolerance) {
    throw_unphysical(determinant_);
  }
}

CovarianceState vacuum_state() { return CovarianceState(Matrix2::identity()); }

CovarianceState thermal_state(double n_beta) {
  if (!(n_beta >= 0.0) || !std::isfinite(n_beta)) {
    throw ParameterError("thermal occupation must be finite and non-negative");
  }
  const double v = 2.0 * n_beta + 1.0;
  return CovarianceState(Matrix2::diagonal(v, v));
}

double boson_number(const CovarianceState& state) {
  const Matrix2& r = state.covariance();
  if (state.determinant() < 1.0 - kRejectionTolerance) {
    throw UnphysicalStateError("boson_number: unphysical covariance");
  }
  const double n = 0.25 * (r.trace() - 2.0);
  // Trace >= 2 sqrt(det) >= 2 for physical R; anything below is round-off.
  return n < 0.0 && n >= -kPhysicalityTolerance ? 0.0 : n;
}

double purity(const CovarianceState& state) {
  double det = state.determinant();
  if (det < 1.0 - kRejectionTolerance) {
    throw UnphysicalStateError("purity: unphysical covariance");
  }
  det = std::max(det, 1.0);
  return 1.0 / std::sqrt(det);
}

double fold_angle(double angle) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double folded = std::remainder(angle, two_pi);  // [-pi, pi]
  if (folded <= -std::numbers::pi) folded += two_pi;
  return folded;
}

SqueezingDecomposition squeezing_decomposition(const CovarianceState& state) {
  const Matrix2& r = state.covariance();
  const double det = std::max(state.determinant(), 1.0);
  const auto [low, high] = symmetric_eigenvalues(r, det);

  SqueezingDecomposition out;
  out.thermal_occupation = 0.5 * (std::sqrt(det) - 1.0);
  out.magnitude = 0.25 * std::log(high / low);
  if (high - low < kDegenerateSplitting) {
    out.magnitude = 0.0;
    out.angle = 0.0;
    return out;
  }
  // Major axis sits at phi = atan2(2 R01, R00 - R11) / 2; the minor axis is a quarter
  // turn away, so theta = 2 (phi + pi/2). Folding also resolves the eigenvector sign.
  out.angle = fold_angle(std::atan2(2.0 * r.b, r.a - r.d) + std::numbers::pi);
  return out;
}

Matrix2 reconstruct_covariance(const SqueezingDecomposition& decomposition) {
  const double scale = 2.0 * decomposition.thermal_occupation + 1.0;
  const double stretch = std::exp(2.0 * decomposition.magnitude);
  const Matrix2 rot = Matrix2::rotation(0.5 * decomposition.angle);
  const Matrix2 diag = Matrix2::diagonal(scale / stretch, scale * stretch);
  return (rot * diag * rot.transposed()).symmetrized();
}

double wigner_at(const CovarianceState& state, Vec2 point) {
  const Matrix2& r = state.covariance();
  if (!(state.determinant() > 0.0)) {
    throw UnphysicalStateError("wigner_at: singular covariance");
  }
  const Vec2 delta{point.x - state.mean().x, point.p - state.mean().p};
  const Vec2 solved = r.inverse(state.determinant()) * delta;
  const double quadratic = delta.x * solved.x + delta.p * solved.p;
  return purity(state) / (2.0 * std::numbers::pi) * std::exp(-quadratic);
}

}  // namespace critcycle
