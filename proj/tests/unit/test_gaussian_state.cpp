#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "critcycle/errors.hpp"
#include "critcycle/gaussian_state.hpp"

using namespace critcycle;
using std::numbers::pi;

namespace {

// Rot(phi) diag(low, high) Rot(phi)^T written out by hand.
Matrix2 rotated_diagonal(double low, double high, double phi) {
  const double c = std::cos(phi);
  const double s = std::sin(phi);
  const double off = (low - high) * c * s;
  return {low * c * c + high * s * s, off, off, low * s * s + high * c * c};
}

// Composite Simpson over a square of half-width `extent`, n intervals per side.
template <class F>
double simpson_2d(F f, double cx, double cp, double extent, int n) {
  const double h = 2.0 * extent / n;
  const auto weight = [n](int i) { return i == 0 || i == n ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0); };
  double sum = 0.0;
  for (int i = 0; i <= n; ++i) {
    for (int j = 0; j <= n; ++j) {
      sum += weight(i) * weight(j) * f(cx - extent + i * h, cp - extent + j * h);
    }
  }
  return sum * h * h / 9.0;
}

}  // namespace

TEST_SUITE("gaussian_state") {

TEST_CASE("vacuum and thermal scalars") {
  const CovarianceState vac = vacuum_state();
  CHECK(vac.covariance() == Matrix2::identity());
  CHECK(boson_number(vac) == 0.0);
  CHECK(purity(vac) == 1.0);

  const CovarianceState th = thermal_state(2.0);
  CHECK(boson_number(th) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(purity(th) == doctest::Approx(0.2).epsilon(1e-12));
  CHECK_THROWS_AS(thermal_state(-0.1), ParameterError);
  CHECK_THROWS_AS(thermal_state(std::nan("")), ParameterError);
}

TEST_CASE("boson_number inverts thermal_state") {
  for (double n : {0.0, 1e-6, 0.37, 1.0, 2.0, 17.5, 1e4}) {
    CHECK(std::fabs(boson_number(thermal_state(n)) - n) <= 1e-12 * std::fmax(1.0, n));
  }
}

TEST_CASE("squeezed vacuum occupation is sinh^2 r") {
  for (double r : {0.1, 0.5, 1.3, 3.0}) {
    const CovarianceState s(Matrix2::diagonal(std::exp(-2 * r), std::exp(2 * r)));
    CHECK(boson_number(s) == doctest::Approx(std::pow(std::sinh(r), 2)).epsilon(1e-12));
    CHECK(purity(s) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("construction enforces symmetry and physicality") {
  CHECK_THROWS_AS(CovarianceState(Matrix2{2.0, 0.1, 0.1 + 1e-11, 2.0}), UnphysicalStateError);
  CHECK_NOTHROW(CovarianceState(Matrix2{2.0, 0.1, 0.1 + 1e-13, 2.0}));
  CHECK_NOTHROW(CovarianceState(Matrix2::diagonal(1.0, 1.0 - 1e-10)));
  CHECK_THROWS_AS(CovarianceState(Matrix2::diagonal(1.0, 1.0 - 1e-8)), UnphysicalStateError);
  CHECK_THROWS_AS(CovarianceState(Matrix2::diagonal(0.5, 0.5)), UnphysicalStateError);
  CHECK_THROWS_AS(CovarianceState(Matrix2::diagonal(-2.0, -2.0)), UnphysicalStateError);
  CHECK_THROWS_AS(CovarianceState(Matrix2::diagonal(std::nan(""), 1.0)), UnphysicalStateError);
  CHECK_THROWS_AS(CovarianceState(Matrix2::identity(), Vec2{INFINITY, 0.0}), UnphysicalStateError);
}

TEST_CASE("supplied determinant must match the entries") {
  CHECK_NOTHROW(CovarianceState(Matrix2::identity(), 1.0));
  CHECK_THROWS_AS(CovarianceState(Matrix2::identity(), 1.1), UnphysicalStateError);
  CHECK_THROWS_AS(CovarianceState(Matrix2::identity(), std::nan("")), UnphysicalStateError);
}

TEST_CASE("round-off below the uncertainty floor is clamped") {
  const CovarianceState s(Matrix2::diagonal(1.0, 1.0 - 5e-10));
  CHECK(purity(s) == 1.0);
  CHECK(boson_number(s) == 0.0);
}

TEST_CASE("squeezing decomposition examples") {
  const auto d = squeezing_decomposition(CovarianceState(Matrix2::diagonal(1.0 / 3.0, 3.0)));
  CHECK(d.magnitude == doctest::Approx(std::log(3.0) / 2).epsilon(1e-12));
  CHECK(d.angle == doctest::Approx(0.0));
  CHECK(d.thermal_occupation == doctest::Approx(0.0));

  // Minor axis along (1, 1)/sqrt(2) -> theta = pi/2; along (1, -1)/sqrt(2) -> -pi/2.
  const auto up = squeezing_decomposition(CovarianceState(rotated_diagonal(0.25, 4.0, pi / 4)));
  CHECK(up.angle == doctest::Approx(pi / 2).epsilon(1e-12));
  const auto down = squeezing_decomposition(CovarianceState(rotated_diagonal(0.25, 4.0, -pi / 4)));
  CHECK(down.angle == doctest::Approx(-pi / 2).epsilon(1e-12));

  // Minor axis along p: v = (0, 1) -> theta = pi (fold keeps +pi).
  const auto along_p = squeezing_decomposition(CovarianceState(Matrix2::diagonal(3.0, 1.0 / 3.0)));
  CHECK(along_p.angle == doctest::Approx(pi).epsilon(1e-12));

  const auto iso = squeezing_decomposition(thermal_state(1.5));
  CHECK(iso.magnitude == 0.0);
  CHECK(iso.angle == 0.0);
  CHECK(iso.thermal_occupation == doctest::Approx(1.5).epsilon(1e-12));
}

TEST_CASE("decomposition and reconstruction are inverse") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> mag(0.0, 2.0);
  std::uniform_real_distribution<double> ang(-pi + 1e-9, pi);
  std::uniform_real_distribution<double> occ(0.0, 2.0);
  for (int trial = 0; trial < 500; ++trial) {
    const SqueezingDecomposition in{mag(rng), ang(rng), occ(rng)};
    const Matrix2 r = reconstruct_covariance(in);
    const CovarianceState state(r);
    const SqueezingDecomposition out = squeezing_decomposition(state);
    CHECK(out.magnitude == doctest::Approx(in.magnitude).epsilon(1e-9).scale(1.0));
    CHECK(out.thermal_occupation == doctest::Approx(in.thermal_occupation).epsilon(1e-9).scale(1.0));
    if (in.magnitude > 1e-3) {
      CHECK(std::fabs(fold_angle(out.angle - in.angle)) < 1e-8);
    }
    CHECK(max_abs_difference(reconstruct_covariance(out), r) <= 1e-9);
    // Rotation preserves the determinant and so the purity.
    CHECK(purity(state) == doctest::Approx(1.0 / (2 * in.thermal_occupation + 1)).epsilon(1e-12));
  }
}

TEST_CASE("wigner function values") {
  CHECK(wigner_at(vacuum_state(), {0, 0}) == doctest::Approx(1 / (2 * pi)).epsilon(1e-15));
  CHECK(wigner_at(vacuum_state(), {1, 0}) == doctest::Approx(std::exp(-1.0) / (2 * pi)).epsilon(1e-15));
  CHECK(wigner_at(thermal_state(2.0), {0, 0}) == doctest::Approx(1 / (10 * pi)).epsilon(1e-14));
  const CovarianceState shifted(Matrix2::identity(), Vec2{1.0, -2.0});
  CHECK(wigner_at(shifted, {1.0, -2.0}) == doctest::Approx(1 / (2 * pi)).epsilon(1e-15));
}

TEST_CASE("wigner function integrates to one half") {
  // The density as written, P/(2 pi) exp(-X^T R^-1 X), has total weight
  // P/(2 pi) * pi sqrt(det R) = 1/2 for every state.
  const std::vector<CovarianceState> states = {
      vacuum_state(), thermal_state(2.0),
      CovarianceState(rotated_diagonal(0.2, 5.0, 0.6)),
      CovarianceState(rotated_diagonal(0.9, 4.0, -1.1), Vec2{0.5, -0.3})};
  for (const CovarianceState& s : states) {
    const Matrix2& r = s.covariance();
    // +-8 standard deviations of the widest axis; W's variance along an axis is lambda/2.
    const double high = 0.5 * (r.trace() + std::hypot(r.a - r.d, 2 * r.b));
    const double extent = 8.0 * std::sqrt(0.5 * high);
    const double total = simpson_2d([&](double x, double p) { return wigner_at(s, {x, p}); },
                                    s.mean().x, s.mean().p, extent, 1200);
    CHECK(total == doctest::Approx(0.5).epsilon(2e-6));
  }
}

TEST_CASE("fold_angle maps into (-pi, pi]") {
  CHECK(fold_angle(pi) == doctest::Approx(pi));
  CHECK(fold_angle(-pi) == doctest::Approx(pi));
  CHECK(fold_angle(3 * pi / 2) == doctest::Approx(-pi / 2));
  CHECK(fold_angle(-7.5 * pi) == doctest::Approx(pi / 2));
  for (double a = -50.0; a < 50.0; a += 0.37) {
    const double f = fold_angle(a);
    CHECK(f > -pi);
    CHECK(f <= pi);
    CHECK(std::fabs(std::remainder(f - a, 2 * pi)) < 1e-12);
  }
}

}  // TEST_SUITE
