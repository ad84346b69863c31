#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>

#include <Eigen/Dense>

#include "rmtedge/orthopoly.hpp"
#include "rmtedge/quadrature.hpp"

using namespace rmtedge;

namespace {

const RecurrenceTable& hermite_table() {
  static const RecurrenceTable t = compute_recurrence(Potential::hermite(), 80);
  return t;
}

const RecurrenceTable& quartic_table() {
  static const RecurrenceTable t = compute_recurrence(Potential::quartic(), 60);
  return t;
}

// b_j^2 = H_j H_{j+2} / H_{j+1}^2 from Hankel determinants of the even-weight
// moments mu_{2k} = int x^{2k} e^{-x^{2m}} dx = Gamma((2k+1)/(2m)) / m.
double hankel_b(int m, int j) {
  auto moment = [m](int k) {
    return k % 2 ? 0.0L : std::tgamma((k + 1.0L) / (2.0L * m)) / m;
  };
  auto hankel = [&](int n) {
    if (n == 0) return 1.0L;
    Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic> h(n, n);
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k) h(i, k) = moment(i + k);
    return h.fullPivLu().determinant();
  };
  return static_cast<double>(std::sqrt(hankel(j) * hankel(j + 2) / (hankel(j + 1) * hankel(j + 1))));
}

}  // namespace

TEST_CASE("Hermite recurrence matches the closed form") {
  const RecurrenceTable& t = hermite_table();
  for (int j = 0; j <= 60; ++j) {
    CHECK(std::abs(t.a[j]) < 1e-12);
    CHECK(std::abs(t.b[j] - std::sqrt((j + 1) / 2.0)) < 1e-10);
  }
  CHECK(t.norm0 == doctest::Approx(std::sqrt(std::numbers::pi)).epsilon(1e-13));
  CHECK(t.orthonormality_residual < 1e-12);
}

TEST_CASE("Stieltjes output agrees with the moment-determinant construction") {
  for (int j = 0; j < 6; ++j) {
    CHECK(hermite_table().b[j] == doctest::Approx(hankel_b(1, j)).epsilon(1e-10));
    CHECK(quartic_table().b[j] == doctest::Approx(hankel_b(2, j)).epsilon(1e-10));
  }
}

TEST_CASE("Freud relation for x^4") {
  const RecurrenceTable& t = quartic_table();
  for (int j = 1; j <= 40; ++j) {
    const double b2 = t.b[j] * t.b[j];
    const double lhs = 4.0 * b2 * (t.b[j - 1] * t.b[j - 1] + b2 + t.b[j + 1] * t.b[j + 1]);
    CHECK(std::abs(lhs - (j + 1)) < 1e-8 * (j + 1));
  }
  CHECK(string_equation_residual(t, 40) < 1e-8);
}

TEST_CASE("string equations for a non-even potential") {
  const RecurrenceTable t = compute_recurrence(Potential({0, 0, 1, 1, 1}), 50);
  CHECK(string_equation_residual(t, 40) < 1e-8);
  CHECK(t.orthonormality_residual < 1e-10);
}

TEST_CASE("phi_0 and parity") {
  const RecurrenceTable& t = hermite_table();
  for (double x : {-3.0, -0.4, 0.0, 1.7, 5.0}) {
    CHECK(std::abs(eval_phi(t, 0, x)[0] - std::pow(std::numbers::pi, -0.25) * std::exp(-x * x / 2)) < 1e-12);
    const auto p = eval_phi(t, 60, x), q = eval_phi(t, 60, -x);
    for (int j = 0; j <= 60; ++j) CHECK(std::abs(q[j] - (j % 2 ? -p[j] : p[j])) < 1e-12);
  }
  CHECK_THROWS_AS(eval_phi(t, t.capacity() + 1, 0.0), std::out_of_range);
}

TEST_CASE("derivative of phi against central differences") {
  const RecurrenceTable& t = quartic_table();
  std::vector<double> phi(31), dphi(31);
  const double x = 0.83, h = 1e-5;
  eval_phi_with_derivative(t, 30, x, phi, dphi);
  const auto pp = eval_phi(t, 30, x + h), pm = eval_phi(t, 30, x - h);
  for (int j = 0; j <= 30; ++j) CHECK(std::abs(dphi[j] - (pp[j] - pm[j]) / (2 * h)) < 1e-7);
}

TEST_CASE("Christoffel-Darboux kernel") {
  const RecurrenceTable& t = hermite_table();
  const int N = 40;
  for (double x : {-4.0, 0.3, 7.5})
    for (double y : {-2.0, 0.31, 8.0}) {
      CHECK(cd_kernel(t, N, x, y) == doctest::Approx(cd_kernel(t, N, y, x)).epsilon(1e-12));
      CHECK(cd_kernel_ratio(t, N, x, y) == doctest::Approx(cd_kernel_sum(t, N, x, y)).epsilon(1e-9).scale(1e-3));
    }
  // ratio vs sum in the overlap of the switch
  const double tau = 1e-4 * kernel_length_scale(t, N);
  for (double x : {-5.0, 0.0, 2.5, 8.9}) {
    const double s = cd_kernel_sum(t, N, x, x + 2 * tau);
    CHECK(std::abs(cd_kernel_ratio(t, N, x, x + 2 * tau) - s) < 1e-9 * std::max(std::abs(s), 1e-3));
  }
  // total mass of the one-point function
  const CompositeGrid g(t.lo, t.hi, 40, 20);
  double mass = 0.0;
  for (int i = 0; i < g.size(); ++i) mass += g.weights()[i] * cd_kernel(t, N, g.nodes()[i], g.nodes()[i]);
  CHECK(mass == doctest::Approx(N).epsilon(1e-10));
}

TEST_CASE("correlation determinants") {
  const RecurrenceTable& t = hermite_table();
  const int N = 20;
  const double x = 0.4, y = -1.1, z = 2.3;
  const std::vector<double> one{x}, two{x, y}, rep{x, x};
  CHECK(correlation_det(t, N, one) == doctest::Approx(cd_kernel(t, N, x, x)));
  const double kxy = cd_kernel(t, N, x, y);
  CHECK(correlation_det(t, N, two) ==
        doctest::Approx(cd_kernel(t, N, x, x) * cd_kernel(t, N, y, y) - kxy * kxy).epsilon(1e-13));
  CHECK(std::abs(correlation_det(t, N, rep)) < 1e-10 * cd_kernel(t, N, x, x) * cd_kernel(t, N, x, x));
  const std::vector<double> three{x, y, z};
  CHECK(correlation_det(t, N, three) >= 0.0);
}

TEST_CASE("recurrence CSV round trip") {
  const auto path = std::filesystem::temp_directory_path() / "rmtedge_recurrence_test.csv";
  write_recurrence_csv(quartic_table(), path);
  const RecurrenceTable r = read_recurrence_csv(path);
  CHECK(r.potential == quartic_table().potential);
  CHECK(r.a == quartic_table().a);
  CHECK(r.b == quartic_table().b);
  CHECK(r.norm0 == quartic_table().norm0);
  CHECK(eval_phi(r, 20, 0.7)[20] == doctest::Approx(eval_phi(quartic_table(), 20, 0.7)[20]).epsilon(1e-14));
  std::filesystem::remove(path);
  CHECK_THROWS(read_recurrence_csv(path));
}
