#include <doctest.h>

#include <cmath>
#include <numbers>

#include "rmtedge/airy.hpp"
#include "rmtedge/quadrature.hpp"

using namespace rmtedge;

namespace {

// Maclaurin series Ai(x) = c1 f(x) - c2 g(x), summed in long double.
double airy_series(double xd, bool derivative) {
  const long double x = xd;
  const long double c1 = std::pow(3.0L, -2.0L / 3) / std::tgamma(2.0L / 3);
  const long double c2 = std::pow(3.0L, -1.0L / 3) / std::tgamma(1.0L / 3);
  long double f = 0, g = 0;
  long double tf = 1, tg = x;  // x^{3k} prod / (3k)!, x^{3k+1} prod / (3k+1)!
  for (int k = 0; k < 60; ++k) {
    if (derivative) {
      if (k > 0) f += tf * 3 * k / x;
      g += tg * (3 * k + 1) / x;
    } else {
      f += tf;
      g += tg;
    }
    tf *= x * x * x / ((3 * k + 2) * (3 * k + 3));
    tg *= x * x * x / ((3 * k + 3) * (3 * k + 4));
  }
  return static_cast<double>(c1 * f - c2 * g);
}

double integral(double a, double b, double (*f)(double)) {
  const CompositeGrid g(a, b, 64, 20);
  double s = 0.0;
  for (int i = 0; i < g.size(); ++i) s += g.weights()[i] * f(g.nodes()[i]);
  return s;
}

}  // namespace

TEST_CASE("Ai and Ai' against the Maclaurin series") {
  CHECK(std::abs(airy_eval(0.0).ai - 0.35502805388781723926) < 1e-12);
  for (double x = -2.5; x <= 2.5; x += 0.25) {
    CHECK(std::abs(airy_ai(x) - airy_series(x, false)) < 1e-12);
    if (x != 0.0) CHECK(std::abs(airy_ai_prime(x) - airy_series(x, true)) < 1e-12);
  }
}

TEST_CASE("Airy equation residual") {
  const double h = 1e-4;
  for (double x = -12.0; x <= 12.0; x += 0.7) {
    const double d2 = (airy_ai_prime(x + h) - airy_ai_prime(x - h)) / (2 * h);
    CHECK(std::abs(d2 - x * airy_ai(x)) < 1e-7 * std::max(1.0, std::abs(x)));
  }
}

TEST_CASE("Airy integrals") {
  CHECK(std::abs(airy_tail(0.0) - 1.0 / 3.0) < 1e-10);
  CHECK(std::abs(airy_head(0.0) - 2.0 / 3.0) < 1e-10);
  CHECK(std::abs(airy_eval(0.0).tail_integral - 1.0 / 3.0) < 1e-10);
  // independent quadrature of the tail
  for (double x : {-6.0, -1.0, 2.0, 5.0})
    CHECK(std::abs(airy_tail(x) - integral(x, 30.0, airy_ai)) < 1e-11);
}

TEST_CASE("airy_eval domain") {
  CHECK_THROWS_AS(airy_eval(-15.5), std::out_of_range);
  CHECK_THROWS_AS(airy_eval(30.5), std::out_of_range);
  CHECK_NOTHROW(airy_eval(kAiryMinArg));
}

TEST_CASE("Airy kernel representations") {
  for (double t : {-2.0, 0.0, 2.0}) {
    const double ai = airy_ai(t), d = airy_ai_prime(t);
    CHECK(std::abs(airy_kernel(t, t) - (d * d - t * ai * ai)) < 1e-10);
  }
  CHECK(std::abs(airy_kernel(0.0, 0.0) - 0.066987484) < 1e-8);
  for (double x = -3.0; x < 4.0; x += 0.37)
    for (double d : {6e-4, 1e-3, 2e-3, 0.5}) {
      const double a = airy_kernel_ratio(x, x + d), b = airy_kernel_integral(x, x + d);
      CHECK(std::abs(a - b) < 1e-9 * std::max(std::abs(b), 1e-3));
      CHECK(airy_kernel(x, x + d) == airy_kernel(x + d, x));
      CHECK(airy_kernel_integral(x, x + d) == doctest::Approx(airy_kernel_integral(x + d, x)).epsilon(1e-14));
    }
}

TEST_CASE("eta derivative of the Airy kernel") {
  const double h = 1e-5;
  for (double x : {-2.0, 0.0, 1.5})
    for (double y : {-1.0, 0.0, 0.005, 3.0}) {
      const double fd = (airy_kernel(x, y + h) - airy_kernel(x, y - h)) / (2 * h);
      CHECK(std::abs(airy_kernel_deta(x, y) - fd) < 1e-7);
    }
  // d/deta K(0, eta) at eta = 0 is int_0^inf Ai Ai' = -Ai(0)^2 / 2
  CHECK(std::abs(airy_kernel_deta(0.0, 0.0) + 0.5 * std::pow(airy_ai(0.0), 2)) < 1e-12);
}

TEST_CASE("limit kernel entries") {
  const double a0 = airy_ai(0.0);
  // 12 entry of K^(1) at the origin: -dK/deta - Ai^2/2 = Ai(0)^2/2 - Ai(0)^2/2
  CHECK(std::abs(limit_kernel(Beta::orthogonal, 0.0, 0.0).e12()) < 1e-12);
  CHECK(std::abs(2.0 * limit_kernel(Beta::symplectic, 0.0, 0.0).e11() -
                 (airy_kernel(0.0, 0.0) - 0.5 * a0 / 3.0)) < 1e-8);
  CHECK(limit_kernel(Beta::unitary, 0.3, -1.0).e11() == airy_kernel(0.3, -1.0));
  for (double x : {-4.0, -1.0, 0.0, 2.0, 6.0}) {
    CHECK(std::abs(limit_kernel(Beta::orthogonal, x, x).e21()) < 1e-14);
    CHECK(std::abs(limit_kernel(Beta::symplectic, x, x).e21()) < 1e-14);
  }
  for (Beta b : {Beta::orthogonal, Beta::symplectic})
    for (double x : {-2.0, 0.5, 3.0})
      for (double y : {-1.5, 0.0, 2.5}) {
        const auto k = limit_kernel(b, x, y), kt = limit_kernel(b, y, x);
        CHECK(std::abs(k.e22() - kt.e11()) < 1e-13);
        CHECK(std::abs(k.e12() + kt.e12()) < 1e-10);  // skew in both the 12 and 21 slots
        CHECK(std::abs(k.e21() + kt.e21()) < 1e-10);
      }
}

TEST_CASE("edge density constants") {
  CHECK(std::abs(edge_density(Beta::unitary, 0.0) - 0.066987484) < 1e-8);
  CHECK(std::abs(edge_density(Beta::orthogonal, 0.0) - 0.185330168) < 1e-8);
  CHECK(std::abs(edge_density(Beta::symplectic, 0.0) - 0.001954035) < 1e-8);
  for (double t = -6.0; t <= 6.0; t += 0.5)
    for (Beta b : {Beta::orthogonal, Beta::unitary, Beta::symplectic}) CHECK(edge_density(b, t) > 0.0);
}

TEST_CASE("skew identity") {
  CHECK(check_skew_identity(0.0, 1.0).residual < 1e-8);
  for (double x : {-2.0, 0.0, 3.0}) {
    const SkewIdentity s = check_skew_identity(x, x);
    CHECK(std::abs(s.lhs) < 1e-10);
    CHECK(std::abs(s.rhs) < 1e-10);
  }
  CHECK(std::abs(check_skew_identity(-1.0, 2.0).rhs + check_skew_identity(2.0, -1.0).rhs) < 1e-8);
  for (double x = -2.0; x <= 2.0; x += 1.0)
    for (double y = -2.0; y <= 2.0; y += 1.0) CHECK(check_skew_identity(x, y).residual < 1e-8);
}
