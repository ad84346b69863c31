#include <doctest.h>

#include <cmath>
#include <numbers>

#include "rmtedge/quadrature.hpp"

using namespace rmtedge;

TEST_CASE("Gauss-Legendre integrates polynomials of degree 2n-1 exactly") {
  for (int n : {1, 2, 5, 12, 40}) {
    const QuadratureRule r = gauss_legendre(n);
    for (int k = 0; k < 2 * n; ++k) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += r.weights[i] * std::pow(r.nodes[i], k);
      const double exact = k % 2 ? 0.0 : 2.0 / (k + 1);
      CHECK(s == doctest::Approx(exact).epsilon(1e-13));
    }
    for (int i = 1; i < n; ++i) CHECK(r.nodes[i] > r.nodes[i - 1]);
  }
  CHECK_THROWS_AS(gauss_legendre(0), std::invalid_argument);
}

TEST_CASE("mapped rule and smooth integrand") {
  const QuadratureRule r = gauss_legendre(30, 0.0, std::numbers::pi);
  double s = 0.0, w = 0.0;
  for (std::size_t i = 0; i < r.nodes.size(); ++i) {
    s += r.weights[i] * std::sin(r.nodes[i]);
    w += r.weights[i];
  }
  CHECK(s == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(w == doctest::Approx(std::numbers::pi).epsilon(1e-14));
}

TEST_CASE("cumulative integration matrix gives running integrals") {
  const QuadratureRule r = gauss_legendre(20);
  const Eigen::MatrixXd q = cumulative_integration_matrix(r);
  Eigen::VectorXd f(20);
  for (int j = 0; j < 20; ++j) f(j) = std::exp(r.nodes[j]);
  const Eigen::VectorXd F = q * f;
  for (int i = 0; i < 20; ++i) CHECK(F(i) == doctest::Approx(std::exp(r.nodes[i]) - std::exp(-1.0)).epsilon(1e-13));
}

TEST_CASE("barycentric interpolation") {
  const QuadratureRule r = gauss_legendre(24);
  std::vector<double> v;
  for (double t : r.nodes) v.push_back(std::cos(3 * t));
  for (double t : {-1.0, -0.33, 0.0, 0.71, 1.0}) CHECK(interpolate(r, v, t) == doctest::Approx(std::cos(3 * t)).epsilon(1e-12));
  CHECK(interpolate(r, v, r.nodes[5]) == v[5]);
}

TEST_CASE("composite grid") {
  const CompositeGrid g(-2.0, 6.0, 8, 10);
  CHECK(g.size() == 80);
  CHECK(g.panel_of(-5.0) == 0);
  CHECK(g.panel_of(0.5) == 2);
  CHECK(g.panel_of(100.0) == 7);
  double s = 0.0;
  for (int i = 0; i < g.size(); ++i) s += g.weights()[i] * std::exp(-g.nodes()[i] * g.nodes()[i]);
  CHECK(s == doctest::Approx(0.5 * std::sqrt(std::numbers::pi) * (std::erf(6.0) + std::erf(2.0))).epsilon(1e-13));
  CHECK_THROWS_AS(CompositeGrid(1.0, 1.0, 2, 4), std::invalid_argument);
}
