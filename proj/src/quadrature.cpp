#include "rmtedge/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>

namespace rmtedge {

namespace {

// P_n(x) and P_n'(x) by the three-term recurrence.
std::pair<double, double> legendre_with_derivative(int n, double x) {
  double p0 = 1.0, p1 = x;
  if (n == 0) return {1.0, 0.0};
  for (int k = 2; k <= n; ++k) {
    double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  return {p1, n * (x * p1 - p0) / (x * x - 1.0)};
}

}  // namespace

QuadratureRule gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("Gauss-Legendre order must be positive");
  QuadratureRule rule;
  rule.nodes.assign(n, 0.0);
  rule.weights.assign(n, 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    for (int iter = 0; iter < 100; ++iter) {
      auto [p, dp] = legendre_with_derivative(n, x);
      double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    double dp = legendre_with_derivative(n, x).second;
    double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

QuadratureRule gauss_legendre(int n, double a, double b) {
  QuadratureRule rule = gauss_legendre(n);
  double half = 0.5 * (b - a), mid = 0.5 * (a + b);
  for (int i = 0; i < n; ++i) {
    rule.nodes[i] = mid + half * rule.nodes[i];
    rule.weights[i] *= half;
  }
  return rule;
}

namespace {

std::vector<double> barycentric_weights(const QuadratureRule& ref) {
  const int n = static_cast<int>(ref.nodes.size());
  std::vector<double> lambda(n);
  for (int j = 0; j < n; ++j) {
    double t = ref.nodes[j];
    lambda[j] = ((j % 2) ? -1.0 : 1.0) * std::sqrt((1.0 - t * t) * ref.weights[j]);
  }
  return lambda;
}

// Values of all Lagrange basis polynomials at t.
void lagrange_basis(const QuadratureRule& ref, const std::vector<double>& lambda, double t,
                    std::vector<double>& out) {
  const int n = static_cast<int>(ref.nodes.size());
  out.assign(n, 0.0);
  for (int j = 0; j < n; ++j) {
    if (t == ref.nodes[j]) {
      out[j] = 1.0;
      return;
    }
  }
  double denom = 0.0;
  for (int j = 0; j < n; ++j) {
    out[j] = lambda[j] / (t - ref.nodes[j]);
    denom += out[j];
  }
  for (double& v : out) v /= denom;
}

}  // namespace

Eigen::MatrixXd cumulative_integration_matrix(const QuadratureRule& reference) {
  const int n = static_cast<int>(reference.nodes.size());
  const auto lambda = barycentric_weights(reference);
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(n, n);
  std::vector<double> basis;
  for (int i = 0; i < n; ++i) {
    QuadratureRule sub = gauss_legendre(n, -1.0, reference.nodes[i]);
    for (int k = 0; k < n; ++k) {
      lagrange_basis(reference, lambda, sub.nodes[k], basis);
      for (int j = 0; j < n; ++j) q(i, j) += sub.weights[k] * basis[j];
    }
  }
  return q;
}

double interpolate(const QuadratureRule& reference, const std::vector<double>& values, double t) {
  const auto lambda = barycentric_weights(reference);
  std::vector<double> basis;
  lagrange_basis(reference, lambda, t, basis);
  double acc = 0.0;
  for (std::size_t j = 0; j < basis.size(); ++j) acc += basis[j] * values[j];
  return acc;
}

CompositeGrid::CompositeGrid(double lo, double hi, int panels, int order)
    : lo_(lo), hi_(hi), panels_(panels), order_(order), ref_(gauss_legendre(order)) {
  if (!(hi > lo) || panels < 1) throw std::invalid_argument("invalid composite grid");
  cumulative_ = cumulative_integration_matrix(ref_);
  nodes_.reserve(static_cast<std::size_t>(panels) * order);
  weights_.reserve(nodes_.capacity());
  const double h = panel_width();
  for (int p = 0; p < panels; ++p) {
    double a = lo + p * h;
    for (int k = 0; k < order; ++k) {
      nodes_.push_back(a + 0.5 * h * (ref_.nodes[k] + 1.0));
      weights_.push_back(0.5 * h * ref_.weights[k]);
    }
  }
}

int CompositeGrid::panel_of(double x) const {
  int p = static_cast<int>(std::floor((x - lo_) / panel_width()));
  return std::clamp(p, 0, panels_ - 1);
}

}  // namespace rmtedge
