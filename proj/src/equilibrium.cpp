#include "rmtedge/equilibrium.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace rmtedge {

namespace {

struct FieldExpansion {
  std::vector<double> v, dv_dc, dv_dd;
};

FieldExpansion expand_field(const Potential& p, int N, double c, double d) {
  const int deg = p.degree() - 1;
  const int nodes = deg + 3;
  FieldExpansion e;
  e.v.assign(deg + 1, 0.0);
  e.dv_dc.assign(deg + 1, 0.0);
  e.dv_dd.assign(deg + 1, 0.0);
  for (int i = 0; i < nodes; ++i) {
    const double theta = std::numbers::pi * (i + 0.5) / nodes;
    const double x = std::cos(theta);
    const double y = c * x + d;
    const double v1 = p.derivative(y), v2 = p.second_derivative(y);
    const double f = c / N * v1;
    const double fc = (v1 + c * x * v2) / N;
    const double fd = c / N * v2;
    for (int k = 0; k <= deg; ++k) {
      const double tk = std::cos(k * theta) * (k == 0 ? 1.0 : 2.0) / nodes;
      e.v[k] += f * tk;
      e.dv_dc[k] += fc * tk;
      e.dv_dd[k] += fd * tk;
    }
  }
  return e;
}

double defect(const FieldExpansion& e) {
  return std::max(std::abs(e.v[0]), std::abs(e.v[1] - 4.0));
}

// Leading-order MRS scale for the top monomial alone.
double leading_scale(const Potential& p, int N) {
  const int m = p.m();
  double ratio = 1.0;  // (2m)!! / (2m - 1)!!
  for (int k = 1; k <= m; ++k) ratio *= (2.0 * k) / (2.0 * k - 1.0);
  return std::pow(ratio / (m * p.leading()), 1.0 / (2 * m)) * std::pow(N, 1.0 / (2 * m));
}

}  // namespace

std::vector<double> chebyshev_coefficients_of_field(const Potential& p, int N, double c, double d) {
  return expand_field(p, N, c, d).v;
}

MrsNumbers mrs_numbers(const Potential& p, int N) {
  if (N < 1) throw std::invalid_argument("N must be positive");
  MrsNumbers r;
  r.c = leading_scale(p, N);
  r.d = -p.coefficient(p.degree() - 1) / (p.degree() * p.leading()) + 0.0;
  FieldExpansion e = expand_field(p, N, r.c, r.d);
  r.residual = defect(e);
  for (r.iterations = 0; r.iterations < 100 && r.residual > 1e-14; ++r.iterations) {
    const double f0 = e.v[0], f1 = e.v[1] - 4.0;
    const double j00 = e.dv_dc[0], j01 = e.dv_dd[0], j10 = e.dv_dc[1], j11 = e.dv_dd[1];
    const double det = j00 * j11 - j01 * j10;
    if (det == 0.0) break;
    const double dc = (j11 * f0 - j01 * f1) / det;
    const double dd = (j00 * f1 - j10 * f0) / det;
    double step = 1.0;
    for (int halving = 0; halving < 40; ++halving, step *= 0.5) {
      const double c = r.c - step * dc, d = r.d - step * dd;
      if (!(c > 0.0)) continue;
      FieldExpansion trial = expand_field(p, N, c, d);
      if (defect(trial) < r.residual || halving == 39) {
        r.c = c;
        r.d = d;
        e = std::move(trial);
        break;
      }
    }
    const double prev = r.residual;
    r.residual = defect(e);
    if (r.residual >= prev && r.residual < 1e-12) break;
  }
  if (!(r.residual < 1e-10)) {
    std::ostringstream msg;
    msg << "MRS Newton iteration did not converge, residual " << r.residual;
    throw std::runtime_error(msg.str());
  }
  return r;
}

double eval_poly(const std::vector<double>& coeffs, double x) {
  double acc = 0.0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * x + *it;
  return acc;
}

std::vector<double> equilibrium_h(const Potential& p, int N, double cN, double dN) {
  const auto v = chebyshev_coefficients_of_field(p, N, cN, dN);
  const int deg = static_cast<int>(v.size()) - 1;
  // Monomial coefficients of U_0 .. U_{deg-1}.
  std::vector<std::vector<double>> u(deg);
  u[0] = {1.0};
  if (deg > 1) u[1] = {0.0, 2.0};
  for (int k = 2; k < deg; ++k) {
    u[k].assign(k + 1, 0.0);
    for (std::size_t i = 0; i < u[k - 1].size(); ++i) u[k][i + 1] += 2.0 * u[k - 1][i];
    for (std::size_t i = 0; i < u[k - 2].size(); ++i) u[k][i] -= u[k - 2][i];
  }
  std::vector<double> h(std::max(deg, 1), 0.0);
  for (int k = 1; k <= deg; ++k)
    for (std::size_t i = 0; i < u[k - 1].size(); ++i) h[i] += v[k] * u[k - 1][i];
  for (int i = 0; i <= 2000; ++i) {
    const double x = -1.0 + i / 1000.0;
    if (!(eval_poly(h, x) > 0.0)) {
      std::ostringstream msg;
      msg << "equilibrium density polynomial not positive at x=" << x
          << "; one-interval support fails for N=" << N;
      throw std::runtime_error(msg.str());
    }
  }
  return h;
}

EdgeScaling edge_scaling(const Potential& p, int N) {
  const MrsNumbers mrs = mrs_numbers(p, N);
  EdgeScaling s;
  s.N = N;
  s.cN = mrs.c;
  s.dN = mrs.d;
  s.mrs_residual = mrs.residual;
  s.hN = equilibrium_h(p, N, mrs.c, mrs.d);
  const double h1 = eval_poly(s.hN, 1.0);
  s.alphaN = std::cbrt(0.5 * h1 * h1);
  s.lambdaN = 1.0 / std::sqrt(s.cN / (s.alphaN * std::pow(N, 2.0 / 3.0)));
  s.h_min = h1;
  for (int i = 0; i <= 2000; ++i) s.h_min = std::min(s.h_min, eval_poly(s.hN, -1.0 + i / 1000.0));
  return s;
}

double edge_jacobian(const EdgeScaling& s) {
  return s.cN / (s.alphaN * std::pow(s.N, 2.0 / 3.0));
}

double edge_map(const EdgeScaling& s, double xi) { return s.cN + s.dN + edge_jacobian(s) * xi; }

double edge_map_inverse(const EdgeScaling& s, double x) {
  return (x - s.cN - s.dN) / edge_jacobian(s);
}

nlohmann::json to_json(const EdgeScaling& s) {
  return {{"N", s.N},           {"cN", s.cN},
          {"dN", s.dN},         {"alphaN", s.alphaN},
          {"lambdaN", s.lambdaN}, {"hN", s.hN},
          {"h_min", s.h_min},   {"mrs_residual", s.mrs_residual}};
}

}  // namespace rmtedge
