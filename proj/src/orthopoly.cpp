#include "rmtedge/orthopoly.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "rmtedge/quadrature.hpp"

namespace rmtedge {

namespace {

constexpr double kRescale = 1e100;
const double kLogRescale = std::log(kRescale);

// Global minimizer of V, located on a dense sample inside a Cauchy bound for
// the critical points and polished by Newton on V'.
double argmin_V(const Potential& p) {
  const auto& c = p.coefficients();
  const int d = p.degree();
  double bound = 0.0;
  for (int k = 1; k < d; ++k) bound = std::max(bound, std::abs(k * c[k] / (d * c[d])));
  bound += 1.0;
  const int samples = 4000;
  double best = 0.0, best_v = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= samples; ++i) {
    double x = -bound + 2.0 * bound * i / samples;
    double v = p(x);
    if (v < best_v) {
      best_v = v;
      best = x;
    }
  }
  for (int it = 0; it < 50; ++it) {
    double h = p.second_derivative(best);
    if (!(h > 0.0)) break;
    double step = p.derivative(best) / h;
    best -= step;
    if (std::abs(step) < 1e-15 * (1.0 + std::abs(best))) break;
  }
  return best;
}

// Point on the side `dir` of x0 where V - V(x0) first reaches `level`.
double level_crossing(const Potential& p, double x0, double dir, double level) {
  const double v0 = p(x0);
  double step = 1.0;
  while (p(x0 + dir * step) - v0 < level) step *= 2.0;
  double a = 0.0, b = step;
  for (int it = 0; it < 200 && b - a > 1e-12 * step; ++it) {
    double mid = 0.5 * (a + b);
    if (p(x0 + dir * mid) - v0 < level) a = mid;
    else b = mid;
  }
  return x0 + dir * b;
}

struct LanczosResult {
  std::vector<double> a, b;
  double log_norm0;
};

LanczosResult lanczos(const Potential& p, double vmin, const CompositeGrid& grid, int jmax) {
  const int m = grid.size();
  if (jmax + 1 > m) throw std::runtime_error("quadrature grid too small for requested recurrence");
  Eigen::VectorXd x(m), s(m);
  double norm = 0.0;
  for (int i = 0; i < m; ++i) {
    x[i] = grid.nodes()[i];
    double w = grid.weights()[i] * std::exp(-(p(x[i]) - vmin));
    norm += w;
    s[i] = std::sqrt(w);
  }
  LanczosResult res;
  res.log_norm0 = std::log(norm) - vmin;
  res.a.assign(jmax, 0.0);
  res.b.assign(jmax, 0.0);
  Eigen::MatrixXd q(m, jmax + 1);
  q.col(0) = s / s.norm();
  for (int j = 0; j < jmax; ++j) {
    Eigen::VectorXd r = x.cwiseProduct(q.col(j));
    res.a[j] = q.col(j).dot(r);
    r -= res.a[j] * q.col(j);
    if (j > 0) r -= res.b[j - 1] * q.col(j - 1);
    for (int pass = 0; pass < 2; ++pass) {
      auto basis = q.leftCols(j + 1);
      r -= basis * (basis.transpose() * r);
    }
    res.b[j] = r.norm();
    if (!(res.b[j] > 0.0)) throw std::runtime_error("Lanczos breakdown: grid cannot resolve degree");
    q.col(j + 1) = r / res.b[j];
  }
  return res;
}

double max_change(const LanczosResult& x, const LanczosResult& y) {
  double d = 0.0;
  for (std::size_t j = 0; j < x.a.size(); ++j) {
    double scale = 1.0 + std::abs(x.b[j]);
    d = std::max(d, std::abs(x.a[j] - y.a[j]) / scale);
    d = std::max(d, std::abs(x.b[j] - y.b[j]) / scale);
  }
  return d;
}

// Phi recurrence in scaled units: phi_j = u_j e^{s}, chi_j = v_j e^{s}.
template <bool WithDerivative>
void run_recurrence(const RecurrenceTable& t, int jmax, double x, double* phi, double* chi) {
  if (jmax > t.capacity())
    throw std::out_of_range("phi index " + std::to_string(jmax) + " beyond table capacity " +
                            std::to_string(t.capacity()));
  double s = -0.5 * t.potential(x) - 0.5 * t.log_norm0;
  double u_prev = 0.0, u = 1.0;
  double v_prev = 0.0, v = 0.0;
  auto emit = [&](double val) {
    if (val == 0.0) return 0.0;
    if (s > -700.0 && s < 700.0) return val * std::exp(s);
    return std::copysign(std::exp(s + std::log(std::abs(val))), val);
  };
  for (int j = 0;; ++j) {
    phi[j] = emit(u);
    if constexpr (WithDerivative) chi[j] = emit(v);
    if (j == jmax) break;
    const double bp = j > 0 ? t.b[j - 1] : 0.0;
    const double u_next = ((x - t.a[j]) * u - bp * u_prev) / t.b[j];
    if constexpr (WithDerivative) {
      const double v_next = (u + (x - t.a[j]) * v - bp * v_prev) / t.b[j];
      v_prev = v;
      v = v_next;
    }
    u_prev = u;
    u = u_next;
    double big = std::max(std::abs(u), std::abs(u_prev));
    if constexpr (WithDerivative) big = std::max({big, std::abs(v), std::abs(v_prev)});
    if (big > kRescale) {
      u /= kRescale;
      u_prev /= kRescale;
      v /= kRescale;
      v_prev /= kRescale;
      s += kLogRescale;
    }
  }
}

double max_abs_phi(const RecurrenceTable& t, int jmax, double x) {
  auto phi = eval_phi(t, jmax, x);
  double m = 0.0;
  for (double v : phi) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace

RecurrenceTable compute_recurrence(const Potential& p, int jmax, double tol) {
  if (jmax < 1) throw std::invalid_argument("recurrence length must be positive");
  const int order = 20;
  const int max_refinements = 8;
  const double x0 = argmin_V(p);
  const double vmin = p(x0);
  const bool even = p.is_even();
  double lo = level_crossing(p, x0, -1.0, 69.0);
  double hi = level_crossing(p, x0, 1.0, 69.0);
  if (even) {
    double r = std::max(-lo, hi);
    lo = -r;
    hi = r;
  }

  RecurrenceTable t{p, {}, {}, 0.0, 0.0, lo, hi, 0, order, 0.0};
  for (int widen = 0; widen < 30; ++widen) {
    int panels = std::max(4, static_cast<int>(std::ceil(2.0 * (hi - lo))));
    panels = std::max(panels, (jmax + 2) / order + 1);
    LanczosResult prev = lanczos(p, vmin, CompositeGrid(lo, hi, panels, order), jmax);
    double change = std::numeric_limits<double>::infinity();
    for (int r = 0; r < max_refinements; ++r) {
      panels *= 2;
      LanczosResult cur = lanczos(p, vmin, CompositeGrid(lo, hi, panels, order), jmax);
      change = max_change(prev, cur);
      prev = std::move(cur);
      if (change < tol) break;
    }
    if (!(change < tol)) {
      std::ostringstream msg;
      msg << "recurrence did not stabilize: change " << change << " after " << max_refinements
          << " refinements (tolerance " << tol << ")";
      throw std::runtime_error(msg.str());
    }
    t.a = prev.a;
    t.b = prev.b;
    t.log_norm0 = prev.log_norm0;
    t.norm0 = std::exp(prev.log_norm0);
    t.lo = lo;
    t.hi = hi;
    t.panels = panels;

    const bool lo_small = max_abs_phi(t, jmax, lo) < 1e-16;
    const bool hi_small = max_abs_phi(t, jmax, hi) < 1e-16;
    if (lo_small && hi_small) {
      t.orthonormality_residual = orthonormality_residual(t, jmax);
      if (!(t.orthonormality_residual < std::max(1e3 * tol, 1e-10))) {
        std::ostringstream msg;
        msg << "orthonormality residual " << t.orthonormality_residual << " above tolerance";
        throw std::runtime_error(msg.str());
      }
      return t;
    }
    const double grow = 0.25 * (hi - lo);
    if (even || !lo_small) lo -= grow;
    if (even || !hi_small) hi += grow;
  }
  throw std::runtime_error("recurrence truncation interval did not converge");
}

std::vector<double> eval_phi(const RecurrenceTable& t, int jmax, double x) {
  std::vector<double> phi(jmax + 1);
  run_recurrence<false>(t, jmax, x, phi.data(), nullptr);
  return phi;
}

void eval_phi_with_derivative(const RecurrenceTable& t, int jmax, double x, std::span<double> phi,
                              std::span<double> dphi) {
  if (phi.size() < static_cast<std::size_t>(jmax + 1) || dphi.size() < phi.size())
    throw std::invalid_argument("output spans too short");
  run_recurrence<true>(t, jmax, x, phi.data(), dphi.data());
  const double half_dv = 0.5 * t.potential.derivative(x);
  for (int j = 0; j <= jmax; ++j) dphi[j] -= half_dv * phi[j];
}

double kernel_length_scale(const RecurrenceTable& t, int n) {
  if (n < 1 || n > t.capacity()) throw std::out_of_range("kernel size outside table");
  return 2.0 * t.b[n - 1];
}

double cd_kernel_sum(const RecurrenceTable& t, int n, double x, double y) {
  auto px = eval_phi(t, n, x);
  auto py = eval_phi(t, n, y);
  double acc = 0.0;
  for (int k = 0; k < n; ++k) acc += px[k] * py[k];
  return acc;
}

double cd_kernel_ratio(const RecurrenceTable& t, int n, double x, double y) {
  auto px = eval_phi(t, n, x);
  auto py = eval_phi(t, n, y);
  return t.b[n - 1] * (px[n] * py[n - 1] - px[n - 1] * py[n]) / (x - y);
}

double cd_kernel(const RecurrenceTable& t, int n, double x, double y, std::span<const double> px,
                 std::span<const double> py) {
  if (std::abs(x - y) > 1e-4 * kernel_length_scale(t, n))
    return t.b[n - 1] * (px[n] * py[n - 1] - px[n - 1] * py[n]) / (x - y);
  double acc = 0.0;
  for (int k = 0; k < n; ++k) acc += px[k] * py[k];
  return acc;
}

double cd_kernel(const RecurrenceTable& t, int n, double x, double y) {
  auto px = eval_phi(t, n, x);
  auto py = eval_phi(t, n, y);
  return cd_kernel(t, n, x, y, px, py);
}

double correlation_det(const RecurrenceTable& t, int n, std::span<const double> points) {
  const int l = static_cast<int>(points.size());
  std::vector<std::vector<double>> phis;
  phis.reserve(l);
  for (double x : points) phis.push_back(eval_phi(t, n, x));
  Eigen::MatrixXd k(l, l);
  for (int i = 0; i < l; ++i)
    for (int j = 0; j < l; ++j) k(i, j) = cd_kernel(t, n, points[i], points[j], phis[i], phis[j]);
  return k.partialPivLu().determinant();
}

double orthonormality_residual(const RecurrenceTable& t, int jmax) {
  // Different panel count and order from the construction grid.
  const int panels = t.panels + t.panels / 2 + 1;
  CompositeGrid grid(t.lo, t.hi, panels, 24);
  Eigen::MatrixXd phi(grid.size(), jmax + 1);
  for (int i = 0; i < grid.size(); ++i) {
    auto row = eval_phi(t, jmax, grid.nodes()[i]);
    double sw = std::sqrt(grid.weights()[i]);
    for (int j = 0; j <= jmax; ++j) phi(i, j) = sw * row[j];
  }
  Eigen::MatrixXd gram = phi.transpose() * phi;
  gram -= Eigen::MatrixXd::Identity(jmax + 1, jmax + 1);
  return gram.cwiseAbs().maxCoeff();
}

double string_equation_residual(const RecurrenceTable& t, int jmax) {
  const Potential& p = t.potential;
  const int L = std::min(t.capacity(), jmax + p.degree() + 1);
  jmax = std::min(jmax, L - p.degree() - 1);
  if (jmax < 0) throw std::invalid_argument("recurrence table too short for the string equations");
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(L, L);
  for (int j = 0; j < L; ++j) {
    J(j, j) = t.a[j];
    if (j + 1 < L) J(j, j + 1) = J(j + 1, j) = t.b[j];
  }
  // V'(J) by Horner on k * c_k.
  Eigen::MatrixXd vp = Eigen::MatrixXd::Zero(L, L);
  for (int k = p.degree(); k >= 1; --k) {
    vp = (vp * J).eval();
    vp.diagonal().array() += k * p.coefficient(k);
  }
  double r = 0.0;
  for (int j = 0; j <= jmax; ++j) {
    const double target = j + 1.0;
    r = std::max(r, std::abs(t.b[j] * vp(j + 1, j) - target) / target);
    r = std::max(r, std::abs(t.b[j] * vp(j, j)) / target);
  }
  return r;
}

void write_recurrence_csv(const RecurrenceTable& t, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  char buf[64];
  out << "# coefficients:";
  for (double c : t.potential.coefficients()) {
    std::snprintf(buf, sizeof buf, " %.17g", c);
    out << buf;
  }
  out << '\n';
  std::snprintf(buf, sizeof buf, "%.17g", t.log_norm0);
  out << "# log_norm0: " << buf << '\n';
  std::snprintf(buf, sizeof buf, "%.17g %.17g", t.lo, t.hi);
  out << "# interval: " << buf << '\n';
  out << "# grid: " << t.panels << ' ' << t.order << '\n';
  out << "j,a_j,b_j\n";
  for (int j = 0; j < t.capacity(); ++j) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g", t.a[j], t.b[j]);
    out << j << ',' << buf << '\n';
  }
}

RecurrenceTable read_recurrence_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::vector<double> coeffs;
  double log_norm0 = std::numeric_limits<double>::quiet_NaN();
  double lo = 0.0, hi = 0.0;
  int panels = 0, order = 0;
  std::vector<double> a, b;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream ls(line.substr(1));
      std::string key;
      ls >> key;
      if (key == "coefficients:") {
        double c;
        while (ls >> c) coeffs.push_back(c);
      } else if (key == "log_norm0:") {
        ls >> log_norm0;
      } else if (key == "interval:") {
        ls >> lo >> hi;
      } else if (key == "grid:") {
        ls >> panels >> order;
      }
      continue;
    }
    if (line.rfind("j,", 0) == 0) continue;
    std::istringstream ls(line);
    std::string field;
    std::vector<double> row;
    while (std::getline(ls, field, ',')) row.push_back(std::stod(field));
    if (row.size() != 3 || static_cast<std::size_t>(row[0]) != a.size())
      throw std::runtime_error("malformed recurrence row: " + line);
    a.push_back(row[1]);
    b.push_back(row[2]);
  }
  if (coeffs.empty() || std::isnan(log_norm0))
    throw std::runtime_error("recurrence CSV lacks potential metadata");
  RecurrenceTable t{Potential(coeffs), a, b, std::exp(log_norm0), log_norm0, lo, hi, panels,
                    order, 0.0};
  return t;
}

}  // namespace rmtedge
