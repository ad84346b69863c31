#include "rmtedge/airy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include <boost/math/special_functions/airy.hpp>

#include "rmtedge/io.hpp"
#include "rmtedge/quadrature.hpp"

namespace rmtedge {

namespace {

constexpr double kTableLo = -20.0;
constexpr double kTableHi = 50.0;
constexpr double kPanel = 0.25;
constexpr int kDegree = 16;
constexpr int kPanels = static_cast<int>((kTableHi - kTableLo) / kPanel);

double clenshaw(const double* c, int n, double t) {
  double b1 = 0.0, b2 = 0.0;
  for (int k = n - 1; k >= 1; --k) {
    double b0 = 2.0 * t * b1 - b2 + c[k];
    b2 = b1;
    b1 = b0;
  }
  return t * b1 - b2 + c[0];
}

double boost_ai(double x) { return boost::math::airy_ai(x); }
double boost_ai_prime(double x) { return boost::math::airy_ai_prime(x); }

// Gauss-Legendre integral of Ai over [a, b] from Boost values, panels <= 1/4.
double boost_ai_integral(double a, double b) {
  const int panels = std::max(1, static_cast<int>(std::ceil(std::abs(b - a) / kPanel)));
  static const QuadratureRule ref = gauss_legendre(20);
  const double h = (b - a) / panels;
  double acc = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double left = a + p * h;
    for (std::size_t k = 0; k < ref.nodes.size(); ++k)
      acc += 0.5 * h * ref.weights[k] * boost_ai(left + 0.5 * h * (ref.nodes[k] + 1.0));
  }
  return acc;
}

class AiryTable {
 public:
  AiryTable() {
    constexpr int n = kDegree + 1;
    ai_.assign(kPanels * n, 0.0);
    dai_.assign(kPanels * n, 0.0);
    iai_.assign(kPanels * (n + 1), 0.0);
    panel_integral_.assign(kPanels, 0.0);
    std::vector<double> fa(n), fd(n);
    for (int p = 0; p < kPanels; ++p) {
      const double left = kTableLo + p * kPanel;
      for (int k = 0; k < n; ++k) {
        const double t = std::cos(std::numbers::pi * (k + 0.5) / n);
        const double x = left + 0.5 * kPanel * (t + 1.0);
        fa[k] = boost_ai(x);
        fd[k] = boost_ai_prime(x);
      }
      double* ca = &ai_[p * n];
      double* cd = &dai_[p * n];
      for (int j = 0; j < n; ++j) {
        double sa = 0.0, sd = 0.0;
        for (int k = 0; k < n; ++k) {
          const double c = std::cos(std::numbers::pi * j * (k + 0.5) / n);
          sa += fa[k] * c;
          sd += fd[k] * c;
        }
        const double scale = (j == 0 ? 1.0 : 2.0) / n;
        ca[j] = sa * scale;
        cd[j] = sd * scale;
      }
      // Antiderivative vanishing at the left panel end, in reference units.
      double* ci = &iai_[p * (n + 1)];
      auto coef = [&](int k) { return k < n ? ca[k] : 0.0; };
      for (int k = 1; k <= n; ++k)
        ci[k] = ((k == 1 ? 2.0 * coef(0) : coef(k - 1)) - coef(k + 1)) / (2.0 * k);
      double at_left = 0.0;
      for (int k = 1; k <= n; ++k) at_left += (k % 2 ? -1.0 : 1.0) * ci[k];
      ci[0] = -at_left;
      panel_integral_[p] = 0.5 * kPanel * clenshaw(ci, n + 1, 1.0);
    }
    suffix_.assign(kPanels + 1, 0.0);
    suffix_[kPanels] = boost_ai_integral(kTableHi, kTableHi + 10.0);
    for (int p = kPanels - 1; p >= 0; --p) suffix_[p] = suffix_[p + 1] + panel_integral_[p];
  }

  bool covers(double x) const { return x >= kTableLo && x <= kTableHi; }

  double ai(double x) const {
    double t;
    int p = locate(x, t);
    return clenshaw(&ai_[p * (kDegree + 1)], kDegree + 1, t);
  }

  double ai_prime(double x) const {
    double t;
    int p = locate(x, t);
    return clenshaw(&dai_[p * (kDegree + 1)], kDegree + 1, t);
  }

  double tail(double x) const {
    double t;
    int p = locate(x, t);
    const double* ci = &iai_[p * (kDegree + 2)];
    const double inside = 0.5 * kPanel * clenshaw(ci, kDegree + 2, t);
    return suffix_[p + 1] + panel_integral_[p] - inside;
  }

  double suffix_at_lo() const { return suffix_[0]; }

 private:
  int locate(double x, double& t) const {
    int p = std::clamp(static_cast<int>(std::floor((x - kTableLo) / kPanel)), 0, kPanels - 1);
    t = 2.0 * (x - (kTableLo + p * kPanel)) / kPanel - 1.0;
    return p;
  }

  std::vector<double> ai_, dai_, iai_, panel_integral_, suffix_;
};

const AiryTable& table() {
  static const AiryTable t;
  return t;
}

const QuadratureRule& ref20() {
  static const QuadratureRule r = gauss_legendre(20);
  return r;
}

constexpr double kDecayPoint = 10.0;

// Upper limit for z-integrals whose integrand decays once z + min(xi, eta)
// passes the decay point.
double z_cutoff(double xi, double eta) { return std::max(1.0, kDecayPoint - std::min(xi, eta)); }

template <class F>
double integrate_z(double zmax, F&& f) {
  const int panels = static_cast<int>(std::ceil(zmax));
  const double h = zmax / panels;
  const auto& r = ref20();
  double acc = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double left = p * h;
    for (std::size_t k = 0; k < r.nodes.size(); ++k)
      acc += 0.5 * h * r.weights[k] * f(left + 0.5 * h * (r.nodes[k] + 1.0));
  }
  return acc;
}

}  // namespace

double airy_ai(double x) { return table().covers(x) ? table().ai(x) : boost_ai(x); }

double airy_ai_prime(double x) {
  return table().covers(x) ? table().ai_prime(x) : boost_ai_prime(x);
}

double airy_tail(double x) {
  const auto& t = table();
  if (t.covers(x)) return t.tail(x);
  if (x > kTableHi) return boost_ai_integral(x, x + 10.0);
  return t.suffix_at_lo() + boost_ai_integral(x, kTableLo);
}

double airy_head(double x) { return 1.0 - airy_tail(x); }

AiryValue airy_eval(double x) {
  if (!(x >= kAiryMinArg && x <= kAiryMaxArg))
    throw std::out_of_range("Airy argument " + std::to_string(x) + " outside [-15, 30]");
  return {airy_ai(x), airy_ai_prime(x), airy_tail(x)};
}

double airy_kernel_ratio(double xi, double eta) {
  return (airy_ai(xi) * airy_ai_prime(eta) - airy_ai_prime(xi) * airy_ai(eta)) / (xi - eta);
}

double airy_kernel_integral(double xi, double eta) {
  return integrate_z(z_cutoff(xi, eta),
                     [&](double z) { return airy_ai(z + xi) * airy_ai(z + eta); });
}

double airy_kernel(double xi, double eta) {
  return std::abs(xi - eta) > 1e-3 ? airy_kernel_ratio(xi, eta) : airy_kernel_integral(xi, eta);
}

double airy_kernel_deta_integral(double xi, double eta) {
  return integrate_z(z_cutoff(xi, eta),
                     [&](double z) { return airy_ai(z + xi) * airy_ai_prime(z + eta); });
}

double airy_kernel_deta(double xi, double eta) {
  if (std::abs(xi - eta) <= 1e-2) return airy_kernel_deta_integral(xi, eta);
  const double ax = airy_ai(xi), dx = airy_ai_prime(xi);
  const double ay = airy_ai(eta), dy = airy_ai_prime(eta);
  const double k = (ax * dy - dx * ay) / (xi - eta);
  return (ax * eta * ay - dx * dy + k) / (xi - eta);
}

double airy_kernel_tail(double xi, double eta) {
  return integrate_z(z_cutoff(xi, eta),
                     [&](double z) { return airy_ai(z + eta) * airy_tail(z + xi); });
}

LimitKernelSample limit_kernel(Beta beta, double xi, double eta) {
  LimitKernelSample s;
  s.beta = beta;
  s.xi = xi;
  s.eta = eta;
  const double k = airy_kernel(xi, eta);
  if (beta == Beta::unitary) {
    s.e[0] = k;
    return s;
  }
  const double ax = airy_ai(xi), ay = airy_ai(eta);
  const double tx = airy_tail(xi), ty = airy_tail(eta);
  const double dk = airy_kernel_deta(xi, eta);
  const double ik = airy_kernel_tail(xi, eta);
  if (beta == Beta::orthogonal) {
    const double sgn = (xi > eta) - (xi < eta);
    s.e[0] = k + 0.5 * ax * (1.0 - ty);
    s.e[1] = -dk - 0.5 * ax * ay;
    s.e[2] = -ik - 0.5 * (tx - ty) + 0.5 * tx * ty - 0.5 * sgn;
    s.e[3] = k + 0.5 * ay * (1.0 - tx);
  } else {
    s.e[0] = 0.5 * (k - 0.5 * ax * ty);
    s.e[1] = 0.5 * (-dk - 0.5 * ax * ay);
    s.e[2] = 0.5 * (-ik + 0.5 * tx * ty);
    s.e[3] = 0.5 * (k - 0.5 * ay * tx);
  }
  return s;
}

double edge_density(Beta beta, double t) {
  const double k = airy_kernel(t, t);
  switch (beta) {
    case Beta::unitary: return k;
    case Beta::orthogonal: return k + 0.5 * airy_ai(t) * airy_head(t);
    case Beta::symplectic: return 0.25 * k - 0.125 * airy_ai(t) * airy_tail(t);
  }
  throw std::invalid_argument("invalid beta");
}

SkewIdentity check_skew_identity(double xi, double eta) {
  SkewIdentity r;
  const int panels = std::max(1, static_cast<int>(std::ceil(std::abs(eta - xi) / 0.5)));
  const double h = (eta - xi) / panels;
  const auto& ref = ref20();
  double int_k = 0.0, int_ai = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double left = xi + p * h;
    for (std::size_t k = 0; k < ref.nodes.size(); ++k) {
      const double t = left + 0.5 * h * (ref.nodes[k] + 1.0);
      const double w = 0.5 * h * ref.weights[k];
      int_k += w * airy_kernel(t, eta);
      int_ai += w * airy_ai(t);
    }
  }
  const double ty = airy_tail(eta);
  r.lhs = -int_k + 0.5 * int_ai * ty;
  r.rhs = -airy_kernel_tail(xi, eta) + 0.5 * airy_tail(xi) * ty;
  r.residual = std::abs(r.lhs - r.rhs);
  return r;
}

void write_kernel_csv(const std::filesystem::path& path, const std::vector<LimitKernelSample>& rows) {
  const bool matrix = !rows.empty() && rows.front().beta != Beta::unitary;
  std::vector<std::string> header{"xi", "eta", "entry11"};
  if (matrix) header.insert(header.end(), {"entry12", "entry21", "entry22"});
  CsvWriter csv(path, header);
  for (const auto& s : rows) {
    if (matrix) csv.row(std::vector<double>{s.xi, s.eta, s.e[0], s.e[1], s.e[2], s.e[3]});
    else csv.row(std::vector<double>{s.xi, s.eta, s.e[0]});
  }
}

}  // namespace rmtedge
