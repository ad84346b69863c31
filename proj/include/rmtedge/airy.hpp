#pragma once

#include <array>
#include <filesystem>
#include <vector>

#include "rmtedge/potential.hpp"

namespace rmtedge {

struct AiryValue {
  double ai = 0.0;
  double ai_prime = 0.0;
  double tail_integral = 0.0;  // integral of Ai from x to +infinity
};

inline constexpr double kAiryMinArg = -15.0;
inline constexpr double kAiryMaxArg = 30.0;

/// Ai, Ai' and the tail integral on [-15, 30]; throws std::out_of_range
/// elsewhere.
AiryValue airy_eval(double x);

/// Unchecked evaluators used by the kernels. Values come from Boost.Math,
/// cached as piecewise Chebyshev interpolants on [-20, 50] (panel width
/// 1/4, degree 16); outside that window Boost is called directly.
double airy_ai(double x);
double airy_ai_prime(double x);
/// Integral of Ai over [x, +infinity).
double airy_tail(double x);
/// Integral of Ai over (-infinity, x] = 1 - airy_tail(x).
double airy_head(double x);

/// K_Airy by the ratio form for |xi - eta| > 1e-3, else by the integral form.
double airy_kernel(double xi, double eta);
double airy_kernel_ratio(double xi, double eta);
/// Integral of Ai(z + xi) Ai(z + eta) over z >= 0, truncated where both
/// factors are below Ai(10).
double airy_kernel_integral(double xi, double eta);

/// d/d(eta) K_Airy(xi, eta); ratio form for |xi - eta| > 1e-2, else the
/// integral of Ai(z + xi) Ai'(z + eta).
double airy_kernel_deta(double xi, double eta);
double airy_kernel_deta_integral(double xi, double eta);

/// Integral of K_Airy(t, eta) over t in [xi, +infinity), computed as the
/// integral of Ai(z + eta) * airy_tail(z + xi) over z >= 0.
double airy_kernel_tail(double xi, double eta);

/// One evaluation of a limiting kernel. For beta = 2 only e[0] is used.
/// Entries are ordered 11, 12, 21, 22.
struct LimitKernelSample {
  Beta beta = Beta::unitary;
  double xi = 0.0, eta = 0.0;
  std::array<double, 4> e{};

  double e11() const { return e[0]; }
  double e12() const { return e[1]; }
  double e21() const { return e[2]; }
  double e22() const { return e[3]; }
};

/// K_Airy (beta = 2), K^(1) or K^(4). For beta = 4 this returns K^(4)
/// itself, i.e. one half of the bracketed Airy expressions.
LimitKernelSample limit_kernel(Beta beta, double xi, double eta);

/// Limiting edge density at t: K_Airy(t,t) for beta = 2,
/// K_Airy(t,t) + Ai(t)/2 * head(t) for beta = 1 and
/// K_Airy(t,t)/4 - Ai(t)/8 * tail(t) for beta = 4.
double edge_density(Beta beta, double t);

struct SkewIdentity {
  double lhs = 0.0;  // form with integrals over [xi, eta]
  double rhs = 0.0;  // form with integrals over [xi, infinity)
  double residual = 0.0;
};

/// Both sides of the identity
///   -int_xi^eta K(t,eta) dt + 1/2 int_xi^eta Ai * tail(eta)
///     = -int_xi^inf K(t,eta) dt + 1/2 tail(xi) tail(eta),
/// the left side by direct Gauss-Legendre quadrature in t.
SkewIdentity check_skew_identity(double xi, double eta);

/// Grid CSV: xi,eta,entry11[,entry12,entry21,entry22].
void write_kernel_csv(const std::filesystem::path& path, const std::vector<LimitKernelSample>& rows);

}  // namespace rmtedge
