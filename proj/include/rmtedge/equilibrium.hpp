#pragma once

#include <vector>

#include <json.hpp>

#include "rmtedge/potential.hpp"

namespace rmtedge {

/// Edge-scaling constants for the rescaled field V_N(x) = V(c_N x + d_N)/N,
/// whose equilibrium measure (1/2pi) sqrt(1 - x^2) h_N(x) dx lives on [-1, 1].
struct EdgeScaling {
  int N = 0;
  double cN = 0.0;
  double dN = 0.0;
  std::vector<double> hN;  // monomial coefficients, lowest degree first, degree 2m - 2
  double alphaN = 0.0;     // (h_N(1)^2 / 2)^{1/3}
  double lambdaN = 0.0;    // (c_N / (alpha_N N^{2/3}))^{-1/2}
  double h_min = 0.0;      // min of h_N on [-1, 1], sampled
  double mrs_residual = 0.0;
};

struct MrsNumbers {
  double c = 0.0;
  double d = 0.0;
  double residual = 0.0;  // max of the two moment-condition defects
  int iterations = 0;
};

/// Chebyshev coefficients v_0..v_{2m-1} of V_N'(x) = (c/N) V'(cx + d),
/// exact (Chebyshev-Gauss with more nodes than the degree).
std::vector<double> chebyshev_coefficients_of_field(const Potential& p, int N, double c, double d);

/// MRS numbers: the pair (c, d) with v_0 = 0 and v_1 = 4, the two moment
/// conditions for one-interval support on [-1, 1]. Newton from the leading
/// asymptotic terms; throws std::runtime_error with the last residual if it
/// does not converge.
MrsNumbers mrs_numbers(const Potential& p, int N);

/// h_N = sum_{k>=1} v_k U_{k-1} as monomial coefficients. Throws if h_N is
/// not positive on [-1, 1].
std::vector<double> equilibrium_h(const Potential& p, int N, double cN, double dN);

double eval_poly(const std::vector<double>& coeffs, double x);

/// Full scaling data for N.
EdgeScaling edge_scaling(const Potential& p, int N);

/// xi -> c_N (1 + xi / (alpha_N N^{2/3})) + d_N.
double edge_map(const EdgeScaling& s, double xi);
double edge_map_inverse(const EdgeScaling& s, double x);
/// dx/dxi = c_N / (alpha_N N^{2/3}) = 1 / lambda_(N)^2.
double edge_jacobian(const EdgeScaling& s);

nlohmann::json to_json(const EdgeScaling& s);

}  // namespace rmtedge
