#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "rmtedge/potential.hpp"

namespace rmtedge {

/// Three-term recurrence of the orthonormal polynomials p_j of w = e^{-V}:
///
///   x p_j = b_j p_{j+1} + a_j p_j + b_{j-1} p_{j-1},   b_{-1} = 0,
///
/// so b_{N-1} is the coefficient entering the Christoffel-Darboux formula.
/// The orthonormal functions phi_j = p_j w^{1/2} are defined for
/// j = 0..capacity().
struct RecurrenceTable {
  Potential potential;
  std::vector<double> a;
  std::vector<double> b;
  double norm0 = 0.0;       // integral of e^{-V}; p_0 = norm0^{-1/2}
  double log_norm0 = 0.0;   // kept separately, norm0 may under/overflow
  double lo = 0.0, hi = 0.0;  // truncation interval of every quadrature
  int panels = 0, order = 0;  // composite Gauss-Legendre grid of the final pass
  double orthonormality_residual = 0.0;  // max |(phi_j, phi_k) - delta_jk|, independent grid

  int capacity() const { return static_cast<int>(a.size()); }
};

/// Discretized Stieltjes (Lanczos with full reorthogonalization) on a
/// composite Gauss-Legendre grid, refined until a_j, b_j change by less
/// than tol and widened until every phi_j is negligible at both ends.
/// Throws std::runtime_error with the achieved residual on failure.
RecurrenceTable compute_recurrence(const Potential& p, int jmax, double tol = 1e-13);

/// phi_0(x) .. phi_jmax(x), jmax <= capacity(). The recurrence runs on the
/// phi values with a running exponent, so there is no overflow of p_j far
/// from the origin.
std::vector<double> eval_phi(const RecurrenceTable& t, int jmax, double x);

/// Values and x-derivatives of phi_0 .. phi_jmax. The derivative uses
/// phi_j' = p_j' w^{1/2} - V'/2 phi_j with p_j' from the differentiated
/// recurrence.
void eval_phi_with_derivative(const RecurrenceTable& t, int jmax, double x, std::span<double> phi,
                              std::span<double> dphi);

/// Local length scale used to switch between kernel representations.
double kernel_length_scale(const RecurrenceTable& t, int n);

/// K_N(x, y) = sum_{k<N} phi_k(x) phi_k(y).
double cd_kernel_sum(const RecurrenceTable& t, int n, double x, double y);
/// K_N(x, y) = b_{N-1} (phi_N(x) phi_{N-1}(y) - phi_{N-1}(x) phi_N(y)) / (x - y).
double cd_kernel_ratio(const RecurrenceTable& t, int n, double x, double y);
/// Ratio form when |x - y| > 1e-4 * kernel_length_scale, sum form otherwise.
double cd_kernel(const RecurrenceTable& t, int n, double x, double y);

/// Same switch, from precomputed phi vectors (length > n) at x and y.
double cd_kernel(const RecurrenceTable& t, int n, double x, double y, std::span<const double> phi_x,
                 std::span<const double> phi_y);

/// R_{N,l,2}(x_1..x_l) = det(K_N(x_j, x_k)).
double correlation_det(const RecurrenceTable& t, int n, std::span<const double> points);

/// max |(phi_j, phi_k) - delta_jk| for j, k <= jmax on a grid independent of
/// the one used to build the table.
double orthonormality_residual(const RecurrenceTable& t, int jmax);

/// String equations for w = e^{-V}: b_j V'(J)_{j+1,j} = j + 1 and
/// V'(J)_{jj} = 0, with J the Jacobi matrix of the table. Returns the max
/// relative defect over j <= jmax; jmax is lowered to what the table
/// supports exactly.
double string_equation_residual(const RecurrenceTable& t, int jmax);

/// CSV with columns j,a_j,b_j (17 significant digits) preceded by '#'
/// metadata lines carrying the potential and norm0.
void write_recurrence_csv(const RecurrenceTable& t, const std::filesystem::path& path);
RecurrenceTable read_recurrence_csv(const std::filesystem::path& path);

}  // namespace rmtedge
