#pragma once

#include <array>
#include <filesystem>
#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "rmtedge/equilibrium.hpp"
#include "rmtedge/orthopoly.hpp"
#include "rmtedge/potential.hpp"
#include "rmtedge/widom.hpp"

namespace rmtedge {

/// Gauss-Legendre discretization of an integral operator on [L0, T].
///
/// kernel_matrix holds the symmetrized form W^{1/2} K W^{1/2} (for block
/// operators, blockwise, with component 1 in the first M rows/columns).
/// Functions taking a NystromOperator evaluate determinants of I - K.
struct NystromOperator {
  std::vector<double> nodes;
  std::vector<double> weights;
  Eigen::MatrixXd kernel_matrix;
  bool block = false;
  double L0 = 0.0;
  double truncation_T = 0.0;
  int order = 0;
};

/// T(L0) = max(L0 + 14, 10).
double default_truncation(double L0);

using ScalarKernel = std::function<double(double, double)>;
/// Entries 11, 12, 21, 22.
using BlockKernel = std::function<std::array<double, 4>(double, double)>;

NystromOperator assemble_scalar(const ScalarKernel& k, double L0, double T, int order);

/// Block kernel whose 21 entry is smooth(xi, eta) + jump * sgn(xi - eta).
/// The jump term is integrated exactly against the interpolant of the
/// input function (cumulative Gauss-Legendre weights), so the result keeps
/// spectral accuracy despite the discontinuity.
NystromOperator assemble_block(const BlockKernel& smooth, double L0, double T, int order,
                               double jump = 0.0);

/// G K G^{-1} with G = diag(g, 1/g), applied as a similarity on the nodes.
void conjugate_by(NystromOperator& op, const std::function<double(double)>& g);

/// det(I - K) by partial-pivot LU.
double det_trace(const NystromOperator& op);
/// det(I - K) e^{tr K}, the Carleman determinant of the discrete operator.
double det2_carleman(const NystromOperator& op);
/// det2_carleman times e^{-tr K11 - tr K22}: the determinant regularized in
/// the off-diagonal blocks only. For a discrete operator it coincides with
/// det_trace up to rounding.
double det2_block(const NystromOperator& op);

/// g(xi) = sqrt(1 + xi^2).
double default_g(double xi);

struct FredholmOptions {
  int order = 60;
  std::optional<double> T;  // default_truncation(L0) when unset
  std::function<double(double)> g = default_g;  // beta = 1 conjugation
};

struct Probability {
  double value = 0.0;
  double determinant = 0.0;
  double truncation_T = 0.0;
  int order = 0;
  bool clamped = false;  // determinant in (-1e-10, 0) set to 0
};

/// Prob{lambda_1 <= edge_map(s, L0)} at finite N. w may be null for
/// beta = 2 and must match s.N otherwise.
Probability gap_finite(const RecurrenceTable& t, const WidomBlocks* w, const EdgeScaling& s,
                       Beta beta, double L0, const FredholmOptions& opt = {});

/// F^(beta)(L0) from K_Airy, K^(1) or K^(4).
Probability tw_limit(Beta beta, double L0, const FredholmOptions& opt = {});

/// Mean of a distribution from its CDF on [lo, hi] (F(lo) ~ 0, F(hi) ~ 1),
/// integrating by parts: lo + int_lo^hi (1 - F).
double distribution_mean(const std::function<double(double)>& cdf, double lo, double hi,
                         int order = 48);
/// Bisection for F(x) = q on [lo, hi].
double distribution_quantile(const std::function<double(double)>& cdf, double q, double lo, double hi,
                             double tol = 1e-10);

struct TabulationRow {
  Beta beta = Beta::unitary;
  double L0 = 0.0;
  double value = 0.0;
  int order = 0;
  double truncation_T = 0.0;
  double est_error = 0.0;  // |F(order) - F(2 order)|
};

std::vector<TabulationRow> tabulate_tw(Beta beta, const std::vector<double>& L0s, int order);

/// Columns beta,L0,value,order,truncation_T,est_error.
void write_tabulation_csv(const std::filesystem::path& path, const std::vector<TabulationRow>& rows);
std::vector<TabulationRow> read_tabulation_csv(const std::filesystem::path& path);

}  // namespace rmtedge
