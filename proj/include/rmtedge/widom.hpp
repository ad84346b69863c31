#pragma once

#include <array>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "rmtedge/airy.hpp"
#include "rmtedge/equilibrium.hpp"
#include "rmtedge/orthopoly.hpp"
#include "rmtedge/quadrature.hpp"

namespace rmtedge {

/// phi_j, phi_j' and the tail integrals I_j(x) = int_x^inf phi_j at one point,
/// for j = 0..count-1.
struct PointSample {
  double x = 0.0;
  std::vector<double> phi, dphi, tail;
};

/// Integrals of phi_0..phi_{count-1} on a composite Gauss-Legendre grid over
/// the truncation interval of the table. Tail integrals at a node come from
/// the panel cumulative-integration matrix plus suffix sums over panels; at
/// an arbitrary point a Gauss-Legendre rule covers the rest of its panel.
class PhiIntegrator {
 public:
  /// panels = 0 / order = 0 reuse the table's own grid.
  PhiIntegrator(const RecurrenceTable& t, int count, int panels = 0, int order = 0);

  int count() const { return count_; }
  const RecurrenceTable& table() const { return *table_; }
  const CompositeGrid& grid() const { return grid_; }

  /// Integral of phi_j over the real line.
  double total(int j) const { return total_[j]; }
  /// (eps phi_j)(+inf) = total / 2.
  double eps_inf(int j) const { return 0.5 * total_[j]; }

  std::vector<double> tails(double y) const;
  PointSample sample(double x) const;

  /// Node values, rows = grid nodes, columns = index j.
  const Eigen::MatrixXd& phi_nodes() const { return phi_; }
  const Eigen::MatrixXd& dphi_nodes() const { return dphi_; }
  /// (eps phi_j)(x_i) at the nodes.
  const Eigen::MatrixXd& eps_nodes() const { return eps_; }

  /// (D phi_j, phi_k) for j, k in [j0, j1).
  Eigen::MatrixXd derivative_matrix(int j0, int j1) const;
  /// (eps phi_j, phi_k) for j, k in [j0, j1).
  Eigen::MatrixXd epsilon_matrix(int j0, int j1) const;

 private:
  const RecurrenceTable* table_;
  int count_;
  CompositeGrid grid_;
  Eigen::MatrixXd phi_, dphi_, eps_;
  std::vector<double> total_;
  Eigen::MatrixXd suffix_;  // suffix_(p, j) = integral of phi_j from panel p's left end to hi
};

/// (eps phi_j)(y) = (eps phi_j)(+inf) - int_y^inf phi_j, standalone.
double epsilon_phi(const RecurrenceTable& t, int j, double y);

/// Widom's finite-rank data on the index window N-n .. N+n-1.
struct WidomBlocks {
  int N = 0;
  int n = 0;
  Eigen::MatrixXd D;    // (D phi_j, phi_k) on the window, 2n x 2n
  Eigen::MatrixXd B;    // (eps phi_j, phi_k) on the window
  Eigen::MatrixXd A;    // [[0, D12], [-D21, 0]]
  Eigen::MatrixXd C;    // I + BA
  Eigen::MatrixXd G11;  // upper blocks of A C^{-1} = (A (I - BA)^{-1})^T
  Eigen::MatrixXd G12;
  Eigen::MatrixXd M4;   // D21 C11^{-1} B11 D12
  Eigen::VectorXd eps_phi1_inf, eps_phi2_inf;
  double cond_C11 = 0.0;
  double cond_I_BAC = 0.0;
  /// max entry difference between G and the upper blocks of
  /// (AC (I - BAC)^{-1})^T. Zero when B vanishes on the window (m = 1),
  /// O(|B|) otherwise.
  double G_bac_defect = 0.0;
  std::shared_ptr<const PhiIntegrator> integrator;

  Eigen::MatrixXd block(const Eigen::MatrixXd& m, int i, int j) const {
    return m.block(i * n, j * n, n, n);
  }
};

/// Throws std::invalid_argument for odd N, N <= n or a table that is too
/// short, std::runtime_error for a singular C11 or I - BAC.
WidomBlocks build_blocks(const RecurrenceTable& t, int N);

/// S_{N,1}(x, y) = K_N - Phi1(x)^T (G11 eps Phi1(y) + G12 eps Phi2(y)).
/// The blocks satisfy G12 = D12 and G11 = D12 (I - B21 D12)^{-1} B22 D21.
double s_beta1(const WidomBlocks& w, const RecurrenceTable& t, double x, double y);
/// S_{N/2,4}(x, y) = K_N - Phi2(x)^T (D21 I_Phi1(y) + M4 I_Phi2(y)), I = tail integral.
double s_beta4(const WidomBlocks& w, const RecurrenceTable& t, double x, double y);
/// Same kernel written with eps Phi(y) instead of tail integrals. Its value
/// at y = +inf is zero only through the identity on eps Phi(+inf).
double s_beta4_eps_form(const WidomBlocks& w, const RecurrenceTable& t, double x, double y);

/// Brute force: S_{N,1} = -sum phi_j(x) mu_jk (eps phi_k)(y) with mu the
/// inverse of (phi_j, eps phi_k), or S_{N/2,4} = sum phi_j'(x) mu_jk phi_k(y)
/// with mu the inverse of (phi_j, D phi_k), j, k < N. Uses its own grid.
class DirectOracle {
 public:
  DirectOracle(const RecurrenceTable& t, Beta beta, int N);
  double operator()(double x, double y) const;
  const Eigen::MatrixXd& moment_matrix() const { return m_; }

 private:
  Beta beta_;
  int N_;
  PhiIntegrator integ_;
  Eigen::MatrixXd m_, mu_;
};

double s_direct_oracle(const RecurrenceTable& t, Beta beta, int N, double x, double y);

/// Entries 11, 12, 21, 22 of K_{N,1} or K_{N/2,4} (beta = 4 includes the
/// overall factor 1/2). beta = 2 stores K_N in e[0].
struct MatrixKernelSample {
  Beta beta = Beta::unitary;
  double x = 0.0, y = 0.0;
  std::array<double, 4> e{};
};

MatrixKernelSample matrix_kernel(const WidomBlocks& w, Beta beta, const PointSample& px,
                                 const PointSample& py);
MatrixKernelSample matrix_kernel(const WidomBlocks& w, const RecurrenceTable& t, Beta beta, double x,
                                 double y);

/// diag(1/lambda, lambda) K diag(lambda, 1/lambda).
MatrixKernelSample conjugate(const MatrixKernelSample& k, double lambda);

/// Kernel at x = xi^(N), y = eta^(N), conjugated by lambda_(N) and
/// multiplied by 1/lambda_(N)^2, so that it converges to limit_kernel.
/// For beta = 2 the blocks are not used.
MatrixKernelSample scaled_matrix_kernel(const WidomBlocks& w, const RecurrenceTable& t,
                                        const EdgeScaling& s, Beta beta, double xi, double eta);

/// scaled_matrix_kernel on grid x grid, row-major in (xi, eta), with one
/// PointSample per grid value. w may be null for beta = 2.
std::vector<MatrixKernelSample> scaled_kernel_grid(const WidomBlocks* w, const RecurrenceTable& t,
                                                   const EdgeScaling& s, Beta beta,
                                                   const std::vector<double>& grid);

/// limit_kernel on grid x grid, row-major.
std::vector<LimitKernelSample> limit_kernel_grid(Beta beta, const std::vector<double>& grid);

/// Entrywise sup |scaled - limit| over matching grids: one value for
/// beta = 2, four (11, 12, 21, 22) otherwise.
std::vector<double> sup_kernel_error(const std::vector<MatrixKernelSample>& scaled,
                                     const std::vector<LimitKernelSample>& limit);

/// Least-squares slope of log(err) against log(n).
double loglog_slope(const std::vector<double>& n, const std::vector<double>& err);

/// Cluster sum over all permutations of the cyclic product of kernel values
/// kernel(i, j): 1/l times the scalar products for beta = 2, 1/(2l) times
/// traces of 2x2 products otherwise. l in [2, 8].
double cluster_sum(Beta beta, int l,
                   const std::function<std::array<double, 4>(int, int)>& kernel);

/// T_{N,l,beta}(points) from K_N, K_{N,1} or K_{N/2,4}, optionally
/// conjugated by lambda.
double cluster_function(const WidomBlocks& w, const RecurrenceTable& t, Beta beta,
                        std::span<const double> points, double lambda = 1.0);

nlohmann::json to_json(const WidomBlocks& w);

}  // namespace rmtedge
