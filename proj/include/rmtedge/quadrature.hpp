#pragma once

#include <vector>

#include <Eigen/Dense>

namespace rmtedge {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [-1, 1] (Newton on P_n, nodes ascending).
QuadratureRule gauss_legendre(int n);
/// Same rule affinely mapped to [a, b].
QuadratureRule gauss_legendre(int n, double a, double b);

/// Q(i, j) = integral from -1 to t_i of the j-th Lagrange basis polynomial
/// on the Gauss-Legendre nodes t. Applied to samples f(t_j) it gives the
/// running integral of the interpolant at every node, exact for
/// polynomials of degree < n.
Eigen::MatrixXd cumulative_integration_matrix(const QuadratureRule& reference);

/// Barycentric interpolation of samples on a Gauss-Legendre reference rule
/// at a point t in [-1, 1].
double interpolate(const QuadratureRule& reference, const std::vector<double>& values, double t);

/// Composite Gauss-Legendre grid: `panels` equal panels on [lo, hi] with
/// `order` nodes each. Nodes are stored panel by panel, ascending.
class CompositeGrid {
 public:
  CompositeGrid(double lo, double hi, int panels, int order);

  double lo() const { return lo_; }
  double hi() const { return hi_; }
  int panels() const { return panels_; }
  int order() const { return order_; }
  double panel_width() const { return (hi_ - lo_) / panels_; }
  double panel_left(int p) const { return lo_ + p * panel_width(); }
  /// Panel index containing x, clamped to [0, panels - 1].
  int panel_of(double x) const;

  int size() const { return static_cast<int>(nodes_.size()); }
  const std::vector<double>& nodes() const { return nodes_; }
  const std::vector<double>& weights() const { return weights_; }

  const QuadratureRule& reference() const { return ref_; }
  /// Cumulative integration matrix on the reference panel, in reference units.
  const Eigen::MatrixXd& reference_cumulative() const { return cumulative_; }

 private:
  double lo_, hi_;
  int panels_, order_;
  QuadratureRule ref_;
  Eigen::MatrixXd cumulative_;
  std::vector<double> nodes_, weights_;
};

}  // namespace rmtedge
