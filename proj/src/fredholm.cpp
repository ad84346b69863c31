#include "rmtedge/fredholm.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>

#include "rmtedge/airy.hpp"
#include "rmtedge/io.hpp"
#include "rmtedge/quadrature.hpp"

namespace rmtedge {

namespace {

using IndexedBlock = std::function<std::array<double, 4>(int, int)>;

NystromOperator empty_operator(double L0, double T, int order, bool block) {
  if (order < 2) throw std::invalid_argument("Nystrom order must be at least 2");
  if (!(T > L0)) throw std::invalid_argument("truncation point must exceed L0");
  const QuadratureRule rule = gauss_legendre(order, L0, T);
  NystromOperator op;
  op.nodes = rule.nodes;
  op.weights = rule.weights;
  op.block = block;
  op.L0 = L0;
  op.truncation_T = T;
  op.order = order;
  return op;
}

NystromOperator assemble_scalar_indexed(const std::function<double(int, int)>& k, double L0,
                                        double T, int order) {
  NystromOperator op = empty_operator(L0, T, order, false);
  const int M = order;
  op.kernel_matrix.resize(M, M);
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < M; ++j)
      op.kernel_matrix(i, j) = std::sqrt(op.weights[i] * op.weights[j]) * k(i, j);
  return op;
}

NystromOperator assemble_indexed(const IndexedBlock& k, double L0, double T, int order, double jump) {
  NystromOperator op = empty_operator(L0, T, order, true);
  const int M = order;
  std::vector<double> sw(M);
  for (int i = 0; i < M; ++i) sw[i] = std::sqrt(op.weights[i]);
  op.kernel_matrix.resize(2 * M, 2 * M);
  for (int i = 0; i < M; ++i) {
    for (int j = 0; j < M; ++j) {
      const auto e = k(i, j);
      const double s = sw[i] * sw[j];
      op.kernel_matrix(i, j) = s * e[0];
      op.kernel_matrix(i, M + j) = s * e[1];
      op.kernel_matrix(M + i, j) = s * e[2];
      op.kernel_matrix(M + i, M + j) = s * e[3];
    }
  }
  if (jump != 0.0) {
    // int sgn(x_i - eta) f(eta) = 2 int_L0^{x_i} f - int_L0^T f on the interpolant.
    const Eigen::MatrixXd q = cumulative_integration_matrix(gauss_legendre(M)) * (0.5 * (T - L0));
    for (int i = 0; i < M; ++i)
      for (int j = 0; j < M; ++j)
        op.kernel_matrix(M + i, j) += jump * (2.0 * q(i, j) - op.weights[j]) * sw[i] / sw[j];
  }
  return op;
}

Probability finalize(Beta beta, double det, const NystromOperator& op) {
  Probability p;
  p.determinant = det;
  p.truncation_T = op.truncation_T;
  p.order = op.order;
  if (!(det >= -1e-10)) {
    std::ostringstream msg;
    msg << "negative Fredholm determinant " << det << " at L0=" << op.L0;
    throw std::runtime_error(msg.str());
  }
  if (det < 0.0) {
    det = 0.0;
    p.clamped = true;
  }
  p.value = beta == Beta::unitary ? det : std::sqrt(det);
  return p;
}

double resolve_T(double L0, const FredholmOptions& opt) {
  return opt.T ? *opt.T : default_truncation(L0);
}

double sgn(double v) { return (v > 0.0) - (v < 0.0); }

}  // namespace

double default_truncation(double L0) { return std::max(L0 + 14.0, 10.0); }

double default_g(double xi) { return std::sqrt(1.0 + xi * xi); }

NystromOperator assemble_scalar(const ScalarKernel& k, double L0, double T, int order) {
  const QuadratureRule rule = gauss_legendre(order, L0, T);
  return assemble_scalar_indexed([&](int i, int j) { return k(rule.nodes[i], rule.nodes[j]); }, L0,
                                 T, order);
}

NystromOperator assemble_block(const BlockKernel& smooth, double L0, double T, int order,
                               double jump) {
  const QuadratureRule rule = gauss_legendre(order, L0, T);
  return assemble_indexed(
      [&](int i, int j) { return smooth(rule.nodes[i], rule.nodes[j]); }, L0, T, order, jump);
}

void conjugate_by(NystromOperator& op, const std::function<double(double)>& g) {
  if (!op.block) return;
  const int M = op.order;
  Eigen::VectorXd d(2 * M);
  for (int i = 0; i < M; ++i) {
    const double gi = g(op.nodes[i]);
    if (!(gi > 0.0)) throw std::invalid_argument("conjugation weight must be positive");
    d(i) = gi;
    d(M + i) = 1.0 / gi;
  }
  op.kernel_matrix = d.asDiagonal() * op.kernel_matrix * d.cwiseInverse().asDiagonal();
}

double det_trace(const NystromOperator& op) {
  const int n = static_cast<int>(op.kernel_matrix.rows());
  const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n) - op.kernel_matrix;
  return a.partialPivLu().determinant();
}

double det2_carleman(const NystromOperator& op) {
  return det_trace(op) * std::exp(op.kernel_matrix.trace());
}

double det2_block(const NystromOperator& op) {
  if (!op.block) return det_trace(op);
  const int M = op.order;
  const double diag = op.kernel_matrix.topLeftCorner(M, M).trace() +
                      op.kernel_matrix.bottomRightCorner(M, M).trace();
  return det2_carleman(op) * std::exp(-diag);
}

Probability gap_finite(const RecurrenceTable& t, const WidomBlocks* w, const EdgeScaling& s,
                       Beta beta, double L0, const FredholmOptions& opt) {
  const double T = resolve_T(L0, opt);
  const int M = opt.order;
  const QuadratureRule rule = gauss_legendre(M, L0, T);
  const double sc = edge_jacobian(s);
  std::vector<double> x(M);
  for (int i = 0; i < M; ++i) x[i] = edge_map(s, rule.nodes[i]);

  if (beta == Beta::unitary) {
    if (s.N > t.capacity())
      throw std::invalid_argument("recurrence table too short for N=" + std::to_string(s.N));
    std::vector<std::vector<double>> phi(M);
    for (int i = 0; i < M; ++i) phi[i] = eval_phi(t, s.N, x[i]);
    const NystromOperator op = assemble_scalar_indexed(
        [&](int i, int j) { return sc * cd_kernel(t, s.N, x[i], x[j], phi[i], phi[j]); }, L0, T, M);
    return finalize(beta, det_trace(op), op);
  }

  if (w == nullptr) throw std::invalid_argument("beta = 1, 4 gap probability needs Widom blocks");
  if (w->N != s.N) throw std::invalid_argument("Widom blocks and edge scaling disagree on N");
  std::vector<PointSample> ps(M);
  for (int i = 0; i < M; ++i) ps[i] = w->integrator->sample(x[i]);
  const bool orth = beta == Beta::orthogonal;
  NystromOperator op = assemble_indexed(
      [&](int i, int j) {
        auto e = matrix_kernel(*w, beta, ps[i], ps[j]).e;
        e[0] *= sc;
        e[1] *= sc * sc;
        e[3] *= sc;
        if (orth) e[2] += 0.5 * sgn(x[i] - x[j]);
        return e;
      },
      L0, T, M, orth ? -0.5 : 0.0);
  if (orth) {
    conjugate_by(op, opt.g);
    return finalize(beta, det2_block(op), op);
  }
  return finalize(beta, det_trace(op), op);
}

Probability tw_limit(Beta beta, double L0, const FredholmOptions& opt) {
  const double T = resolve_T(L0, opt);
  const int M = opt.order;
  if (beta == Beta::unitary) {
    const NystromOperator op = assemble_scalar(airy_kernel, L0, T, M);
    return finalize(beta, det_trace(op), op);
  }
  const bool orth = beta == Beta::orthogonal;
  NystromOperator op = assemble_block(
      [&](double xi, double eta) {
        auto e = limit_kernel(beta, xi, eta).e;
        if (orth) e[2] += 0.5 * sgn(xi - eta);
        return e;
      },
      L0, T, M, orth ? -0.5 : 0.0);
  if (orth) {
    conjugate_by(op, opt.g);
    return finalize(beta, det2_block(op), op);
  }
  return finalize(beta, det_trace(op), op);
}

double distribution_mean(const std::function<double(double)>& cdf, double lo, double hi, int order) {
  const QuadratureRule rule = gauss_legendre(order, lo, hi);
  double acc = lo;
  for (int i = 0; i < order; ++i) acc += rule.weights[i] * (1.0 - cdf(rule.nodes[i]));
  return acc;
}

double distribution_quantile(const std::function<double(double)>& cdf, double q, double lo, double hi,
                             double tol) {
  if (!(cdf(lo) <= q && cdf(hi) >= q)) throw std::invalid_argument("quantile not bracketed");
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    (cdf(mid) < q ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

std::vector<TabulationRow> tabulate_tw(Beta beta, const std::vector<double>& L0s, int order) {
  std::vector<TabulationRow> rows;
  for (double L0 : L0s) {
    FredholmOptions opt;
    opt.order = order;
    const Probability p = tw_limit(beta, L0, opt);
    opt.order = 2 * order;
    const Probability fine = tw_limit(beta, L0, opt);
    rows.push_back({beta, L0, p.value, order, p.truncation_T, std::abs(p.value - fine.value)});
  }
  return rows;
}

void write_tabulation_csv(const std::filesystem::path& path, const std::vector<TabulationRow>& rows) {
  CsvWriter csv(path, {"beta", "L0", "value", "order", "truncation_T", "est_error"});
  for (const auto& r : rows)
    csv.row(std::vector<std::string>{std::to_string(to_int(r.beta)), format_double(r.L0),
                                     format_double(r.value), std::to_string(r.order),
                                     format_double(r.truncation_T), format_double(r.est_error)});
}

std::vector<TabulationRow> read_tabulation_csv(const std::filesystem::path& path) {
  const CsvTable t = read_csv(path);
  const int cb = t.column("beta"), cl = t.column("L0"), cv = t.column("value"),
            co = t.column("order"), ct = t.column("truncation_T"), ce = t.column("est_error");
  std::vector<TabulationRow> rows;
  for (const auto& r : t.rows) {
    rows.push_back({parse_beta(std::stoi(r[cb])), std::stod(r[cl]), std::stod(r[cv]), std::stoi(r[co]),
                    std::stod(r[ct]), std::stod(r[ce])});
  }
  return rows;
}

}  // namespace rmtedge
