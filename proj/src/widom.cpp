#include "rmtedge/widom.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>

namespace rmtedge {

namespace {

int default_panels(const RecurrenceTable& t) {
  if (t.panels > 0) return t.panels;
  return std::max(8, 4 * static_cast<int>(std::ceil(t.hi - t.lo)));
}

double condition_number(const Eigen::MatrixXd& m) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& sv = svd.singularValues();
  const double smallest = sv(sv.size() - 1);
  return smallest > 0.0 ? sv(0) / smallest : std::numeric_limits<double>::infinity();
}

nlohmann::json matrix_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (int i = 0; i < m.rows(); ++i) {
    std::vector<double> r(m.cols());
    for (int j = 0; j < m.cols(); ++j) r[j] = m(i, j);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace

PhiIntegrator::PhiIntegrator(const RecurrenceTable& t, int count, int panels, int order)
    : table_(&t),
      count_(count),
      grid_(t.lo, t.hi, panels > 0 ? panels : default_panels(t),
            order > 0 ? order : (t.order > 0 ? t.order : 20)) {
  if (count < 1 || count - 1 > t.capacity())
    throw std::out_of_range("phi index " + std::to_string(count - 1) + " beyond table capacity " +
                            std::to_string(t.capacity()));
  const int m = grid_.size();
  const int q = grid_.order();
  const int np = grid_.panels();
  const double h = grid_.panel_width();
  phi_.resize(m, count);
  dphi_.resize(m, count);
  std::vector<double> f(count), df(count);
  for (int i = 0; i < m; ++i) {
    eval_phi_with_derivative(t, count - 1, grid_.nodes()[i], f, df);
    for (int j = 0; j < count; ++j) {
      phi_(i, j) = f[j];
      dphi_(i, j) = df[j];
    }
  }
  const Eigen::Map<const Eigen::VectorXd> w(grid_.weights().data(), m);
  const Eigen::MatrixXd& qref = grid_.reference_cumulative();
  suffix_ = Eigen::MatrixXd::Zero(np + 1, count);
  Eigen::MatrixXd tail_nodes(m, count);
  for (int p = np - 1; p >= 0; --p) {
    const auto block = phi_.middleRows(p * q, q);
    const Eigen::RowVectorXd panel = w.segment(p * q, q).transpose() * block;
    suffix_.row(p) = suffix_.row(p + 1) + panel;
    const Eigen::MatrixXd running = 0.5 * h * (qref * block);
    for (int k = 0; k < q; ++k)
      tail_nodes.row(p * q + k) = suffix_.row(p) - running.row(k);
  }
  total_.resize(count);
  for (int j = 0; j < count; ++j) total_[j] = suffix_(0, j);
  eps_.resize(m, count);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < count; ++j) eps_(i, j) = 0.5 * total_[j] - tail_nodes(i, j);
}

std::vector<double> PhiIntegrator::tails(double y) const {
  std::vector<double> out(count_, 0.0);
  if (y >= grid_.hi()) return out;
  if (y <= grid_.lo()) return total_;
  const int p = grid_.panel_of(y);
  const double right = grid_.panel_left(p) + grid_.panel_width();
  for (int j = 0; j < count_; ++j) out[j] = suffix_(p + 1, j);
  if (right > y) {
    const QuadratureRule rule = gauss_legendre(grid_.order(), y, right);
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
      const auto f = eval_phi(*table_, count_ - 1, rule.nodes[k]);
      for (int j = 0; j < count_; ++j) out[j] += rule.weights[k] * f[j];
    }
  }
  return out;
}

PointSample PhiIntegrator::sample(double x) const {
  PointSample s;
  s.x = x;
  s.phi.resize(count_);
  s.dphi.resize(count_);
  eval_phi_with_derivative(*table_, count_ - 1, x, s.phi, s.dphi);
  s.tail = tails(x);
  return s;
}

Eigen::MatrixXd PhiIntegrator::derivative_matrix(int j0, int j1) const {
  const Eigen::Map<const Eigen::VectorXd> w(grid_.weights().data(), grid_.size());
  const int len = j1 - j0;
  return dphi_.middleCols(j0, len).transpose() * w.asDiagonal() * phi_.middleCols(j0, len);
}

Eigen::MatrixXd PhiIntegrator::epsilon_matrix(int j0, int j1) const {
  const Eigen::Map<const Eigen::VectorXd> w(grid_.weights().data(), grid_.size());
  const int len = j1 - j0;
  return eps_.middleCols(j0, len).transpose() * w.asDiagonal() * phi_.middleCols(j0, len);
}

double epsilon_phi(const RecurrenceTable& t, int j, double y) {
  PhiIntegrator integ(t, j + 1);
  return integ.eps_inf(j) - integ.tails(y)[j];
}

WidomBlocks build_blocks(const RecurrenceTable& t, int N) {
  const int n = t.potential.block_size();
  if (N % 2 != 0) throw std::invalid_argument("N must be even, got " + std::to_string(N));
  if (N <= n) throw std::invalid_argument("N must exceed the block size n=" + std::to_string(n));
  if (N + n > t.capacity())
    throw std::invalid_argument("recurrence table too short for N=" + std::to_string(N));
  WidomBlocks w;
  w.N = N;
  w.n = n;
  w.integrator = std::make_shared<PhiIntegrator>(t, N + n + 1);
  const auto& integ = *w.integrator;
  w.D = integ.derivative_matrix(N - n, N + n);
  w.B = integ.epsilon_matrix(N - n, N + n);
  const int n2 = 2 * n;
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n2, n2);
  w.A = Eigen::MatrixXd::Zero(n2, n2);
  w.A.topRightCorner(n, n) = w.block(w.D, 0, 1);
  w.A.bottomLeftCorner(n, n) = -w.block(w.D, 1, 0);
  w.C = id + w.B * w.A;
  const Eigen::MatrixXd ibac = id - w.B * w.A * w.C;
  const Eigen::MatrixXd c11 = w.C.topLeftCorner(n, n);
  w.cond_C11 = condition_number(c11);
  w.cond_I_BAC = condition_number(ibac);
  if (!(w.cond_C11 < 1e14) || !(w.cond_I_BAC < 1e14)) {
    std::ostringstream msg;
    msg << "singular Widom block: cond(C11)=" << w.cond_C11 << ", cond(I-BAC)=" << w.cond_I_BAC;
    throw std::runtime_error(msg.str());
  }
  // Rows of A C^{-1} = (A (I - BA)^{-1})^T; this is what the inverse of the
  // full (phi_j, eps phi_k) matrix reduces to on the window.
  const Eigen::MatrixXd g = w.C.transpose().colPivHouseholderQr().solve(w.A.transpose()).transpose();
  w.G11 = g.topLeftCorner(n, n);
  w.G12 = g.topRightCorner(n, n);
  const Eigen::MatrixXd ac = w.A * w.C;
  const Eigen::MatrixXd mt = ibac.transpose().colPivHouseholderQr().solve(ac.transpose());
  w.G_bac_defect = std::max((mt.topLeftCorner(n, n) - w.G11).cwiseAbs().maxCoeff(),
                            (mt.topRightCorner(n, n) - w.G12).cwiseAbs().maxCoeff());
  w.M4 = w.block(w.D, 1, 0) *
         c11.colPivHouseholderQr().solve(w.block(w.B, 0, 0) * w.block(w.D, 0, 1));
  w.eps_phi1_inf.resize(n);
  w.eps_phi2_inf.resize(n);
  for (int i = 0; i < n; ++i) {
    w.eps_phi1_inf(i) = integ.eps_inf(N - n + i);
    w.eps_phi2_inf(i) = integ.eps_inf(N + i);
  }
  return w;
}

namespace {

using Vec = Eigen::VectorXd;

Vec window(const std::vector<double>& v, int start, int n) {
  return Eigen::Map<const Vec>(v.data() + start, n);
}

Vec eps_window(const WidomBlocks& w, const PointSample& s, int start) {
  const auto& integ = *w.integrator;
  Vec out(w.n);
  for (int i = 0; i < w.n; ++i) out(i) = integ.eps_inf(start + i) - s.tail[start + i];
  return out;
}

// u(y) for beta = 1.
Vec u_beta1(const WidomBlocks& w, const PointSample& py) {
  return w.G11 * eps_window(w, py, w.N - w.n) + w.G12 * eps_window(w, py, w.N);
}

// v(y) for beta = 4.
Vec v_beta4(const WidomBlocks& w, const PointSample& py) {
  return w.block(w.D, 1, 0) * window(py.tail, w.N - w.n, w.n) + w.M4 * window(py.tail, w.N, w.n);
}

double cd_from_samples(const WidomBlocks& w, const RecurrenceTable& t, const PointSample& px,
                       const PointSample& py) {
  return cd_kernel(t, w.N, px.x, py.x, px.phi, py.phi);
}

double s1(const WidomBlocks& w, const RecurrenceTable& t, const PointSample& px,
          const PointSample& py) {
  return cd_from_samples(w, t, px, py) - window(px.phi, w.N - w.n, w.n).dot(u_beta1(w, py));
}

double s4(const WidomBlocks& w, const RecurrenceTable& t, const PointSample& px,
          const PointSample& py) {
  return cd_from_samples(w, t, px, py) - window(px.phi, w.N, w.n).dot(v_beta4(w, py));
}

}  // namespace

double s_beta1(const WidomBlocks& w, const RecurrenceTable& t, double x, double y) {
  const auto& integ = *w.integrator;
  return s1(w, t, integ.sample(x), integ.sample(y));
}

double s_beta4(const WidomBlocks& w, const RecurrenceTable& t, double x, double y) {
  const auto& integ = *w.integrator;
  return s4(w, t, integ.sample(x), integ.sample(y));
}

double s_beta4_eps_form(const WidomBlocks& w, const RecurrenceTable& t, double x, double y) {
  const auto& integ = *w.integrator;
  const PointSample px = integ.sample(x), py = integ.sample(y);
  const Vec phi2 = window(px.phi, w.N, w.n);
  return cd_from_samples(w, t, px, py) +
         phi2.dot(w.block(w.D, 1, 0) * eps_window(w, py, w.N - w.n)) +
         phi2.dot(w.M4 * eps_window(w, py, w.N));
}

DirectOracle::DirectOracle(const RecurrenceTable& t, Beta beta, int N)
    : beta_(beta),
      N_(N),
      integ_(t, N, default_panels(t) + default_panels(t) / 2 + 1, 24) {
  if (beta == Beta::unitary) throw std::invalid_argument("direct oracle is for beta = 1 or 4");
  if (N % 2 != 0) throw std::invalid_argument("direct oracle needs even N");
  if (beta == Beta::orthogonal) m_ = integ_.epsilon_matrix(0, N).transpose();
  else m_ = integ_.derivative_matrix(0, N).transpose();
  const double cond = condition_number(m_);
  if (!(cond < 1e13)) {
    std::ostringstream msg;
    msg << "moment matrix numerically singular, condition number " << cond;
    throw std::runtime_error(msg.str());
  }
  mu_ = m_.fullPivLu().inverse();
}

double DirectOracle::operator()(double x, double y) const {
  const PointSample px = integ_.sample(x), py = integ_.sample(y);
  double acc = 0.0;
  for (int j = 0; j < N_; ++j) {
    for (int k = 0; k < N_; ++k) {
      if (beta_ == Beta::orthogonal) {
        const double eps_k = integ_.eps_inf(k) - py.tail[k];
        acc -= px.phi[j] * mu_(j, k) * eps_k;
      } else {
        acc += px.dphi[j] * mu_(j, k) * py.phi[k];
      }
    }
  }
  return acc;
}

double s_direct_oracle(const RecurrenceTable& t, Beta beta, int N, double x, double y) {
  return DirectOracle(t, beta, N)(x, y);
}

MatrixKernelSample matrix_kernel(const WidomBlocks& w, Beta beta, const PointSample& px,
                                 const PointSample& py) {
  const RecurrenceTable& t = w.integrator->table();
  MatrixKernelSample r;
  r.beta = beta;
  r.x = px.x;
  r.y = py.x;
  const int N = w.N, n = w.n;
  if (beta == Beta::unitary) {
    r.e[0] = cd_from_samples(w, t, px, py);
    return r;
  }
  double dk = 0.0;  // sum phi_k(x) phi_k'(y)
  for (int k = 0; k < N; ++k) dk += px.phi[k] * py.dphi[k];
  const Vec phi1x = window(px.phi, N - n, n), phi2x = window(px.phi, N, n);
  const Vec phi1y = window(py.phi, N - n, n), phi2y = window(py.phi, N, n);
  if (beta == Beta::orthogonal) {
    const Vec uy = u_beta1(w, py);
    r.e[0] = s1(w, t, px, py);
    r.e[1] = -dk + phi1x.dot(w.G11 * phi1y + w.G12 * phi2y);
    double inner = 0.0;
    for (int k = 0; k < N; ++k) inner += py.phi[k] * (px.tail[k] - py.tail[k]);
    const Vec d_int = window(px.tail, N - n, n) - window(py.tail, N - n, n);
    const double sgn = (px.x > py.x) - (px.x < py.x);
    r.e[2] = -(inner - d_int.dot(uy)) - 0.5 * sgn;
    r.e[3] = s1(w, t, py, px);
    return r;
  }
  const Vec vy = v_beta4(w, py);
  const Eigen::MatrixXd d21 = w.block(w.D, 1, 0);
  double inner = 0.0;
  for (int k = 0; k < N; ++k) inner += px.tail[k] * py.phi[k];
  r.e[0] = 0.5 * s4(w, t, px, py);
  r.e[1] = -0.5 * (dk + phi2x.dot(d21 * phi1y + w.M4 * phi2y));
  r.e[2] = -0.5 * (inner - window(px.tail, N, n).dot(vy));
  r.e[3] = 0.5 * s4(w, t, py, px);
  return r;
}

MatrixKernelSample matrix_kernel(const WidomBlocks& w, const RecurrenceTable& t, Beta beta, double x,
                                 double y) {
  (void)t;
  const auto& integ = *w.integrator;
  return matrix_kernel(w, beta, integ.sample(x), integ.sample(y));
}

MatrixKernelSample conjugate(const MatrixKernelSample& k, double lambda) {
  MatrixKernelSample r = k;
  if (k.beta == Beta::unitary) return r;
  r.e[1] = k.e[1] / (lambda * lambda);
  r.e[2] = k.e[2] * lambda * lambda;
  return r;
}

MatrixKernelSample scaled_matrix_kernel(const WidomBlocks& w, const RecurrenceTable& t,
                                        const EdgeScaling& s, Beta beta, double xi, double eta) {
  const double x = edge_map(s, xi), y = edge_map(s, eta);
  const double sc = edge_jacobian(s);
  MatrixKernelSample r;
  if (beta == Beta::unitary) {
    r.beta = beta;
    r.x = x;
    r.y = y;
    r.e[0] = sc * cd_kernel(t, s.N, x, y);
    return r;
  }
  if (w.N != s.N) throw std::invalid_argument("Widom blocks and edge scaling disagree on N");
  r = matrix_kernel(w, t, beta, x, y);
  r.e[0] *= sc;
  r.e[1] *= sc * sc;
  r.e[3] *= sc;
  return r;
}

std::vector<MatrixKernelSample> scaled_kernel_grid(const WidomBlocks* w, const RecurrenceTable& t,
                                                   const EdgeScaling& s, Beta beta,
                                                   const std::vector<double>& grid) {
  const int g = static_cast<int>(grid.size());
  const double sc = edge_jacobian(s);
  std::vector<double> x(g);
  for (int i = 0; i < g; ++i) x[i] = edge_map(s, grid[i]);
  std::vector<MatrixKernelSample> out;
  out.reserve(static_cast<std::size_t>(g) * g);
  if (beta == Beta::unitary) {
    std::vector<std::vector<double>> phi(g);
    for (int i = 0; i < g; ++i) phi[i] = eval_phi(t, s.N, x[i]);
    for (int i = 0; i < g; ++i)
      for (int j = 0; j < g; ++j) {
        MatrixKernelSample r;
        r.x = x[i];
        r.y = x[j];
        r.e[0] = sc * cd_kernel(t, s.N, x[i], x[j], phi[i], phi[j]);
        out.push_back(r);
      }
    return out;
  }
  if (w == nullptr) throw std::invalid_argument("beta = 1, 4 kernels need Widom blocks");
  if (w->N != s.N) throw std::invalid_argument("Widom blocks and edge scaling disagree on N");
  std::vector<PointSample> ps(g);
  for (int i = 0; i < g; ++i) ps[i] = w->integrator->sample(x[i]);
  for (int i = 0; i < g; ++i)
    for (int j = 0; j < g; ++j) {
      MatrixKernelSample r = matrix_kernel(*w, beta, ps[i], ps[j]);
      r.e[0] *= sc;
      r.e[1] *= sc * sc;
      r.e[3] *= sc;
      out.push_back(r);
    }
  return out;
}

std::vector<LimitKernelSample> limit_kernel_grid(Beta beta, const std::vector<double>& grid) {
  std::vector<LimitKernelSample> out;
  out.reserve(grid.size() * grid.size());
  for (double xi : grid)
    for (double eta : grid) out.push_back(limit_kernel(beta, xi, eta));
  return out;
}

std::vector<double> sup_kernel_error(const std::vector<MatrixKernelSample>& scaled,
                                     const std::vector<LimitKernelSample>& limit) {
  if (scaled.size() != limit.size() || scaled.empty())
    throw std::invalid_argument("kernel grids differ in size");
  const int entries = limit.front().beta == Beta::unitary ? 1 : 4;
  std::vector<double> sup(entries, 0.0);
  for (std::size_t k = 0; k < scaled.size(); ++k)
    for (int e = 0; e < entries; ++e)
      sup[e] = std::max(sup[e], std::abs(scaled[k].e[e] - limit[k].e[e]));
  return sup;
}

double loglog_slope(const std::vector<double>& n, const std::vector<double>& err) {
  if (n.size() != err.size() || n.size() < 2) throw std::invalid_argument("need two or more points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double m = static_cast<double>(n.size());
  for (std::size_t i = 0; i < n.size(); ++i) {
    const double lx = std::log(n[i]), ly = std::log(err[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

double cluster_sum(Beta beta, int l, const std::function<std::array<double, 4>(int, int)>& kernel) {
  if (l < 2 || l > 8) throw std::invalid_argument("cluster size must be in [2, 8]");
  std::vector<std::array<double, 4>> kv(l * l);
  for (int i = 0; i < l; ++i)
    for (int j = 0; j < l; ++j) kv[i * l + j] = kernel(i, j);
  std::vector<int> perm(l);
  std::iota(perm.begin(), perm.end(), 0);
  double acc = 0.0;
  do {
    if (beta == Beta::unitary) {
      double prod = 1.0;
      for (int k = 0; k < l; ++k) prod *= kv[perm[k] * l + perm[(k + 1) % l]][0];
      acc += prod;
    } else {
      Eigen::Matrix2d prod = Eigen::Matrix2d::Identity();
      for (int k = 0; k < l; ++k) {
        const auto& e = kv[perm[k] * l + perm[(k + 1) % l]];
        Eigen::Matrix2d m;
        m << e[0], e[1], e[2], e[3];
        prod = prod * m;
      }
      acc += prod.trace();
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return beta == Beta::unitary ? acc / l : acc / (2.0 * l);
}

double cluster_function(const WidomBlocks& w, const RecurrenceTable& t, Beta beta,
                        std::span<const double> points, double lambda) {
  const int l = static_cast<int>(points.size());
  if (l < 2 || l > 8) throw std::invalid_argument("cluster size must be in [2, 8]");
  if (beta == Beta::unitary) {
    return cluster_sum(beta, l, [&](int i, int j) {
      return std::array<double, 4>{cd_kernel(t, w.N, points[i], points[j]), 0.0, 0.0, 0.0};
    });
  }
  std::vector<PointSample> samples;
  for (double x : points) samples.push_back(w.integrator->sample(x));
  return cluster_sum(beta, l, [&](int i, int j) {
    return conjugate(matrix_kernel(w, beta, samples[i], samples[j]), lambda).e;
  });
}

nlohmann::json to_json(const WidomBlocks& w) {
  return {{"N", w.N},
          {"n", w.n},
          {"D", matrix_json(w.D)},
          {"B", matrix_json(w.B)},
          {"A", matrix_json(w.A)},
          {"C", matrix_json(w.C)},
          {"G11", matrix_json(w.G11)},
          {"G12", matrix_json(w.G12)},
          {"D21_C11inv_B11_D12", matrix_json(w.M4)},
          {"eps_phi1_inf", std::vector<double>(w.eps_phi1_inf.data(),
                                               w.eps_phi1_inf.data() + w.eps_phi1_inf.size())},
          {"eps_phi2_inf", std::vector<double>(w.eps_phi2_inf.data(),
                                               w.eps_phi2_inf.data() + w.eps_phi2_inf.size())},
          {"cond_C11", w.cond_C11},
          {"cond_I_BAC", w.cond_I_BAC},
          {"G_bac_defect", w.G_bac_defect}};
}

}  // namespace rmtedge
