// rmtedge: command-line driver for the edge-universality experiments.
//
// Exit codes: 0 success, 1 numerical tolerance failure, 2 usage error,
// 3 missing upstream file.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <Eigen/Core>
#include <boost/version.hpp>
#include <json.hpp>

#include "rmtedge/airy.hpp"
#include "rmtedge/equilibrium.hpp"
#include "rmtedge/fredholm.hpp"
#include "rmtedge/io.hpp"
#include "rmtedge/montecarlo.hpp"
#include "rmtedge/orthopoly.hpp"
#include "rmtedge/potential.hpp"
#include "rmtedge/widom.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace rmtedge;

namespace {

constexpr int kExitTolerance = 1;
constexpr int kExitUsage = 2;
constexpr int kExitMissing = 3;

struct ExitError : std::runtime_error {
  ExitError(int code, const std::string& what) : std::runtime_error(what), code(code) {}
  int code;
};

struct RunConfig {
  std::string potential = "hermite";
  int beta = 2;
  int N = 40;
  std::vector<int> ladder;
  double L0 = -4.0, L1 = 4.0, step = 0.5;
  int order = 60;
  std::uint64_t seed = 20240601;
  std::string out = ".";
  int jmax = 64;
  double tol = 1e-10;
  int count = 1000;
  std::string acceptance;  // report input, default <out>/acceptance.json
  std::string replay;
};

json to_json(const RunConfig& c) {
  return {{"potential", c.potential}, {"beta", c.beta},   {"N", c.N},         {"N_ladder", c.ladder},
          {"L0", c.L0},               {"L1", c.L1},       {"step", c.step},   {"order", c.order},
          {"seed", c.seed},           {"out", c.out},     {"jmax", c.jmax},   {"tol", c.tol},
          {"count", c.count},         {"acceptance", c.acceptance}};
}

void apply_replay(RunConfig& c) {
  if (c.replay.empty()) return;
  if (!fs::exists(c.replay)) throw ExitError(kExitMissing, "missing dependency: " + c.replay);
  const json m = read_json(c.replay);
  const json& j = m.at("config");
  c.potential = j.at("potential").get<std::string>();
  c.beta = j.at("beta");
  c.N = j.at("N");
  c.ladder = j.at("N_ladder").get<std::vector<int>>();
  c.L0 = j.at("L0");
  c.L1 = j.at("L1");
  c.step = j.at("step");
  c.order = j.at("order");
  c.seed = j.at("seed");
  c.jmax = j.at("jmax");
  c.tol = j.at("tol");
  c.count = j.at("count");
  c.acceptance = j.at("acceptance").get<std::string>();
}

void validate(const RunConfig& c) {
  try {
    parse_beta(c.beta);
  } catch (const std::invalid_argument& e) {
    throw ExitError(kExitUsage, e.what());
  }
  if (c.beta == 1) {
    if (c.N % 2 != 0) throw ExitError(kExitUsage, "beta = 1 needs even N, got " + std::to_string(c.N));
    for (int n : c.ladder)
      if (n % 2 != 0) throw ExitError(kExitUsage, "beta = 1 needs even N, got " + std::to_string(n));
  }
  if (!(c.L0 < c.L1)) throw ExitError(kExitUsage, "grid needs L0 < L1");
  if (!(c.step > 0.0)) throw ExitError(kExitUsage, "grid step must be positive");
  if (c.N < 1) throw ExitError(kExitUsage, "N must be positive");
  if (c.order < 2) throw ExitError(kExitUsage, "order must be at least 2");
}

std::vector<double> grid_of(const RunConfig& c) {
  std::vector<double> g;
  const int steps = static_cast<int>(std::floor((c.L1 - c.L0) / c.step + 1e-9));
  for (int i = 0; i <= steps; ++i) g.push_back(c.L0 + i * c.step);
  return g;
}

Potential potential_of(const RunConfig& c) {
  try {
    return parse_potential(c.potential);
  } catch (const std::invalid_argument& e) {
    throw ExitError(kExitUsage, e.what());
  }
}

std::string timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  return buf;
}

json versions() {
  std::ostringstream eigen;
  eigen << EIGEN_WORLD_VERSION << '.' << EIGEN_MAJOR_VERSION << '.' << EIGEN_MINOR_VERSION;
  return {{"rmtedge", RMTEDGE_VERSION},
          {"compiler", __VERSION__},
          {"eigen", eigen.str()},
          {"boost", BOOST_LIB_VERSION},
          {"cli11", CLI11_VERSION}};
}

class Run {
 public:
  Run(std::string command, const RunConfig& cfg) : command_(std::move(command)), cfg_(cfg) {
    fs::create_directories(cfg.out);
  }

  fs::path path(const std::string& name) {
    outputs_.push_back(name);
    return fs::path(cfg_.out) / name;
  }

  json& extra() { return extra_; }

  void finish() const {
    json m = {{"command", command_},     {"config", to_json(cfg_)}, {"versions", versions()},
              {"seed", cfg_.seed},       {"outputs", outputs_},     {"wall_clock", {{"finished_at", timestamp()}}}};
    if (!extra_.is_null()) m["results"] = extra_;
    write_json(fs::path(cfg_.out) / (command_ + "_manifest.json"), m);
  }

 private:
  std::string command_;
  RunConfig cfg_;
  std::vector<std::string> outputs_;
  json extra_;
};

int max_n(const RunConfig& c) {
  int n = c.N;
  for (int v : c.ladder) n = std::max(n, v);
  return n;
}

RecurrenceTable table_for(const Potential& p, int N) {
  return compute_recurrence(p, N + p.degree() + 2);
}

std::string tag(const RunConfig& c, int N) {
  return "beta" + std::to_string(c.beta) + "_N" + std::to_string(N);
}

int cmd_recurrence(const RunConfig& c) {
  Run run("recurrence", c);
  const Potential p = potential_of(c);
  const RecurrenceTable t = compute_recurrence(p, c.jmax);
  write_recurrence_csv(t, run.path("recurrence.csv"));
  const double orth = t.orthonormality_residual;
  const double string_eq = string_equation_residual(t, t.capacity());
  std::cout << "rows " << t.capacity() << "\n"
            << "orthonormality residual " << orth << "\n"
            << "string-equation residual " << string_eq << "\n";
  run.extra() = {{"rows", t.capacity()},
                 {"orthonormality_residual", orth},
                 {"string_equation_residual", string_eq},
                 {"tol", c.tol}};
  run.finish();
  if (!(orth <= c.tol) || !(string_eq <= 1e-8)) {
    std::cerr << "residual above tolerance\n";
    return kExitTolerance;
  }
  return 0;
}

int cmd_scaling(const RunConfig& c) {
  Run run("scaling", c);
  const Potential p = potential_of(c);
  std::vector<int> ns = c.ladder.empty() ? std::vector<int>{c.N} : c.ladder;
  CsvWriter csv(run.path("scaling.csv"),
                {"N", "cN", "dN", "alphaN", "lambdaN", "h_min", "mrs_residual"});
  json all = json::array();
  for (int n : ns) {
    const EdgeScaling s = edge_scaling(p, n);
    csv.row(std::vector<double>{static_cast<double>(n), s.cN, s.dN, s.alphaN, s.lambdaN, s.h_min,
                                s.mrs_residual});
    all.push_back(to_json(s));
  }
  write_json(run.path("scaling.json"), all);
  run.finish();
  return 0;
}

std::vector<LimitKernelSample> as_limit_rows(const std::vector<MatrixKernelSample>& k, Beta beta,
                                             const std::vector<double>& grid) {
  std::vector<LimitKernelSample> rows;
  const std::size_t g = grid.size();
  for (std::size_t i = 0; i < g; ++i)
    for (std::size_t j = 0; j < g; ++j) {
      LimitKernelSample r;
      r.beta = beta;
      r.xi = grid[i];
      r.eta = grid[j];
      r.e = k[i * g + j].e;
      rows.push_back(r);
    }
  return rows;
}

int cmd_kernel(const RunConfig& c) {
  Run run("kernel", c);
  const Beta beta = parse_beta(c.beta);
  const Potential p = potential_of(c);
  const auto grid = grid_of(c);
  write_kernel_csv(run.path("kernel_limit_beta" + std::to_string(c.beta) + ".csv"),
                   limit_kernel_grid(beta, grid));
  const RecurrenceTable t = table_for(p, c.N);
  const EdgeScaling s = edge_scaling(p, c.N);
  std::unique_ptr<WidomBlocks> w;
  if (beta != Beta::unitary) w = std::make_unique<WidomBlocks>(build_blocks(t, c.N));
  const auto k = scaled_kernel_grid(w.get(), t, s, beta, grid);
  write_kernel_csv(run.path("kernel_" + tag(c, c.N) + ".csv"), as_limit_rows(k, beta, grid));
  run.finish();
  return 0;
}

int cmd_converge(const RunConfig& c) {
  if (c.ladder.empty()) throw ExitError(kExitUsage, "converge needs --N-ladder");
  Run run("converge", c);
  const Beta beta = parse_beta(c.beta);
  const Potential p = potential_of(c);
  const auto grid = grid_of(c);
  const auto limit = limit_kernel_grid(beta, grid);
  const RecurrenceTable t = table_for(p, max_n(c));
  const std::vector<std::string> names =
      beta == Beta::unitary ? std::vector<std::string>{"K"}
                            : std::vector<std::string>{"11", "12", "21", "22"};
  std::vector<std::vector<double>> errors(names.size());
  CsvWriter csv(run.path("converge_beta" + std::to_string(c.beta) + ".csv"),
                {"N", "beta", "entry", "sup_error"});
  for (int n : c.ladder) {
    const EdgeScaling s = edge_scaling(p, n);
    std::unique_ptr<WidomBlocks> w;
    if (beta != Beta::unitary) w = std::make_unique<WidomBlocks>(build_blocks(t, n));
    const auto sup = sup_kernel_error(scaled_kernel_grid(w.get(), t, s, beta, grid), limit);
    for (std::size_t e = 0; e < names.size(); ++e) {
      errors[e].push_back(sup[e]);
      csv.row(std::vector<std::string>{std::to_string(n), std::to_string(c.beta), names[e],
                                       format_double(sup[e])});
    }
  }
  json summary = {{"beta", c.beta}, {"N_ladder", c.ladder}, {"grid", {c.L0, c.L1, c.step}}};
  std::vector<double> ns(c.ladder.begin(), c.ladder.end());
  for (std::size_t e = 0; e < names.size(); ++e) {
    bool decreasing = true;
    for (std::size_t i = 1; i < errors[e].size(); ++i) decreasing = decreasing && errors[e][i] < errors[e][i - 1];
    json entry = {{"sup_error", errors[e]}, {"strictly_decreasing", decreasing}};
    if (ns.size() >= 2) entry["fitted_exponent"] = loglog_slope(ns, errors[e]);
    summary["entries"][names[e]] = entry;
    std::cout << "entry " << names[e] << ": ";
    for (double v : errors[e]) std::cout << v << ' ';
    if (ns.size() >= 2) std::cout << " slope " << entry["fitted_exponent"].get<double>();
    std::cout << "\n";
  }
  write_json(run.path("converge_summary_beta" + std::to_string(c.beta) + ".json"), summary);
  run.extra() = summary;
  run.finish();
  return 0;
}

int cmd_gap(const RunConfig& c) {
  Run run("gap", c);
  const Beta beta = parse_beta(c.beta);
  const Potential p = potential_of(c);
  const RecurrenceTable t = table_for(p, c.N);
  const EdgeScaling s = edge_scaling(p, c.N);
  std::unique_ptr<WidomBlocks> w;
  if (beta != Beta::unitary) w = std::make_unique<WidomBlocks>(build_blocks(t, c.N));
  FredholmOptions opt;
  opt.order = c.order;
  CsvWriter csv(run.path("gap_" + tag(c, c.N) + ".csv"), {"L0", "finite_N_prob", "tw_prob", "diff"});
  double max_diff = 0.0;
  for (double L0 : grid_of(c)) {
    const double f = gap_finite(t, w.get(), s, beta, L0, opt).value;
    const double l = tw_limit(beta, L0, opt).value;
    csv.row(std::vector<double>{L0, f, l, f - l});
    max_diff = std::max(max_diff, std::abs(f - l));
  }
  std::cout << "max |finite - limit| " << max_diff << "\n";
  run.extra() = {{"max_abs_diff", max_diff}};
  run.finish();
  return 0;
}

int cmd_tw(const RunConfig& c) {
  Run run("tw", c);
  const Beta beta = parse_beta(c.beta);
  const auto rows = tabulate_tw(beta, grid_of(c), c.order);
  write_tabulation_csv(run.path("tw_beta" + std::to_string(c.beta) + ".csv"), rows);
  double worst = 0.0;
  for (const auto& r : rows) worst = std::max(worst, r.est_error);
  std::cout << "max estimated error " << worst << "\n";
  run.extra() = {{"max_est_error", worst}};
  run.finish();
  return 0;
}

int cmd_sample(const RunConfig& c) {
  Run run("sample", c);
  const Beta beta = parse_beta(c.beta);
  const Potential p = potential_of(c);
  // K_{N/2,4} describes N/2 eigenvalues.
  const int points = beta == Beta::symplectic ? c.N / 2 : c.N;
  if (points < 1) throw ExitError(kExitUsage, "too few eigenvalues for beta = 4");
  if (c.count < 1) throw ExitError(kExitUsage, "count must be positive");
  const EigenSample e = sample(p, beta, points, c.count, c.seed);
  write_samples_csv(run.path("samples_" + tag(c, c.N) + ".csv"), e);
  json m = manifest(e);
  const EdgeScaling s = edge_scaling(p, c.N);
  std::vector<double> scaled;
  for (double x : e.largest()) scaled.push_back(edge_map_inverse(s, x));
  std::sort(scaled.begin(), scaled.end());
  m["scaled_largest_median"] = scaled[scaled.size() / 2];
  run.extra() = m;
  std::cout << "acceptance " << e.acceptance_rate << (e.flagged ? " (flagged)" : "") << "\n";
  run.finish();
  return e.flagged ? kExitTolerance : 0;
}

int cmd_report(const RunConfig& c) {
  const fs::path acc = c.acceptance.empty() ? fs::path(c.out) / "acceptance.json" : fs::path(c.acceptance);
  if (!fs::exists(acc)) throw ExitError(kExitMissing, "missing dependency: " + acc.string());
  Run run("report", c);
  const json a = read_json(acc);
  std::ofstream md(run.path("report.md"));
  md << "# Edge universality report\n\n";
  md << "Generated " << timestamp() << " from `" << acc.string() << "`.\n\n";
  md << "## Acceptance criteria\n\n";
  md << "| # | check | tolerance | measured | runtime (s) | result |\n";
  md << "|---|---|---|---|---|---|\n";
  bool all = true;
  for (const auto& r : a.at("criteria")) {
    const bool pass = r.at("pass").get<bool>();
    all = all && pass;
    md << "| " << r.at("id").get<int>() << " | " << r.at("name").get<std::string>() << " | "
       << r.at("tolerance").get<std::string>() << " | " << r.at("measured").get<std::string>() << " | "
       << r.at("runtime_s").get<double>() << " | " << (pass ? "pass" : "FAIL") << " |\n";
  }
  md << "\n";
  std::vector<fs::path> others;
  for (const auto& entry : fs::directory_iterator(c.out)) {
    const std::string name = entry.path().filename().string();
    if (name.ends_with("_manifest.json") && name != "report_manifest.json") others.push_back(entry.path());
  }
  std::sort(others.begin(), others.end());
  if (!others.empty()) {
    md << "## Runs\n\n";
    for (const auto& path : others) {
      const json m = read_json(path);
      md << "- `" << m.at("command").get<std::string>() << "`: outputs";
      for (const auto& o : m.at("outputs")) md << " `" << o.get<std::string>() << "`";
      if (m.contains("results")) md << "; results `" << m["results"].dump() << "`";
      md << "\n";
    }
  }
  md.close();
  std::cout << (all ? "all criteria pass" : "some criteria fail") << "\n";
  run.finish();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Edge statistics of invariant random matrix ensembles"};
  app.set_config("--config", "", "TOML/INI file with any of the flags below");
  app.require_subcommand(1);
  app.allow_config_extras(false);
  RunConfig cfg;
  app.add_option("--potential", cfg.potential, "preset name, coefficient list or JSON file");
  app.add_option("--beta", cfg.beta, "1, 2 or 4");
  app.add_option("--N", cfg.N, "matrix size");
  app.add_option("--N-ladder", cfg.ladder, "sizes for converge/scaling")->delimiter(',');
  app.add_option("--L0", cfg.L0, "grid start (edge-scaled units)");
  app.add_option("--L1", cfg.L1, "grid end");
  app.add_option("--step", cfg.step, "grid step");
  app.add_option("--order", cfg.order, "Nystrom nodes");
  app.add_option("--seed", cfg.seed, "sampler seed");
  app.add_option("--out", cfg.out, "output directory");
  app.add_option("--jmax", cfg.jmax, "recurrence table size");
  app.add_option("--tol", cfg.tol, "orthonormality tolerance");
  app.add_option("--count", cfg.count, "retained Monte Carlo samples");
  app.add_option("--acceptance", cfg.acceptance, "acceptance JSON for report");
  app.add_option("--replay", cfg.replay, "rerun with the config stored in a manifest");

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"recurrence", "recurrence coefficients a_j, b_j"},
      {"scaling", "MRS numbers and edge scaling constants"},
      {"kernel", "limit and scaled finite-N kernels on a grid"},
      {"converge", "sup-grid kernel errors along an N ladder"},
      {"gap", "finite-N gap probabilities against the limit"},
      {"tw", "Tracy-Widom tabulation"},
      {"sample", "Metropolis samples of the eigenvalue density"},
      {"report", "Markdown report from acceptance results"}};
  for (const auto& [name, help] : commands) app.add_subcommand(name, help)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    apply_replay(cfg);
    validate(cfg);
    const std::string cmd = app.get_subcommands().front()->get_name();
    if (cmd == "recurrence") return cmd_recurrence(cfg);
    if (cmd == "scaling") return cmd_scaling(cfg);
    if (cmd == "kernel") return cmd_kernel(cfg);
    if (cmd == "converge") return cmd_converge(cfg);
    if (cmd == "gap") return cmd_gap(cfg);
    if (cmd == "tw") return cmd_tw(cfg);
    if (cmd == "sample") return cmd_sample(cfg);
    return cmd_report(cfg);
  } catch (const ExitError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitTolerance;
  }
}
