#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "rmtedge/io.hpp"

using namespace rmtedge;
namespace fs = std::filesystem;

namespace {

const fs::path kTmp = RMTEDGE_TEST_TMP;

// Exit status of the CLI run with args; output goes to a log file.
int run(const std::string& args) {
  fs::create_directories(kTmp);
  const std::string cmd = std::string(RMTEDGE_CLI_PATH) + " " + args + " >>" + (kTmp / "log.txt").string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string dir(const std::string& name) {
  const fs::path d = kTmp / name;
  fs::remove_all(d);
  return d.string();
}

}  // namespace

TEST_CASE("recurrence") {
  const std::string out = dir("rec");
  REQUIRE(run("recurrence --potential hermite --jmax 64 --out " + out) == 0);
  const CsvTable t = read_csv(fs::path(out) / "recurrence.csv");
  CHECK(t.rows.size() == 64);
  for (const auto& r : t.rows) CHECK(std::abs(std::stod(r[t.column("a_j")])) < 1e-12);
  const auto m = read_json(fs::path(out) / "recurrence_manifest.json");
  CHECK(m.at("config").at("potential") == "hermite");
  CHECK(m.at("versions").contains("eigen"));

  const std::string q = dir("rec_quartic");
  REQUIRE(run("recurrence --potential quartic --jmax 48 --out " + q) == 0);
  CHECK(read_json(fs::path(q) / "recurrence_manifest.json").at("results").at("string_equation_residual").get<double>() < 1e-8);
  // an unreachable tolerance is a numerical failure
  CHECK(run("recurrence --potential quartic --jmax 48 --tol 1e-30 --out " + q) == 1);
}

TEST_CASE("usage errors") {
  const std::string out = dir("usage");
  CHECK(run("recurrence --jmax notanumber --out " + out) == 2);
  CHECK(run("gap --beta 1 --N 21 --out " + out) == 2);
  CHECK(run("gap --beta 3 --N 20 --out " + out) == 2);
  CHECK(run("kernel --L0 2 --L1 1 --out " + out) == 2);
  CHECK(run("kernel --step 0 --out " + out) == 2);
  CHECK(run("converge --beta 2 --out " + out) == 2);
  CHECK(run("recurrence --potential cubic --out " + out) == 2);
  CHECK(run("--out " + out) == 2);
  CHECK(run("frobnicate") == 2);
  const fs::path cfg = kTmp / "bad.toml";
  std::ofstream(cfg) << "beta = 2\nunknown_key = 5\n";
  CHECK(run("scaling --config " + cfg.string() + " --out " + out) == 2);
  std::ofstream(cfg) << "beta = \"two\"\n";
  CHECK(run("scaling --config " + cfg.string() + " --out " + out) == 2);
}

TEST_CASE("config file mirrors flags") {
  const std::string out = dir("cfg");
  const fs::path cfg = kTmp / "good.toml";
  std::ofstream(cfg) << "potential = \"quartic\"\nN-ladder = [20, 40]\nout = \"" << out << "\"\n";
  REQUIRE(run("scaling --config " + cfg.string()) == 0);
  const CsvTable t = read_csv(fs::path(out) / "scaling.csv");
  CHECK(t.rows.size() == 2);
  CHECK(std::stod(t.rows[0][t.column("cN")]) == doctest::Approx(std::pow(80.0 / 3.0, 0.25)));
}

TEST_CASE("converge") {
  const std::string out = dir("conv");
  REQUIRE(run("converge --beta 2 --N-ladder 20,40,80 --L0 -3 --L1 4 --step 0.5 --out " + out) == 0);
  const auto s = read_json(fs::path(out) / "converge_summary_beta2.json");
  const double slope = s.at("entries").at("K").at("fitted_exponent");
  CHECK(slope > -0.9);
  CHECK(slope < -0.45);
  CHECK(read_csv(fs::path(out) / "converge_beta2.csv").rows.size() == 3);

  REQUIRE(run("converge --beta 4 --N-ladder 20,40 --L0 -2 --L1 4 --step 1 --out " + out) == 0);
  const auto s4 = read_json(fs::path(out) / "converge_summary_beta4.json");
  for (const char* e : {"11", "12", "21", "22"}) CHECK(s4.at("entries").at(e).at("strictly_decreasing") == true);
}

TEST_CASE("kernel and gap") {
  const std::string out = dir("gap");
  REQUIRE(run("kernel --beta 1 --N 20 --L0 -1 --L1 1 --step 1 --out " + out) == 0);
  CHECK(read_csv(fs::path(out) / "kernel_beta1_N20.csv").rows.size() == 9);
  CHECK(read_csv(fs::path(out) / "kernel_limit_beta1.csv").header.size() == 6);

  double prev = 1.0;
  for (int N : {20, 40}) {
    REQUIRE(run("gap --beta 1 --N " + std::to_string(N) + " --L0 -2 --L1 6 --step 2 --out " + out) == 0);
    const CsvTable t = read_csv(fs::path(out) / ("gap_beta1_N" + std::to_string(N) + ".csv"));
    const auto& last = t.rows.back();
    CHECK(std::stod(last[t.column("finite_N_prob")]) >= 0.999);
    CHECK(std::stod(last[t.column("tw_prob")]) >= 0.999);
    const double d = std::abs(std::stod(t.rows[0][t.column("diff")]));
    CHECK(d < prev);
    prev = d;
  }
}

TEST_CASE("tw tabulation") {
  const std::string out = dir("tw");
  REQUIRE(run("tw --beta 2 --L0 -2 --L1 0 --step 2 --order 40 --out " + out) == 0);
  const CsvTable t = read_csv(fs::path(out) / "tw_beta2.csv");
  REQUIRE(t.rows.size() == 2);
  CHECK(std::stod(t.rows[0][t.column("value")]) == doctest::Approx(0.413224142505).epsilon(1e-9));
  CHECK(std::stod(t.rows[1][t.column("est_error")]) < 1e-8);
}

TEST_CASE("sample determinism and replay") {
  const std::string a = dir("sample_a"), b = dir("sample_b"), c = dir("sample_c");
  REQUIRE(run("sample --beta 4 --N 8 --count 200 --seed 17 --out " + a) == 0);
  REQUIRE(run("sample --beta 4 --N 8 --count 200 --seed 17 --out " + b) == 0);
  const std::string csv = "samples_beta4_N8.csv";
  CHECK(slurp(fs::path(a) / csv) == slurp(fs::path(b) / csv));
  CHECK(read_csv(fs::path(a) / csv).header.size() == 5);  // chain + N/2 coordinates
  REQUIRE(run("sample --replay " + (fs::path(a) / "sample_manifest.json").string() + " --out " + c) == 0);
  CHECK(slurp(fs::path(a) / csv) == slurp(fs::path(c) / csv));
  const auto m = read_json(fs::path(a) / "sample_manifest.json");
  CHECK(m.at("seed") == 17);
  CHECK(m.at("results").contains("acceptance_rate"));
}

TEST_CASE("report") {
  const std::string out = dir("report");
  CHECK(run("report --out " + out) == 3);
  CHECK(run("sample --replay " + (kTmp / "nonexistent.json").string() + " --out " + out) == 3);
  fs::create_directories(out);
  write_json(fs::path(out) / "acceptance.json",
             {{"criteria",
               {{{"id", 1}, {"name", "edge density"}, {"tolerance", "1e-8"}, {"measured", "3e-10"}, {"runtime_s", 0.1}, {"pass", true}},
                {{"id", 2}, {"name", "airy"}, {"tolerance", "1e-10"}, {"measured", "2e-9"}, {"runtime_s", 0.2}, {"pass", false}}}}});
  REQUIRE(run("report --out " + out) == 0);
  const std::string md = slurp(fs::path(out) / "report.md");
  CHECK(md.find("| 1 | edge density | 1e-8 | 3e-10 |") != std::string::npos);
  CHECK(md.find("FAIL") != std::string::npos);
}
