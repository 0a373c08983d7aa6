#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include <doctest.h>
#include <json.hpp>

#include "carleman/lift.hpp"
#include "carleman/model.hpp"
#include "carleman/sparse.hpp"

#include "test_util.hpp"

using namespace carleman;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("carleman_cli_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int run(const std::string& args, const fs::path& stdout_file = {}) {
  std::string cmd = std::string(CARLEMAN_BIN) + " " + args;
  if (stdout_file.empty())
    cmd += " >/dev/null 2>/dev/null";
  else
    cmd += " > " + stdout_file.string() + " 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);)
    if (!line.empty()) lines.push_back(line);
  return lines;
}

std::vector<double> parse_csv_row(const std::string& line) {
  std::vector<double> out;
  std::istringstream in(line);
  for (std::string cell; std::getline(in, cell, ',');) out.push_back(std::stod(cell));
  return out;
}

std::string vdp_path() { return std::string(MODELS_DIR) + "/vdp.ode"; }

SparseMatrix parse_matrix_market(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  std::string line;
  REQUIRE(std::getline(in, line));
  REQUIRE(line.rfind("%%MatrixMarket", 0) == 0);
  while (std::getline(in, line) && !line.empty() && line[0] == '%') {
  }
  std::istringstream head(line);
  index_t rows = 0, cols = 0, nnz = 0;
  head >> rows >> cols >> nnz;
  std::vector<Entry> entries;
  for (index_t m = 0; m < nnz; ++m) {
    long r = 0, c = 0;
    double v = 0.0;
    in >> r >> c >> v;
    entries.push_back({static_cast<std::int32_t>(r - 1), static_cast<std::int32_t>(c - 1), v});
  }
  return SparseMatrix(rows, cols, entries);
}

}  // namespace

TEST_CASE("lift writes the assembled matrix and metadata") {
  const fs::path dir = fresh_dir("lift");
  const int rc = run("lift -N 3 --out " + dir.string() + " " + vdp_path());
  CHECK(rc == 0);

  const nlohmann::json meta = nlohmann::json::parse(slurp(dir / "lift_N3.json"));
  CHECK(meta.at("n") == 2);
  CHECK(meta.at("k") == 3);
  CHECK(meta.at("N") == 3);
  CHECK(meta.at("dimension") == 14);
  CHECK(meta.at("block_offsets") == nlohmann::json({0, 2, 6, 14}));

  const SparseMatrix parsed = parse_matrix_market(dir / "A_N3.mtx");
  const CarlemanSystem sys = assemble(testutil::vdp_ode(), {0.0, 0.0}, 3);
  CHECK(parsed == sys.A);
  CHECK(meta.at("nnz") == static_cast<long>(sys.A.nnz()));
}

TEST_CASE("lift output is deterministic") {
  const fs::path d1 = fresh_dir("det1");
  const fs::path d2 = fresh_dir("det2");
  CHECK(run("lift -N 4 --out " + d1.string() + " " + vdp_path()) == 0);
  CHECK(run("lift -N 4 --out " + d2.string() + " " + vdp_path()) == 0);
  CHECK(slurp(d1 / "A_N4.mtx") == slurp(d2 / "A_N4.mtx"));
  CHECK(slurp(d1 / "lift_N4.json") == slurp(d2 / "lift_N4.json"));
}

TEST_CASE("lift alternative formats") {
  const fs::path dir = fresh_dir("liftfmt");
  CHECK(run("lift -N 2 --format csv --out " + dir.string() + " " + vdp_path()) == 0);
  const std::vector<std::string> rows = lines_of(slurp(dir / "A_N2.csv"));
  REQUIRE_FALSE(rows.empty());
  CHECK(rows[0] == "row,col,value");
  const CarlemanSystem sys = assemble(testutil::vdp_ode(), {0.0, 0.0}, 2);
  CHECK(rows.size() == sys.A.nnz() + 1);

  CHECK(run("lift -N 2 --format json --out " + dir.string() + " " + vdp_path()) == 0);
  const nlohmann::json j = nlohmann::json::parse(slurp(dir / "A_N2.json"));
  CHECK(j.at("rows") == 6);
  CHECK(j.at("cols") == 6);
  CHECK(j.at("entries").size() == sys.A.nnz());
}

TEST_CASE("lift accepts JSON model input") {
  const fs::path dir = fresh_dir("liftjson");
  const fs::path model = dir / "model.json";
  std::ofstream(model) << model_to_json(testutil::vdp_input());
  CHECK(run("lift -N 2 --out " + dir.string() + " " + model.string()) == 0);
  CHECK(fs::exists(dir / "A_N2.mtx"));
}

TEST_CASE("reduce reports the quadratic rewrite") {
  const fs::path dir = fresh_dir("reduce");
  CHECK(run("reduce --out " + dir.string() + " " + vdp_path()) == 0);

  const nlohmann::json info = nlohmann::json::parse(slurp(dir / "reduce.json"));
  CHECK(info.at("D") == 6);
  CHECK(info.at("block_dims") == nlohmann::json({2, 4}));
  CHECK(info.at("norm_F1_tilde").get<double>() == doctest::Approx(3.2).epsilon(1e-14));
  CHECK(info.at("norm_F2_tilde").get<double>() == doctest::Approx(1.2).epsilon(1e-14));
  CHECK(info.at("mu_F1_tilde").get<double>() == doctest::Approx(3.2).epsilon(1e-14));

  const ModelInput reloaded = model_from_json(slurp(dir / "reduced_model.json"));
  CHECK(reloaded.n == 6);
  const PolyODE tilde = compile(reloaded);
  CHECK(tilde.k == 2);
}

TEST_CASE("bounds writes envelope tables and horizon data") {
  const fs::path dir = fresh_dir("bounds");
  const int rc = run("bounds -N 2 -N 4 --x0 0,0.5 --out " + dir.string() + " " + vdp_path());
  CHECK(rc == 0);

  const nlohmann::json info = nlohmann::json::parse(slurp(dir / "bounds.json"));
  CHECK(info.at("T_star").get<double>() == doctest::Approx(0.5768208407807284).epsilon(1e-12));
  CHECK(info.at("beta0").get<double>() == doctest::Approx(0.1875).epsilon(1e-14));
  CHECK(info.at("mu").get<double>() == doctest::Approx(3.2).epsilon(1e-14));

  for (const int order : {2, 4}) {
    const std::vector<std::string> rows =
        lines_of(slurp(dir / ("envelope_N" + std::to_string(order) + ".csv")));
    REQUIRE(rows.size() > 10);
    CHECK(rows[0] == "t,bound_E2,bound_E1");
    const std::vector<double> first = parse_csv_row(rows[1]);
    REQUIRE(first.size() == 3);
    CHECK(first[0] == 0.0);
    CHECK(first[1] == 0.0);
    CHECK(first[2] == 0.0);
    // The default window stops short of the horizon, so every value is finite.
    for (std::size_t m = 1; m < rows.size(); ++m) {
      const std::vector<double> row = parse_csv_row(rows[m]);
      CHECK(std::isfinite(row[1]));
    }
  }
}

TEST_CASE("bounds on a linear model needs an explicit horizon") {
  const fs::path dir = fresh_dir("boundslin");
  const fs::path model = dir / "linear.ode";
  std::ofstream(model) << "x1' = -x1\n";
  CHECK(run("bounds -N 2 --x0 0.5 --out " + dir.string() + " " + model.string()) == 2);
  CHECK(run("bounds -N 2 --x0 0.5 --tend 1 --out " + dir.string() + " " + model.string()) == 0);
  const nlohmann::json info = nlohmann::json::parse(slurp(dir / "bounds.json"));
  CHECK(info.at("T_star") == "inf");
}

TEST_CASE("simulate writes trajectories for the model and its truncations") {
  const fs::path dir = fresh_dir("simulate");
  const int rc =
      run("simulate -N 4 --x0 0,0.5 --tend 1 --out " + dir.string() + " " + vdp_path());
  CHECK(rc == 0);

  const std::vector<std::string> rows = lines_of(slurp(dir / "trajectory.csv"));
  REQUIRE(rows.size() == 1002);
  CHECK(rows[0] == "t,comp_1,comp_2");
  const std::vector<double> first = parse_csv_row(rows[1]);
  CHECK(first == std::vector<double>{0.0, 0.0, 0.5});
  const std::vector<double> last = parse_csv_row(rows.back());
  CHECK(last[0] == doctest::Approx(1.0).epsilon(1e-12));

  const std::vector<std::string> lifted = lines_of(slurp(dir / "trajectory_N4.csv"));
  REQUIRE(lifted.size() == 1002);
  CHECK(lifted[0] == "t,comp_1,comp_2");
  // The truncated trajectory shadows the nonlinear one early on.
  const std::vector<double> a = parse_csv_row(rows[100]);
  const std::vector<double> b = parse_csv_row(lifted[100]);
  CHECK(std::abs(a[1] - b[1]) < 1e-4);
  CHECK(std::abs(a[2] - b[2]) < 1e-4);
}

TEST_CASE("compare certifies the measured error and records both envelopes") {
  const fs::path dir = fresh_dir("compare");
  const fs::path log = dir / "stdout.txt";
  const int rc =
      run("compare -N 2 --x0 0,0.5 --out " + dir.string() + " " + vdp_path(), log);
  CHECK(rc == 0);
  CHECK(slurp(log).find("compare: N = 2") != std::string::npos);

  const std::vector<std::string> rows = lines_of(slurp(dir / "compare_N2.csv"));
  REQUIRE(rows.size() > 100);
  CHECK(rows[0] == "t,err,bound_E2,bound_E1");
  const double window = 0.9 * 0.5768208407807284;
  for (std::size_t m = 1; m < rows.size(); ++m) {
    const std::vector<double> row = parse_csv_row(rows[m]);
    REQUIRE(row.size() == 4);
    if (row[0] > window || row[2] < 1e-12) continue;
    CHECK(row[1] <= row[2]);
  }
}

TEST_CASE("compare flags an envelope the measurement violates") {
  // An alpha far below the actual solution bound makes the first envelope
  // unsound on purpose; compare must detect the violation.
  const fs::path dir = fresh_dir("comparebad");
  const int rc = run("compare -N 2 --x0 0,0.5 --alpha 0.01 --out " + dir.string() +
                     " " + vdp_path());
  CHECK(rc == 4);
}

TEST_CASE("verify subcommand runs the oracle suites") {
  const fs::path dir = fresh_dir("verify");
  const fs::path log = dir / "stdout.txt";
  CHECK(run("verify --seed 7", log) == 0);
  const std::string text = slurp(log);
  CHECK(text.find("[ ok ]") != std::string::npos);
  CHECK(text.find("summary:") != std::string::npos);
  CHECK(text.find("[FAIL]") == std::string::npos);
}

TEST_CASE("usage and parse failures exit with code 2") {
  const fs::path dir = fresh_dir("usage");
  const fs::path bad = dir / "bad.ode";
  std::ofstream(bad) << "x1' = x1 +\n";
  const fs::path constant = dir / "constant.ode";
  std::ofstream(constant) << "x1' = x1 + 1\n";

  CHECK(run("lift -N 2 " + bad.string()) == 2);
  CHECK(run("lift -N 2 " + constant.string()) == 2);
  CHECK(run("lift -N 2 " + (dir / "missing.ode").string()) == 2);
  CHECK(run("lift " + vdp_path()) == 2);                      // missing -N
  CHECK(run("lift -N 0 " + vdp_path()) == 2);                 // invalid order
  CHECK(run("bounds -N 2 " + vdp_path()) == 2);               // missing --x0
  CHECK(run("bounds -N 2 --x0 0,0.5 --format mm " + vdp_path()) == 2);
  CHECK(run("lift -N 2 --format bogus " + vdp_path()) == 2);
  CHECK(run("simulate --x0 0.5 " + vdp_path()) == 2);         // wrong x0 arity
  CHECK(run("simulate --x0 a,b " + vdp_path()) == 2);
  CHECK(run("frobnicate " + vdp_path()) == 2);
  CHECK(run("") == 2);                                        // subcommand required
}

TEST_CASE("oversized assemblies exit with code 3") {
  CHECK(run("lift -N 30 " + vdp_path()) == 3);
}

TEST_CASE("help is available") {
  CHECK(run("--help") == 0);
  CHECK(run("lift --help") == 0);
}
