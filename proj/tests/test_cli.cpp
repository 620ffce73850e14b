#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

struct RunResult {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  std::ostringstream o;
  o << f.rdbuf();
  return o.str();
}

fs::path scratch_dir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() /
                 ("mavgopt_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

// Runs the installed binary (path from MAVGOPT_BIN) with the given arguments
// and captures exit code, stdout and stderr.
RunResult run_cli(const std::string& args) {
  const char* bin = std::getenv("MAVGOPT_BIN");
  REQUIRE_MESSAGE(bin != nullptr, "MAVGOPT_BIN must point at the mavgopt binary");
  static int counter = 0;
  const fs::path out = scratch_dir() / ("out" + std::to_string(counter));
  const fs::path err = scratch_dir() / ("err" + std::to_string(counter));
  ++counter;
  const std::string cmd = std::string("\"") + bin + "\" " + args + " > " +
                          out.string() + " 2> " + err.string();
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::vector<std::string> fields(const std::string& row) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : row) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

// runtime_s (column 7) varies run to run; blank it for comparisons
std::string blank_runtime(const std::string& row) {
  auto f = fields(row);
  if (f.size() > 7) f[7] = "";
  std::string out;
  for (std::size_t i = 0; i < f.size(); ++i) out += (i ? "," : "") + f[i];
  return out;
}

constexpr const char* kHeader =
    "model,engine,M,N,T,price,ci_radius,runtime_s,P,Q,deg,J,seed,schema_version";

}  // namespace

TEST_CASE("chain price prints one schema row on stdout") {
  const RunResult r = run_cli("price --engine bc --model bs --M 2 --N 50 --T 0.2");
  REQUIRE(r.code == 0);
  const auto ls = lines(r.out);
  REQUIRE(ls.size() == 2);
  CHECK(ls[0] == kHeader);
  const auto f = fields(ls[1]);
  REQUIRE(f.size() == 14);
  CHECK(f[0] == "bs");
  CHECK(f[1] == "bc");
  CHECK(f[2] == "2");
  CHECK(f[3] == "50");
  CHECK(f[4] == "0.200000");
  CHECK(f[5] == "0.939740");
  CHECK(f[6] == "0.000000");  // deterministic: no confidence interval
  CHECK(f[8].empty());        // no path counts or engine knobs apply
  CHECK(f[9].empty());
  CHECK(f[10].empty());
  CHECK(f[11].empty());
  CHECK(f[12].empty());
  CHECK(f[13] == "1");
}

TEST_CASE("repeated runs differ only in runtime") {
  const std::string args =
      "price --engine gprghq --model bs --M 2 --N 6 --T 0.3 --Q 16 "
      "--mc-paths 200000 --seed 3";
  const RunResult a = run_cli(args);
  const RunResult b = run_cli(args);
  REQUIRE(a.code == 0);
  REQUIRE(b.code == 0);
  const auto la = lines(a.out);
  const auto lb = lines(b.out);
  REQUIRE(la.size() == 2);
  REQUIRE(lb.size() == 2);
  CHECK(blank_runtime(la[1]) == blank_runtime(lb[1]));
  // explicit thread counts must not move the numbers either
  const RunResult t1 = run_cli(args + " --threads 1");
  const RunResult t4 = run_cli(args + " --threads 4");
  REQUIRE(t1.code == 0);
  REQUIRE(t4.code == 0);
  CHECK(blank_runtime(lines(t1.out)[1]) == blank_runtime(lines(t4.out)[1]));
  CHECK(blank_runtime(lines(t1.out)[1]) == blank_runtime(la[1]));
}

TEST_CASE("price appends rows to an existing file, header once") {
  const fs::path out = scratch_dir() / "append.csv";
  fs::remove(out);
  const std::string args =
      "price --engine bc --model bs --M 3 --N 12 --T 0.2 --out " + out.string();
  REQUIRE(run_cli(args).code == 0);
  REQUIRE(run_cli(args).code == 0);
  const auto ls = lines(slurp(out));
  REQUIRE(ls.size() == 3);
  CHECK(ls[0] == kHeader);
  CHECK(blank_runtime(ls[1]) == blank_runtime(ls[2]));
}

TEST_CASE("missing required flags exit 2 and write nothing") {
  const fs::path out = scratch_dir() / "missing.csv";
  fs::remove(out);
  const RunResult r = run_cli("price --engine bc --model bs --M 2 --N 50 --out " +
                              out.string());
  CHECK(r.code == 2);
  CHECK(!fs::exists(out));
  CHECK(r.out.empty());
}

TEST_CASE("usage problems exit 2") {
  SUBCASE("rough bergomi requires an explicit hurst exponent") {
    const RunResult r = run_cli(
        "price --engine gprghq --model rbergomi --M 2 --N 3 --T 0.1 --P 8 --Q 4 "
        "--mc-paths 1000");
    CHECK(r.code == 2);
    CHECK(r.err.find("--H") != std::string::npos);
  }
  SUBCASE("the chain engine is black-scholes only") {
    CHECK(run_cli("price --engine bc --model cs --M 2 --N 8 --T 0.2").code == 2);
  }
  SUBCASE("unknown table id") {
    const RunResult r = run_cli("table nope");
    CHECK(r.code == 2);
    CHECK(r.err.find("unknown table id") != std::string::npos);
  }
  SUBCASE("rough bergomi table without hurst") {
    CHECK(run_cli("table rb_t02").code == 2);
  }
  SUBCASE("invalid format value") {
    CHECK(run_cli("price --engine bc --model bs --M 2 --N 8 --T 0.2 --format xml")
              .code == 2);
  }
  SUBCASE("invalid engine value") {
    CHECK(run_cli("price --engine crank --model bs --M 2 --N 8 --T 0.2").code == 2);
  }
}

TEST_CASE("numerical failures exit 3") {
  // sigma so small that the chain's up probability leaves (0, 1)
  const RunResult r =
      run_cli("price --engine bc --model bs --M 2 --N 50 --T 0.2 --sigma 0.001");
  CHECK(r.code == 3);
  CHECK(r.err.find("error:") != std::string::npos);
  CHECK(r.out.empty());
}

TEST_CASE("json output carries full precision, no header") {
  const RunResult r =
      run_cli("price --engine bc --model bs --M 2 --N 50 --T 0.2 --format json");
  REQUIRE(r.code == 0);
  const auto ls = lines(r.out);
  REQUIRE(ls.size() == 1);
  CHECK(ls[0].front() == '{');
  CHECK(ls[0].find("\"engine\":\"bc\"") != std::string::npos);
  CHECK(ls[0].find("\"price\":0.9397") != std::string::npos);
  CHECK(ls[0].find("\"schema_version\":1") != std::string::npos);
  // more digits than the csv's fixed six
  const std::size_t p = ls[0].find("\"price\":") + 8;
  const std::string num = ls[0].substr(p, ls[0].find(',', p) - p);
  CHECK(num.size() >= 10);
}

TEST_CASE("flags can come from a config file") {
  const fs::path cfg = scratch_dir() / "price.cfg";
  std::ofstream(cfg) << "model = bs\nM = 2\nN = 50\nT = 0.2\n";
  const RunResult file_run =
      run_cli("price --engine bc --config " + cfg.string());
  const RunResult flag_run = run_cli("price --engine bc --model bs --M 2 --N 50 --T 0.2");
  REQUIRE(file_run.code == 0);
  REQUIRE(flag_run.code == 0);
  CHECK(blank_runtime(lines(file_run.out)[1]) ==
        blank_runtime(lines(flag_run.out)[1]));
}

TEST_CASE("bench subcommand reports the forward policy value") {
  const RunResult r = run_cli(
      "bench --model bs --M 2 --N 4 --T 0.2 --P 8 --Q 8 --mc-paths 50000 --seed 2");
  REQUIRE(r.code == 0);
  const auto ls = lines(r.out);
  REQUIRE(ls.size() == 2);
  const auto f = fields(ls[1]);
  CHECK(f[1] == "benchmark");
  CHECK(f[9] == "8");  // quadrature order recorded for the backward fit

  SUBCASE("a target confidence interval sizes the path budget") {
    const RunResult t = run_cli(
        "bench --model bs --M 2 --N 4 --T 0.2 --P 8 --Q 8 --target-ci 0.02 "
        "--pilot-paths 4000 --seed 2");
    REQUIRE(t.code == 0);
    const auto tf = fields(lines(t.out)[1]);
    CHECK(tf[1] == "benchmark");
    // ci of the final row must respect the requested target, within noise
    CHECK(std::stod(tf[6]) < 0.025);
  }
}
