#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <CLI11.hpp>

#include "mavg/bench_forward.hpp"
#include "mavg/engine_bc.hpp"
#include "mavg/engine_gprghq.hpp"
#include "mavg/engine_ls.hpp"
#include "mavg/parallel.hpp"

namespace {

using namespace mavg;

// post-parse configuration problems: exit code 2, like flag errors
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

constexpr int kSchemaVersion = 1;
constexpr const char* kCsvHeader =
    "model,engine,M,N,T,price,ci_radius,runtime_s,P,Q,deg,J,seed,schema_version";

std::string fmt6(double v) {
  char b[64];
  std::snprintf(b, sizeof b, "%.6f", v);
  return b;
}

std::string fmt17(double v) {
  char b[64];
  std::snprintf(b, sizeof b, "%.17g", v);
  return b;
}

// P column: training paths when the engine trains, else the MC path count
std::string paths_cell(const PriceResult& r) {
  if (r.train_paths) return std::to_string(*r.train_paths);
  if (r.n_paths > 0) return std::to_string(r.n_paths);
  return "";
}

std::string csv_row(const PriceResult& r) {
  std::ostringstream o;
  o << r.model << ',' << r.engine << ',' << r.window << ',' << r.steps << ','
    << fmt6(r.maturity) << ',' << fmt6(r.price) << ',' << fmt6(r.ci_radius) << ','
    << fmt6(r.runtime_s) << ',' << paths_cell(r) << ','
    << (r.quad_order ? std::to_string(*r.quad_order) : "") << ','
    << (r.degree ? std::to_string(*r.degree) : "") << ','
    << (r.feature_window ? std::to_string(*r.feature_window) : "") << ','
    << (r.seed ? std::to_string(*r.seed) : "") << ',' << kSchemaVersion;
  return o.str();
}

std::string json_row(const PriceResult& r) {
  std::ostringstream o;
  o << "{\"model\":\"" << r.model << "\",\"engine\":\"" << r.engine
    << "\",\"M\":" << r.window << ",\"N\":" << r.steps
    << ",\"T\":" << fmt17(r.maturity) << ",\"price\":" << fmt17(r.price)
    << ",\"ci_radius\":" << fmt17(r.ci_radius)
    << ",\"runtime_s\":" << fmt17(r.runtime_s);
  if (!paths_cell(r).empty()) o << ",\"P\":" << paths_cell(r);
  if (r.quad_order) o << ",\"Q\":" << *r.quad_order;
  if (r.degree) o << ",\"deg\":" << *r.degree;
  if (r.feature_window) o << ",\"J\":" << *r.feature_window;
  if (r.seed) o << ",\"seed\":" << *r.seed;
  o << ",\"schema_version\":" << kSchemaVersion << '}';
  return o.str();
}

void report_warnings(const PriceResult& r) {
  for (const auto& w : r.warnings)
    std::cerr << "warning: " << r.engine << ": " << w << '\n';
}

// price/bench append rows; table rewrites its file so reruns match exactly
void emit_rows(const std::vector<PriceResult>& rows, const std::string& out,
               const std::string& format, bool append) {
  const bool csv = format == "csv";
  std::ostringstream body;
  if (out.empty()) {
    if (csv) body << kCsvHeader << '\n';
    for (const auto& r : rows) body << (csv ? csv_row(r) : json_row(r)) << '\n';
    std::cout << body.str();
    return;
  }
  const bool fresh = !append || !std::filesystem::exists(out) ||
                     std::filesystem::file_size(out) == 0;
  std::ofstream f(out, append ? std::ios::app : std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open output file: " + out);
  if (csv && fresh) f << kCsvHeader << '\n';
  for (const auto& r : rows) f << (csv ? csv_row(r) : json_row(r)) << '\n';
  if (!f) throw std::runtime_error("write failed: " + out);
}

struct CommonFlags {
  std::string model = "bs";
  int window = 0;
  int steps = 0;
  double maturity = 0.0;
  double s0 = 100.0;  // initial spot; flat forward-curve level under cs
  double rate = 0.05;
  double sigma = 0.0;  // 0 = model default (0.3 bs, 0.5 cs)
  double alpha = 5.0;
  double eta = 1.9;
  double rho = -0.9;
  double xi0 = 0.09;
  double hurst = 0.0;
  bool hurst_set = false;
  long long p = 0;  // 0 = engine default (1000 gprghq, 100000 ls)
  int q = 16;
  int deg = 2;
  int j = 3;
  std::uint64_t seed = 1;
  long long mc_paths = 2'000'000;
  int threads = 0;
  std::string out;
  std::string format = "csv";
};

void add_model_options(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--model", f.model, "bs, cs or rbergomi")
      ->check(CLI::IsMember({"bs", "cs", "rbergomi"}))
      ->capture_default_str();
  cmd->add_option("--M", f.window, "averaging window (dates)")->required();
  cmd->add_option("--N", f.steps, "exercise dates to maturity")->required();
  cmd->add_option("--T", f.maturity, "maturity in years")->required();
  cmd->add_option("--S0", f.s0, "initial spot (flat forward level under cs)")
      ->capture_default_str();
  cmd->add_option("--r", f.rate, "risk-free rate")->capture_default_str();
  cmd->add_option("--sigma", f.sigma, "volatility (default 0.3 bs, 0.5 cs)");
  cmd->add_option("--alpha", f.alpha, "cs mean-reversion speed")
      ->capture_default_str();
  cmd->add_option("--eta", f.eta, "rbergomi vol-of-vol")->capture_default_str();
  cmd->add_option("--rho", f.rho, "rbergomi spot/vol correlation")
      ->capture_default_str();
  auto* h = cmd->add_option("--H", f.hurst,
                            "rbergomi Hurst exponent (required with rbergomi)");
  h->check(CLI::Range(1e-6, 1.0 - 1e-6));
  cmd->parse_complete_callback([&f, h] { f.hurst_set = h->count() > 0; });
  cmd->add_option("--xi0", f.xi0, "rbergomi flat forward variance")
      ->capture_default_str();
  cmd->add_option("--seed", f.seed, "random seed")->capture_default_str();
  cmd->add_option("--threads", f.threads, "worker threads (0 = all cores)")
      ->capture_default_str();
  cmd->add_option("--out", f.out, "result file (default: stdout)");
  cmd->add_option("--format", f.format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  cmd->set_config("--config", "", "flat key = value file; flags mirror keys");
}

ModelParams make_params(const CommonFlags& f) {
  if (f.model == "bs") {
    BlackScholesParams p;
    p.s0 = f.s0;
    p.rate = f.rate;
    p.sigma = f.sigma > 0.0 ? f.sigma : 0.3;
    return p;
  }
  if (f.model == "cs") {
    ClewlowStricklandParams p;
    p.forward = Curve::flat(f.s0);
    p.rate = f.rate;
    p.alpha = f.alpha;
    p.sigma = f.sigma > 0.0 ? f.sigma : 0.5;
    return p;
  }
  if (!f.hurst_set)
    throw UsageError("--H is required with --model rbergomi (no silent default)");
  RoughBergomiParams p;
  p.s0 = f.s0;
  p.rate = f.rate;
  p.eta = f.eta;
  p.rho = f.rho;
  p.hurst = f.hurst;
  p.xi0 = Curve::flat(f.xi0);
  return p;
}

OptionSpec make_option(const CommonFlags& f) {
  OptionSpec opt;
  opt.maturity = f.maturity;
  opt.steps = f.steps;
  opt.window = f.window;
  return opt;
}

GprGhqConfig make_gprghq_config(const CommonFlags& f) {
  GprGhqConfig cfg;
  cfg.n_train = f.p > 0 ? f.p : 1000;
  cfg.quad_order = f.q;
  cfg.rb_memory = f.j;
  cfg.mc_final_paths = f.mc_paths;
  cfg.seed = f.seed;
  return cfg;
}

PriceResult run_engine(const std::string& engine, const CommonFlags& f) {
  const OptionSpec opt = make_option(f);
  const ModelParams params = make_params(f);
  if (engine == "bc") {
    const auto* bs = std::get_if<BlackScholesParams>(&params);
    if (!bs) throw UsageError("engine bc supports --model bs only");
    return price_bc(opt, *bs);
  }
  if (engine == "ls") {
    LsConfig cfg;
    cfg.n_paths = f.p > 0 ? f.p : 100'000;
    cfg.degree = f.deg;
    cfg.rb_memory = f.j;
    cfg.seed = f.seed;
    return price_ls(opt, params, cfg);
  }
  const GprGhqConfig cfg = make_gprghq_config(f);
  if (engine == "gprghq") return price_gprghq(opt, params, cfg);
  // benchmark: fit the surrogate, then evaluate its policy forward
  const ContinuationSurrogate surrogate = solve_gprghq(opt, params, cfg);
  PriceResult res = evaluate_policy(surrogate, f.mc_paths, f.seed, f.j);
  res.train_paths = cfg.n_train;
  res.quad_order = cfg.quad_order;
  return res;
}

int run_price(const std::string& engine, const CommonFlags& f) {
  set_thread_count(f.threads);
  const PriceResult res = run_engine(engine, f);
  report_warnings(res);
  emit_rows({res}, f.out, f.format, /*append=*/true);
  return 0;
}

int run_bench(const CommonFlags& f, double target_ci, bool target_set,
              long long pilot_paths) {
  set_thread_count(f.threads);
  const OptionSpec opt = make_option(f);
  const ModelParams params = make_params(f);
  const GprGhqConfig cfg = make_gprghq_config(f);
  const ContinuationSurrogate surrogate = solve_gprghq(opt, params, cfg);
  PriceResult res = evaluate_policy(
      surrogate, target_set ? pilot_paths : f.mc_paths, f.seed, f.j);
  if (target_set) {
    const long long need = paths_for_ci(target_ci, res);
    if (need > res.n_paths)
      res = evaluate_policy(surrogate, need, f.seed, f.j);
  }
  res.train_paths = cfg.n_train;
  res.quad_order = cfg.quad_order;
  report_warnings(res);
  emit_rows({res}, f.out, f.format, /*append=*/true);
  return 0;
}

struct TablePreset {
  std::string model;
  double maturity = 0.0;
  int steps = 0;
};

TablePreset table_preset(const std::string& id) {
  if (id == "bs_t02") return {"bs", 0.2, 50};
  if (id == "bs_t10") return {"bs", 1.0, 250};
  if (id == "cs_t02") return {"cs", 0.2, 50};
  if (id == "cs_t10") return {"cs", 1.0, 250};
  if (id == "rb_t02") return {"rbergomi", 0.2, 50};
  if (id == "rb_t10") return {"rbergomi", 1.0, 250};
  throw UsageError("unknown table id: " + id +
                   " (expected bs_t02, bs_t10, cs_t02, cs_t10, rb_t02, rb_t10)");
}

int run_table(const std::string& id, const std::string& scale, CommonFlags f) {
  set_thread_count(f.threads);
  const TablePreset preset = table_preset(id);
  const bool desk = scale == "desk";
  f.model = preset.model;
  f.maturity = preset.maturity;
  f.steps = preset.steps;
  if (f.model == "rbergomi" && !f.hurst_set)
    throw UsageError("--H is required for rough-Bergomi tables");

  std::vector<int> windows;
  if (f.model == "bs")
    windows = desk ? std::vector<int>{2, 3, 4, 5, 10, 20}
                   : std::vector<int>{2, 3, 4, 5, 6, 7, 8, 9, 10, 20, 30};
  else if (f.model == "cs")
    windows = desk ? std::vector<int>{2, 10} : std::vector<int>{2, 10, 20, 30};
  else
    windows = desk ? std::vector<int>{2} : std::vector<int>{2, 10, 20, 30};

  std::vector<PriceResult> rows;
  for (const int m : windows) {
    CommonFlags cell = f;
    cell.window = m;
    {
      CommonFlags g = cell;  // GPR-GHQ settings per scale
      if (g.model == "rbergomi") {
        g.p = desk ? 1000 : 8000;
        g.q = desk ? 8 : 16;
        g.j = desk ? 3 : 15;
        g.mc_paths = desk ? 500'000 : 2'000'000;
      } else {
        g.p = desk ? 1000 : 8000;
        g.q = desk ? (g.model == "bs" && m == 2 ? 64 : 16) : 64;
      }
      rows.push_back(run_engine("gprghq", g));
    }
    if (f.model != "rbergomi" || !desk) {
      CommonFlags l = cell;  // Longstaff-Schwartz settings per scale
      l.p = desk ? 100'000 : 1'000'000;
      l.deg = 2;
      if (l.model == "rbergomi") l.j = 15;
      rows.push_back(run_engine("ls", l));
    }
    if (f.model == "bs") rows.push_back(run_engine("bc", cell));
  }
  for (const auto& r : rows) report_warnings(r);

  std::string out = f.out;
  if (out.empty())
    out = id + "_" + scale + (f.format == "csv" ? ".csv" : ".json");
  emit_rows(rows, out, f.format, /*append=*/false);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bermudan moving-average option pricer"};
  app.require_subcommand(1);

  CommonFlags pf;
  std::string engine = "gprghq";
  auto* price = app.add_subcommand("price", "price one contract, append one row");
  price->add_option("--engine", engine, "gprghq, ls, bc or benchmark")
      ->check(CLI::IsMember({"gprghq", "ls", "bc", "benchmark"}))
      ->required();
  add_model_options(price, pf);
  price->add_option("--P", pf.p, "training paths (gprghq) / paths (ls)");
  price->add_option("--Q", pf.q, "quadrature order")->capture_default_str();
  price->add_option("--deg", pf.deg, "ls polynomial degree")->capture_default_str();
  price->add_option("--J", pf.j, "rbergomi conditioning depth")
      ->capture_default_str();
  price->add_option("--mc-paths", pf.mc_paths,
                    "paths for the final/benchmark Monte Carlo stage")
      ->capture_default_str();

  CommonFlags bf;
  double target_ci = 0.0;
  long long pilot_paths = 100'000;
  auto* bench = app.add_subcommand(
      "bench", "fit a gprghq surrogate, evaluate its policy forward");
  add_model_options(bench, bf);
  bench->add_option("--P", bf.p, "gprghq training paths");
  bench->add_option("--Q", bf.q, "quadrature order")->capture_default_str();
  bench->add_option("--J", bf.j, "rbergomi conditioning depth")
      ->capture_default_str();
  bench->add_option("--mc-paths", bf.mc_paths, "forward evaluation paths")
      ->capture_default_str();
  auto* target = bench->add_option(
      "--target-ci", target_ci, "size the run for this CI radius from a pilot");
  target->check(CLI::PositiveNumber);
  bench->add_option("--pilot-paths", pilot_paths, "pilot paths with --target-ci")
      ->capture_default_str();

  CommonFlags tf;
  std::string table_id;
  std::string scale = "desk";
  auto* table = app.add_subcommand("table", "run a table sweep, one row per cell");
  table->add_option("id", table_id,
                    "bs_t02, bs_t10, cs_t02, cs_t10, rb_t02 or rb_t10")
      ->required();
  table->add_option("--scale", scale, "desk or full")
      ->check(CLI::IsMember({"desk", "full"}))
      ->capture_default_str();
  auto* th = table->add_option("--H", tf.hurst, "Hurst exponent (rb tables)");
  th->check(CLI::Range(1e-6, 1.0 - 1e-6));
  table->parse_complete_callback([&tf, th] { tf.hurst_set = th->count() > 0; });
  table->add_option("--seed", tf.seed, "random seed")->capture_default_str();
  table->add_option("--threads", tf.threads, "worker threads (0 = all cores)")
      ->capture_default_str();
  table->add_option("--out", tf.out, "result file (default: <id>_<scale>.<ext>)");
  table->add_option("--format", tf.format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  table->set_config("--config", "", "flat key = value file; flags mirror keys");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (price->parsed()) return run_price(engine, pf);
    if (bench->parsed())
      return run_bench(bf, target_ci, target->count() > 0, pilot_paths);
    return run_table(table_id, scale, tf);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
