#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "carleman/bounds.hpp"
#include "carleman/io.hpp"
#include "carleman/lift.hpp"
#include "carleman/model.hpp"
#include "carleman/sim.hpp"
#include "carleman/sparse.hpp"
#include "carleman/verify.hpp"

namespace {

using namespace carleman;
namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitOther = 1;
constexpr int kExitParse = 2;
constexpr int kExitSize = 3;
constexpr int kExitUnsound = 4;

struct Options {
  std::string input;
  std::vector<int> orders;
  double tend = 0.0;
  bool has_tend = false;
  double step = 1e-3;
  std::string x0_text;
  bool has_x0 = false;
  double alpha = 0.0;
  bool has_alpha = false;
  std::string format;
  std::string out_dir = ".";
  double noise_floor = 1e-12;
  std::uint64_t seed = 20210607;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SyntaxError("cannot open input file '" + path + "'", 0, 0);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ModelInput load_model(const std::string& path) {
  const std::string text = read_file(path);
  for (char ch : text) {
    if (ch == ' ' || ch == '\t' || ch == '\n' || ch == '\r') continue;
    return ch == '{' ? model_from_json(text) : parse_dsl(text);
  }
  throw SyntaxError("input file '" + path + "' is empty", 0, 0);
}

Vector parse_x0(const std::string& text, int n) {
  Vector out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t comma = text.find(',', pos);
    std::string tok = comma == std::string::npos ? text.substr(pos)
                                                 : text.substr(pos, comma - pos);
    const auto first = tok.find_first_not_of(" \t");
    const auto last = tok.find_last_not_of(" \t");
    tok = first == std::string::npos ? std::string() : tok.substr(first, last - first + 1);
    if (tok.empty()) throw SyntaxError("empty component in --x0 list", 0, 0);
    double v = 0.0;
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size())
      throw SyntaxError("malformed --x0 component '" + tok + "'", 0, 0);
    out.push_back(v);
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (static_cast<int>(out.size()) != n)
    throw SyntaxError("--x0 has " + std::to_string(out.size()) +
                          " components, but the model has n = " + std::to_string(n),
                      0, 0);
  return out;
}

nlohmann::json json_num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

nlohmann::json json_num_list(const std::vector<double>& vs) {
  nlohmann::json arr = nlohmann::json::array();
  for (double v : vs) arr.push_back(json_num(v));
  return arr;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw Error("failed while writing '" + path.string() + "'");
}

// Mirror of the integrator grid: multiples of h plus a final partial point.
std::vector<double> time_grid(double tend, double h) {
  if (!(tend >= 0.0)) throw Error("t_end must be nonnegative");
  if (!(h > 0.0)) throw Error("step size must be positive");
  const auto full = static_cast<long long>(std::floor(tend / h + 1e-9));
  const double rem = tend - static_cast<double>(full) * h;
  std::vector<double> ts;
  ts.reserve(static_cast<std::size_t>(full) + 2);
  for (long long i = 0; i <= full; ++i) ts.push_back(static_cast<double>(i) * h);
  if (rem > 1e-9 * h) ts.push_back(tend);
  return ts;
}

void check_format(const Options& o, std::initializer_list<const char*> allowed) {
  for (const char* a : allowed)
    if (o.format == a) return;
  std::string list;
  for (const char* a : allowed) list += std::string(list.empty() ? "" : ", ") + a;
  throw SyntaxError("--format " + o.format + " is not supported here (choose from: " + list + ")",
                    0, 0);
}

void write_matrix(const Options& o, const CarlemanSystem& sys, const std::string& stem) {
  const fs::path dir(o.out_dir);
  if (o.format == "mm") {
    std::ostringstream ss;
    write_matrix_market(ss, sys.A);
    write_text(dir / (stem + ".mtx"), ss.str());
  } else if (o.format == "csv") {
    std::string text = "row,col,value\n";
    for (const Entry& e : sys.A.entries())
      text += std::to_string(e.row) + "," + std::to_string(e.col) + "," + fmt_double(e.value) +
              "\n";
    write_text(dir / (stem + ".csv"), text);
  } else {
    nlohmann::json doc;
    doc["rows"] = sys.A.rows();
    doc["cols"] = sys.A.cols();
    doc["nnz"] = sys.A.nnz();
    nlohmann::json entries = nlohmann::json::array();
    for (const Entry& e : sys.A.entries()) entries.push_back({e.row, e.col, e.value});
    doc["entries"] = std::move(entries);
    write_text(dir / (stem + ".json"), doc.dump(2) + "\n");
  }
}

double default_tend(const Options& o, const BoundParams& p) {
  if (o.has_tend) return o.tend;
  const double Ts = t_star(p);
  if (!std::isfinite(Ts))
    throw SyntaxError(
        "the divergence horizon T* is infinite for this model; pass --tend explicitly", 0, 0);
  return 0.9 * Ts;
}

int cmd_lift(const Options& o) {
  check_format(o, {"mm", "csv", "json"});
  const PolyODE ode = compile(load_model(o.input));
  const Vector x0 = o.has_x0 ? parse_x0(o.x0_text, ode.n)
                             : Vector(static_cast<std::size_t>(ode.n), 0.0);
  fs::create_directories(o.out_dir);
  for (int N : o.orders) {
    const CarlemanSystem sys = assemble(ode, x0, N);
    write_matrix(o, sys, "A_N" + std::to_string(N));
    nlohmann::json meta;
    meta["n"] = ode.n;
    meta["k"] = ode.k;
    meta["N"] = N;
    meta["dimension"] = sys.dimension();
    meta["nnz"] = sys.A.nnz();
    meta["block_offsets"] = sys.block_offsets;
    write_text(fs::path(o.out_dir) / ("lift_N" + std::to_string(N) + ".json"),
               meta.dump(2) + "\n");
    std::cout << "lift: N = " << N << ", dimension = " << sys.dimension()
              << ", nnz = " << sys.A.nnz() << "\n";
  }
  return kExitOk;
}

int cmd_reduce(const Options& o) {
  check_format(o, {"json"});
  const PolyODE ode = compile(load_model(o.input));
  const QuadraticReduction red = reduce_quadratic(ode);
  fs::create_directories(o.out_dir);
  write_text(fs::path(o.out_dir) / "reduced_model.json",
             model_to_json(monomials_from_ode(red.tilde_ode)));
  nlohmann::json doc;
  doc["D"] = red.tilde_ode.n;
  doc["block_dims"] = red.block_dims;
  doc["norm_F1_tilde"] = json_num(red.norm_F1_tilde);
  doc["norm_F2_tilde"] = json_num(red.norm_F2_tilde);
  doc["mu_F1_tilde"] = json_num(log_norm(red.tilde_ode.coeff(1)));
  write_text(fs::path(o.out_dir) / "reduce.json", doc.dump(2) + "\n");
  std::cout << "reduce: D = " << red.tilde_ode.n << ", |F1~| = " << fmt_double(red.norm_F1_tilde)
            << ", |F2~| = " << fmt_double(red.norm_F2_tilde) << "\n";
  return kExitOk;
}

int cmd_bounds(const Options& o) {
  check_format(o, {"csv", "json"});
  const PolyODE ode = compile(load_model(o.input));
  const Vector x0 = parse_x0(o.x0_text, ode.n);
  const QuadraticReduction red = reduce_quadratic(ode);
  BoundParams p = bound_params(red, x0);
  if (o.has_alpha) p.alpha = o.alpha;
  const double tend = default_tend(o, p);
  fs::create_directories(o.out_dir);

  nlohmann::json doc;
  doc["norm_F1_tilde"] = json_num(p.norm_F1);
  doc["norm_F2_tilde"] = json_num(p.norm_F2);
  doc["beta0"] = json_num(p.beta0);
  doc["T_star"] = json_num(t_star(p));
  doc["mu"] = json_num(p.mu_F1);
  write_text(fs::path(o.out_dir) / "bounds.json", doc.dump(2) + "\n");

  const std::vector<double> ts = time_grid(tend, o.step);
  for (int N : o.orders) {
    const BoundEnvelope env2 = sample_envelope(p, BoundKind::E2, N, ts);
    const BoundEnvelope env1 = sample_envelope(p, BoundKind::E1, N, ts);
    const std::string stem = "envelope_N" + std::to_string(N);
    if (o.format == "csv") {
      std::string text = "t,bound_E2,bound_E1\n";
      for (std::size_t i = 0; i < ts.size(); ++i)
        text += fmt_double(ts[i]) + "," + fmt_double(env2.samples[i].second) + "," +
                fmt_double(env1.samples[i].second) + "\n";
      write_text(fs::path(o.out_dir) / (stem + ".csv"), text);
    } else {
      nlohmann::json env;
      env["N"] = N;
      env["T_star_E2"] = json_num(env2.T_star);
      env["T_star_E1"] = json_num(env1.T_star);
      env["t"] = json_num_list(ts);
      std::vector<double> b2, b1;
      for (const auto& s : env2.samples) b2.push_back(s.second);
      for (const auto& s : env1.samples) b1.push_back(s.second);
      env["bound_E2"] = json_num_list(b2);
      env["bound_E1"] = json_num_list(b1);
      write_text(fs::path(o.out_dir) / (stem + ".json"), env.dump(2) + "\n");
    }
    std::cout << "bounds: N = " << N << ", T* = " << fmt_double(env2.T_star)
              << ", samples = " << ts.size() << "\n";
  }
  return kExitOk;
}

int cmd_simulate(const Options& o) {
  check_format(o, {"csv", "json"});
  const PolyODE ode = compile(load_model(o.input));
  const Vector x0 = parse_x0(o.x0_text, ode.n);
  const double tend = o.has_tend ? o.tend : 1.0;
  fs::create_directories(o.out_dir);

  auto write_traj = [&](const std::string& stem, const Trajectory& traj,
                        const std::vector<Vector>& states) {
    if (o.format == "csv") {
      std::ostringstream ss;
      write_trajectory_csv(ss, traj.times, states);
      write_text(fs::path(o.out_dir) / (stem + ".csv"), ss.str());
    } else {
      nlohmann::json doc;
      doc["t"] = json_num_list(traj.times);
      nlohmann::json rows = nlohmann::json::array();
      for (const Vector& s : states) rows.push_back(json_num_list(s));
      doc["states"] = std::move(rows);
      if (traj.blow_up_time) doc["blow_up_time"] = json_num(*traj.blow_up_time);
      write_text(fs::path(o.out_dir) / (stem + ".json"), doc.dump(2) + "\n");
    }
  };

  const Trajectory traj = integrate_nonlinear(ode, x0, tend, o.step);
  write_traj("trajectory", traj, traj.states);
  if (traj.blow_up_time)
    std::cerr << "warning: nonlinear integration stopped at t = " << fmt_double(*traj.blow_up_time)
              << " (state escaped the blow-up threshold)\n";
  std::cout << "simulate: " << traj.times.size() << " points on [0, " << fmt_double(tend) << "]\n";

  for (int N : o.orders) {
    const CarlemanSystem sys = assemble(ode, x0, N);
    const Trajectory lifted = integrate_truncated(sys, tend, o.step);
    std::vector<Vector> blocks;
    blocks.reserve(lifted.states.size());
    for (const Vector& y : lifted.states) blocks.push_back(first_block(sys, y));
    write_traj("trajectory_N" + std::to_string(N), lifted, blocks);
    if (lifted.blow_up_time)
      std::cerr << "warning: order-" << N << " truncated integration stopped at t = "
                << fmt_double(*lifted.blow_up_time) << "\n";
    std::cout << "simulate: order " << N << ", " << lifted.times.size() << " points\n";
  }
  return kExitOk;
}

int cmd_compare(const Options& o) {
  check_format(o, {"csv", "json"});
  const PolyODE ode = compile(load_model(o.input));
  const Vector x0 = parse_x0(o.x0_text, ode.n);
  const QuadraticReduction red = reduce_quadratic(ode);
  BoundParams p = bound_params(red, x0);
  if (o.has_alpha) p.alpha = o.alpha;
  const double tend = default_tend(o, p);
  const double window = 0.9 * t_star(p);
  fs::create_directories(o.out_dir);

  int code = kExitOk;
  for (int N : o.orders) {
    const ErrorSeries es = measured_error(ode, x0, N, tend, o.step);
    const BoundEnvelope env2 = sample_envelope(p, BoundKind::E2, N, es.times);
    const BoundEnvelope env1 = sample_envelope(p, BoundKind::E1, N, es.times);
    std::vector<double> b2, b1;
    b2.reserve(es.times.size());
    b1.reserve(es.times.size());
    for (const auto& s : env2.samples) b2.push_back(s.second);
    for (const auto& s : env1.samples) b1.push_back(s.second);

    const std::string stem = "compare_N" + std::to_string(N);
    if (o.format == "csv") {
      std::ostringstream ss;
      write_error_csv(ss, es.times, es.errors, b2, b1);
      write_text(fs::path(o.out_dir) / (stem + ".csv"), ss.str());
    } else {
      nlohmann::json doc;
      doc["N"] = N;
      doc["t"] = json_num_list(es.times);
      doc["err"] = json_num_list(es.errors);
      doc["bound_E2"] = json_num_list(b2);
      doc["bound_E1"] = json_num_list(b1);
      if (es.blow_up_time) doc["blow_up_time"] = json_num(*es.blow_up_time);
      write_text(fs::path(o.out_dir) / (stem + ".json"), doc.dump(2) + "\n");
    }

    double worst_ratio = 0.0;
    for (std::size_t i = 0; i < es.times.size(); ++i) {
      const double t = es.times[i];
      if (t > window * (1.0 + 1e-12)) break;
      if (b2[i] >= o.noise_floor && es.errors[i] > b2[i]) {
        std::cerr << "soundness violation: measured error " << fmt_double(es.errors[i])
                  << " exceeds envelope E2 = " << fmt_double(b2[i]) << " at t = " << fmt_double(t)
                  << " (N = " << N << ")\n";
        code = kExitUnsound;
      }
      if (b1[i] >= o.noise_floor && es.errors[i] > b1[i]) {
        std::cerr << "soundness violation: measured error " << fmt_double(es.errors[i])
                  << " exceeds envelope E1 = " << fmt_double(b1[i]) << " at t = " << fmt_double(t)
                  << " (N = " << N << ")\n";
        code = kExitUnsound;
      }
      if (b2[i] >= o.noise_floor && std::isfinite(b2[i]) && b2[i] > 0.0)
        worst_ratio = std::max(worst_ratio, es.errors[i] / b2[i]);
    }
    if (es.blow_up_time && *es.blow_up_time <= window) {
      std::cerr << "soundness violation: integration blew up at t = "
                << fmt_double(*es.blow_up_time) << " inside the certified window (N = " << N
                << ")\n";
      code = kExitUnsound;
    }
    std::cout << "compare: N = " << N << ", " << es.times.size()
              << " points, worst err/E2 inside the window = " << fmt_double(worst_ratio) << "\n";
  }
  return code;
}

int cmd_verify(const Options& o) {
  const std::vector<carleman::verify::SuiteResult> suites = carleman::verify::run_all(o.seed);
  int failures = 0;
  for (const auto& s : suites) {
    if (s.failures == 0) {
      std::cout << "[ ok ] " << s.name << ": " << s.checks << " checks\n";
    } else {
      std::cout << "[FAIL] " << s.name << ": " << s.failures << "/" << s.checks
                << " checks failed\n";
      for (const auto& m : s.messages) std::cout << "         - " << m << "\n";
      failures += s.failures;
    }
  }
  std::cout << "summary: " << suites.size() << " suites, " << failures << " failing checks\n";
  return failures == 0 ? kExitOk : kExitOther;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Carleman linearization of polynomial ODEs: lift, certify, simulate"};
  app.require_subcommand(1);
  Options o;

  auto add_input = [&](CLI::App* cmd) {
    cmd->add_option("input", o.input, "model file (expression DSL or JSON)")->required();
  };
  auto add_out = [&](CLI::App* cmd) {
    cmd->add_option("--out", o.out_dir, "output directory (default: current)");
    cmd->add_option("--format", o.format, "output format");
  };
  auto add_orders = [&](CLI::App* cmd, bool required) {
    auto* opt =
        cmd->add_option("-N,--order", o.orders, "truncation order (repeatable)")
            ->check(CLI::PositiveNumber);
    if (required) opt->required();
  };
  auto add_x0 = [&](CLI::App* cmd, bool required) {
    auto* opt = cmd->add_option("--x0", o.x0_text, "initial state as a comma-separated list");
    if (required) opt->required();
  };
  auto add_time = [&](CLI::App* cmd) {
    cmd->add_option("--tend", o.tend, "final time")->check(CLI::NonNegativeNumber);
    cmd->add_option("--step", o.step, "integrator / sampling step (default 1e-3)")
        ->check(CLI::PositiveNumber);
  };

  CLI::App* lift = app.add_subcommand("lift", "assemble the truncated linear system");
  add_input(lift);
  add_orders(lift, true);
  add_x0(lift, false);
  add_out(lift);

  CLI::App* reduce = app.add_subcommand("reduce", "rewrite the model as a quadratic system");
  add_input(reduce);
  add_out(reduce);

  CLI::App* bounds = app.add_subcommand("bounds", "compute truncation-error envelopes");
  add_input(bounds);
  add_orders(bounds, true);
  add_x0(bounds, true);
  add_time(bounds);
  bounds->add_option("--alpha", o.alpha, "explicit a-priori bound on sup ||x(t)||")
      ->check(CLI::NonNegativeNumber);
  add_out(bounds);

  CLI::App* simulate = app.add_subcommand("simulate", "integrate the model (and truncations)");
  add_input(simulate);
  add_orders(simulate, false);
  add_x0(simulate, true);
  add_time(simulate);
  add_out(simulate);

  CLI::App* compare = app.add_subcommand("compare", "measured error vs certified envelopes");
  add_input(compare);
  add_orders(compare, true);
  add_x0(compare, true);
  add_time(compare);
  compare->add_option("--alpha", o.alpha, "explicit a-priori bound on sup ||x(t)||")
      ->check(CLI::NonNegativeNumber);
  compare->add_option("--noise-floor", o.noise_floor,
                      "skip soundness checks where the envelope is below this (default 1e-12)")
      ->check(CLI::NonNegativeNumber);
  add_out(compare);

  CLI::App* verify = app.add_subcommand("verify", "run the built-in oracle self-checks");
  verify->add_option("--seed", o.seed, "random seed for the check suites");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitParse;
  }

  // Several subcommands register options with the same names; presence must
  // be read off the subcommand that actually parsed.
  CLI::App* active = nullptr;
  for (CLI::App* cmd : {lift, reduce, bounds, simulate, compare, verify})
    if (cmd->parsed()) active = cmd;
  auto given = [&](const std::string& name) {
    if (active == nullptr) return false;
    const CLI::Option* opt = active->get_option_no_throw(name);
    return opt != nullptr && opt->count() > 0;
  };
  o.has_tend = given("--tend");
  o.has_x0 = given("--x0");
  o.has_alpha = given("--alpha");
  if (o.format.empty())
    o.format = lift->parsed() ? "mm" : (reduce->parsed() ? "json" : "csv");

  try {
    if (lift->parsed()) return cmd_lift(o);
    if (reduce->parsed()) return cmd_reduce(o);
    if (bounds->parsed()) return cmd_bounds(o);
    if (simulate->parsed()) return cmd_simulate(o);
    if (compare->parsed()) return cmd_compare(o);
    if (verify->parsed()) return cmd_verify(o);
  } catch (const AssemblyLimitExceeded& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSize;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParse;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitOther;
  }
  return kExitOther;
}
