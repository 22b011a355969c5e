// Command-line laboratory for the sparse additive selection procedures:
// boundary and profile computation, Monte Carlo experiments and sweeps,
// with reproducible seeded outputs.

#include <chrono>
#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sparse_select/sparse_select.hpp"

namespace fs = std::filesystem;
using namespace sparse_select;

namespace {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fmt_real(double x) {
  if (std::isnan(x)) return "null";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

// Minimal JSON emitter. Outputs are diff-stable artifacts: fixed key order,
// 17 significant digits, LF endings.
class JsonWriter {
 public:
  void begin() { out_ << "{"; first_ = true; }
  void end() { out_ << "\n}\n"; }
  void field(const std::string& key, const std::string& raw) {
    out_ << (first_ ? "\n" : ",\n") << "  \"" << key << "\": " << raw;
    first_ = false;
  }
  void str(const std::string& key, const std::string& v) { field(key, "\"" + v + "\""); }
  void real(const std::string& key, double v) { field(key, fmt_real(v)); }
  void integer(const std::string& key, long long v) { field(key, std::to_string(v)); }
  void uinteger(const std::string& key, std::uint64_t v) { field(key, std::to_string(v)); }
  void reals(const std::string& key, const std::vector<double>& v) {
    std::ostringstream arr;
    arr << "[";
    for (std::size_t i = 0; i < v.size(); ++i) arr << (i ? ", " : "") << fmt_real(v[i]);
    arr << "]";
    field(key, arr.str());
  }
  std::string take() { return out_.str(); }

 private:
  std::ostringstream out_;
  bool first_ = true;
};

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, v);
  return buf;
}

// Write-then-rename so failures never leave partial output files behind.
void write_file_atomic(const fs::path& path, const std::string& bytes) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary);
    if (!f) throw IoError("cannot open " + tmp.string() + " for writing");
    f << bytes;
    if (!f.good()) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw IoError("cannot rename output to " + path.string() + ": " + ec.message());
  }
}

struct RunContext {
  std::string command;
  std::vector<std::pair<std::string, std::string>> params;
  std::uint64_t master_seed = 0;
  bool seeded = false;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

  void param(const std::string& k, const std::string& v) { params.emplace_back(k, v); }
  void param(const std::string& k, double v) { params.emplace_back(k, fmt_real(v)); }
  void param(const std::string& k, long long v) { params.emplace_back(k, std::to_string(v)); }
};

std::string manifest_json(const RunContext& ctx,
                          const std::vector<std::pair<fs::path, std::string>>& outputs) {
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - ctx.start).count();
  JsonWriter w;
  w.begin();
  w.str("command", ctx.command);
  {
    std::ostringstream p;
    p << "{";
    for (std::size_t i = 0; i < ctx.params.size(); ++i) {
      const auto& [k, v] = ctx.params[i];
      char* end = nullptr;
      std::strtod(v.c_str(), &end);
      const bool numeric = !v.empty() && end == v.c_str() + v.size();
      p << (i ? ", " : "") << "\"" << k << "\": ";
      if (numeric || v == "null") p << v;
      else p << "\"" << v << "\"";
    }
    p << "}";
    w.field("parameters", p.str());
  }
  if (ctx.seeded) w.uinteger("master_seed", ctx.master_seed);
  w.str("version", version_string);
  w.real("duration_seconds", secs);
  {
    std::ostringstream arr;
    arr << "[";
    for (std::size_t i = 0; i < outputs.size(); ++i) {
      arr << (i ? ", " : "") << "{\"path\": \"" << outputs[i].first.string() << "\", \"fnv1a64\": \""
          << hex64(fnv1a64(outputs[i].second)) << "\"}";
    }
    arr << "]";
    w.field("outputs", arr.str());
  }
  w.end();
  return w.take();
}

void emit(const std::string& doc, const std::optional<std::string>& out_path,
          const RunContext& ctx) {
  if (!out_path) {
    std::cout << doc;
    return;
  }
  const fs::path path(*out_path);
  write_file_atomic(path, doc);
  const fs::path mpath(path.string() + ".manifest.json");
  write_file_atomic(mpath, manifest_json(ctx, {{path, doc}}));
}

FunctionSpace parse_space(const std::string& name, double sigma) {
  if (name == "sobolev") return sobolev_space(sigma);
  if (name == "analytic") return analytic_space(sigma);
  throw CLI::ValidationError("--space must be sobolev or analytic");
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
  if (flag) return *flag;
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

SelectorKind parse_selector(const std::string& name) {
  if (name == "almost-full") return SelectorKind::AlmostFull;
  if (name == "exact") return SelectorKind::Exact;
  if (name == "lepski") return SelectorKind::LepskiAdaptive;
  if (name == "adaptive-exact") return SelectorKind::AdaptiveExact;
  throw CLI::ValidationError("--selector must be almost-full, exact, lepski or adaptive-exact");
}

struct CommonExperimentFlags {
  std::string space_name, selector_name = "almost-full", sign_mode = "fixed";
  double sigma = 1.0, eps = 0.0, rho = 1.0;
  int d = 0, s = 0, reps = 100;
  std::optional<std::uint64_t> seed;
  std::optional<double> delta, tau, grid_step;
  double c_low = 0.25, c_high = 0.75;

  void attach(CLI::App* cmd, bool with_selector) {
    cmd->add_option("--space", space_name, "function space: sobolev or analytic")->required();
    cmd->add_option("--sigma", sigma, "smoothness sigma")->required();
    cmd->add_option("--d", d, "number of components")->required();
    cmd->add_option("--s", s, "sparsity (number of active components)")->required();
    cmd->add_option("--eps", eps, "noise intensity")->required();
    cmd->add_option("--rho", rho, "signal radius as multiple of the boundary r*");
    cmd->add_option("--reps", reps, "Monte Carlo replications");
    cmd->add_option("--seed", seed, "master seed (drawn from entropy when omitted)");
    cmd->add_option("--delta", delta, "threshold slack (default: schedule for d)");
    cmd->add_option("--tau", tau, "Lepski tolerance divisor (default: schedule for d)");
    cmd->add_option("--grid-step", grid_step, "grid exponent step (default: schedule for d)");
    cmd->add_option("--grid-c-low", c_low, "lower grid exponent");
    cmd->add_option("--grid-c-high", c_high, "upper grid exponent");
    if (with_selector) {
      cmd->add_option("--selector", selector_name,
                      "almost-full | exact | lepski | adaptive-exact");
      cmd->add_option("--sign-mode", sign_mode, "fixed | rademacher");
    }
  }

  ExperimentSpec to_spec(std::uint64_t seed_value) const {
    const Schedules sch = default_schedules(d);
    SelectorConfig config;
    config.delta = delta.value_or(sch.delta);
    config.tau = tau.value_or(sch.tau);
    config.grid = build_grid(d, c_low, c_high, grid_step.value_or(sch.delta_step));
    ExperimentSpec spec{parse_space(space_name, sigma), d,    s,
                        eps,                            rho,  parse_selector(selector_name),
                        config,                         SignMode::Fixed,
                        reps,                           seed_value};
    if (sign_mode == "rademacher") spec.sign_mode = SignMode::Rademacher;
    else if (sign_mode != "fixed") throw CLI::ValidationError("--sign-mode must be fixed or rademacher");
    return spec;
  }

  void record(RunContext& ctx) const {
    ctx.param("space", space_name);
    ctx.param("sigma", sigma);
    ctx.param("d", static_cast<long long>(d));
    ctx.param("s", static_cast<long long>(s));
    ctx.param("eps", eps);
    ctx.param("rho", rho);
    ctx.param("reps", static_cast<long long>(reps));
    ctx.param("selector", selector_name);
    ctx.param("sign_mode", sign_mode);
  }
};

int cmd_extremal(const std::string& space_name, double sigma, double r, double eps,
                 const std::optional<std::string>& out) {
  RunContext ctx;
  ctx.command = "extremal";
  ctx.param("space", space_name);
  ctx.param("sigma", sigma);
  ctx.param("r", r);
  ctx.param("eps", eps);
  const FunctionSpace space = parse_space(space_name, sigma);
  const ExtremalProfile p = solve_extremal(space, r, eps);
  JsonWriter w;
  w.begin();
  w.integer("K", p.bandwidth);
  w.integer("support", p.support);
  w.real("u_exact", p.u);
  w.real("u_asymptotic", u_asymptotic(space, r, eps));
  w.reals("theta_star", p.theta_star);
  w.reals("omega", p.omega);
  {
    JsonWriter res;
    res.begin();
    res.real("l2_relative", p.l2_sq() / (r * r) - 1.0);
    res.real("ellipsoid_slack", 1.0 - p.ellipsoid_value());
    res.real("omega_sq_minus_half", p.omega_sq_sum() - 0.5);
    std::string inner = res.take() + "\n}";
    // indent the nested object
    std::string indented;
    for (char c : inner) {
      indented += c;
      if (c == '\n') indented += "  ";
    }
    w.field("constraint_residuals", indented);
  }
  w.end();
  emit(w.take(), out, ctx);
  return 0;
}

int cmd_boundary(const std::string& space_name, double sigma, double eps, int d, int s,
                 const std::string& mode, std::optional<double> delta,
                 const std::optional<std::string>& out) {
  RunContext ctx;
  ctx.command = "boundary";
  ctx.param("space", space_name);
  ctx.param("sigma", sigma);
  ctx.param("eps", eps);
  ctx.param("d", static_cast<long long>(d));
  ctx.param("s", static_cast<long long>(s));
  ctx.param("mode", mode);
  const FunctionSpace space = parse_space(space_name, sigma);
  const double dl = delta.value_or(default_schedules(d).delta);
  double target_u, r_star, threshold;
  if (mode == "almost-full") {
    if (s >= d) throw std::domain_error("boundary: need s < d");
    target_u = std::sqrt(2.0 * std::log(static_cast<double>(d) / s));
    r_star = r_star_almost_full(space, eps, d, s);
    threshold = almost_full_threshold(d, s, dl);
  } else if (mode == "exact") {
    target_u = std::sqrt(2.0 * std::log(static_cast<double>(d))) +
               std::sqrt(2.0 * std::log(static_cast<double>(s)));
    r_star = r_star_exact(space, eps, d, s);
    threshold = exact_threshold(d, dl);
  } else {
    throw CLI::ValidationError("--mode must be almost-full or exact");
  }
  JsonWriter w;
  w.begin();
  w.real("target_u", target_u);
  w.real("r_star", r_star);
  w.real("threshold", threshold);
  w.real("delta", dl);
  w.end();
  emit(w.take(), out, ctx);
  return 0;
}

int cmd_simulate(const CommonExperimentFlags& flags, const std::optional<std::string>& out) {
  RunContext ctx;
  ctx.command = "simulate";
  flags.record(ctx);
  ctx.master_seed = resolve_seed(flags.seed);
  ctx.seeded = true;
  const ExperimentSpec spec = flags.to_spec(ctx.master_seed);
  const RiskReport report = mc_risk(spec);
  JsonWriter w;
  w.begin();
  w.str("selector", selector_name(spec.selector));
  w.integer("d", spec.d);
  w.integer("s", spec.s);
  w.real("eps", spec.eps);
  w.real("sigma", spec.space.sigma);
  w.real("rho", spec.rho);
  w.integer("reps", spec.reps);
  w.uinteger("seed", spec.seed);
  w.real("r_star", report.r_star);
  w.real("signal_radius", report.signal_radius);
  w.real("mean_norm_risk", report.mean_normalized_risk);
  w.real("std_err", report.std_error);
  w.end();
  emit(w.take(), out, ctx);
  return 0;
}

int cmd_sweep(const CommonExperimentFlags& flags, const std::string& rhos_csv,
              const std::string& out) {
  RunContext ctx;
  ctx.command = "sweep";
  flags.record(ctx);
  ctx.param("rhos", rhos_csv);
  ctx.param("out", out);
  ctx.master_seed = resolve_seed(flags.seed);
  ctx.seeded = true;

  std::vector<double> rhos;
  std::stringstream ss(rhos_csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (!tok.empty()) rhos.push_back(std::stod(tok));
  }
  if (rhos.empty()) throw CLI::ValidationError("--rhos must list at least one value");

  ExperimentSpec spec = flags.to_spec(ctx.master_seed);
  const auto results = phase_sweep(spec, rhos);

  std::ostringstream csv;
  csv << "rho,selector,d,s,eps,sigma,reps,mean_norm_risk,std_err,seed\n";
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& [rho, report] = results[i];
    csv << fmt_real(rho) << ',' << selector_name(spec.selector) << ',' << spec.d << ','
        << spec.s << ',' << fmt_real(spec.eps) << ',' << fmt_real(spec.space.sigma) << ','
        << spec.reps << ',' << fmt_real(report.mean_normalized_risk) << ','
        << fmt_real(report.std_error) << ',' << derive_stream(spec.seed, i) << "\n";
  }
  const fs::path path(out);
  const std::string bytes = csv.str();
  write_file_atomic(path, bytes);
  write_file_atomic(fs::path(out + ".manifest.json"), manifest_json(ctx, {{path, bytes}}));
  return 0;
}

int cmd_lower_bound(const std::string& space_name, double sigma, int d, int s, double eps,
                    double rho, int reps, const std::optional<std::uint64_t>& seed_flag,
                    const std::optional<std::string>& out) {
  RunContext ctx;
  ctx.command = "lower-bound";
  ctx.param("space", space_name);
  ctx.param("sigma", sigma);
  ctx.param("d", static_cast<long long>(d));
  ctx.param("s", static_cast<long long>(s));
  ctx.param("eps", eps);
  ctx.param("rho", rho);
  ctx.param("reps", static_cast<long long>(reps));
  ctx.master_seed = resolve_seed(seed_flag);
  ctx.seeded = true;
  const FunctionSpace space = parse_space(space_name, sigma);
  const BayesLowerBound lb = bayes_lower_bound(space, d, s, eps, rho, reps, ctx.master_seed);
  JsonWriter w;
  w.begin();
  w.integer("d", d);
  w.integer("s", s);
  w.real("eps", eps);
  w.real("sigma", sigma);
  w.real("rho", rho);
  w.integer("reps", reps);
  w.uinteger("seed", ctx.master_seed);
  w.real("p", static_cast<double>(s) / d);
  w.real("h", lb.h);
  w.real("u", lb.u);
  w.real("a_hat", lb.a_hat);
  w.real("b_hat", lb.b_hat);
  w.real("risk_lb_hat", lb.risk_lb_hat);
  w.end();
  emit(w.take(), out, ctx);
  return 0;
}

int cmd_tails(const std::string& space_name, double sigma, double r, double eps,
              const std::string& t_csv, long long reps,
              const std::optional<std::uint64_t>& seed_flag,
              const std::optional<std::string>& out) {
  RunContext ctx;
  ctx.command = "tails";
  ctx.param("space", space_name);
  ctx.param("sigma", sigma);
  ctx.param("r", r);
  ctx.param("eps", eps);
  ctx.param("thresholds", t_csv);
  ctx.param("reps", reps);
  ctx.master_seed = resolve_seed(seed_flag);
  ctx.seeded = true;

  std::vector<double> ts;
  std::stringstream ss(t_csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (!tok.empty()) ts.push_back(std::stod(tok));
  }
  if (ts.empty()) throw CLI::ValidationError("--thresholds must list at least one value");

  const FunctionSpace space = parse_space(space_name, sigma);
  const ExtremalProfile profile = solve_extremal(space, r, eps);
  const auto rows = tail_check(profile, ts, reps, ctx.master_seed);
  JsonWriter w;
  w.begin();
  w.integer("K", profile.bandwidth);
  w.integer("support", profile.support);
  w.real("u_exact", profile.u);
  w.uinteger("seed", ctx.master_seed);
  w.integer("reps", reps);
  {
    std::ostringstream arr;
    arr << "[";
    for (std::size_t i = 0; i < rows.size(); ++i) {
      arr << (i ? ", " : "") << "{\"T\": " << fmt_real(rows[i].T)
          << ", \"mc_tail\": " << fmt_real(rows[i].mc_tail)
          << ", \"bound\": " << fmt_real(rows[i].bound)
          << ", \"log_ratio\": " << fmt_real(rows[i].log_ratio) << "}";
    }
    arr << "]";
    w.field("rows", arr.str());
  }
  w.end();
  emit(w.take(), out, ctx);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive variable selection laboratory for sparse additive Gaussian models"};
  app.require_subcommand(1);

  // extremal
  auto* ext = app.add_subcommand("extremal", "solve the extreme problem at radius r");
  std::string ext_space;
  double ext_sigma = 1.0, ext_r = 0.0, ext_eps = 0.0;
  std::optional<std::string> ext_out;
  ext->add_option("--space", ext_space)->required();
  ext->add_option("--sigma", ext_sigma)->required();
  ext->add_option("--r", ext_r)->required();
  ext->add_option("--eps", ext_eps)->required();
  ext->add_option("--out", ext_out, "write JSON here instead of stdout");

  // boundary
  auto* bnd = app.add_subcommand("boundary", "detection boundary r* and threshold");
  std::string bnd_space, bnd_mode = "almost-full";
  double bnd_sigma = 1.0, bnd_eps = 0.0;
  int bnd_d = 0, bnd_s = 0;
  std::optional<double> bnd_delta;
  std::optional<std::string> bnd_out;
  bnd->add_option("--space", bnd_space)->required();
  bnd->add_option("--sigma", bnd_sigma)->required();
  bnd->add_option("--eps", bnd_eps)->required();
  bnd->add_option("--d", bnd_d)->required();
  bnd->add_option("--s", bnd_s)->required();
  bnd->add_option("--mode", bnd_mode, "almost-full | exact");
  bnd->add_option("--delta", bnd_delta, "threshold slack (default: schedule for d)");
  bnd->add_option("--out", bnd_out);

  // simulate
  auto* sim = app.add_subcommand("simulate", "single Monte Carlo risk estimate");
  CommonExperimentFlags sim_flags;
  sim_flags.attach(sim, true);
  std::optional<std::string> sim_out;
  sim->add_option("--out", sim_out);

  // sweep
  auto* swp = app.add_subcommand("sweep", "phase-transition sweep over rho; CSV output");
  CommonExperimentFlags swp_flags;
  swp_flags.attach(swp, true);
  std::string swp_rhos, swp_out;
  swp->add_option("--rhos", swp_rhos, "comma-separated rho values")->required();
  swp->add_option("--out", swp_out, "CSV output path")->required();

  // lower-bound
  auto* lb = app.add_subcommand("lower-bound", "Bayes risk lower-bound simulation");
  std::string lb_space;
  double lb_sigma = 1.0, lb_eps = 0.0, lb_rho = 0.5;
  int lb_d = 0, lb_s = 0, lb_reps = 10000;
  std::optional<std::uint64_t> lb_seed;
  std::optional<std::string> lb_out;
  lb->add_option("--space", lb_space)->required();
  lb->add_option("--sigma", lb_sigma)->required();
  lb->add_option("--d", lb_d)->required();
  lb->add_option("--s", lb_s)->required();
  lb->add_option("--eps", lb_eps)->required();
  lb->add_option("--rho", lb_rho);
  lb->add_option("--reps", lb_reps);
  lb->add_option("--seed", lb_seed);
  lb->add_option("--out", lb_out);

  // tails
  auto* tls = app.add_subcommand("tails", "null lower-tail diagnostic vs exp(-T^2/2)");
  std::string tls_space, tls_t = "-1,-2,-3";
  double tls_sigma = 1.0, tls_r = 0.0, tls_eps = 1.0;
  long long tls_reps = 100000;
  std::optional<std::uint64_t> tls_seed;
  std::optional<std::string> tls_out;
  tls->add_option("--space", tls_space)->required();
  tls->add_option("--sigma", tls_sigma)->required();
  tls->add_option("--r", tls_r)->required();
  tls->add_option("--eps", tls_eps);
  tls->add_option("--thresholds", tls_t, "comma-separated T values (T <= 0)");
  tls->add_option("--reps", tls_reps);
  tls->add_option("--seed", tls_seed);
  tls->add_option("--out", tls_out);

  try {
    app.parse(argc, argv);
    if (app.got_subcommand(ext)) return cmd_extremal(ext_space, ext_sigma, ext_r, ext_eps, ext_out);
    if (app.got_subcommand(bnd))
      return cmd_boundary(bnd_space, bnd_sigma, bnd_eps, bnd_d, bnd_s, bnd_mode, bnd_delta, bnd_out);
    if (app.got_subcommand(sim)) return cmd_simulate(sim_flags, sim_out);
    if (app.got_subcommand(swp)) return cmd_sweep(swp_flags, swp_rhos, swp_out);
    if (app.got_subcommand(lb))
      return cmd_lower_bound(lb_space, lb_sigma, lb_d, lb_s, lb_eps, lb_rho, lb_reps, lb_seed, lb_out);
    if (app.got_subcommand(tls))
      return cmd_tails(tls_space, tls_sigma, tls_r, tls_eps, tls_t, tls_reps, tls_seed, tls_out);
    return 1;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 3;
  } catch (const std::domain_error& e) {
    std::cerr << "domain error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid argument: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
