// Command-line front end: simulate, spectrum, scatter, limit-dist, compare, density.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "qwalk/qwalk.hpp"

namespace {

using json = nlohmann::json;
using namespace qwalk;

enum ExitCode { kOk = 0, kParse = 2, kDomain = 3, kGate = 4 };

std::string fmt(double v) { return detail::format_real(v); }

class CsvWriter {
 public:
  explicit CsvWriter(const std::filesystem::path& p) : out_(p) {
    if (!out_) throw ResourceError("cannot write " + p.string());
  }
  template <class... T>
  void row(const T&... cells) {
    bool first = true;
    ((out_ << (first ? "" : ",") << cell(cells), first = false), ...);
    out_ << "\n";
  }

 private:
  static std::string cell(double v) { return fmt(v); }
  static std::string cell(long v) { return std::to_string(v); }
  static std::string cell(const char* s) { return s; }
  static std::string cell(const std::string& s) { return s; }
  std::ofstream out_;
};

void write_json(const std::filesystem::path& p, const json& j) {
  std::ofstream out(p);
  if (!out) throw ResourceError("cannot write " + p.string());
  out << j.dump(2) << "\n";
}

json report_json(const ConvergenceReport& r) {
  json it = json::array();
  for (const auto& [n, inc] : r.iterates) it.push_back({{"n", n}, {"increment", inc}});
  return {{"iterates", it}, {"final_n", r.final_n}, {"converged", r.converged}, {"limit_norm", r.limit_norm}};
}

json complex_json(cplx z) { return json::array({z.real(), z.imag()}); }

struct Context {
  RunConfig cfg;
  std::filesystem::path out;
};

int cmd_simulate(const Context& ctx) {
  const CoinField field = build_field(ctx.cfg);
  Walker w(field, build_state(ctx.cfg));
  w.step(ctx.cfg.n);
  CsvWriter csv(ctx.out / "distribution.csv");
  csv.row("x", "probability");
  double mass = 0.0;
  for (const auto& [x, p] : position_distribution(w.state())) {
    csv.row(x, p);
    mass += p;
  }
  std::cout << json{{"n", ctx.cfg.n}, {"mass", mass}}.dump() << "\n";
  return kOk;
}

int cmd_spectrum(const Context& ctx) {
  const CoinField field = build_field(ctx.cfg);
  json out;
  for (Side s : kSides) {
    const FreeModel m = FreeModel::build(field.asymptotic(s), ctx.cfg.k_grid);
    json arcs = json::array(), thr = json::array(), grid = json::array();
    for (const Arc& a : m.spectrum.arcs) arcs.push_back({{"start", a.start}, {"end", a.end}});
    for (cplx t : m.spectrum.thresholds) thr.push_back(complex_json(t));
    for (std::size_t i = 0; i < m.k.size(); ++i)
      grid.push_back({{"k", m.k[i]},
                      {"lambda", {complex_json(m.eigen[i].lambda[0]), complex_json(m.eigen[i].lambda[1])}},
                      {"velocity", {m.velocities[i][0], m.velocities[i][1]}}});
    out[to_string(s)] = {{"arcs", arcs}, {"thresholds", thr}, {"full_circle", m.spectrum.full_circle}, {"grid", grid}};
  }
  write_json(ctx.out / "spectrum.json", out);
  return kOk;
}

int cmd_scatter(const Context& ctx) {
  const CoinField field = build_field(ctx.cfg);
  const LatticeState psi = build_state(ctx.cfg);
  PurePointOptions o = build_limit_options(ctx.cfg).pure_point;
  const double gate = o.gate;
  o.gate = std::numeric_limits<double>::infinity();
  const PurePointReport r = pure_point_mass(psi, field, o);
  const json j{{"kappa0", r.kappa0},
               {"time_average", r.time_average},
               {"norms", {{"left", r.mass(Side::left)}, {"right", r.mass(Side::right)}}},
               {"convergence", {{"left", report_json(r.reports[0])}, {"right", report_json(r.reports[1])}}}};
  write_json(ctx.out / "scatter.json", j);
  if (std::abs(r.kappa0 - r.time_average) > gate) {
    throw InconsistencyError("pure point mass estimators disagree: norm deficit " + fmt(r.kappa0) +
                             ", time average " + fmt(r.time_average));
  }
  return kOk;
}

void write_density(const LimitDistribution& d, const std::filesystem::path& p) {
  CsvWriter csv(p);
  csv.row("upsilon", "density_left", "density_right");
  for (Side s : kSides) {
    if (!d.density(s)) continue;
    const auto& w = *d.density(s);
    const double a = w.grid.a;
    for (std::size_t i = 0; i < w.values.size(); ++i) {
      const double v = w.grid.upsilon[i];
      const double rho = w.values[i] * 0.5 * konno_density(v, a);
      if (s == Side::left) csv.row(v, rho, 0.0);
      else csv.row(v, 0.0, rho);
    }
  }
}

LimitDistribution compute_limit(const Context& ctx, const CoinField& field, const LatticeState& psi) {
  return limit_distribution(psi, field, build_limit_options(ctx.cfg));
}

int cmd_limit_dist(const Context& ctx) {
  const CoinField field = build_field(ctx.cfg);
  const LatticeState psi = build_state(ctx.cfg);
  const LimitDistribution d = compute_limit(ctx, field, psi);
  char hash[20];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(d.psi_hash));
  write_json(ctx.out / "limit.json",
             {{"kappa0", d.kappa0},
              {"kappa_l", d.kappa_l},
              {"kappa_r", d.kappa_r},
              {"density_mass", {{"left", d.density_mass(Side::left)}, {"right", d.density_mass(Side::right)}}},
              {"total_mass", d.total_mass()},
              {"time_average", d.time_average},
              {"psi_hash", hash},
              {"convergence", {{"left", report_json(d.report_l)}, {"right", report_json(d.report_r)}}}});
  write_density(d, ctx.out / "density.csv");
  return kOk;
}

int cmd_density(const Context& ctx) {
  const CoinField field = build_field(ctx.cfg);
  const LatticeState psi = build_state(ctx.cfg);
  write_density(compute_limit(ctx, field, psi), ctx.out / "density.csv");
  return kOk;
}

int cmd_compare(const Context& ctx) {
  const CoinField field = build_field(ctx.cfg);
  const LatticeState psi = build_state(ctx.cfg);
  const LimitDistribution d = compute_limit(ctx, field, psi);
  ComparisonOptions o;
  o.guard_band = ctx.cfg.guard_band;
  const ComparisonReport r = compare_empirical(psi, field, d, ctx.cfg.n_list, uniform_velocity_grid(), o);
  CsvWriter csv(ctx.out / "compare.csv");
  csv.row("n", "kolmogorov_distance", "mean_n", "mean_limit");
  for (const auto& row : r.rows) csv.row(row.n, row.kolmogorov, row.mean_n, row.mean_limit);
  std::cout << json{{"nonincreasing_tail", r.nonincreasing_tail}, {"guard_band", r.guard_band}}.dump() << "\n";
  return kOk;
}

int report_error(const Error& e, int code) {
  std::cerr << json{{"code", e.code()}, {"message", e.what()}, {"path", e.path()}}.dump() << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Anisotropic quantum walks: scattering and weak limits"};
  app.require_subcommand(1);
  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  app.add_option("--config", config_path, "key = value configuration file")->required();
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--seed", seed, "seed for randomized initial states");

  const std::pair<const char*, int (*)(const Context&)> commands[] = {
      {"simulate", cmd_simulate},     {"spectrum", cmd_spectrum}, {"scatter", cmd_scatter},
      {"limit-dist", cmd_limit_dist}, {"compare", cmd_compare},   {"density", cmd_density}};
  for (const auto& [name, fn] : commands) app.add_subcommand(name);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kParse;
  }

  try {
    Context ctx;
    ctx.cfg = load_config(config_path);
    if (seed) ctx.cfg.seed = *seed;
    validate_config(ctx.cfg);
    ctx.out = out_dir;
    std::filesystem::create_directories(ctx.out);
    for (const auto& [name, fn] : commands)
      if (app.got_subcommand(name)) return fn(ctx);
  } catch (const ParseError& e) {
    return report_error(e, kParse);
  } catch (const ConvergenceError& e) {
    return report_error(e, kGate);
  } catch (const Error& e) {
    return report_error(e, kDomain);
  }
  return kOk;
}
