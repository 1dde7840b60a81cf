#include "hmlab/runner.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <thread>

#include "hmlab/boundary_io.hpp"
#include "hmlab/error.hpp"
#include "hmlab/field_io.hpp"
#include "hmlab/report_io.hpp"
#include "hmlab/whitney.hpp"
#include "json_util.hpp"

namespace hmlab {

const char* version() { return "0.1.0"; }

namespace {

namespace fs = std::filesystem;
using detail::ordered_json;
using detail::to_json;

struct Context {
  const Scenario& scenario;
  fs::path out;
  int jobs = 1;
};

class Writer {
 public:
  Writer(const Context& ctx, TaskOutcome& outcome) : ctx_(ctx), outcome_(outcome) {}

  std::ofstream open(const std::string& rel, bool binary = false) {
    const fs::path p = ctx_.out / rel;
    std::ofstream os(p, binary ? std::ios::binary : std::ios::out);
    if (!os) throw Error(ErrorCode::IoError, "cannot write " + p.string());
    os << std::setprecision(17);
    outcome_.outputs.push_back(rel);
    return os;
  }

  void field(const std::string& rel, const Field& f) {
    write_field((ctx_.out / rel).string(), f);
    outcome_.outputs.push_back(rel);
  }

  void json(const std::string& rel, const ordered_json& j) { open(rel) << j.dump(2) << '\n'; }

 private:
  const Context& ctx_;
  TaskOutcome& outcome_;
};

GridSpec grid_at(const Task& t, double h) {
  GridSpec g = t.ladder.grid;
  g.h = h;
  return g;
}

ordered_json stats_json(const SolveStats& s) {
  ordered_json j;
  j["unknowns"] = s.unknowns;
  j["iterations"] = s.iterations;
  j["residual"] = s.residual;
  return j;
}

void run_solve(const Context& ctx, const Task& t, const SolveTask& p, TaskOutcome& out) {
  const BoundarySet& gamma = *ctx.scenario.gamma;
  Writer w(ctx, out);
  const Grid grid(gamma, grid_at(t, t.h));
  const LinearSystem sys = assemble(grid, t.ladder.coeffs);
  const std::vector<double> g = p.data.sample(gamma, t.seed);
  const DirichletResult res = dirichlet_solve(sys, g, t.ladder.outer, t.ladder.solve);
  w.field("fields/" + t.name + ".field", res.field);

  const int axis = p.slice_axis < 0 ? grid.dim() - 1 : p.slice_axis;
  const Box& box = grid.info().box;
  const double at = p.slice_at.value_or(box.lo[axis] + std::round(0.5 * (box.hi[axis] - box.lo[axis]) / grid.h()) * grid.h());
  {
    auto os = w.open("csv/" + t.name + "_slice.csv");
    write_field_slice_csv(os, res.field, axis, at);
  }
  double fmin = kInf, fmax = -kInf;
  for (double v : res.field.values) {
    fmin = std::min(fmin, v);
    fmax = std::max(fmax, v);
  }
  ordered_json j = stats_json(res.stats);
  j["nnz"] = sys.nnz();
  j["nodes"] = grid.size();
  j["collar_nodes"] = grid.collar_count();
  j["outer_nodes"] = grid.outer_count();
  j["outer_fallbacks"] = res.outer_fallbacks;
  j["min_pinned"] = res.min_pinned;
  j["max_pinned"] = res.max_pinned;
  j["field_min"] = fmin;
  j["field_max"] = fmax;
  j["max_principle_violation"] = max_principle_violation(res.field, grid);
  w.json("reports/" + t.name + "_stats.json", j);
}

void run_green(const Context& ctx, const Task& t, const GreenTask& p, TaskOutcome& out) {
  const BoundarySet& gamma = *ctx.scenario.gamma;
  Writer w(ctx, out);
  const Grid grid(gamma, grid_at(t, t.h));
  const LinearSystem sys = assemble(grid, t.ladder.coeffs);
  ordered_json poles = ordered_json::array();
  auto csv = w.open("csv/" + t.name + "_probes.csv");
  csv << "pole";
  for (int a = 0; a < grid.dim(); ++a) csv << ",x" << (a + 1);
  csv << ",g\n";
  for (std::size_t k = 0; k < p.poles.size(); ++k) {
    const GreenSample gs = green(sys, p.poles[k], t.ladder.solve);
    w.field("fields/" + t.name + "_pole" + std::to_string(k) + ".field", gs.field);
    ordered_json j;
    j["y"] = to_json(gs.pole.y);
    j["rho"] = gs.pole.rho;
    j["rho_raised"] = gs.rho_raised;
    j["warning"] = gs.warning;
    j["ball_nodes"] = gs.ball_nodes;
    j["solve"] = stats_json(gs.stats);
    poles.push_back(j);
    for (const Point& x : p.probes) {
      csv << k;
      for (int a = 0; a < grid.dim(); ++a) csv << ',' << x[a];
      csv << ',' << interpolate(gs.field, x) << '\n';
    }
  }
  ordered_json j;
  j["h"] = t.h;
  j["poles"] = poles;
  w.json("reports/" + t.name + "_green.json", j);
}

void run_hm(const Context& ctx, const Task& t, const HmTask& p, TaskOutcome& out) {
  const BoundarySet& gamma = *ctx.scenario.gamma;
  Writer w(ctx, out);
  const Grid grid(gamma, grid_at(t, t.h));
  const LinearSystem sys = assemble(grid, t.ladder.coeffs);
  const Partition part = p.partition.build(gamma);
  const HarmonicMeasureRow row = harmonic_measure(sys, part, p.mollification, t.ladder.outer, t.ladder.solve);
  auto csv = w.open("csv/" + t.name + "_rows.csv");
  csv << "node";
  for (int a = 0; a < grid.dim(); ++a) csv << ",x" << (a + 1);
  for (const auto& name : part.names) csv << ',' << csv_cell(name);
  csv << ",leakage\n";
  for (const Point& x : p.probes) {
    const std::size_t idx = grid.nearest_node(x);
    const Point node = grid.node(idx);
    csv << idx;
    for (int a = 0; a < grid.dim(); ++a) csv << ',' << node[a];
    double sum = 0.0;
    for (const Field& f : row.fields) {
      csv << ',' << f[idx];
      sum += f[idx];
    }
    csv << ',' << 1.0 - sum << '\n';
  }
  ordered_json j;
  j["h"] = t.h;
  j["mollification"] = row.mollification;
  j["groups"] = part.names;
  ordered_json solves = ordered_json::array();
  for (const SolveStats& s : row.stats) solves.push_back(stats_json(s));
  j["solves"] = solves;
  w.json("reports/" + t.name + "_hm.json", j);
}

void run_mc(const Context& ctx, const Task& t, const McTask& p, TaskOutcome& out) {
  const BoundarySet& gamma = *ctx.scenario.gamma;
  Writer w(ctx, out);
  SdeConfig cfg = p.sde;
  cfg.seed = t.seed;
  const Partition part = p.partition.build(gamma);
  const PathStats stats = run_paths(gamma, p.x0, p.paths, cfg, part, ctx.jobs);
  {
    auto os = w.open("reports/" + t.name + "_paths.json");
    write_json(os, stats);
  }
  if (p.trajectories > 0) {
    auto os = w.open("csv/" + t.name + "_trajectories.csv");
    write_trajectories_csv(os, sample_trajectories(gamma, p.x0, p.trajectories, cfg));
  }
  if (p.compare) {
    const Grid grid(gamma, grid_at(t, t.h));
    const LinearSystem sys = assemble(grid, t.ladder.coeffs);
    const HarmonicMeasureRow row = harmonic_measure(sys, part, -1.0, t.ladder.outer, t.ladder.solve);
    const McComparison c = compare(stats, row, p.x0);
    ordered_json j;
    j["groups"] = c.group_names;
    j["mc"] = c.mc;
    j["pde"] = c.pde;
    j["z_score"] = c.z_score;
    j["mc_rest"] = c.mc_rest;
    j["pde_rest"] = c.pde_rest;
    j["total_variation"] = c.total_variation;
    j["statistical_error"] = c.statistical_error;
    j["threshold"] = c.threshold;
    j["pass"] = c.pass;
    w.json("reports/" + t.name + "_comparison.json", j);
  }
}

void run_whitney(const Context& ctx, const Task& t, const WhitneyTask& p, TaskOutcome& out) {
  const BoundarySet& gamma = *ctx.scenario.gamma;
  Writer w(ctx, out);
  const Box& box = t.ladder.grid.box;
  // The solver's level window reaches far below h; a dump only needs cubes down to about h/2.
  auto [lmin, lmax] = default_levels(box, t.h);
  lmax = static_cast<int>(std::ceil(std::log2(1.0 / t.h))) + 1;
  if (p.level_min >= 0) std::tie(lmin, lmax) = std::make_pair(p.level_min, p.level_max);
  const WhitneyDecomposition wd = decompose(gamma, box, lmin, lmax);
  {
    auto os = w.open("csv/" + t.name + "_cubes.csv");
    wd.write_csv(os);
  }
  std::size_t truncated = 0;
  for (const WhitneyCube& q : wd.cubes()) truncated += q.collar_truncated ? 1 : 0;
  ordered_json j;
  j["level_min"] = lmin;
  j["level_max"] = lmax;
  j["cubes"] = wd.cubes().size();
  j["collar_truncated"] = truncated;
  j["collar_volume"] = wd.collar_volume();
  w.json("reports/" + t.name + "_whitney.json", j);
}

bool run_geom(const Context& ctx, const Task& t, const GeomTask& p, TaskOutcome& out) {
  const BoundarySet& gamma = *ctx.scenario.gamma;
  Writer w(ctx, out);
  const double budget = p.budget_c0 > 0.0 ? p.budget_c0 : 4.0 * gamma.ahlfors_constant();
  const AhlforsReport a = ahlfors_check(gamma, p.centers, p.radii, budget);
  bool pass = a.pass;
  ordered_json j;
  ordered_json aj;
  aj["exponent"] = a.exponent;
  aj["radii"] = a.radii;
  aj["ratios"] = a.ratios;
  aj["c_lower"] = a.c_lower;
  aj["c_upper"] = a.c_upper;
  aj["budget_c0"] = a.budget_c0;
  aj["drift_slope"] = a.drift_slope;
  aj["monotone_drift"] = a.monotone_drift;
  aj["pass"] = a.pass;
  j["ahlfors"] = aj;
  ordered_json cs = ordered_json::array();
  for (const Point& x : p.corkscrew_bases) {
    ordered_json c;
    c["base"] = to_json(x);
    c["radius"] = p.corkscrew_radius;
    try {
      const Corkscrew k = corkscrew(gamma, x, p.corkscrew_radius);
      c["point"] = to_json(k.point);
      c["clearance"] = k.clearance;
      c["epsilon"] = k.epsilon;
    } catch (const Error& e) {
      c["error"] = e.what();
      pass = false;
    }
    cs.push_back(c);
  }
  j["corkscrews"] = cs;
  if (p.chain) {
    ordered_json c;
    try {
      const HarnackChain hc = harnack_chain(gamma, p.chain->first, p.chain->second, p.chain_radius, p.chain_lambda);
      ordered_json balls = ordered_json::array();
      for (const ChainBall& b : hc.balls) balls.push_back(ordered_json{{"center", to_json(b.center)}, {"radius", b.radius}});
      c["balls"] = balls;
      c["tube_clearance"] = hc.tube_clearance;
      c["ball_clearance"] = hc.ball_clearance;
      c["epsilon_lambda"] = hc.epsilon_lambda;
      c["n_lambda"] = hc.n_lambda;
      c["observed_c"] = hc.observed_c;
    } catch (const Error& e) {
      c["error"] = e.what();
      pass = false;
    }
    j["chain"] = c;
  }
  j["pass"] = pass;
  w.json("reports/" + t.name + "_geometry.json", j);
  return pass;
}

EstimateReport check_representation(const BoundarySet& gamma, const Task& t, const RepresentationTask& p) {
  const Grid grid(gamma, grid_at(t, t.h));
  const LinearSystem sys = assemble(grid, t.ladder.coeffs);
  const RepresentationReport rr =
      green_representation_check(sys, smooth_bump(p.bump_center, p.bump_radius), p.probes, t.ladder.solve);
  EstimateReport rep;
  rep.id = "green_representation";
  rep.scenario = gamma.descriptor();
  rep.h = {t.h};
  Quantity q;
  q.name = "max_rel_error";
  q.values = {rr.max_rel_error};
  q.lower = 0.0;
  q.upper = p.tol;
  q.check_trend = false;
  rep.add(q);
  Table tab;
  tab.name = "probes";
  for (int a = 0; a < grid.dim(); ++a) tab.columns.push_back("x" + std::to_string(a + 1));
  tab.columns.insert(tab.columns.end(), {"direct", "represented", "rel_error"});
  for (std::size_t k = 0; k < rr.probes.size(); ++k) {
    std::vector<double> row;
    for (int a = 0; a < grid.dim(); ++a) row.push_back(rr.probes[k][a]);
    row.insert(row.end(), {rr.direct[k], rr.represented[k], rr.rel_error[k]});
    tab.rows.push_back(row);
  }
  rep.tables.push_back(tab);
  rep.evaluate();
  return rep;
}

template <class C>
C with_ladder(const Task& t, C c) {
  c.ladder = t.ladder;
  return c;
}

EstimateReport run_check(const Context& ctx, const Task& t) {
  const BoundarySet& gamma = *ctx.scenario.gamma;
  switch (t.kind) {
    case TaskKind::VerifyMeasure: return check_measure_and_a2(gamma, std::get<MeasureSweep>(t.params));
    case TaskKind::VerifyPoincare: {
      PoincareConfig c = with_ladder(t, std::get<PoincareConfig>(t.params));
      c.seed = t.seed;
      return check_poincare(gamma, c);
    }
    case TaskKind::VerifyTrace: {
      TraceConfig c = std::get<TraceConfig>(t.params);
      c.box = t.ladder.grid.box;
      c.h = t.ladder.h;
      c.seed = t.seed;
      return check_trace_extension(gamma, c);
    }
    case TaskKind::VerifyInterior:
      return check_interior_regularity(gamma, with_ladder(t, std::get<InteriorConfig>(t.params)));
    case TaskKind::VerifyBoundary:
      return check_boundary_regularity(gamma, with_ladder(t, std::get<BoundaryRegularityConfig>(t.params)));
    case TaskKind::VerifyGreen: {
      GreenCheckConfig c = std::get<GreenCheckConfig>(t.params);
      c.near = t.ladder;
      return check_green(gamma, c);
    }
    case TaskKind::VerifyHarmonicMeasure:
      return check_harmonic_measure(gamma, with_ladder(t, std::get<HarmonicMeasureCheckConfig>(t.params)));
    case TaskKind::VerifyComparison:
      return check_comparison(gamma, with_ladder(t, std::get<ComparisonConfig>(t.params)));
    case TaskKind::VerifyRepresentation:
      return check_representation(gamma, t, std::get<RepresentationTask>(t.params));
    default: break;
  }
  throw Error(ErrorCode::InvalidArgument, "not a verify task");
}

void run_task(const Context& ctx, const Task& t, TaskOutcome& out) {
  out.status = "ok";
  switch (t.kind) {
    case TaskKind::Solve: return run_solve(ctx, t, std::get<SolveTask>(t.params), out);
    case TaskKind::Green: return run_green(ctx, t, std::get<GreenTask>(t.params), out);
    case TaskKind::HarmonicMeasure: return run_hm(ctx, t, std::get<HmTask>(t.params), out);
    case TaskKind::MonteCarlo: return run_mc(ctx, t, std::get<McTask>(t.params), out);
    case TaskKind::Whitney: return run_whitney(ctx, t, std::get<WhitneyTask>(t.params), out);
    case TaskKind::GeomCheck:
      if (!run_geom(ctx, t, std::get<GeomTask>(t.params), out)) out.status = "check_failed";
      return;
    default: break;
  }
  EstimateReport rep = run_check(ctx, t);
  rep.scenario = ctx.scenario.name + ": " + rep.scenario;
  Writer w(ctx, out);
  {
    auto os = w.open("reports/" + t.name + ".json");
    write_report_json(os, rep);
  }
  for (const Table& tab : rep.tables) {
    auto os = w.open("tables/" + t.name + "_" + tab.name + ".csv");
    write_table_csv(os, tab);
  }
  if (!rep.pass) out.status = "check_failed";
  out.reports.push_back(std::move(rep));
}

std::string utc_now() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string hex(std::uint64_t v) {
  std::ostringstream ss;
  ss << std::hex << std::setw(16) << std::setfill('0') << v;
  return ss.str();
}

ordered_json task_echo(const Task& t) {
  ordered_json j;
  j["h"] = t.h;
  j["ladder"] = t.ladder.h;
  j["box"] = to_json(t.ladder.grid.box);
  j["kappa"] = t.ladder.grid.kappa;
  ordered_json m = ordered_json::array();
  for (int a = 0; a < t.ladder.grid.box.dim(); ++a) m.push_back(t.ladder.grid.mirror[a]);
  j["mirror"] = m;
  j["coefficients"] = to_string(t.ladder.coeffs.kind);
  j["outer"] = to_string(t.ladder.outer.kind);
  j["tol"] = t.ladder.solve.tol;
  j["seed"] = t.seed;
  return j;
}

}  // namespace

RunResult run(const Scenario& scenario, const RunOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::string started = utc_now();
  RunResult result;
  result.output_dir = opts.output.value_or(scenario.output);
  std::vector<const Task*> selected;
  for (const Task& t : scenario.tasks)
    if (opts.command == "all" || command_of(t.kind) == opts.command) selected.push_back(&t);
  if (selected.empty())
    throw Error(ErrorCode::InvalidArgument, "scenario has no tasks for command '" + opts.command + "'");

  const fs::path out(result.output_dir);
  std::error_code ec;
  for (const char* sub : {"", "fields", "reports", "tables", "csv"}) {
    fs::create_directories(out / sub, ec);
    if (ec) throw Error(ErrorCode::IoError, "cannot create " + (out / sub).string() + ": " + ec.message());
  }
  {
    std::ofstream os(out / "boundary_patches.csv");
    if (!os) throw Error(ErrorCode::IoError, "cannot write boundary_patches.csv");
    write_patches_csv(os, *scenario.gamma);
  }

  const Context ctx{scenario, out, std::max(1, opts.jobs)};
  result.tasks.resize(selected.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < selected.size(); k = next++) {
      const Task& t = *selected[k];
      TaskOutcome& o = result.tasks[k];
      o.name = t.name;
      o.kind = t.kind;
      const auto s0 = std::chrono::steady_clock::now();
      try {
        run_task(ctx, t, o);
      } catch (const std::exception& e) {
        o.status = "error";
        o.error = e.what();
      }
      o.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - s0).count();
    }
  };
  const int threads = std::min<int>(ctx.jobs, static_cast<int>(selected.size()));
  std::vector<std::thread> pool;
  for (int i = 1; i < threads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  bool error = false, failed = false;
  std::vector<EstimateReport> reports;
  for (const TaskOutcome& o : result.tasks) {
    error |= o.status == "error";
    failed |= o.status == "check_failed";
    reports.insert(reports.end(), o.reports.begin(), o.reports.end());
  }
  result.exit_code = error ? kExitError : failed ? kExitCheckFailure : kExitPass;
  if (!reports.empty()) {
    std::ofstream os(out / "rollup.csv");
    write_rollup_csv(os, reports);
  }

  ordered_json m;
  m["tool"] = "hmlab";
  m["version"] = version();
  m["compiler"] = __VERSION__;
  m["command"] = opts.command;
  m["started_at"] = started;
  m["scenario_path"] = scenario.source_path;
  m["scenario_name"] = scenario.name;
  m["inputs_hash"] = "fnv1a64:" + hex(scenario.inputs_hash);
  m["seed"] = scenario.seed;
  m["jobs"] = ctx.jobs;
  m["output"] = result.output_dir;
  try {
    m["scenario"] = ordered_json::parse(scenario.source_text);
  } catch (const std::exception&) {
    m["scenario"] = scenario.source_text;
  }
  ordered_json tasks = ordered_json::array();
  for (std::size_t k = 0; k < result.tasks.size(); ++k) {
    const TaskOutcome& o = result.tasks[k];
    ordered_json j;
    j["name"] = o.name;
    j["task"] = to_string(o.kind);
    j["status"] = o.status;
    if (!o.error.empty()) j["error"] = o.error;
    j["seconds"] = o.seconds;
    j["effective"] = task_echo(*selected[k]);
    j["outputs"] = o.outputs;
    ordered_json reps = ordered_json::array();
    for (const EstimateReport& r : o.reports)
      reps.push_back(ordered_json{{"id", r.id}, {"pass", r.pass}, {"failures", r.failures()}});
    j["reports"] = reps;
    tasks.push_back(j);
  }
  m["tasks"] = tasks;
  m["total_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  m["exit_code"] = result.exit_code;
  std::ofstream os(out / "manifest.json");
  if (!os) throw Error(ErrorCode::IoError, "cannot write manifest.json");
  os << m.dump(2) << '\n';
  return result;
}

}  // namespace hmlab
