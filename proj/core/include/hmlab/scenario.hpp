#pragma once

// Scenario files: one boundary, one grid family and a list of tasks, all validated up front.

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "hmlab/montecarlo.hpp"
#include "hmlab/verify.hpp"

namespace hmlab {

enum class TaskKind {
  Solve,
  Green,
  HarmonicMeasure,
  MonteCarlo,
  Whitney,
  GeomCheck,
  VerifyMeasure,
  VerifyPoincare,
  VerifyTrace,
  VerifyInterior,
  VerifyBoundary,
  VerifyGreen,
  VerifyHarmonicMeasure,
  VerifyComparison,
  VerifyRepresentation,
};

std::string to_string(TaskKind kind);
std::optional<TaskKind> parse_task_kind(const std::string& name);
const std::vector<std::string>& known_tasks();
// CLI subcommand that runs tasks of this kind ("verify" for every verify-* task).
std::string command_of(TaskKind kind);
bool is_verify(TaskKind kind);

// Patch groups: named boxes, or shells |p - x0| in [edges[k], edges[k+1]).
struct PartitionSpec {
  std::vector<std::pair<std::string, Box>> boxes;
  bool shells = false;
  Point x0;
  std::vector<double> edges;
  std::vector<std::string> names;
  std::string rest;  // group for everything else; empty: unassigned

  Partition build(const BoundarySet& gamma) const;
};

// Boundary data for a solve.
struct DataSpec {
  enum class Kind { Constant, Indicator, Lipschitz };
  Kind kind = Kind::Constant;
  double value = 1.0;  // Constant
  Box box;             // Indicator: patches centred in the box
  double width = -1.0; // Indicator mollification (<= 0: none)
  int trace = 0;       // Lipschitz: member of the seeded trace family

  std::vector<double> sample(const BoundarySet& gamma, std::uint64_t seed) const;
};

struct SolveTask {
  DataSpec data;
  int slice_axis = -1;  // -1: last axis
  std::optional<double> slice_at;  // default: nearest lattice plane to the box centre
};

struct GreenTask {
  std::vector<PoleSpec> poles;
  std::vector<Point> probes;
};

struct HmTask {
  PartitionSpec partition;
  double mollification = -1.0;
  std::vector<Point> probes;
};

struct McTask {
  Point x0;
  std::size_t paths = 10'000;
  PartitionSpec partition;
  SdeConfig sde;
  std::size_t trajectories = 0;
  bool compare = false;  // also solve the harmonic-measure row at x0 and compare
};

struct WhitneyTask {
  int level_min = -1, level_max = -1;  // -1: coarsest level covering the box down to side h/2
};

struct GeomTask {
  int centers = 16;
  std::vector<double> radii;
  double budget_c0 = -1.0;  // <= 0: 4 C0
  std::vector<Point> corkscrew_bases;
  double corkscrew_radius = 1.0;
  std::optional<std::pair<Point, Point>> chain;
  double chain_radius = 1.0, chain_lambda = 4.0;
};

struct RepresentationTask {
  std::vector<Point> probes;
  Point bump_center;
  double bump_radius = 1.0;
  double tol = 0.05;
};

using TaskParams = std::variant<SolveTask, GreenTask, HmTask, McTask, WhitneyTask, GeomTask, MeasureSweep,
                                PoincareConfig, TraceConfig, InteriorConfig, BoundaryRegularityConfig,
                                GreenCheckConfig, HarmonicMeasureCheckConfig, ComparisonConfig, RepresentationTask>;

struct Task {
  std::string name;  // unique; used for output file names
  TaskKind kind = TaskKind::Solve;
  double h = 0.0;      // single-level tasks
  LadderSpec ladder;   // grid (box, κ, mirrors), ladder, coefficients, outer data, solver options
  std::uint64_t seed = 1;
  TaskParams params;
};

struct Scenario {
  std::string name;
  std::string source_path;
  std::string source_text;
  std::uint64_t inputs_hash = 0;  // FNV-1a of the file contents
  std::shared_ptr<const BoundarySet> gamma;
  std::uint64_t seed = 1;
  std::string output = "hmlab_out";
  std::vector<Task> tasks;
};

// Throws ParseError (with line and column) for malformed JSON and a ValidationError listing
// every violation otherwise.
Scenario parse_scenario(const std::string& path);
Scenario parse_scenario_text(const std::string& text, const std::string& base_dir = ".");

// Rebuilds every ladder as h, h/2, ..., with `depth` levels.
void set_ladder_depth(Scenario& s, int depth);
// Overrides the scenario seed and every task seed.
void set_seed(Scenario& s, std::uint64_t seed);

std::uint64_t fnv1a(const std::string& bytes);

}  // namespace hmlab
