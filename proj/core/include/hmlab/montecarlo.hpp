#pragma once

// Euler–Maruyama simulation of dX = (d+1-n)(∇δ/δ) dt + √2 dW with absorption at Γ: the A = I
// diffusion of the weighted operator, used as a grid-free harmonic-measure oracle.

#include <cstdint>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "hmlab/potential.hpp"

namespace hmlab {

struct SdeConfig {
  double tau0 = 1.0;
  double beta = 0.02;                  // τ = min(τ0, β δ²)
  double eps_abs = -1.0;               // <= 0: 2 patch spacings
  std::int64_t max_steps = 10'000'000;  // a path reaching it is counted as escaped
  std::uint64_t seed = 1;
  Box box;                             // escape box; dim 0: [-escape_radius, escape_radius]^n
  double escape_radius = 1000.0;

  // Throws InvalidArgument for β ∉ (0, 1], τ0 <= 0 or max_steps < 1.
  void validate() const;
  double absorption_radius(const BoundarySet& gamma) const;
  Box escape_box(int n) const;
};

double step_size(const BoundarySet& gamma, const Point& x, const SdeConfig& cfg);

// One step with the given standard Gaussian increment ξ.
Point step(const Point& x, const BoundarySet& gamma, const SdeConfig& cfg, const Point& xi);
Point step(const Point& x, const BoundarySet& gamma, const SdeConfig& cfg, std::mt19937_64& rng);

// Generator of path `index` for the given seed (independent of scheduling).
std::mt19937_64 path_rng(std::uint64_t seed, std::uint64_t index);

struct PathStats {
  std::size_t paths = 0;
  std::vector<std::string> group_names;
  std::vector<std::uint64_t> patch_hits;
  std::vector<std::uint64_t> group_hits;
  std::uint64_t absorbed = 0;
  std::uint64_t escaped = 0;      // includes paths stopped at max_steps
  std::uint64_t step_limited = 0;
  double absorbed_fraction = 0.0;
  double escaped_fraction = 0.0;
  double mean_steps = 0.0;
  std::vector<double> group_probability;
  std::vector<double> wilson_center;
  std::vector<double> wilson_half_width;  // 95%
};

// Wilson score interval (center, half width) for k successes in n trials.
std::pair<double, double> wilson_interval(std::uint64_t k, std::uint64_t n, double z = 1.96);

// N independent absorbed paths from x0. Deterministic for a seed regardless of `jobs`.
PathStats run_paths(const BoundarySet& gamma, const Point& x0, std::size_t n_paths, const SdeConfig& cfg,
                    const Partition& partition, int jobs = 1);

// Positions of up to 100 paths, one vector per path (debug dump).
std::vector<std::vector<Point>> sample_trajectories(const BoundarySet& gamma, const Point& x0, std::size_t count,
                                                    const SdeConfig& cfg);

struct McComparison {
  std::vector<std::string> group_names;
  std::vector<double> mc;
  std::vector<double> pde;
  std::vector<double> z_score;
  double mc_rest = 0.0, pde_rest = 0.0;  // mass outside all groups (escaped / leaked / unassigned)
  double total_variation = 0.0;
  double statistical_error = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

// Throws PartitionMismatch when group names differ.
McComparison compare(const PathStats& mc, const std::vector<double>& pde_probabilities,
                     const std::vector<std::string>& pde_groups);
McComparison compare(const PathStats& mc, const HarmonicMeasureRow& row, const Point& x0);

void write_json(std::ostream& os, const PathStats& stats);
void write_trajectories_csv(std::ostream& os, const std::vector<std::vector<Point>>& paths);

}  // namespace hmlab
