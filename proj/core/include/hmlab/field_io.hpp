#pragma once

// Field dumps. Binary layout (little-endian):
//   magic "HMLF", u32 version = 1, u32 n,
//   i64 dims[n], f64 box_lo[n], f64 box_hi[n], f64 h, u8 mirror[n], u64 gamma_hash, u64 count,
//   f64 values[count] in lattice order (axis 0 fastest).

#include <istream>
#include <ostream>
#include <string>

#include "hmlab/grid.hpp"
#include "hmlab/solver.hpp"

namespace hmlab {

void write_field(std::ostream& os, const Field& f);
void write_field(const std::string& path, const Field& f);
Field read_field(std::istream& is);
Field read_field(const std::string& path);

// Nodes of the lattice plane x_axis = (nearest plane to) coordinate, as x1..xn,value rows.
void write_field_slice_csv(std::ostream& os, const Field& f, int axis, double coordinate);

// nnz, unknowns, iterations and residual of a solve as a JSON object (timings live in the manifest).
void write_solve_stats_json(std::ostream& os, const SolveStats& stats, std::size_t nnz);

}  // namespace hmlab
