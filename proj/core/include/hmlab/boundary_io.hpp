#pragma once

// Boundary sets from JSON descriptors {"kind": ..., "n": ..., "d": ..., parameters} or from CSV
// patch files with columns x1..xn, weight, radius.

#include <istream>
#include <ostream>
#include <string>

#include "hmlab/geometry.hpp"

namespace hmlab {

// Throws ParseError for malformed JSON, ValidationError listing every bad field otherwise.
// Relative "file" entries of cloud descriptors are resolved against `base_dir`.
BoundarySet parse_boundary(const std::string& json_text, const std::string& base_dir = ".");
// A .json descriptor, or a .csv patch file (which then needs `d`).
BoundarySet load_boundary(const std::string& path, double d = -1.0);

BoundarySet read_patches_csv(std::istream& is, double d);
void write_patches_csv(std::ostream& os, const BoundarySet& gamma);

}  // namespace hmlab
