#pragma once

#include "hmlab/geometry.hpp"

namespace hmlab {

// ∫∫_{[y0,y1]x[z0,z1]} (s² + t²)^{-1/2} ds dt, exact.
double inv_radius_rect(double y0, double y1, double z0, double z1);

// True when the cube average of δ^power has a closed form for this set
// (codimension-2 flats and a single point in the plane, power = -1).
bool has_closed_form_cell(const BoundarySet& gamma, double power);

// Mean of δ^power over the cube centered at `center` with side `side`.
// Closed form when available, otherwise `sub`^n midpoint subsampling; subsample points on Γ are skipped.
double cell_average_power(const BoundarySet& gamma, const Point& center, double side, double power,
                          int sub = 4);

// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int order, std::vector<double>& nodes, std::vector<double>& weights);

}  // namespace hmlab
