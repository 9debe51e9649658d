#pragma once

#include <functional>
#include <vector>

#include "pinlab/geom.hpp"

namespace pinlab {

// Rotated rectangular slab grid, tangentially periodic, aligned with a
// direction p.  Node (i,j) sits at origin + i*h*perp - j*h*unit, so the
// normal coordinate s = j*h measures distance below the data line (j = 0).
struct SlabGrid {
  Direction dir;
  double period_len = 1.0;
  double height = 1.0;
  double h = 0.1;
  int n_tan = 10;
  int n_nrm = 10;
  Vec2 origin;

  Vec2 node(int i, int j) const {
    return origin + (i * h) * dir.perp - (j * h) * dir.unit;
  }
  double s(int j) const { return j * h; }
  int wrap(int i) const { return ((i % n_tan) + n_tan) % n_tan; }

  // Rational direction: h = 1/(m*|xi|) so every lattice translate maps to a
  // grid shift; n_tan = m*|xi|^2 covers one tangential period |xi|.
  static SlabGrid make(Direction d, double target_h, double height);
  // Explicit layout (irrational studies, small test grids).
  static SlabGrid make_raw(Direction d, double period_len, double height, int n_tan);
};

struct GridField {
  SlabGrid grid;
  std::vector<double> v;  // (n_nrm+1) rows of n_tan values
  int j_valid_lo = 0;
  int j_valid_hi = 0;  // inclusive

  GridField() = default;
  explicit GridField(const SlabGrid& g)
      : grid(g), v(size_t(g.n_nrm + 1) * g.n_tan, 0.0), j_valid_hi(g.n_nrm) {}
  double& at(int i, int j) { return v[size_t(j) * grid.n_tan + grid.wrap(i)]; }
  double at(int i, int j) const { return v[size_t(j) * grid.n_tan + grid.wrap(i)]; }
  // Bilinear sample at tangential/normal coordinates in grid units; tangential
  // wraps, normal clamps to the stored range.
  double sample(double ti, double tj) const;
};

struct HeightFunction {
  std::vector<double> g;  // free-boundary distance from the data line, per column
  double min() const;
  double max() const;
};

// Shared interior/cut-cell classification.  In column i the interior unknowns
// are j = 1..jcut[i]; the free boundary sits theta[i]*h beyond node jcut[i]
// (theta in (0.1, 1.1]: very thin cuts are merged into the next node).
struct CutLayout {
  std::vector<int> jcut;
  std::vector<double> theta;
};
CutLayout cut_layout(const SlabGrid& grid, const HeightFunction& g);

GridField harmonic_solve(const SlabGrid& grid, const HeightFunction& g, double top_value);
GridField harmonic_solve_data(const SlabGrid& grid, const HeightFunction& g,
                              const std::vector<double>& top_data);

// Second-order one-sided |grad u| estimate at the free-boundary crossing per
// column, corrected for the local slope of g.  NaN where fewer than two
// interior nodes are available.
std::vector<double> boundary_gradient(const GridField& field, const HeightFunction& g);

GridField sup_convolve(const GridField& field, double delta);
GridField inf_convolve(const GridField& field, double delta);

// Variable-radius sup-convolution by sampled rings (bilinear interpolation),
// used by the bending machinery.  radius is given per node in length units.
GridField sup_convolve_var(const GridField& field,
                           const std::function<double(int, int)>& radius,
                           double max_radius, int n_ang = 96);

// Max-norm of the 5-point discrete Laplacian over fully interior nodes.
double laplacian_residual(const GridField& field, const HeightFunction& g);

}  // namespace pinlab
