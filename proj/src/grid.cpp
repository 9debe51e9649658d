#include "pinlab/grid.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pinlab {

double HeightFunction::min() const { return *std::min_element(g.begin(), g.end()); }
double HeightFunction::max() const { return *std::max_element(g.begin(), g.end()); }

SlabGrid SlabGrid::make(Direction d, double target_h, double height) {
  if (!d.rational) throw std::invalid_argument("SlabGrid::make: rational direction required");
  if (target_h > 0.1) target_h = 0.1;
  double xin = d.lattice_norm();
  int m = std::max(1, int(std::ceil(1.0 / (target_h * xin) - 1e-12)));
  SlabGrid g;
  g.dir = d;
  g.h = 1.0 / (m * xin);
  g.n_tan = m * (d.rational->x * d.rational->x + d.rational->y * d.rational->y);
  g.period_len = g.n_tan * g.h;  // = |xi|
  g.n_nrm = std::max(4, int(std::ceil(height / g.h - 1e-9)));
  g.height = g.n_nrm * g.h;
  return g;
}

SlabGrid SlabGrid::make_raw(Direction d, double period_len, double height, int n_tan) {
  SlabGrid g;
  g.dir = d;
  g.n_tan = n_tan;
  g.h = period_len / n_tan;
  g.period_len = period_len;
  g.n_nrm = std::max(4, int(std::ceil(height / g.h - 1e-9)));
  g.height = g.n_nrm * g.h;
  return g;
}

double GridField::sample(double ti, double tj) const {
  tj = std::clamp(tj, 0.0, double(grid.n_nrm));
  int j0 = std::min(int(tj), grid.n_nrm - 1);
  double b = tj - j0;
  double fi = ti - std::floor(ti / grid.n_tan) * grid.n_tan;
  int i0 = std::min(int(fi), grid.n_tan - 1);
  double a = fi - i0;
  return (1 - a) * (1 - b) * at(i0, j0) + a * (1 - b) * at(i0 + 1, j0) +
         (1 - a) * b * at(i0, j0 + 1) + a * b * at(i0 + 1, j0 + 1);
}

CutLayout cut_layout(const SlabGrid& grid, const HeightFunction& g) {
  int n = grid.n_tan;
  if (int(g.g.size()) != n) throw std::invalid_argument("cut_layout: height size mismatch");
  CutLayout L;
  L.jcut.resize(n);
  L.theta.resize(n);
  for (int i = 0; i < n; ++i) {
    double gi = g.g[i];
    if (!(gi > 0) || gi > grid.height + 1e-12)
      throw std::invalid_argument("cut_layout: height out of [0, height]");
    int jl = int(std::floor(gi / grid.h - 1e-12));
    double theta = gi / grid.h - jl;
    if (theta < 0.1) { jl -= 1; theta += 1.0; }
    if (jl < 1) throw std::invalid_argument("cut_layout: empty column (boundary too close to data line)");
    if (jl >= grid.n_nrm) { jl = grid.n_nrm - 1; theta = 1.0; }
    L.jcut[i] = jl;
    L.theta[i] = theta;
  }
  return L;
}

GridField harmonic_solve_data(const SlabGrid& grid, const HeightFunction& g,
                              const std::vector<double>& top_data) {
  const int n = grid.n_tan;
  CutLayout L = cut_layout(grid, g);
  // unknown indexing, j-major
  std::vector<int> id(size_t(grid.n_nrm + 1) * n, -1);
  int cnt = 0;
  for (int j = 1; j <= grid.n_nrm; ++j)
    for (int i = 0; i < n; ++i)
      if (j <= L.jcut[i]) id[size_t(j) * n + i] = cnt++;
  Eigen::SparseMatrix<double> A(cnt, cnt);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(cnt);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(size_t(cnt) * 5);
  const double ih2 = 1.0 / (grid.h * grid.h);
  for (int j = 1; j <= grid.n_nrm; ++j)
    for (int i = 0; i < n; ++i) {
      int row = id[size_t(j) * n + i];
      if (row < 0) continue;
      double diag = 0.0;
      // tangential neighbors (exterior values are 0)
      for (int di : {-1, 1}) {
        int ii = grid.wrap(i + di);
        int nid = id[size_t(j) * n + ii];
        if (nid >= 0) trip.emplace_back(row, nid, ih2);
        diag -= ih2;
      }
      if (j == L.jcut[i]) {
        // Shortley-Weller: boundary (value 0) at distance theta*h above
        double th = L.theta[i];
        double cm = 2.0 * ih2 / (1.0 + th);
        double c0 = -2.0 * ih2 / th;
        diag += c0;
        if (j - 1 >= 1) {
          int nid = id[size_t(j - 1) * n + i];
          trip.emplace_back(row, nid, cm);
        } else {
          rhs[row] -= cm * top_data[i];
        }
      } else {
        diag -= 2.0 * ih2;
        // below (j-1)
        if (j - 1 >= 1) trip.emplace_back(row, id[size_t(j - 1) * n + i], ih2);
        else rhs[row] -= ih2 * top_data[i];
        // above (j+1) is interior by construction (j < jcut)
        trip.emplace_back(row, id[size_t(j + 1) * n + i], ih2);
      }
      trip.emplace_back(row, row, diag);
    }
  A.setFromTriplets(trip.begin(), trip.end());
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success)
    throw std::runtime_error("harmonic_solve: factorization failed");
  Eigen::VectorXd x = lu.solve(rhs);
  if (lu.info() != Eigen::Success)
    throw std::runtime_error("harmonic_solve: solve failed");
  GridField f(grid);
  for (int i = 0; i < n; ++i) f.at(i, 0) = top_data[i];
  for (int j = 1; j <= grid.n_nrm; ++j)
    for (int i = 0; i < n; ++i) {
      int k = id[size_t(j) * n + i];
      if (k >= 0) f.at(i, j) = x[k];
    }
  return f;
}

GridField harmonic_solve(const SlabGrid& grid, const HeightFunction& g, double top_value) {
  if (!(top_value > 0)) throw std::invalid_argument("harmonic_solve: top_value must be positive");
  return harmonic_solve_data(grid, g, std::vector<double>(grid.n_tan, top_value));
}

std::vector<double> boundary_gradient(const GridField& field, const HeightFunction& g) {
  const SlabGrid& grid = field.grid;
  CutLayout L = cut_layout(grid, g);
  int n = grid.n_tan;
  std::vector<double> out(n, std::nan(""));
  for (int i = 0; i < n; ++i) {
    int jl = L.jcut[i];
    if (jl < 1) continue;
    double d1 = g.g[i] - grid.s(jl);
    double d2 = d1 + grid.h;
    double u1 = field.at(i, jl);
    double u2 = field.at(i, jl - 1);
    if (jl - 1 < 1 && jl < 1) continue;
    double der = (d2 * d2 * u1 - d1 * d1 * u2) / (d1 * d2 * (d2 - d1));
    // slope correction: |grad u| = |du/ds| * sqrt(1 + g'^2)
    double gp = (g.g[(i + 1) % n] - g.g[(i - 1 + n) % n]) / (2.0 * grid.h);
    out[i] = std::abs(der) * std::sqrt(1.0 + gp * gp);
  }
  return out;
}

namespace {

GridField ball_convolve(const GridField& field, double delta, bool is_sup) {
  const SlabGrid& grid = field.grid;
  if (delta < grid.h) throw std::invalid_argument("sup/inf_convolve: delta must be >= h");
  if (delta > 0.5 * grid.height)
    throw std::invalid_argument("sup/inf_convolve: delta larger than half the slab height");
  int k = int(std::floor(delta / grid.h + 1e-12));
  GridField out(grid);
  out.j_valid_lo = std::max(field.j_valid_lo + k, 0);
  out.j_valid_hi = std::min(field.j_valid_hi - k, grid.n_nrm);
  std::vector<std::pair<int, int>> offs;
  for (int a = -k; a <= k; ++a)
    for (int b = -k; b <= k; ++b)
      if (double(a) * a + double(b) * b <= (delta / grid.h) * (delta / grid.h) + 1e-12)
        offs.emplace_back(a, b);
  for (int j = 0; j <= grid.n_nrm; ++j)
    for (int i = 0; i < grid.n_tan; ++i) {
      double best = field.at(i, j);
      for (auto [a, b] : offs) {
        int jj = j + b;
        if (jj < 0 || jj > grid.n_nrm) continue;
        double v = field.at(i + a, jj);
        if (is_sup ? v > best : v < best) best = v;
      }
      out.at(i, j) = best;
    }
  return out;
}

}  // namespace

GridField sup_convolve(const GridField& field, double delta) {
  return ball_convolve(field, delta, true);
}
GridField inf_convolve(const GridField& field, double delta) {
  return ball_convolve(field, delta, false);
}

GridField sup_convolve_var(const GridField& field,
                           const std::function<double(int, int)>& radius,
                           double max_radius, int n_ang) {
  const SlabGrid& grid = field.grid;
  GridField out(grid);
  int pad = int(std::ceil(max_radius / grid.h)) + 1;
  out.j_valid_lo = field.j_valid_lo + pad;
  out.j_valid_hi = field.j_valid_hi - pad;
  std::vector<double> ca(n_ang), sa(n_ang);
  for (int a = 0; a < n_ang; ++a) {
    ca[a] = std::cos(2.0 * M_PI * a / n_ang);
    sa[a] = std::sin(2.0 * M_PI * a / n_ang);
  }
  for (int j = 0; j <= grid.n_nrm; ++j)
    for (int i = 0; i < grid.n_tan; ++i) {
      double r = radius(i, j) / grid.h;  // in grid units
      double best = field.at(i, j);
      for (double rho : {r, 0.5 * r})
        for (int a = 0; a < n_ang; ++a) {
          double v = field.sample(i + rho * ca[a], j + rho * sa[a]);
          if (v > best) best = v;
        }
      out.at(i, j) = best;
    }
  return out;
}

double laplacian_residual(const GridField& field, const HeightFunction& g) {
  const SlabGrid& grid = field.grid;
  CutLayout L = cut_layout(grid, g);
  double res = 0.0;
  const double ih2 = 1.0 / (grid.h * grid.h);
  for (int i = 0; i < grid.n_tan; ++i)
    for (int j = 1; j < L.jcut[i]; ++j) {
      double lap = (field.at(i + 1, j) + field.at(i - 1, j) + field.at(i, j + 1) +
                    field.at(i, j - 1) - 4.0 * field.at(i, j)) * ih2;
      res = std::max(res, std::abs(lap));
    }
  return res;
}

}  // namespace pinlab
