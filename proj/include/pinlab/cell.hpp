#pragma once

#include <array>
#include <string>
#include <vector>

#include "pinlab/grid.hpp"
#include "pinlab/medium.hpp"

namespace pinlab {

enum class Mode { min_supersolution, max_subsolution };

struct SlabProblem {
  const PeriodicMedium* medium = nullptr;
  Direction dir;
  double t = 1.0;
  Mode mode = Mode::min_supersolution;
  double h_target = 0.1;  // additionally capped by 0.1 and t/(20*qmax)
  double height = 0.0;    // 0 -> default 2.05*t/qmin
};

struct CellSolution {
  SlabGrid grid;
  GridField field;
  HeightFunction boundary;
  double t = 0, r = 0, alpha = 0, width_osc = 0, fb_residual = 0;
  int iterations = 0;
  Mode mode = Mode::min_supersolution;
  std::string diag;  // empty, or "graph-assumption-violated"
};

CellSolution solve_corrector(const SlabProblem& problem, double tol = 0.02);

struct EndpointEstimate {
  double value = 0, err = 0;
  std::vector<std::array<double, 3>> series;  // (t, r, alpha)
  std::vector<double> subadd_defects;         // r(ti+tj) - r(ti) - r(tj)
};

EndpointEstimate estimate_endpoint(const PeriodicMedium& medium, Direction dir,
                                   const std::vector<double>& t_list, Mode mode,
                                   double tol = 0.02, double h_target = 0.1);

struct PinningInterval {
  Direction dir;
  double q_lower = 0, q_upper = 0, q_lower_err = 0, q_upper_err = 0;
  EndpointEstimate lower, upper;
  std::string status = "ok";
};

std::vector<Vec2i> irreducible_directions(int xi_max);  // angle-sorted, all quadrants

std::vector<PinningInterval> sweep_directions(const PeriodicMedium& medium, int xi_max,
                                              const std::vector<double>& t_list,
                                              double tol = 0.02, int jobs = 1,
                                              double h_target = 0.1);

// Max positive part of u(x+k) - u(x) over overlapping nodes, for k.p <= 0.
double birkhoff_check(const CellSolution& sol, Vec2i k);

struct NormalBoundReport {
  std::vector<std::array<double, 2>> table;  // (t, max | |grad u| - alpha |)
  double exponent = 0;
  bool exact = false;  // deviations at discretization floor, fit skipped
};

NormalBoundReport verify_normal_bound(const PeriodicMedium& medium, Direction dir,
                                      const std::vector<double>& t_list,
                                      double tol = 0.02, double h_target = 0.1);

}  // namespace pinlab
