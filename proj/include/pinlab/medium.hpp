#pragma once

#include <functional>
#include <istream>
#include <memory>
#include <mutex>
#include <string>
#include <utility>

#include "pinlab/geom.hpp"

namespace pinlab {

// Z^2-periodic positive coefficient field with cached bounds.
struct PeriodicMedium {
  std::function<double(Vec2)> eval;
  double qmin = 1.0;
  double qmax = 1.0;
  double lipschitz = 0.0;
  std::string kind = "constant";

  double operator()(Vec2 x) const { return eval(x); }

  // rms_mean is computed once on demand (single-writer init).
  double rms_mean(double tol = 1e-7) const;

 private:
  mutable std::shared_ptr<std::pair<std::once_flag, double>> rms_cache_ =
      std::make_shared<std::pair<std::once_flag, double>>();
};

PeriodicMedium make_constant(double c);
// Q(x) = profile(x . xi) for the irreducible lattice vector xi of `axis`;
// this is the lattice-compatible lamination (irrational axes are rejected).
PeriodicMedium make_laminar(std::function<double(double)> profile, Direction axis);
PeriodicMedium make_bump_lattice(double A, double delta);
// Plain-text sampled medium: header "ac-medium v1", "n <gridsize>", n^2 samples.
PeriodicMedium load_medium(std::istream& in);

// Value of the normalized mollifier rho at the origin (bump lattice peak).
double bump_rho0();

// (inf, sup) of Q over the closed ball B_delta(x), outward-rounded.
std::pair<double, double> ball_extrema(const PeriodicMedium& m, Vec2 x, double delta);

// Adaptive Simpson on [a,b] with absolute tolerance.
double integrate_1d(const std::function<double(double)>& f, double a, double b,
                    double tol, int max_depth = 30);

}  // namespace pinlab
