#include "pinlab/medium.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace pinlab {

namespace {

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double fa, double fm, double fb, double whole, double tol,
                        int depth) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  double delta = left + right - whole;
  if (depth <= 0) throw std::runtime_error("integrate_1d: refinement cap reached");
  if (std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return adaptive_simpson(f, a, m, fa, flm, fm, left, tol / 2, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, right, tol / 2, depth - 1);
}

// 1-D extremum search: dense scan plus golden-section refinement.
std::pair<double, double> profile_extrema(const std::function<double(double)>& f,
                                          double a, double b) {
  const int n = 4096;
  double lo = f(a), hi = f(a);
  int ilo = 0, ihi = 0;
  for (int i = 1; i <= n; ++i) {
    double v = f(a + (b - a) * i / n);
    if (v < lo) { lo = v; ilo = i; }
    if (v > hi) { hi = v; ihi = i; }
  }
  auto refine = [&](int i0, bool want_max) {
    double l = a + (b - a) * std::max(0, i0 - 1) / n;
    double r = a + (b - a) * std::min(n, i0 + 1) / n;
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = r - gr * (r - l), x2 = l + gr * (r - l);
    double f1 = f(x1), f2 = f(x2);
    for (int it = 0; it < 80; ++it) {
      bool pick_left = want_max ? (f1 > f2) : (f1 < f2);
      if (pick_left) { r = x2; x2 = x1; f2 = f1; x1 = r - gr * (r - l); f1 = f(x1); }
      else { l = x1; x1 = x2; f1 = f2; x2 = l + gr * (r - l); f2 = f(x2); }
    }
    return f(0.5 * (l + r));
  };
  lo = std::min(lo, refine(ilo, false));
  hi = std::max(hi, refine(ihi, true));
  return {lo, hi};
}

double profile_lipschitz(const std::function<double(double)>& f, double a, double b) {
  const int n = 8192;
  double lip = 0.0, prev = f(a), step = (b - a) / n;
  for (int i = 1; i <= n; ++i) {
    double v = f(a + step * i);
    lip = std::max(lip, std::abs(v - prev) / step);
    prev = v;
  }
  return lip;
}

// Unnormalized radial mollifier profile on |y| < 1/2.
double mollifier_raw(double rr4) {  // rr4 = 4|y|^2
  if (rr4 >= 1.0) return 0.0;
  return std::exp(-1.0 / (1.0 - rr4));
}

double mollifier_norm() {
  static const double c = [] {
    // integral of rho_raw^2 over R^2, radial: int_0^{1/2} exp(-2/(1-4r^2)) 2 pi r dr
    double I = integrate_1d(
        [](double r) { return 2.0 * M_PI * r * mollifier_raw(4 * r * r) * mollifier_raw(4 * r * r); },
        0.0, 0.5, 1e-14);
    return 1.0 / std::sqrt(I);
  }();
  return c;
}

}  // namespace

double integrate_1d(const std::function<double(double)>& f, double a, double b,
                    double tol, int max_depth) {
  double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

double PeriodicMedium::rms_mean(double tol) const {
  if (tol <= 0) throw std::invalid_argument("rms_mean: tol must be positive");
  auto cache = rms_cache_;
  const PeriodicMedium* self = this;
  std::call_once(cache->first, [self, cache, tol] {
    double I = integrate_1d(
        [self, tol](double x) {
          return integrate_1d(
              [self, x](double y) {
                double q = self->eval({x, y});
                return q * q;
              },
              0.0, 1.0, tol / 4);
        },
        0.0, 1.0, tol / 4);
    cache->second = std::sqrt(I);
  });
  return cache->second;
}

PeriodicMedium make_constant(double c) {
  if (c <= 0) throw std::invalid_argument("make_constant: c must be positive");
  PeriodicMedium m;
  m.eval = [c](Vec2) { return c; };
  m.qmin = m.qmax = c;
  m.lipschitz = 0.0;
  m.kind = "constant";
  return m;
}

PeriodicMedium make_laminar(std::function<double(double)> profile, Direction axis) {
  if (!axis.rational)
    throw std::invalid_argument("make_laminar: lamination axis must be a rational direction");
  Vec2 xi = axis.rational->to_vec2();
  auto [lo, hi] = profile_extrema(profile, 0.0, 1.0);
  if (lo <= 0) {
    std::ostringstream os;
    os << "make_laminar: non-positive profile sample (min " << lo << " on [0,1])";
    throw std::invalid_argument(os.str());
  }
  double lip1 = profile_lipschitz(profile, 0.0, 1.0);
  PeriodicMedium m;
  m.eval = [profile, xi](Vec2 x) { return profile(x.dot(xi)); };
  m.qmin = lo;
  m.qmax = hi;
  m.lipschitz = lip1 * xi.norm();
  m.kind = "laminar";
  return m;
}

double bump_rho0() { return mollifier_norm() * std::exp(-1.0); }

PeriodicMedium make_bump_lattice(double A, double delta) {
  if (A < 0) throw std::invalid_argument("make_bump_lattice: A must be nonnegative");
  if (!(delta > 0 && delta < 1))
    throw std::invalid_argument("make_bump_lattice: delta must lie in (0,1)");
  double c = mollifier_norm();
  PeriodicMedium m;
  m.eval = [A, delta, c](Vec2 x) {
    double dx = x.x - std::round(x.x);
    double dy = x.y - std::round(x.y);
    double rr4 = 4.0 * (dx * dx + dy * dy) / (delta * delta);
    return 1.0 + A * c * mollifier_raw(rr4);
  };
  m.qmin = 1.0;
  m.qmax = 1.0 + A * bump_rho0();
  // max |rho'| along the radius, scaled by A/delta.
  auto radial = [c](double r) { return c * mollifier_raw(4 * r * r); };
  double lip1 = profile_lipschitz(radial, 0.0, 0.5);
  m.lipschitz = A * lip1 / delta;
  m.kind = (A == 0) ? "constant" : "bump_lattice";
  return m;
}

PeriodicMedium load_medium(std::istream& in) {
  std::string tag, ver;
  in >> tag >> ver;
  if (tag != "ac-medium" || ver != "v1")
    throw std::runtime_error("load_medium: expected header 'ac-medium v1'");
  std::string key;
  int n = 0;
  in >> key >> n;
  if (key != "n" || n < 2) throw std::runtime_error("load_medium: bad grid size line");
  auto samples = std::make_shared<std::vector<double>>(size_t(n) * n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      double v;
      if (!(in >> v)) throw std::runtime_error("load_medium: truncated sample data");
      if (v <= 0) {
        std::ostringstream os;
        os << "load_medium: non-positive sample at row " << j << " col " << i;
        throw std::runtime_error(os.str());
      }
      (*samples)[size_t(j) * n + i] = v;
    }
  PeriodicMedium m;
  m.eval = [samples, n](Vec2 x) {
    double fx = (x.x - std::floor(x.x)) * n;
    double fy = (x.y - std::floor(x.y)) * n;
    int i0 = int(fx) % n, j0 = int(fy) % n;
    int i1 = (i0 + 1) % n, j1 = (j0 + 1) % n;
    double a = fx - int(fx), b = fy - int(fy);
    auto& s = *samples;
    return (1 - a) * (1 - b) * s[size_t(j0) * n + i0] + a * (1 - b) * s[size_t(j0) * n + i1] +
           (1 - a) * b * s[size_t(j1) * n + i0] + a * b * s[size_t(j1) * n + i1];
  };
  double lo = *std::min_element(samples->begin(), samples->end());
  double hi = *std::max_element(samples->begin(), samples->end());
  m.qmin = lo;
  m.qmax = hi;
  // finite-difference Lipschitz estimate (documented as an estimate)
  double lip = 0.0;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      double v = (*samples)[size_t(j) * n + i];
      double vr = (*samples)[size_t(j) * n + (i + 1) % n];
      double vu = (*samples)[size_t((j + 1) % n) * n + i];
      lip = std::max({lip, std::abs(vr - v) * n, std::abs(vu - v) * n});
    }
  m.lipschitz = lip;
  m.kind = "custom";
  return m;
}

std::pair<double, double> ball_extrema(const PeriodicMedium& m, Vec2 x, double delta) {
  if (delta > 1.0) throw std::invalid_argument("ball_extrema: delta must be <= 1");
  // Coarse scan of the ball (interior grid plus sphere samples), then local
  // pattern-search refinement of the best candidates.  The refinement attains
  // extrema of the smooth built-in families; a tiny safety pad keeps the
  // returned pair an outward-rounded bracket in floating point.
  double lo = m(x), hi = lo;
  Vec2 best_lo = x, best_hi = x;
  auto consider = [&](Vec2 p) {
    double v = m(p);
    if (v < lo) { lo = v; best_lo = p; }
    if (v > hi) { hi = v; best_hi = p; }
  };
  const int k = 64;
  double step = delta / k;
  for (int a = -k; a <= k; ++a)
    for (int b = -k; b <= k; ++b) {
      Vec2 d{a * step, b * step};
      if (d.norm() > delta) continue;
      consider(x + d);
    }
  for (int a = 0; a < 512; ++a) {
    double th = 2.0 * M_PI * a / 512;
    consider(x + delta * Vec2{std::cos(th), std::sin(th)});
  }
  // compass pattern search with ball projection, one run per extremum
  for (bool want_max : {false, true}) {
    Vec2 c = want_max ? best_hi : best_lo;
    double s = step;
    while (s > 1e-10 * delta) {
      bool moved = false;
      for (Vec2 d : {Vec2{s, 0}, Vec2{-s, 0}, Vec2{0, s}, Vec2{0, -s}}) {
        Vec2 p = c + d;
        Vec2 off = p - x;
        if (off.norm() > delta) p = x + off * (delta / off.norm());
        double v = m(p);
        if (want_max ? v > hi : v < lo) {
          if (want_max) { hi = v; best_hi = p; }
          else { lo = v; best_lo = p; }
          c = p;
          moved = true;
        }
      }
      if (!moved) s /= 2.0;
    }
  }
  double pad = 1e-9 * (m.qmax - m.qmin) + 1e-12;
  return {lo - pad, hi + pad};
}

}  // namespace pinlab
