#include "pinlab/cell.hpp"

#include <algorithm>
#include <complex>
#include <limits>
#include <cmath>
#include <mutex>
#include <numeric>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace pinlab {

namespace {

bool debug_log() {
  static const bool on = [] {
    const char* v = std::getenv("PINLAB_LOG");
    return v && std::strcmp(v, "debug") == 0;
  }();
  return on;
}

Vec2 boundary_point(const SlabGrid& grid, int i, double gi) {
  return grid.node(i, 0) - gi * grid.dir.unit;
}

// 1-D prepass along each column ray: place the boundary at the first (mode
// min_supersolution) or last (max_subsolution) position where the linear
// profile slope t/s crosses Q along the ray.
HeightFunction prepass_init(const SlabGrid& grid, const PeriodicMedium& medium,
                            double t, Mode mode) {
  HeightFunction g;
  g.g.resize(grid.n_tan);
  double s_lo = 4.0 * grid.h;
  double s_hi = grid.height - 2.0 * grid.h;
  double step = grid.h / 2.0;
  for (int i = 0; i < grid.n_tan; ++i) {
    double found = -1.0;
    if (mode == Mode::min_supersolution) {
      for (double s = s_lo; s <= s_hi; s += step)
        if (t / s <= medium(boundary_point(grid, i, s))) { found = s; break; }
      if (found < 0) found = s_hi;
    } else {
      for (double s = s_hi; s >= s_lo; s -= step)
        if (t / s >= medium(boundary_point(grid, i, s))) { found = s; break; }
      if (found < 0) found = s_lo;
    }
    g.g[i] = found;
  }
  return g;
}

struct IterResult {
  GridField field;
  int iterations = 0;
  double fb_residual = 0;
  bool oscillating = false;
};

// Quasi-Newton interface iteration. The residual R_i = |grad u|_i - Q_i is
// preconditioned mode-by-mode in the tangential Fourier basis with the
// Dirichlet-to-Neumann symbol of the slab: a boundary perturbation of
// wavenumber k changes the normal derivative with slope (t/g) k coth(k g),
// while the mean mode responds with slope t/g^2 plus the local dQ/dg term.
// Dividing by the wrong (mean-mode) slope amplifies short-wave modes by a
// factor ~ g k and destroys the boundary, so the per-mode division is load
// bearing, not an optimization.
IterResult fixed_point(const SlabGrid& grid, const PeriodicMedium& medium, double t,
                       HeightFunction& g, double tol, int max_iter, double omega0) {
  const int n = grid.n_tan;
  const double P = grid.period_len;
  double xin = grid.dir.rational ? grid.dir.lattice_norm() : 1.0;
  double cap = std::max(0.3 / xin, 4.0 * grid.h);
  double g_lo = 2.5 * grid.h, g_hi = grid.height - 1.5 * grid.h;
  double omega = omega0;
  const double omega_floor = 0.05 * omega0;
  const double qdel = std::max(grid.h / 4.0, 1e-4);
  IterResult res;
  std::vector<double> hist, R(n), d(n);
  std::vector<std::complex<double>> tw(n), Rhat(n);
  for (int j = 0; j < n; ++j)
    tw[j] = std::polar(1.0, -2.0 * M_PI * j / n);
  double prev_fbres = std::numeric_limits<double>::infinity();
  int rises = 0, falls = 0;
  for (int iter = 1; iter <= max_iter; ++iter) {
    res.field = harmonic_solve(grid, g, t);
    auto grad = boundary_gradient(res.field, g);
    double fbres = 0.0, gbar = 0.0, qd_mean = 0.0;
    for (int i = 0; i < n; ++i) {
      R[i] = std::isnan(grad[i]) ? 0.0
                                 : grad[i] - medium(boundary_point(grid, i, g.g[i]));
      fbres = std::max(fbres, std::abs(R[i]));
      gbar += g.g[i];
      qd_mean += (medium(boundary_point(grid, i, g.g[i] + qdel)) -
                  medium(boundary_point(grid, i, g.g[i] - qdel))) /
                 (2.0 * qdel);
    }
    gbar /= n;
    qd_mean /= n;
    // forward DFT of the residual (n is small; direct transform suffices)
    for (int m = 0; m < n; ++m) {
      std::complex<double> acc = 0.0;
      for (int j = 0; j < n; ++j) acc += R[j] * tw[(std::size_t(j) * m) % n];
      Rhat[m] = acc;
    }
    // divide by the per-mode Newton slope
    double s_mean = t / (gbar * gbar) + qd_mean;
    s_mean = std::max(s_mean, 0.25 * t / (gbar * gbar));
    for (int m = 0; m < n; ++m) {
      double s;
      if (m == 0) {
        s = s_mean;
      } else {
        double k = 2.0 * M_PI * std::min(m, n - m) / P;
        double kg = k * gbar;
        double coth = kg > 30.0 ? 1.0 : 1.0 / std::tanh(kg);
        s = (t / gbar) * k * coth + std::max(0.0, qd_mean);
      }
      Rhat[m] /= s;
    }
    double max_move = 0.0;
    for (int j = 0; j < n; ++j) {
      std::complex<double> acc = 0.0;
      for (int m = 0; m < n; ++m) acc += Rhat[m] * std::conj(tw[(std::size_t(j) * m) % n]);
      d[j] = std::clamp(omega * acc.real() / n, -cap, cap);
    }
    for (int i = 0; i < n; ++i) {
      if (std::isnan(grad[i])) continue;
      g.g[i] = std::clamp(g.g[i] + d[i], g_lo, g_hi);
      max_move = std::max(max_move, std::abs(d[i]));
    }
    res.iterations = iter;
    res.fb_residual = fbres;
    hist.push_back(max_move);
    if (debug_log())
      std::fprintf(stderr, "[pinlab] h=%.4g iter=%d omega=%.3f move=%.3e fbres=%.3e gmin=%.6f gmax=%.6f\n",
                   grid.h, iter, omega, max_move, fbres, g.min(), g.max());
    if (max_move < tol * grid.h) return res;
    // global step control: back off when the residual grows, recover slowly
    if (fbres > prev_fbres * 1.001) {
      falls = 0;
      if (++rises >= 2) { omega = std::max(omega_floor, omega * 0.5); rises = 0; }
    } else {
      rises = 0;
      if (++falls >= 4) { omega = std::min(omega0, omega * 1.2); falls = 0; }
    }
    prev_fbres = fbres;
  }
  // non-convergence: distinguish persistent oscillation from stagnation
  double tail = hist.empty() ? 0.0 : hist.back();
  std::ostringstream os;
  os << "solve_corrector: no convergence in " << max_iter
     << " iterations (last max update " << tail << ", tol " << tol * grid.h << "; history tail:";
  for (size_t k = hist.size() > 6 ? hist.size() - 6 : 0; k < hist.size(); ++k) os << " " << hist[k];
  os << ")";
  if (omega <= omega_floor * 1.0001) { res.oscillating = true; return res; }
  throw std::runtime_error(os.str());
}

double effective_h(const SlabProblem& p) {
  double h = std::min({0.1, p.h_target, p.t / (20.0 * p.medium->qmax)});
  return h;
}

}  // namespace

CellSolution solve_corrector(const SlabProblem& problem, double tol) {
  const PeriodicMedium& medium = *problem.medium;
  double h_fine = effective_h(problem);
  double height = problem.height > 0 ? problem.height : 2.05 * problem.t / medium.qmin;

  CellSolution sol;
  sol.t = problem.t;
  sol.mode = problem.mode;
  HeightFunction g;
  IterResult last;
  bool first = true;
  for (double mult : {4.0, 2.0, 1.0}) {
    SlabGrid grid = SlabGrid::make(problem.dir, h_fine * mult, height);
    if (!first && grid.n_tan == sol.grid.n_tan && mult != 1.0) continue;
    HeightFunction gl;
    gl.g.resize(grid.n_tan);
    if (first) {
      gl = prepass_init(grid, medium, problem.t, problem.mode);
    } else {
      double ratio = double(sol.grid.n_tan) / grid.n_tan;
      for (int i = 0; i < grid.n_tan; ++i) {
        double x = i * ratio;
        int i0 = int(x) % sol.grid.n_tan;
        double a = x - int(x);
        double v = (1 - a) * sol.boundary.g[i0] + a * sol.boundary.g[(i0 + 1) % sol.grid.n_tan];
        gl.g[i] = std::clamp(v, 2.5 * grid.h, grid.height - 1.5 * grid.h);
      }
    }
    for (auto& gi : gl.g) gi = std::clamp(gi, 2.5 * grid.h, grid.height - 1.5 * grid.h);
    double lvl_tol = (mult == 1.0) ? tol : 2.0 * tol;
    int max_iter = (mult == 1.0) ? 200 : 600;
    last = fixed_point(grid, medium, problem.t, gl, lvl_tol, max_iter, 0.5);
    sol.grid = grid;
    sol.boundary = gl;
    sol.iterations += last.iterations;
    first = false;
  }
  sol.field = std::move(last.field);
  sol.fb_residual = last.fb_residual;
  if (last.oscillating) sol.diag = "graph-assumption-violated";
  sol.r = sol.boundary.min();
  sol.alpha = sol.t / sol.r;
  sol.width_osc = sol.boundary.max() - sol.boundary.min();
  return sol;
}

EndpointEstimate estimate_endpoint(const PeriodicMedium& medium, Direction dir,
                                   const std::vector<double>& t_list, Mode mode,
                                   double tol, double h_target) {
  if (t_list.size() < 4)
    throw std::invalid_argument("estimate_endpoint: need at least 4 t values");
  EndpointEstimate est;
  for (double t : t_list) {
    SlabProblem p{&medium, dir, t, mode, h_target};
    CellSolution sol = solve_corrector(p, tol);
    est.series.push_back({t, sol.r, sol.alpha});
  }
  // least-squares fit alpha(t) = a + c/t on the last 3 points
  size_t n = est.series.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t k = n - 3; k < n; ++k) {
    double x = 1.0 / est.series[k][0], y = est.series[k][2];
    sx += x; sy += y; sxx += x * x; sxy += x * y;
  }
  double det = 3.0 * sxx - sx * sx;
  double c = (3.0 * sxy - sx * sy) / det;
  double a = (sy - c * sx) / 3.0;
  est.value = a;
  double err = 0;
  for (size_t k = n - 3; k < n; ++k)
    err = std::max(err, std::abs(a + c / est.series[k][0] - est.series[k][2]));
  est.err = std::max(err, 1e-4);
  // subadditivity defects over in-list sums
  for (size_t i = 0; i < n; ++i)
    for (size_t j = i; j < n; ++j) {
      double tsum = est.series[i][0] + est.series[j][0];
      for (size_t k = 0; k < n; ++k)
        if (std::abs(est.series[k][0] - tsum) < 1e-9)
          est.subadd_defects.push_back(est.series[k][1] - est.series[i][1] -
                                       est.series[j][1]);
    }
  return est;
}

std::vector<Vec2i> irreducible_directions(int xi_max) {
  if (xi_max < 1) throw std::invalid_argument("irreducible_directions: xi_max >= 1 required");
  std::vector<Vec2i> out;
  for (int a = -xi_max; a <= xi_max; ++a)
    for (int b = -xi_max; b <= xi_max; ++b) {
      if (a == 0 && b == 0) continue;
      if (std::gcd(std::abs(a), std::abs(b)) != 1) continue;
      out.push_back({a, b});
    }
  std::sort(out.begin(), out.end(), [](Vec2i u, Vec2i v) {
    return Direction::from_lattice(u).angle() < Direction::from_lattice(v).angle();
  });
  return out;
}

std::vector<PinningInterval> sweep_directions(const PeriodicMedium& medium, int xi_max,
                                              const std::vector<double>& t_list,
                                              double tol, int jobs, double h_target) {
  if (xi_max < 2) throw std::invalid_argument("sweep_directions: xi_max >= 2 required");
  auto xis = irreducible_directions(xi_max);
  std::vector<PinningInterval> out(xis.size());
  std::mutex mu;
  size_t next = 0;
  auto worker = [&] {
    for (;;) {
      size_t k;
      {
        std::lock_guard<std::mutex> lk(mu);
        if (next >= xis.size()) return;
        k = next++;
      }
      PinningInterval pi;
      pi.dir = Direction::from_lattice(xis[k]);
      try {
        pi.upper = estimate_endpoint(medium, pi.dir, t_list, Mode::min_supersolution, tol, h_target);
        pi.lower = estimate_endpoint(medium, pi.dir, t_list, Mode::max_subsolution, tol, h_target);
        pi.q_upper = pi.upper.value;
        pi.q_upper_err = pi.upper.err;
        pi.q_lower = pi.lower.value;
        pi.q_lower_err = pi.lower.err;
      } catch (const std::exception& e) {
        pi.status = std::string("failed: ") + e.what();
      }
      out[k] = std::move(pi);
    }
  };
  jobs = std::max(1, jobs);
  std::vector<std::thread> pool;
  for (int w = 1; w < jobs; ++w) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  return out;
}

double birkhoff_check(const CellSolution& sol, Vec2i k) {
  const SlabGrid& grid = sol.grid;
  Vec2 kv = k.to_vec2();
  double kp = kv.dot(grid.dir.unit);
  if (kp > 1e-12) throw std::invalid_argument("birkhoff_check: k.p must be <= 0");
  double dif = kv.dot(grid.dir.perp) / grid.h;
  double djf = -kp / grid.h;
  int di = int(std::llround(dif)), dj = int(std::llround(djf));
  if (std::abs(dif - di) > 1e-6 || std::abs(djf - dj) > 1e-6)
    throw std::invalid_argument("birkhoff_check: translate does not map to the grid");
  double defect = 0.0;
  for (int j = 0; j + dj <= grid.n_nrm; ++j)
    for (int i = 0; i < grid.n_tan; ++i) {
      double d = sol.field.at(i + di, j + dj) - sol.field.at(i, j);
      if (d > defect) defect = d;
    }
  return defect;
}

NormalBoundReport verify_normal_bound(const PeriodicMedium& medium, Direction dir,
                                      const std::vector<double>& t_list, double tol,
                                      double h_target) {
  NormalBoundReport rep;
  double floor_dev = 0.0;
  for (double t : t_list) {
    SlabProblem p{&medium, dir, t, Mode::min_supersolution, h_target};
    CellSolution sol = solve_corrector(p, tol);
    const SlabGrid& g = sol.grid;
    double dev = 0.0;
    for (int i = 0; i < g.n_tan; ++i) {
      double der = std::abs(3.0 * sol.field.at(i, 0) - 4.0 * sol.field.at(i, 1) +
                            sol.field.at(i, 2)) / (2.0 * g.h);
      dev = std::max(dev, std::abs(der - sol.alpha));
    }
    rep.table.push_back({t, dev});
    floor_dev = std::max(floor_dev, 4.0 * g.h);
  }
  bool all_small = std::all_of(rep.table.begin(), rep.table.end(),
                               [&](auto& r) { return r[1] <= floor_dev; });
  if (all_small) {
    rep.exact = true;
    return rep;
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = int(rep.table.size());
  for (auto& r : rep.table) {
    double x = std::log(r[0]), y = std::log(std::max(r[1], 1e-300));
    sx += x; sy += y; sxx += x * x; sxy += x * y;
  }
  rep.exponent = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return rep;
}

}  // namespace pinlab
