#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "doctest.h"
#include "pinlab/grid.hpp"

using namespace pinlab;

namespace {
HeightFunction flat(const SlabGrid& g, double r) {
  HeightFunction hf;
  hf.g.assign(g.n_tan, r);
  return hf;
}
}  // namespace

TEST_CASE("grid construction snaps lattice translates") {
  auto g = SlabGrid::make(Direction::from_lattice({1, 2}), 0.05, 3.0);
  CHECK(g.n_tan * g.h == doctest::Approx(std::sqrt(5.0)).epsilon(1e-12));
  CHECK(g.h <= 0.05 + 1e-12);
  CHECK(std::abs(g.n_nrm * g.h - g.height) < 1e-12);
  // translate by xi_perp = (2,-1) is a whole tangential period
  double shift = Vec2{2, -1}.dot(g.dir.perp) / g.h;
  CHECK(std::abs(shift - std::llround(shift)) < 1e-9);
  CHECK(std::llround(shift) % g.n_tan == 0);
}

TEST_CASE("flat boundary gives exact discrete linear profile") {
  auto g = SlabGrid::make(Direction::from_lattice({1, 0}), 0.05, 6.0);
  double r = 4.0, t = 4.0;
  auto u = harmonic_solve(g, flat(g, r), t);
  for (int i = 0; i < g.n_tan; i += 3)
    for (int j = 0; j <= g.n_nrm; ++j) {
      double expect = std::max(0.0, t * (1.0 - g.s(j) / r));
      CHECK(u.at(i, j) == doctest::Approx(expect).epsilon(1e-9));
    }
  auto grad = boundary_gradient(u, flat(g, r));
  for (double v : grad) CHECK(v == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(laplacian_residual(u, flat(g, r)) <= 1e-8 * t);
}

TEST_CASE("flat boundary off-lattice cut") {
  auto g = SlabGrid::make(Direction::from_lattice({1, 0}), 0.05, 6.0);
  double r = 3.9871, t = 2.0;
  HeightFunction hf = flat(g, r);
  auto u = harmonic_solve(g, hf, t);
  auto grad = boundary_gradient(u, hf);
  for (double v : grad) CHECK(v == doctest::Approx(t / r).epsilon(1e-9));
}

TEST_CASE("tilted plane boundary gradient") {
  // u = alpha * (x . q)+ sampled on a grid with normal p != q
  auto g = SlabGrid::make(Direction::from_lattice({1, 0}), 0.02, 4.0);
  double alpha = 1.3;
  Vec2 q{std::cos(0.18), std::sin(0.18)};  // tilt ~10 degrees
  double c = 2.0;                          // boundary where x.q = -c
  GridField u(g);
  HeightFunction hf;
  hf.g.resize(g.n_tan);
  for (int i = 0; i < g.n_tan; ++i) {
    // boundary height along the column: solve (node(i,0) - s*unit).q = -c
    Vec2 x0 = g.node(i, 0);
    hf.g[i] = (x0.dot(q) + c) / g.dir.unit.dot(q);
    for (int j = 0; j <= g.n_nrm; ++j)
      u.at(i, j) = alpha * std::max(0.0, g.node(i, j).dot(q) + c);
  }
  auto grad = boundary_gradient(u, hf);
  // skip the seam columns: this synthetic boundary is not tangentially periodic
  for (int i = 2; i < g.n_tan - 2; ++i)
    CHECK(grad[i] == doctest::Approx(alpha).epsilon(2 * g.h));
}

TEST_CASE("sinusoidal boundary self-convergence at order ~2") {
  auto fine = SlabGrid::make(Direction::from_lattice({1, 0}), 1.0 / 128, 2.0);
  auto mk = [&](const SlabGrid& g) {
    HeightFunction hf;
    hf.g.resize(g.n_tan);
    for (int i = 0; i < g.n_tan; ++i) {
      double x = double(i) / g.n_tan;
      hf.g[i] = 1.0 + 0.2 * std::sin(2 * M_PI * x);
    }
    return hf;
  };
  auto uref = harmonic_solve(fine, mk(fine), 1.0);
  double errs[2];
  int k = 0;
  for (double h : {1.0 / 32, 1.0 / 64}) {
    auto g = SlabGrid::make(Direction::from_lattice({1, 0}), h, 2.0);
    auto u = harmonic_solve(g, mk(g), 1.0);
    double e = 0;
    int ratio = fine.n_tan / g.n_tan;
    for (int i = 0; i < g.n_tan; ++i)
      for (int j = 0; j <= g.n_nrm; ++j)
        e = std::max(e, std::abs(u.at(i, j) - uref.at(i * ratio, j * ratio)));
    errs[k++] = e;
  }
  CHECK(errs[1] <= errs[0] / 3.5);
}

TEST_CASE("discrete maximum principle") {
  auto g = SlabGrid::make(Direction::from_lattice({1, 1}), 0.1, 2.0);
  HeightFunction hf;
  hf.g.resize(g.n_tan);
  for (int i = 0; i < g.n_tan; ++i) hf.g[i] = 1.0 + 0.3 * std::cos(2 * M_PI * i / g.n_tan);
  auto u = harmonic_solve(g, hf, 2.5);
  for (double v : u.v) {
    CHECK(v <= 2.5 + 1e-9);
    CHECK(v >= -1e-9);
  }
}

TEST_CASE("sup/inf convolution") {
  auto g = SlabGrid::make(Direction::from_lattice({1, 0}), 0.05, 3.0);
  SUBCASE("constant field unchanged") {
    GridField f(g);
    for (auto& v : f.v) v = 2.0;
    auto s = sup_convolve(f, 0.2);
    for (int j = s.j_valid_lo; j <= s.j_valid_hi; ++j)
      for (int i = 0; i < g.n_tan; ++i) CHECK(s.at(i, j) == 2.0);
  }
  SUBCASE("ramp translates") {
    double alpha = 1.5, r = 1.5, delta = 0.25;
    GridField f(g);
    for (int j = 0; j <= g.n_nrm; ++j)
      for (int i = 0; i < g.n_tan; ++i) f.at(i, j) = alpha * std::max(0.0, r - g.s(j));
    auto s = sup_convolve(f, delta);
    for (int j = s.j_valid_lo; j <= s.j_valid_hi; ++j)
      for (int i = 0; i < g.n_tan; ++i) {
        double expect = alpha * std::max(0.0, r + delta - g.s(j));
        CHECK(std::abs(s.at(i, j) - expect) <= alpha * g.h + 1e-12);
      }
  }
  SUBCASE("opening/closing ordering and monotonicity on random fields") {
    auto gg = SlabGrid::make_raw(Direction::from_lattice({1, 0}), 1.0, 1.0, 16);
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> U(0, 1);
    for (int rep = 0; rep < 5; ++rep) {
      GridField f(gg);
      for (auto& v : f.v) v = U(rng);
      double d = 3 * gg.h;
      auto open = sup_convolve(inf_convolve(f, d), d);
      auto close = inf_convolve(sup_convolve(f, d), d);
      int lo = std::max(open.j_valid_lo, close.j_valid_lo);
      int hi = std::min(open.j_valid_hi, close.j_valid_hi);
      for (int j = lo; j <= hi; ++j)
        for (int i = 0; i < gg.n_tan; ++i) {
          CHECK(open.at(i, j) <= f.at(i, j) + 1e-12);
          CHECK(f.at(i, j) <= close.at(i, j) + 1e-12);
        }
      // extensivity + monotonicity of sup_convolve
      GridField f2 = f;
      for (auto& v : f2.v) v += 0.1;
      auto s1 = sup_convolve(f, d);
      auto s2 = sup_convolve(f2, d);
      for (int j = s1.j_valid_lo; j <= s1.j_valid_hi; ++j)
        for (int i = 0; i < gg.n_tan; ++i) {
          CHECK(s1.at(i, j) >= f.at(i, j));
          CHECK(s1.at(i, j) <= s2.at(i, j));
        }
    }
  }
  SUBCASE("oversized delta rejected") {
    GridField f(g);
    CHECK_THROWS(sup_convolve(f, 2.0));
  }
}

TEST_CASE("tangential periodicity of the stencil") {
  auto g = SlabGrid::make(Direction::from_lattice({2, 1}), 0.1, 2.0);
  HeightFunction hf;
  hf.g.resize(g.n_tan);
  for (int i = 0; i < g.n_tan; ++i) hf.g[i] = 1.2 + 0.2 * std::sin(2 * M_PI * i / g.n_tan);
  auto u = harmonic_solve(g, hf, 1.0);
  // wraparound consistency: at(i) must equal at(i + n_tan) bit for bit
  for (int j = 0; j <= g.n_nrm; ++j) CHECK(u.at(0, j) == u.at(g.n_tan, j));
}
