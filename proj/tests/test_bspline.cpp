#include <doctest.h>

#include <cmath>

#include "kantsc/activations.hpp"
#include "kantsc/bspline.hpp"
#include "kantsc/rng.hpp"
#include "test_util.hpp"

using namespace kantsc;
using testutil::naive_basis_row;

TEST_CASE("spline spec knots are uniform and strictly increasing") {
  for (int G : {1, 5, 50}) {
    const SplineSpec spec = SplineSpec::make(G, 3);
    CHECK(static_cast<int>(spec.knots.size()) == G + 7);
    CHECK(spec.num_basis() == G + 3);
    const double h = 2.0 / G;
    for (std::size_t j = 0; j < spec.knots.size(); ++j) {
      CHECK(spec.knots[j] ==
            doctest::Approx(-1.0 + (static_cast<int>(j) - 3) * h).epsilon(1e-12));
      if (j) CHECK(spec.knots[j] > spec.knots[j - 1]);
    }
    CHECK(spec.knots[3] == doctest::Approx(-1.0));
    CHECK(spec.knots[spec.knots.size() - 4] == doctest::Approx(1.0));
  }
}

TEST_CASE("cubic basis at an interior knot is {1/6, 2/3, 1/6}") {
  // Grids whose knots are exactly representable doubles, so the probe point
  // is the knot itself and the third in-span value is an exact zero.
  struct Case {
    int grid;
    double x;
  };
  for (const Case& c : {Case{4, 0.0}, Case{4, -0.5}, Case{2, 0.0}, Case{8, 0.25}}) {
    const SplineSpec spec = SplineSpec::make(c.grid, 3);
    const std::vector<double> b = bspline_basis(c.x, spec);
    int nonzero = 0;
    std::vector<double> vals;
    for (double v : b)
      if (v != 0.0) {
        ++nonzero;
        vals.push_back(v);
      }
    REQUIRE(nonzero == 3);
    CHECK(std::fabs(vals[0] - 1.0 / 6.0) <= 1e-12);
    CHECK(std::fabs(vals[1] - 2.0 / 3.0) <= 1e-12);
    CHECK(std::fabs(vals[2] - 1.0 / 6.0) <= 1e-12);
  }
}

TEST_CASE("partition of unity and non-negativity on 10k points per grid") {
  Rng rng(42);
  for (int G : {1, 5, 50}) {
    const SplineSpec spec = SplineSpec::make(G, 3);
    for (int trial = 0; trial < 10000; ++trial) {
      const double x = rng.uniform(-1.0, 1.0);
      const std::vector<double> b = bspline_basis(x, spec);
      double sum = 0.0;
      for (double v : b) {
        CHECK(v >= 0.0);
        sum += v;
      }
      CHECK(std::fabs(sum - 1.0) <= 1e-10);
    }
  }
}

TEST_CASE("local support: at most order+1 nonzero entries") {
  Rng rng(7);
  const SplineSpec spec = SplineSpec::make(5, 3);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::vector<double> b = bspline_basis(rng.uniform(-1.0, 1.0), spec);
    int nonzero = 0;
    for (double v : b)
      if (v != 0.0) ++nonzero;
    CHECK(nonzero <= 4);
  }
}

TEST_CASE("local evaluation matches the naive Cox-de Boor recursion") {
  Rng rng(3);
  for (int G : {1, 2, 5, 50}) {
    const SplineSpec spec = SplineSpec::make(G, 3);
    for (int trial = 0; trial < 500; ++trial) {
      const double x = rng.uniform(-0.999, 0.999);
      const std::vector<double> fast = bspline_basis(x, spec);
      const std::vector<double> naive = naive_basis_row(spec, x);
      for (int i = 0; i < spec.num_basis(); ++i)
        CHECK(std::fabs(fast[i] - naive[i]) <= 1e-12);
    }
  }
}

TEST_CASE("degenerate G=1 k=0 basis is the indicator") {
  const SplineSpec spec = SplineSpec::make(1, 0);
  CHECK(spec.num_basis() == 1);
  for (double x : {-1.0, -0.5, 0.0, 0.9999}) {
    const std::vector<double> b = bspline_basis(x, spec);
    CHECK(b[0] == 1.0);
  }
}

TEST_CASE("basis derivative sums to zero inside the interval") {
  Rng rng(11);
  for (int G : {1, 5, 50}) {
    const SplineSpec spec = SplineSpec::make(G, 3);
    for (int trial = 0; trial < 2000; ++trial) {
      const std::vector<double> g = bspline_basis_grad(rng.uniform(-0.999, 0.999), spec);
      double sum = 0.0;
      for (double v : g) sum += v;
      CHECK(std::fabs(sum) <= 1e-10);
    }
  }
}

TEST_CASE("basis derivative matches central finite differences") {
  const SplineSpec spec = SplineSpec::make(5, 3);
  const double fd_step = 1e-6;
  for (double x : {0.37, -0.81, 0.02, 0.64, -0.33}) {
    const std::vector<double> analytic = bspline_basis_grad(x, spec);
    const std::vector<double> plus = bspline_basis(x + fd_step, spec);
    const std::vector<double> minus = bspline_basis(x - fd_step, spec);
    for (int i = 0; i < spec.num_basis(); ++i) {
      const double numeric = (plus[i] - minus[i]) / (2.0 * fd_step);
      const double denom = std::max({std::fabs(analytic[i]), std::fabs(numeric), 1e-8});
      CHECK(std::fabs(analytic[i] - numeric) / denom <= 1e-5);
    }
  }
}

TEST_CASE("derivative mirror symmetry on the uniform grid") {
  const SplineSpec spec = SplineSpec::make(5, 3);
  Rng rng(13);
  const int n = spec.num_basis();
  for (int trial = 0; trial < 200; ++trial) {
    const double x = rng.uniform(-0.99, 0.99);
    const std::vector<double> g_pos = bspline_basis_grad(x, spec);
    const std::vector<double> g_neg = bspline_basis_grad(-x, spec);
    for (int i = 0; i < n; ++i)
      CHECK(g_pos[i] == doctest::Approx(-g_neg[n - 1 - i]).epsilon(1e-9));
  }
}

TEST_CASE("out-of-range evaluation extrapolates smoothly") {
  const SplineSpec spec = SplineSpec::make(5, 3);
  // continuity across the boundary
  const std::vector<double> inside = bspline_basis(-1.0 + 1e-9, spec);
  const std::vector<double> outside = bspline_basis(-1.0 - 1e-9, spec);
  for (int i = 0; i < spec.num_basis(); ++i)
    CHECK(std::fabs(inside[i] - outside[i]) <= 1e-7);
  // derivative stays finite well outside
  for (double x : {-2.5, 2.5, -1.2, 1.2}) {
    for (double v : bspline_basis(x, spec)) CHECK(std::isfinite(v));
    for (double v : bspline_basis_grad(x, spec)) CHECK(std::isfinite(v));
  }
}

TEST_CASE("silu values") {
  CHECK(silu(0.0) == 0.0);
  CHECK(silu(1.0) == doctest::Approx(0.7310585786).epsilon(1e-10));
  CHECK(silu(-30.0) == doctest::Approx(-2.8e-12).epsilon(0.05));
  CHECK(std::isfinite(silu(-700.0)));
  CHECK(silu(700.0) == 700.0);
  // derivative at 0 is sigma(0) = 0.5
  CHECK(silu_grad(0.0) == doctest::Approx(0.5).epsilon(1e-15));
}
