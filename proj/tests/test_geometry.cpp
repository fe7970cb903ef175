#include "doctest.h"

#include <cmath>

#include "bhv/geometry.hpp"
#include "bhv/hypersurface.hpp"
#include "bhv/oracle.hpp"
#include "support.hpp"

using namespace bhv;

namespace {

ConformalFactor make_cf(const std::string& text, int m,
                        ParameterBinding params = {}) {
  const CoordinateSystem cs = CoordinateSystem::ambient(m);
  return ConformalFactor(parse_expression(text, cs), cs, std::move(params));
}

MetricField conformal_metric(const ConformalFactor& cf) {
  return [&cf](const Eigen::VectorXd& q) {
    const double f = cf.value(q);
    return Eigen::MatrixXd(Eigen::MatrixXd::Identity(q.size(), q.size()) /
                           (f * f));
  };
}

PlaneSection coordinate_plane(const Eigen::VectorXd& p, int i, int j) {
  PlaneSection plane;
  plane.point = p;
  plane.a = Eigen::VectorXd::Unit(p.size(), i);
  plane.b = Eigen::VectorXd::Unit(p.size(), j);
  return plane;
}

}  // namespace

TEST_CASE("conformal factor caches exact partials") {
  const ConformalFactor cf = make_cf("(x1+2*z+3)^t", 1, {{"t", 0.4}});
  Eigen::VectorXd p(2);
  p << 0.5, 1.0;
  const double u = 0.5 + 2.0 + 3.0;
  CHECK(cf.value(p) == doctest::Approx(std::pow(u, 0.4)));
  CHECK(cf.gradient(p)[1] ==
        doctest::Approx(0.4 * 2.0 * std::pow(u, -0.6)));
  CHECK(cf.hessian(p)(0, 1) ==
        doctest::Approx(0.4 * (-0.6) * 2.0 * std::pow(u, -1.6)));
  CHECK(cf.third(0, 1, 1, p) ==
        doctest::Approx(0.4 * (-0.6) * (-1.6) * 4.0 * std::pow(u, -2.6)));
  // sigma = t ln(x1 + 2z + 3)
  CHECK(cf.sigma_value(p) == doctest::Approx(0.4 * std::log(u)));
  CHECK(cf.sigma_gradient(p)[0] == doctest::Approx(0.4 / u));

  SUBCASE("positivity is enforced") {
    const ConformalFactor zf = make_cf("z", 1);
    Eigen::VectorXd bad(2);
    bad << 0.0, -1.0;
    CHECK_THROWS_AS(zf.value(bad), DomainError);
  }
  SUBCASE("unbound parameters are rejected at construction") {
    CHECK_THROWS_AS(make_cf("A*z+B", 1, {{"A", 1.0}}), InvalidInput);
  }
}

TEST_CASE("christoffel symbols of the conformal metric") {
  SUBCASE("constant factor is flat") {
    const ConformalFactor cf = make_cf("1", 2);
    Eigen::VectorXd p(3);
    p << 0.1, 0.2, 0.3;
    const auto gamma = christoffel_conformal(cf, p);
    for (double v : gamma.v) CHECK(v == 0.0);
  }

  SUBCASE("hyperbolic half-space closed form") {
    const ConformalFactor cf = make_cf("z", 1);  // n = 2, coords (x1, z)
    Eigen::VectorXd p(2);
    p << 0.7, 2.0;
    const auto gamma = christoffel_conformal(cf, p);
    const int x = 0, z = 1;
    CHECK(gamma.at(z, z, z) == doctest::Approx(-1.0 / p[1]));
    CHECK(gamma.at(z, x, x) == doctest::Approx(1.0 / p[1]));
    CHECK(gamma.at(x, x, z) == doctest::Approx(-1.0 / p[1]));
    CHECK(gamma.at(x, x, x) == 0.0);
  }

  SUBCASE("agrees with the brute-force oracle") {
    const ConformalFactor cf = make_cf("(x1+x2+2*z+3)^(-1)", 2);
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 100; ++trial) {
      const Eigen::VectorXd p = testgen::random_point(rng, 3);
      const auto sym = christoffel_conformal(cf, p);
      const auto fd = christoffel_bruteforce(conformal_metric(cf), p);
      for (std::size_t i = 0; i < sym.v.size(); ++i)
        CHECK(std::abs(sym.v[i] - fd.v[i]) < 1e-6);
    }
  }
}

TEST_CASE("ricci tensor of the conformal metric") {
  SUBCASE("constant factor is Ricci flat") {
    const ConformalFactor cf = make_cf("42", 3);
    Eigen::VectorXd p = Eigen::VectorXd::Ones(4);
    CHECK(ricci_coordinates(cf, p).coords.cwiseAbs().maxCoeff() < 1e-14);
  }

  SUBCASE("hyperbolic space is Einstein with Ric = -m G") {
    const ConformalFactor cf = make_cf("z", 3);  // n = 4, m = 3
    Eigen::VectorXd p(4);
    p << 0.3, -0.1, 0.9, 1.7;
    const auto ric = ricci_coordinates(cf, p);
    const Eigen::MatrixXd expected =
        -3.0 * Eigen::MatrixXd::Identity(4, 4) / (p[3] * p[3]);
    CHECK((ric.coords - expected).cwiseAbs().maxCoeff() < 1e-12);
  }

  SUBCASE("generic factor matches the brute-force oracle") {
    const ConformalFactor cf = make_cf("(x1+2*z+3)^(0.4)", 2);
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 25; ++trial) {
      const Eigen::VectorXd p = testgen::random_point(rng, 3);
      const Eigen::MatrixXd sym = ricci_coordinates(cf, p).coords;
      const Eigen::MatrixXd fd = ricci_bruteforce(conformal_metric(cf), p);
      CHECK((sym - fd).cwiseAbs().maxCoeff() < 1e-6);
    }
  }

  SUBCASE("matrix is symmetric") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 30; ++trial) {
      const int n = 3 + trial % 3;
      const CoordinateSystem cs = CoordinateSystem::ambient(n - 1);
      const ConformalFactor cf(testgen::random_positive_factor(rng, n), cs, {});
      const Eigen::VectorXd p = testgen::random_point(rng, n);
      const Eigen::MatrixXd ric = ricci_coordinates(cf, p).coords;
      CHECK((ric - ric.transpose()).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("normal-normal Ricci contraction") {
  SUBCASE("constant sigma vanishes") {
    const ConformalFactor cf = make_cf("7", 3);
    Eigen::VectorXd p = Eigen::VectorXd::Ones(4);
    CHECK(ricci_normal_normal(cf, Eigen::VectorXd::Unit(4, 3), p) ==
          doctest::Approx(0.0));
  }

  SUBCASE("hyperbolic value is -m") {
    const int m = 3;
    const ConformalFactor cf = make_cf("z", m);
    Eigen::VectorXd p(4);
    p << 0.2, 0.4, -0.6, 1.3;
    CHECK(ricci_normal_normal(cf, Eigen::VectorXd::Unit(4, 3), p) ==
          doctest::Approx(-double(m)));
  }

  SUBCASE("equals the matrix contraction with the rescaled normal") {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 100; ++trial) {
      const int n = 3 + trial % 3;
      const CoordinateSystem cs = CoordinateSystem::ambient(n - 1);
      const ConformalFactor cf(testgen::random_positive_factor(rng, n), cs, {});
      const Eigen::VectorXd p = testgen::random_point(rng, n);
      Eigen::VectorXd nu(n);
      for (int i = 0; i < n; ++i)
        nu[i] = std::uniform_real_distribution<double>(-1, 1)(rng);
      nu.normalize();
      const double direct = ricci_normal_normal(cf, nu, p);
      const Eigen::VectorXd xi = cf.value(p) * nu;
      const double contracted = xi.dot(ricci_coordinates(cf, p).coords * xi);
      CHECK(std::abs(direct - contracted) < 1e-9 * (1.0 + std::abs(direct)));
    }
  }
}

TEST_CASE("tangential Ricci contraction") {
  SUBCASE("constant sigma vanishes") {
    const ConformalFactor cf = make_cf("3", 3);
    const Hypersurface plane =
        Hypersurface::hyperplane(Eigen::VectorXd::Unit(4, 3), 0.5);
    const ShapeData shape = shape_operator(plane, Eigen::VectorXd::Zero(3));
    CHECK(ricci_tangential(cf, shape).cwiseAbs().maxCoeff() < 1e-14);
  }

  SUBCASE("z-only factor on an axis plane vanishes") {
    const ConformalFactor cf = make_cf("1/(z+2)", 3);
    const Hypersurface plane =
        Hypersurface::hyperplane(Eigen::VectorXd::Unit(4, 3), 1.0);
    Eigen::VectorXd u(3);
    u << 0.3, -0.2, 0.8;
    const ShapeData shape = shape_operator(plane, u);
    CHECK(ricci_tangential(cf, shape).cwiseAbs().maxCoeff() < 1e-12);
  }

  SUBCASE("matches the coordinate contraction of the Ricci matrix") {
    const ConformalFactor cf = make_cf("(x1+2*z+3)^(-1)", 3);
    const Hypersurface plane =
        Hypersurface::hyperplane(Eigen::VectorXd::Unit(4, 3), 0.7);
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 100; ++trial) {
      const Eigen::VectorXd u = testgen::random_point(rng, 3);
      const ShapeData shape = shape_operator(plane, u);
      const Eigen::VectorXd& p = shape.ambient_point;
      const Eigen::VectorXd direct = ricci_tangential(cf, shape);

      // coordinate route: project Ric(xi) tangentially in the G metric
      const double f = cf.value(p);
      const Eigen::MatrixXd ric = ricci_coordinates(cf, p).coords;
      const Eigen::VectorXd xi = f * shape.normal;
      // raise one index: G^{ab} = f^2 delta
      const Eigen::VectorXd ric_xi = f * f * (ric * xi);
      Eigen::VectorXd via_matrix(3);
      for (int i = 0; i < 3; ++i) {
        const Eigen::VectorXd e_bar = f * shape.frame.row(i).transpose();
        via_matrix[i] = ric_xi.dot(e_bar) / (f * f);  // G inner product
      }
      CHECK((direct - via_matrix).cwiseAbs().maxCoeff() <
            1e-9 * (1.0 + direct.cwiseAbs().maxCoeff()));
    }
  }
}

TEST_CASE("sectional curvature") {
  SUBCASE("flat for constant factors") {
    const ConformalFactor cf = make_cf("5", 4);
    Eigen::VectorXd p = Eigen::VectorXd::Ones(5);
    CHECK(sectional_curvature(cf, coordinate_plane(p, 0, 3)) == 0.0);
  }

  SUBCASE("hyperbolic half-space is -1 for every plane") {
    const ConformalFactor cf = make_cf("z", 4);
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 50; ++trial) {
      Eigen::VectorXd p = testgen::random_point(rng, 5);
      p[4] = 1.0 + p[4];
      Eigen::VectorXd a(5), b(5);
      for (int i = 0; i < 5; ++i) {
        a[i] = std::uniform_real_distribution<double>(-1, 1)(rng);
        b[i] = std::uniform_real_distribution<double>(-1, 1)(rng);
      }
      a.normalize();
      b -= b.dot(a) * a;
      b.normalize();
      CHECK(sectional_curvature(cf, {p, a, b}) == doctest::Approx(-1.0));
    }
  }

  SUBCASE("power family factor has negative curvature") {
    const ConformalFactor cf =
        make_cf("(x1+x2+x3+x4+2*z+3)^(0.4)", 4);
    std::mt19937_64 rng(43);
    for (int trial = 0; trial < 50; ++trial) {
      const Eigen::VectorXd p = testgen::random_point(rng, 5);
      Eigen::VectorXd a(5), b(5);
      for (int i = 0; i < 5; ++i) {
        a[i] = std::uniform_real_distribution<double>(-1, 1)(rng);
        b[i] = std::uniform_real_distribution<double>(-1, 1)(rng);
      }
      a.normalize();
      b -= b.dot(a) * a;
      b.normalize();
      CHECK(sectional_curvature(cf, {p, a, b}) < 0.0);
    }
  }

  SUBCASE("exponential factor closed form on coordinate planes") {
    // f = e^{cz}: K of planes not containing z is -c^2 f^2
    const double c = 0.8;
    const ConformalFactor cf = make_cf("exp(0.8*z)", 3);
    Eigen::VectorXd p(4);
    p << 0.1, 0.2, 0.3, 0.4;
    const double expected = -c * c * std::exp(2.0 * c * p[3]);
    CHECK(sectional_curvature(cf, coordinate_plane(p, 0, 1)) ==
          doctest::Approx(expected));
    CHECK(sectional_curvature(cf, coordinate_plane(p, 1, 2)) ==
          doctest::Approx(expected));
    // cross-check against the Riemann-tensor oracle
    const double fd = sectional_bruteforce(conformal_metric(cf), p,
                                           Eigen::VectorXd::Unit(4, 0),
                                           Eigen::VectorXd::Unit(4, 1));
    CHECK(std::abs(fd - expected) < 1e-5);
  }

  SUBCASE("invariant under rotations of the spanning pair") {
    const ConformalFactor cf = make_cf("(x1+2*z+3)^(0.4)", 3);
    std::mt19937_64 rng(47);
    for (int trial = 0; trial < 50; ++trial) {
      const Eigen::VectorXd p = testgen::random_point(rng, 4);
      Eigen::VectorXd a(4), b(4);
      for (int i = 0; i < 4; ++i) {
        a[i] = std::uniform_real_distribution<double>(-1, 1)(rng);
        b[i] = std::uniform_real_distribution<double>(-1, 1)(rng);
      }
      a.normalize();
      b -= b.dot(a) * a;
      b.normalize();
      const double k0 = sectional_curvature(cf, {p, a, b});
      CHECK(std::abs(sectional_curvature(cf, {p, b, a}) - k0) < 1e-10);
      const double theta = std::uniform_real_distribution<double>(0, 6.28)(rng);
      const Eigen::VectorXd ar = std::cos(theta) * a + std::sin(theta) * b;
      const Eigen::VectorXd br = -std::sin(theta) * a + std::cos(theta) * b;
      CHECK(std::abs(sectional_curvature(cf, {p, ar, br}) - k0) < 1e-10);
    }
  }

  SUBCASE("matches the brute-force oracle on random factors") {
    std::mt19937_64 rng(53);
    for (int trial = 0; trial < 20; ++trial) {
      const int n = 3 + trial % 3;
      const CoordinateSystem cs = CoordinateSystem::ambient(n - 1);
      const ConformalFactor cf(testgen::random_positive_factor(rng, n), cs, {});
      const Eigen::VectorXd p = testgen::random_point(rng, n);
      Eigen::VectorXd a(n), b(n);
      for (int i = 0; i < n; ++i) {
        a[i] = std::uniform_real_distribution<double>(-1, 1)(rng);
        b[i] = std::uniform_real_distribution<double>(-1, 1)(rng);
      }
      a.normalize();
      b -= b.dot(a) * a;
      if (b.norm() < 1e-3) continue;
      b.normalize();
      const double sym = sectional_curvature(cf, {p, a, b});
      const double fd = sectional_bruteforce(conformal_metric(cf), p, a, b);
      CHECK(std::abs(sym - fd) < 1e-5 * (1.0 + std::abs(sym)));
    }
  }

  SUBCASE("degenerate sections are rejected") {
    const ConformalFactor cf = make_cf("z", 3);
    Eigen::VectorXd p = Eigen::VectorXd::Ones(4);
    PlaneSection bad;
    bad.point = p;
    bad.a = Eigen::VectorXd::Unit(4, 0);
    bad.b = Eigen::VectorXd::Unit(4, 0);  // parallel
    CHECK_THROWS_AS(sectional_curvature(cf, bad), InvalidInput);
    bad.b = 0.5 * Eigen::VectorXd::Unit(4, 1);  // not unit
    CHECK_THROWS_AS(sectional_curvature(cf, bad), InvalidInput);
  }
}

TEST_CASE("curvature scanner") {
  SUBCASE("constant curvature box") {
    const ConformalFactor cf = make_cf("z", 2);
    DomainBox box;
    box.lower = Eigen::VectorXd::Zero(3);
    box.upper = Eigen::VectorXd::Ones(3);
    box.lower[2] = 1.0;
    box.upper[2] = 2.0;
    const CurvatureReport r = scan_sectional_curvature(cf, box, 200, 7);
    CHECK(r.min_k == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(r.max_k == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(r.nonnegative_count == 0);
    CHECK(r.worst.size() == 5);
  }

  SUBCASE("flat factor gives zero curvature") {
    const ConformalFactor cf = make_cf("2", 2);
    DomainBox box;
    box.lower = Eigen::VectorXd::Zero(3);
    box.upper = Eigen::VectorXd::Ones(3);
    const CurvatureReport r = scan_sectional_curvature(cf, box, 50, 3);
    CHECK(std::abs(r.min_k) < 1e-14);
    CHECK(std::abs(r.max_k) < 1e-14);
  }

  SUBCASE("deterministic for a fixed seed") {
    const ConformalFactor cf = make_cf("(x1+x2+2*z+3)^(0.5)", 2);
    DomainBox box;
    box.lower = Eigen::VectorXd::Zero(3);
    box.upper = Eigen::VectorXd::Ones(3);
    const CurvatureReport r1 = scan_sectional_curvature(cf, box, 100, 99);
    const CurvatureReport r2 = scan_sectional_curvature(cf, box, 100, 99);
    CHECK(r1.min_k == r2.min_k);
    CHECK(r1.max_k == r2.max_k);
    CHECK(r1.mean_k == r2.mean_k);
    REQUIRE(r1.worst.size() == r2.worst.size());
    for (std::size_t i = 0; i < r1.worst.size(); ++i) {
      CHECK(r1.worst[i].k == r2.worst[i].k);
      CHECK(r1.worst[i].point == r2.worst[i].point);
    }
    CHECK(r1.min_k <= r1.mean_k);
    CHECK(r1.mean_k <= r1.max_k);
    // different seed, different samples
    const CurvatureReport r3 = scan_sectional_curvature(cf, box, 100, 100);
    CHECK(r3.mean_k != r1.mean_k);
  }

  SUBCASE("power family factor scans strictly negative") {
    const ConformalFactor cf = make_cf("(x1+x2+x3+x4+2*z+3)^(0.4)", 4);
    DomainBox box;
    box.lower = Eigen::VectorXd::Zero(5);
    box.upper = Eigen::VectorXd::Ones(5);
    const CurvatureReport r = scan_sectional_curvature(cf, box, 1000, 17);
    CHECK(r.max_k < 0.0);
    CHECK(r.nonnegative_count == 0);
  }

  SUBCASE("region exhausted when the box is singular") {
    const ConformalFactor cf = make_cf("z", 2);  // f <= 0 on the whole box
    DomainBox box;
    box.lower = Eigen::VectorXd::Constant(3, -2.0);
    box.upper = Eigen::VectorXd::Constant(3, -1.0);
    CHECK_THROWS_AS(scan_sectional_curvature(cf, box, 10, 1), RegionExhausted);
  }
}
