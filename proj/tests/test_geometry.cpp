#include <catch2/catch_amalgamated.hpp>

#include "cflab/geometry.hpp"

using namespace cflab;

TEST_CASE("flat torus structure matrices") {
  Vec lee(2);
  lee << 1.0, 0.0;
  auto m = flat_torus(1, lee);
  Vec x(2);
  x << 0.3, 0.8;
  REQUIRE(m.dim == 2);
  CHECK(m.eta(x)[0] == 1.0);
  CHECK(m.eta(x)[1] == 0.0);
  Mat Om = m.omega(x);
  CHECK(Om(0, 1) == 1.0);
  CHECK(Om(1, 0) == -1.0);
  CHECK(Om(0, 0) == 0.0);

  SECTION("zero Lee form is the symplectic case") {
    auto m0 = flat_torus(1, Vec(Vec::Zero(2)));
    CHECK(m0.eta(x).norm() == 0.0);
  }

  SECTION("dim-4 block structure has unit determinant") {
    Vec lee4(4);
    lee4 << 0.7, 0.0, -1.3, 0.0;
    auto m4 = flat_torus(2, lee4);
    Vec x4 = Vec::Zero(4);
    CHECK(m4.omega(x4).determinant() == Catch::Approx(1.0).margin(1e-14));
  }

  SECTION("invalid dimension") {
    CHECK_THROWS_AS(flat_torus(0, Vec(Vec::Zero(0))), ConfigError);
    CHECK_THROWS_AS(flat_torus(1, Vec(Vec::Zero(3))), ConfigError);
  }
}

TEST_CASE("conformal cotangent torus") {
  SECTION("zero beta gives the standard symplectic form") {
    auto m = conformal_cotangent_torus(2, Vec(Vec::Zero(2)), 1.0);
    Vec x(4);
    x << 0.1, 0.2, 0.3, -0.4;
    Mat Om = m.omega(x);
    Mat expect = Mat::Zero(4, 4);
    expect(0, 2) = expect(1, 3) = 1.0;
    expect(2, 0) = expect(3, 1) = -1.0;
    CHECK((Om - expect).cwiseAbs().maxCoeff() == 0.0);
  }

  SECTION("n=1 correction vanishes") {
    Vec b1(1);
    b1 << 0.8;
    auto m = conformal_cotangent_torus(1, b1, 0.5);
    Vec x(2);
    x << 0.4, 0.2;
    Mat Om = m.omega(x);
    CHECK(Om(0, 1) == 1.0);
    CHECK(Om(1, 0) == -1.0);
  }

  SECTION("dq_1 dq_2 entry is beta_1 p_2 - beta_2 p_1") {
    Vec b(2);
    b << 1.0, 0.0;
    auto m = conformal_cotangent_torus(2, b, 1.0);
    Vec x(4);
    x << 0.0, 0.0, 0.0, 0.5;  // p = (0, 0.5)
    CHECK(m.omega(x)(0, 1) == Catch::Approx(0.5));
  }

  SECTION("structure invariants at random points") {
    Vec b(2);
    b << -1.0, 0.3;
    auto m = conformal_cotangent_torus(2, b, 0.5);
    Rng rng(5);
    for (int i = 0; i < 100; ++i) {
      Vec x(4);
      x << rng.uniform01(), rng.uniform01(), rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5);
      Mat Om = m.omega(x);
      CHECK((Om + Om.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
      CHECK(std::abs(Om.determinant()) >= 1e-8);
    }
  }
}

TEST_CASE("d_eta closure check") {
  Vec b(2);
  b << -1.0, 0.3;
  auto m = conformal_cotangent_torus(2, b, 0.5);
  Rng rng(17);
  auto draw = [&] {
    Vec x(4);
    x << rng.uniform01(), rng.uniform01(), rng.uniform(-0.4, 0.4), rng.uniform(-0.4, 0.4);
    return x;
  };

  SECTION("analytic families are eta-closed to FD accuracy") {
    const double h = 1e-4;
    for (int i = 0; i < 50; ++i) {
      Vec x = draw();
      CHECK(d_eta_closure_check(m, x, h) <= 1.0 * h * h);  // entries linear in p: ~roundoff
    }
    Vec lee4(4);
    lee4 << 1.0, 0.0, std::sqrt(2.0), 0.0;
    auto flat = flat_torus(2, lee4);
    Vec x4(4);
    x4 << 0.1, 0.9, 0.4, 0.7;
    CHECK(d_eta_closure_check(flat, x4, h) < 1e-10);
  }

  SECTION("dim-2 charts have no triples") {
    Vec lee(2);
    lee << 1.0, 0.0;
    auto flat = flat_torus(1, lee);
    Vec x(2);
    x << 0.3, 0.4;
    CHECK(d_eta_closure_check(flat, x, 1e-4) == 0.0);
  }

  SECTION("perturbed structure fails as a negative control") {
    ConformalModel bad = m;
    auto base = m.omega;
    bad.omega = [base](const Vec& x) {
      Mat Om = base(x);
      const double w = 0.05 * std::sin(kTwoPi * x[1]);
      Om(0, 2) += w;
      Om(2, 0) -= w;
      return Om;
    };
    double worst = 0.0;
    for (int i = 0; i < 50; ++i) {
      Vec x = draw();
      worst = std::max(worst, d_eta_closure_check(bad, x, 1e-4) / closure_tolerance(bad, x));
    }
    CHECK(worst > 1.0);
  }

  SECTION("boundary points raise a domain error") {
    Vec x(4);
    x << 0.1, 0.2, 0.5, 0.0;  // p_1 on the box edge
    CHECK_THROWS_AS(d_eta_closure_check(m, x, 1e-4), DomainError);
  }
}

TEST_CASE("twisted symplectization unit torus flow") {
  SECTION("n=1 specialization") {
    Vec a(1);
    a << 0.7;
    auto m = twisted_symplectization_unit_torus(1, a);
    Vec z(3);
    z << 0.2, 1.0, 0.1;
    Vec zt = m.flow(z, 2.5);
    CHECK(zt[0] == Catch::Approx(0.2 + 2.5));
    CHECK(zt[1] == 1.0);
    CHECK(zt[2] == Catch::Approx(0.1 + 0.7 * 2.5));
    Vec zm(3);
    zm << 0.2, -1.0, 0.1;
    Vec ztm = m.flow(zm, 2.5);
    CHECK(ztm[0] == Catch::Approx(0.2 - 2.5));
    CHECK(ztm[2] == Catch::Approx(0.1 - 0.7 * 2.5));
    CHECK(m.winding(z, 7.0) == 0.0);
  }

  SECTION("t=0 is the identity and a=0 freezes theta") {
    Vec a = Vec::Zero(2);
    auto m = twisted_symplectization_unit_torus(2, a);
    Rng rng(3);
    Vec z(5);
    z << 0.1, 0.7, rng.unit_vector(2), 0.33;
    CHECK((m.flow(z, 0.0) - z).norm() == 0.0);
    CHECK(m.flow(z, 13.7)[4] == Catch::Approx(0.33));
  }

  SECTION("group law on random points") {
    Vec a(2);
    a << std::sqrt(2.0), std::sqrt(3.0);
    auto m = twisted_symplectization_unit_torus(2, a);
    Rng rng(11);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      Vec z(5);
      z << rng.uniform01(), rng.uniform01(), rng.unit_vector(2), rng.uniform01();
      const double s = rng.uniform(-3, 3), t = rng.uniform(-3, 3);
      worst = std::max(worst,
                       chart_distance(m.flow(m.flow(z, s), t), m.flow(z, s + t), m.angular));
    }
    CHECK(worst <= 1e-10);
  }

  SECTION("non-unit direction vectors are normalized") {
    Vec a(2);
    a << 1.0, 0.0;
    auto m = twisted_symplectization_unit_torus(2, a);
    Vec z(5);
    z << 0.0, 0.0, 2.0, 0.0, 0.0;
    CHECK(m.sanitize(z));
    CHECK(z[2] == Catch::Approx(1.0));
    CHECK_FALSE(m.sanitize(z));
  }
}

TEST_CASE("nonexact conservative model") {
  auto m = nonexact_conservative_model(2);
  Rng rng(9);
  Vec z(5);
  z << 0.3, 0.6, rng.unit_vector(2), 0.8;
  CHECK((m.flow(z, 0.0) - z).norm() == 0.0);
  const double H0 = m.H(z);
  for (double t : {0.5, 3.0, 17.0, -4.0}) {
    Vec zt = m.flow(z, t);
    CHECK(m.H(zt) == H0);  // H = p_1 constant along every orbit
    CHECK(m.winding(z, t) == 0.0);
    CHECK(zt[0] == Catch::Approx(0.3 + t));
  }
}

TEST_CASE("contact sphere model") {
  auto m = contact_sphere_model(2);
  Rng rng(23);

  SECTION("L+ is invariant") {
    for (int i = 0; i < 20; ++i) {
      Vec x = rng.unit_vector(2);
      Vec z(4);
      z << x, x;
      z /= z.norm();
      for (double t : {0.3, 2.0, 10.0, -5.0})
        CHECK(sphere_dist_to_L_plus(m.flow(z, t)) <= 1e-12);
    }
  }

  SECTION("t=0 identity, points with y=0 converge to the diagonal") {
    Vec x = rng.unit_vector(2);
    Vec z(4);
    z << x, 0.0, 0.0;
    CHECK((m.flow(z, 0.0) - z).norm() <= 1e-15);
    Vec far = m.flow(z, 30.0);
    Vec limit(4);
    limit << x, x;
    limit /= limit.norm();
    CHECK((far - limit).norm() <= 1e-12);
  }

  SECTION("group law including mixed signs") {
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      Vec z = rng.unit_vector(4);
      const double s = rng.uniform(-3, 3), t = rng.uniform(-3, 3);
      worst = std::max(worst, (m.flow(m.flow(z, s), t) - m.flow(z, s + t)).norm());
    }
    CHECK(worst <= 1e-10);
  }

  SECTION("winding matches the direct norm formula at moderate times") {
    for (int i = 0; i < 20; ++i) {
      Vec z = rng.unit_vector(4);
      const double t = rng.uniform(-2.0, 2.0);
      Vec phi(4);
      phi.head(2) = std::cosh(t) * z.head(2) + std::sinh(t) * z.tail(2);
      phi.tail(2) = std::sinh(t) * z.head(2) + std::cosh(t) * z.tail(2);
      CHECK(m.winding(z, t) == Catch::Approx(-2.0 * std::log(phi.norm())).margin(1e-12));
    }
  }

  SECTION("needs n >= 2 and nonzero points") {
    CHECK_THROWS_AS(contact_sphere_model(1), ConfigError);
    Vec zero = Vec::Zero(4);
    CHECK_THROWS_AS(m.flow(zero, 1.0), DomainError);
  }
}
