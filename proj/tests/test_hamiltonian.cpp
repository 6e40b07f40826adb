#include <catch2/catch_amalgamated.hpp>

#include "cflab/hamiltonian.hpp"
#include "cflab/scenarios.hpp"

using namespace cflab;

TEST_CASE("derived vector fields") {
  SECTION("sin system: hand solve of the 2x2 structure equation") {
    auto sc = build("sin2d");
    Rng rng(2);
    for (int i = 0; i < 20; ++i) {
      Vec x(2);
      x << rng.uniform01(), rng.uniform01();
      const Vec X = structure_solve_field(*sc.chart, x);
      CHECK(X[0] == Catch::Approx(kTwoPi * std::cos(kTwoPi * x[1])).margin(1e-12));
      CHECK(X[1] == Catch::Approx(std::sin(kTwoPi * x[1])).margin(1e-12));
      // installed fast path must agree with the solve
      CHECK((X - hamiltonian_vector_field(*sc.chart, x)).norm() <= 1e-12);
    }
  }

  SECTION("zero Hamiltonian gives the zero field") {
    Vec lee(2);
    lee << 0.4, -1.1;
    HamiltonianSystem sys;
    sys.model = flat_torus(1, lee);
    sys.H = [](const Vec&) { return 0.0; };
    sys.gradH = [](const Vec&) { return Vec(Vec::Zero(2)); };
    Vec x(2);
    x << 0.2, 0.9;
    CHECK(hamiltonian_vector_field(sys, x).norm() == 0.0);
  }

  SECTION("Lee fields have vanishing winding integrand and speed |eta|") {
    Vec lee(2);
    lee << 0.7, -0.4;
    HamiltonianSystem sys;
    sys.model = flat_torus(1, lee);
    sys.H = [](const Vec&) { return 1.0; };
    sys.gradH = [](const Vec&) { return Vec(Vec::Zero(2)); };
    Vec x(2);
    x << 0.5, 0.1;
    const Vec X = hamiltonian_vector_field(sys, x);
    CHECK(eta_of_X(sys, x) == Catch::Approx(0.0).margin(1e-14));
    CHECK(X.norm() == Catch::Approx(lee.norm()).margin(1e-14));
  }

  SECTION("defining identity on all bundled chart systems") {
    for (const char* name : {"sin2d", "lee2d", "cotangent_attractor"}) {
      auto sc = build(name);
      Rng rng(fnv1a64(name));
      for (int i = 0; i < 100; ++i) {
        const Vec x = sc.sample_point(rng);
        const Vec X = hamiltonian_vector_field(*sc.chart, x);
        const Vec lhs = sc.chart->model.omega(x).transpose() * X;
        const Vec rhs = d_eta_H(*sc.chart, x);
        const double budget = 1e-10 * (1.0 + sc.chart->gradH(x).norm());
        CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= budget);
      }
    }
  }

  SECTION("analytic gradients match finite differences") {
    for (const char* name : {"sin2d", "cotangent_attractor"}) {
      auto sc = build(name);
      auto fd = fd_gradient(sc.chart->H);
      Rng rng(fnv1a64(name) + 1);
      for (int i = 0; i < 25; ++i) {
        const Vec x = sc.sample_point(rng);
        CHECK((sc.chart->gradH(x) - fd(x)).cwiseAbs().maxCoeff() <= 1e-7);
      }
    }
  }

  SECTION("eta(X) values on the sin system") {
    auto sc = build("sin2d");
    Vec x(2);
    x << 0.3, 0.5;
    CHECK(eta_of_X(*sc.chart, x) == Catch::Approx(-kTwoPi).margin(1e-12));
    x[1] = 0.25;
    CHECK(eta_of_X(*sc.chart, x) == Catch::Approx(0.0).margin(1e-12));
  }

  SECTION("singular structure matrix raises") {
    HamiltonianSystem sys;
    Vec lee(2);
    lee << 0.0, 0.0;
    sys.model = flat_torus(1, lee);
    sys.model.omega = [](const Vec&) { return Mat(Mat::Zero(2, 2)); };
    sys.H = [](const Vec& x) { return x[0]; };
    sys.gradH = [](const Vec&) {
      Vec g(2);
      g << 1.0, 0.0;
      return g;
    };
    Vec x(2);
    x << 0.1, 0.1;
    CHECK_THROWS_AS(hamiltonian_vector_field(sys, x), StructureError);
  }
}

TEST_CASE("cotangent lift") {
  SECTION("zero covectors stay on the zero section; identity flow lifts to identity") {
    auto flow = [](const Vec& q, double t) { return Vec(q.array() + 0.0 * t); };
    auto jac = [](const Vec& q, double) { return Mat(Mat::Identity(q.size(), q.size())); };
    Vec beta(2);
    beta << 0.3, -0.8;
    auto beta_fn = [beta](const Vec&) { return beta; };
    Vec q(2), p0(2);
    q << 0.2, 0.7;
    p0 << 0.0, 0.0;
    auto lifted = cotangent_lift_flow(flow, jac, beta_fn, q, p0, 2.0);
    CHECK(lifted.p.norm() == 0.0);
    CHECK((lifted.q - q).norm() == 0.0);
    CHECK(lifted.winding == Catch::Approx(0.0).margin(1e-12));

    Vec p1(2);
    p1 << 0.4, -0.1;
    auto lifted2 = cotangent_lift_flow(flow, jac, beta_fn, q, p1, 3.0);
    CHECK((lifted2.p - p1).norm() <= 1e-12);
  }

  SECTION("lifted time-1 differential has the product multipliers") {
    auto sc = build("cotangent_attractor");
    const double kappa = sc.params.at("kappa"), r = sc.params.at("r");
    const double mu = std::exp(-kTwoPi * kappa);
    const double h = 1e-6;
    Mat J(4, 4);
    for (int k = 0; k < 4; ++k) {
      Vec zp = Vec::Zero(4), zm = Vec::Zero(4);
      zp[k] += h;
      zm[k] -= h;
      auto fp = cotangent_lift_flow(sc.base_flow, sc.base_jacobian, sc.base_beta, zp.head(2),
                                    zp.tail(2), 1.0);
      auto fm = cotangent_lift_flow(sc.base_flow, sc.base_jacobian, sc.base_beta, zm.head(2),
                                    zm.tail(2), 1.0);
      Vec d(4);
      d << fp.q - fm.q, fp.p - fm.p;
      J.col(k) = d / (2.0 * h);
    }
    Eigen::EigenSolver<Mat> es(J);
    Vec mods = es.eigenvalues().cwiseAbs();
    std::sort(mods.data(), mods.data() + 4);
    Vec expect(4);
    expect << std::exp(r), mu, std::exp(r) / mu, 1.0;
    std::sort(expect.data(), expect.data() + 4);
    for (int i = 0; i < 4; ++i) CHECK(mods[i] == Catch::Approx(expect[i]).margin(1e-6));
  }

  SECTION("winding accumulates the base integral of beta") {
    auto sc = build("cotangent_attractor");
    Vec q(2), p(2);
    q << 0.3, 0.1;
    p << 0.05, -0.02;
    auto lifted = cotangent_lift_flow(sc.base_flow, sc.base_jacobian, sc.base_beta, q, p, 2.5);
    // beta(X_base) = r identically for this scenario
    CHECK(lifted.winding == Catch::Approx(sc.params.at("r") * 2.5).margin(1e-9));
  }
}

TEST_CASE("contact Hamiltonian fields") {
  SECTION("H = 1 recovers the Reeb field") {
    auto sphere = contact_sphere_system(
        2, [](const Vec&) { return 1.0; }, [](const Vec&) { return Vec(Vec::Zero(4)); });
    Rng rng(4);
    for (int i = 0; i < 10; ++i) {
      Vec z = rng.unit_vector(4);
      const Vec X = contact_hamiltonian_vector_field(sphere, z);
      CHECK((X - sphere.reeb(z)).cwiseAbs().maxCoeff() <= 1e-10);
    }

    auto bundle = unit_torus_bundle_system(
        2, [](const Vec&) { return 1.0; }, [](const Vec&) { return Vec(Vec::Zero(4)); });
    for (int i = 0; i < 10; ++i) {
      Vec y(4);
      y << rng.uniform01(), rng.uniform01(), rng.unit_vector(2);
      const Vec X = contact_hamiltonian_vector_field(bundle, y);
      CHECK((X - bundle.reeb(y)).cwiseAbs().maxCoeff() <= 1e-10);
    }
  }

  SECTION("sphere quadratic Hamiltonian matches the projected linear field") {
    auto sc = build("sphere_legendrian");
    Rng rng(6);
    for (int i = 0; i < 20; ++i) {
      Vec z = rng.unit_vector(4);
      const Vec X = contact_hamiltonian_vector_field(*sc.contact, z);
      Vec V(4);
      V << z.tail(2), z.head(2);  // generator of the hyperbolic rotation
      const Vec expect = V - z.dot(V) * z;
      CHECK((X - expect).cwiseAbs().maxCoeff() <= 1e-10);
    }
  }

  SECTION("H = 0 gives the zero field") {
    auto sphere = contact_sphere_system(
        2, [](const Vec&) { return 0.0; }, [](const Vec&) { return Vec(Vec::Zero(4)); });
    Rng rng(8);
    Vec z = rng.unit_vector(4);
    CHECK(contact_hamiltonian_vector_field(sphere, z).cwiseAbs().maxCoeff() <= 1e-12);
  }

  SECTION("unsupported families are rejected") {
    auto sphere = contact_sphere_system(
        2, [](const Vec&) { return 1.0; }, [](const Vec&) { return Vec(Vec::Zero(4)); });
    sphere.family = "hyperboloid";
    Vec z = Vec::Unit(4, 0);
    CHECK_THROWS_AS(contact_hamiltonian_vector_field(sphere, z), NotImplementedError);
  }
}

TEST_CASE("symplectization lifts") {
  SECTION("Lee lift of the Reeb field carries beta(R) in the circle slot") {
    auto sc = build("lee_twisted");
    Rng rng(14);
    for (int i = 0; i < 10; ++i) {
      Vec z = sc.sample_point(rng);
      const Vec y = z.head(4);
      const Vec R = sc.contact->reeb(y);
      const Vec lift = symplectization_lift_field(R, 0.0, sc.base_beta(y));
      CHECK(lift.size() == 5);
      CHECK((lift.head(4) - R).norm() == 0.0);
      CHECK(lift[4] == Catch::Approx(sc.base_beta(y).dot(R)).margin(1e-14));
    }
  }

  SECTION("untwisted lifts use -dH.R in the circle slot") {
    Vec X(4);
    X << 1.0, 0.0, 0.0, 0.0;
    const Vec lift = symplectization_lift_field(X, 0.7, Vec(Vec::Zero(4)));
    CHECK(lift[4] == Catch::Approx(-0.7));
  }

  SECTION("the conservative nonexact system lifts to (1, 0, ..., 0)") {
    auto sc = build("nonexact_conservative");
    Rng rng(15);
    for (int i = 0; i < 10; ++i) {
      Vec z = sc.sample_point(rng);
      const Vec y = z.head(4);
      const Vec Xc = contact_hamiltonian_vector_field(*sc.contact, y);
      const Vec lift =
          symplectization_lift_field(Xc, sc.contact->reeb_pairing(y), sc.base_beta(y));
      Vec expect = Vec::Zero(5);
      expect[0] = 1.0;
      CHECK((lift - expect).cwiseAbs().maxCoeff() <= 1e-9);
    }
  }
}
