#include <doctest.h>

#include <cmath>

#include "oscillant/catalog.hpp"
#include "oscillant/wkb.hpp"

using namespace osc;

TEST_CASE("partial inverse inverts L off its kernel") {
  for (std::string id : {"kg-equal", "kg-diff"}) {
    CatalogSystem c = build_catalog_system(id);
    const MatC I = MatC::Identity(c.spec.N, c.spec.N);
    for (int p = -2; p <= 2; ++p) {
      MatC L = characteristic_matrix(c.spec, c.phase, p);
      MatC P = characteristic_projector(c.spec, c.phase, p);
      MatC R = partial_inverse(c.spec, c.phase, p);
      CHECK((R * L - (I - P)).norm() < 1e-12);
      CHECK((L * R - (I - P)).norm() < 1e-12);
      CHECK((P * P - P).norm() < 1e-12);
      CHECK((L * P).norm() < 1e-12);
      // L is skew-hermitian
      CHECK((L + L.adjoint()).norm() < 1e-12);
    }
  }
}

TEST_CASE("kernel dimensions at the harmonics") {
  CatalogSystem c = build_catalog_system("kg-equal");
  auto rank = [&](int p) { return characteristic_projector(c.spec, c.phase, p).trace().real(); };
  CHECK(rank(1) == doctest::Approx(1.0));
  CHECK(rank(-1) == doctest::Approx(1.0));
  CHECK(rank(2) == doctest::Approx(0.0).epsilon(1e-12));
  // zero harmonic: the transverse slots of both fields
  CHECK(rank(0) == doctest::Approx(2.0));
  PolarizationVectors pol = polarization_vectors(c.spec, c.phase);
  MatC P1 = characteristic_projector(c.spec, c.phase, 1);
  CHECK((P1 * pol.e1 - pol.e1).norm() < 1e-12);
}

TEST_CASE("weak transparency") {
  CatalogSystem c = build_catalog_system("kg-equal");
  WeakTransparencyResult w = weak_transparency_check(c.spec, c.phase);
  CHECK(w.pass);
  SystemSpec bad = c.spec;
  bad.B.push_back({0, 1, 1, 1.0});
  WeakTransparencyResult wb = weak_transparency_check(bad, c.phase);
  CHECK_FALSE(wb.pass);
  // witness: the projected source is nonzero on it
  CHECK(wb.max_norm > 1e-3);
  CHECK(wb.witness_u.size() == bad.N);
  CatalogSystem z = build_catalog_system("three-wave");
  CHECK_THROWS_AS(weak_transparency_check(z.spec, z.phase), NotApplicableError);
}

TEST_CASE("transport has the closed-form solution") {
  for (std::string id : {"kg-equal", "kg-diff"}) {
    CatalogSystem c = build_catalog_system(id);
    PolarizationVectors pol = polarization_vectors(c.spec, c.phase);
    const double T = 1.5, L = 40.0;
    WKBSolution w = solve_transport(c.spec, c.phase, pol, [](double x) { return cd(std::exp(-x * x)); }, T, L, 512);
    // group velocity of the branch through beta
    const double th = c.params.at("theta0"), kk = c.phase.k(0);
    const double v = id == "kg-equal" ? kk / c.phase.omega : th * th * kk / c.phase.omega;
    CHECK(w.group_velocity == doctest::Approx(v).epsilon(1e-6));
    CHECK(std::abs(w.cubic.real()) < 1e-12);
    double err = 0.0;
    for (std::size_t i = 0; i < w.x.size(); ++i) {
      double y = w.x[i] - v * T;
      y -= L * std::round(y / L);
      const double a = std::exp(-y * y);
      err = std::max(err, std::abs(a * std::exp(w.cubic * a * a * T) - w.g.back()[i]));
    }
    CHECK(err < 1e-7);
    CHECK(w.t.back() == doctest::Approx(T));
  }
}

TEST_CASE("non-oscillating reference for three-wave") {
  CatalogSystem c = build_catalog_system("three-wave");
  PolarizationVectors pol = polarization_from(c.spec, c.phase, *c.e_bar);
  WKBSolution w = solve_transport(c.spec, c.phase, pol, [](double x) { return cd(std::exp(-x * x)); }, 1.0, 40.0, 256);
  CHECK_FALSE(w.oscillating);
  CHECK(w.cubic == cd(0.0));
  CHECK(w.group_velocity == doctest::Approx(1.0));
  ResidualFit f = consistency_residual(w, c.spec, {1e-2, 1e-3}, false);
  for (double r : f.residual_sup) CHECK(r < 1e-10);
}

TEST_CASE("transport input checks") {
  CatalogSystem c = build_catalog_system("kg-equal");
  PolarizationVectors pol = polarization_vectors(c.spec, c.phase);
  auto a = [](double x) { return cd(std::exp(-x * x)); };
  CHECK_THROWS_AS(solve_transport(c.spec, c.phase, pol, a, 1.0, 40.0, 100), InputError);
  CatalogSystem two = build_catalog_system("kg-equal", {{"d", 2.0}});
  CHECK_THROWS_AS(solve_transport(two.spec, two.phase, polarization_vectors(two.spec, two.phase), a, 1.0, 40.0, 64),
                  NotApplicableError);
}

TEST_CASE("corrector lifts the residual order by one half") {
  CatalogSystem c = build_catalog_system("kg-equal");
  PolarizationVectors pol = polarization_vectors(c.spec, c.phase);
  WKBSolution w = solve_transport(c.spec, c.phase, pol, [](double x) { return cd(std::exp(-x * x)); }, 0.5, 40.0, 256);
  ResidualFit lead = consistency_residual(w, c.spec, {1e-2, 1e-3}, false);
  ResidualFit corr = consistency_residual(w, c.spec, {1e-2, 1e-3}, true);
  CHECK(lead.order == doctest::Approx(-0.5).epsilon(0.1));
  CHECK(corr.order - lead.order == doctest::Approx(0.5).epsilon(0.1));
  // the corrector solves L(2i beta) w2 = B(e1, e1)
  MatC L2 = characteristic_matrix(c.spec, c.phase, 2);
  CHECK((L2 * w.w2 - bilinear(c.spec, w.e1, w.e1)).norm() < 1e-10);
  CHECK_THROWS_AS(consistency_residual(w, c.spec, {1e-2}, false), InputError);
}

TEST_CASE("csv layout") {
  CatalogSystem c = build_catalog_system("kg-equal");
  PolarizationVectors pol = polarization_vectors(c.spec, c.phase);
  WKBSolution w = solve_transport(c.spec, c.phase, pol, [](double x) { return cd(std::exp(-x * x)); }, 0.2, 20.0, 64, 3);
  std::string csv = wkb_csv(w);
  CHECK(csv.rfind("t,x,re_g,im_g\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 3 * 64);
}
