#include <doctest.h>

#include <cmath>

#include "oscillant/catalog.hpp"
#include "oscillant/resonance.hpp"

using namespace osc;

namespace {

ResonanceReport scan(const CatalogSystem& c, double hw, int points, SpectralField* out = nullptr) {
  VecR lo = VecR::Constant(1, -hw), hi = VecR::Constant(1, hw);
  SpectralField f = resonance_field(c.spec, c.phase, lo, hi, points);
  ResonanceReport r = find_resonances(f, c.phase, lo, hi);
  if (out) *out = f;
  return r;
}

int branch_with_slope(const SpectralField& f, double c) {
  BranchPoint bp = evaluate_branches(f, 1.0);
  for (int j = 0; j < f.J; ++j)
    if (std::abs(bp.lambda[j] - c) < 1e-12) return j;
  return -1;
}

}  // namespace

TEST_CASE("three-wave with a travelling phase: linear resonance roots") {
  // lambda_i = c_i xi; phase c_a (xi + k) - omega - c_b xi vanishes at (omega - c_a k) / (c_a - c_b)
  CatalogSystem c = build_catalog_system("three-wave");
  c.phase = make_phase(0.5, 1.0);  // on the second branch: omega = c2 k
  REQUIRE(is_characteristic(c.spec, c.phase));
  SpectralField f;
  ResonanceReport r = scan(c, 6.0, 601, &f);
  const std::vector<double> cs = {1.0, 0.5, -0.5};
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      const int ia = branch_with_slope(f, cs[a]), ib = branch_with_slope(f, cs[b]);
      const PairResonance* p = r.find(ia, ib);
      if (a == b) {
        // phase c_a k - omega is constant: empty unless it vanishes identically
        if (cs[a] * 1.0 == 0.5) {
          REQUIRE(p);
          CHECK(p->continuum);
        } else {
          CHECK(p == nullptr);
        }
        continue;
      }
      const double root = (0.5 - cs[a] * 1.0) / (cs[a] - cs[b]);
      if (std::abs(root) < 6.0 - 0.1) {
        REQUIRE(p);
        REQUIRE(p->roots.size() == 1);
        CHECK(p->roots[0](0) == doctest::Approx(root).epsilon(1e-10));
      }
    }
}

TEST_CASE("characteristic test") {
  CatalogSystem c = build_catalog_system("kg-equal");
  CHECK(is_characteristic(c.spec, c.phase));
  Phase off = c.phase;
  off.omega += 0.1;
  CHECK_FALSE(is_characteristic(c.spec, off));
  CHECK(characteristic_defect(c.spec, off) > 1e-3);
}

TEST_CASE("kg harmonics are -1, 0, 1") {
  CatalogSystem c = build_catalog_system("kg-equal");
  CHECK(characteristic_harmonics(c.spec, c.phase, 4) == std::vector<int>{-1, 0, 1});
}

TEST_CASE("kg resonant pairs and the bounded verdict") {
  CatalogSystem c = build_catalog_system("kg-equal");
  const double hw = default_window_halfwidth(c.spec, c.phase);
  CHECK(hw >= 8.0);
  ResonanceReport r = scan(c, hw, 2048);
  CHECK(r.bounded_verdict == "bounded");
  for (const auto& p : r.pairs) {
    CHECK_FALSE(p.continuum);
    for (double res : p.residuals) CHECK(res <= 1e-8);
  }
}

TEST_CASE("window must be covered") {
  CatalogSystem c = build_catalog_system("kg-equal");
  VecR lo = VecR::Constant(1, -2.0), hi = VecR::Constant(1, 2.0);
  SpectralField f = resonance_field(c.spec, c.phase, lo, hi, 101);
  VecR wide = VecR::Constant(1, 50.0);
  CHECK_THROWS_AS(find_resonances(f, c.phase, -wide, wide), RangeError);
}

TEST_CASE("field grid hits translates by k") {
  CatalogSystem c = build_catalog_system("kg-diff");
  VecR lo = VecR::Constant(1, -3.0), hi = VecR::Constant(1, 3.0);
  SpectralField f = resonance_field(c.spec, c.phase, lo, hi, 257);
  int hits = 0;
  for (std::size_t m = 0; m < f.size(); ++m)
    if (f.covers(VecR(f.grid[m] + c.phase.k)) && f.locate(VecR(f.grid[m] + c.phase.k)) >= 0) ++hits;
  CHECK(hits > 200);
}

TEST_CASE("em dispersion closed forms") {
  EMParams p{0.7, 0.02, 1.3};
  for (double k : {0.1, 1.0, 3.0}) {
    const double wt = std::sqrt(em_omega_t2(p, k));
    CHECK(em_transverse_residual(p, wt, k) < 1e-14);
    auto [ws, wl] = em_longitudinal_w(p, k);
    CHECK(em_longitudinal_residual(p, std::sqrt(ws), k) < 1e-12);
    CHECK(em_longitudinal_residual(p, std::sqrt(wl), k) < 1e-12);
    CHECK(ws < wl);
  }
  // large-k slopes theta_e and alpha theta_i
  auto [ws, wl] = em_longitudinal_w(p, 1e4);
  CHECK(std::sqrt(wl) / 1e4 == doctest::Approx(0.7).epsilon(1e-4));
  CHECK(std::sqrt(ws) / 1e4 == doctest::Approx(1.3 * 0.02).epsilon(1e-3));
}

TEST_CASE("phase matching on the acoustic branch") {
  auto m = match_phases_on_dispersion("euler-maxwell-longitudinal-s", {{"theta_e", 0.5}}, 1.5);
  REQUIRE_FALSE(m.empty());
  EMParams p{0.5, 1e-2, 1.0};
  for (const auto& q : m) {
    CHECK(q.k == doctest::Approx(q.k1 + q.k2));
    CHECK(q.omega == doctest::Approx(q.omega1 + q.omega2));
    CHECK(em_transverse_residual(p, q.omega1, q.k1) < 1e-10);
    CHECK(em_transverse_residual(p, q.omega2, q.k2) < 1e-10);
  }
  CHECK_THROWS_AS(match_phases_on_dispersion("nope", {}, 1.0), InputError);
}

TEST_CASE("resonance report JSON") {
  CatalogSystem c = build_catalog_system("kg-equal");
  ResonanceReport r = scan(c, 20.0, 512);
  auto j = to_json(r);
  CHECK(j.contains("pairs"));
  CHECK(j["bounded_verdict"] == r.bounded_verdict);
}
