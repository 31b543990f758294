#include <doctest.h>

#include <cmath>
#include <random>

#include <unsupported/Eigen/MatrixFunctions>

#include "oscillant/flow.hpp"

using namespace osc;

namespace {

InteractionMatrix scalar_pair(double mu1, double mu2, cd b12, cd b21, double eps) {
  InteractionMatrix m;
  m.mu1 = mu1;
  m.mu2 = mu2;
  m.b12 = MatC::Constant(1, 1, b12);
  m.b21 = MatC::Constant(1, 1, b21);
  m.epsilon = eps;
  return m;
}

}  // namespace

TEST_CASE("assembled matrix layout") {
  InteractionMatrix m = scalar_pair(0.3, -0.2, 2.0, 0.5, 0.04);
  m.extra_diag = {1.5};
  MatC M = m.assemble();
  REQUIRE(M.rows() == 3);
  CHECK(std::abs(M(0, 0) - cd(0, 0.3)) < 1e-15);
  CHECK(std::abs(M(1, 1) - cd(0, -0.2)) < 1e-15);
  CHECK(std::abs(M(0, 1) - (-0.2 * 2.0)) < 1e-15);
  CHECK(std::abs(M(1, 0) - (-0.2 * 0.5)) < 1e-15);
  CHECK(std::abs(M(2, 2) - cd(0, 1.5)) < 1e-15);
}

TEST_CASE("closed-form spectrum of the 2x2 block") {
  // eigenvalues of [[i a, -s p], [-s q, i b]]: i(a+b)/2 +- sqrt(s^2 p q - (a-b)^2/4)
  const double a = 0.7, b = 0.1, s = 0.3;
  const cd p(1.0, 0.5), q(0.4, -0.2);
  InteractionMatrix m = scalar_pair(a, b, p, q, s * s);
  auto sp = flow_spectrum(m);
  const cd root = std::sqrt(s * s * p * q - cd((a - b) * (a - b) / 4.0));
  std::vector<cd> want = {cd(0, (a + b) / 2) + root, cd(0, (a + b) / 2) - root};
  CHECK(spectrum_mismatch(sp, want) < 1e-14);
}

TEST_CASE("higher-rank products are rejected") {
  InteractionMatrix m;
  m.b12 = MatC::Identity(2, 2);
  m.b21 = MatC::Identity(2, 2);
  CHECK_THROWS_AS(flow_spectrum(m), NotApplicableError);
}

TEST_CASE("regime boundary") {
  InteractionMatrix m = scalar_pair(0.0, 0.0, 2.0, 2.0, 0.01);
  CHECK(regime_boundary(m) == doctest::Approx(2.0 * std::sqrt(0.01 * 4.0)));
  InteractionMatrix n = scalar_pair(0.0, 0.0, 2.0, -2.0, 0.01);
  CHECK(std::isnan(regime_boundary(n)));
}

TEST_CASE("autonomous flow equals the matrix exponential") {
  InteractionMatrix m = scalar_pair(0.2, 0.1, cd(1.0, 0.3), cd(0.8, -0.1), 1e-2);
  FlowTrajectory tr = integrate_flow([&](double) { return m; }, 0.0, 1.0, 0.0, true);
  const MatC want = (-m.assemble() / std::sqrt(m.epsilon)).exp();
  CHECK((tr.S0.back() - want).norm() / want.norm() < 1e-10);
  CHECK(tr.liouville_residual < 1e-8);
}

TEST_CASE("time-dependent flow converges under step refinement") {
  auto mt = [](double t) { return scalar_pair(0.3 * t, -0.1, cd(1.0, 0.0), cd(1.0, 0.0), 0.04); };
  FlowTrajectory a = integrate_flow(mt, 0.0, 2.0, 2e-3);
  FlowTrajectory b = integrate_flow(mt, 0.0, 2.0, 1e-3);
  FlowTrajectory c = integrate_flow(mt, 0.0, 2.0, 5e-4);
  const double e1 = (a.S0.back() - c.S0.back()).norm(), e2 = (b.S0.back() - c.S0.back()).norm();
  CHECK(e2 < e1);
  CHECK(e2 / c.S0.back().norm() < 1e-5);
}

TEST_CASE("oversized steps are refused") {
  InteractionMatrix m = scalar_pair(1.0, 0.0, 1.0, 1.0, 1e-4);
  CHECK_THROWS_AS(integrate_flow([&](double) { return m; }, 0.0, 1.0, 0.5), InputError);
}

TEST_CASE("growth rate of the resonant flow") {
  InteractionMatrix m = scalar_pair(0.0, 0.0, cd(0.6, 0.0), cd(0.6, 0.0), 1e-2);
  FlowTrajectory tr = integrate_flow([&](double) { return m; }, 0.0, 20.0, 0.0, true);
  // -M / sqrt(eps) = [[0, 0.6], [0.6, 0]]: sup|S0| grows like cosh(0.6 t)
  CHECK(tr.fitted_rate == doctest::Approx(0.6).epsilon(0.02));
}

TEST_CASE("smooth cutoff") {
  CHECK(smooth_cutoff(0.0, 1.0, 2.0) == 1.0);
  CHECK(smooth_cutoff(-0.9, 1.0, 2.0) == 1.0);
  CHECK(smooth_cutoff(2.5, 1.0, 2.0) == 0.0);
  CHECK(smooth_cutoff(1.5, 1.0, 2.0) == doctest::Approx(0.5));
  CHECK(smooth_cutoff(-1.5, 1.0, 2.0) == doctest::Approx(0.5));
}

TEST_CASE("unstable datum spans the range of b12 b21") {
  VecC u(3), v(3), w(3);
  u << cd(0, 1), 2.0, cd(1, 1);
  v << 1.0, cd(0, -1), 0.5;
  w << 0.3, 1.0, cd(2, 0);
  const MatC b12 = u * v.adjoint(), b21 = v * w.adjoint();
  VecC e = unstable_datum_direction(b12, b21);
  CHECK(e.norm() == doctest::Approx(1.0));
  // parallel to u
  CHECK(std::abs(std::abs(u.normalized().dot(e)) - 1.0) < 1e-12);
  CHECK_THROWS_AS(unstable_datum_direction(MatC::Zero(3, 3), b21), NumericalError);
}

TEST_CASE("growth bound on a synthetic sampler") {
  auto sampler = [](double e) {
    std::vector<FlowSample> s;
    FlowSample near;
    near.m = scalar_pair(0.0, 0.0, 0.5, 0.5, e);
    s.push_back(near);
    FlowSample away;
    away.away = true;
    const double le = std::abs(std::log(e));
    away.m = scalar_pair(2.0 * std::sqrt(e) * le * le, 0.0, 0.5, 0.5, e);
    s.push_back(away);
    return s;
  };
  GrowthBoundReport r = verify_growth_bound({1e-2, 1e-3}, sampler, 0.5, 1.0);
  CHECK(r.pass);
  CHECK(r.N_star <= 1.0);
  auto j = to_json(r);
  CHECK(j["verdict"] == "pass");
}
