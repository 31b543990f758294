#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "oscillant/interaction.hpp"

namespace osc {

// L(i p beta) = -i p omega + A0 + i A(p k) = i (H(p k) - p omega)
MatC characteristic_matrix(const SystemSpec& spec, const Phase& phase, int p);
// orthogonal projector onto ker L(i p beta)
MatC characteristic_projector(const SystemSpec& spec, const Phase& phase, int p);
// inverse on ran L(i p beta), zero on the kernel
MatC partial_inverse(const SystemSpec& spec, const Phase& phase, int p);

struct WeakTransparencyResult {
  bool pass = true;
  double max_norm = 0.0;
  double scale = 1.0;
  int witness_p = 0;
  VecC witness_u, witness_v;
};

// Pi(p beta) sum_{p1+p2=p} B(Pi(p1 beta) u, Pi(p2 beta) v) over p in {-1,0,1}
WeakTransparencyResult weak_transparency_check(const SystemSpec& spec, const Phase& phase, int random_samples = 32,
                                               std::uint64_t seed = 1);

struct WKBSolution {
  Phase phase;
  bool oscillating = true;
  VecC e1, em1;
  double group_velocity = 0.0;
  cd cubic = 0.0;  // c3 in g_t + v g_x = c3 |g|^2 g
  double L = 0.0;  // periodic domain [-L/2, L/2)
  std::vector<double> x;
  std::vector<double> t;
  std::vector<std::vector<cd>> g;  // snapshots on x
  // first corrector: u_{1,2} = g^2 w2, u_{1,-2} = conj(g)^2 wm2, u_{1,0} = |g|^2 w0
  VecC w2, wm2, w0;
  double polarization_residual = 0.0;
  double Ka_measured = std::numeric_limits<double>::quiet_NaN();
};

// one space dimension; a0 sampled on n points of [-L/2, L/2)
WKBSolution solve_transport(const SystemSpec& spec, const Phase& phase, const PolarizationVectors& pol,
                            const std::function<cd(double)>& a0, double T_a, double L, int n, int snapshots = 17);

std::string wkb_csv(const WKBSolution& w);

struct ResidualFit {
  std::vector<double> epsilons;
  std::vector<double> residual_l2, residual_sup;
  std::vector<long> grid_points;
  bool with_corrector = false;
  double order = 0.0;  // slope of log residual_l2 against log eps
};

// residual of the truncated expansion in the full system at the last snapshot
ResidualFit consistency_residual(WKBSolution& w, const SystemSpec& spec, const std::vector<double>& epsilons,
                                 bool with_corrector, long max_points = 1L << 21);

}  // namespace osc
