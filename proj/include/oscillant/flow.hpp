#pragma once

#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "oscillant/interaction.hpp"

namespace osc {

struct InteractionMatrix {
  double mu1 = 0.0, mu2 = 0.0;
  MatC b12, b21;                  // N x N
  std::vector<double> extra_diag;  // remaining branches, i lambda on the diagonal
  double epsilon = 1.0;
  cd amplitude = 1.0;  // g multiplies b12, conj(g) multiplies b21

  MatC assemble() const;
  cd trace_product() const;  // tr(g b12 conj(g) b21)
  int block_size() const { return static_cast<int>(b12.rows()); }
};

// closed form: i mu1 (N-1), i mu2 (N-1), mu+, mu-, then i * extra
std::vector<cd> flow_spectrum(const InteractionMatrix& m);
std::vector<cd> dense_spectrum(const InteractionMatrix& m);
// largest distance under greedy nearest matching
double spectrum_mismatch(std::vector<cd> a, std::vector<cd> b);
// |mu1 - mu2| at which Re mu+ reaches zero (real positive trace), else NaN
double regime_boundary(const InteractionMatrix& m);

struct FlowTrajectory {
  std::vector<double> times;
  std::vector<double> sup_norm_series;
  std::vector<double> snapshot_times;
  std::vector<MatC> S0;  // subsampled
  double fitted_rate = 0.0;
  double gamma_plus_ref = 0.0;
  double liouville_residual = 0.0;
  double dt = 0.0;
};

// S' + M S / sqrt(eps) = 0, S(tau) = Id; exact exponential of M at mid-step.
// dt <= 0 selects the largest step with |dt M / sqrt(eps)| <= 0.1.
FlowTrajectory integrate_flow(const std::function<InteractionMatrix(double)>& m_of_t, double tau, double t_end,
                              double dt = 0.0, bool autonomous = false, int max_snapshots = 64);

std::string trajectory_csv(const FlowTrajectory& tr);

// clamp-smoothstep: 1 for r <= inner, 0 for r >= outer
double smooth_cutoff(double r, double inner, double outer);

struct FlowSample {
  InteractionMatrix m;
  bool away = false;
};

// near-resonance samples on R_ij^h and away samples with |mu1 - mu2| = sqrt(eps)|ln eps|^2 {1.01, 2, 4}
std::vector<FlowSample> resonance_flow_samples(const SpectralField& field, const PolarizationVectors& pol,
                                               const Phase& phase, int i, int j, const std::vector<VecR>& roots,
                                               double eps, double h, const std::vector<double>& amplitudes);

// a_sup |max over {|phase| <= h} near the roots of Re Gamma^(1/2)|
double gamma_plus(const SpectralField& field, const PolarizationVectors& pol, const Phase& phase, int i, int j,
                  const std::vector<VecR>& roots, double h, double a_sup);

struct GrowthBoundReport {
  std::vector<double> epsilons;
  std::vector<double> Q;         // max |S0| e^{-t gamma+} over near samples
  std::vector<double> away_sup;  // max |S0| over away samples
  double gamma_plus = 0.0;
  double T = 2.0;
  double N_star = 0.0;
  bool pass = false;
};

GrowthBoundReport verify_growth_bound(const std::vector<double>& epsilons,
                                      const std::function<std::vector<FlowSample>(double)>& sampler,
                                      double gamma_plus_value, double T, double n_star_cap = 8.0,
                                      double away_cap = 10.0);

nlohmann::json to_json(const GrowthBoundReport& r);

// unit generator of the range of b_plus b_minus
VecC unstable_datum_direction(const MatC& b_plus, const MatC& b_minus);

}  // namespace osc
