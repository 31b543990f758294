#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "oscillant/resonance.hpp"
#include "oscillant/symbol.hpp"

namespace osc {

struct PolarizationVectors {
  VecC e1, em1;
  double residual1 = 0.0, residual_m1 = 0.0;
};

// unit kernel vector of -i omega + A0 + A(ik); first significant component real positive
PolarizationVectors polarization_vectors(const SystemSpec& spec, const Phase& phase);
// supplied reference direction (non-oscillating references)
PolarizationVectors polarization_from(const SystemSpec& spec, const Phase& phase, const VecC& e);

// Pi_i(xi + l k) B(e_l) Pi_j(xi) and the phase lambda_i(xi + l k) - l omega - lambda_j(xi), l = +-1
struct CoefficientSample {
  VecR xi;
  MatC matrix;
  double phase = 0.0;
};
CoefficientSample harmonic_coefficient(const SpectralField& field, const PolarizationVectors& pol,
                                       const Phase& phase, int i, int j, int ell, const VecR& xi);

struct InteractionCoefficients {
  int i = 0, j = 0;
  std::vector<VecR> xi;
  std::vector<MatC> b_plus;   // Pi_i(xi+k) B(e1) Pi_j(xi)
  std::vector<MatC> b_minus;  // Pi_j(xi) B(e-1) Pi_i(xi+k)
  std::vector<int> rank_plus, rank_minus;
  std::vector<cd> gamma;      // tr(b_plus b_minus)
  std::vector<double> phase;  // lambda_i(xi+k) - omega - lambda_j(xi)
};

InteractionCoefficients interaction_coefficients(const SpectralField& field, const PolarizationVectors& pol,
                                                 const Phase& phase, int i, int j, const std::vector<VecR>& grid,
                                                 Exec exec = Exec::parallel);

struct TransparencyDiagnostic {
  int i = 0, j = 0;
  double ratio_sup = 0.0;
  std::vector<double> ratio_per_h;  // NaN where no sample fell in the annulus
  double at_resonance_norm = 0.0;
  std::string verdict;  // transparent | non-transparent | borderline
  std::vector<std::string> notes;
};

std::vector<double> default_h_values();

// points: frequencies at which the coefficient must vanish (roots of the pair by default)
TransparencyDiagnostic transparency_check(const SpectralField& field, const PolarizationVectors& pol,
                                          const Phase& phase, const ResonanceReport& report, int i, int j,
                                          const std::vector<double>& h_values,
                                          const std::vector<VecR>* points = nullptr);

struct PartialTransparency {
  int i = 0, j = 0;
  std::vector<VecR> translate_points;  // R_ij cap ((R_i'i - k) cup (R_jj' + k))
  std::vector<VecR> coalescence_points;  // R_ij cap (R_ii' cup R_j'j)
  bool pass = true;
  std::vector<std::string> notes;
};

std::vector<PartialTransparency> partial_transparency_conditions(const SpectralField& field,
                                                                 const PolarizationVectors& pol,
                                                                 const Phase& phase, const ResonanceReport& report,
                                                                 const std::vector<std::pair<int, int>>& R0,
                                                                 const std::vector<double>& h_values);

struct StabilityInputs {
  double K = 3.0;
  double Ka = 3.0;
  double a_sup = 1.0;
  double a_hatL1 = 1.0;
  int d = 1;
  double beta = 0.4;
};

struct PairSummary {
  int i = 0, j = 0;
  TransparencyDiagnostic transparency;
  std::vector<cd> gamma_at_roots;
  double max_re_gamma = 0.0, max_abs_im_gamma = 0.0;
  double gamma_ij = 0.0;
  double b0_ij = 0.0;
  bool rank_one = true;
};

struct StabilityReport {
  std::vector<PairSummary> pairs;
  std::vector<std::pair<int, int>> R0;
  std::vector<PartialTransparency> partial;
  double Gamma_index = 0.0;
  double gamma = 0.0;
  double B0 = 0.0, B_full = 0.0;
  double T0 = 0, K0 = 0, T0p = 0, K0p = 0, T0pp = 0, K0pp = 0, Tinf = 0;
  StabilityInputs inputs;
  bool ka_gate = true;  // K <= K_a + 1/2
  std::string verdict;  // unstable | stable | degenerate | stable-by-transparency | undetermined
  std::vector<std::string> notes;
};

StabilityReport stability_report(const SpectralField& field, const PolarizationVectors& pol, const Phase& phase,
                                 const ResonanceReport& report, const StabilityInputs& inputs,
                                 const std::vector<double>& h_values = default_h_values());

nlohmann::json to_json(const StabilityReport& r);

struct HomologicalResult {
  bool solvable = true;
  double sup_Q = 0.0;
  VecR witness;
};

// pointwise Q = source / (i phase)
HomologicalResult solve_homological(const std::vector<VecR>& xi, const std::vector<MatC>& source,
                                    const std::vector<double>& phase);
HomologicalResult solve_homological(const SpectralField& field, const PolarizationVectors& pol, const Phase& phase,
                                    int i, int j, int ell, const std::vector<VecR>& grid);

struct Symmetrizer {
  MatC P;
  cd c12, c21;
  double residual = 0.0;  // |P^-1 C P - C~|
  MatC reduced;
};

Symmetrizer symmetrizer_basis(const MatC& C12, const MatC& C21, cd nu12 = 1.0, cd nu21 = 1.0);

}  // namespace osc
