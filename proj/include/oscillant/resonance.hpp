#pragma once

#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "oscillant/symbol.hpp"

namespace osc {

struct Phase {
  double omega = 0.0;
  VecR k;
  bool is_zero() const { return omega == 0.0 && (k.size() == 0 || k.isZero(0.0)); }
};

Phase make_phase(double omega, double k);

// min singular value of omega - H(k) relative to its norm
double characteristic_defect(const SystemSpec& spec, const Phase& phase);
bool is_characteristic(const SystemSpec& spec, const Phase& phase);

struct PairResonance {
  int i = 0;
  int j = 0;
  bool auto_resonance = false;
  bool continuum = false;  // phase vanishes on the whole window
  std::vector<VecR> roots;
  std::vector<double> residuals;
};

struct ResonanceReport {
  Phase phase;
  VecR window_lo, window_hi;
  double cell_size = 0.0;
  std::vector<PairResonance> pairs;  // pairs with roots or a continuum, sorted by (i,j)
  std::string bounded_verdict;       // bounded | unbounded-at-infinity | undetermined
  std::vector<int> harmonics;
  std::vector<std::string> notes;

  const PairResonance* find(int i, int j) const;
};

double resonance_phase(const SpectralField& field, const Phase& phase, int i, int j, const VecR& xi);
double resonance_phase(const SpectralField& field, const Phase& phase, int i, int j, double xi);

// Field over window and window + k, with 1D spacing dividing k so that xi + k hits grid points.
SpectralField resonance_field(const SystemSpec& spec, const Phase& phase, const VecR& lo, const VecR& hi,
                              int points_per_axis, Exec exec = Exec::parallel);

// Default window half-width 8 kappa (per axis).
double default_window_halfwidth(const SystemSpec& spec, const Phase& phase);

ResonanceReport find_resonances(const SpectralField& field, const Phase& phase, const VecR& lo, const VecR& hi);

std::vector<int> characteristic_harmonics(const SystemSpec& spec, const Phase& phase, int pmax);

// minimum distance between root sets; infinity when either is empty
double min_root_distance(const std::vector<VecR>& a, const std::vector<VecR>& b);

nlohmann::json to_json(const ResonanceReport& r);

// ---- Euler-Maxwell dispersion relations

struct EMParams {
  double theta_e = 1.0;
  double theta_i = 1e-2;
  double alpha = 1.0;
};

double em_omega_t2(const EMParams& p, double k);
// longitudinal roots in omega^2: {slow, fast}
std::pair<double, double> em_longitudinal_w(const EMParams& p, double k);
double em_transverse_residual(const EMParams& p, double omega, double k);
double em_longitudinal_residual(const EMParams& p, double omega, double k);

struct PhaseMatch {
  double k1 = 0, k2 = 0, k = 0;
  double omega1 = 0, omega2 = 0, omega = 0;
  std::vector<double> residuals;  // pump, scattered, target
};

// relation: euler-maxwell-longitudinal-l | euler-maxwell-longitudinal-s | euler-maxwell-transverse
std::vector<PhaseMatch> match_phases_on_dispersion(const std::string& relation,
                                                   const std::map<std::string, double>& params, double k1);

}  // namespace osc
