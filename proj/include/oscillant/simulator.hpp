#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "oscillant/symbol.hpp"
#include "oscillant/resonance.hpp"

namespace osc {

struct AmplitudeNorms {
  double a_sup = 0.0;
  double a_hatL1 = 0.0;
  double x0 = 0.0;
  std::vector<std::string> warnings;
};

// samples of a on x_j = -L/2 + j L / n
AmplitudeNorms amplitude_norms(const std::vector<cd>& a, double L);

struct SimConfig {
  std::string system_id;
  SystemSpec spec;
  Phase phase;        // reference phase; zero for non-oscillating references
  VecC e1, em1;       // reference polarization (em1 unused when the phase is zero)
  double epsilon = 1e-2;
  int grid_points = 4096;
  double domain_length = 0.0;  // 0: 40 x amplitude width
  double dt = 0.0;             // 0: largest step allowed by the nonlinear bound
  double t_end = 1.0;          // absolute time
  double K = 3.0;
  double K_prime = 0.5;
  // amplitude profile: gaussian a(x) = amp * exp(-((x - center)/width)^2) unless custom is set
  double amp = 1.0, amp_center = 0.0, amp_width = 4.0;
  std::function<cd(double)> amplitude_custom;
  // perturbation
  std::string perturbation = "resonant";  // resonant | random | none
  double xi0 = 0.0;
  VecC e0;
  std::uint64_t seed = 1;
  double rho = 0.0;   // 0: 0.5 x amplitude width; ball centred at x0
  double beta = 0.4;  // records the eps^beta ball as well
  double time_scale = 1.0;  // reported times = time_scale * simulated time
  int record_every = 1;
  int max_halvings = 20;
};

struct SimulationRun {
  std::vector<double> times;
  std::vector<double> norm_total, norm_dev, norm_dev_ball, norm_dev_ball_beta, sup_dev;
  double norm_dev0 = 0.0;
  double phi0_norm = 0.0;
  double fitted_rate = std::numeric_limits<double>::quiet_NaN();
  double t_star = std::numeric_limits<double>::infinity();
  double dt = 0.0;
  int halvings = 0;
  double max_imag = 0.0;  // real systems: largest imaginary part relative to the norm
  std::string verdict = "completed";  // completed | unbounded
  std::vector<std::string> notes;
};

// Pseudospectral state for dx u + A0 u / eps + A1 dx u = B(u,u) / sqrt(eps) on a periodic 1D grid.
class Simulator {
 public:
  Simulator(const SystemSpec& spec, double epsilon, int grid_points, double L, Exec exec = Exec::parallel);
  ~Simulator();
  Simulator(const Simulator&) = delete;
  Simulator& operator=(const Simulator&) = delete;

  int N() const { return N_; }
  int M() const { return M_; }
  double L() const { return L_; }
  double epsilon() const { return eps_; }
  double x(int j) const { return -0.5 * L_ + j * L_ / M_; }
  const std::vector<VecC>& state() const { return u_; }
  void set_state(const std::vector<VecC>& u);
  bool real_system() const { return real_; }
  void set_real(bool r) { real_ = r; }

  // exact linear flow over h
  void linear(double h);
  // u' = B(u,u)/sqrt(eps) by one RK4 step
  void nonlinear(double h);
  // Strang: half linear, nonlinear, half linear
  void step(double dt);
  // largest dt allowed by dt <= 0.1 sqrt(eps) / (|B| sup|u|)
  double dt_bound() const;

  double l2(const std::vector<VecC>& v) const;
  double sup(const std::vector<VecC>& v) const;

 private:
  void prepare_linear(double h);
  const SystemSpec spec_;
  double eps_;
  int N_, M_;
  double L_;
  Exec exec_;
  bool real_ = false;
  std::vector<VecC> u_;
  std::vector<MatC> prop_;  // per mode exponential for the cached step
  double prop_h_ = std::numeric_limits<double>::quiet_NaN();
  std::vector<Eigen::SelfAdjointEigenSolver<MatC>> eig_;
  struct FftBank;
  FftBank* fft_;
};

// u_a(0) on the grid (WKB leading term, or a e for zero phase)
std::vector<VecC> reference_datum(const SimConfig& cfg, const Simulator& sim);

SimulationRun run_instability_experiment(const SimConfig& cfg, Exec exec = Exec::parallel);

std::string run_csv(const SimulationRun& run);
nlohmann::json to_json(const SimulationRun& run);

struct SweepReport {
  std::vector<double> epsilons;
  std::vector<double> t_star, t_star_ratio, fitted_rate, rate_scaled, dev_ratio;
  std::vector<std::string> verdicts;
  double t_star_spread = 0.0;  // max/min - 1 of t_star_ratio
  double rate_spread = 0.0;
  bool t_star_pass = false, rate_pass = false, any_unbounded = false, all_stable = false;
  std::string time_unit;  // sqrt(eps)|ln eps| or eps|ln eps|
  std::vector<std::string> notes;
};

// the template's t_end is read in units of the amplification time sqrt(eps)|ln eps|
SweepReport epsilon_sweep(const SimConfig& tmpl, const std::vector<double>& epsilons, double T_units,
                          Exec exec = Exec::parallel);
nlohmann::json to_json(const SweepReport& r);

// magic "OSCS", int32 N, int32 grid_points, double eps, double t, then complex samples
void dump_state(const std::string& path, const Simulator& sim, double t);

}  // namespace osc
