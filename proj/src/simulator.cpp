#include "oscillant/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>

#include "fft.hpp"
#include "oscillant/flow.hpp"

namespace osc {

using nlohmann::json;

namespace {
const cd I(0.0, 1.0);
const double kInf = std::numeric_limits<double>::infinity();
}  // namespace

struct Simulator::FftBank {
  explicit FftBank(int m) : fft(m), buf(m) {}
  detail::Fft fft;
  std::vector<cd> buf;
};

AmplitudeNorms amplitude_norms(const std::vector<cd>& a, double L) {
  const int n = static_cast<int>(a.size());
  if (n < 2 || !(L > 0)) throw InputError("amplitude needs at least two samples and a positive period");
  AmplitudeNorms r;
  int arg = 0;
  for (int j = 0; j < n; ++j)
    if (std::abs(a[j]) > r.a_sup) {
      r.a_sup = std::abs(a[j]);
      arg = j;
    }
  if (r.a_sup == 0.0) throw InputError("amplitude vanishes identically: x0 is undefined");
  const double dx = L / n;
  r.x0 = -0.5 * L + arg * dx;
  if (std::max(std::abs(a.front()), std::abs(a.back())) > 1e-12 * r.a_sup)
    r.warnings.push_back("amplitude does not decay at the domain edge; periodization bias");
  detail::Fft fft(n);
  std::vector<cd> v = a;
  fft.forward(v);
  double s = 0.0;
  for (const cd& z : v) s += std::abs(z) * dx;
  r.a_hatL1 = s * 2.0 * M_PI / L;
  return r;
}

Simulator::Simulator(const SystemSpec& spec, double epsilon, int grid_points, double L, Exec exec)
    : spec_(spec), eps_(epsilon), N_(spec.N), M_(grid_points), L_(L), exec_(exec) {
  if (spec.d != 1) throw NotApplicableError("simulation is one-dimensional");
  if (grid_points < 16 || (grid_points & (grid_points - 1))) throw InputError("grid_points must be a power of two");
  if (!(epsilon > 0 && epsilon < 1)) throw InputError("epsilon must lie in (0,1)");
  if (!(L > 0)) throw InputError("domain length must be positive");
  u_.assign(M_, VecC::Zero(N_));
  eig_.resize(M_);
  for (int m = 0; m < M_; ++m) {
    const double xi = detail::Fft::wavenumber(m, M_, L_);
    eig_[m].compute(assemble_symbol(spec_, eps_ * xi));
  }
  fft_ = new FftBank(M_);
}

Simulator::~Simulator() { delete fft_; }

void Simulator::set_state(const std::vector<VecC>& u) {
  if (static_cast<int>(u.size()) != M_) throw InputError("state size mismatch");
  u_ = u;
}

void Simulator::prepare_linear(double h) {
  if (h == prop_h_) return;
  prop_.resize(M_);
  const bool par = exec_ == Exec::parallel;
#pragma omp parallel for if (par)
  for (int m = 0; m < M_; ++m) {
    const auto& es = eig_[m];
    VecC ph(N_);
    for (int q = 0; q < N_; ++q) ph(q) = std::exp(-I * h * es.eigenvalues()(q) / eps_);
    prop_[m] = es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
  }
  prop_h_ = h;
}

void Simulator::linear(double h) {
  prepare_linear(h);
  std::vector<VecC> hat(M_, VecC(N_));
  for (int c = 0; c < N_; ++c) {
    for (int j = 0; j < M_; ++j) fft_->buf[j] = u_[j](c);
    fft_->fft.forward(fft_->buf);
    for (int m = 0; m < M_; ++m) hat[m](c) = fft_->buf[m];
  }
  const bool par = exec_ == Exec::parallel;
#pragma omp parallel for if (par)
  for (int m = 0; m < M_; ++m) hat[m] = prop_[m] * hat[m];
  for (int c = 0; c < N_; ++c) {
    for (int m = 0; m < M_; ++m) fft_->buf[m] = hat[m](c);
    fft_->fft.backward(fft_->buf);
    for (int j = 0; j < M_; ++j) u_[j](c) = fft_->buf[j];
  }
}

void Simulator::nonlinear(double h) {
  const double s = 1.0 / std::sqrt(eps_);
  const bool par = exec_ == Exec::parallel;
#pragma omp parallel for if (par)
  for (int j = 0; j < M_; ++j) {
    const VecC u = u_[j];
    const VecC k1 = s * bilinear(spec_, u, u);
    const VecC a2 = u + 0.5 * h * k1;
    const VecC k2 = s * bilinear(spec_, a2, a2);
    const VecC a3 = u + 0.5 * h * k2;
    const VecC k3 = s * bilinear(spec_, a3, a3);
    const VecC a4 = u + h * k3;
    const VecC k4 = s * bilinear(spec_, a4, a4);
    u_[j] = u + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
}

void Simulator::step(double dt) {
  linear(0.5 * dt);
  nonlinear(dt);
  linear(0.5 * dt);
  if (real_)
    for (auto& v : u_) v = v.real().cast<cd>();
}

double Simulator::dt_bound() const {
  const double b = std::max(spec_.b_norm(), 1e-300);
  const double s = sup(u_);
  return s > 0 ? 0.1 * std::sqrt(eps_) / (b * s) : kInf;
}

double Simulator::l2(const std::vector<VecC>& v) const {
  double s = 0.0;
  for (const auto& z : v) s += z.squaredNorm();
  return std::sqrt(s * L_ / M_);
}

double Simulator::sup(const std::vector<VecC>& v) const {
  double s = 0.0;
  for (const auto& z : v) s = std::max(s, z.cwiseAbs().maxCoeff());
  return s;
}

namespace {

double width_of(const SimConfig& c) { return c.amp_width > 0 ? c.amp_width : 1.0; }

cd amplitude_at(const SimConfig& c, double x) {
  if (c.amplitude_custom) return c.amplitude_custom(x);
  const double z = (x - c.amp_center) / width_of(c);
  return c.amp * std::exp(-z * z);
}

double domain_of(const SimConfig& c) { return c.domain_length > 0 ? c.domain_length : 40.0 * width_of(c); }

}  // namespace

std::vector<VecC> reference_datum(const SimConfig& cfg, const Simulator& sim) {
  std::vector<VecC> u(sim.M());
  const bool osc = !cfg.phase.is_zero();
  const double k = osc ? cfg.phase.k(0) : 0.0;
  for (int j = 0; j < sim.M(); ++j) {
    const double x = sim.x(j);
    const cd g = amplitude_at(cfg, x);
    if (osc) {
      const cd E = std::exp(I * k * x / cfg.epsilon);
      u[j] = g * E * cfg.e1 + std::conj(g) * std::conj(E) * cfg.em1;
    } else {
      u[j] = g * cfg.e1;
    }
  }
  return u;
}

SimulationRun run_instability_experiment(const SimConfig& cfg, Exec exec) {
  if (cfg.e1.size() != cfg.spec.N) throw InputError("reference polarization has the wrong size");
  if (!(cfg.t_end > 0)) throw InputError("t_end must be positive");
  const double eps = cfg.epsilon;
  const double L = domain_of(cfg);
  const double W = width_of(cfg);
  Simulator sim(cfg.spec, eps, cfg.grid_points, L, exec);
  Simulator ref(cfg.spec, eps, cfg.grid_points, L, exec);
  const double dx = L / cfg.grid_points;

  SimulationRun run;
  const bool osc = !cfg.phase.is_zero();
  const double k = osc ? cfg.phase.k(0) : 0.0;
  const double fast = std::max(std::abs(k), std::abs(cfg.xi0 + k)) / eps;
  if (fast > 0 && 2 * M_PI / fast < 8 * dx)
    throw InputError("unresolved grid: fewer than 8 points per wavelength of the datum (need grid_points >= " +
                     std::to_string(static_cast<long>(std::ceil(8 * L * fast / (2 * M_PI)))) + ")");

  std::vector<cd> a(cfg.grid_points);
  for (int j = 0; j < cfg.grid_points; ++j) a[j] = amplitude_at(cfg, sim.x(j));
  AmplitudeNorms an = amplitude_norms(a, L);
  for (const auto& w : an.warnings) run.notes.push_back(w);

  std::vector<VecC> ua = reference_datum(cfg, sim);
  bool real_data = !cfg.spec.has_conjugation();
  for (const auto& v : ua) real_data = real_data && v.imag().cwiseAbs().maxCoeff() <= 1e-14;

  VecC e0 = cfg.e0;
  if (cfg.perturbation == "random") {
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> nd;
    e0 = VecC(cfg.spec.N);
    for (int q = 0; q < cfg.spec.N; ++q) e0(q) = cd(nd(rng), nd(rng));
    e0 /= e0.norm();
  } else if (cfg.perturbation == "resonant") {
    if (e0.size() != cfg.spec.N || e0.norm() == 0.0) throw InputError("resonant perturbation needs e0");
    e0 /= e0.norm();
  } else if (cfg.perturbation != "none") {
    throw InputError("unknown perturbation '" + cfg.perturbation + "'");
  }

  std::vector<VecC> u = ua;
  std::vector<double> phi(cfg.grid_points);
  double phi2 = 0.0;
  for (int j = 0; j < cfg.grid_points; ++j) {
    const double x = sim.x(j);
    phi[j] = smooth_cutoff(x - an.x0, W, 2 * W);
    phi2 += phi[j] * phi[j] * dx;
  }
  run.phi0_norm = std::sqrt(phi2);
  if (cfg.perturbation != "none") {
    const double amp = std::pow(eps, cfg.K);
    for (int j = 0; j < cfg.grid_points; ++j) {
      const cd E = std::exp(I * sim.x(j) * (cfg.xi0 + k) / eps);
      VecC p = amp * E * phi[j] * e0;
      if (real_data) p = p.real().cast<cd>();
      u[j] += p;
    }
  }
  sim.set_state(u);
  ref.set_state(ua);
  sim.set_real(real_data);
  ref.set_real(real_data);

  const double rho = cfg.rho > 0 ? cfg.rho : 0.5 * W;
  const double rho_beta = std::pow(eps, cfg.beta);
  auto record = [&](double t) {
    std::vector<VecC> dev(cfg.grid_points);
    double ball = 0.0, ball_b = 0.0, sup = 0.0, imag = 0.0;
    const double c = an.x0;
    for (int j = 0; j < cfg.grid_points; ++j) {
      dev[j] = sim.state()[j] - ref.state()[j];
      double r = sim.x(j) - c;
      r -= L * std::round(r / L);
      const double n2 = dev[j].squaredNorm();
      if (std::abs(r) <= rho) ball += n2 * dx;
      if (std::abs(r) <= rho_beta) ball_b += n2 * dx;
      sup = std::max(sup, dev[j].cwiseAbs().maxCoeff());
      imag = std::max(imag, sim.state()[j].imag().cwiseAbs().maxCoeff());
    }
    const double tot = sim.l2(sim.state());
    run.times.push_back(cfg.time_scale * t);
    run.norm_total.push_back(tot);
    run.norm_dev.push_back(sim.l2(dev));
    run.norm_dev_ball.push_back(std::sqrt(ball));
    run.norm_dev_ball_beta.push_back(std::sqrt(ball_b));
    run.sup_dev.push_back(sup);
    if (tot > 0) run.max_imag = std::max(run.max_imag, imag / tot);
  };

  double dt = cfg.dt > 0 ? cfg.dt : std::min(std::min(sim.dt_bound(), ref.dt_bound()), cfg.t_end / 100.0);
  record(0.0);
  run.norm_dev0 = run.norm_dev.front();
  double t = 0.0;
  long n = 0;
  while (t < cfg.t_end * (1 - 1e-14)) {
    const double bound = std::min(sim.dt_bound(), ref.dt_bound());
    while (dt > bound * (1 + 1e-12) && run.halvings <= cfg.max_halvings) {
      dt *= 0.5;
      ++run.halvings;
    }
    const bool finite = std::isfinite(sim.sup(sim.state()));
    if (run.halvings > cfg.max_halvings || !finite) {
      run.verdict = "unbounded";
      run.notes.push_back("step bound violated after " + std::to_string(cfg.max_halvings) + " halvings at t = " +
                          std::to_string(cfg.time_scale * t));
      break;
    }
    const double h = std::min(dt, cfg.t_end - t);
    sim.step(h);
    ref.step(h);
    t += h;
    ++n;
    if (n % std::max(1, cfg.record_every) == 0 || t >= cfg.t_end * (1 - 1e-14)) record(t);
  }
  run.dt = dt;

  const double target = std::pow(eps, cfg.K_prime);
  for (std::size_t q = 1; q < run.times.size(); ++q)
    if (run.norm_dev_ball[q] >= target) {
      const double y0 = run.norm_dev_ball[q - 1], y1 = run.norm_dev_ball[q];
      const double s = y1 > y0 ? (target - y0) / (y1 - y0) : 1.0;
      run.t_star = run.times[q - 1] + std::clamp(s, 0.0, 1.0) * (run.times[q] - run.times[q - 1]);
      break;
    }
  if (run.norm_dev0 > 0) {
    const double lo = 10.0 * run.norm_dev0, hi = 0.1 * target;
    std::vector<double> tx, ty;
    for (std::size_t q = 0; q < run.times.size(); ++q)
      if (run.norm_dev[q] > lo && run.norm_dev[q] < hi) {
        tx.push_back(run.times[q]);
        ty.push_back(std::log(run.norm_dev[q]));
      }
    if (tx.size() >= 3) run.fitted_rate = fit_slope(tx, ty);
  }
  return run;
}

std::string run_csv(const SimulationRun& run) {
  std::ostringstream os;
  os.precision(17);
  os << "t,norm_total,norm_dev,norm_dev_ball,sup_dev\n";
  for (std::size_t q = 0; q < run.times.size(); ++q)
    os << run.times[q] << ',' << run.norm_total[q] << ',' << run.norm_dev[q] << ',' << run.norm_dev_ball[q] << ','
       << run.sup_dev[q] << '\n';
  return os.str();
}

namespace {
json num(double v) { return std::isfinite(v) ? json(v) : json(v > 0 ? "inf" : (v < 0 ? "-inf" : "nan")); }
}  // namespace

json to_json(const SimulationRun& run) {
  json j;
  j["verdict"] = run.verdict;
  j["norm_dev0"] = run.norm_dev0;
  j["phi0_norm"] = run.phi0_norm;
  j["fitted_rate"] = num(run.fitted_rate);
  j["t_star"] = num(run.t_star);
  j["dt"] = run.dt;
  j["halvings"] = run.halvings;
  j["samples"] = run.times.size();
  j["final_norm_dev"] = run.norm_dev.empty() ? 0.0 : run.norm_dev.back();
  j["notes"] = run.notes;
  return j;
}

SweepReport epsilon_sweep(const SimConfig& tmpl, const std::vector<double>& epsilons, double T_units, Exec exec) {
  if (epsilons.size() < 3) throw InputError("a sweep needs at least three epsilon values");
  SweepReport r;
  r.time_unit = tmpl.time_scale == 1.0 ? "sqrt(eps)|ln eps|" : "time_scale*sqrt(eps)|ln eps|";
  double tmin = kInf, tmax = 0.0, rmin = kInf, rmax = 0.0;
  bool all_finite = true, rates_ok = true;
  r.all_stable = true;
  for (double eps : epsilons) {
    SimConfig c = tmpl;
    c.epsilon = eps;
    if (tmpl.time_scale != 1.0) c.time_scale = std::sqrt(eps);
    const double unit = std::sqrt(eps) * std::abs(std::log(eps));
    c.t_end = T_units * unit;
    SimulationRun run = run_instability_experiment(c, exec);
    const double unit_rep = c.time_scale * unit;
    r.epsilons.push_back(eps);
    r.t_star.push_back(run.t_star);
    r.t_star_ratio.push_back(run.t_star / unit_rep);
    r.fitted_rate.push_back(run.fitted_rate);
    r.rate_scaled.push_back(run.fitted_rate * unit_rep / std::abs(std::log(eps)));
    double dr = 0.0;
    for (double v : run.norm_dev) dr = std::max(dr, run.norm_dev0 > 0 ? v / run.norm_dev0 : 0.0);
    r.dev_ratio.push_back(dr);
    r.verdicts.push_back(run.verdict);
    if (run.verdict == "unbounded") r.any_unbounded = true;
    if (std::isfinite(run.t_star)) {
      r.all_stable = false;
      tmin = std::min(tmin, r.t_star_ratio.back());
      tmax = std::max(tmax, r.t_star_ratio.back());
    } else {
      all_finite = false;
    }
    if (std::isfinite(run.fitted_rate)) {
      rmin = std::min(rmin, r.rate_scaled.back());
      rmax = std::max(rmax, r.rate_scaled.back());
    } else {
      rates_ok = false;
    }
  }
  r.t_star_spread = all_finite ? tmax / tmin - 1.0 : kInf;
  r.rate_spread = rates_ok && rmin > 0 ? rmax / rmin - 1.0 : kInf;
  r.t_star_pass = all_finite && r.t_star_spread <= 0.25;
  r.rate_pass = rates_ok && r.rate_spread <= 0.15;
  r.notes.push_back("t_star ratios at fixed eps stand in for the divergence of the supremum over eps");
  if (r.any_unbounded) r.notes.push_back("some runs hit the step-halving limit; partial report");
  return r;
}

json to_json(const SweepReport& r) {
  json j;
  j["epsilons"] = r.epsilons;
  j["time_unit"] = r.time_unit;
  json ts = json::array(), tr = json::array(), fr = json::array(), rs = json::array();
  for (std::size_t q = 0; q < r.epsilons.size(); ++q) {
    ts.push_back(num(r.t_star[q]));
    tr.push_back(num(r.t_star_ratio[q]));
    fr.push_back(num(r.fitted_rate[q]));
    rs.push_back(num(r.rate_scaled[q]));
  }
  j["t_star"] = ts;
  j["t_star_ratio"] = tr;
  j["fitted_rate"] = fr;
  j["rate_scaled"] = rs;
  j["dev_ratio"] = r.dev_ratio;
  j["verdicts"] = r.verdicts;
  j["t_star_spread"] = num(r.t_star_spread);
  j["rate_spread"] = num(r.rate_spread);
  j["t_star_pass"] = r.t_star_pass;
  j["rate_pass"] = r.rate_pass;
  j["all_stable"] = r.all_stable;
  j["any_unbounded"] = r.any_unbounded;
  j["notes"] = r.notes;
  return j;
}

void dump_state(const std::string& path, const Simulator& sim, double t) {
  std::ostringstream os(std::ios::binary);
  os.write("OSCS", 4);
  const std::int32_t n = sim.N(), m = sim.M();
  os.write(reinterpret_cast<const char*>(&n), sizeof n);
  os.write(reinterpret_cast<const char*>(&m), sizeof m);
  const double eps = sim.epsilon();
  os.write(reinterpret_cast<const char*>(&eps), sizeof eps);
  os.write(reinterpret_cast<const char*>(&t), sizeof t);
  for (const auto& v : sim.state())
    for (int c = 0; c < n; ++c) {
      const double re = v(c).real(), im = v(c).imag();
      os.write(reinterpret_cast<const char*>(&re), sizeof re);
      os.write(reinterpret_cast<const char*>(&im), sizeof im);
    }
  write_file_atomic(path, os.str());
}

}  // namespace osc
