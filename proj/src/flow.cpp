#include "oscillant/flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <unsupported/Eigen/MatrixFunctions>

namespace osc {

using nlohmann::json;

namespace {

const double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Blocks {
  MatC plus, minus;
  double lam_i = 0.0, lam_j = 0.0;  // lambda_i(xi+k), lambda_j(xi)
  double phase = 0.0;
};

Blocks blocks_at(const SpectralField& field, const MatC& Be1, const MatC& Bem1, const Phase& phase, int i, int j,
                 const VecR& xi) {
  BranchPoint s = evaluate_branches(field, VecR(xi + phase.k));
  BranchPoint b = evaluate_branches(field, xi);
  MatC Pi = s.projector(i), Pj = b.projector(j);
  Blocks r;
  r.plus = Pi * Be1 * Pj;
  r.minus = Pj * Bem1 * Pi;
  r.lam_i = s.lambda[i];
  r.lam_j = b.lambda[j];
  r.phase = r.lam_i - phase.omega - r.lam_j;
  return r;
}

bool inside(const SpectralField& field, const Phase& phase, const VecR& xi) {
  return field.covers(xi) && field.covers(VecR(xi + phase.k));
}

// unit direction of steepest phase change and its slope
std::pair<VecR, double> phase_gradient(const SpectralField& field, const Phase& phase, int i, int j, const VecR& xi) {
  const int d = static_cast<int>(xi.size());
  VecR g(d);
  for (int a = 0; a < d; ++a) {
    const double hh = 1e-5 * std::max(1.0, std::abs(xi(a)));
    VecR p = xi, m = xi;
    p(a) += hh;
    m(a) -= hh;
    const bool ip = inside(field, phase, p), im = inside(field, phase, m);
    if (!ip) p = xi;
    if (!im) m = xi;
    const double span = (ip ? hh : 0.0) + (im ? hh : 0.0);
    g(a) = span > 0 ? (resonance_phase(field, phase, i, j, p) - resonance_phase(field, phase, i, j, m)) / span : 0.0;
  }
  const double n = g.norm();
  if (n == 0.0) {
    VecR e = VecR::Zero(d);
    e(0) = 1.0;
    return {e, 0.0};
  }
  return {g / n, n};
}

}  // namespace

MatC InteractionMatrix::assemble() const {
  const int N = block_size();
  const int J = static_cast<int>(extra_diag.size());
  const double se = std::sqrt(epsilon);
  const cd I(0, 1);
  MatC m = MatC::Zero(2 * N + J, 2 * N + J);
  m.topLeftCorner(N, N).diagonal().setConstant(I * mu1);
  m.block(N, N, N, N).diagonal().setConstant(I * mu2);
  m.block(0, N, N, N) = -se * amplitude * b12;
  m.block(N, 0, N, N) = -se * std::conj(amplitude) * b21;
  for (int q = 0; q < J; ++q) m(2 * N + q, 2 * N + q) = I * extra_diag[q];
  return m;
}

cd InteractionMatrix::trace_product() const { return std::norm(amplitude) * (b12 * b21).trace(); }

std::vector<cd> flow_spectrum(const InteractionMatrix& m) {
  const int N = m.block_size();
  const MatC prod = m.b12 * m.b21;
  if (numerical_rank(prod, 1e-10) > 1)
    throw NotApplicableError("unsupported rank: b12 b21 has rank > 1");
  const cd I(0, 1);
  const cd disc = 4.0 * m.epsilon * m.trace_product() - (m.mu1 - m.mu2) * (m.mu1 - m.mu2);
  const cd root = std::sqrt(disc);
  std::vector<cd> ev;
  for (int q = 0; q < N - 1; ++q) ev.push_back(I * m.mu1);
  for (int q = 0; q < N - 1; ++q) ev.push_back(I * m.mu2);
  ev.push_back(0.5 * I * (m.mu1 + m.mu2) + 0.5 * root);
  ev.push_back(0.5 * I * (m.mu1 + m.mu2) - 0.5 * root);
  for (double l : m.extra_diag) ev.push_back(I * l);
  return ev;
}

std::vector<cd> dense_spectrum(const InteractionMatrix& m) {
  Eigen::ComplexEigenSolver<MatC> es(m.assemble(), false);
  std::vector<cd> ev(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  return ev;
}

double spectrum_mismatch(std::vector<cd> a, std::vector<cd> b) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  double worst = 0.0;
  std::vector<bool> used(b.size(), false);
  for (const cd& z : a) {
    std::size_t best = b.size();
    double bd = 0.0;
    for (std::size_t q = 0; q < b.size(); ++q) {
      if (used[q]) continue;
      const double dd = std::abs(z - b[q]);
      if (best == b.size() || dd < bd) {
        best = q;
        bd = dd;
      }
    }
    used[best] = true;
    worst = std::max(worst, bd);
  }
  return worst;
}

double regime_boundary(const InteractionMatrix& m) {
  const cd tr = m.trace_product();
  if (!(tr.real() > 0.0) || std::abs(tr.imag()) > 1e-12 * std::abs(tr)) return kNaN;
  return 2.0 * std::sqrt(m.epsilon * tr.real());
}

FlowTrajectory integrate_flow(const std::function<InteractionMatrix(double)>& m_of_t, double tau, double t_end,
                              double dt, bool autonomous, int max_snapshots) {
  if (!(t_end >= tau)) throw InputError("t_end must not precede tau");
  const InteractionMatrix m0 = m_of_t(tau);
  const double se = std::sqrt(m0.epsilon);
  const MatC M0 = m0.assemble();
  const int n = static_cast<int>(M0.rows());
  const double mnorm = sup_norm(M0) / se;
  const double span = t_end - tau;
  double dt_max = mnorm > 0 ? 0.1 / mnorm : span;
  if (dt <= 0.0) {
    dt = std::min(dt_max, span > 0 ? span / 16.0 : 1.0);
  } else if (dt > dt_max * (1 + 1e-12)) {
    std::ostringstream os;
    os << "step " << dt << " gives |dt M / sqrt(eps)| = " << dt * mnorm << " > 0.1; use dt <= " << dt_max;
    throw InputError(os.str());
  }
  const long steps = span > 0 ? static_cast<long>(std::ceil(span / dt - 1e-9)) : 0;
  if (steps > 0) dt = span / steps;

  FlowTrajectory tr;
  tr.dt = dt;
  MatC S = MatC::Identity(n, n);
  const long every = std::max<long>(1, steps / std::max(1, max_snapshots - 1));
  auto record = [&](long s, double t) {
    tr.times.push_back(t);
    tr.sup_norm_series.push_back(sup_norm(S));
    if (s % every == 0 || s == steps) {
      tr.snapshot_times.push_back(t);
      tr.S0.push_back(S);
    }
  };
  record(0, tau);
  cd log_det_expected = 0.0;
  MatC E;
  if (autonomous) E = (-(dt / se) * M0).exp();
  for (long s = 1; s <= steps; ++s) {
    const double t0 = tau + (s - 1) * dt;
    if (!autonomous) {
      const InteractionMatrix mm = m_of_t(t0 + 0.5 * dt);
      const MatC M = mm.assemble();
      const double step_norm = dt * sup_norm(M) / std::sqrt(mm.epsilon);
      if (step_norm > 0.1 * (1 + 1e-9)) {
        std::ostringstream os;
        os << "step exponent norm " << step_norm << " exceeds 0.1 at t = " << t0 << "; use dt <= "
           << 0.1 * dt / step_norm;
        throw InputError(os.str());
      }
      E = (-(dt / std::sqrt(mm.epsilon)) * M).exp();
      log_det_expected += -(dt / std::sqrt(mm.epsilon)) * M.trace();
    } else {
      log_det_expected += -(dt / se) * M0.trace();
    }
    S = E * S;
    record(s, t0 + dt);
  }
  const cd det = S.determinant();
  const cd expected = std::exp(log_det_expected);
  tr.liouville_residual = std::abs(det - expected) / std::max(std::abs(expected), 1e-300);

  std::vector<double> tx, ty;
  for (std::size_t q = tr.times.size() / 2; q < tr.times.size(); ++q) {
    tx.push_back(tr.times[q]);
    ty.push_back(std::log(tr.sup_norm_series[q]));
  }
  tr.fitted_rate = tx.size() >= 2 ? fit_slope(tx, ty) : 0.0;
  return tr;
}

std::string trajectory_csv(const FlowTrajectory& tr) {
  std::ostringstream os;
  os.precision(17);
  os << "t,sup_norm,log_sup_norm\n";
  for (std::size_t q = 0; q < tr.times.size(); ++q)
    os << tr.times[q] << ',' << tr.sup_norm_series[q] << ',' << std::log(tr.sup_norm_series[q]) << '\n';
  return os.str();
}

double smooth_cutoff(double r, double inner, double outer) {
  r = std::abs(r);
  if (r <= inner) return 1.0;
  if (r >= outer) return 0.0;
  const double s = (outer - r) / (outer - inner);
  return s * s * (3.0 - 2.0 * s);
}

std::vector<FlowSample> resonance_flow_samples(const SpectralField& field, const PolarizationVectors& pol,
                                               const Phase& phase, int i, int j, const std::vector<VecR>& roots,
                                               double eps, double h, const std::vector<double>& amplitudes) {
  const SystemSpec& spec = *field.spec;
  const MatC Be1 = linearized_source(spec, pol.e1);
  const MatC Bem1 = linearized_source(spec, pol.em1);
  const double le = std::abs(std::log(eps));
  const double a_max = amplitudes.empty() ? 1.0 : *std::max_element(amplitudes.begin(), amplitudes.end());
  std::vector<FlowSample> out;
  for (const VecR& root : roots) {
    auto [dir, slope] = phase_gradient(field, phase, i, j, root);
    const double reach = slope > 0 ? h / slope : h;
    for (double s : {-1.0, -0.5, -0.25, 0.0, 0.25, 0.5, 1.0}) {
      const VecR xi = root + s * reach * dir;
      if (!inside(field, phase, xi)) continue;
      Blocks b = blocks_at(field, Be1, Bem1, phase, i, j, xi);
      if (std::abs(b.phase) > h) continue;
      const double w = smooth_cutoff(b.phase, h, 2 * h);
      for (double a : amplitudes) {
        FlowSample fs;
        fs.m.mu1 = b.lam_i - phase.omega;
        fs.m.mu2 = b.lam_j;
        fs.m.b12 = w * b.plus;
        fs.m.b21 = w * b.minus;
        fs.m.epsilon = eps;
        fs.m.amplitude = a;
        out.push_back(fs);
      }
    }
    Blocks b = blocks_at(field, Be1, Bem1, phase, i, j, root);
    for (double f : {1.01, 2.0, 4.0})
      for (double sg : {-1.0, 1.0}) {
        FlowSample fs;
        fs.away = true;
        fs.m.mu2 = b.lam_j;
        fs.m.mu1 = b.lam_j + sg * f * std::sqrt(eps) * le * le;
        fs.m.b12 = b.plus;
        fs.m.b21 = b.minus;
        fs.m.epsilon = eps;
        fs.m.amplitude = a_max;
        out.push_back(fs);
      }
  }
  return out;
}

double gamma_plus(const SpectralField& field, const PolarizationVectors& pol, const Phase& phase, int i, int j,
                  const std::vector<VecR>& roots, double h, double a_sup) {
  const SystemSpec& spec = *field.spec;
  const MatC Be1 = linearized_source(spec, pol.e1);
  const MatC Bem1 = linearized_source(spec, pol.em1);
  double best = 0.0;
  bool any = false;
  for (const VecR& root : roots) {
    auto [dir, slope] = phase_gradient(field, phase, i, j, root);
    const double reach = slope > 0 ? 2 * h / slope : h;
    for (double s : linspace(-1.0, 1.0, 81)) {
      const VecR xi = root + s * reach * dir;
      if (!inside(field, phase, xi)) continue;
      Blocks b = blocks_at(field, Be1, Bem1, phase, i, j, xi);
      if (std::abs(b.phase) > h) continue;
      const double v = std::sqrt(cd((b.plus * b.minus).trace())).real();
      if (!any || v > best) best = v;
      any = true;
    }
  }
  return a_sup * std::abs(best);
}

GrowthBoundReport verify_growth_bound(const std::vector<double>& epsilons,
                                      const std::function<std::vector<FlowSample>(double)>& sampler,
                                      double gamma_plus_value, double T, double n_star_cap, double away_cap) {
  GrowthBoundReport r;
  r.gamma_plus = gamma_plus_value;
  r.T = T;
  std::vector<double> eps = epsilons;
  std::sort(eps.begin(), eps.end(), std::greater<>());
  r.epsilons = eps;
  bool away_ok = true;
  for (double e : eps) {
    const std::vector<FlowSample> samples = sampler(e);
    const double t_end = T * std::abs(std::log(e));
    const int ns = static_cast<int>(samples.size());
    std::vector<double> q(ns, 0.0);
#pragma omp parallel for schedule(dynamic)
    for (int s = 0; s < ns; ++s) {
      const InteractionMatrix m = samples[s].m;
      FlowTrajectory tr = integrate_flow([&m](double) { return m; }, 0.0, t_end, 0.0, true, 2);
      double v = 0.0;
      for (std::size_t n = 0; n < tr.times.size(); ++n) {
        const double val = samples[s].away ? tr.sup_norm_series[n]
                                           : tr.sup_norm_series[n] * std::exp(-tr.times[n] * gamma_plus_value);
        v = std::max(v, val);
      }
      q[s] = v;
    }
    double qn = 0.0, qa = 0.0;
    for (int s = 0; s < ns; ++s) (samples[s].away ? qa : qn) = std::max(samples[s].away ? qa : qn, q[s]);
    r.Q.push_back(qn);
    r.away_sup.push_back(qa);
    if (qa > away_cap) away_ok = false;
  }
  r.N_star = 0.0;
  for (std::size_t n = 1; n < eps.size(); ++n) {
    const double lr = std::log(std::abs(std::log(eps[n])) / std::abs(std::log(eps[n - 1])));
    if (r.Q[n - 1] <= 0.0 || lr <= 0.0) continue;
    r.N_star = std::max(r.N_star, std::log(r.Q[n] / r.Q[n - 1]) / lr);
  }
  r.pass = away_ok && r.N_star <= n_star_cap;
  return r;
}

json to_json(const GrowthBoundReport& r) {
  json j;
  j["epsilons"] = r.epsilons;
  j["Q"] = r.Q;
  j["away_sup"] = r.away_sup;
  j["gamma_plus"] = r.gamma_plus;
  j["T"] = r.T;
  j["N_star"] = r.N_star;
  j["verdict"] = r.pass ? "pass" : "fail";
  return j;
}

VecC unstable_datum_direction(const MatC& b_plus, const MatC& b_minus) {
  const MatC prod = b_plus * b_minus;
  const double scale = std::max(1.0, sup_norm(b_plus) * sup_norm(b_minus));
  if (sup_norm(prod) <= 1e-12 * scale) throw NumericalError("zero product matrix: no unstable direction");
  Eigen::JacobiSVD<MatC> svd(prod, Eigen::ComputeThinU);
  VecC e = svd.matrixU().col(0);
  const double mx = e.cwiseAbs().maxCoeff();
  for (int n = 0; n < e.size(); ++n)
    if (std::abs(e(n)) > 1e-8 * mx) {
      e *= std::conj(e(n)) / std::abs(e(n));
      break;
    }
  return e;
}

}  // namespace osc
