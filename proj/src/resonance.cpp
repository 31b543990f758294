#include "oscillant/resonance.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include <boost/math/tools/roots.hpp>

namespace osc {

using nlohmann::json;

Phase make_phase(double omega, double k) {
  Phase p;
  p.omega = omega;
  p.k = VecR::Constant(1, k);
  return p;
}

double characteristic_defect(const SystemSpec& spec, const Phase& phase) {
  MatC h = assemble_symbol(spec, phase.k);
  Eigen::SelfAdjointEigenSolver<MatC> es(h);
  VecR w = es.eigenvalues().array() - phase.omega;
  double norm = std::max({1.0, es.eigenvalues().cwiseAbs().maxCoeff(), std::abs(phase.omega)});
  return w.cwiseAbs().minCoeff() / norm;
}

bool is_characteristic(const SystemSpec& spec, const Phase& phase) {
  return characteristic_defect(spec, phase) <= policy().char_tol;
}

const PairResonance* ResonanceReport::find(int i, int j) const {
  for (const auto& p : pairs)
    if (p.i == i && p.j == j) return &p;
  return nullptr;
}

double resonance_phase(const SpectralField& field, const Phase& phase, int i, int j, const VecR& xi) {
  if (i < 0 || i >= field.J || j < 0 || j >= field.J) throw InputError("branch index out of range");
  VecR shifted = xi + phase.k;
  BranchPoint a = evaluate_branches(field, shifted);
  BranchPoint b = evaluate_branches(field, xi);
  return a.lambda[i] - b.lambda[j] - phase.omega;
}

double resonance_phase(const SpectralField& field, const Phase& phase, int i, int j, double xi) {
  return resonance_phase(field, phase, i, j, VecR::Constant(1, xi));
}

namespace {

std::vector<double> aligned_axis(double lo, double hi, double k, int n) {
  double a = std::min(lo, lo + k), b = std::max(hi, hi + k);
  double s = (hi - lo) / std::max(1, n - 1);
  if (s <= 0) s = 1.0;
  if (std::abs(k) > 0) {
    double q = std::max(1.0, std::round(std::abs(k) / s));
    s = std::abs(k) / q;
  }
  long m0 = static_cast<long>(std::floor((a - lo) / s + 1e-9));
  long m1 = static_cast<long>(std::ceil((b - lo) / s - 1e-9));
  std::vector<double> ax;
  for (long m = m0; m <= m1; ++m) ax.push_back(lo + m * s);
  return ax;
}

}  // namespace

SpectralField resonance_field(const SystemSpec& spec, const Phase& phase, const VecR& lo, const VecR& hi,
                              int points_per_axis, Exec exec) {
  if (lo.size() != spec.d || hi.size() != spec.d || phase.k.size() != spec.d)
    throw InputError("window/phase dimension does not match d");
  std::vector<std::vector<double>> axes;
  for (int a = 0; a < spec.d; ++a) {
    if (!(hi(a) > lo(a))) throw InputError("empty search window");
    axes.push_back(aligned_axis(lo(a), hi(a), phase.k(a), points_per_axis));
  }
  return eigendecompose_field(spec, axes, exec);
}

double default_window_halfwidth(const SystemSpec& spec, const Phase& phase) {
  const double kn = phase.k.norm();
  const double R = (spec.d == 1 ? 64.0 : 16.0) * std::max(1.0, kn);
  const int n = spec.d == 1 ? 1025 : 65;
  std::vector<double> ax = linspace(-R, R, n);
  std::vector<VecR> pts;
  if (spec.d == 1) {
    for (double x : ax) pts.push_back(VecR::Constant(1, x));
  } else {
    for (double x : ax)
      for (double y : ax) {
        VecR p(2);
        p << x, y;
        pts.push_back(p);
      }
  }
  const long M = static_cast<long>(pts.size());
  std::vector<VecR> e0(M), e1(M);
#pragma omp parallel for schedule(static)
  for (long m = 0; m < M; ++m) {
    e0[m] = Eigen::SelfAdjointEigenSolver<MatC>(assemble_symbol(spec, pts[m]), Eigen::EigenvaluesOnly).eigenvalues();
    e1[m] = Eigen::SelfAdjointEigenSolver<MatC>(assemble_symbol(spec, VecR(pts[m] + phase.k)), Eigen::EigenvaluesOnly)
                .eigenvalues();
  }
  // sorted eigenvalue pairs (a of xi+k, b of xi); sign changes between scan neighbours along axis 0
  double kappa = std::max(1.0, kn);
  const int N = spec.N;
  const long stride = spec.d == 1 ? 1 : n;
  for (long m = 0; m + stride < M; ++m) {
    long q = m + stride;
    for (int a = 0; a < N; ++a)
      for (int b = 0; b < N; ++b) {
        double f0 = e1[m](a) - e0[m](b) - phase.omega;
        double f1 = e1[q](a) - e0[q](b) - phase.omega;
        bool flat = std::abs(f0) < 1e-10 && std::abs(f1) < 1e-10;
        if (!flat && f0 * f1 <= 0.0) kappa = std::max(kappa, std::max(pts[m].norm(), pts[q].norm()));
      }
  }
  return 8.0 * kappa;
}

namespace {

struct ScanPoint {
  VecR xi;
  std::vector<double> here, shifted;
};

VecR bisect_root(const std::function<double(const VecR&)>& f, VecR a, VecR b, double fa, double fb,
                 double& residual) {
  auto g = [&](double s) { return f(VecR(a + s * (b - a))); };
  std::uintmax_t it = 200;
  auto tol = boost::math::tools::eps_tolerance<double>(52);
  std::pair<double, double> br;
  if (fa == 0.0) {
    residual = 0.0;
    return a;
  }
  if (fb == 0.0) {
    residual = 0.0;
    return b;
  }
  br = boost::math::tools::toms748_solve(g, 0.0, 1.0, fa, fb, tol, it);
  double ga = g(br.first), gb = g(br.second);
  double s = std::abs(ga) <= std::abs(gb) ? br.first : br.second;
  residual = std::min(std::abs(ga), std::abs(gb));
  return VecR(a + s * (b - a));
}

}  // namespace

ResonanceReport find_resonances(const SpectralField& field, const Phase& phase, const VecR& lo, const VecR& hi) {
  const SystemSpec& spec = *field.spec;
  if (lo.size() != spec.d || hi.size() != spec.d) throw InputError("window dimension does not match d");
  if (!field.covers(lo) || !field.covers(hi) || !field.covers(VecR(lo + phase.k)) || !field.covers(VecR(hi + phase.k)))
    throw RangeError("window is not covered by the spectral field after translation by k");

  ResonanceReport rep;
  rep.phase = phase;
  rep.window_lo = lo;
  rep.window_hi = hi;

  // scan indices inside the window, per axis
  std::vector<std::vector<long>> axis_idx(spec.d);
  for (int a = 0; a < spec.d; ++a) {
    const auto& ax = field.axes[a];
    for (long i = 0; i < static_cast<long>(ax.size()); ++i)
      if (ax[i] >= lo(a) - 1e-12 * (1 + std::abs(lo(a))) && ax[i] <= hi(a) + 1e-12 * (1 + std::abs(hi(a))))
        axis_idx[a].push_back(i);
    if (axis_idx[a].size() < 2) throw InputError("window contains fewer than two grid points");
    double cs = (ax[axis_idx[a].back()] - ax[axis_idx[a].front()]) / (axis_idx[a].size() - 1);
    rep.cell_size = std::max(rep.cell_size, cs);
  }
  const long n0 = static_cast<long>(axis_idx[0].size());
  const long n1 = spec.d == 2 ? static_cast<long>(axis_idx[1].size()) : 1;
  const long nf1 = spec.d == 2 ? static_cast<long>(field.axes[1].size()) : 1;
  const long S = n0 * n1;

  std::vector<ScanPoint> scan(S);
  std::string err;
#pragma omp parallel for schedule(static)
  for (long s = 0; s < S; ++s) {
    try {
      long i0 = s / n1, i1 = s % n1;
      long m = axis_idx[0][i0] * nf1 + (spec.d == 2 ? axis_idx[1][i1] : 0);
      scan[s].xi = field.grid[m];
      scan[s].here = field.lambdas[m];
      scan[s].shifted = evaluate_branches(field, VecR(field.grid[m] + phase.k)).lambda;
    } catch (const std::exception& ex) {
#pragma omp critical
      if (err.empty()) err = ex.what();
    }
  }
  if (!err.empty()) throw NumericalError(err);

  double scale = 1.0 + std::abs(phase.omega);
  for (const auto& sp : scan)
    for (double v : sp.here) scale = std::max(scale, 1.0 + std::abs(v));

  const int J = field.J;
  std::vector<PairResonance> found(J * J);
#pragma omp parallel for schedule(dynamic)
  for (int pj = 0; pj < J * J; ++pj) {
    const int i = pj / J, j = pj % J;
    PairResonance pr;
    pr.i = i;
    pr.j = j;
    pr.auto_resonance = (i == j);
    std::vector<double> f(S);
    double fmax = 0.0;
    for (long s = 0; s < S; ++s) {
      f[s] = scan[s].shifted[i] - scan[s].here[j] - phase.omega;
      fmax = std::max(fmax, std::abs(f[s]));
    }
    if (fmax <= policy().root_tol * scale) {
      pr.continuum = true;
      found[pj] = pr;
      continue;
    }
    auto fun = [&](const VecR& x) { return resonance_phase(field, phase, i, j, x); };
    const double ztol = 1e-12 * scale;
    if (spec.d == 1) {
      for (long s = 0; s < S; ++s) {
        if (std::abs(f[s]) <= ztol) {
          pr.roots.push_back(scan[s].xi);
          pr.residuals.push_back(std::abs(f[s]));
        } else if (s + 1 < S && std::abs(f[s + 1]) > ztol && f[s] * f[s + 1] < 0.0) {
          double res = 0.0;
          VecR r = bisect_root(fun, scan[s].xi, scan[s + 1].xi, f[s], f[s + 1], res);
          pr.roots.push_back(r);
          pr.residuals.push_back(res);
        }
      }
    } else {
      for (long a = 0; a + 1 < n0; ++a)
        for (long b = 0; b + 1 < n1; ++b) {
          long c[4] = {a * n1 + b, a * n1 + b + 1, (a + 1) * n1 + b, (a + 1) * n1 + b + 1};
          long lo_c = c[0], hi_c = c[0];
          for (long q : c) {
            if (f[q] < f[lo_c]) lo_c = q;
            if (f[q] > f[hi_c]) hi_c = q;
          }
          if (!(f[lo_c] <= 0.0 && f[hi_c] >= 0.0) || f[lo_c] == f[hi_c]) continue;
          double res = 0.0;
          VecR r = bisect_root(fun, scan[lo_c].xi, scan[hi_c].xi, f[lo_c], f[hi_c], res);
          pr.roots.push_back(r);
          pr.residuals.push_back(res);
        }
    }
    found[pj] = pr;
  }
  for (auto& pr : found)
    if (pr.continuum || !pr.roots.empty()) rep.pairs.push_back(std::move(pr));
  for (const auto& pr : rep.pairs) {
    if (pr.continuum) {
      std::ostringstream os;
      os << "pair (" << pr.i << "," << pr.j << ") has an identically vanishing phase on the window"
         << (pr.auto_resonance ? " (auto-resonance)" : "");
      rep.notes.push_back(os.str());
    }
    for (double r : pr.residuals)
      if (r > policy().root_accept) {
        std::ostringstream os;
        os << "pair (" << pr.i << "," << pr.j << ") root residual " << r << " above acceptance";
        rep.notes.push_back(os.str());
      }
  }

  // boundedness from asymptotic slopes
  std::vector<VecR> dirs;
  if (spec.d == 1) {
    dirs.push_back(VecR::Constant(1, 1.0));
    dirs.push_back(VecR::Constant(1, -1.0));
  } else {
    for (int q = 0; q < 8; ++q) {
      VecR w(2);
      w << std::cos(M_PI * q / 4), std::sin(M_PI * q / 4);
      dirs.push_back(w);
    }
  }
  bool coincide = false;
  for (const auto& w : dirs) {
    AsymptoticSlopes sl = asymptotic_slopes(spec, w, default_radii(spec));
    for (std::size_t a = 0; a < sl.c.size(); ++a)
      for (std::size_t b = a + 1; b < sl.c.size(); ++b)
        if (std::abs(sl.c[a] - sl.c[b]) <= 1e-6 * (1.0 + std::abs(sl.c[a]))) coincide = true;
  }
  double radius = 0.0;
  for (int a = 0; a < spec.d; ++a) radius = std::max({radius, std::abs(lo(a)), std::abs(hi(a))});
  bool edge = false, outer = false;
  for (const auto& pr : rep.pairs)
    for (const auto& r : pr.roots) {
      for (int a = 0; a < spec.d; ++a)
        if (r(a) - lo(a) <= 2 * rep.cell_size || hi(a) - r(a) <= 2 * rep.cell_size) edge = true;
      if (!pr.auto_resonance && r.cwiseAbs().maxCoeff() >= 0.75 * radius) outer = true;
    }
  if (!coincide) {
    rep.bounded_verdict = edge ? "undetermined" : "bounded";
    if (edge) rep.notes.push_back("roots at the window edge: enlarge the window");
  } else {
    rep.bounded_verdict = outer ? "unbounded-at-infinity" : "undetermined";
    rep.notes.push_back("asymptotic slopes coincide across distinct branches");
  }
  rep.harmonics = characteristic_harmonics(spec, phase, 4);
  return rep;
}

std::vector<int> characteristic_harmonics(const SystemSpec& spec, const Phase& phase, int pmax) {
  if (pmax < 2) throw InputError("pmax must be at least 2");
  std::vector<int> out;
  for (int p = -pmax; p <= pmax; ++p) {
    Phase q;
    q.omega = p * phase.omega;
    q.k = p * phase.k;
    if (is_characteristic(spec, q)) out.push_back(p);
  }
  return out;
}

double min_root_distance(const std::vector<VecR>& a, const std::vector<VecR>& b) {
  double d = std::numeric_limits<double>::infinity();
  for (const auto& x : a)
    for (const auto& y : b) d = std::min(d, (x - y).norm());
  return d;
}

json to_json(const ResonanceReport& r) {
  json j;
  j["phase"] = {{"omega", r.phase.omega}, {"k", std::vector<double>(r.phase.k.data(), r.phase.k.data() + r.phase.k.size())}};
  j["window"] = {{"lo", std::vector<double>(r.window_lo.data(), r.window_lo.data() + r.window_lo.size())},
                 {"hi", std::vector<double>(r.window_hi.data(), r.window_hi.data() + r.window_hi.size())}};
  j["cell_size"] = r.cell_size;
  j["bounded_verdict"] = r.bounded_verdict;
  j["harmonics"] = r.harmonics;
  j["pairs"] = json::array();
  for (const auto& p : r.pairs) {
    json e;
    e["pair"] = {p.i + 1, p.j + 1};
    e["auto_resonance"] = p.auto_resonance;
    e["continuum"] = p.continuum;
    e["roots"] = json::array();
    for (std::size_t q = 0; q < p.roots.size(); ++q) {
      const VecR& x = p.roots[q];
      e["roots"].push_back({{"xi", std::vector<double>(x.data(), x.data() + x.size())}, {"residual", p.residuals[q]}});
    }
    j["pairs"].push_back(e);
  }
  j["notes"] = r.notes;
  return j;
}

// ---------------------------------------------------------------- Euler-Maxwell

double em_omega_t2(const EMParams& p, double k) {
  return 1.0 + k * k + p.theta_i * p.theta_i / (p.theta_e * p.theta_e);
}

std::pair<double, double> em_longitudinal_w(const EMParams& p, double k) {
  const double ti2 = p.theta_i * p.theta_i, te2 = p.theta_e * p.theta_e, k2 = k * k;
  const double b = 1.0 + k2 * te2 + p.alpha * p.alpha * k2 * ti2 + ti2 / te2;
  const double c = p.alpha * p.alpha * k2 * ti2 * (1.0 + k2 * te2) + k2 * ti2;
  const double s = std::sqrt(std::max(0.0, b * b - 4.0 * c));
  const double wl = 0.5 * (b + s);
  const double ws = 2.0 * c / (b + s);
  return {ws, wl};
}

double em_transverse_residual(const EMParams& p, double omega, double k) {
  double w = em_omega_t2(p, k);
  return std::abs(omega * omega - w) / w;
}

double em_longitudinal_residual(const EMParams& p, double omega, double k) {
  const double ti2 = p.theta_i * p.theta_i, te2 = p.theta_e * p.theta_e, k2 = k * k, w = omega * omega;
  const double d = (w - p.alpha * p.alpha * k2 * ti2) * (w - 1.0 - k2 * te2) - (w - k2 * te2) * ti2 / te2;
  const double scale = std::max({1.0, w * w, w * (1.0 + k2 * te2)});
  return std::abs(d) / scale;
}

namespace {

struct NotMatchable : NumericalError {
  using NumericalError::NumericalError;
};

}  // namespace

std::vector<PhaseMatch> match_phases_on_dispersion(const std::string& relation,
                                                   const std::map<std::string, double>& params, double k1) {
  EMParams p;
  auto get = [&](const char* key, double& dst) {
    auto it = params.find(key);
    if (it != params.end()) dst = it->second;
  };
  get("theta_e", p.theta_e);
  get("theta_i", p.theta_i);
  get("alpha", p.alpha);
  if (!(p.theta_e > 0) || !(p.theta_i > 0) || !(p.alpha > 0)) throw InputError("theta_e, theta_i, alpha must be positive");

  std::function<double(double)> target;
  std::function<double(double, double)> target_res;
  if (relation == "euler-maxwell-longitudinal-l") {
    target = [&](double k) { return std::sqrt(em_longitudinal_w(p, k).second); };
    target_res = [&](double w, double k) { return em_longitudinal_residual(p, w, k); };
  } else if (relation == "euler-maxwell-longitudinal-s") {
    target = [&](double k) { return std::sqrt(em_longitudinal_w(p, k).first); };
    target_res = [&](double w, double k) { return em_longitudinal_residual(p, w, k); };
  } else if (relation == "euler-maxwell-transverse") {
    target = [&](double k) { return std::sqrt(em_omega_t2(p, k)); };
    target_res = [&](double w, double k) { return em_transverse_residual(p, w, k); };
  } else {
    throw InputError("unknown dispersion relation '" + relation + "'");
  }
  auto wt = [&](double k) { return std::sqrt(em_omega_t2(p, k)); };
  const double w1 = wt(k1);
  auto f = [&](double k2) { return w1 - wt(k2) - target(k1 + k2); };

  const double R = 4.0 * std::abs(k1) + 4.0;
  const int n = 8001;
  std::vector<double> ks = linspace(-R, R, n);
  std::vector<PhaseMatch> out;
  double fprev = f(ks[0]);
  for (int q = 1; q < n; ++q) {
    double fq = f(ks[q]);
    if (fprev == 0.0 || fprev * fq < 0.0) {
      double k2;
      if (fprev == 0.0) {
        k2 = ks[q - 1];
      } else {
        std::uintmax_t it = 200;
        auto br = boost::math::tools::toms748_solve(f, ks[q - 1], ks[q], fprev, fq,
                                                    boost::math::tools::eps_tolerance<double>(52), it);
        k2 = std::abs(f(br.first)) <= std::abs(f(br.second)) ? br.first : br.second;
      }
      PhaseMatch m;
      m.k1 = k1;
      m.k2 = k2;
      m.k = k1 + k2;
      m.omega1 = w1;
      m.omega2 = -wt(k2);
      m.omega = m.omega1 + m.omega2;
      m.residuals = {em_transverse_residual(p, m.omega1, k1), em_transverse_residual(p, m.omega2, k2),
                     target_res(m.omega, m.k)};
      out.push_back(m);
    }
    fprev = fq;
  }
  if (out.empty()) throw NotMatchable("no phase-matching wavenumber in bracket (below threshold)");
  return out;
}

}  // namespace osc
