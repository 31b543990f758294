#include "oscillant/interaction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

namespace osc {

using nlohmann::json;

namespace {

const double kNaN = std::numeric_limits<double>::quiet_NaN();
const double kInf = std::numeric_limits<double>::infinity();

double kernel_residual(const SystemSpec& spec, const Phase& phase, const VecC& e, double sign) {
  MatC h = assemble_symbol(spec, VecR(sign * phase.k));
  return ((h - sign * phase.omega * MatC::Identity(spec.N, spec.N)) * e).norm();
}

void fix_phase(VecC& e) {
  for (int n = 0; n < e.size(); ++n)
    if (std::abs(e(n)) > 1e-8) {
      e *= std::conj(e(n)) / std::abs(e(n));
      return;
    }
}

struct PairPoint {
  MatC plus, minus;
  double phase;
};

PairPoint pair_at(const SpectralField& field, const MatC& Be1, const MatC& Bem1, const Phase& phase, int i, int j,
                  const VecR& xi) {
  BranchPoint s = evaluate_branches(field, VecR(xi + phase.k));
  BranchPoint b = evaluate_branches(field, xi);
  MatC Pi = s.projector(i), Pj = b.projector(j);
  return {Pi * Be1 * Pj, Pj * Bem1 * Pi, s.lambda[i] - phase.omega - b.lambda[j]};
}

double coef_norm(const PairPoint& p) { return std::max(sup_norm(p.plus), sup_norm(p.minus)); }

std::vector<VecR> window_points(const SpectralField& field, const ResonanceReport& rep, std::size_t cap) {
  std::vector<VecR> pts;
  for (const auto& x : field.grid) {
    bool in = true;
    for (int a = 0; a < x.size(); ++a)
      if (x(a) < rep.window_lo(a) || x(a) > rep.window_hi(a)) in = false;
    if (in) pts.push_back(x);
  }
  if (pts.size() > cap) {
    std::vector<VecR> sub;
    const double step = double(pts.size() - 1) / (cap - 1);
    for (std::size_t q = 0; q < cap; ++q) sub.push_back(pts[static_cast<std::size_t>(std::llround(q * step))]);
    pts.swap(sub);
  }
  return pts;
}

}  // namespace

PolarizationVectors polarization_vectors(const SystemSpec& spec, const Phase& phase) {
  MatC h = assemble_symbol(spec, phase.k);
  Eigen::SelfAdjointEigenSolver<MatC> es(h);
  const VecR& w = es.eigenvalues();
  const double scale = std::max({1.0, w.cwiseAbs().maxCoeff(), std::abs(phase.omega)});
  std::vector<int> hits;
  for (int n = 0; n < w.size(); ++n)
    if (std::abs(w(n) - phase.omega) <= policy().char_tol * scale) hits.push_back(n);
  if (hits.size() != 1) {
    std::ostringstream os;
    os << "characteristic kernel has dimension " << hits.size() << " (rank-one framework needs 1)";
    throw MultiplicityError(os.str());
  }
  PolarizationVectors p;
  p.e1 = es.eigenvectors().col(hits[0]);
  fix_phase(p.e1);
  p.em1 = p.e1.conjugate();
  p.residual1 = kernel_residual(spec, phase, p.e1, 1.0);
  p.residual_m1 = kernel_residual(spec, phase, p.em1, -1.0);
  return p;
}

PolarizationVectors polarization_from(const SystemSpec& spec, const Phase& phase, const VecC& e) {
  if (e.size() != spec.N || e.norm() == 0.0) throw InputError("supplied polarization has wrong size or is zero");
  PolarizationVectors p;
  p.e1 = e / e.norm();
  p.em1 = p.e1.conjugate();
  p.residual1 = kernel_residual(spec, phase, p.e1, 1.0);
  p.residual_m1 = kernel_residual(spec, phase, p.em1, -1.0);
  return p;
}

CoefficientSample harmonic_coefficient(const SpectralField& field, const PolarizationVectors& pol,
                                       const Phase& phase, int i, int j, int ell, const VecR& xi) {
  if (ell != 1 && ell != -1) throw InputError("harmonic must be +1 or -1");
  const VecC& e = ell == 1 ? pol.e1 : pol.em1;
  MatC Be = linearized_source(*field.spec, e);
  BranchPoint s = evaluate_branches(field, VecR(xi + ell * phase.k));
  BranchPoint b = evaluate_branches(field, xi);
  CoefficientSample c;
  c.xi = xi;
  c.matrix = s.projector(i) * Be * b.projector(j);
  c.phase = s.lambda[i] - ell * phase.omega - b.lambda[j];
  return c;
}

InteractionCoefficients interaction_coefficients(const SpectralField& field, const PolarizationVectors& pol,
                                                 const Phase& phase, int i, int j, const std::vector<VecR>& grid,
                                                 Exec exec) {
  const SystemSpec& spec = *field.spec;
  if (i < 0 || j < 0 || i >= field.J || j >= field.J) throw InputError("branch index out of range");
  for (const auto& x : grid)
    if (!field.covers(x) || !field.covers(VecR(x + phase.k)))
      throw RangeError("coefficient grid not covered by the spectral field after translation by k");
  const MatC Be1 = linearized_source(spec, pol.e1), Bem1 = linearized_source(spec, pol.em1);
  InteractionCoefficients c;
  c.i = i;
  c.j = j;
  c.xi = grid;
  const long M = static_cast<long>(grid.size());
  c.b_plus.resize(M);
  c.b_minus.resize(M);
  c.rank_plus.resize(M);
  c.rank_minus.resize(M);
  c.gamma.resize(M);
  c.phase.resize(M);
  auto body = [&](long m) {
    PairPoint p = pair_at(field, Be1, Bem1, phase, i, j, grid[m]);
    c.rank_plus[m] = numerical_rank(p.plus);
    c.rank_minus[m] = numerical_rank(p.minus);
    c.gamma[m] = (p.plus * p.minus).trace();
    c.phase[m] = p.phase;
    c.b_plus[m] = std::move(p.plus);
    c.b_minus[m] = std::move(p.minus);
  };
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
    for (long m = 0; m < M; ++m) body(m);
  } else {
    for (long m = 0; m < M; ++m) body(m);
  }
  return c;
}

std::vector<double> default_h_values() { return {0.1, 0.05, 0.025, 0.0125}; }

TransparencyDiagnostic transparency_check(const SpectralField& field, const PolarizationVectors& pol,
                                          const Phase& phase, const ResonanceReport& report, int i, int j,
                                          const std::vector<double>& h_values, const std::vector<VecR>* points) {
  const SystemSpec& spec = *field.spec;
  const MatC Be1 = linearized_source(spec, pol.e1), Bem1 = linearized_source(spec, pol.em1);
  const double scale = std::max(sup_norm(Be1), 1e-300);
  TransparencyDiagnostic t;
  t.i = i;
  t.j = j;
  for (std::size_t q = 1; q < h_values.size(); ++q)
    if (!(h_values[q] < h_values[q - 1])) throw InputError("h values must be decreasing");

  const PairResonance* pr = report.find(i, j);
  if (!points && pr && pr->continuum) {
    // whole window is resonant: judge the coefficient itself
    for (const auto& x : window_points(field, report, 512))
      t.at_resonance_norm = std::max(t.at_resonance_norm, coef_norm(pair_at(field, Be1, Bem1, phase, i, j, x)));
    t.notes.push_back("continuum resonance: coefficient judged over the window");
    t.verdict = t.at_resonance_norm <= policy().zero_coeff                   ? "transparent"
                : t.at_resonance_norm >= policy().nonzero_coeff * scale ? "non-transparent"
                                                                            : "borderline";
    return t;
  }
  std::vector<VecR> roots = points ? *points : (pr ? pr->roots : std::vector<VecR>{});
  if (roots.empty()) {
    t.verdict = "transparent";
    t.notes.push_back("empty resonant set: vacuously transparent");
    return t;
  }

  t.ratio_per_h.assign(h_values.size(), kNaN);
  for (const auto& r : roots) {
    t.at_resonance_norm = std::max(t.at_resonance_norm, coef_norm(pair_at(field, Be1, Bem1, phase, i, j, r)));
    // phase gradient at the root
    VecR g(spec.d);
    for (int a = 0; a < spec.d; ++a) {
      const double dx = 1e-5 * (1.0 + std::abs(r(a)));
      VecR p = r, m = r;
      p(a) += dx;
      m(a) -= dx;
      auto inside = [&](const VecR& x) { return field.covers(x) && field.covers(VecR(x + phase.k)); };
      const bool ip = inside(p), im = inside(m);
      if (!ip) p = r;
      if (!im) m = r;
      const double span = (ip ? dx : 0.0) + (im ? dx : 0.0);
      g(a) = span > 0 ? (resonance_phase(field, phase, i, j, p) - resonance_phase(field, phase, i, j, m)) / span : 0.0;
    }
    std::vector<VecR> dirs;
    if (g.norm() > 1e-8) {
      dirs.push_back(g / g.norm());
    } else {
      for (int a = 0; a < spec.d; ++a) dirs.push_back(VecR::Unit(spec.d, a));
    }
    const double slope = std::max(g.norm(), 1e-3);
    for (std::size_t q = 0; q < h_values.size(); ++q) {
      const double h = h_values[q];
      for (const auto& w : dirs)
        for (double sgn : {-1.0, 1.0})
          for (int s = 0; s <= 8; ++s) {
            const double dist = (0.5 + 0.5 * s / 8.0) * h / slope;
            VecR x = r + sgn * dist * w;
            if (!field.covers(x) || !field.covers(VecR(x + phase.k))) continue;
            PairPoint p = pair_at(field, Be1, Bem1, phase, i, j, x);
            const double ph = std::abs(p.phase);
            if (ph < 0.5 * h || ph > h) continue;
            const double ratio = coef_norm(p) / ph;
            if (std::isnan(t.ratio_per_h[q]) || ratio > t.ratio_per_h[q]) t.ratio_per_h[q] = ratio;
          }
    }
  }
  bool growth_ok = true;
  double prev = kNaN;
  for (double r : t.ratio_per_h) {
    if (std::isnan(r)) continue;
    t.ratio_sup = std::max(t.ratio_sup, r);
    if (!std::isnan(prev) && r > policy().nonzero_coeff * scale && r > 2.0 * prev) growth_ok = false;
    prev = r;
  }
  if (!growth_ok) t.notes.push_back("coefficient/phase ratio grows faster than 2 per halving of h");
  if (t.at_resonance_norm <= policy().zero_coeff && growth_ok)
    t.verdict = "transparent";
  else if (t.at_resonance_norm >= policy().nonzero_coeff * scale)
    t.verdict = "non-transparent";
  else
    t.verdict = "borderline";
  return t;
}

std::vector<PartialTransparency> partial_transparency_conditions(const SpectralField& field,
                                                                 const PolarizationVectors& pol,
                                                                 const Phase& phase, const ResonanceReport& report,
                                                                 const std::vector<std::pair<int, int>>& R0,
                                                                 const std::vector<double>& h_values) {
  const double tol = std::max(report.cell_size, 1e-8);
  auto roots_of = [&](int a, int b) -> std::vector<VecR> {
    const PairResonance* p = report.find(a, b);
    return p ? p->roots : std::vector<VecR>{};
  };
  auto push_unique = [&](std::vector<VecR>& v, const VecR& x) {
    for (const auto& y : v)
      if ((x - y).norm() <= tol) return;
    v.push_back(x);
  };
  std::vector<PartialTransparency> out;
  for (const auto& [i, j] : R0) {
    PartialTransparency pt;
    pt.i = i;
    pt.j = j;
    const auto rij = roots_of(i, j);
    for (const auto& [a, b] : R0) {
      for (const auto& r : rij) {
        if (b == i)
          for (const auto& s : roots_of(a, b))
            if ((r - (s - phase.k)).norm() <= tol) push_unique(pt.translate_points, r);
        if (a == j)
          for (const auto& s : roots_of(a, b))
            if ((r - (s + phase.k)).norm() <= tol) push_unique(pt.translate_points, r);
        if (a == i && b != j)
          for (const auto& s : roots_of(a, b))
            if ((r - s).norm() <= tol) push_unique(pt.coalescence_points, r);
        if (b == j && a != i)
          for (const auto& s : roots_of(a, b))
            if ((r - s).norm() <= tol) push_unique(pt.coalescence_points, r);
      }
    }
    std::vector<VecR> all = pt.translate_points;
    for (const auto& x : pt.coalescence_points) push_unique(all, x);
    if (all.empty()) {
      pt.notes.push_back("intersection sets empty");
    } else {
      TransparencyDiagnostic t = transparency_check(field, pol, phase, report, i, j, h_values, &all);
      pt.pass = t.verdict == "transparent";
      for (const auto& n : t.notes) pt.notes.push_back(n);
    }
    out.push_back(pt);
  }
  return out;
}

StabilityReport stability_report(const SpectralField& field, const PolarizationVectors& pol, const Phase& phase,
                                 const ResonanceReport& report, const StabilityInputs& in,
                                 const std::vector<double>& h_values) {
  const SystemSpec& spec = *field.spec;
  if (!(in.a_sup > 0) || !(in.a_hatL1 > 0)) throw InputError("amplitude norms must be positive");
  const MatC Be1 = linearized_source(spec, pol.e1), Bem1 = linearized_source(spec, pol.em1);
  StabilityReport st;
  st.inputs = in;
  st.ka_gate = in.K <= in.Ka + 0.5;
  bool borderline = false;

  for (const auto& pr : report.pairs) {
    PairSummary ps;
    ps.i = pr.i;
    ps.j = pr.j;
    if (phase.is_zero() && pr.i > pr.j) {
      // at the zero phase (i,j) and (j,i) describe the same interaction
      ps.transparency.i = pr.i;
      ps.transparency.j = pr.j;
      ps.transparency.verdict = "mirror";
      st.pairs.push_back(ps);
      continue;
    }
    ps.transparency = transparency_check(field, pol, phase, report, pr.i, pr.j, h_values);
    if (ps.transparency.verdict == "borderline") borderline = true;
    if (ps.transparency.verdict == "non-transparent") {
      if (pr.auto_resonance) st.notes.push_back("non-transparent auto-resonance: assumptions of the index fail");
      st.R0.push_back({pr.i, pr.j});
      std::vector<VecR> pts = pr.continuum ? window_points(field, report, 512) : pr.roots;
      double max_re = -kInf, max_im = 0.0, max_sqrt = -kInf;
      for (const auto& x : pts) {
        PairPoint p = pair_at(field, Be1, Bem1, phase, pr.i, pr.j, x);
        cd g = (p.plus * p.minus).trace();
        ps.gamma_at_roots.push_back(g);
        max_re = std::max(max_re, g.real());
        max_im = std::max(max_im, std::abs(g.imag()));
        max_sqrt = std::max(max_sqrt, std::sqrt(g).real());
        ps.b0_ij = std::max(ps.b0_ij, coef_norm(p));
        const bool zero_plus = sup_norm(p.plus) <= policy().zero_coeff;
        const bool zero_minus = sup_norm(p.minus) <= policy().zero_coeff;
        if (!zero_plus && !zero_minus && (numerical_rank(p.plus) > 1 || numerical_rank(p.minus) > 1))
          ps.rank_one = false;
      }
      ps.max_re_gamma = max_re;
      ps.max_abs_im_gamma = max_im;
      ps.gamma_ij = std::abs(max_sqrt);
      if (!ps.rank_one) st.notes.push_back("interaction coefficients of rank above one: rank-one framework fails");
    }
    st.pairs.push_back(ps);
  }

  // global sup of coefficient norms over all pairs and the window
  {
    std::vector<VecR> pts = window_points(field, report, 256);
    for (const auto& pr : report.pairs)
      for (const auto& r : pr.roots) pts.push_back(r);
    std::vector<double> best(pts.size(), 0.0);
#pragma omp parallel for schedule(static)
    for (long m = 0; m < static_cast<long>(pts.size()); ++m) {
      if (!field.covers(VecR(pts[m] + phase.k))) continue;
      BranchPoint s = evaluate_branches(field, VecR(pts[m] + phase.k));
      BranchPoint b = evaluate_branches(field, pts[m]);
      for (int i = 0; i < field.J; ++i)
        for (int j = 0; j < field.J; ++j) {
          MatC Pi = s.projector(i), Pj = b.projector(j);
          best[m] = std::max({best[m], sup_norm(MatC(Pi * Be1 * Pj)), sup_norm(MatC(Pj * Bem1 * Pi))});
        }
    }
    for (double v : best) st.B_full = std::max(st.B_full, v);
  }

  double index = -kInf;
  for (const auto& ps : st.pairs) {
    if (ps.transparency.verdict != "non-transparent") continue;
    st.B0 = std::max(st.B0, ps.b0_ij);
    st.gamma = std::max(st.gamma, ps.gamma_ij);
  }
  const double tol = policy().degenerate_index * std::max(st.B0 * st.B0, 1e-300);
  for (const auto& ps : st.pairs) {
    if (ps.transparency.verdict != "non-transparent") continue;
    double v = ps.max_re_gamma;
    if (ps.max_abs_im_gamma > tol) v = std::max(v, ps.max_abs_im_gamma);
    index = std::max(index, v);
  }
  st.B_full = std::max(st.B_full, st.B0);

  const double K = in.K, d = in.d, as = in.a_sup, ah = in.a_hatL1, g = st.gamma, B0 = st.B0, B = st.B_full;
  auto div = [](double a, double b) { return b > 0 ? a / b : kInf; };
  st.T0 = std::max(div(K, B0 * ah), div(K - d / 2, g * as));
  st.K0 = B0 > 0 ? std::min(K * (1.0 - g * as / (B0 * ah)), d / 2) : d / 2;
  st.T0p = std::min(std::max(div(K - 0.5, B * ah), div(K - (d + 1) / 2, B * as)), div(1.0, 2.0 * (B - g) * as));
  st.K0p = K - st.T0p * g * as;
  st.T0pp = std::max(div(K - 0.5, B0 * ah), div(K - (d + 1) / 2, g * as));
  st.K0pp = K + in.beta * d / 2 - st.T0pp * g * as;
  st.Tinf = div(K, g * as);

  st.partial = partial_transparency_conditions(field, pol, phase, report, st.R0, h_values);
  for (const auto& p : st.partial)
    if (!p.pass) {
      std::ostringstream os;
      os << "partial transparency fails near intersections for pair (" << p.i + 1 << "," << p.j + 1 << ")";
      st.notes.push_back(os.str());
    }

  if (borderline) {
    st.Gamma_index = std::isfinite(index) ? index : 0.0;
    st.verdict = "undetermined";
    st.notes.push_back("borderline transparency verdict: refine the grid or window");
  } else if (st.R0.empty()) {
    st.Gamma_index = 0.0;
    st.verdict = "stable-by-transparency";
    st.notes.push_back("no non-transparent resonance: index is zero (degenerate)");
  } else {
    st.Gamma_index = index;
    if (index > tol)
      st.verdict = "unstable";
    else if (index < -tol)
      st.verdict = "stable";
    else
      st.verdict = "degenerate";
  }
  if (st.verdict == "unstable" && !st.ka_gate) st.notes.push_back("K > K_a + 1/2: instability theorem does not apply");
  if (report.bounded_verdict != "bounded") st.notes.push_back("resonant set not shown bounded: " + report.bounded_verdict);
  return st;
}

namespace {

json num(double v) { return std::isfinite(v) ? json(v) : json(v > 0 ? "inf" : (v < 0 ? "-inf" : "nan")); }

json cnum(cd z) { return json::array({z.real(), z.imag()}); }

json vec(const VecR& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

}  // namespace

json to_json(const StabilityReport& r) {
  json j;
  j["Gamma_index"] = num(r.Gamma_index);
  j["gamma"] = num(r.gamma);
  j["B0"] = num(r.B0);
  j["B_full"] = num(r.B_full);
  j["T0"] = num(r.T0);
  j["K0"] = num(r.K0);
  j["T0_prime"] = num(r.T0p);
  j["K0_prime"] = num(r.K0p);
  j["T0_doubleprime"] = num(r.T0pp);
  j["K0_doubleprime"] = num(r.K0pp);
  j["T_inf"] = num(r.Tinf);
  j["verdict"] = r.verdict;
  j["inputs"] = {{"K", r.inputs.K}, {"K_a", r.inputs.Ka}, {"a_sup", r.inputs.a_sup},
                 {"a_hatL1", r.inputs.a_hatL1}, {"d", r.inputs.d}, {"beta", r.inputs.beta}};
  j["ka_gate"] = r.ka_gate;
  j["R0"] = json::array();
  for (const auto& [a, b] : r.R0) j["R0"].push_back({a + 1, b + 1});
  j["pairs"] = json::array();
  for (const auto& p : r.pairs) {
    json e;
    e["pair"] = {p.i + 1, p.j + 1};
    e["transparency"] = p.transparency.verdict;
    e["at_resonance_norm"] = num(p.transparency.at_resonance_norm);
    e["ratio_sup"] = num(p.transparency.ratio_sup);
    if (p.transparency.verdict == "non-transparent") {
      e["gamma_ij"] = num(p.gamma_ij);
      e["B0_ij"] = num(p.b0_ij);
      e["max_re_Gamma"] = num(p.max_re_gamma);
      e["max_abs_im_Gamma"] = num(p.max_abs_im_gamma);
      e["rank_one"] = p.rank_one;
      e["Gamma_at_roots"] = json::array();
      for (cd z : p.gamma_at_roots) e["Gamma_at_roots"].push_back(cnum(z));
    }
    if (!p.transparency.notes.empty()) e["notes"] = p.transparency.notes;
    j["pairs"].push_back(e);
  }
  j["partial_transparency"] = json::array();
  for (const auto& p : r.partial) {
    json e;
    e["pair"] = {p.i + 1, p.j + 1};
    e["pass"] = p.pass;
    e["translate_points"] = json::array();
    for (const auto& x : p.translate_points) e["translate_points"].push_back(vec(x));
    e["coalescence_points"] = json::array();
    for (const auto& x : p.coalescence_points) e["coalescence_points"].push_back(vec(x));
    j["partial_transparency"].push_back(e);
  }
  j["notes"] = r.notes;
  return j;
}

HomologicalResult solve_homological(const std::vector<VecR>& xi, const std::vector<MatC>& source,
                                    const std::vector<double>& phase) {
  if (xi.size() != source.size() || xi.size() != phase.size()) throw InputError("homological inputs differ in size");
  HomologicalResult r;
  for (std::size_t m = 0; m < xi.size(); ++m) {
    const double s = sup_norm(source[m]);
    if (std::abs(phase[m]) > 1e-6) {
      r.sup_Q = std::max(r.sup_Q, s / std::abs(phase[m]));
    } else if (s > policy().zero_coeff) {
      r.solvable = false;
      r.witness = xi[m];
      return r;
    }
  }
  return r;
}

HomologicalResult solve_homological(const SpectralField& field, const PolarizationVectors& pol, const Phase& phase,
                                    int i, int j, int ell, const std::vector<VecR>& grid) {
  std::vector<MatC> src(grid.size());
  std::vector<double> ph(grid.size());
#pragma omp parallel for schedule(static)
  for (long m = 0; m < static_cast<long>(grid.size()); ++m) {
    CoefficientSample c = harmonic_coefficient(field, pol, phase, i, j, ell, grid[m]);
    src[m] = std::move(c.matrix);
    ph[m] = c.phase;
  }
  return solve_homological(grid, src, ph);
}

Symmetrizer symmetrizer_basis(const MatC& C12, const MatC& C21, cd nu12, cd nu21) {
  const long N = C12.rows();
  if (C12.cols() != N || C21.rows() != N || C21.cols() != N) throw InputError("symmetrizer needs square blocks of equal size");
  auto rank_one = [](const Eigen::JacobiSVD<MatC>& svd) {
    const auto& s = svd.singularValues();
    return s(0) > 0 && (s.size() < 2 || s(1) <= 1e-6 * s(0));
  };
  Eigen::JacobiSVD<MatC> s12(C12, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::JacobiSVD<MatC> s21(C21, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (!rank_one(s12) || !rank_one(s21)) throw PreconditionError("symmetrizer requires rank C12 = rank C21 = 1");
  const cd tr = (C12 * C21).trace();
  if (std::abs(tr) < 1e-10 * C12.norm() * C21.norm()) throw PreconditionError("symmetrizer requires tr C12 C21 != 0");

  const VecC e = s12.matrixU().col(0), f = s21.matrixU().col(0);
  Symmetrizer out;
  out.c21 = (f.adjoint() * C21 * e)(0, 0);
  out.c12 = (e.adjoint() * C12 * f)(0, 0);
  // columns: e#, ker C21 #, f flat, ker C12 flat
  MatC P = MatC::Zero(2 * N, 2 * N);
  P.block(0, 0, N, 1) = e;
  P.block(0, 1, N, N - 1) = s21.matrixV().rightCols(N - 1);
  P.block(N, N, N, 1) = f;
  P.block(N, N + 1, N, N - 1) = s12.matrixV().rightCols(N - 1);
  MatC C = MatC::Zero(2 * N, 2 * N);
  C.block(0, N, N, N) = nu12 * C12;
  C.block(N, 0, N, N) = nu21 * C21;
  MatC red = MatC::Zero(2 * N, 2 * N);
  red(0, N) = nu12 * out.c12;
  red(N, 0) = nu21 * out.c21;
  MatC conj = P.fullPivLu().solve(C * P);
  out.P = P;
  out.reduced = red;
  out.residual = (conj - red).cwiseAbs().maxCoeff();
  return out;
}

}  // namespace osc
