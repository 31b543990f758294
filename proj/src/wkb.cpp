#include "oscillant/wkb.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "fft.hpp"

namespace osc {

namespace {

const cd I(0.0, 1.0);

MatC shifted_symbol(const SystemSpec& spec, const Phase& phase, int p) {
  VecR k = phase.k.size() ? VecR(p * phase.k) : VecR::Zero(spec.d);
  return assemble_symbol(spec, k) - double(p) * phase.omega * MatC::Identity(spec.N, spec.N);
}

double kernel_tol(const MatC& h) { return 1e-9 * std::max(1.0, h.cwiseAbs().maxCoeff()); }

VecC random_unit(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> nd;
  VecC v(n);
  for (int i = 0; i < n; ++i) v(i) = cd(nd(rng), nd(rng));
  return v / v.norm();
}

// B(w) v = B(w, v) + B(v, w)
VecC sym_apply(const SystemSpec& spec, const VecC& w, const VecC& v) { return bilinear(spec, w, v) + bilinear(spec, v, w); }

void check_gate(const SystemSpec& spec, const Phase& phase) {
  for (int p : characteristic_harmonics(spec, phase, 4))
    if (std::abs(p) > 1)
      throw NotApplicableError("characteristic harmonic p = " + std::to_string(p) +
                               " outside {-1,0,1}: the WKB cascade does not apply");
}

std::vector<cd> derivative(detail::Fft& fft, std::vector<cd> v, double L) {
  const int n = fft.size();
  fft.forward(v);
  for (int m = 0; m < n; ++m) v[m] *= (m == n / 2) ? 0.0 : I * detail::Fft::wavenumber(m, n, L);
  fft.backward(v);
  return v;
}

// zero-padded spectral interpolation from n to nf points
std::vector<cd> refine(detail::Fft& coarse, detail::Fft& fine, std::vector<cd> v) {
  const int n = coarse.size(), nf = fine.size();
  coarse.forward(v);
  std::vector<cd> w(nf, 0.0);
  for (int m = 0; m < n; ++m) {
    const int s = m <= n / 2 ? m : m - n;
    cd c = v[m];
    if (m == n / 2) c *= 0.5;
    w[(s + nf) % nf] += c * (double(nf) / n);
    if (m == n / 2) w[(nf - n / 2) % nf] += c * (double(nf) / n);
  }
  fine.backward(w);
  return w;
}

}  // namespace

MatC characteristic_matrix(const SystemSpec& spec, const Phase& phase, int p) {
  return I * shifted_symbol(spec, phase, p);
}

MatC characteristic_projector(const SystemSpec& spec, const Phase& phase, int p) {
  const MatC h = shifted_symbol(spec, phase, p);
  Eigen::SelfAdjointEigenSolver<MatC> es(h);
  const double tol = kernel_tol(h);
  MatC P = MatC::Zero(spec.N, spec.N);
  for (int q = 0; q < spec.N; ++q)
    if (std::abs(es.eigenvalues()(q)) <= tol) P += es.eigenvectors().col(q) * es.eigenvectors().col(q).adjoint();
  return P;
}

MatC partial_inverse(const SystemSpec& spec, const Phase& phase, int p) {
  const MatC h = shifted_symbol(spec, phase, p);
  Eigen::SelfAdjointEigenSolver<MatC> es(h);
  const double tol = kernel_tol(h);
  MatC R = MatC::Zero(spec.N, spec.N);
  for (int q = 0; q < spec.N; ++q) {
    const double mu = es.eigenvalues()(q);
    if (std::abs(mu) > tol) R += es.eigenvectors().col(q) * es.eigenvectors().col(q).adjoint() / (I * mu);
  }
  return R;
}

WeakTransparencyResult weak_transparency_check(const SystemSpec& spec, const Phase& phase, int random_samples,
                                               std::uint64_t seed) {
  if (phase.is_zero()) throw NotApplicableError("weak transparency needs an oscillating phase");
  check_gate(spec, phase);
  std::vector<MatC> P;
  for (int p = -1; p <= 1; ++p) P.push_back(characteristic_projector(spec, phase, p));
  auto proj = [&](int p) -> const MatC& { return P[p + 1]; };

  std::vector<std::pair<VecC, VecC>> samples;
  for (int a = 0; a < spec.N; ++a)
    for (int b = 0; b < spec.N; ++b) samples.emplace_back(VecC::Unit(spec.N, a), VecC::Unit(spec.N, b));
  std::mt19937_64 rng(seed);
  for (int s = 0; s < random_samples; ++s) {
    VecC u = random_unit(rng, spec.N);
    VecC v = random_unit(rng, spec.N);
    samples.emplace_back(u, v);
  }

  WeakTransparencyResult r;
  r.scale = std::max(1.0, spec.b_norm());
  for (const auto& [u, v] : samples)
    for (int p = -1; p <= 1; ++p) {
      VecC acc = VecC::Zero(spec.N);
      for (int p1 = -1; p1 <= 1; ++p1) {
        const int p2 = p - p1;
        if (std::abs(p2) > 1) continue;
        acc += bilinear(spec, VecC(proj(p1) * u), VecC(proj(p2) * v));
      }
      const double nrm = (proj(p) * acc).norm();
      if (nrm > r.max_norm) {
        r.max_norm = nrm;
        r.witness_p = p;
        r.witness_u = u;
        r.witness_v = v;
      }
    }
  r.pass = r.max_norm <= 1e-10 * r.scale;
  return r;
}

WKBSolution solve_transport(const SystemSpec& spec, const Phase& phase, const PolarizationVectors& pol,
                            const std::function<cd(double)>& a0, double T_a, double L, int n, int snapshots) {
  if (spec.d != 1) throw NotApplicableError("the transport solver is one-dimensional");
  if (n < 8 || (n & (n - 1))) throw InputError("grid points must be a power of two >= 8");
  if (!(L > 0) || !(T_a >= 0)) throw InputError("domain length must be positive and T_a non-negative");
  WKBSolution w;
  w.phase = phase;
  w.oscillating = !phase.is_zero();
  w.e1 = pol.e1;
  w.em1 = pol.em1;
  w.L = L;
  const MatR A = spec.Aj[0];

  if (!w.oscillating) {
    const VecC Ae = A.cast<cd>() * pol.e1;
    const cd v = pol.e1.dot(Ae);
    if ((Ae - v * pol.e1).norm() > 1e-10 || std::abs(v.imag()) > 1e-12)
      throw NotApplicableError("reference direction is not an eigenvector of A(xi)");
    if (bilinear(spec, pol.e1, pol.e1).norm() > 1e-12 || (spec.A0.cast<cd>() * pol.e1).norm() > 1e-12)
      throw NotApplicableError("non-oscillating reference requires B(e,e) = 0 and A0 e = 0");
    w.group_velocity = v.real();
    w.cubic = 0.0;
    w.polarization_residual = 0.0;
  } else {
    check_gate(spec, phase);
    if (spec.has_conjugation()) throw NotApplicableError("the cascade assumes a complex-bilinear B");
    const MatC P1 = characteristic_projector(spec, phase, 1);
    const int rank = static_cast<int>(std::lround(P1.trace().real()));
    if (rank != 1)
      throw MultiplicityError("beta is not a simple point (kernel dimension " + std::to_string(rank) + ")");
    w.polarization_residual = ((MatC::Identity(spec.N, spec.N) - P1) * pol.e1).norm();
    // group velocity of the branch through (omega, k)
    const double h = 1e-5 * std::max(1.0, std::abs(phase.k(0)));
    auto branch = [&](double xi) {
      Eigen::SelfAdjointEigenSolver<MatC> es(assemble_symbol(spec, xi), Eigen::EigenvaluesOnly);
      double best = es.eigenvalues()(0);
      for (int q = 1; q < spec.N; ++q)
        if (std::abs(es.eigenvalues()(q) - phase.omega) < std::abs(best - phase.omega)) best = es.eigenvalues()(q);
      return best;
    };
    w.group_velocity = (branch(phase.k(0) + h) - branch(phase.k(0) - h)) / (2 * h);
    const MatC Rp2 = partial_inverse(spec, phase, 2), Rm2 = partial_inverse(spec, phase, -2);
    const MatC R0 = partial_inverse(spec, phase, 0);
    w.w2 = Rp2 * bilinear(spec, pol.e1, pol.e1);
    w.wm2 = Rm2 * bilinear(spec, pol.em1, pol.em1);
    w.w0 = R0 * sym_apply(spec, pol.e1, pol.em1);
    const VecC T = sym_apply(spec, pol.em1, w.w2) + sym_apply(spec, pol.e1, w.w0);
    w.cubic = pol.e1.dot(P1 * T) / pol.e1.squaredNorm();
  }

  // integrating-factor RK4: advection exact in Fourier, cubic term explicit
  detail::Fft fft(n);
  const double dx = L / n;
  w.x.resize(n);
  std::vector<cd> g(n);
  for (int i = 0; i < n; ++i) {
    w.x[i] = -0.5 * L + i * dx;
    g[i] = a0(w.x[i]);
  }
  double amax = 0.0;
  for (const cd& z : g) amax = std::max(amax, std::abs(z));
  const double rate = std::abs(w.cubic) * amax * amax;
  int steps = std::max(1, static_cast<int>(std::ceil(T_a / std::min(T_a > 0 ? T_a : 1.0, rate > 0 ? 0.02 / rate : 1e300))));
  snapshots = std::max(2, snapshots);
  steps = ((steps + snapshots - 2) / (snapshots - 1)) * (snapshots - 1);
  const double dt = T_a / steps;
  const int every = steps / (snapshots - 1);
  std::vector<cd> shift_half(n), shift_full(n);
  for (int m = 0; m < n; ++m) {
    const double xi = detail::Fft::wavenumber(m, n, L);
    shift_half[m] = std::exp(-I * w.group_velocity * xi * 0.5 * dt);
    shift_full[m] = std::exp(-I * w.group_velocity * xi * dt);
  }
  auto nonlinear = [&](const std::vector<cd>& gh) {
    std::vector<cd> v(n);
    for (int i = 0; i < n; ++i) v[i] = w.cubic * std::norm(gh[i]) * gh[i];
    fft.forward(v);
    return v;
  };
  auto to_phys = [&](std::vector<cd> gh) {
    fft.backward(gh);
    return gh;
  };
  auto mul = [&](const std::vector<cd>& a, const std::vector<cd>& s) {
    std::vector<cd> r(n);
    for (int m = 0; m < n; ++m) r[m] = a[m] * s[m];
    return r;
  };
  auto axpy = [&](const std::vector<cd>& a, const std::vector<cd>& b, double c) {
    std::vector<cd> r(n);
    for (int m = 0; m < n; ++m) r[m] = a[m] + c * b[m];
    return r;
  };
  std::vector<cd> gh = g;
  fft.forward(gh);
  w.t.push_back(0.0);
  w.g.push_back(g);
  for (int s = 1; s <= steps; ++s) {
    const bool active = w.cubic != 0.0;
    if (active) {
      const std::vector<cd> k1 = nonlinear(to_phys(gh));
      const std::vector<cd> ghh = mul(gh, shift_half);
      const std::vector<cd> k2 = nonlinear(to_phys(axpy(ghh, mul(k1, shift_half), 0.5 * dt)));
      const std::vector<cd> k3 = nonlinear(to_phys(axpy(ghh, k2, 0.5 * dt)));
      const std::vector<cd> k4 = nonlinear(to_phys(axpy(mul(gh, shift_full), mul(k3, shift_half), dt)));
      for (int m = 0; m < n; ++m)
        gh[m] = gh[m] * shift_full[m] +
                dt / 6.0 * (k1[m] * shift_full[m] + 2.0 * (k2[m] + k3[m]) * shift_half[m] + k4[m]);
    } else {
      gh = mul(gh, shift_full);
    }
    if (s % every == 0) {
      w.t.push_back(s * dt);
      w.g.push_back(to_phys(gh));
    }
  }
  return w;
}

std::string wkb_csv(const WKBSolution& w) {
  std::ostringstream os;
  os.precision(17);
  os << "t,x,re_g,im_g\n";
  for (std::size_t s = 0; s < w.t.size(); ++s)
    for (std::size_t i = 0; i < w.x.size(); ++i)
      os << w.t[s] << ',' << w.x[i] << ',' << w.g[s][i].real() << ',' << w.g[s][i].imag() << '\n';
  return os.str();
}

ResidualFit consistency_residual(WKBSolution& w, const SystemSpec& spec, const std::vector<double>& epsilons,
                                 bool with_corrector, long max_points) {
  if (w.g.empty()) throw InputError("empty WKB solution");
  if (epsilons.size() < 2) throw InputError("need at least two epsilon values");
  const int n = static_cast<int>(w.x.size());
  const double L = w.L;
  const std::vector<cd>& g = w.g.back();
  const double t = w.t.back();
  detail::Fft coarse(n);
  const std::vector<cd> gx = derivative(coarse, g, L);
  const double kk = w.oscillating ? w.phase.k(0) : 0.0;
  const double om = w.oscillating ? w.phase.omega : 0.0;
  const MatC A0 = spec.A0.cast<cd>(), A = spec.Aj[0].cast<cd>();
  const bool corr = with_corrector && w.oscillating;

  ResidualFit fit;
  fit.with_corrector = with_corrector;
  for (double eps : epsilons) {
    if (!(eps > 0 && eps < 1)) throw InputError("epsilon must lie in (0,1)");
    long nf = n;
    if (kk != 0.0) {
      const double per_wave = 2 * M_PI * eps / std::abs(kk);
      while (L / nf > per_wave / 16.0 && nf < max_points) nf *= 2;
      if (L / nf > per_wave / 8.0)
        throw InputError("unresolved oscillation: fewer than 8 points per wavelength at eps = " + std::to_string(eps));
    }
    detail::Fft fine(static_cast<int>(nf));
    std::vector<cd> G = nf == n ? g : refine(coarse, fine, g);
    std::vector<cd> Gx = nf == n ? gx : refine(coarse, fine, gx);
    const double se = std::sqrt(eps);
    double sum2 = 0.0, sup = 0.0;
    const double dxf = L / nf;
    for (long i = 0; i < nf; ++i) {
      const double x = -0.5 * L + i * dxf;
      const cd gg = G[i], gxx = Gx[i];
      const cd gt = -w.group_velocity * gxx + w.cubic * std::norm(gg) * gg;
      VecC u, ut, ux;
      if (w.oscillating) {
        const cd E = std::exp(I * (kk * x - om * t) / eps);
        const cd Ec = std::conj(E);
        u = gg * E * w.e1 + std::conj(gg) * Ec * w.em1;
        ut = (gt - I * om / eps * gg) * E * w.e1 + (std::conj(gt) + I * om / eps * std::conj(gg)) * Ec * w.em1;
        ux = (gxx + I * kk / eps * gg) * E * w.e1 + (std::conj(gxx) - I * kk / eps * std::conj(gg)) * Ec * w.em1;
        if (corr) {
          const cd E2 = E * E, E2c = Ec * Ec;
          const cd q2 = gg * gg, q2t = 2.0 * gg * gt, q2x = 2.0 * gg * gxx;
          const double m0 = std::norm(gg);
          const double m0t = 2.0 * (std::conj(gg) * gt).real(), m0x = 2.0 * (std::conj(gg) * gxx).real();
          u += se * (q2 * E2 * w.w2 + std::conj(q2) * E2c * w.wm2 + m0 * w.w0);
          ut += se * ((q2t - 2.0 * I * om / eps * q2) * E2 * w.w2 +
                      (std::conj(q2t) + 2.0 * I * om / eps * std::conj(q2)) * E2c * w.wm2 + m0t * w.w0);
          ux += se * ((q2x + 2.0 * I * kk / eps * q2) * E2 * w.w2 +
                      (std::conj(q2x) - 2.0 * I * kk / eps * std::conj(q2)) * E2c * w.wm2 + m0x * w.w0);
        }
      } else {
        u = gg * w.e1;
        ut = gt * w.e1;
        ux = gxx * w.e1;
      }
      const VecC r = ut + A0 * u / eps + A * ux - bilinear(spec, u, u) / se;
      const double rn = r.cwiseAbs().maxCoeff();
      sup = std::max(sup, rn);
      sum2 += r.squaredNorm() * dxf;
    }
    fit.epsilons.push_back(eps);
    fit.residual_l2.push_back(std::sqrt(sum2));
    fit.residual_sup.push_back(sup);
    fit.grid_points.push_back(nf);
  }
  std::vector<double> lx, ly;
  for (std::size_t q = 0; q < fit.epsilons.size(); ++q) {
    lx.push_back(std::log(fit.epsilons[q]));
    ly.push_back(std::log(std::max(fit.residual_l2[q], 1e-300)));
  }
  fit.order = fit_slope(lx, ly);
  w.Ka_measured = fit.order;
  return fit;
}

}  // namespace osc
