#include "oscillant/catalog.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace osc {

namespace {

double get(const ParamMap& p, const std::string& key) { return p.at(key); }

Eigen::Matrix3d cross_matrix(const Eigen::Vector3d& a) {
  Eigen::Matrix3d m;
  m << 0, -a(2), a(1), a(2), 0, -a(0), -a(1), a(0), 0;
  return m;
}

ParamMap resolve(const std::string& id, const ParamMap& overrides) {
  ParamMap p = catalog_defaults(id);
  for (const auto& [k, v] : overrides) {
    if (!p.count(k)) throw InputError("unknown parameter '" + k + "' for catalog entry '" + id + "'");
    if (!std::isfinite(v)) throw InputError("parameter '" + k + "' is not finite");
    p[k] = v;
  }
  return p;
}

// (u1 in R^d, u2, u3) Klein-Gordon block
void kg_block(int d, int off, double speed, double mass, SystemSpec& s) {
  for (int j = 0; j < d; ++j) {
    s.Aj[j](off + j, off + d) = -speed;
    s.Aj[j](off + d, off + j) = -speed;
  }
  s.A0(off + d, off + d + 1) = mass;
  s.A0(off + d + 1, off + d) = -mass;
}

CatalogSystem build_three_wave(const std::string& id, const ParamMap& p) {
  CatalogSystem c;
  c.id = id;
  c.params = p;
  SystemSpec& s = c.spec;
  s.name = id;
  s.N = 3;
  s.d = 1;
  s.A0 = MatR::Zero(3, 3);
  MatR a = MatR::Zero(3, 3);
  a(0, 0) = get(p, "c1");
  a(1, 1) = get(p, "c2");
  a(2, 2) = get(p, "c3");
  s.Aj = {a};
  s.B = {{0, 1, 2, get(p, "b1"), true}, {1, 0, 2, get(p, "b2"), true}, {2, 0, 1, get(p, "b3"), false}};
  s.params = p;
  c.phase = make_phase(0.0, 0.0);
  VecC e = VecC::Zero(3);
  e(0) = 1.0;
  c.e_bar = e;
  for (const char* key : {"c1", "c2", "c3"}) {
    double v = get(p, key);
    c.lambdas.push_back([v](const VecR& xi) { return v * xi(0); });
  }
  return c;
}

CatalogSystem build_kg(const std::string& id, const ParamMap& p, bool diff) {
  const double w0 = get(p, "omega0"), th = get(p, "theta0"), kk = get(p, "k");
  const double dd = get(p, "d");
  if (!(w0 > 0)) throw InputError("omega0 must be positive");
  if (!(th > 0 && th < 1)) throw InputError("theta0 must lie in (0,1)");
  if (dd != 1.0 && dd != 2.0) throw InputError("d must be 1 or 2");
  const int d = static_cast<int>(dd);
  double a0 = 1.0, iota = 1.0;
  if (diff) {
    a0 = get(p, "alpha0");
    iota = get(p, "iota");
    if (!(a0 > 1)) throw InputError("alpha0 must exceed 1 for kg-diff (alpha0 = 1 is kg-equal)");
    if (iota != 1.0 && iota != -1.0) throw InputError("iota must be +1 or -1");
    if (!(kk * kk < (a0 * a0 - 1) * w0 * w0 / (th * th)))
      throw InputError("kg-diff requires |k|^2 < (alpha0^2 - 1) omega0^2 / theta0^2");
  }
  CatalogSystem c;
  c.id = id;
  c.params = p;
  SystemSpec& s = c.spec;
  s.name = id;
  const int n = d + 2;
  s.N = 2 * n;
  s.d = d;
  s.A0 = MatR::Zero(s.N, s.N);
  s.Aj.assign(d, MatR::Zero(s.N, s.N));
  kg_block(d, 0, 1.0, a0 * w0, s);
  kg_block(d, n, th, w0, s);
  const int u2 = d, u3 = d + 1, v2 = n + d, v3 = n + d + 1;
  s.B = {{u2, u3, v3, 0.5}, {u2, v3, u3, 0.5}, {u2, v3, v3, 0.5}};
  if (!diff) {
    s.B.push_back({v2, u2, u2, -0.5});
    s.B.push_back({v2, v2, v3, 0.5});
    s.B.push_back({v2, v3, v2, 0.5});
  } else {
    s.B.push_back({v2, u2, u2, -0.5 * iota});
    s.B.push_back({v2, u2, v2, -0.5 * iota});
    s.B.push_back({v2, v2, u2, -0.5 * iota});
  }
  s.params = p;
  VecR k = VecR::Zero(d);
  k(0) = kk;
  c.phase.k = k;
  c.phase.omega = diff ? std::sqrt(w0 * w0 + th * th * kk * kk) : std::sqrt(w0 * w0 + kk * kk);
  const double m1 = a0 * w0;
  c.lambdas = {
      [m1](const VecR& xi) { return std::sqrt(m1 * m1 + xi.squaredNorm()); },
      [w0, th](const VecR& xi) { return std::sqrt(w0 * w0 + th * th * xi.squaredNorm()); },
      [w0, th](const VecR& xi) { return -std::sqrt(w0 * w0 + th * th * xi.squaredNorm()); },
      [m1](const VecR& xi) { return -std::sqrt(m1 * m1 + xi.squaredNorm()); },
      [](const VecR&) { return 0.0; },
  };
  return c;
}

CatalogSystem build_mll(const ParamMap& p) {
  CatalogSystem c;
  c.id = "mll-variety";
  c.params = p;
  SystemSpec& s = c.spec;
  s.name = c.id;
  s.N = 9;
  s.d = 2;
  s.A0 = MatR::Zero(9, 9);
  Eigen::Matrix3d X = cross_matrix(Eigen::Vector3d(1, 0, 0));
  s.A0.block<3, 3>(3, 3) = -X;
  s.A0.block<3, 3>(3, 6) = X;
  s.A0.block<3, 3>(6, 3) = X;
  s.A0.block<3, 3>(6, 6) = -X;
  for (int j = 0; j < 2; ++j) {
    Eigen::Matrix3d C = cross_matrix(Eigen::Vector3d::Unit(j));
    MatR a = MatR::Zero(9, 9);
    a.block<3, 3>(0, 3) = -C;
    a.block<3, 3>(3, 0) = C;
    s.Aj.push_back(a);
  }
  s.params = p;
  VecR k(2);
  k << get(p, "k1"), get(p, "k2");
  c.phase.k = k;
  Eigen::SelfAdjointEigenSolver<MatC> es(assemble_symbol(s, k), Eigen::EigenvaluesOnly);
  c.phase.omega = es.eigenvalues()(8);
  return c;
}

}  // namespace

std::vector<std::string> catalog_ids() {
  return {"three-wave", "brillouin", "kg-equal", "kg-diff", "mll-variety", "em-dispersion"};
}

ParamMap catalog_defaults(const std::string& id) {
  if (id == "three-wave" || id == "brillouin")
    return {{"c1", 1.0}, {"c2", 0.5}, {"c3", -0.5}, {"b1", 1.0}, {"b2", 1.0}, {"b3", 1.0}};
  if (id == "kg-equal") return {{"omega0", 1.0}, {"theta0", 0.5}, {"d", 1.0}, {"k", 1.0}};
  if (id == "kg-diff")
    return {{"omega0", 1.0}, {"theta0", 0.5}, {"alpha0", 2.0}, {"iota", 1.0}, {"d", 1.0}, {"k", 0.8}};
  if (id == "mll-variety") return {{"k1", 1.0}, {"k2", 0.0}};
  if (id == "em-dispersion") return {{"theta_e", 1.0}, {"theta_i", 1e-2}, {"alpha", 1.0}};
  throw InputError("unknown catalog id '" + id + "'");
}

CatalogSystem build_catalog_system(const std::string& id, const ParamMap& overrides) {
  ParamMap p = resolve(id, overrides);
  CatalogSystem c;
  if (id == "three-wave" || id == "brillouin")
    c = build_three_wave(id, p);
  else if (id == "kg-equal")
    c = build_kg(id, p, false);
  else if (id == "kg-diff")
    c = build_kg(id, p, true);
  else if (id == "mll-variety")
    c = build_mll(p);
  else
    throw InputError("catalog entry '" + id + "' exposes dispersion relations only");
  c.spec.validate();
  return c;
}

std::vector<int> paper_branch_map(const CatalogSystem& sys, const SpectralField& field, double xi_ref) {
  VecR x = VecR::Zero(sys.spec.d);
  x(0) = xi_ref;
  BranchPoint bp = evaluate_branches(field, x);
  std::vector<int> map;
  for (const auto& f : sys.lambdas) {
    double target = f(x);
    int best = -1;
    double err = 0.0;
    for (int j = 0; j < field.J; ++j) {
      double e = std::abs(bp.lambda[j] - target);
      if (best < 0 || e < err) {
        best = j;
        err = e;
      }
    }
    if (err > 1e-8 * (1.0 + std::abs(target)))
      throw NumericalError("no field branch matches a closed-form branch of '" + sys.id + "'");
    map.push_back(best);
  }
  return map;
}

std::vector<double> mll_characteristic_polynomial(double xi1, double xi_abs) {
  if (xi_abs < std::abs(xi1)) throw InputError("|xi| must be at least |xi_1|");
  const double r2 = xi_abs * xi_abs, x2 = xi1 * xi1;
  std::vector<double> c(10, 0.0);
  c[9] = 1.0;
  c[7] = -2.0 * (2.0 + r2);
  c[5] = r2 * (6.0 + r2) - 2.0 * x2;
  c[3] = -r2 * (2.0 * r2 - x2);
  return c;
}

std::vector<double> polynomial_real_roots(const std::vector<double>& a) {
  int n = static_cast<int>(a.size()) - 1;
  while (n > 0 && a[n] == 0.0) --n;
  if (n <= 0) return {};
  MatR comp = MatR::Zero(n, n);
  for (int i = 1; i < n; ++i) comp(i, i - 1) = 1.0;
  for (int i = 0; i < n; ++i) comp(i, n - 1) = -a[i] / a[n];
  Eigen::EigenSolver<MatR> es(comp, false);
  std::vector<double> r;
  for (int i = 0; i < n; ++i) r.push_back(es.eigenvalues()(i).real());
  std::sort(r.begin(), r.end());
  return r;
}

}  // namespace osc
