#include "oscillant/symbol.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

namespace osc {

using nlohmann::json;

void SystemSpec::validate() const {
  if (N <= 0) throw InputError("spec '" + name + "': N must be positive");
  if (d < 1 || d > 2) throw InputError("spec '" + name + "': d must be 1 or 2");
  if (A0.rows() != N || A0.cols() != N) throw InputError("spec '" + name + "': A0 must be N x N");
  if ((A0 + A0.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw InputError("spec '" + name + "': A0 is not skew-symmetric");
  if (static_cast<int>(Aj.size()) != d) throw InputError("spec '" + name + "': need d matrices Aj");
  for (const auto& a : Aj) {
    if (a.rows() != N || a.cols() != N) throw InputError("spec '" + name + "': Aj must be N x N");
    if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-12)
      throw InputError("spec '" + name + "': Aj is not symmetric");
  }
  for (const auto& t : B) {
    if (t.out < 0 || t.out >= N || t.left < 0 || t.left >= N || t.right < 0 || t.right >= N)
      throw InputError("spec '" + name + "': B triplet index out of range");
    if (!std::isfinite(t.value)) throw InputError("spec '" + name + "': non-finite B value");
  }
}

bool SystemSpec::has_conjugation() const {
  return std::any_of(B.begin(), B.end(), [](const Triplet& t) { return t.conj_left; });
}

double SystemSpec::b_norm() const {
  std::vector<double> row(N, 0.0);
  for (const auto& t : B) row[t.out] += std::abs(t.value);
  return N > 0 ? *std::max_element(row.begin(), row.end()) : 0.0;
}

VecC bilinear(const SystemSpec& spec, const VecC& u, const VecC& v) {
  VecC r = VecC::Zero(spec.N);
  for (const auto& t : spec.B) {
    cd l = t.conj_left ? std::conj(u(t.left)) : u(t.left);
    r(t.out) += t.value * l * v(t.right);
  }
  return r;
}

MatC linearized_source(const SystemSpec& spec, const VecC& e) {
  MatC m = MatC::Zero(spec.N, spec.N);
  double anti = 0.0;
  for (const auto& t : spec.B) {
    // B(e, w)
    cd l = t.conj_left ? std::conj(e(t.left)) : e(t.left);
    m(t.out, t.right) += t.value * l;
    // B(w, e)
    if (t.conj_left)
      anti = std::max(anti, std::abs(t.value * e(t.right)));
    else
      m(t.out, t.left) += t.value * e(t.right);
  }
  if (anti > 1e-14)
    throw NotApplicableError("linearized source B(e) is not complex linear for spec '" + spec.name + "'");
  return m;
}

MatR velocity_matrix(const SystemSpec& spec, const VecR& w) {
  MatR a = MatR::Zero(spec.N, spec.N);
  for (int j = 0; j < spec.d; ++j) a += w(j) * spec.Aj[j];
  return a;
}

MatC assemble_symbol(const SystemSpec& spec, const VecR& xi) {
  if (xi.size() != spec.d)
    throw InputError("frequency dimension " + std::to_string(xi.size()) + " does not match d = " +
                     std::to_string(spec.d));
  MatC h = spec.A0.cast<cd>() * cd(0.0, -1.0);
  for (int j = 0; j < spec.d; ++j) h += (xi(j) * spec.Aj[j]).cast<cd>();
  return h;
}

MatC assemble_symbol(const SystemSpec& spec, double xi) {
  VecR x(1);
  x << xi;
  return assemble_symbol(spec, x);
}

// ---------------------------------------------------------------- json

namespace {

json mat_to_json(const MatR& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json r = json::array();
    for (int j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
    rows.push_back(r);
  }
  return rows;
}

double num(const json& v) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    std::size_t pos = 0;
    double x = std::stod(s, &pos);
    if (pos != s.size()) throw InputError("malformed number '" + s + "'");
    return x;
  }
  throw InputError("expected a number");
}

MatR mat_from_json(const json& j, int n) {
  if (!j.is_array() || static_cast<int>(j.size()) != n) throw InputError("matrix must have N rows");
  MatR m(n, n);
  for (int i = 0; i < n; ++i) {
    if (!j[i].is_array() || static_cast<int>(j[i].size()) != n) throw InputError("matrix must have N columns");
    for (int k = 0; k < n; ++k) m(i, k) = num(j[i][k]);
  }
  return m;
}

}  // namespace

json spec_to_json(const SystemSpec& spec) {
  json j;
  j["name"] = spec.name;
  j["N"] = spec.N;
  j["d"] = spec.d;
  j["A0"] = mat_to_json(spec.A0);
  j["Aj"] = json::array();
  for (const auto& a : spec.Aj) j["Aj"].push_back(mat_to_json(a));
  j["B"] = json::array();
  for (const auto& t : spec.B) {
    json e = json::array({t.out, t.left, t.right, t.value});
    if (t.conj_left) e.push_back(1);
    j["B"].push_back(e);
  }
  if (!spec.params.empty()) j["params"] = spec.params;
  return j;
}

SystemSpec spec_from_json(const json& j) {
  SystemSpec s;
  try {
    s.name = j.at("name").get<std::string>();
    s.N = j.at("N").get<int>();
    s.d = j.at("d").get<int>();
    if (s.N <= 0) throw InputError("N must be positive");
    s.A0 = mat_from_json(j.at("A0"), s.N);
    for (const auto& a : j.at("Aj")) s.Aj.push_back(mat_from_json(a, s.N));
    for (const auto& e : j.at("B")) {
      if (!e.is_array() || e.size() < 4 || e.size() > 5) throw InputError("B entries are [out,left,right,value]");
      Triplet t;
      t.out = e[0].get<int>();
      t.left = e[1].get<int>();
      t.right = e[2].get<int>();
      t.value = num(e[3]);
      t.conj_left = e.size() == 5 && num(e[4]) != 0.0;
      s.B.push_back(t);
    }
    if (j.contains("params"))
      for (auto it = j["params"].begin(); it != j["params"].end(); ++it) s.params[it.key()] = num(it.value());
  } catch (const json::exception& ex) {
    throw InputError(std::string("malformed spec: ") + ex.what());
  }
  s.validate();
  return s;
}

SystemSpec load_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read spec file " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& ex) {
    throw InputError("malformed spec file " + path + ": " + ex.what());
  }
  return spec_from_json(j);
}

void save_spec(const SystemSpec& spec, const std::string& path) {
  write_file_atomic(path, spec_to_json(spec).dump(2) + "\n");
}

// ---------------------------------------------------------------- field

namespace {

struct Group {
  double value;
  MatC basis;
};

std::vector<Group> solve_groups(const SystemSpec& spec, const VecR& xi) {
  MatC h = assemble_symbol(spec, xi);
  Eigen::SelfAdjointEigenSolver<MatC> es(h);
  if (es.info() != Eigen::Success) {
    std::ostringstream os;
    os << "eigensolver failed at xi = " << xi.transpose();
    throw NumericalError(os.str());
  }
  const VecR& w = es.eigenvalues();
  const MatC& v = es.eigenvectors();
  const int n = static_cast<int>(w.size());
  const double scale = 1.0 + w.cwiseAbs().maxCoeff();
  const double tol = policy().group_tol * scale;
  std::vector<Group> g;
  int start = 0;
  for (int i = 1; i <= n; ++i) {
    if (i == n || w(i) - w(i - 1) > tol) {
      Group gr;
      gr.value = w.segment(start, i - start).mean();
      gr.basis = v.middleCols(start, i - start);
      g.push_back(std::move(gr));
      start = i;
    }
  }
  return g;
}

// min-cost assignment on a square matrix; returns column for each row
std::vector<int> hungarian(const MatR& cost) {
  const int n = static_cast<int>(cost.rows());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0), v(n + 1, 0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      int i0 = p[j0], j1 = 0;
      double delta = inf;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> ans(n);
  for (int j = 1; j <= n; ++j)
    if (p[j] > 0) ans[p[j] - 1] = j - 1;
  return ans;
}

// Assign the groups at a new point to the parent's branches.
void match_to_parent(const std::vector<Group>& groups, const std::vector<double>& plam,
                     const std::vector<MatC>& pbasis, const std::vector<int>& mult, const VecR& xi,
                     std::vector<double>& lam, std::vector<MatC>& basis) {
  const int J = static_cast<int>(plam.size());
  const int G = static_cast<int>(groups.size());
  MatR overlap(J, G);
  for (int j = 0; j < J; ++j)
    for (int g = 0; g < G; ++g) overlap(j, g) = (groups[g].basis.adjoint() * pbasis[j]).squaredNorm();

  std::vector<int> row_branch, col_group;
  for (int j = 0; j < J; ++j)
    for (int s = 0; s < mult[j]; ++s) row_branch.push_back(j);
  for (int g = 0; g < G; ++g)
    for (int s = 0; s < groups[g].basis.cols(); ++s) col_group.push_back(g);
  const int n = static_cast<int>(row_branch.size());
  if (n != static_cast<int>(col_group.size())) throw NumericalError("branch/group dimension mismatch");

  double scale = 1.0;
  for (const auto& g : groups) scale = std::max(scale, std::abs(g.value));
  MatR cost(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) {
      int j = row_branch[r], g = col_group[c];
      cost(r, c) = -overlap(j, g) / mult[j] + 1e-9 * std::abs(plam[j] - groups[g].value) / scale;
    }
  std::vector<int> assign = hungarian(cost);

  // slots per (group, branch); a branch straddling groups only happens where the field is not smooth
  std::vector<std::vector<std::pair<int, int>>> members(G);  // (branch, slot count)
  for (int g = 0; g < G; ++g)
    for (int j = 0; j < J; ++j) {
      int cnt = 0;
      for (int r = 0; r < n; ++r)
        if (row_branch[r] == j && col_group[assign[r]] == g) ++cnt;
      if (cnt > 0) members[g].push_back({j, cnt});
    }
  lam.assign(J, 0.0);
  basis.assign(J, MatC(0, 0));
  std::vector<std::vector<MatC>> parts(J);
  for (int g = 0; g < G; ++g) {
    const MatC& V = groups[g].basis;
    if (members[g].size() == 1) {
      parts[members[g][0].first].push_back(V);
      lam[members[g][0].first] += groups[g].value * V.cols();
      continue;
    }
    // coalesced eigenspace: split along the parent's projectors
    MatC K = MatC::Zero(V.cols(), V.cols());
    for (std::size_t a = 0; a < members[g].size(); ++a) {
      MatC q = V.adjoint() * pbasis[members[g][a].first];
      K += double(a + 1) * q * q.adjoint();
    }
    Eigen::SelfAdjointEigenSolver<MatC> es(K);
    MatC Y = es.eigenvectors();
    int off = 0;
    for (const auto& [j, cnt] : members[g]) {
      parts[j].push_back(V * Y.middleCols(off, cnt));
      lam[j] += groups[g].value * cnt;
      off += cnt;
    }
  }
  for (int j = 0; j < J; ++j) {
    MatC b(groups.empty() ? 0 : groups[0].basis.rows(), mult[j]);
    int off = 0;
    for (const auto& p : parts[j]) {
      b.middleCols(off, p.cols()) = p;
      off += static_cast<int>(p.cols());
    }
    basis[j] = b;
    lam[j] /= mult[j];
  }
  (void)xi;
}

std::vector<VecR> tensor_grid(const std::vector<std::vector<double>>& axes) {
  std::vector<VecR> pts;
  if (axes.size() == 1) {
    for (double x : axes[0]) {
      VecR p(1);
      p << x;
      pts.push_back(p);
    }
  } else {
    for (double x : axes[0])
      for (double y : axes[1]) {
        VecR p(2);
        p << x, y;
        pts.push_back(p);
      }
  }
  return pts;
}

}  // namespace

SpectralField eigendecompose_field(const SystemSpec& spec, const std::vector<std::vector<double>>& axes,
                                   Exec exec) {
  spec.validate();
  if (static_cast<int>(axes.size()) != spec.d) throw InputError("grid dimension does not match d");
  for (const auto& ax : axes) {
    if (ax.empty()) throw InputError("empty frequency grid");
    for (std::size_t i = 1; i < ax.size(); ++i)
      if (!(ax[i] > ax[i - 1])) throw InputError("grid axes must be strictly increasing");
  }
  SpectralField f;
  f.spec = std::make_shared<const SystemSpec>(spec);
  f.axes = axes;
  f.grid = tensor_grid(axes);
  const long M = static_cast<long>(f.grid.size());
  std::vector<std::vector<Group>> groups(M);

  if (exec == Exec::parallel) {
    std::string err;
#pragma omp parallel for schedule(static)
    for (long m = 0; m < M; ++m) {
      try {
        groups[m] = solve_groups(spec, f.grid[m]);
      } catch (const std::exception& ex) {
#pragma omp critical
        if (err.empty()) err = ex.what();
      }
    }
    if (!err.empty()) throw NumericalError(err);
  } else {
    for (long m = 0; m < M; ++m) groups[m] = solve_groups(spec, f.grid[m]);
  }

  // reference: first point carrying the largest number of distinct groups
  long r0 = 0;
  for (long m = 0; m < M; ++m)
    if (groups[m].size() > groups[r0].size()) r0 = m;
  f.J = static_cast<int>(groups[r0].size());
  f.lambdas.assign(M, {});
  f.bases.assign(M, {});
  for (const auto& g : groups[r0]) {
    f.lambdas[r0].push_back(g.value);
    f.bases[r0].push_back(g.basis);
    f.multiplicities.push_back(static_cast<int>(g.basis.cols()));
  }

  // breadth-first sweep from the reference point over the tensor grid
  const long n1 = axes.size() == 2 ? static_cast<long>(axes[1].size()) : 1;
  std::vector<char> done(M, 0);
  std::deque<long> queue{r0};
  done[r0] = 1;
  while (!queue.empty()) {
    long m = queue.front();
    queue.pop_front();
    long i0 = m / n1, i1 = m % n1;
    long n0 = static_cast<long>(axes[0].size());
    const long cand[4][2] = {{i0 - 1, i1}, {i0 + 1, i1}, {i0, i1 - 1}, {i0, i1 + 1}};
    for (const auto& c : cand) {
      if (c[0] < 0 || c[0] >= n0 || c[1] < 0 || c[1] >= n1) continue;
      long q = c[0] * n1 + c[1];
      if (done[q]) continue;
      match_to_parent(groups[q], f.lambdas[m], f.bases[m], f.multiplicities, f.grid[q], f.lambdas[q], f.bases[q]);
      done[q] = 1;
      queue.push_back(q);
    }
  }
  return f;
}

SpectralField eigendecompose_field(const SystemSpec& spec, double lo, double hi, int n, Exec exec) {
  return eigendecompose_field(spec, std::vector<std::vector<double>>{linspace(lo, hi, n)}, exec);
}

long SpectralField::locate(const VecR& xi) const {
  long idx = 0, stride = 1;
  for (int a = static_cast<int>(axes.size()) - 1; a >= 0; --a) {
    const auto& ax = axes[a];
    auto it = std::lower_bound(ax.begin(), ax.end(), xi(a));
    long best = -1;
    double tol = 1e-12 * (1.0 + std::abs(xi(a)));
    for (auto c : {it, it == ax.begin() ? it : it - 1}) {
      if (c != ax.end() && std::abs(*c - xi(a)) <= tol) best = c - ax.begin();
    }
    if (best < 0) return -1;
    idx += best * stride;
    stride *= static_cast<long>(ax.size());
  }
  return idx;
}

std::size_t SpectralField::nearest(const VecR& xi) const {
  std::size_t idx = 0, stride = 1;
  for (int a = static_cast<int>(axes.size()) - 1; a >= 0; --a) {
    const auto& ax = axes[a];
    auto it = std::lower_bound(ax.begin(), ax.end(), xi(a));
    std::size_t k;
    if (it == ax.begin())
      k = 0;
    else if (it == ax.end())
      k = ax.size() - 1;
    else
      k = (xi(a) - *(it - 1) <= *it - xi(a)) ? (it - 1 - ax.begin()) : (it - ax.begin());
    idx += k * stride;
    stride *= ax.size();
  }
  return idx;
}

bool SpectralField::covers(const VecR& xi) const {
  for (std::size_t a = 0; a < axes.size(); ++a) {
    double tol = 1e-12 * (1.0 + std::abs(xi(a)));
    if (xi(a) < axes[a].front() - tol || xi(a) > axes[a].back() + tol) return false;
  }
  return true;
}

BranchPoint evaluate_branches(const SpectralField& field, const VecR& xi) {
  if (!field.covers(xi)) {
    std::ostringstream os;
    os << "frequency " << xi.transpose() << " outside the spectral field window";
    throw RangeError(os.str());
  }
  long m = field.locate(xi);
  if (m >= 0) return field.point(static_cast<std::size_t>(m));
  std::size_t p = field.nearest(xi);
  BranchPoint bp;
  bp.xi = xi;
  match_to_parent(solve_groups(*field.spec, xi), field.lambdas[p], field.bases[p], field.multiplicities, xi,
                  bp.lambda, bp.basis);
  return bp;
}

BranchPoint evaluate_branches(const SpectralField& field, double xi) {
  VecR x(1);
  x << xi;
  return evaluate_branches(field, x);
}

// ---------------------------------------------------------------- slopes

double a0_spectral_radius(const SystemSpec& spec) {
  if (spec.A0.size() == 0) return 0.0;
  Eigen::ComplexEigenSolver<MatC> es(spec.A0.cast<cd>());
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

std::vector<double> default_radii(const SystemSpec& spec) {
  double r = 100.0 * std::max(1.0, a0_spectral_radius(spec));
  return {r / 8, r / 4, r / 2, r, 2 * r};
}

AsymptoticSlopes asymptotic_slopes(const SystemSpec& spec, const VecR& direction,
                                   const std::vector<double>& radii) {
  if (direction.size() != spec.d) throw InputError("direction dimension does not match d");
  if (std::abs(direction.norm() - 1.0) > 1e-12) throw InputError("direction must be a unit vector");
  if (radii.size() < 2) throw InputError("need at least two radii");
  for (std::size_t i = 1; i < radii.size(); ++i)
    if (!(radii[i] > radii[i - 1])) throw InputError("radii must be increasing");
  if (radii.back() < 100.0 * a0_spectral_radius(spec) - 1e-12)
    throw InputError("largest radius must be at least 100 times the spectral radius of A0");

  const int R = static_cast<int>(radii.size());
  std::vector<VecR> ev(R);
  for (int r = 0; r < R; ++r) {
    Eigen::SelfAdjointEigenSolver<MatC> es(assemble_symbol(spec, VecR(radii[r] * direction)));
    if (es.info() != Eigen::Success) throw NumericalError("eigensolver failed in asymptotic_slopes");
    ev[r] = es.eigenvalues();
  }
  // branches = groups at the largest radius
  const VecR& top = ev[R - 1];
  const double tol = policy().group_tol * (1.0 + top.cwiseAbs().maxCoeff());
  std::vector<std::pair<int, int>> ranges;
  int start = 0;
  for (int i = 1; i <= spec.N; ++i)
    if (i == spec.N || top(i) - top(i - 1) > tol) {
      ranges.push_back({start, i});
      start = i;
    }

  AsymptoticSlopes out;
  out.direction = direction;
  const double r1 = radii[R - 2], r2 = radii[R - 1];
  for (auto [a, b] : ranges) {
    auto lam = [&](int r) { return ev[r].segment(a, b - a).mean(); };
    double s1 = lam(R - 2) / r1, s2 = lam(R - 1) / r2;
    double c = (r2 * r2 * s2 - r1 * r1 * s1) / (r2 * r2 - r1 * r1);
    out.c.push_back(c);
    out.multiplicity.push_back(b - a);
    std::vector<double> lx, ly;
    for (int r = 0; r < R; ++r) {
      double dev = std::abs(lam(r) - c * radii[r]);
      if (dev > 1e-13 * radii[r]) {
        lx.push_back(std::log(radii[r]));
        ly.push_back(std::log(dev));
      }
    }
    out.residual_decay.push_back(lx.size() >= 2 ? fit_slope(lx, ly) : std::numeric_limits<double>::quiet_NaN());
  }
  return out;
}

}  // namespace osc
