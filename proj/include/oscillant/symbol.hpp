#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "oscillant/common.hpp"

namespace osc {

// B(u,v)_out += value * (conj_left ? conj(u_left) : u_left) * v_right
struct Triplet {
  int out = 0;
  int left = 0;
  int right = 0;
  double value = 0.0;
  bool conj_left = false;
};

struct SystemSpec {
  std::string name;
  int N = 0;
  int d = 1;
  MatR A0;
  std::vector<MatR> Aj;
  std::vector<Triplet> B;
  std::map<std::string, double> params;

  void validate() const;
  bool has_conjugation() const;
  // sup-norm bound of B: max over outputs of the summed |value|
  double b_norm() const;
};

VecC bilinear(const SystemSpec& spec, const VecC& u, const VecC& v);

// B(e)w := B(e,w) + B(w,e); throws when the map is not complex linear
MatC linearized_source(const SystemSpec& spec, const VecC& e);

MatC assemble_symbol(const SystemSpec& spec, const VecR& xi);
MatC assemble_symbol(const SystemSpec& spec, double xi);

// A(w) = sum_j w_j A_j
MatR velocity_matrix(const SystemSpec& spec, const VecR& w);

nlohmann::json spec_to_json(const SystemSpec& spec);
SystemSpec spec_from_json(const nlohmann::json& j);
SystemSpec load_spec(const std::string& path);
void save_spec(const SystemSpec& spec, const std::string& path);

// Branch data at one frequency: eigenvalue and orthonormal basis per branch.
struct BranchPoint {
  VecR xi;
  std::vector<double> lambda;
  std::vector<MatC> basis;
  MatC projector(int j) const { return basis[j] * basis[j].adjoint(); }
};

struct SpectralField {
  std::shared_ptr<const SystemSpec> spec;
  std::vector<std::vector<double>> axes;  // tensor grid, one axis per dimension
  std::vector<VecR> grid;                 // row-major over axes
  int J = 0;
  std::vector<int> multiplicities;
  std::vector<std::vector<double>> lambdas;  // [point][branch]
  std::vector<std::vector<MatC>> bases;      // [point][branch] N x m_j

  std::size_t size() const { return grid.size(); }
  MatC projector(std::size_t m, int j) const { return bases[m][j] * bases[m][j].adjoint(); }
  BranchPoint point(std::size_t m) const { return {grid[m], lambdas[m], bases[m]}; }
  // index of a grid point equal to xi (relative 1e-12), or -1
  long locate(const VecR& xi) const;
  std::size_t nearest(const VecR& xi) const;
  bool covers(const VecR& xi) const;
};

SpectralField eigendecompose_field(const SystemSpec& spec, const std::vector<std::vector<double>>& axes,
                                   Exec exec = Exec::parallel);
SpectralField eigendecompose_field(const SystemSpec& spec, double lo, double hi, int n,
                                   Exec exec = Exec::parallel);

// Fresh eigensolve at xi with branches matched to the nearest grid point.
BranchPoint evaluate_branches(const SpectralField& field, const VecR& xi);
BranchPoint evaluate_branches(const SpectralField& field, double xi);

struct AsymptoticSlopes {
  VecR direction;
  std::vector<double> c;
  std::vector<int> multiplicity;
  std::vector<double> residual_decay;  // NaN when the branch is exactly linear
};

AsymptoticSlopes asymptotic_slopes(const SystemSpec& spec, const VecR& direction,
                                   const std::vector<double>& radii);

// spectral radius of A0 (used for default radii)
double a0_spectral_radius(const SystemSpec& spec);
std::vector<double> default_radii(const SystemSpec& spec);

}  // namespace osc
