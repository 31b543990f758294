#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "oscillant/resonance.hpp"
#include "oscillant/symbol.hpp"

namespace osc {

using ParamMap = std::map<std::string, double>;

struct CatalogSystem {
  std::string id;
  ParamMap params;  // resolved, defaults filled in
  SystemSpec spec;
  Phase phase;
  // supplied reference polarization for non-oscillating references (three-wave)
  std::optional<VecC> e_bar;
  // closed-form branch values in the paper's labelling (label l -> lambdas[l-1])
  std::vector<std::function<double(const VecR&)>> lambdas;
};

std::vector<std::string> catalog_ids();
// default parameters of an entry
ParamMap catalog_defaults(const std::string& id);

// ids: three-wave, brillouin, kg-equal, kg-diff, mll-variety (em-dispersion has no spec)
CatalogSystem build_catalog_system(const std::string& id, const ParamMap& overrides = {});

// field branch index for each paper label, by matching closed forms at xi_ref
std::vector<int> paper_branch_map(const CatalogSystem& sys, const SpectralField& field, double xi_ref = 0.7);

// ascending powers lambda^0 .. lambda^9
std::vector<double> mll_characteristic_polynomial(double xi1, double xi_abs);
// real parts of the companion-matrix roots, sorted
std::vector<double> polynomial_real_roots(const std::vector<double>& ascending);

}  // namespace osc
