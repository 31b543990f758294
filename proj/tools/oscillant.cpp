#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <nlohmann/json.hpp>

#include "oscillant/catalog.hpp"
#include "oscillant/flow.hpp"
#include "oscillant/interaction.hpp"
#include "oscillant/simulator.hpp"
#include "oscillant/wkb.hpp"

using namespace osc;
using nlohmann::json;

namespace {

struct SystemArgs {
  std::string system;
  std::map<std::string, double> named;  // flags that were given
  std::vector<std::string> params;      // key=value
  std::string k, c, b;
  std::optional<double> omega;
};

struct Loaded {
  std::string id;
  SystemSpec spec;
  Phase phase;
  std::optional<VecC> e_bar;
  bool brillouin = false;
};

std::vector<double> parse_list(const std::string& s, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      std::size_t pos = 0;
      out.push_back(std::stod(tok, &pos));
      if (pos != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw InputError("cannot parse '" + tok + "' in --" + what);
    }
  }
  if (out.empty()) throw InputError("--" + what + " is empty");
  return out;
}

void add_system_options(CLI::App* app, SystemArgs& a, std::map<std::string, std::optional<double>>& flags) {
  app->add_option("system,--system", a.system, "catalog:<id> or a spec JSON file");
  for (const char* name : {"omega0", "theta0", "alpha0", "iota", "d", "theta_e", "theta_i", "alpha"})
    app->add_option(std::string("--") + name, flags[name], std::string("catalog parameter ") + name);
  app->add_option("--param", a.params, "catalog parameter key=value (repeatable)");
  app->add_option("--k", a.k, "wave vector (comma separated)");
  app->add_option("--c", a.c, "three-wave velocities c1,c2,c3");
  app->add_option("--b", a.b, "three-wave couplings b1,b2,b3");
  app->add_option("--omega", a.omega, "reference frequency (overrides the catalog value)");
}

void collect(SystemArgs& a, const std::map<std::string, std::optional<double>>& flags) {
  for (const auto& [k, v] : flags)
    if (v) a.named[k] = *v;
}

Phase phase_from(double omega, const std::vector<double>& k) {
  Phase p;
  p.omega = omega;
  p.k = VecR::Map(k.data(), static_cast<long>(k.size()));
  return p;
}

Loaded load_system(const SystemArgs& a) {
  if (a.system.empty()) throw InputError("no system given (catalog:<id> or a spec file)");
  Loaded L;
  if (a.system.rfind("catalog:", 0) == 0) {
    L.id = a.system.substr(8);
    ParamMap p = a.named;
    for (const auto& kv : a.params) {
      auto eq = kv.find('=');
      if (eq == std::string::npos) throw InputError("--param expects key=value, got '" + kv + "'");
      p[kv.substr(0, eq)] = parse_list(kv.substr(eq + 1), "param").front();
    }
    if (!a.c.empty()) {
      auto c = parse_list(a.c, "c");
      if (c.size() != 3) throw InputError("--c expects three values");
      for (int q = 0; q < 3; ++q) p["c" + std::to_string(q + 1)] = c[q];
    }
    if (!a.b.empty()) {
      auto b = parse_list(a.b, "b");
      if (b.size() != 3) throw InputError("--b expects three values");
      for (int q = 0; q < 3; ++q) p["b" + std::to_string(q + 1)] = b[q];
    }
    if (!a.k.empty()) {
      auto k = parse_list(a.k, "k");
      if (L.id == "mll-variety") {
        if (k.size() != 2) throw InputError("mll-variety expects --k k1,k2");
        p["k1"] = k[0];
        p["k2"] = k[1];
      } else {
        if (k.size() != 1) throw InputError("--k expects one value for " + L.id);
        p["k"] = k[0];
      }
    }
    CatalogSystem c = build_catalog_system(L.id, p);
    L.spec = c.spec;
    L.phase = c.phase;
    L.e_bar = c.e_bar;
    L.brillouin = L.id == "brillouin";
  } else {
    std::ifstream in(a.system);
    if (!in) throw InputError("cannot read spec file " + a.system);
    json j;
    try {
      in >> j;
    } catch (const json::exception& ex) {
      throw InputError("malformed spec file: " + std::string(ex.what()));
    }
    L.spec = spec_from_json(j);
    L.id = L.spec.name;
    std::optional<double> om;
    std::vector<double> k;
    if (j.contains("phase")) {
      om = j["phase"].at("omega").get<double>();
      k = j["phase"].at("k").get<std::vector<double>>();
    }
    if (!a.k.empty()) k = parse_list(a.k, "k");
    if (a.omega) om = a.omega;
    if (!om || k.empty()) throw InputError("a spec file needs a phase: --omega and --k, or a \"phase\" entry");
    L.phase = phase_from(*om, k);
    if (j.contains("reference_direction")) {
      const auto& r = j["reference_direction"];
      VecC e(L.spec.N);
      for (int q = 0; q < L.spec.N; ++q) e(q) = cd(r.at(q).at(0).get<double>(), r.at(q).at(1).get<double>());
      L.e_bar = e;
    }
  }
  if (static_cast<int>(L.phase.k.size()) != L.spec.d) throw InputError("--k must have d components");
  if (a.omega && a.system.rfind("catalog:", 0) == 0) L.phase.omega = *a.omega;
  if (!L.phase.is_zero() && !is_characteristic(L.spec, L.phase))
    throw InputError("(omega, k) is not on the characteristic variety");
  return L;
}

struct AnalysisArgs {
  double window = 0.0;
  int points = 0;
  double h = 0.1;
  StabilityInputs inputs;
};

void add_analysis_options(CLI::App* app, AnalysisArgs& a) {
  app->add_option("--window", a.window, "half-width of the frequency window (default 8 kappa)");
  app->add_option("--points", a.points, "grid points per axis (default 2048 in 1D, 41 in 2D)");
  app->add_option("--h", a.h, "largest transparency annulus radius");
  app->add_option("--K", a.inputs.K, "perturbation exponent K");
  app->add_option("--Ka", a.inputs.Ka, "WKB consistency order K_a");
  app->add_option("--a-sup", a.inputs.a_sup, "sup norm of the amplitude");
  app->add_option("--a-hatL1", a.inputs.a_hatL1, "L1 norm of the amplitude transform");
  app->add_option("--beta", a.inputs.beta, "ball exponent beta");
}

struct Analysis {
  Loaded sys;
  SpectralField field;
  ResonanceReport rep;
  PolarizationVectors pol;
  StabilityReport st;
};

Analysis analyze_system(const Loaded& sys, const AnalysisArgs& a) {
  Analysis A;
  A.sys = sys;
  const int d = sys.spec.d;
  const double hw = a.window > 0 ? a.window : default_window_halfwidth(sys.spec, sys.phase);
  const int pts = a.points > 0 ? a.points : (d == 1 ? 2048 : 41);
  VecR lo = VecR::Constant(d, -hw), hi = VecR::Constant(d, hw);
  A.field = resonance_field(sys.spec, sys.phase, lo, hi, pts);
  A.rep = find_resonances(A.field, sys.phase, lo, hi);
  A.pol = sys.e_bar ? polarization_from(sys.spec, sys.phase, *sys.e_bar) : polarization_vectors(sys.spec, sys.phase);
  StabilityInputs in = a.inputs;
  in.d = d;
  std::vector<double> hs = {a.h, a.h / 2, a.h / 4, a.h / 8};
  A.st = stability_report(A.field, A.pol, sys.phase, A.rep, in, hs);
  return A;
}

// non-transparent pair with the largest Re Gamma
const PairSummary* leading_pair(const StabilityReport& st) {
  const PairSummary* best = nullptr;
  for (const auto& p : st.pairs) {
    bool in_r0 = false;
    for (const auto& r : st.R0) in_r0 = in_r0 || (r.first == p.i && r.second == p.j);
    if (!in_r0 || p.gamma_at_roots.empty()) continue;
    if (!best || p.max_re_gamma > best->max_re_gamma) best = &p;
  }
  return best;
}

std::vector<double> sorted_desc(std::vector<double> v) {
  std::sort(v.begin(), v.end(), std::greater<>());
  return v;
}

void write_json(const std::string& dir, const std::string& name, const json& j) {
  write_file_atomic((std::filesystem::path(dir) / name).string(), j.dump(2) + "\n");
}

void write_text(const std::string& dir, const std::string& name, const std::string& s) {
  write_file_atomic((std::filesystem::path(dir) / name).string(), s);
}

json cvec(const VecC& v) {
  json a = json::array();
  for (int q = 0; q < v.size(); ++q) a.push_back({v(q).real(), v(q).imag()});
  return a;
}

struct SimArgs {
  double epsilon = 1e-2;
  double K = 3.0, Kprime = 0.5;
  double tend = 3.5;
  int grid = 4096;
  double width = 4.0;
  double length = 0.0;
  std::uint64_t seed = 1;
  std::string perturbation = "resonant";
};

void add_sim_options(CLI::App* app, SimArgs& s, bool sweep) {
  if (!sweep) app->add_option("--epsilon", s.epsilon, "epsilon");
  app->add_option("--Kprime", s.Kprime, "target amplification exponent K'");
  app->add_option("--tend", s.tend, "final time in units of sqrt(eps)|ln eps|");
  app->add_option("--grid", s.grid, "grid points (power of two)");
  app->add_option("--width", s.width, "gaussian amplitude width");
  app->add_option("--length", s.length, "domain length (default 40 x width)");
  app->add_option("--seed", s.seed, "seed for random perturbations");
  app->add_option("--perturbation", s.perturbation, "resonant | random | none");
}

SimConfig sim_config(const Analysis& A, const SimArgs& s, std::vector<std::string>& notes) {
  SimConfig c;
  c.system_id = A.sys.id;
  c.spec = A.sys.spec;
  c.phase = A.sys.phase;
  c.e1 = A.pol.e1;
  c.em1 = A.pol.em1;
  c.epsilon = s.epsilon;
  c.grid_points = s.grid;
  c.amp_width = s.width;
  c.domain_length = s.length;
  c.K = A.st.inputs.K;
  c.K_prime = s.Kprime;
  c.seed = s.seed;
  c.perturbation = s.perturbation;
  double T = s.tend;
  if (std::isfinite(A.st.T0) && A.st.T0 > 0 && A.st.T0 < T) {
    T = A.st.T0;
    notes.push_back("final time capped at T0");
  }
  c.t_end = T * std::sqrt(s.epsilon) * std::abs(std::log(s.epsilon));
  if (A.sys.brillouin) c.time_scale = std::sqrt(s.epsilon);
  if (c.perturbation == "resonant") {
    const PairSummary* p = leading_pair(A.st);
    bool ok = false;
    if (p) {
      const PairResonance* pr = A.rep.find(p->i, p->j);
      std::size_t best = 0;
      for (std::size_t q = 1; q < p->gamma_at_roots.size(); ++q)
        if (p->gamma_at_roots[q].real() > p->gamma_at_roots[best].real()) best = q;
      if (pr && best < pr->roots.size()) {
        const VecR root = pr->roots[best];
        InteractionCoefficients ic = interaction_coefficients(A.field, A.pol, A.sys.phase, p->i, p->j, {root});
        try {
          c.e0 = unstable_datum_direction(ic.b_plus[0], ic.b_minus[0]);
          c.xi0 = root(0);
          ok = true;
          notes.push_back("resonant datum on pair (" + std::to_string(p->i + 1) + "," + std::to_string(p->j + 1) +
                          ") at xi0 = " + std::to_string(c.xi0));
        } catch (const NumericalError&) {
        }
      }
    }
    if (!ok) {
      c.perturbation = "random";
      notes.push_back("no resonant direction available; random perturbation used");
    }
  }
  return c;
}

int run_cli(int argc, char** argv) {
  CLI::App app{"oscillant: resonance, stability and simulation of highly oscillating hyperbolic systems"};
  app.set_help_flag("--help", "print help and exit");
  app.require_subcommand(1);
  app.fallthrough();
  std::string out = ".";
  bool strict = false;
  app.add_option("--out", out, "output directory (file for catalog emit)");
  std::string format = "json";
  app.add_option("--format", format, "json | csv (analyze also writes resonance.csv)")
      ->check(CLI::IsMember({"json", "csv"}));
  app.add_flag("--strict", strict, "exit 4 on undetermined or degenerate verdicts");

  SystemArgs sa;
  std::map<std::string, std::optional<double>> flags;
  AnalysisArgs aa;
  SimArgs sim;
  std::string eps_list = "1e-2,1e-3,1e-4";
  double T = 2.0;
  bool check_transparency = false, residual = false;
  double Ta = 1.0, wkb_width = 1.0, wkb_length = 0.0;
  int wkb_grid = 512;
  std::string perturb_triplet;

  auto* analyze = app.add_subcommand("analyze", "resonances, transparency and the stability index");
  add_system_options(analyze, sa, flags);
  add_analysis_options(analyze, aa);

  auto* flow = app.add_subcommand("flow", "symbolic flow growth bound");
  add_system_options(flow, sa, flags);
  add_analysis_options(flow, aa);
  flow->add_option("--epsilons", eps_list, "comma separated epsilons");
  flow->add_option("--T", T, "time window T |ln eps|");

  auto* simulate = app.add_subcommand("simulate", "direct simulation of a perturbed reference solution");
  add_system_options(simulate, sa, flags);
  add_analysis_options(simulate, aa);
  add_sim_options(simulate, sim, false);

  auto* sweep = app.add_subcommand("sweep", "epsilon sweep of the amplification time");
  add_system_options(sweep, sa, flags);
  add_analysis_options(sweep, aa);
  add_sim_options(sweep, sim, true);
  sweep->add_option("--epsilons", eps_list, "comma separated epsilons");

  auto* wkb = app.add_subcommand("wkb", "WKB cascade checks");
  add_system_options(wkb, sa, flags);
  wkb->add_flag("--check-transparency", check_transparency, "weak transparency check");
  wkb->add_flag("--residual", residual, "consistency residual orders");
  wkb->add_option("--epsilons", eps_list, "comma separated epsilons");
  wkb->add_option("--Ta", Ta, "transport time");
  wkb->add_option("--width", wkb_width, "gaussian amplitude width");
  wkb->add_option("--length", wkb_length, "periodic domain length (default 40 x width)");
  wkb->add_option("--grid", wkb_grid, "transport grid points");
  wkb->add_option("--perturb", perturb_triplet, "extra B triplet out,left,right,value (0-based)");

  auto* catalog = app.add_subcommand("catalog", "list catalog entries or emit specs");
  std::string action, emit_id;
  catalog->add_option("action", action, "list | emit")->required();
  catalog->add_option("id", emit_id, "entry to emit");
  std::vector<std::string> cat_params;
  catalog->add_option("--param", cat_params, "key=value");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  configure_threads();
  collect(sa, flags);

  int code = 0;
  auto verdict_code = [&](const std::string& v) {
    return strict && (v == "undetermined" || v == "degenerate") ? 4 : 0;
  };

  if (*analyze) {
    Analysis A = analyze_system(load_system(sa), aa);
    write_json(out, "resonance.json", to_json(A.rep));
    write_json(out, "stability.json", to_json(A.st));
    if (format == "csv") {
      std::ostringstream csv;
      csv << "i,j,root,re_gamma,im_gamma\n";
      for (const auto& p : A.st.pairs) {
        const PairResonance* pr = A.rep.find(p.i, p.j);
        for (std::size_t q = 0; pr && q < p.gamma_at_roots.size() && q < pr->roots.size(); ++q)
          csv << p.i + 1 << ',' << p.j + 1 << ',' << pr->roots[q](0) << ',' << p.gamma_at_roots[q].real() << ','
              << p.gamma_at_roots[q].imag() << '\n';
      }
      write_text(out, "resonance.csv", csv.str());
    }
    std::cout << "system " << A.sys.id << ": boundedness " << A.rep.bounded_verdict << ", verdict " << A.st.verdict
              << ", Gamma " << A.st.Gamma_index << "\n";
    code = verdict_code(A.st.verdict);
    if (strict && A.rep.bounded_verdict == "undetermined") code = 4;
  } else if (*flow) {
    Analysis A = analyze_system(load_system(sa), aa);
    const PairSummary* p = leading_pair(A.st);
    if (!p) throw NotApplicableError("no non-transparent resonance: the symbolic flow is not coupled");
    const PairResonance* pr = A.rep.find(p->i, p->j);
    const double a_sup = A.st.inputs.a_sup;
    const double gp = gamma_plus(A.field, A.pol, A.sys.phase, p->i, p->j, pr->roots, aa.h, a_sup);
    const std::vector<double> eps = sorted_desc(parse_list(eps_list, "epsilons"));
    auto sampler = [&](double e) {
      return resonance_flow_samples(A.field, A.pol, A.sys.phase, p->i, p->j, pr->roots, e, aa.h,
                                    {a_sup, 0.5 * a_sup});
    };
    GrowthBoundReport rep = verify_growth_bound(eps, sampler, gp, T);
    json j = to_json(rep);
    j["pair"] = {p->i + 1, p->j + 1};
    j["h"] = aa.h;
    write_json(out, "flow_bound.json", j);
    std::vector<FlowSample> s = sampler(eps.front());
    for (const auto& fs : s)
      if (!fs.away) {
        FlowTrajectory tr = integrate_flow([&fs](double) { return fs.m; }, 0.0,
                                           T * std::abs(std::log(eps.front())), 0.0, true);
        write_text(out, "flow_trajectory.csv", trajectory_csv(tr));
        break;
      }
    std::cout << "flow bound " << j["verdict"].get<std::string>() << ": N* = " << rep.N_star
              << ", gamma+ = " << gp << "\n";
    code = rep.pass ? 0 : (strict ? 4 : 0);
  } else if (*simulate) {
    Analysis A = analyze_system(load_system(sa), aa);
    std::vector<std::string> notes;
    SimConfig cfg = sim_config(A, sim, notes);
    SimulationRun run = run_instability_experiment(cfg);
    for (const auto& n : notes) run.notes.push_back(n);
    write_text(out, "run.csv", run_csv(run));
    json j = to_json(run);
    j["system"] = A.sys.id;
    j["epsilon"] = cfg.epsilon;
    j["stability_verdict"] = A.st.verdict;
    write_json(out, "run.json", j);
    std::cout << "simulation " << run.verdict << ": t_star = " << j["t_star"] << ", fitted_rate = " << j["fitted_rate"]
              << "\n";
  } else if (*sweep) {
    Analysis A = analyze_system(load_system(sa), aa);
    std::vector<std::string> notes;
    SimConfig cfg = sim_config(A, sim, notes);
    SweepReport r = epsilon_sweep(cfg, parse_list(eps_list, "epsilons"), sim.tend);
    for (const auto& n : notes) r.notes.push_back(n);
    json j = to_json(r);
    j["system"] = A.sys.id;
    if (A.sys.brillouin) j["time_unit"] = "eps|ln eps|";
    write_json(out, "sweep.json", j);
    std::cout << "sweep: t_star spread " << j["t_star_spread"] << ", rate spread " << j["rate_spread"] << "\n";
  } else if (*wkb) {
    Loaded sys = load_system(sa);
    if (!check_transparency && !residual) throw InputError("wkb needs --check-transparency and/or --residual");
    if (!perturb_triplet.empty()) {
      auto v = parse_list(perturb_triplet, "perturb");
      if (v.size() != 4) throw InputError("--perturb expects out,left,right,value");
      sys.spec.B.push_back({int(v[0]), int(v[1]), int(v[2]), v[3]});
      sys.spec.validate();
    }
    if (check_transparency) {
      WeakTransparencyResult w = weak_transparency_check(sys.spec, sys.phase);
      json j;
      j["pass"] = w.pass;
      j["max_norm"] = w.max_norm;
      j["scale"] = w.scale;
      if (!w.pass) j["witness"] = {{"p", w.witness_p}, {"u", cvec(w.witness_u)}, {"v", cvec(w.witness_v)}};
      write_json(out, "wkb_transparency.json", j);
      std::cout << "weak transparency " << (w.pass ? "pass" : "fail") << " (max " << w.max_norm << ")\n";
      if (!w.pass && strict) code = 4;
    }
    if (residual) {
      PolarizationVectors pol =
          sys.e_bar ? polarization_from(sys.spec, sys.phase, *sys.e_bar) : polarization_vectors(sys.spec, sys.phase);
      const double L = wkb_length > 0 ? wkb_length : 40.0 * wkb_width;
      const double w0 = wkb_width;
      WKBSolution w = solve_transport(sys.spec, sys.phase, pol, [w0](double x) { return cd(std::exp(-x * x / (w0 * w0))); },
                                      Ta, L, wkb_grid);
      const std::vector<double> eps = parse_list(eps_list, "epsilons");
      ResidualFit lead = consistency_residual(w, sys.spec, eps, false);
      json j;
      j["group_velocity"] = w.group_velocity;
      j["cubic"] = {w.cubic.real(), w.cubic.imag()};
      j["polarization_residual"] = w.polarization_residual;
      j["epsilons"] = eps;
      j["leading"] = {{"residual_l2", lead.residual_l2}, {"order", lead.order}};
      if (w.oscillating) {
        ResidualFit corr = consistency_residual(w, sys.spec, eps, true);
        j["corrected"] = {{"residual_l2", corr.residual_l2}, {"order", corr.order}};
        j["order_gain"] = corr.order - lead.order;
      }
      write_json(out, "wkb_residual.json", j);
      write_text(out, "wkb.csv", wkb_csv(w));
      std::cout << "wkb residual order " << lead.order;
      if (j.contains("order_gain")) std::cout << ", with corrector gain " << j["order_gain"];
      std::cout << "\n";
    }
  } else if (*catalog) {
    if (action == "list") {
      json j = json::object();
      for (const auto& id : catalog_ids()) j[id] = catalog_defaults(id);
      std::cout << j.dump(2) << "\n";
    } else if (action == "emit") {
      if (emit_id.empty()) throw InputError("catalog emit needs an id");
      ParamMap p;
      for (const auto& kv : cat_params) {
        auto eq = kv.find('=');
        if (eq == std::string::npos) throw InputError("--param expects key=value");
        p[kv.substr(0, eq)] = parse_list(kv.substr(eq + 1), "param").front();
      }
      CatalogSystem c = build_catalog_system(emit_id, p);
      json j = spec_to_json(c.spec);
      j["phase"] = {{"omega", c.phase.omega},
                    {"k", std::vector<double>(c.phase.k.data(), c.phase.k.data() + c.phase.k.size())}};
      if (c.e_bar) j["reference_direction"] = cvec(*c.e_bar);
      const std::string path = out == "." ? emit_id + ".json" : out;
      write_file_atomic(path, j.dump(2) + "\n");
      std::cout << "wrote " << path << "\n";
    } else {
      throw InputError("catalog action must be list or emit");
    }
  }
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
