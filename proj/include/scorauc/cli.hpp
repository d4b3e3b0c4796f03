#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "scorauc/io.hpp"

namespace scorauc::cli {

using json = io::json;

enum Exit : int { kOk = 0, kUsage = 1, kValidation = 2, kNotConverged = 3 };

// Everything a subcommand may read. Config files fill it first, flags after.
struct RunConfig {
  std::optional<ScoringRule> rule;
  CostParams box{2.0, 1.0, 2.0, 0.1, 0.5};
  std::vector<DistSpec> distributions;
  TypeGrid grid{100, 100};
  std::optional<TypeGrid> g_cells;  // density cells; follows grid when unset
  std::optional<SellerType> type;
  std::optional<double> m_ref;
  std::size_t draws = 100000;
  std::uint64_t seed = 1;
  std::size_t probes = 7;
  std::string method = "quadrature";
  std::string format = "first-score";
  BestResponseOptions br;
  double cbe_tol = 1e-8;
  bool adversarial = false;
  std::string out, csv;
  unsigned threads = 0;

  TypeGrid cells() const { return g_cells.value_or(grid); }
};

namespace detail {

// A spec argument is either inline JSON or a path, resolved against base.
inline json load_spec(const std::string& text, const std::filesystem::path& base) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    try {
      return json::parse(text);
    } catch (const json::parse_error& e) {
      throw ValidationError(std::string("inline JSON: ") + e.what());
    }
  }
  std::filesystem::path p(text);
  if (p.is_relative() && !base.empty()) p = base / p;
  return io::load_json_file(p.string());
}

inline json resolve(const json& j, const std::filesystem::path& base) {
  return j.is_string() ? load_spec(j.get<std::string>(), base) : j;
}

inline std::size_t count_of(const json& j, const std::string& what) {
  if (!j.is_number_integer() && !(j.is_number() && j.get<double>() == std::floor(j.get<double>())))
    throw ValidationError(what + " must be a non-negative integer");
  const double v = j.get<double>();
  if (v < 0 || v > 1e12) throw ValidationError(what + " must be a non-negative integer");
  return static_cast<std::size_t>(v);
}

inline double real_of(const json& j, const std::string& what) {
  if (!j.is_number()) throw ValidationError(what + " must be a number");
  return j.get<double>();
}

inline std::string text_of(const json& j, const std::string& what) {
  if (!j.is_string()) throw ValidationError(what + " must be a string");
  return j.get<std::string>();
}

inline TypeGrid grid_from_text(const std::string& s, const std::string& what) {
  std::size_t nm = 0, nf = 0;
  const auto x = s.find('x');
  try {
    std::size_t used = 0;
    if (x == std::string::npos) {
      nm = nf = std::stoul(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
    } else {
      nm = std::stoul(s.substr(0, x), &used);
      if (used != x) throw std::invalid_argument(s);
      nf = std::stoul(s.substr(x + 1), &used);
      if (used != s.size() - x - 1) throw std::invalid_argument(s);
    }
  } catch (const std::logic_error&) {
    throw ValidationError(what + " must be N or NMxNF, got '" + s + "'");
  }
  return {nm, nf};
}

inline TypeGrid grid_from_json(const json& j, const std::string& what) {
  if (j.is_string()) return grid_from_text(j.get<std::string>(), what);
  if (j.is_number()) {
    const auto n = count_of(j, what);
    return {n, n};
  }
  io::detail::only_keys(j, what, {"nm", "nf"});
  if (!j.contains("nm") || !j.contains("nf")) throw ValidationError(what + " needs nm and nf");
  return {count_of(j["nm"], what + ".nm"), count_of(j["nf"], what + ".nf")};
}

}  // namespace detail

inline void apply_config(RunConfig& rc, const json& j, const std::filesystem::path& base) {
  io::detail::only_keys(j, "config",
                        {"rule", "eta", "box", "distribution", "distributions", "grid", "g_cells", "type", "m_ref",
                         "draws", "seed", "probes", "method", "format", "tolerances", "adversarial", "out", "csv",
                         "threads"});
  if (j.contains("rule")) rc.rule = io::rule_from_json(detail::resolve(j["rule"], base));
  if (j.contains("eta")) rc.box.eta = detail::real_of(j["eta"], "eta");
  if (j.contains("box")) rc.box = io::box_from_json(j["box"], rc.box);
  if (j.contains("distribution") && j.contains("distributions"))
    throw ValidationError("config: give either distribution or distributions, not both");
  if (j.contains("distribution")) rc.distributions = {io::dist_from_json(detail::resolve(j["distribution"], base))};
  if (j.contains("distributions")) {
    if (!j["distributions"].is_array()) throw ValidationError("distributions must be an array");
    rc.distributions.clear();
    for (const auto& d : j["distributions"]) rc.distributions.push_back(io::dist_from_json(detail::resolve(d, base)));
  }
  if (j.contains("grid")) rc.grid = detail::grid_from_json(j["grid"], "grid");
  if (j.contains("g_cells")) rc.g_cells = detail::grid_from_json(j["g_cells"], "g_cells");
  if (j.contains("type")) {
    io::detail::only_keys(j["type"], "type", {"m", "f"});
    rc.type = SellerType{io::detail::get_number(j["type"], "m", "type"), io::detail::get_number(j["type"], "f", "type")};
  }
  if (j.contains("m_ref")) rc.m_ref = detail::real_of(j["m_ref"], "m_ref");
  if (j.contains("draws")) rc.draws = detail::count_of(j["draws"], "draws");
  if (j.contains("seed")) rc.seed = detail::count_of(j["seed"], "seed");
  if (j.contains("probes")) rc.probes = detail::count_of(j["probes"], "probes");
  if (j.contains("method")) rc.method = detail::text_of(j["method"], "method");
  if (j.contains("format")) rc.format = detail::text_of(j["format"], "format");
  if (j.contains("tolerances")) {
    const auto& t = j["tolerances"];
    io::detail::only_keys(t, "tolerances", {"br_tol", "max_iter", "damping", "cbe_tol"});
    if (t.contains("br_tol")) rc.br.tol = detail::real_of(t["br_tol"], "tolerances.br_tol");
    if (t.contains("max_iter")) rc.br.max_iter = static_cast<int>(detail::count_of(t["max_iter"], "tolerances.max_iter"));
    if (t.contains("damping")) rc.br.damping = detail::real_of(t["damping"], "tolerances.damping");
    if (t.contains("cbe_tol")) rc.cbe_tol = detail::real_of(t["cbe_tol"], "tolerances.cbe_tol");
  }
  if (j.contains("adversarial")) {
    if (!j["adversarial"].is_boolean()) throw ValidationError("adversarial must be true or false");
    rc.adversarial = j["adversarial"].get<bool>();
  }
  if (j.contains("out")) rc.out = detail::text_of(j["out"], "out");
  if (j.contains("csv")) rc.csv = detail::text_of(j["csv"], "csv");
  if (j.contains("threads")) rc.threads = static_cast<unsigned>(detail::count_of(j["threads"], "threads"));
}

// Raw flag values; only flags actually given override the config.
struct Flags {
  std::string config, rule, out, csv, grid, g_cells, method, format;
  std::vector<std::string> dists;
  double eta = 0, m_lo = 0, m_hi = 0, f_lo = 0, f_hi = 0, m = 0, f = 0, m_ref = 0;
  double br_tol = 0, damping = 0, cbe_tol = 0;
  int max_iter = 0;
  std::size_t draws = 0, probes = 0;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  bool adversarial = false;
};

namespace detail {

inline bool given(const CLI::App* s, const std::string& name) {
  const auto* o = s->get_option_no_throw(name);
  return o && o->count() > 0;
}

inline void apply_flags(RunConfig& rc, const Flags& fl, const CLI::App* s) {
  if (given(s, "--rule")) rc.rule = io::rule_from_json(load_spec(fl.rule, {}));
  if (given(s, "--eta")) rc.box.eta = fl.eta;
  if (given(s, "--m-lo")) rc.box.m_lo = fl.m_lo;
  if (given(s, "--m-hi")) rc.box.m_hi = fl.m_hi;
  if (given(s, "--f-lo")) rc.box.f_lo = fl.f_lo;
  if (given(s, "--f-hi")) rc.box.f_hi = fl.f_hi;
  if (given(s, "--dist")) {
    rc.distributions.clear();
    for (const auto& d : fl.dists) rc.distributions.push_back(io::dist_from_json(load_spec(d, {})));
  }
  if (given(s, "--grid")) rc.grid = grid_from_text(fl.grid, "--grid");
  if (given(s, "--g-cells")) rc.g_cells = grid_from_text(fl.g_cells, "--g-cells");
  if (given(s, "--m") != given(s, "--f")) throw ValidationError("--m and --f must be given together");
  if (given(s, "--m")) rc.type = SellerType{fl.m, fl.f};
  if (given(s, "--m-ref")) rc.m_ref = fl.m_ref;
  if (given(s, "--draws")) rc.draws = fl.draws;
  if (given(s, "--seed")) rc.seed = fl.seed;
  if (given(s, "--probes")) rc.probes = fl.probes;
  if (given(s, "--method")) rc.method = fl.method;
  if (given(s, "--format")) rc.format = fl.format;
  if (given(s, "--br-tol")) rc.br.tol = fl.br_tol;
  if (given(s, "--max-iter")) rc.br.max_iter = fl.max_iter;
  if (given(s, "--damping")) rc.br.damping = fl.damping;
  if (given(s, "--cbe-tol")) rc.cbe_tol = fl.cbe_tol;
  if (given(s, "--adversarial")) rc.adversarial = fl.adversarial;
  if (given(s, "--out")) rc.out = fl.out;
  if (given(s, "--csv")) rc.csv = fl.csv;
  if (given(s, "--threads")) rc.threads = fl.threads;
}

inline std::string method_name(const std::string& m) {
  if (m == "quadrature") return m;
  if (m == "monte-carlo" || m == "mc") return "monte-carlo";
  throw ValidationError("method must be quadrature or monte-carlo, got '" + m + "'");
}

inline std::string format_name(const std::string& f) {
  if (f == "first-score" || f == "first") return "first-score";
  if (f == "second-score" || f == "second") return "second-score";
  throw ValidationError("format must be first-score or second-score, got '" + f + "'");
}

inline const char* kind_name(const DistSpec& s) {
  switch (s.kind) {
    case DistSpec::Kind::Uniform: return "uniform";
    case DistSpec::Kind::TruncNormal: return "trunc_normal";
    case DistSpec::Kind::Mixture: return "mixture";
    case DistSpec::Kind::Grid: return "grid";
    case DistSpec::Kind::Convex: return "convex";
  }
  return "?";
}

inline void check_type_in_box(const SellerType& t, const CostParams& b) {
  if (!(t.m >= b.m_lo && t.m <= b.m_hi && t.f >= b.f_lo && t.f <= b.f_hi))
    throw ValidationError("type (m, f) must lie in the type box");
}

}  // namespace detail

// A command's products, written only after it finished.
struct Outcome {
  json report;
  std::string csv;
  bool converged = true;
};

inline Model require_model(const RunConfig& rc) {
  if (!rc.rule) throw ValidationError("a scoring rule is required (--rule or config field rule)");
  return Model(*rc.rule, rc.box);
}

inline std::vector<TypeDistribution> build_distributions(const RunConfig& rc) {
  const auto cells = rc.cells();
  std::vector<TypeDistribution> out;
  if (rc.distributions.empty()) out.push_back(make_distribution(DistSpec::uniform(), rc.box, cells.nm, cells.nf));
  for (const auto& d : rc.distributions) out.push_back(make_distribution(d, rc.box, cells.nm, cells.nf));
  return out;
}

inline void check_grid(TypeGrid g, const char* what) {
  if (g.nm < 2 || g.nf < 2) throw ValidationError(std::string(what) + " needs at least 2 points per axis");
}

inline void check_br(const BestResponseOptions& br) {
  if (!(br.damping > 0 && br.damping <= 1)) throw ValidationError("damping must lie in (0, 1]");
  if (br.max_iter < 1) throw ValidationError("max-iter must be >= 1");
  if (!(br.tol > 0)) throw ValidationError("br-tol must be > 0");
}

inline std::string strategy_csv(const EquilibriumStrategy& st) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  io::write_strategy_csv(os, st);
  return os.str();
}

inline std::string interim_csv(const SimulationReport& r) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  io::write_interim_csv(os, r);
  return os.str();
}

inline Outcome cmd_classify(const RunConfig& rc) {
  const auto model = require_model(rc);
  return {io::to_json(classify(model.rule(), model.params())), {}, true};
}

inline Outcome cmd_regularity(const RunConfig& rc) {
  const auto model = require_model(rc);
  return {io::to_json(check_regularity(model.rule(), model.params())), {}, true};
}

inline Outcome cmd_breakeven(const RunConfig& rc) {
  const auto model = require_model(rc);
  if (!rc.type) throw ValidationError("breakeven needs a type (--m and --f)");
  const auto t = *rc.type;
  if (!(t.m > 0) || !(t.f >= 0)) throw ValidationError("type needs m > 0 and f >= 0");
  return {io::to_json(t, model.breakeven(t)), {}, true};
}

inline Outcome cmd_pseudotype(const RunConfig& rc) {
  const auto model = require_model(rc);
  if (!rc.type) throw ValidationError("pseudotype needs a type (--m and --f)");
  const double m_ref = rc.m_ref.value_or(rc.box.m_lo);
  if (!(m_ref >= rc.box.m_lo && m_ref <= rc.box.m_hi)) throw ValidationError("m-ref must lie in [m_lo, m_hi]");
  detail::check_type_in_box(*rc.type, rc.box);
  const auto t = *rc.type;
  const double rho = model.pseudotype(m_ref, t);
  return {{{"m_ref", m_ref}, {"m", t.m}, {"f", t.f}, {"pseudotype", rho}, {"score", model.breakeven_score(t)}},
          {},
          true};
}

inline Outcome cmd_solve(const RunConfig& rc, bool best_response) {
  const auto model = require_model(rc);
  check_grid(rc.grid, "grid");
  if (best_response) check_br(rc.br);
  if (rc.distributions.size() > 1) throw ValidationError("solve takes a single distribution");
  const auto g = build_distributions(rc).front();
  EquilibriumStrategy st;
  if (best_response) {
    st = solve_best_response(model, g, rc.grid, rc.br);
  } else {
    require_cbe(model);
    InvariantOptions io;
    io.skip_gate = true;
    st = solve_invariant(model, g, rc.grid, io);
  }
  const auto foc = foc_residual(model, st, g);
  auto rep = io::solver_report(st, foc.max_interior);
  rep["last_change"] = st.last_change;
  return {rep, strategy_csv(st), st.converged};
}

inline Outcome cmd_simulate(const RunConfig& rc) {
  const auto model = require_model(rc);
  check_grid(rc.grid, "grid");
  check_br(rc.br);
  const auto method = detail::method_name(rc.method);
  const auto format = detail::format_name(rc.format);
  if (method == "monte-carlo" && rc.draws < 2) throw ValidationError("draws must be >= 2");
  if (rc.distributions.size() > 1) throw ValidationError("simulate takes a single distribution");
  const auto g = build_distributions(rc).front();
  const auto probes = probe_grid(rc.box, rc.probes);
  MonteCarloOptions mc;
  mc.draws = rc.draws;
  mc.seed = rc.seed;
  SimulationReport sim;
  json solver = nullptr;
  bool converged = true;
  if (format == "first-score") {
    const bool admits = classify(model.rule(), model.params()).admits_cbe;
    const auto st = solve_equilibrium(model, g, rc.grid, rc.br, admits);
    converged = st.converged;
    solver = io::solver_report(st, foc_residual(model, st, g).max_interior);
    sim = method == "quadrature" ? interim_first_score(model, st, g, probes) : run_first_score(model, st, g, probes, mc);
  } else {
    SecondScoreOptions so;
    so.profile_grid = rc.grid;
    sim = method == "quadrature" ? interim_second_score(model, g, probes, so) : run_second_score(model, g, probes, mc);
  }
  auto rep = io::to_json(sim);
  rep["solver"] = solver;
  return {rep, interim_csv(sim), converged};
}

inline Outcome cmd_equiv(const RunConfig& rc) {
  const auto model = require_model(rc);
  check_grid(rc.grid, "grid");
  check_br(rc.br);
  if (rc.distributions.size() > 1) throw ValidationError("equiv takes a single distribution");
  EquivalenceOptions eo;
  eo.method = detail::method_name(rc.method);
  if (eo.method == "monte-carlo" && rc.draws < 2) throw ValidationError("draws must be >= 2");
  eo.grid = rc.grid;
  eo.br = rc.br;
  eo.mc.draws = rc.draws;
  eo.mc.seed = rc.seed;
  eo.second.profile_grid = rc.grid;
  const auto g = build_distributions(rc).front();
  const auto rep = payoff_equivalence_report(model, g, probe_grid(rc.box, rc.probes), eo);
  return {io::to_json(rep), {}, rep.converged};
}

inline std::vector<TypeDistribution> default_scan_family(const RunConfig& rc) {
  const auto cells = rc.cells();
  std::vector<TypeDistribution> out{make_distribution(DistSpec::uniform(), rc.box, cells.nm, cells.nf)};
  for (const auto& comps : two_rectangle_mixtures(rc.box, AdversarialOptions{}))
    out.push_back(make_distribution(DistSpec::convex(DistSpec::mixture(comps), DistSpec::uniform(), 0.9), rc.box,
                                    cells.nm, cells.nf));
  return out;
}

inline Outcome cmd_scan(const RunConfig& rc) {
  const auto model = require_model(rc);
  check_grid(rc.grid, "grid");
  check_br(rc.br);
  if (rc.adversarial) {
    AdversarialOptions ao;
    ao.br = rc.br;
    ao.probes = rc.probes;
    ao.confirm_grid = rc.grid;
    if (rc.g_cells) ao.g_cells = std::max(rc.g_cells->nm, rc.g_cells->nf);
    const auto rep = adversarial_scan(model, ao);
    json j{{"scan", "adversarial"}};
    j.update(io::to_json(rep));
    return {j, {}, rep.converged};
  }
  const auto dists = rc.distributions.size() >= 2 ? build_distributions(rc) : default_scan_family(rc);
  ScanOptions so;
  so.grid = rc.grid;
  so.br = rc.br;
  const auto rep = invariance_scan(model, dists, all_pairs(probe_grid(rc.box, rc.probes)), so);
  json j{{"scan", "invariance"}};
  j.update(io::to_json(rep));
  const bool converged = std::all_of(rep.converged.begin(), rep.converged.end(), [](bool b) { return b; });
  return {j, {}, converged};
}

inline Outcome cmd_learn_demo(const RunConfig& rc) {
  const auto model = require_model(rc);
  const auto verdict = classify(model.rule(), model.params());
  if (!verdict.admits_cbe)
    throw ValidationError(std::string("rule ") + model.rule().label() +
                          " does not admit a coarse beliefs equilibrium on this type box; learn-demo needs one");
  const auto& b = rc.box;
  const SellerType t = rc.type.value_or(SellerType{0.5 * (b.m_lo + b.m_hi), 0.5 * (b.f_lo + b.f_hi)});
  detail::check_type_in_box(t, b);
  if (!(rc.cbe_tol > 0)) throw ValidationError("cbe-tol must be > 0");
  const auto cells = rc.cells();

  std::vector<TypeDistribution> family;
  std::vector<std::string> labels;
  if (rc.distributions.empty()) {
    const double fm = 0.5 * (b.f_lo + b.f_hi);
    const std::vector<std::pair<std::string, DistSpec>> specs{
        {"uniform", DistSpec::uniform()},
        {"trunc_normal", DistSpec::trunc_normal(0.5 * (b.m_lo + b.m_hi), fm, 0.5 * (b.f_hi - b.f_lo))},
        {"convex", DistSpec::convex(DistSpec::mixture({{b.m_lo, b.m_hi, fm, b.f_hi, 1.0}}), DistSpec::uniform(), 0.8)}};
    for (const auto& [name, spec] : specs) {
      family.push_back(make_distribution(spec, b, cells.nm, cells.nf));
      labels.push_back(name);
    }
  } else {
    for (const auto& d : rc.distributions) {
      family.push_back(make_distribution(d, b, cells.nm, cells.nf));
      labels.push_back(detail::kind_name(d));
    }
  }
  family.push_back(perturb(family.front(), within_class_perturbation(model, family.front()), 1.0));
  labels.push_back("within-class perturbation of " + labels.front());

  const auto rep = verify_cbe(model, family, {t}, rc.cbe_tol);
  const auto& r = rep.probes.front();
  json dists = json::array(), realizations = json::array(), bids = json::array(), prior = json::array();
  for (std::size_t k = 0; k < family.size(); ++k) {
    dists.push_back({{"label", labels[k]}, {"group", r.group[k]}});
    realizations.push_back(r.realizations[k]);
    bids.push_back(io::to_json(r.from_signal[k], model.rule()));
    prior.push_back(io::to_json(r.common_prior[k], model.rule()));
  }
  json j{{"type", io::to_json(t)},
         {"distributions", dists},
         {"realizations", realizations},
         {"bids", bids},
         {"common_prior_bids", prior},
         {"verdict",
          {{"pass", rep.pass},
           {"message", rep.message},
           {"within_group", r.within_group},
           {"signal_vs_prior", r.signal_vs_prior},
           {"tol", rep.tol}}},
         {"tiers", io::to_json(information_technology_tiers(model, std::max<std::size_t>(cells.nm, 8)), model.rule())}};
  return {j, {}, true};
}

inline void add_common(CLI::App* s, Flags& fl) {
  s->add_option("--config", fl.config, "JSON run configuration; flags override its fields");
  s->add_option("--rule", fl.rule, "scoring rule JSON (path or inline)");
  s->add_option("--eta", fl.eta, "cost curvature eta >= 1");
  s->add_option("--m-lo", fl.m_lo, "lower marginal cost");
  s->add_option("--m-hi", fl.m_hi, "upper marginal cost");
  s->add_option("--f-lo", fl.f_lo, "lower fixed cost");
  s->add_option("--f-hi", fl.f_hi, "upper fixed cost");
  s->add_option("--out", fl.out, "write the JSON report here instead of stdout");
  s->add_option("--threads", fl.threads, "worker cap, 0 = hardware");
}

inline void add_type(CLI::App* s, Flags& fl) {
  s->add_option("--m", fl.m, "marginal cost of the type");
  s->add_option("--f", fl.f, "fixed cost of the type");
}

inline void add_distribution(CLI::App* s, Flags& fl) {
  s->add_option("--dist", fl.dists, "distribution JSON (path or inline); repeatable where a family is used");
  s->add_option("--g-cells", fl.g_cells, "density cells, N or NMxNF (default: the type grid)");
}

inline void add_solver(CLI::App* s, Flags& fl) {
  add_distribution(s, fl);
  s->add_option("--grid", fl.grid, "type grid, N or NMxNF");
  s->add_option("--br-tol", fl.br_tol, "best-response stopping tolerance");
  s->add_option("--max-iter", fl.max_iter, "best-response sweep limit");
  s->add_option("--damping", fl.damping, "best-response damping in (0, 1]");
}

inline void add_sampling(CLI::App* s, Flags& fl) {
  s->add_option("--method", fl.method, "quadrature or monte-carlo");
  s->add_option("--draws", fl.draws, "Monte Carlo draws");
  s->add_option("--seed", fl.seed, "Monte Carlo seed");
  s->add_option("--probes", fl.probes, "probe lattice points per axis");
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ValidationError("cannot write " + path);
  f << text;
  if (!f) throw ValidationError("failed writing " + path);
}

inline int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"scorauc: scoring auctions with two-dimensional seller types"};
  app.name("scorauc");
  app.require_subcommand(1, 1);
  Flags fl;

  app.add_subcommand("classify", "does the rule admit a moment-based equilibrium");
  auto* breakeven_cmd = app.add_subcommand("breakeven", "break-even contract of one type");
  auto* pseudo_cmd = app.add_subcommand("pseudotype", "project a type onto a marginal-cost line");
  auto* solve_cmd = app.add_subcommand("solve", "first-score equilibrium via the closed path");
  auto* solve_br_cmd = app.add_subcommand("solve-br", "first-score equilibrium by best-response iteration");
  auto* simulate_cmd = app.add_subcommand("simulate", "interim outcomes of one auction format");
  auto* equiv_cmd = app.add_subcommand("equiv", "interim utility gap between first- and second-score");
  auto* scan_cmd = app.add_subcommand("scan", "allocation invariance or adversarial gap scan");
  auto* learn_cmd = app.add_subcommand("learn-demo", "moment signals versus the common prior");
  app.add_subcommand("regularity", "numerical regularity probes");

  for (auto* s : app.get_subcommands([](const CLI::App*) { return true; })) add_common(s, fl);
  add_type(breakeven_cmd, fl);
  add_type(pseudo_cmd, fl);
  pseudo_cmd->add_option("--m-ref", fl.m_ref, "marginal cost of the target line");
  for (auto* s : {solve_cmd, solve_br_cmd, simulate_cmd, equiv_cmd, scan_cmd}) add_solver(s, fl);
  for (auto* s : {solve_cmd, solve_br_cmd, simulate_cmd}) s->add_option("--csv", fl.csv, "write the table as CSV here");
  for (auto* s : {simulate_cmd, equiv_cmd}) add_sampling(s, fl);
  simulate_cmd->add_option("--format", fl.format, "first-score or second-score");
  scan_cmd->add_option("--probes", fl.probes, "probe lattice points per axis");
  scan_cmd->add_flag("--adversarial", fl.adversarial, "search two-rectangle mixtures for the largest gap");
  add_distribution(learn_cmd, fl);
  add_type(learn_cmd, fl);
  learn_cmd->add_option("--cbe-tol", fl.cbe_tol, "bid agreement tolerance");

  if (!args.empty() && !args.front().empty() && args.front()[0] != '-' && !app.get_subcommand_no_throw(args.front())) {
    err << "error: unknown subcommand '" << args.front() << "'\n" << app.help();
    return kUsage;
  }
  std::vector<std::string> argv_store{"scorauc"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kUsage;
  }
  CLI::App* sub = app.get_subcommands().front();

  try {
    RunConfig rc;
    if (detail::given(sub, "--config")) {
      const auto base = std::filesystem::path(fl.config).parent_path();
      apply_config(rc, io::load_json_file(fl.config), base);
    }
    detail::apply_flags(rc, fl, sub);
    num::set_threads(rc.threads);

    Outcome oc;
    const std::string name = sub->get_name();
    if (name == "classify") oc = cmd_classify(rc);
    else if (name == "regularity") oc = cmd_regularity(rc);
    else if (name == "breakeven") oc = cmd_breakeven(rc);
    else if (name == "pseudotype") oc = cmd_pseudotype(rc);
    else if (name == "solve") oc = cmd_solve(rc, false);
    else if (name == "solve-br") oc = cmd_solve(rc, true);
    else if (name == "simulate") oc = cmd_simulate(rc);
    else if (name == "equiv") oc = cmd_equiv(rc);
    else if (name == "scan") oc = cmd_scan(rc);
    else oc = cmd_learn_demo(rc);

    if (!rc.csv.empty() && !oc.csv.empty()) write_text(rc.csv, oc.csv);
    const std::string text = oc.report.dump(2) + "\n";
    if (rc.out.empty()) out << text;
    else write_text(rc.out, text);
    if (!oc.converged) {
      err << "error: solver did not converge\n";
      return kNotConverged;
    }
    return kOk;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kValidation;
  }
}

}  // namespace scorauc::cli
