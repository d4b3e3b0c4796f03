#pragma once

#include <charconv>
#include <fstream>
#include <ostream>
#include <set>
#include <string>
#include <system_error>
#include <vector>

#include "json.hpp"

#include "scorauc/breakeven.hpp"
#include "scorauc/classifier.hpp"
#include "scorauc/equilibrium.hpp"
#include "scorauc/learning.hpp"
#include "scorauc/regularity.hpp"
#include "scorauc/simulator.hpp"

namespace scorauc::io {

using json = nlohmann::ordered_json;

// Shortest round-trip text; independent of the global locale.
inline std::string number(double x) {
  if (!std::isfinite(x)) return std::isnan(x) ? "nan" : (x > 0 ? "inf" : "-inf");
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

inline json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

namespace detail {

inline void only_keys(const json& j, const std::string& what, std::initializer_list<const char*> keys) {
  if (!j.is_object()) throw ValidationError(what + " must be a JSON object");
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [k, v] : j.items())
    if (!allowed.count(k)) throw ValidationError(what + ": unknown field '" + k + "'");
}

inline double get_number(const json& j, const char* key, const std::string& what) {
  if (!j.contains(key)) throw ValidationError(what + ": missing field '" + key + "'");
  if (!j[key].is_number()) throw ValidationError(what + ": field '" + key + "' must be a number");
  return j[key].get<double>();
}

inline double get_number(const json& j, const char* key, const std::string& what, double fallback) {
  return j.contains(key) ? get_number(j, key, what) : fallback;
}

inline std::string get_string(const json& j, const char* key, const std::string& what) {
  if (!j.contains(key) || !j[key].is_string()) throw ValidationError(what + ": field '" + key + "' must be a string");
  return j[key].get<std::string>();
}

}  // namespace detail

inline ScoringRule rule_from_json(const json& j) {
  const std::string fam = detail::get_string(j, "family", "rule");
  if (fam == "quasilinear") {
    detail::only_keys(j, "rule", {"family", "phi"});
    double a = 2.0, b = 0.5;
    if (j.contains("phi")) {
      const auto& phi = j["phi"];
      detail::only_keys(phi, "rule.phi", {"kind", "a", "b"});
      if (phi.contains("kind") && detail::get_string(phi, "kind", "rule.phi") != "power")
        throw ValidationError("rule.phi: only kind 'power' is supported");
      a = detail::get_number(phi, "a", "rule.phi", a);
      b = detail::get_number(phi, "b", "rule.phi", b);
    }
    return ScoringRule::quasilinear(a, b);
  }
  if (fam == "pqr") {
    detail::only_keys(j, "rule", {"family"});
    return ScoringRule::pqr();
  }
  if (fam == "qd") {
    detail::only_keys(j, "rule", {"family", "qbar"});
    return ScoringRule::qd(detail::get_number(j, "qbar", "rule"));
  }
  throw ValidationError("rule: unknown family '" + fam + "'");
}

inline json to_json(const ScoringRule& r) {
  switch (r.family()) {
    case Family::Quasilinear:
      return {{"family", "quasilinear"}, {"phi", {{"kind", "power"}, {"a", r.a()}, {"b", r.b()}}}};
    case Family::Qd: return {{"family", "qd"}, {"qbar", r.qbar()}};
    case Family::Pqr: return {{"family", "pqr"}};
    case Family::Custom: return {{"family", "custom"}, {"label", r.label()}};
  }
  return {};
}

inline DistSpec::Component component_from_json(const json& c) {
  const std::string what = "mixture component";
  if (c.contains("rect")) {
    detail::only_keys(c, what, {"rect", "weight"});
    const auto& r = c["rect"];
    DistSpec::Component out{};
    if (r.is_array()) {
      if (r.size() != 4 || !std::all_of(r.begin(), r.end(), [](const json& x) { return x.is_number(); }))
        throw ValidationError(what + ": rect must be [m0, m1, f0, f1]");
      out = {r[0].get<double>(), r[1].get<double>(), r[2].get<double>(), r[3].get<double>(), 0};
    } else {
      detail::only_keys(r, what + ".rect", {"m0", "m1", "f0", "f1"});
      out = {detail::get_number(r, "m0", what), detail::get_number(r, "m1", what), detail::get_number(r, "f0", what),
             detail::get_number(r, "f1", what), 0};
    }
    out.weight = detail::get_number(c, "weight", what);
    return out;
  }
  detail::only_keys(c, what, {"m0", "m1", "f0", "f1", "weight"});
  return {detail::get_number(c, "m0", what), detail::get_number(c, "m1", what), detail::get_number(c, "f0", what),
          detail::get_number(c, "f1", what), detail::get_number(c, "weight", what)};
}

inline DistSpec dist_from_json(const json& j) {
  const std::string kind = detail::get_string(j, "kind", "distribution");
  if (kind == "uniform") {
    detail::only_keys(j, "distribution", {"kind"});
    return DistSpec::uniform();
  }
  if (kind == "trunc_normal") {
    detail::only_keys(j, "distribution", {"kind", "mu_m", "mu_f", "sigma"});
    const double sigma = detail::get_number(j, "sigma", "trunc_normal");
    if (!(sigma > 0)) throw ValidationError("trunc_normal: sigma must be > 0");
    return DistSpec::trunc_normal(detail::get_number(j, "mu_m", "trunc_normal"),
                                  detail::get_number(j, "mu_f", "trunc_normal"), sigma);
  }
  if (kind == "mixture") {
    detail::only_keys(j, "distribution", {"kind", "components"});
    if (!j.contains("components") || !j["components"].is_array() || j["components"].empty())
      throw ValidationError("mixture: components must be a non-empty array");
    std::vector<DistSpec::Component> comps;
    for (const auto& c : j["components"]) comps.push_back(component_from_json(c));
    return DistSpec::mixture(std::move(comps));
  }
  if (kind == "grid") {
    detail::only_keys(j, "distribution", {"kind", "values"});
    if (!j.contains("values") || !j["values"].is_array()) throw ValidationError("grid: values must be an array of rows");
    std::vector<std::vector<double>> v;
    for (const auto& row : j["values"]) {
      if (!row.is_array()) throw ValidationError("grid: every row must be an array");
      auto& out = v.emplace_back();
      for (const auto& x : row) {
        if (!x.is_number()) throw ValidationError("grid: values must be numbers");
        out.push_back(x.get<double>());
      }
    }
    return DistSpec::grid(std::move(v));
  }
  if (kind == "convex") {
    detail::only_keys(j, "distribution", {"kind", "base", "other", "lambda"});
    if (!j.contains("base") || !j.contains("other")) throw ValidationError("convex: needs base and other");
    const double lambda = detail::get_number(j, "lambda", "convex");
    if (!(lambda >= 0 && lambda <= 1)) throw ValidationError("convex: lambda must lie in [0, 1]");
    return DistSpec::convex(dist_from_json(j["base"]), dist_from_json(j["other"]), lambda);
  }
  throw ValidationError("distribution: unknown kind '" + kind + "'");
}

inline json to_json(const DistSpec& s) {
  switch (s.kind) {
    case DistSpec::Kind::Uniform: return {{"kind", "uniform"}};
    case DistSpec::Kind::TruncNormal:
      return {{"kind", "trunc_normal"}, {"mu_m", s.mu_m}, {"mu_f", s.mu_f}, {"sigma", s.sigma}};
    case DistSpec::Kind::Mixture: {
      json comps = json::array();
      for (const auto& c : s.components)
        comps.push_back({{"m0", c.m0}, {"m1", c.m1}, {"f0", c.f0}, {"f1", c.f1}, {"weight", c.weight}});
      return {{"kind", "mixture"}, {"components", comps}};
    }
    case DistSpec::Kind::Grid: return {{"kind", "grid"}, {"values", s.values}};
    case DistSpec::Kind::Convex:
      return {{"kind", "convex"}, {"base", to_json(*s.base)}, {"other", to_json(*s.other)}, {"lambda", s.lambda}};
  }
  return {};
}

// Box fields present in j replace those of base.
inline CostParams box_from_json(const json& j, CostParams base) {
  detail::only_keys(j, "box", {"m_lo", "m_hi", "f_lo", "f_hi"});
  base.m_lo = detail::get_number(j, "m_lo", "box", base.m_lo);
  base.m_hi = detail::get_number(j, "m_hi", "box", base.m_hi);
  base.f_lo = detail::get_number(j, "f_lo", "box", base.f_lo);
  base.f_hi = detail::get_number(j, "f_hi", "box", base.f_hi);
  return base;
}

inline json to_json(const CostParams& p) {
  return {{"eta", p.eta}, {"m_lo", p.m_lo}, {"m_hi", p.m_hi}, {"f_lo", p.f_lo}, {"f_hi", p.f_hi}};
}

inline json to_json(const SellerType& t) { return {{"m", t.m}, {"f", t.f}}; }

inline json to_json(const SellerType& t, const BreakEvenResult& r) {
  return {{"m", t.m},         {"f", t.f},           {"p", r.contract.p},
          {"q", r.contract.q}, {"score", r.score}, {"effort", r.effort}};
}

inline json to_json(const CBEVerdict& v) {
  json j{{"admits_cbe", v.admits_cbe}, {"method", v.method}, {"nonlinearity_score", v.nonlinearity_score}};
  if (v.witness)
    j["witness"] = {{"m", v.witness->m},
                    {"f", {v.witness->f[0], v.witness->f[1], v.witness->f[2]}},
                    {"effort", {v.witness->e[0], v.witness->e[1], v.witness->e[2]}}};
  else
    j["witness"] = nullptr;
  j["note"] = v.note;
  return j;
}

inline json to_json(const RegularityReport& r) {
  json probes = json::array();
  for (const auto& p : r.probe_locations)
    probes.push_back({{"check", p.check}, {"s", p.s}, {"m", p.m}, {"f", p.f}, {"q", p.q}, {"violation", p.violation}});
  return {{"convexity_ok", r.convexity_ok},
          {"single_crossing_ok", r.single_crossing_ok},
          {"boundary_ok", r.boundary_ok},
          {"worst_violation", r.worst_violation},
          {"single_crossing_sign", r.single_crossing_sign},
          {"probe_locations", probes}};
}

inline json solver_report(const EquilibriumStrategy& st, double max_foc_residual) {
  json j{{"mode", st.mode}, {"converged", st.converged}, {"iterations", st.iterations}};
  if (std::isfinite(max_foc_residual)) j["max_foc_residual"] = max_foc_residual;
  else j["max_foc_residual"] = nullptr;
  return j;
}

inline json to_json(const ProbeEstimate& e) {
  return {{"m", e.type.m}, {"f", e.type.f}, {"X", e.X},       {"Y", e.Y},       {"T", e.T},
          {"U", e.U},      {"se_X", e.se_X}, {"se_Y", e.se_Y}, {"se_T", e.se_T}, {"se_U", e.se_U}};
}

inline json to_json(const SimulationReport& r) {
  json probes = json::array();
  for (const auto& p : r.probes) probes.push_back(to_json(p));
  return {{"format", r.format},
          {"method", r.method},
          {"draws", r.draws},
          {"seed", r.seed},
          {"buyer_expected_score", r.buyer_expected_score},
          {"se_buyer", r.se_buyer},
          {"probes", probes}};
}

inline json to_json(const EquivalenceReport& r) {
  json rows = json::array();
  for (std::size_t k = 0; k < r.probes.size(); ++k)
    rows.push_back({{"m", r.probes[k].m},
                    {"f", r.probes[k].f},
                    {"U_first", r.first.probes[k].U},
                    {"U_second", r.second.probes[k].U},
                    {"gap", r.gaps[k]},
                    {"se_gap", r.se_gaps[k]}});
  return {{"method", r.method},
          {"solver", r.solver},
          {"converged", r.converged},
          {"max_gap", r.max_gap},
          {"worst", to_json(r.probes.at(r.worst))},
          {"order_disagreements", r.order_disagreements},
          {"buyer_first", r.first.buyer_expected_score},
          {"buyer_second", r.second.buyer_expected_score},
          {"probes", rows}};
}

inline json to_json(const AllocationFlip& f) {
  return {{"a", to_json(f.a)},
          {"b", to_json(f.b)},
          {"dist_a_wins", f.dist_a_wins},
          {"dist_b_wins", f.dist_b_wins},
          {"margin_a", f.margin_a},
          {"margin_b", f.margin_b}};
}

inline json to_json(const InvarianceReport& r) {
  json flips = json::array(), weak = json::array();
  for (const auto& f : r.flips) flips.push_back(to_json(f));
  for (const auto& f : r.inconclusive) weak.push_back(to_json(f));
  return {{"distributions", r.distributions},
          {"pairs", r.pairs},
          {"solver_modes", r.solver_modes},
          {"converged", r.converged},
          {"invariant", r.flips.empty()},
          {"flips", flips},
          {"inconclusive", weak}};
}

inline json to_json(const AdversarialReport& r) {
  json best = json::array();
  for (const auto& c : r.best)
    best.push_back({{"m0", c.m0}, {"m1", c.m1}, {"f0", c.f0}, {"f1", c.f1}, {"weight", c.weight}});
  return {{"best", best},
          {"scan_gap", r.scan_gap},
          {"confirmed_gap", r.confirmed_gap},
          {"converged", r.converged},
          {"candidates", r.candidates},
          {"candidate_gaps", r.candidate_gaps},
          {"order_disagreements", r.order_disagreements}};
}

// Null for a contract with no finite score, such as an unset tier bid.
inline json to_json(const Contract& c, const ScoringRule& rule) {
  const double s = rule.raw(c.p, c.q);
  if (!std::isfinite(s)) return nullptr;
  return {{"p", c.p}, {"q", c.q}, {"score", s}};
}

inline json to_json(const TierReport& r, const ScoringRule& rule) {
  json tiers = json::array();
  for (const auto& w : r.tiers)
    tiers.push_back({{"k", w.k},
                     {"found", w.found},
                     {"description", w.description},
                     {"type", to_json(w.type)},
                     {"realizations_a", w.realizations_a},
                     {"realizations_b", w.realizations_b},
                     {"bid_a", to_json(w.bid_a, rule)},
                     {"bid_b", to_json(w.bid_b, rule)},
                     {"bid_distance", w.bid_distance}});
  return tiers;
}

inline void write_strategy_csv(std::ostream& os, const EquilibriumStrategy& st) {
  os << "m,f,p,q,score\n";
  for (std::size_t i = 0; i < st.nm(); ++i)
    for (std::size_t j = 0; j < st.nf(); ++j) {
      const auto& c = st.contract(i, j);
      os << number(st.m_nodes[i]) << ',' << number(st.f_nodes[j]) << ',' << number(c.p) << ',' << number(c.q) << ','
         << number(st.score(i, j)) << '\n';
    }
}

inline void write_interim_csv(std::ostream& os, const SimulationReport& r) {
  os << "m,f,X,Y,T,U,se_U\n";
  for (const auto& p : r.probes)
    os << number(p.type.m) << ',' << number(p.type.f) << ',' << number(p.X) << ',' << number(p.Y) << ','
       << number(p.T) << ',' << number(p.U) << ',' << number(p.se_U) << '\n';
}

}  // namespace scorauc::io
