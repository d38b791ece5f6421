#pragma once

#include <chrono>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ipsinv/criteria.hpp"
#include "ipsinv/io.hpp"
#include "ipsinv/lattice2d.hpp"
#include "ipsinv/models.hpp"
#include "ipsinv/oracle.hpp"
#include "ipsinv/search.hpp"
#include "ipsinv/segment.hpp"

namespace ipsinv::cli {

enum Exit { ok = 0, not_invariant = 1, input_error = 2, resource_cap = 3 };

struct Options {
  bool exact = true;
  double tol = 1e-9;
  std::string report = "text";
  WordCode max_states = WordCode(1) << 20;
  std::string file;
  int n = 0, n_min = 3, n_max = 8;
  bool construct = false;
  std::string formula = "as_printed";
  std::string model_name;
  std::vector<std::string> model_params;
  std::string emit;
};

template <class S>
Json value_json(const S& v) {
  if constexpr (std::is_same_v<S, Rational>)
    return to_string(v);
  else
    return v;
}

template <class S>
Json vector_json(const std::vector<S>& v) {
  Json a = Json::array();
  for (const auto& x : v) a.push_back(value_json(x));
  return a;
}

template <class S>
Json kernel_json(const MarkovKernel<S>& M) {
  Json rows = Json::array();
  for (const auto& r : M.rows()) rows.push_back(vector_json(r));
  return rows;
}

template <class S>
void put_report(Json& j, const CriterionReport<S>& rep) {
  j["verdict"] = to_string(rep.verdict);
  j["criterion"] = rep.criterion;
  j["words_enumerated"] = rep.words_enumerated;
  if (rep.witness) {
    Json w{{"word", rep.witness->word}, {"criterion", rep.witness->criterion}, {"residual", value_json(rep.witness->residual)}};
    if (rep.witness->replacement) w["replacement"] = *rep.witness->replacement;
    j["witness"] = w;
  }
  if (rep.certificate) {
    Json W = Json::object();
    const auto& c = *rep.certificate;
    for (WordCode i = 0; i < c.W.size(); ++i)
      if (c.W[i] != 0) W[word_to_string(decode(i, c.kappa, c.length))] = value_json(c.W[i]);
    j["certificate"] = {{"length", c.length}, {"nonzero_W", W}};
  }
  if (!rep.notes.empty()) j["notes"] = rep.notes;
}

inline void render_text(std::ostream& os, const Json& j, int indent = 0) {
  std::string pad(static_cast<std::size_t>(indent), ' ');
  for (const auto& [k, v] : j.items()) {
    if (v.is_object() && !v.empty()) {
      os << pad << k << ":\n";
      render_text(os, v, indent + 2);
    } else if (v.is_array() && !v.empty() && (v[0].is_object() || v[0].is_array()) && k != "word" && k != "kernel" &&
               k != "rows") {
      os << pad << k << ":\n";
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (v[i].is_object()) {
          os << pad << "  - #" << i << "\n";
          render_text(os, v[i], indent + 4);
        } else {
          os << pad << "  - " << v[i].dump() << "\n";
        }
      }
    } else if (v.is_string()) {
      os << pad << k << ": " << v.get<std::string>() << "\n";
    } else {
      os << pad << k << ": " << v.dump() << "\n";
    }
  }
}

namespace detail {

template <class S>
int check_markov(const ModelFile& m, const Options& o, Json& out) {
  Tolerance tol{o.tol};
  auto rep = check_markov_line(CriterionContext<S>(rates_of<S>(m), law_of<S>(m, tol), tol));
  put_report(out, rep);
  return rep.invariant() ? ok : not_invariant;
}

template <class S>
int check_product(const ModelFile& m, const Options& o, Json& out) {
  Tolerance tol{o.tol};
  auto T = rates_of<S>(m);
  auto rho = rho_of<S>(m);
  std::vector<Letter> support;
  for (int a = 0; a < m.kappa; ++a)
    if (rho[static_cast<std::size_t>(a)] > 0) support.push_back(a);
  if (static_cast<int>(support.size()) == m.kappa) {
    auto rep = check_product_line(T, rho, tol);
    put_report(out, rep);
    return rep.invariant() ? ok : not_invariant;
  }
  auto r = restrict_support(T, rho, support, tol);
  out["support"] = r.support;
  if (!r.closed) {
    out["verdict"] = "not-invariant";
    out["criterion"] = "support closure";
    out["words_enumerated"] = 0;
    out["witness"] = {{"word", r.escape->first}, {"criterion", "support closure"}, {"escapes_to", r.escape->second}};
    return not_invariant;
  }
  if (r.dirac) {
    out["verdict"] = "invariant";
    out["criterion"] = "support closure";
    out["words_enumerated"] = 0;
    out["notes"] = {"Dirac measure on a closed letter"};
    return ok;
  }
  auto rep = check_markov_line(CriterionContext<S>(*r.T, *r.law, tol));
  put_report(out, rep);
  out["notes"].push_back("criterion evaluated on the alphabet restricted to the support (letters re-indexed)");
  return rep.invariant() ? ok : not_invariant;
}

template <class S>
int find_markov_cmd(const ModelFile& m, const Options& o, Json& out) {
  auto set = find_markov(rates_of<S>(m), Tolerance{o.tol});
  Json cands = Json::array();
  for (const auto& c : set.candidates) {
    Json j{{"kernel", kernel_json(c.kernel)}, {"rho", vector_json(c.law.rho())}, {"line_invariant", c.line_invariant},
           {"numeric", c.numeric}, {"origin", c.origin}};
    if (c.witness) j["witness"] = *c.witness;
    cands.push_back(j);
  }
  std::size_t inv = 0;
  for (const auto& c : set.candidates) inv += c.line_invariant;
  out["invariant_candidates"] = inv;
  out["exhausted"] = set.exhausted;
  out["every_kernel_balances_cycle3"] = set.family_all;
  out["family_dimension"] = set.family_dimension;
  out["candidates"] = cands;
  if (!set.notes.empty()) out["notes"] = set.notes;
  return ok;
}

template <class S>
int find_product_cmd(const ModelFile& m, const Options& o, Json& out) {
  auto ps = find_product(rates_of<S>(m), Tolerance{o.tol});
  Json cands = Json::array();
  for (const auto& c : ps.candidates) {
    Json j{{"rho", vector_json(c.rho)}, {"invariant", c.report.invariant()}, {"numeric", c.numeric}};
    if (c.report.witness) j["witness"] = c.report.witness->word;
    cands.push_back(j);
  }
  out["invariant_candidates"] = ps.invariant().size();
  out["all_products"] = ps.all_products;
  out["exhausted"] = ps.exhausted;
  out["family_dimension"] = ps.family_dimension;
  out["candidates"] = cands;
  if (!ps.notes.empty()) out["notes"] = ps.notes;
  return ok;
}

template <class S>
int verify_cycle(const ModelFile& m, const Options& o, Json& out) {
  Tolerance tol{o.tol};
  if (o.n < 1) throw InputError("--n must be >= 1");
  OracleLimits lim{o.max_states};
  ipsinv::detail::checked_states(m.kappa, static_cast<std::size_t>(o.n), lim);
  auto T = rates_of<S>(m);
  auto law = law_of<S>(m, tol);
  CriterionContext<S> ctx(T, law, tol);
  auto z = z_table(ctx);
  auto rep = check_markov_cycle(z, o.n);
  put_report(out, rep);
  S worst(0);
  WordCode total = ipow(m.kappa, o.n);
  for (WordCode c = 0; c < total; ++c) worst = std::max(worst, S(abs_value(ncycle(z, decode(c, m.kappa, o.n)))));
  auto G = build_cycle_generator(T, o.n, lim);
  auto mu = law.memory() == 0 ? product_measure(law.rho(), static_cast<std::size_t>(o.n), lim) : gibbs_measure(law.kernel(), o.n, lim);
  S res = stationarity_residual(G, mu);
  bool oracle_zero = is_zero<S>(res, tol, 1.0 + to_double(T.max_rate()));
  out["residuals"] = {{"ncycle_max_abs", value_json(worst)}, {"oracle_stationarity", value_json(res)}};
  out["oracle_states"] = G.num_states;
  out["oracle_agrees"] = oracle_zero == rep.invariant();
  return ok;
}

template <class S>
int absorbing(const ModelFile& m, const Options& o, Json& out) {
  if (o.n_min < 1 || o.n_max < o.n_min) throw InputError("need 1 <= --n-min <= --n-max");
  auto T = rates_of<S>(m);
  OracleLimits lim{o.max_states};
  std::vector<int> ns;
  for (int n = o.n_min; n <= o.n_max; ++n) ns.push_back(n);
  auto fs = theorem_fs_conclusion(T, ns, lim);
  Json per = Json::array();
  for (int n : ns) {
    auto a = absorbing_analysis(build_cycle_generator(T, n, lim));
    Json j{{"n", n}, {"proper", a.is_proper}, {"closed_classes", a.closed_classes}, {"absorbing_states", a.absorbing.size()}};
    if (a.absorbing.size() <= 8) {
      Json words = Json::array();
      for (WordCode x : a.absorbing) words.push_back(word_to_string(decode(x, m.kappa, n)));
      j["states"] = words;
    }
    per.push_back(j);
  }
  out["summary"] = fs.summary;
  out["excluded"] = fs.excluded;
  out["memory_bound"] = fs.memory_bound;
  out["pattern_persists"] = fs.pattern_persists;
  out["per_n"] = per;
  return ok;
}

template <class S>
int check_2d(const ModelFile& m, const Options& o, Json& out) {
  Tolerance tol{o.tol};
  auto T2 = square_rates_of<S>(m);
  auto rho = rho_of<S>(m);
  Lattice2DContext<S> ctx(T2, rho, tol);
  auto rep = check_product_2d(ctx);
  put_report(out, rep);
  auto qdq = check_product_qdq(ctx);
  out["general_form_agrees"] = qdq.invariant() == rep.invariant();
  out["boldz_identically_zero"] = check_boldz_sufficient(T2, rho, tol);
  OracleLimits lim{o.max_states};
  try {
    auto G = build_torus_generator(T2.T, 3, lim);
    S res = stationarity_residual(G, product_measure(rho, 9, lim));
    out["torus_oracle"] = {{"n", 3}, {"states", G.num_states}, {"residual", value_json(res)}};
  } catch (const ResourceCapExceeded& e) {
    out["torus_oracle"] = {{"skipped", e.what()}};
  }
  return rep.invariant() ? ok : not_invariant;
}

template <class S>
int segment(const ModelFile& m, const Options& o, Json& out) {
  Tolerance tol{o.tol};
  auto T = rates_of<S>(m);
  auto law = law_of<S>(m, tol);
  if (law.memory() == 0) {
    // A product law is the memory-1 chain with identical rows.
    std::vector<std::vector<S>> rows(static_cast<std::size_t>(m.kappa), law.rho());
    law = StationaryLaw<S>(MarkovKernel<S>(m.kappa, 1, rows, tol), law.rho(), tol);
  }
  std::optional<BoundaryRates<S>> beta;
  if (o.construct) {
    RightBoundaryFormula f;
    if (o.formula == "as_printed")
      f = RightBoundaryFormula::as_printed;
    else if (o.formula == "source_indexed")
      f = RightBoundaryFormula::source_indexed;
    else
      throw InputError("--formula must be as_printed or source_indexed");
    auto bc = construct_boundaries(law, T, f, tol);
    Json b;
    put_report(b, bc.validation);
    out["construction"] = {{"formula", o.formula}, {"validated", bc.validated}, {"validation_n", bc.validation_n}, {"validation", b}};
    auto dump = [](const JumpRateMatrix<S>& J) {
      Json a = Json::array();
      for (const auto& [key, v] : J.entries())
        a.push_back({{"from", decode(key.first, J.kappa(), J.range())}, {"to", decode(key.second, J.kappa(), J.range())}, {"rate", value_json(v)}});
      return a;
    };
    out["beta"] = {{"left", dump(bc.beta.left)}, {"right", dump(bc.beta.right)}};
    beta = bc.beta;
  } else {
    beta = beta_of<S>(m);
    if (!beta) throw InputError("$: segment needs 'beta' or --construct-boundaries");
  }
  if (o.n > 0) {
    OracleLimits lim{o.max_states};
    ipsinv::detail::checked_states(m.kappa, static_cast<std::size_t>(o.n + 1), lim);
    Json r;
    auto rep = check_segment(law, T, *beta, o.n, tol);
    put_report(r, rep);
    try {
      auto G = build_segment_generator(T, &*beta, o.n, lim);
      r["oracle_stationarity"] = value_json(stationarity_residual(G, markov_segment_measure(law, o.n, lim)));
    } catch (const ResourceCapExceeded& e) {
      r["oracle_stationarity"] = std::string("skipped: ") + e.what();
    }
    out["segment"] = r;
  }
  return ok;
}

template <class S>
int equivalences(const ModelFile& m, const Options& o, Json& out) {
  Tolerance tol{o.tol};
  auto rep = check_master_replace_equivalences(CriterionContext<S>(rates_of<S>(m), law_of<S>(m, tol), tol));
  Json preds = Json::object();
  for (std::size_t i = 0; i < rep.predicates.size(); ++i) preds[EquivalenceReport::names[i]] = rep.predicates[i];
  out["predicates"] = preds;
  out["predicates_agree"] = rep.predicates_agree();
  if (rep.cycle_pairs_applicable)
    out["cycle_pairs"] = {{"ncycle_7", rep.ncycle7}, {"ncycle_6_and_5", rep.ncycle65}, {"ncycle_6_and_4", rep.ncycle64},
                          {"ncycle_4_5_6", rep.ncycle456}, {"agree", rep.cycle_pairs_agree()}};
  return ok;
}

inline int model(const Options& o, Json& out) {
  std::map<std::string, std::string> params;
  for (const auto& p : o.model_params) {
    auto eq = p.find('=');
    if (eq == std::string::npos || eq == 0) throw InputError("model parameter '" + p + "' is not key=value");
    params[p.substr(0, eq)] = p.substr(eq + 1);
  }
  ModelSpec spec;
  try {
    spec = build_model(o.model_name, params);
  } catch (const Error& e) {
    throw InputError(e.what());
  }
  Json j = to_json(model_file(spec));
  if (o.emit.empty() || o.emit == "-") {
    out["model_file"] = j;
  } else {
    std::ofstream f(o.emit);
    if (!f) throw InputError(o.emit + ": cannot write");
    f << j.dump(2) << "\n";
    out["written"] = o.emit;
  }
  out["name"] = spec.name;
  out["expected"] = spec.expected;
  return ok;
}

template <class S>
int dispatch(const std::string& cmd, const Options& o, Json& out) {
  if (cmd == "model") return model(o, out);
  ModelFile m = load_model(o.file);
  out["model"] = m.name.empty() ? o.file : m.name;
  if (cmd == "check-markov") return check_markov<S>(m, o, out);
  if (cmd == "check-product") return check_product<S>(m, o, out);
  if (cmd == "find-markov") return find_markov_cmd<S>(m, o, out);
  if (cmd == "find-product") return find_product_cmd<S>(m, o, out);
  if (cmd == "verify-cycle") return verify_cycle<S>(m, o, out);
  if (cmd == "absorbing") return absorbing<S>(m, o, out);
  if (cmd == "check-2d") return check_2d<S>(m, o, out);
  if (cmd == "segment") return segment<S>(m, o, out);
  if (cmd == "equivalences") return equivalences<S>(m, o, out);
  throw InputError("unknown command " + cmd);
}

}  // namespace detail

/// Entry point shared by the executable and the tests.
inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Invariance criteria for Markov laws of particle systems"};
  app.require_subcommand(1);
  Options o;
  bool use_float = false;
  std::string max_states;
  auto common = [&](CLI::App* s) {
    auto* ex = s->add_flag("--exact", "rational arithmetic (default)");
    s->add_flag("--float", use_float, "double arithmetic with --tol")->excludes(ex);
    s->add_option("--tol", o.tol, "absolute tolerance in float mode")->check(CLI::PositiveNumber);
    s->add_option("--report", o.report, "json or text")->check(CLI::IsMember({"json", "text"}));
    s->add_option("--max-states", o.max_states, "state cap for the oracles");
  };
  std::vector<std::pair<std::string, std::string>> file_cmds = {
      {"check-markov", "line invariance of a Markov law"},
      {"check-product", "line invariance of a product measure"},
      {"find-markov", "search memory-1 Markov laws"},
      {"find-product", "search product measures"},
      {"verify-cycle", "cycle criterion and generator oracle on Z/nZ"},
      {"absorbing", "absorbing sets on cycles"},
      {"check-2d", "product invariance on Z^2 and the torus oracle"},
      {"segment", "segment criterion with boundary rates"},
      {"equivalences", "the nine equivalent predicates"}};
  std::map<std::string, CLI::App*> subs;
  for (const auto& [name, desc] : file_cmds) {
    auto* s = app.add_subcommand(name, desc);
    s->add_option("FILE", o.file, "model file (JSON schema 1)")->required();
    common(s);
    subs[name] = s;
  }
  subs["verify-cycle"]->add_option("--n", o.n, "cycle length")->required();
  subs["absorbing"]->add_option("--n-min", o.n_min, "smallest cycle length");
  subs["absorbing"]->add_option("--n-max", o.n_max, "largest cycle length");
  subs["segment"]->add_option("--n", o.n, "segment length");
  subs["segment"]->add_flag("--construct-boundaries", o.construct, "derive beta from T and the law");
  subs["segment"]->add_option("--formula", o.formula, "as_printed or source_indexed");
  auto* mod = app.add_subcommand("model", "write a catalog model as a model file");
  mod->add_option("NAME", o.model_name, "catalog name")->required();
  mod->add_option("PARAMS", o.model_params, "key=value parameters");
  mod->add_option("--emit", o.emit, "output file (- for the report)");
  common(mod);

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return ok;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return ok;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return input_error;
  }
  o.exact = !use_float;
  std::string cmd = app.get_subcommands().front()->get_name();

  Json report;
  report["command"] = cmd;
  report["mode"] = o.exact ? "exact" : "float";
  auto t0 = std::chrono::steady_clock::now();
  int code = ok;
  try {
    code = o.exact ? detail::dispatch<Rational>(cmd, o, report) : detail::dispatch<double>(cmd, o, report);
  } catch (const ResourceCapExceeded& e) {
    err << "resource cap: " << e.what() << "\n";
    return resource_cap;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return input_error;
  }
  double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  report["timings"] = {{"total_ms", ms}};
  if (o.report == "json")
    out << report.dump(2) << "\n";
  else
    render_text(out, report);
  return code;
}

inline int run(int argc, char** argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, out, err);
}

}  // namespace ipsinv::cli
