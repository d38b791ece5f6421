#pragma once

#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ipsinv/core.hpp"
#include "ipsinv/lattice2d.hpp"
#include "ipsinv/models.hpp"
#include "ipsinv/numerics.hpp"

namespace ipsinv {

using Json = nlohmann::ordered_json;

/// Input error with the JSON path where it was found.
class InputError : public Error {
 public:
  using Error::Error;
};

struct RateEntry {
  Word from, to;
  Rational rate;
};

/// In-memory form of a model file (schema 1). Rationals stay exact until the command picks a mode.
struct ModelFile {
  std::string name;
  int kappa = 2;
  int range = 2;
  bool square = false;
  std::vector<RateEntry> rates;
  std::optional<int> memory;
  std::optional<std::vector<std::vector<Rational>>> kernel;
  std::optional<std::vector<Rational>> rho;
  std::optional<std::vector<RateEntry>> beta_left, beta_right;
  std::optional<std::vector<Letter>> projection;
};

namespace io_detail {

inline const std::set<std::string> top_keys = {"schema", "name", "kappa", "range", "lattice", "rates", "memory",
                                               "kernel", "rho", "beta", "projection"};

[[noreturn]] inline void fail(const std::string& path, const std::string& msg) { throw InputError(path + ": " + msg); }

inline Rational number(const Json& j, const std::string& path) {
  if (j.is_string()) {
    try {
      return parse_rational(j.get<std::string>());
    } catch (const Error& e) {
      fail(path, e.what());
    }
  }
  if (j.is_number_integer()) return Rational(j.get<long long>());
  fail(path, "expected a rational as a string such as \"1/3\" or an integer");
}

inline int integer(const Json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  return j.get<int>();
}

inline Word word(const Json& j, const std::string& path, int kappa, int len) {
  if (!j.is_array()) fail(path, "expected an array of letters");
  if (static_cast<int>(j.size()) != len) fail(path, "expected " + std::to_string(len) + " letters");
  Word w;
  for (std::size_t i = 0; i < j.size(); ++i) {
    int a = integer(j[i], path + "[" + std::to_string(i) + "]");
    if (a < 0 || a >= kappa) fail(path + "[" + std::to_string(i) + "]", "letter outside 0.." + std::to_string(kappa - 1));
    w.push_back(a);
  }
  return w;
}

inline std::vector<RateEntry> rate_list(const Json& j, const std::string& path, int kappa, int len) {
  if (!j.is_array()) fail(path, "expected an array of {from, to, rate}");
  std::vector<RateEntry> out;
  std::set<std::pair<Word, Word>> seen;
  for (std::size_t i = 0; i < j.size(); ++i) {
    std::string p = path + "[" + std::to_string(i) + "]";
    const Json& e = j[i];
    if (!e.is_object()) fail(p, "expected an object");
    for (const auto& [k, v] : e.items())
      if (k != "from" && k != "to" && k != "rate") fail(p, "unknown key '" + k + "'");
    for (const char* k : {"from", "to", "rate"})
      if (!e.contains(k)) fail(p, std::string("missing '") + k + "'");
    RateEntry r{word(e["from"], p + ".from", kappa, len), word(e["to"], p + ".to", kappa, len),
                number(e["rate"], p + ".rate")};
    if (r.rate < 0) fail(p + ".rate", "negative rate");
    if (r.from == r.to && r.rate != 0) fail(p, "diagonal rates are not allowed");
    if (!seen.insert({r.from, r.to}).second) fail(p, "duplicate entry");
    out.push_back(std::move(r));
  }
  return out;
}

inline Json rational_json(const Rational& r) { return to_string(r); }

inline Json rate_list_json(const std::vector<RateEntry>& rates) {
  Json a = Json::array();
  for (const auto& r : rates) a.push_back({{"from", r.from}, {"to", r.to}, {"rate", rational_json(r.rate)}});
  return a;
}

inline std::vector<RateEntry> entries_of(const JumpRateMatrix<Rational>& T) {
  std::vector<RateEntry> out;
  for (const auto& [key, v] : T.entries())
    out.push_back({decode(key.first, T.kappa(), T.range()), decode(key.second, T.kappa(), T.range()), v});
  return out;
}

}  // namespace io_detail

inline ModelFile parse_model(const Json& j) {
  using namespace io_detail;
  if (!j.is_object()) fail("$", "expected an object");
  for (const auto& [k, v] : j.items())
    if (!top_keys.count(k)) fail("$." + k, "unknown key");
  if (!j.contains("schema")) fail("$", "missing 'schema'");
  if (integer(j["schema"], "$.schema") != 1) fail("$.schema", "unsupported schema version");
  ModelFile m;
  if (j.contains("name")) {
    if (!j["name"].is_string()) fail("$.name", "expected a string");
    m.name = j["name"].get<std::string>();
  }
  if (!j.contains("kappa")) fail("$", "missing 'kappa'");
  m.kappa = integer(j["kappa"], "$.kappa");
  if (m.kappa < 2) fail("$.kappa", "alphabet size must be >= 2");
  if (j.contains("lattice")) {
    if (!j["lattice"].is_string()) fail("$.lattice", "expected \"line\" or \"square\"");
    std::string l = j["lattice"].get<std::string>();
    if (l == "square")
      m.square = true;
    else if (l != "line")
      fail("$.lattice", "expected \"line\" or \"square\"");
  }
  if (m.square) {
    m.range = 4;
    if (j.contains("range") && integer(j["range"], "$.range") != 4) fail("$.range", "square patterns have 4 cells");
  } else {
    if (!j.contains("range")) fail("$", "missing 'range'");
    m.range = integer(j["range"], "$.range");
    if (m.range < 1) fail("$.range", "range must be >= 1");
  }
  if (!j.contains("rates")) fail("$", "missing 'rates'");
  m.rates = rate_list(j["rates"], "$.rates", m.kappa, m.range);
  if (j.contains("memory")) {
    m.memory = integer(j["memory"], "$.memory");
    if (*m.memory < 0) fail("$.memory", "memory must be >= 0");
  }
  if (j.contains("kernel")) {
    const Json& k = j["kernel"];
    if (!k.is_array()) fail("$.kernel", "expected an array of rows");
    std::vector<std::vector<Rational>> rows;
    for (std::size_t r = 0; r < k.size(); ++r) {
      std::string p = "$.kernel[" + std::to_string(r) + "]";
      if (!k[r].is_array() || static_cast<int>(k[r].size()) != m.kappa) fail(p, "expected " + std::to_string(m.kappa) + " entries");
      std::vector<Rational> row;
      for (std::size_t c = 0; c < k[r].size(); ++c) row.push_back(number(k[r][c], p + "[" + std::to_string(c) + "]"));
      rows.push_back(std::move(row));
    }
    int mem = 0;
    while (ipow(m.kappa, mem) < rows.size()) ++mem;
    if (ipow(m.kappa, mem) != rows.size()) fail("$.kernel", "number of rows must be a power of kappa");
    if (m.memory && *m.memory != mem) fail("$.memory", "does not match the number of kernel rows");
    m.memory = mem;
    m.kernel = std::move(rows);
  }
  if (j.contains("rho")) {
    const Json& r = j["rho"];
    if (!r.is_array()) fail("$.rho", "expected an array");
    std::vector<Rational> v;
    for (std::size_t i = 0; i < r.size(); ++i) v.push_back(number(r[i], "$.rho[" + std::to_string(i) + "]"));
    m.rho = std::move(v);
  }
  if (j.contains("beta")) {
    const Json& b = j["beta"];
    if (!b.is_object()) fail("$.beta", "expected {left, right}");
    for (const auto& [k, v] : b.items())
      if (k != "left" && k != "right") fail("$.beta." + k, "unknown key");
    m.beta_left = b.contains("left") ? rate_list(b["left"], "$.beta.left", m.kappa, m.range - 1) : std::vector<RateEntry>{};
    m.beta_right = b.contains("right") ? rate_list(b["right"], "$.beta.right", m.kappa, m.range - 1) : std::vector<RateEntry>{};
  }
  if (j.contains("projection")) {
    const Json& p = j["projection"];
    if (!p.is_array() || static_cast<int>(p.size()) != m.kappa) fail("$.projection", "expected one image per letter");
    std::vector<Letter> v;
    for (std::size_t i = 0; i < p.size(); ++i) v.push_back(integer(p[i], "$.projection[" + std::to_string(i) + "]"));
    m.projection = std::move(v);
  }
  return m;
}

inline ModelFile parse_model_text(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw InputError(std::string("invalid JSON: ") + e.what());
  }
  return parse_model(j);
}

inline ModelFile load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError(path + ": cannot open file");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_model_text(ss.str());
  } catch (const InputError& e) {
    throw InputError(path + ": " + e.what());
  }
}

inline Json to_json(const ModelFile& m) {
  using namespace io_detail;
  Json j;
  j["schema"] = 1;
  if (!m.name.empty()) j["name"] = m.name;
  j["kappa"] = m.kappa;
  if (m.square)
    j["lattice"] = "square";
  else
    j["range"] = m.range;
  j["rates"] = rate_list_json(m.rates);
  if (m.memory) j["memory"] = *m.memory;
  if (m.kernel) {
    Json rows = Json::array();
    for (const auto& r : *m.kernel) {
      Json row = Json::array();
      for (const auto& v : r) row.push_back(rational_json(v));
      rows.push_back(row);
    }
    j["kernel"] = rows;
  }
  if (m.rho) {
    Json r = Json::array();
    for (const auto& v : *m.rho) r.push_back(rational_json(v));
    j["rho"] = r;
  }
  if (m.beta_left || m.beta_right)
    j["beta"] = {{"left", rate_list_json(m.beta_left.value_or(std::vector<RateEntry>{}))},
                 {"right", rate_list_json(m.beta_right.value_or(std::vector<RateEntry>{}))}};
  if (m.projection) j["projection"] = *m.projection;
  return j;
}

inline ModelFile model_file(const ModelSpec& spec) {
  ModelFile m;
  m.name = spec.name;
  if (spec.square) {
    m.square = true;
    m.kappa = spec.square->kappa();
    m.range = 4;
    m.rates = io_detail::entries_of(spec.square->T);
  } else if (spec.T) {
    m.kappa = spec.T->kappa();
    m.range = spec.T->range();
    m.rates = io_detail::entries_of(*spec.T);
  } else {
    throw Error("model has no rates");
  }
  if (spec.kernel) {
    m.kernel = spec.kernel->rows();
    m.memory = spec.kernel->memory();
  }
  m.rho = spec.rho;
  m.projection = spec.projection;
  return m;
}

template <class S>
JumpRateMatrix<S> rates_of(const ModelFile& m) {
  JumpRateMatrix<Rational> T(m.kappa, m.range);
  for (const auto& r : m.rates)
    if (r.from != r.to) T.set(r.from, r.to, r.rate);
  if constexpr (std::is_same_v<S, Rational>)
    return T;
  else
    return T.template convert<S>();
}

template <class S>
SquareJRM<S> square_rates_of(const ModelFile& m) {
  if (!m.square) throw InputError("$.lattice: this command needs \"lattice\": \"square\"");
  SquareJRM<S> T2(m.kappa);
  T2.T = rates_of<S>(m);
  return T2;
}

template <class S>
std::vector<S> convert_vector(const std::vector<Rational>& v) {
  std::vector<S> out;
  for (const auto& x : v) out.push_back(scalar_cast<S>(x));
  return out;
}

/// Law from the file: kernel (rho computed when absent) or a product marginal.
template <class S>
StationaryLaw<S> law_of(const ModelFile& m, const Tolerance& tol) {
  if (m.kernel) {
    std::vector<std::vector<S>> rows;
    for (const auto& r : *m.kernel) rows.push_back(convert_vector<S>(r));
    MarkovKernel<S> M(m.kappa, *m.memory, std::move(rows), tol);
    if (*m.memory == 0) return StationaryLaw<S>(M, M.row(0), tol);
    if (m.rho) return StationaryLaw<S>(M, convert_vector<S>(*m.rho), tol);
    return stationary_distribution(M, tol);
  }
  if (m.rho) {
    if (static_cast<int>(m.rho->size()) != m.kappa) throw InputError("$.rho: expected one probability per letter");
    return StationaryLaw<S>::product(convert_vector<S>(*m.rho), tol);
  }
  throw InputError("$: this command needs 'kernel' or 'rho'");
}

template <class S>
std::vector<S> rho_of(const ModelFile& m) {
  if (!m.rho) throw InputError("$: this command needs 'rho'");
  if (static_cast<int>(m.rho->size()) != m.kappa) throw InputError("$.rho: expected one probability per letter");
  return convert_vector<S>(*m.rho);
}

template <class S>
std::optional<BoundaryRates<S>> beta_of(const ModelFile& m) {
  if (!m.beta_left && !m.beta_right) return std::nullopt;
  JumpRateMatrix<Rational> l(m.kappa, m.range - 1), r(m.kappa, m.range - 1);
  for (const auto& e : m.beta_left.value_or(std::vector<RateEntry>{}))
    if (e.from != e.to) l.set(e.from, e.to, e.rate);
  for (const auto& e : m.beta_right.value_or(std::vector<RateEntry>{}))
    if (e.from != e.to) r.set(e.from, e.to, e.rate);
  if constexpr (std::is_same_v<S, Rational>)
    return BoundaryRates<S>(l, r);
  else
    return BoundaryRates<S>(l.template convert<S>(), r.template convert<S>());
}

}  // namespace ipsinv
