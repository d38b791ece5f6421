// One PASS/FAIL line per acceptance criterion; exit status 1 when any criterion fails.
#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ipsinv/ipsinv.hpp"

using namespace ipsinv;
using R = Rational;

namespace {

constexpr double kFloatTol = 1e-9;
constexpr double kIsingSeconds = 1.0;
constexpr double kHmcSeconds = 1.0;
constexpr double kPanelSeconds = 300.0;
constexpr double kTwoDSeconds = 30.0;

std::mt19937_64 gen(7);

int uniform(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(gen); }
R positive(int num = 9, int den = 9) { return R(uniform(1, num), uniform(1, den)); }

std::vector<R> distribution(int k) {
  std::vector<R> v;
  R s = 0;
  for (int a = 0; a < k; ++a) {
    v.push_back(positive());
    s += v.back();
  }
  for (auto& x : v) x /= s;
  return v;
}

MarkovKernel<R> kernel(int k) {
  std::vector<std::vector<R>> rows;
  for (int a = 0; a < k; ++a) rows.push_back(distribution(k));
  return MarkovKernel<R>(k, 1, rows);
}

JumpRateMatrix<R> sparse_rates(int k, int L, int max_entries) {
  JumpRateMatrix<R> T(k, L);
  auto words = static_cast<int>(ipow(k, L));
  int n = uniform(1, max_entries);
  for (int i = 0; i < n; ++i) {
    int a = uniform(0, words - 1), b = uniform(0, words - 1);
    if (a != b) T.set_code(static_cast<WordCode>(a), static_cast<WordCode>(b), positive(4, 3));
  }
  return T;
}

/// Rates in detailed balance with the product rho.
JumpRateMatrix<R> balanced_rates(const std::vector<R>& rho, int pairs) {
  const int k = static_cast<int>(rho.size());
  JumpRateMatrix<R> T(k, 2);
  auto w = [&](WordCode c) { return rho[c / static_cast<WordCode>(k)] * rho[c % static_cast<WordCode>(k)]; };
  for (int i = 0; i < pairs; ++i) {
    auto a = static_cast<WordCode>(uniform(0, k * k - 1)), b = static_cast<WordCode>(uniform(0, k * k - 1));
    if (a == b) continue;
    R r = positive(4, 3);
    T.set_code(a, b, r);
    T.set_code(b, a, r * w(a) / w(b));
  }
  return T;
}

struct Outcome {
  bool pass = true;
  std::string detail;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      if (pass) detail = what;
      pass = false;
    }
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

R cycle_residual(const JumpRateMatrix<R>& T, const StationaryLaw<R>& law, int n) {
  auto G = build_cycle_generator(T, n);
  auto mu = law.memory() == 0 ? product_measure(law.rho(), static_cast<std::size_t>(n)) : gibbs_measure(law.kernel(), n);
  return stationarity_residual(G, mu);
}

Outcome ising() {
  Outcome o;
  auto t0 = std::chrono::steady_clock::now();
  auto spec = models::stochastic_ising(R(1, 2));
  StationaryLaw<R> law(*spec.kernel, *spec.rho);
  auto z = z_table(CriterionContext<R>(*spec.T, law));
  o.require(z.values().size() == 32, "expected 32 Z values");
  for (const auto& v : z.values()) o.require(v == 0, "nonzero Z value");
  o.require(check_markov_cycle(z, 9).invariant(), "NCycle_9 not identically zero");
  for (int n = 3; n <= 5; ++n) o.require(cycle_residual(*spec.T, law, n) == 0, "Gibbs residual nonzero at n=" + std::to_string(n));
  double s = seconds_since(t0);
  o.require(s < kIsingSeconds, "runtime " + std::to_string(s) + " s");
  return o;
}

Outcome hmc() {
  Outcome o;
  auto t0 = std::chrono::steady_clock::now();
  auto spec = models::hmc_example();
  auto law = stationary_distribution(*spec.kernel);
  o.require(law.rho() == std::vector<R>{R(35, 89), R(29, 89), R(25, 89)}, "stationary law differs");
  o.require(z_table(CriterionContext<R>(*spec.T, law)).identically_zero(), "Z not identically zero");
  auto p = project_jrm(*spec.T, *spec.projection);
  o.require(p.ok(), "projection is representative dependent");
  if (p.ok()) {
    o.require(p.T->rate({0, 0, 0}, {0, 1, 0}) == 270, "T'[000->010] != 270");
    o.require(p.T->rate({0, 1, 0}, {0, 0, 0}) == 294, "T'[010->000] != 294");
  }
  auto mu = [&](const Word& w) { return projected_probability(law, *spec.projection, w); };
  o.require(mu({1, 1, 1}) / mu({1, 1}) == R(71, 106), "mu(111)/mu(11) != 71/106");
  o.require(mu({1, 1}) / mu({1}) == R(53, 81), "mu(11)/mu(1) != 53/81");
  double s = seconds_since(t0);
  o.require(s < kHmcSeconds, "runtime " + std::to_string(s) + " s");
  return o;
}

Outcome tasep() {
  Outcome o;
  auto T = models::tasep().T.value();
  for (R p : {R(1, 4), R(1, 2), R(9, 10)}) {
    std::vector<R> rho{1 - p, p};
    auto z = z_table(product_context(T, rho));
    auto rep = check_markov_line(z);
    o.require(rep.invariant(), "TASEP not invariant at p=" + to_string(p));
    WordCode n = ipow(2, z.context().s);
    for (WordCode c = 0; c < n; ++c) {
      Word x = decode(c, 2, z.context().s);
      x.resize(static_cast<std::size_t>(z.context().h), 0);
      o.require(ncycle(z, x) == 0, "nonzero residual");
    }
    for (int len = 3; len <= 6; ++len)
      o.require(cycle_residual(T, StationaryLaw<R>::product(rho), len) == 0, "cycle oracle residual at n=" + std::to_string(len));
  }
  return o;
}

Outcome tasep3() {
  Outcome o;
  auto good = models::tasep3(1, 2, 1).T.value();
  for (int i = 0; i < 10; ++i) o.require(check_product_line(good, distribution(3)).invariant(), "(1,2,1) sample not invariant");
  auto bad = check_product_line(models::tasep3(1, 1, 1).T.value(), {R(1, 3), R(1, 3), R(1, 3)});
  o.require(!bad.invariant() && bad.witness.has_value(), "(1,1,1) lacks a not-invariant witness");
  auto poly = [](const R& t10, const R& t20, const R& t21) { return -t20 + t21 + t10; };
  o.require(poly(1, 1, 1) != 0 && poly(1, 2, 1) == 0, "necessary condition misevaluated");
  // Verdict matches the vanishing of -t20 + t21 + t10 across sampled rates.
  for (int i = 0; i < 20; ++i) {
    R t10 = positive(), t21 = positive();
    R t20 = i % 2 ? t10 + t21 : positive();
    bool inv = check_product_line(models::tasep3(t10, t20, t21).T.value(), distribution(3)).invariant();
    o.require(inv == (poly(t10, t20, t21) == 0), "verdict differs from the necessary condition");
  }
  return o;
}

Outcome absorbing() {
  Outcome o;
  std::vector<int> ns{3, 4, 5, 6, 7, 8};
  auto voter = models::voter().T.value();
  auto contact = models::contact(R(1)).T.value();
  for (int n : ns) {
    auto v = absorbing_analysis(build_cycle_generator(voter, n));
    o.require(v.is_proper && v.reaches_all && v.absorbing == std::vector<WordCode>{0, ipow(2, n) - 1},
              "voter absorbing set at n=" + std::to_string(n));
    auto c = absorbing_analysis(build_cycle_generator(contact, n));
    o.require(c.is_proper && c.reaches_all && !c.absorbing.empty() && c.absorbing.front() == 0,
              "contact absorbing set at n=" + std::to_string(n));
  }
  for (const auto* T : {&voter, &contact}) {
    auto fs = theorem_fs_conclusion(*T, ns);
    o.require(fs.excluded && fs.summary.rfind("no full-support Markov law", 0) == 0, "missing exclusion verdict");
  }
  return o;
}

Outcome panel() {
  Outcome o;
  auto t0 = std::chrono::steady_clock::now();
  int invariant = 0;
  for (int i = 0; i < 200; ++i) {
    int k = uniform(2, 3);
    JumpRateMatrix<R> T(k, 2);
    std::optional<StationaryLaw<R>> law;
    if (i % 4 == 0) {
      auto rho = distribution(k);
      T = balanced_rates(rho, 3);
      std::vector<std::vector<R>> rows(static_cast<std::size_t>(k), rho);
      law = StationaryLaw<R>(MarkovKernel<R>(k, 1, rows), rho);
    } else {
      T = sparse_rates(k, 2, 6);
      law = stationary_distribution(kernel(k));
    }
    auto z = z_table(CriterionContext<R>(T, *law));
    auto eq = check_master_replace_equivalences(z);
    o.require(eq.predicates_agree(), "predicates disagree on instance " + std::to_string(i));
    o.require(eq.cycle_pairs_agree(), "cycle-length pairs disagree on instance " + std::to_string(i));
    bool line = eq.predicates[0];
    invariant += line;
    for (int n = 3; n <= 6; ++n) {
      bool oracle = cycle_residual(T, *law, n) == 0;
      o.require(check_markov_cycle(z, n).invariant() == oracle, "cycle criterion vs oracle at n=" + std::to_string(n));
      if (line) o.require(oracle, "line-invariant law not stationary on Z/" + std::to_string(n) + "Z");
    }
  }
  o.require(invariant > 0, "panel has no invariant instance");
  double s = seconds_since(t0);
  o.require(s < kPanelSeconds, "runtime " + std::to_string(s) + " s");
  o.detail = o.pass ? std::to_string(invariant) + "/200 invariant" : o.detail;
  return o;
}

Outcome cand3() {
  Outcome o;
  for (int i = 0; i < 50; ++i) {
    int k = uniform(2, 3);
    auto M = kernel(k);
    JumpRateMatrix<R> T(k, 2);
    auto exact = candidate_kernels(T, triple_from_kernel(M));
    bool found = false;
    for (const auto& c : exact.candidates) found = found || (!c.numeric && c.kernel.rows() == M.rows());
    o.require(found, "rational path missed M");
    auto Md = M.convert<double>();
    auto flt = candidate_kernels(T.convert<double>(), triple_from_kernel(Md), Tolerance{kFloatTol});
    bool close = false;
    for (const auto& c : flt.candidates) {
      double err = 0;
      for (int a = 0; a < k; ++a)
        for (int b = 0; b < k; ++b)
          err = std::max(err, std::abs(c.kernel(static_cast<WordCode>(a), b) - Md(static_cast<WordCode>(a), b)));
      close = close || err <= kFloatTol;
    }
    o.require(close, "float path error above tolerance");
  }
  return o;
}

Outcome balanced() {
  Outcome o;
  for (int i = 0; i < 100; ++i) {
    int k = uniform(2, 3), L = uniform(1, 3);
    auto T = sparse_rates(k, L, 6);
    auto z = z_table(CriterionContext<R>(T, stationary_distribution(kernel(k))));
    for (Letter a = 0; a < k; ++a)
      for (Letter d = 0; d < k; ++d) o.require(balanced_sum(z, {a}, {d}) == 0, "nonzero balanced sum");
  }
  return o;
}

Outcome two_d() {
  Outcome o;
  auto t0 = std::chrono::steady_clock::now();
  auto flip = models::flip3_2d(4);
  std::vector<R> rho{R(2, 3), R(1, 3)};
  o.require(check_product_2d(*flip.square, rho).invariant(), "a=4, rho1=1/3 not invariant");
  auto G = build_torus_generator(flip.square->T, 3);
  o.require(G.num_states == 512, "torus state count");
  o.require(stationarity_residual(G, product_measure(rho, 9)) == 0, "torus residual nonzero");
  auto pf = models::pair_flip_2d(2, 1);
  o.require(!check_product_2d(*pf.square, {R(1, 2), R(1, 2)}).invariant(), "a != b pair flip reported invariant");
  double s = seconds_since(t0);
  o.require(s < kTwoDSeconds, "runtime " + std::to_string(s) + " s");
  return o;
}

Outcome segment() {
  Outcome o;
  for (int i = 0; i < 20; ++i) {
    auto T = sparse_rates(2, 2, 5);
    auto law = stationary_distribution(kernel(2));
    BoundaryRates<R> beta(2, 1);
    for (Letter a = 0; a < 2; ++a) {
      if (uniform(0, 1)) beta.left.set({a}, {1 - a}, positive(3, 2));
      if (uniform(0, 1)) beta.right.set({a}, {1 - a}, positive(3, 2));
    }
    for (int n = 3; n <= 6; ++n) {
      auto bal = balance(build_segment_generator(T, &beta, n), markov_segment_measure(law, n));
      for (WordCode c = 0; c < bal.size(); ++c) {
        Word x = decode(c, 2, n);
        o.require(nline_segment(law, T, beta, x) * law.weight(x) == bal[c], "segment balance mismatch");
      }
    }
  }
  auto T = models::tasep().T.value();
  auto chain = [](const R& p) {
    std::vector<R> row{1 - p, p};
    return StationaryLaw<R>(MarkovKernel<R>(2, 1, {row, row}), row);
  };
  o.require(construct_boundaries(chain(R(1, 2)), T).validated, "TASEP p=1/2 boundaries not validated");
  auto third = construct_boundaries(chain(R(1, 3)), T);
  o.require(third.validated || (third.validation.witness.has_value() && !third.validation.notes.empty()),
            "p=1/3: neither validated nor a discrepancy report");
  std::ostringstream d;
  d << "p=1/3 printed formula " << (third.validated ? "validated" : "discrepancy at " + word_to_string(third.validation.witness->word) +
                                                                       " residual " + to_string(third.validation.witness->residual));
  if (o.pass) o.detail = d.str();
  return o;
}

Outcome zero_range() {
  Outcome o;
  const int k = 4;
  auto spec = models::zero_range([](int, int) { return R(1); }, k);
  o.require(mass_preserving(*spec.T), "zero-range rates not mass preserving");
  o.require(check_product_line(*spec.T, geometric(R(1, 2), k)).invariant(), "reference geometric product not invariant");
  for (int i = 0; i < 5; ++i) {
    R q = positive(7, 7);
    o.require(check_product_line(*spec.T, geometric(q, k)).invariant(), "geometric(" + to_string(q) + ") not invariant");
  }
  return o;
}

}  // namespace

int main() {
  std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"Ising exactness", ising},
      {"HMC instance", hmc},
      {"TASEP Bernoulli products", tasep},
      {"3-colour TASEP", tasep3},
      {"absorbing sets: voter and contact", absorbing},
      {"equivalence panel (200 instances)", panel},
      {"cand3 round-trip", cand3},
      {"balanced sums", balanced},
      {"2D criterion and torus oracle", two_d},
      {"segment balance and boundaries", segment},
      {"zero-range almost-geometric family", zero_range},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    double s = seconds_since(t0);
    std::printf("criterion %2zu %s  %s (%.3f s)%s%s\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first.c_str(), s,
                o.detail.empty() ? "" : ": ", o.detail.c_str());
    failed += !o.pass;
  }
  return failed ? 1 : 0;
}
