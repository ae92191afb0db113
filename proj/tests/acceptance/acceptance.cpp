// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "pcfbounds/approx.hpp"
#include "pcfbounds/bounds.hpp"
#include "pcfbounds/groundsem.hpp"
#include "pcfbounds/krivine.hpp"
#include "pcfbounds/operational.hpp"
#include "pcfbounds/poly.hpp"
#include "pcfbounds/preorder.hpp"
#include "pcfbounds/syntax_text.hpp"
#include "testkit.hpp"

namespace pcf {
namespace {

using testkit::Rng;

const Type kNat = Type::nat();

struct Failure {
  std::string message;
};

void require(bool ok, const std::string& what) {
  if (!ok) throw Failure{what};
}

struct Criterion {
  int id;
  std::string title;
  double budget_s;
  std::function<std::string()> body;  // returns a short summary
};

Rational machine_value(const Term& m, const Context& ctx = Context{}, const IndexSet& j = {},
                       const Valuation& v = {}) {
  return eval(tree_to_poly(kreval_term(m, ctx, j)), v);
}

Term geometric() { return parse_term(R"(fix (\f: nat -> nat. \y: nat. if coin(1/2) then y else f y) 0)"); }

// ---------------------------------------------------------------- 1

std::string machine_oracle_exactness() {
  Rng rng(1001);
  testkit::TermShape shape;
  shape.depth = 6;
  shape.coin_bits = 3;
  int n = 0;
  for (; n < 240; ++n) {
    Term t = testkit::random_term(rng, kNat, shape);
    if (n % 2 == 1) t = wrap_observe(t);
    require(is_fix_free(t) && !t.has_free_vars(), "generator produced an open or recursive term");
    const Rational got = machine_value(t);
    const ErrBounds exact = err_probability(t);
    require(exact.lower == exact.upper, "oracle did not terminate on " + render(t));
    require(got == exact.lower, "machine " + to_string(got) + " vs oracle " + to_string(exact.lower) + " on " + render(t));
    require(got == testkit::denote_errconv(t), "machine disagrees with big-step oracle on " + render(t));
  }
  return std::to_string(n) + " closed fix-free terms, exact equality with both oracles";
}

// ---------------------------------------------------------------- 2

std::string free_variable_adequacy() {
  Rng rng(1002);
  const IndexSet j{0, 1, 2};
  const Context ctx{{"x", kNat}};
  testkit::TermShape shape;
  shape.depth = 5;
  shape.free_nat = {"y"};
  int linear = 0;
  for (; linear < 80; ++linear) {
    // One draw of x, shared through y.
    const Term m = Term::let("y", Term::var("x"), testkit::random_term(rng, kNat, shape));
    const SubDist u = testkit::random_subdist(rng, j);
    const Rational got = machine_value(m, ctx, j, {{"x", u}});
    Rational expected = u.err() * err_probability(substitute(m, "x", Term::errconv())).lower;
    for (const auto& [n, mass] : u.entries()) expected += mass * err_probability(substitute(m, "x", Term::num(n))).lower;
    require(got == expected, "linear formula fails on " + render(m) + ": " + to_string(got) + " vs " + to_string(expected));
  }
  // Terms using x several times: each use is an independent draw.
  testkit::TermShape multi = shape;
  multi.free_nat = {"x"};
  int sampled = 0;
  for (; sampled < 60; ++sampled) {
    const Term m = testkit::random_term(rng, kNat, multi);
    const SubDist u = testkit::random_subdist(rng, j);
    const Rational got = machine_value(m, ctx, j, {{"x", u}});
    const Rational expected = testkit::denote_errconv(substitute(m, "x", sampler_term(u)));
    require(got == expected, "sampler substitution fails on " + render(m));
  }
  return std::to_string(linear) + " single-draw terms + " + std::to_string(sampled) + " multi-use terms, exact";
}

// ---------------------------------------------------------------- 3

std::string sandwich_soundness() {
  Rng rng(1003);
  int terms = 0;
  int mc_checks = 0;
  double worst_z = 0;
  for (; terms < 60; ++terms) {
    const bool open = terms % 3 == 0;
    BoundsQuery q;
    q.term = testkit::random_fix_term(rng, open ? std::vector<std::string>{"x"} : std::vector<std::string>{}, false);
    q.ctx = Context::ground_for(q.term);
    for (const auto& v : free_vars(q.term)) q.dists[v] = testkit::random_subdist(rng, {0, 1, 2});
    BoundsEngine engine;
    std::vector<Interval> by_k;
    for (std::uint32_t k : {1u, 2u, 4u, 8u}) {
      q.k = k;
      by_k.push_back(engine.bound_at_k(q));
    }
    for (std::size_t i = 0; i < by_k.size(); ++i) {
      require(by_k[i].lower <= by_k[i].upper, "lower > upper on " + render(q.term));
      if (i + 1 < by_k.size()) {
        require(by_k[i].lower <= by_k[i + 1].lower, "lower bound decreased on " + render(q.term));
        require(by_k[i + 1].upper <= by_k[i].upper, "upper bound increased on " + render(q.term));
      }
    }
    q.k = 8;
    const CrossValidation cv = cross_validate(q, 10000, 7000 + static_cast<std::uint64_t>(terms), 1000);
    ++mc_checks;
    const double lo = by_k.back().lower.get_d();
    const double hi = by_k.back().upper.get_d();
    const double dist = cv.empirical < lo ? lo - cv.empirical : cv.empirical > hi ? cv.empirical - hi : 0.0;
    if (cv.sigma > 0) worst_z = std::max(worst_z, dist / cv.sigma);
    std::ostringstream why;
    why << "Monte Carlo " << cv.empirical << " outside [" << lo << ", " << hi << "] +- 5*" << cv.sigma << " on "
        << render(q.term);
    require(cv.within_band, why.str());
  }
  std::ostringstream s;
  s << terms << " recursive terms, k in {1,2,4,8}; " << mc_checks << " Monte Carlo checks, worst excess "
    << worst_z << " sigma";
  return s.str();
}

// ---------------------------------------------------------------- 4

std::string geometric_closed_form() {
  BoundsEngine engine;
  BoundsQuery q;
  q.term = geometric();
  for (std::uint32_t k = 1; k <= 10; ++k) {
    q.k = k;
    const Interval iv = engine.bound_at_k(q);
    const Rational expected = 1 - Rational(1, 1u << k);
    require(iv.lower == expected, "k=" + std::to_string(k) + " lower " + to_string(iv.lower));
    require(iv.upper == 1, "k=" + std::to_string(k) + " upper " + to_string(iv.upper));
  }
  return "lower_k = 1 - 2^-k and upper_k = 1 for k = 1..10";
}

// ---------------------------------------------------------------- 5

std::string non_closing_gap() {
  BoundsEngine engine;
  BoundsQuery q;
  q.term = parse_term(R"(if coin(1/2) then 0 else fix (\x: nat. x))");
  for (std::uint32_t k = 0; k <= 16; ++k) {
    q.k = k;
    const Interval iv = engine.bound_at_k(q);
    require(iv.lower == Rational(1, 2) && iv.upper == 1, "k=" + std::to_string(k) + " interval moved");
  }
  q.epsilon = Rational(1, 10);
  q.k_max = 16;
  const BoundsReport r = engine.refine(q);
  require(!r.converged, "refine claimed convergence");
  require(r.lower == Rational(1, 2) && r.upper == 1, "refine interval moved");
  return "(1/2, 1) for k = 0..16, refine not converged at eps = 1/10";
}

// ---------------------------------------------------------------- 6

std::string flate_order() {
  const Rational one(1);
  require(ext_leq(SubDist({{0, one}}, 0), SubDist({}, one)), "(1,0,0) <= (0,0,1) should hold");
  require(!ext_leq(SubDist({{0, one}}, 0), SubDist({{1, one}}, 0)), "(1,0,0) <= (0,1,0) should fail");
  Rng rng(1006);
  const SubDist top = SubDist::dirac_err();
  for (int i = 0; i < 100; ++i) {
    const SubDist u = testkit::random_subdist(rng, {0, 1, 2, 3}, rng.chance(1, 2));
    require(ext_leq(u, top), "u <= delta_err fails for " + format_subdist(u));
  }
  int related = 0;
  for (int i = 0; i < 1000; ++i) {
    const SubDist u = testkit::random_subdist(rng, {0, 1, 2});
    const SubDist v = testkit::random_subdist(rng, {0, 1, 2});
    if (ext_leq(u, v)) {
      ++related;
      require(u.err() <= v.err(), "order does not bound err mass: " + format_subdist(u) + " vs " + format_subdist(v));
    }
  }
  return "examples, 100 maximality checks, 1000 pairs (" + std::to_string(related) + " related)";
}

// ---------------------------------------------------------------- 7

// A random v with u <= v: shrink some numerals, move that mass (and maybe
// more) onto err, then spend leftover mass on numerals.
SubDist above(Rng& rng, const SubDist& u, const IndexSet& support) {
  std::map<std::uint64_t, Rational> entries = u.entries();
  Rational err = u.err();
  for (auto& [n, m] : entries) {
    if (rng.chance(1, 2)) {
      const Rational d = m * rng.dyadic(2);
      m -= d;
      err += d;
    }
  }
  Rational total = err;
  for (const auto& [n, m] : entries) total += m;
  Rational slack = 1 - total;
  if (slack > 0 && rng.chance(1, 2)) {
    const Rational d = slack * rng.dyadic(2);
    err += d;
    slack -= d;
  }
  for (std::uint64_t n : support) {
    if (slack > 0 && rng.chance(1, 3)) {
      const Rational d = slack * rng.dyadic(2);
      entries[n] += d;
      slack -= d;
    }
  }
  return SubDist(std::move(entries), std::move(err));
}

std::string ground_monotonicity() {
  Rng rng(1007);
  const IndexSet s{0, 1, 2};
  auto pair = [&](SubDist& lo, SubDist& hi) {
    lo = testkit::random_subdist(rng, s);
    hi = above(rng, lo, s);
    require(ext_leq(lo, hi), "pair generator broke the order");
  };
  auto rnd = [&] { return testkit::random_subdist(rng, s); };
  const int n = 1000;
  for (int i = 0; i < n; ++i) {
    SubDist u, u2, b, b2, c, c2;
    pair(u, u2);
    pair(b, b2);
    pair(c, c2);
    const SubDist fb = rnd(), fc = rnd(), fu = rnd();
    require(ext_leq(case_err(u, fb, fc), case_err(u2, fb, fc)), "case_err not monotone in scrutinee");
    require(ext_leq(case_err(fu, b, fc), case_err(fu, b2, fc)), "case_err not monotone in zero branch");
    require(ext_leq(case_err(fu, fb, c), case_err(fu, fb, c2)), "case_err not monotone in successor branch");
  }
  for (int i = 0; i < n; ++i) {
    SubDist u, u2;
    pair(u, u2);
    std::map<std::uint64_t, SubDist> h, h2;
    for (std::uint64_t k : s) pair(h[k], h2[k]);
    auto f = [&](std::uint64_t k) { return h.at(k); };
    auto f2 = [&](std::uint64_t k) { return h2.at(k); };
    require(ext_leq(let_err(u, f), let_err(u2, f)), "let_err not monotone in bound value");
    require(ext_leq(let_err(u, f), let_err(u, f2)), "let_err not monotone in body");
  }
  for (int i = 0; i < n; ++i) {
    SubDist u, u2;
    pair(u, u2);
    std::map<std::uint64_t, std::optional<std::uint64_t>> table;
    for (std::uint64_t k : s) {
      if (!rng.chance(1, 4)) table[k] = rng.below(4);
    }
    auto f = [&](std::uint64_t k) -> std::optional<std::uint64_t> {
      auto it = table.find(k);
      return it == table.end() ? std::nullopt : it->second;
    };
    require(ext_leq(bfun_err(f, u), bfun_err(f, u2)), "bfun_err not monotone");
    require(ext_leq(succ_err(u), succ_err(u2)) && ext_leq(pred_err(u), pred_err(u2)), "succ/pred not monotone");
  }
  for (int i = 0; i < n; ++i) {
    const SubDist u = testkit::random_subdist(rng, {0, 1, 2, 3, 4});
    IndexSet j;
    for (std::uint64_t k = 0; k < 5; ++k) {
      if (rng.chance(1, 2)) j.insert(k);
    }
    require(pointwise_leq(idl(j, u), u), "idl(J,u) <= u fails");
    require(ext_leq(u, idu(j, u)), "u <= idu(J,u) fails");
  }
  return std::to_string(n) + " cases each for case, let, bfun and the identity approximants";
}

// ---------------------------------------------------------------- 8

std::string polynomial_algebra() {
  Rng rng(1008);
  const IndexSet idx{0, 1, 2};
  int n = 0;
  for (; n < 1000; ++n) {
    const Polynomial a = testkit::random_poly(rng, {"x", "y"}, idx, 5, 3);
    const Polynomial b = testkit::random_poly(rng, {"x", "y"}, idx, 5, 3);
    const Polynomial c = testkit::random_poly(rng, {"x", "y"}, idx, 3, 2);
    const Valuation v{{"x", testkit::random_subdist(rng, idx)}, {"y", testkit::random_subdist(rng, idx)}};
    const Rational alpha = rng.dyadic(4) * 5;
    require(eval(poly_add(a, b), v) == eval(a, v) + eval(b, v), "sum law");
    require(eval(poly_mul(a, b), v) == eval(a, v) * eval(b, v), "product law");
    require(eval(poly_scale(alpha, a), v) == alpha * eval(a, v), "scaling law");
    require(poly_mul(a, poly_add(b, c)) == poly_add(poly_mul(a, b), poly_mul(a, c)), "distributivity");
    require(poly_mul(a, b) == poly_mul(b, a), "commutativity");
  }
  return std::to_string(n) + " random polynomial pairs, exact";
}

// ---------------------------------------------------------------- 9

std::string preorder_procedure() {
  Rng rng(1009);
  const Context ctx;
  int reflexive = 0;
  int transitive = 0;
  for (int i = 0; i < 500; ++i) {
    const Type ty = testkit::random_type(rng);
    testkit::TermShape shape;
    shape.depth = 4;
    shape.allow_fix = rng.chance(1, 3);
    const Term b = testkit::random_term(rng, ty, shape);
    require(term_preorder_leq(b, b, ctx, ty), "reflexivity fails on " + render(b));
    ++reflexive;
    const Term a = testkit::lower_mutation(rng, b);
    const Term c = testkit::upper_mutation(rng, b);
    const bool ab = term_preorder_leq(a, b, ctx, ty);
    const bool bc = term_preorder_leq(b, c, ctx, ty);
    require(ab && bc, "mutation not related to its source: " + render(a) + " / " + render(b) + " / " + render(c));
    require(term_preorder_leq(a, c, ctx, ty), "transitivity fails: " + render(a) + " <= " + render(c));
    ++transitive;
  }
  int sandwiches = 0;
  for (int i = 0; i < 100; ++i) {
    testkit::TermShape shape;
    shape.depth = 4;
    shape.allow_fix = true;
    const Term m = i % 2 == 0 ? testkit::random_fix_term(rng) : testkit::random_term(rng, kNat, shape);
    const auto k = static_cast<std::uint32_t>(rng.below(5));
    const Term lo = unfold(m, k, Polarity::Lower, ctx);
    const Term hi = unfold(m, k, Polarity::Upper, ctx);
    require(term_preorder_leq(lo, m, ctx, kNat), "lower unfolding not below " + render(m));
    require(term_preorder_leq(m, hi, ctx, kNat), "upper unfolding not above " + render(m));
    ++sandwiches;
  }
  return std::to_string(reflexive) + " reflexive, " + std::to_string(transitive) + " transitive triples, " +
         std::to_string(sandwiches) + " unfold sandwiches";
}

}  // namespace
}  // namespace pcf

int main() {
  using namespace pcf;
  const std::vector<Criterion> criteria = {
      {1, "machine-oracle exactness", 30, machine_oracle_exactness},
      {2, "free-variable adequacy", 30, free_variable_adequacy},
      {3, "sandwich soundness", 300, sandwich_soundness},
      {4, "geometric loop closed form", 5, geometric_closed_form},
      {5, "non-closing gap", 5, non_closing_gap},
      {6, "flat error order", 1, flate_order},
      {7, "ground semantics monotonicity", 10, ground_monotonicity},
      {8, "polynomial algebra", 5, polynomial_algebra},
      {9, "term preorder procedure", 30, preorder_procedure},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    bool ok = true;
    std::string detail;
    try {
      detail = c.body();
    } catch (const Failure& f) {
      ok = false;
      detail = f.message;
    } catch (const std::exception& e) {
      ok = false;
      detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (ok && secs > c.budget_s) {
      ok = false;
      detail += " (over time budget)";
    }
    if (!ok) ++failures;
    std::printf("[%s] %d %s: %s [%.2f s / %.0f s]\n", ok ? "PASS" : "FAIL", c.id, c.title.c_str(), detail.c_str(),
                secs, c.budget_s);
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
