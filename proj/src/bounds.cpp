#include "pcfbounds/bounds.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>
#include <stdexcept>

namespace pcf {

IndexSet resolve_j(const BoundsQuery& q) {
  if (q.j) return *q.j;
  IndexSet j;
  for (const auto& [name, u] : q.dists) {
    for (const auto& [n, p] : u.entries()) j.insert(n);
  }
  return j;
}

void validate_query(const BoundsQuery& q) {
  if (!q.ctx.is_ground()) throw TypeError("bounds need a ground context", "context");
  Type t = typecheck(q.ctx, q.term);
  if (!t.is_nat()) throw TypeError("term has type " + render_type(t) + ", expected nat", "term");
  for (const auto& [name, type] : q.ctx.entries()) {
    if (!q.dists.count(name)) throw std::invalid_argument("no distribution given for variable '" + name + "'");
  }
  if (q.epsilon && *q.epsilon < 0) throw std::invalid_argument("epsilon must be non-negative");
}

Term sampler_term(const SubDist& u) {
  std::vector<std::pair<Rational, Term>> choices;
  for (const auto& [n, p] : u.entries()) choices.emplace_back(p, Term::num(n));
  if (u.err() != 0) choices.emplace_back(u.err(), Term::errconv());

  // Conditional probabilities of taking each choice given the earlier ones
  // were not taken.
  std::vector<std::pair<Rational, Term>> cascade;
  Rational remaining = 1;
  for (auto& [p, leaf] : choices) {
    if (remaining == 0) break;
    cascade.emplace_back(p / remaining, leaf);
    remaining -= p;
  }
  Term out = Term::errdiv();
  for (auto it = cascade.rbegin(); it != cascade.rend(); ++it) {
    if (it->first == 1) {
      out = it->second;
    } else {
      out = Term::if_(Term::coin(it->first), it->second, out);
    }
  }
  return out;
}

// ---------------------------------------------------------------- engine

std::size_t BoundsEngine::KeyHash::operator()(const Key& key) const noexcept {
  std::size_t h = key.term.hash() * 1000003u + key.k * 2u + (key.polarity == Polarity::Upper ? 1u : 0u);
  for (auto n : key.j) h = h * 31 + static_cast<std::size_t>(n);
  return h;
}

std::shared_ptr<const BoundsEngine::Leg> BoundsEngine::leg(const Term& observed, const Context& ctx,
                                                           std::uint32_t k, Polarity polarity, const IndexSet& j,
                                                           const MachineLimits& limits) {
  Key key{observed, k, polarity, j};
  {
    std::lock_guard<std::mutex> lock(mutex_);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  }
  auto out = std::make_shared<Leg>();
  out->unfolded = unfold(observed, k, polarity, ctx);
  out->tree = kreval_term(out->unfolded, ctx, j, limits);
  out->poly = tree_to_poly(out->tree);
  std::lock_guard<std::mutex> lock(mutex_);
  return cache_.emplace(std::move(key), std::move(out)).first->second;
}

std::size_t BoundsEngine::cache_size() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return cache_.size();
}

namespace {

Valuation restricted_valuation(const BoundsQuery& q, const IndexSet& j, Polarity polarity) {
  Valuation v;
  for (const auto& [name, u] : q.dists) v.emplace(name, polarity == Polarity::Lower ? idl(j, u) : idu(j, u));
  return v;
}

}  // namespace

Interval BoundsEngine::bound_at_k(const BoundsQuery& q) {
  validate_query(q);
  const IndexSet j = resolve_j(q);
  const Term observed = q.raw ? q.term : wrap_observe(q.term);
  auto run_leg = [&](Polarity polarity) {
    auto l = leg(observed, q.ctx, q.k, polarity, j, q.limits);
    return eval(l->poly, restricted_valuation(q, j, polarity));
  };
  if (default_thread_count() > 1) {
    auto upper = std::async(std::launch::async, run_leg, Polarity::Upper);
    Rational lower = run_leg(Polarity::Lower);
    return {lower, upper.get()};
  }
  Rational lower = run_leg(Polarity::Lower);
  return {lower, run_leg(Polarity::Upper)};
}

BoundsReport BoundsEngine::refine(const BoundsQuery& q) {
  if (!q.epsilon) throw std::invalid_argument("refine needs an epsilon");
  if (q.k_max < 1) throw std::invalid_argument("k_max must be at least 1");
  const auto start = std::chrono::steady_clock::now();
  validate_query(q);

  BoundsReport report;
  report.j_used = resolve_j(q);
  std::map<std::uint32_t, Interval> seen;
  auto evaluate = [&](std::uint32_t k) -> const Interval& {
    BoundsQuery at = q;
    at.k = k;
    return seen.emplace(k, bound_at_k(at)).first->second;
  };
  auto good = [&](const Interval& i) { return i.upper - i.lower <= *q.epsilon; };

  std::uint32_t k = 1;
  std::uint32_t last_bad = 0;
  bool converged = false;
  while (true) {
    if (good(evaluate(k))) {
      converged = true;
      break;
    }
    last_bad = k;
    if (k >= q.k_max) break;
    k = static_cast<std::uint32_t>(std::min<std::uint64_t>(2ull * k, q.k_max));
  }
  if (converged) {
    std::uint32_t lo = last_bad + 1;
    std::uint32_t hi = k;
    while (lo < hi) {
      const std::uint32_t mid = lo + (hi - lo) / 2;
      if (good(evaluate(mid))) {
        hi = mid;
      } else {
        lo = mid + 1;
      }
    }
    k = hi;
  }
  const Interval& final_interval = seen.at(k);
  report.lower = final_interval.lower;
  report.upper = final_interval.upper;
  report.k_used = k;
  report.converged = converged;
  for (const auto& [kk, interval] : seen) report.trace.push_back({kk, interval.lower, interval.upper});
  report.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return report;
}

Interval bound_at_k(const BoundsQuery& q) {
  BoundsEngine engine;
  return engine.bound_at_k(q);
}

BoundsReport refine(const BoundsQuery& q) {
  BoundsEngine engine;
  return engine.refine(q);
}

CrossValidation cross_validate(const BoundsQuery& q, std::uint64_t n_samples, std::uint64_t seed,
                               std::uint64_t max_steps) {
  CrossValidation out;
  out.bounds = bound_at_k(q);
  Term closed = q.term;
  for (const auto& [name, u] : q.dists) closed = substitute(closed, name, sampler_term(u));
  if (!q.raw) closed = wrap_observe(closed);
  EmpiricalDistribution emp = estimate(closed, n_samples, seed, max_steps);
  out.samples = n_samples;
  out.empirical = emp.frequency(Outcome::errconv());
  out.timeouts = emp.frequency(Outcome::timeout());
  const double lo = to_double(out.bounds.lower);
  const double hi = to_double(out.bounds.upper);
  const double nearest = std::clamp(out.empirical, lo, hi);
  const double n = static_cast<double>(std::max<std::uint64_t>(n_samples, 1));
  const double var = std::max(out.empirical * (1 - out.empirical), nearest * (1 - nearest));
  out.sigma = std::sqrt(var / n);
  out.within_band = out.empirical >= lo - 5 * out.sigma && out.empirical <= hi + 5 * out.sigma;
  return out;
}

nlohmann::ordered_json report_to_json(const BoundsReport& r, bool include_timing) {
  nlohmann::ordered_json j;
  j["lower"] = to_fraction_string(r.lower);
  j["upper"] = to_fraction_string(r.upper);
  j["lower_float"] = to_double(r.lower);
  j["upper_float"] = to_double(r.upper);
  j["k"] = r.k_used;
  j["J"] = nlohmann::ordered_json::array();
  for (auto n : r.j_used) j["J"].push_back(n);
  j["converged"] = r.converged;
  j["trace"] = nlohmann::ordered_json::array();
  for (const auto& t : r.trace) {
    j["trace"].push_back({{"k", t.k}, {"lower", to_fraction_string(t.lower)}, {"upper", to_fraction_string(t.upper)}});
  }
  j["wall_ms"] = include_timing ? static_cast<std::int64_t>(std::llround(r.wall_ms)) : 0;
  return j;
}

}  // namespace pcf
