#include "pcfbounds/operational.hpp"

#include <cmath>
#include <cstdlib>
#include <random>
#include <thread>
#include <unordered_map>

#include "pcfbounds/typing.hpp"

namespace pcf {

void require_ground(const Term& t) {
  if (t.has_free_vars()) {
    std::string names;
    for (const auto& v : free_vars(t)) names += (names.empty() ? "" : ", ") + v;
    throw NotGround("term has free variables: " + names);
  }
  if (!typecheck(Context{}, t).is_nat()) throw NotGround("term does not have type nat");
}

bool is_whnormal(const Term& t) {
  return t.is(Term::Kind::Num) || t.is(Term::Kind::ErrDiv) || t.is(Term::Kind::ErrConv);
}

namespace {

using K = Term::Kind;

bool is_err(const Term& t) { return t.is(K::ErrDiv) || t.is(K::ErrConv); }

// Rebuilds `hole` inside the evaluation-context frames collected on the way
// down (innermost last).
Term plug(const std::vector<const Term*>& frames, Term hole) {
  for (auto it = frames.rbegin(); it != frames.rend(); ++it) {
    const Term& f = **it;
    switch (f.kind()) {
      case K::Succ:
        hole = Term::succ(std::move(hole));
        break;
      case K::Pred:
        hole = Term::pred(std::move(hole));
        break;
      case K::If:
        hole = Term::if_(std::move(hole), f.then_branch(), f.else_branch());
        break;
      case K::Let:
        hole = Term::let_scope(f.hint(), std::move(hole), f.scope());
        break;
      case K::App:
        hole = Term::app(std::move(hole), f.arg());
        break;
      default:
        throw std::logic_error("not an evaluation context frame");
    }
  }
  return hole;
}

StepOutcome step_unchecked(const Term& t) {
  std::vector<const Term*> frames;
  const Term* cur = &t;
  while (true) {
    const Term& m = *cur;
    switch (m.kind()) {
      case K::Num:
      case K::ErrDiv:
      case K::ErrConv:
        if (frames.empty()) return {};
        throw std::logic_error("value in redex position");
      case K::Coin: {
        const Rational& r = m.probability();
        if (r == 0) return {{Rational(1), plug(frames, Term::num(1))}};
        if (r == 1) return {{Rational(1), plug(frames, Term::num(0))}};
        return {{r, plug(frames, Term::num(0))}, {1 - r, plug(frames, Term::num(1))}};
      }
      case K::Succ:
      case K::Pred: {
        const Term& a = m.operand();
        if (a.is(K::Num)) {
          std::uint64_t n = a.numeral();
          std::uint64_t r = m.is(K::Succ) ? n + 1 : (n == 0 ? 0 : n - 1);
          return {{Rational(1), plug(frames, Term::num(r))}};
        }
        if (is_err(a)) return {{Rational(1), plug(frames, a)}};
        frames.push_back(&m);
        cur = &a;
        break;
      }
      case K::If: {
        const Term& c = m.cond();
        if (c.is(K::Num)) return {{Rational(1), plug(frames, c.numeral() == 0 ? m.then_branch() : m.else_branch())}};
        if (is_err(c)) return {{Rational(1), plug(frames, c)}};
        frames.push_back(&m);
        cur = &c;
        break;
      }
      case K::Let: {
        const Term& b = m.bound_term();
        if (b.is(K::Num)) return {{Rational(1), plug(frames, instantiate(m.scope(), b))}};
        if (is_err(b)) return {{Rational(1), plug(frames, b)}};
        frames.push_back(&m);
        cur = &b;
        break;
      }
      case K::App: {
        const Term& f = m.fun();
        if (f.is(K::Abs)) return {{Rational(1), plug(frames, instantiate(f.scope(), m.arg()))}};
        frames.push_back(&m);
        cur = &f;
        break;
      }
      case K::Fix:
        return {{Rational(1), plug(frames, Term::app(m.operand(), m))}};
      case K::Abs:
        throw std::logic_error("abstraction in head position of a ground term");
      case K::FreeVar:
        throw NotGround("free variable '" + m.name() + "' in head position");
      case K::BoundVar:
        throw std::logic_error("dangling bound variable");
    }
  }
}

Outcome outcome_of(const Term& t) {
  if (t.is(K::Num)) return Outcome::numeral(t.numeral());
  if (t.is(K::ErrDiv)) return Outcome::errdiv();
  return Outcome::errconv();
}

}  // namespace

StepOutcome step(const Term& t) {
  require_ground(t);
  return step_unchecked(t);
}

std::string to_string(const Outcome& o) {
  switch (o.kind) {
    case Outcome::Kind::Numeral:
      return std::to_string(o.n);
    case Outcome::Kind::ErrDiv:
      return "err-";
    case Outcome::Kind::ErrConv:
      return "err+";
    case Outcome::Kind::Timeout:
      return "timeout";
  }
  return "?";
}

Term outcome_term(const Outcome& o) {
  switch (o.kind) {
    case Outcome::Kind::Numeral:
      return Term::num(o.n);
    case Outcome::Kind::ErrDiv:
      return Term::errdiv();
    case Outcome::Kind::ErrConv:
      return Term::errconv();
    case Outcome::Kind::Timeout:
      break;
  }
  throw std::invalid_argument("timeout has no normal form");
}

Rational OutcomeDistribution::probability(const Outcome& o) const {
  auto it = probabilities.find(o);
  return it == probabilities.end() ? Rational(0) : it->second;
}

OutcomeDistribution exact_outcomes(const Term& t, const ExploreBudget& budget) {
  require_ground(t);
  OutcomeDistribution dist;
  std::unordered_map<Term, Rational, TermHash> frontier;
  frontier.emplace(t, Rational(1));
  for (std::uint64_t depth = 0; !frontier.empty(); ++depth) {
    std::unordered_map<Term, Rational, TermHash> next;
    for (auto& [term, mass] : frontier) {
      if (is_whnormal(term)) {
        dist.probabilities[outcome_of(term)] += mass;
      } else if (mass < budget.min_mass || depth >= budget.max_steps) {
        dist.residual += mass;
      } else {
        for (auto& [p, succ] : step_unchecked(term)) next[std::move(succ)] += mass * p;
      }
    }
    frontier = std::move(next);
  }
  return dist;
}

ErrBounds err_probability(const Term& t, const ExploreBudget& budget) {
  OutcomeDistribution d = exact_outcomes(t, budget);
  Rational lower = d.probability(Outcome::errconv());
  return {lower, lower + d.residual};
}

// ---------------------------------------------------------------- sampling

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t i) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (i + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace {

// Exact Bernoulli(r): compares a lazily drawn uniform binary expansion with
// the binary expansion of r.
bool bernoulli(std::mt19937_64& rng, const Rational& r) {
  if (r <= 0) return false;
  if (r >= 1) return true;
  Rational x = r;
  std::uint64_t word = 0;
  int bits_left = 0;
  while (true) {
    if (bits_left == 0) {
      word = rng();
      bits_left = 64;
    }
    const bool u_bit = (word & 1u) != 0;
    word >>= 1u;
    --bits_left;
    x *= 2;
    bool r_bit = false;
    if (x >= 1) {
      r_bit = true;
      x -= 1;
    }
    if (u_bit != r_bit) return r_bit;  // u < r iff the first differing bit of r is 1
    if (x == 0) return false;          // r's expansion ended: u >= r
  }
}

// Focused evaluation: the evaluation context is kept as an explicit stack so
// that each iteration contracts exactly one redex (one reduction step).
Outcome run_focused(const Term& start, std::mt19937_64& rng, std::uint64_t max_steps) {
  std::vector<std::pair<K, Term>> frames;  // kind and the context term it came from
  Term cur = start;
  std::uint64_t steps = 0;
  while (true) {
    // Descend to the redex.
    while (true) {
      const K k = cur.kind();
      if (k == K::Succ || k == K::Pred) {
        if (is_whnormal(cur.operand())) break;
        Term inner = cur.operand();
        frames.emplace_back(k, cur);
        cur = std::move(inner);
      } else if (k == K::If) {
        if (is_whnormal(cur.cond())) break;
        Term inner = cur.cond();
        frames.emplace_back(k, cur);
        cur = std::move(inner);
      } else if (k == K::Let) {
        if (is_whnormal(cur.bound_term())) break;
        Term inner = cur.bound_term();
        frames.emplace_back(k, cur);
        cur = std::move(inner);
      } else if (k == K::App) {
        if (cur.fun().is(K::Abs)) break;
        Term inner = cur.fun();
        frames.emplace_back(k, cur);
        cur = std::move(inner);
      } else {
        break;
      }
    }
    if (cur.is(K::Abs)) {
      if (frames.empty() || frames.back().first != K::App) throw std::logic_error("abstraction outside an application");
      Term ctx = std::move(frames.back().second);
      frames.pop_back();
      cur = Term::app(std::move(cur), ctx.arg());
      continue;
    }
    if (is_whnormal(cur)) {
      if (frames.empty()) return outcome_of(cur);
      // Value meeting its frame: re-focus on the frame with the value plugged.
      auto [k, ctx] = std::move(frames.back());
      frames.pop_back();
      switch (k) {
        case K::Succ: cur = Term::succ(std::move(cur)); break;
        case K::Pred: cur = Term::pred(std::move(cur)); break;
        case K::If: cur = Term::if_(std::move(cur), ctx.then_branch(), ctx.else_branch()); break;
        case K::Let: cur = Term::let_scope(ctx.hint(), std::move(cur), ctx.scope()); break;
        default: throw std::logic_error("value applied as a function");
      }
      continue;
    }
    if (steps >= max_steps) return Outcome::timeout();
    ++steps;
    switch (cur.kind()) {
      case K::Coin:
        cur = Term::num(bernoulli(rng, cur.probability()) ? 0 : 1);
        break;
      case K::Succ:
      case K::Pred: {
        const Term& a = cur.operand();
        if (is_err(a)) {
          cur = a;
        } else {
          std::uint64_t n = a.numeral();
          cur = Term::num(cur.is(K::Succ) ? n + 1 : (n == 0 ? 0 : n - 1));
        }
        break;
      }
      case K::If: {
        const Term& c = cur.cond();
        if (is_err(c)) {
          cur = c;
        } else {
          cur = c.numeral() == 0 ? cur.then_branch() : cur.else_branch();
        }
        break;
      }
      case K::Let: {
        const Term& b = cur.bound_term();
        cur = is_err(b) ? b : instantiate(cur.scope(), b);
        break;
      }
      case K::App:
        cur = instantiate(cur.fun().scope(), cur.arg());
        break;
      case K::Fix:
        cur = Term::app(cur.operand(), cur);
        break;
      case K::FreeVar:
        throw NotGround("free variable '" + cur.name() + "' in head position");
      default:
        throw std::logic_error("stuck term during sampling");
    }
  }
}

}  // namespace

Outcome sample(const Term& t, std::uint64_t seed, std::uint64_t max_steps) {
  require_ground(t);
  std::mt19937_64 rng(derive_seed(seed, 0));
  return run_focused(t, rng, max_steps);
}

double EmpiricalDistribution::frequency(const Outcome& o) const {
  if (samples == 0) return 0.0;
  auto it = counts.find(o);
  return it == counts.end() ? 0.0 : static_cast<double>(it->second) / static_cast<double>(samples);
}

double EmpiricalDistribution::standard_error(const Outcome& o) const {
  if (samples == 0) return 0.0;
  const double p = frequency(o);
  return std::sqrt(p * (1.0 - p) / static_cast<double>(samples));
}

unsigned default_thread_count() {
  unsigned n = std::thread::hardware_concurrency();
  if (n == 0) n = 1;
  if (const char* env = std::getenv("PCFBOUNDS_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && cap > 0) n = std::min<unsigned>(n, static_cast<unsigned>(cap));
  }
  return n;
}

EmpiricalDistribution estimate(const Term& t, std::uint64_t n_samples, std::uint64_t seed, std::uint64_t max_steps,
                               unsigned threads) {
  require_ground(t);
  if (threads == 0) threads = default_thread_count();
  threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, std::max<std::uint64_t>(n_samples, 1)));
  std::vector<std::map<Outcome, std::uint64_t>> partial(threads);
  auto worker = [&](unsigned w) {
    for (std::uint64_t i = w; i < n_samples; i += threads) {
      std::mt19937_64 rng(derive_seed(seed, i));
      ++partial[w][run_focused(t, rng, max_steps)];
    }
  };
  if (threads == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned w = 0; w < threads; ++w) pool.emplace_back(worker, w);
    for (auto& th : pool) th.join();
  }
  EmpiricalDistribution out;
  out.samples = n_samples;
  for (const auto& m : partial) {
    for (const auto& [o, c] : m) out.counts[o] += c;
  }
  return out;
}

}  // namespace pcf
