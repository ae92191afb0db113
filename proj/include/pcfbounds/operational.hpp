#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pcfbounds/rational.hpp"
#include "pcfbounds/term.hpp"

namespace pcf {

class NotGround : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Possible successors of one weak head step; empty for a normal form.
/// Probabilities sum to exactly 1 otherwise, and successors are distinct.
using StepOutcome = std::vector<std::pair<Rational, Term>>;

/// Throws NotGround unless `t` is closed and of type nat.
void require_ground(const Term& t);

/// One probabilistic weak head step. Throws NotGround.
StepOutcome step(const Term& t);

/// Numeral, `err-` or `err+`.
bool is_whnormal(const Term& t);

/// Result class of a run: a numeral, one of the two errors, or a run that
/// did not finish within its step budget.
struct Outcome {
  enum class Kind { Numeral, ErrDiv, ErrConv, Timeout };
  Kind kind = Kind::Timeout;
  std::uint64_t n = 0;

  static Outcome numeral(std::uint64_t v) { return {Kind::Numeral, v}; }
  static Outcome errdiv() { return {Kind::ErrDiv, 0}; }
  static Outcome errconv() { return {Kind::ErrConv, 0}; }
  static Outcome timeout() { return {Kind::Timeout, 0}; }

  friend bool operator==(const Outcome&, const Outcome&) = default;
  friend bool operator<(const Outcome& a, const Outcome& b) {
    if (a.kind != b.kind) return a.kind < b.kind;
    return a.n < b.n;
  }
};

std::string to_string(const Outcome& o);
/// Normal form of a resolved outcome (not Timeout).
Term outcome_term(const Outcome& o);

struct ExploreBudget {
  std::uint64_t max_steps = std::numeric_limits<std::uint64_t>::max();
  Rational min_mass = 0;  // branches with mass strictly below are cut
};

/// Exact probabilities of reaching each normal form within the budget, plus
/// the unresolved mass. `Σ probabilities + residual = 1`.
struct OutcomeDistribution {
  std::map<Outcome, Rational> probabilities;
  Rational residual = 0;

  Rational probability(const Outcome& o) const;
};

/// Breadth-first exploration of the reduction tree; states reached at the
/// same depth are merged up to alpha-equivalence. Throws NotGround.
OutcomeDistribution exact_outcomes(const Term& t, const ExploreBudget& budget = {});

struct ErrBounds {
  Rational lower;
  Rational upper;
};

/// `[P(err+) found, P(err+) found + residual]`. Throws NotGround.
ErrBounds err_probability(const Term& t, const ExploreBudget& budget = {});

/// Seed of trial `i` derived from a base seed (splitmix64 mixing).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t i);

/// One run driven by a deterministic generator seeded with `seed`.
/// Throws NotGround.
Outcome sample(const Term& t, std::uint64_t seed, std::uint64_t max_steps);

struct EmpiricalDistribution {
  std::uint64_t samples = 0;
  std::map<Outcome, std::uint64_t> counts;

  double frequency(const Outcome& o) const;
  /// Binomial standard error `sqrt(p(1-p)/n)` of the frequency.
  double standard_error(const Outcome& o) const;
};

/// `threads == 0` uses PCFBOUNDS_THREADS or the hardware concurrency.
/// Trial `i` uses `derive_seed(seed, i)`, so results do not depend on the
/// number of threads.
EmpiricalDistribution estimate(const Term& t, std::uint64_t n_samples, std::uint64_t seed,
                               std::uint64_t max_steps, unsigned threads = 0);

/// Thread count honouring PCFBOUNDS_THREADS.
unsigned default_thread_count();

}  // namespace pcf
