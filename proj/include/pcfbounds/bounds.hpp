#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "pcfbounds/approx.hpp"
#include "pcfbounds/groundsem.hpp"
#include "pcfbounds/krivine.hpp"
#include "pcfbounds/operational.hpp"
#include "pcfbounds/poly.hpp"
#include "pcfbounds/term.hpp"
#include "pcfbounds/typing.hpp"

namespace pcf {

struct BoundsQuery {
  Term term = Term::num(0);
  Context ctx;                          // ground
  std::map<std::string, SubDist> dists;  // one per context variable
  std::uint32_t k = 0;
  std::optional<IndexSet> j;             // nullopt: union of the dists' supports
  std::optional<Rational> epsilon;
  std::uint32_t k_max = 64;
  /// Report err+ probability of the term itself instead of wrapping it with
  /// `wrap_observe` first.
  bool raw = false;
  MachineLimits limits;
};

struct Interval {
  Rational lower;
  Rational upper;
};

struct TraceEntry {
  std::uint32_t k = 0;
  Rational lower;
  Rational upper;
};

struct BoundsReport {
  Rational lower;
  Rational upper;
  std::uint32_t k_used = 0;
  IndexSet j_used;
  bool converged = false;
  std::vector<TraceEntry> trace;  // sorted by k
  double wall_ms = 0;
};

/// `J` the query resolves to.
IndexSet resolve_j(const BoundsQuery& q);

/// Throws std::invalid_argument / TypeError when the query is malformed.
void validate_query(const BoundsQuery& q);

/// Closed term that evaluates to numeral `n` with probability `u_n`, to
/// `err+` with probability `u_err` and to `err-` with the remaining mass.
Term sampler_term(const SubDist& u);

/// Pipeline with a cache keyed on (term, k, polarity, J): wrapping,
/// unfolding, the machine run and `tree_to_poly` are computed once per key.
class BoundsEngine {
 public:
  struct Leg {
    Term unfolded = Term::num(0);
    PolyTree tree = PolyTree::zero();
    Polynomial poly;
  };

  /// Unfold at level k with `polarity`, run the machine under J and expand
  /// the polynomial. Thread-safe.
  std::shared_ptr<const Leg> leg(const Term& observed, const Context& ctx, std::uint32_t k, Polarity polarity,
                                 const IndexSet& j, const MachineLimits& limits);

  /// Certified `[lower, upper]` at level `q.k`.
  Interval bound_at_k(const BoundsQuery& q);

  /// Doubles k from 1 until `upper - lower <= epsilon` or `k_max`, then
  /// bisects down to the least converging k.
  BoundsReport refine(const BoundsQuery& q);

  std::size_t cache_size() const;

 private:
  struct Key {
    Term term;
    std::uint32_t k;
    Polarity polarity;
    IndexSet j;
    bool operator==(const Key& o) const { return k == o.k && polarity == o.polarity && j == o.j && term == o.term; }
  };
  struct KeyHash {
    std::size_t operator()(const Key& key) const noexcept;
  };

  mutable std::mutex mutex_;
  std::unordered_map<Key, std::shared_ptr<const Leg>, KeyHash> cache_;
};

Interval bound_at_k(const BoundsQuery& q);
BoundsReport refine(const BoundsQuery& q);

struct CrossValidation {
  Interval bounds;
  double empirical = 0;   // frequency of err+
  double timeouts = 0;    // frequency of runs cut by max_steps
  double sigma = 0;
  bool within_band = false;
  std::uint64_t samples = 0;
};

/// Samples the original (not unfolded) term with each free variable replaced
/// by `sampler_term` of its distribution, and checks the err+ frequency lies
/// in `[lower - 5σ, upper + 5σ]`. σ is the binomial standard error at the
/// point of `[lower, upper]` nearest to the empirical frequency, or at the
/// empirical frequency itself if that is larger.
CrossValidation cross_validate(const BoundsQuery& q, std::uint64_t n_samples, std::uint64_t seed,
                               std::uint64_t max_steps = 1000);

nlohmann::ordered_json report_to_json(const BoundsReport& r, bool include_timing = true);

}  // namespace pcf
