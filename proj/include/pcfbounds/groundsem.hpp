#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pcfbounds/rational.hpp"

namespace pcf {

/// Finite set of naturals used to restrict variable branching.
using IndexSet = std::set<std::uint64_t>;

/// Finite-support sub-probability vector over `N ∪ {err}`. Zero entries are
/// never stored, and the total mass is at most 1.
class SubDist {
 public:
  SubDist() = default;
  /// Throws std::invalid_argument on negative masses or total > 1.
  SubDist(std::map<std::uint64_t, Rational> entries, Rational err);

  static SubDist dirac(std::uint64_t n);
  static SubDist dirac_err();

  const std::map<std::uint64_t, Rational>& entries() const noexcept { return entries_; }
  const Rational& err() const noexcept { return err_; }
  /// Mass at `n` (zero when absent).
  Rational at(std::uint64_t n) const;
  Rational numeric_mass() const;
  Rational total() const { return numeric_mass() + err_; }
  IndexSet support() const;

  friend bool operator==(const SubDist& a, const SubDist& b) { return a.entries_ == b.entries_ && a.err_ == b.err_; }
  friend bool operator!=(const SubDist& a, const SubDist& b) { return !(a == b); }

 private:
  std::map<std::uint64_t, Rational> entries_;
  Rational err_ = 0;
};

/// `u ≤ v` coordinatewise (including err).
bool pointwise_leq(const SubDist& u, const SubDist& v);

/// Extensional order of `Flate(N)`: the err-mass gained from `u` to `v` must
/// pay for every inversion, `Σ_{u_i > v_i} (u_i - v_i) ≤ v_err - u_err`.
bool ext_leq(const SubDist& u, const SubDist& v);

/// `Σ_i weight_i · u_i`; the weights must sum to at most 1.
SubDist combine(const std::vector<std::pair<Rational, SubDist>>& parts);

/// Conditional with error: `u_0·branch0 + (Σ_{n≥1} u_n)·branch_s + u_err·δerr`.
SubDist case_err(const SubDist& u, const SubDist& branch0, const SubDist& branch_s);

/// `let` with error: `Σ_n u_n·h(n) + u_err·δerr`.
SubDist let_err(const SubDist& u, const std::function<SubDist(std::uint64_t)>& h);

/// Pushes numeric mass through the partial map `f` (mass on undefined points
/// is dropped); err mass stays on err.
SubDist bfun_err(const std::function<std::optional<std::uint64_t>(std::uint64_t)>& f, const SubDist& u);
SubDist succ_err(const SubDist& u);
SubDist pred_err(const SubDist& u);

/// Lower identity approximant: keeps `J` and err, drops the rest.
SubDist idl(const IndexSet& j, const SubDist& u);
/// Upper identity approximant: keeps `J`, moves the rest onto err.
SubDist idu(const IndexSet& j, const SubDist& u);

/// Projection on the err coordinate.
inline Rational scatch(const SubDist& u) { return u.err(); }

class SubDistParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// `{0: 1/2, 3: 1/4, err: 1/8}`; omitted keys are zero, `{}` is the zero vector.
SubDist parse_subdist(std::string_view text);
std::string format_subdist(const SubDist& u);

}  // namespace pcf
