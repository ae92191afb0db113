#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "pcfbounds/groundsem.hpp"
#include "pcfbounds/rational.hpp"

namespace pcf {

/// A point of the web `N ∪ {err}`. Orders numerals ascending, err last.
struct Point {
  bool is_err = false;
  std::uint64_t n = 0;

  static Point num(std::uint64_t v) { return {false, v}; }
  static Point err() { return {true, 0}; }

  friend bool operator==(const Point& a, const Point& b) { return a.is_err == b.is_err && a.n == b.n; }
  friend bool operator<(const Point& a, const Point& b) {
    if (a.is_err != b.is_err) return !a.is_err;
    return a.n < b.n;
  }
};

std::string to_string(const Point& p);

/// One factor `x(i)^m` of a monomial.
struct ExponentEntry {
  std::string var;
  Point index;
  std::uint32_t multiplicity = 1;

  friend bool operator==(const ExponentEntry&, const ExponentEntry&) = default;
};

/// Multi-exponent, kept sorted by (variable, index) with multiplicities >= 1.
/// The empty exponent is the constant monomial.
class MultiExponent {
 public:
  MultiExponent() = default;
  explicit MultiExponent(std::vector<ExponentEntry> entries);

  static MultiExponent single(const std::string& var, Point index, std::uint32_t multiplicity = 1);

  const std::vector<ExponentEntry>& entries() const noexcept { return entries_; }
  std::uint32_t degree() const;
  std::uint32_t multiplicity(const std::string& var, Point index) const;
  MultiExponent operator+(const MultiExponent& other) const;

  friend bool operator==(const MultiExponent& a, const MultiExponent& b) { return a.entries_ == b.entries_; }
  friend bool operator<(const MultiExponent& a, const MultiExponent& b);

 private:
  std::vector<ExponentEntry> entries_;
};

/// Variable name -> sub-distribution over `N ∪ {err}`.
using Valuation = std::map<std::string, SubDist>;

class MissingVariable : public std::runtime_error {
 public:
  explicit MissingVariable(const std::string& var)
      : std::runtime_error("valuation does not assign variable '" + var + "'"), var_(var) {}
  const std::string& variable() const noexcept { return var_; }

 private:
  std::string var_;
};

/// Finite polynomial with non-negative rational coefficients. No zero
/// coefficient is ever stored.
class Polynomial {
 public:
  using Terms = std::map<MultiExponent, Rational>;

  Polynomial() = default;
  /// Throws std::invalid_argument on a negative coefficient.
  explicit Polynomial(Terms terms);

  static Polynomial zero() { return {}; }
  static Polynomial one() { return constant(1); }
  static Polynomial constant(const Rational& c);
  static Polynomial monomial(const Rational& c, MultiExponent e);

  const Terms& terms() const noexcept { return terms_; }
  bool is_zero() const noexcept { return terms_.empty(); }
  Rational coefficient(const MultiExponent& e) const;

  friend bool operator==(const Polynomial& a, const Polynomial& b) { return a.terms_ == b.terms_; }
  friend bool operator!=(const Polynomial& a, const Polynomial& b) { return !(a == b); }

 private:
  Terms terms_;
};

Polynomial poly_add(const Polynomial& a, const Polynomial& b);
Polynomial poly_scale(const Rational& alpha, const Polynomial& a);
Polynomial poly_mul(const Polynomial& a, const Polynomial& b);
/// `Σ_i x(i)·family(i)`.
Polynomial var_sum(const std::string& x, const std::vector<std::pair<Point, Polynomial>>& family);

/// `A(v) = Σ_μ α_μ v^μ` where `x(n)` reads `v[x].at(n)` and `x(err)` reads
/// `v[x].err()`. Throws MissingVariable.
Rational eval(const Polynomial& p, const Valuation& v);

/// `1/2·x(0)^2·y(err) + 1/4`: monomials by descending degree, then by
/// exponent order; coefficient 1 is omitted on non-constant monomials.
std::string render_poly(const Polynomial& p);
nlohmann::json poly_to_json(const Polynomial& p);

/// Polynomial tree: `One`, `Zero`, `x·S` branching on points of the web, and
/// the binary sub-convex combination `a1·S1 + a2·S2`. Nodes are shared, so a
/// tree may be a DAG; all traversals are memoized on node identity.
class PolyTree {
 public:
  enum class Kind { One, Zero, Var, Combo };
  using Branches = std::vector<std::pair<Point, PolyTree>>;

  static PolyTree one();
  static PolyTree zero();
  /// Throws std::invalid_argument unless the err branch is present and the
  /// points are distinct.
  static PolyTree var(std::string x, Branches branches);
  /// Throws std::invalid_argument unless a1, a2 >= 0 and a1 + a2 <= 1.
  static PolyTree combo(Rational a1, PolyTree s1, Rational a2, PolyTree s2);

  Kind kind() const noexcept;
  const std::string& variable() const;
  const Branches& branches() const;
  const Rational& weight_left() const;
  const Rational& weight_right() const;
  const PolyTree& left() const;
  const PolyTree& right() const;

  const void* identity() const noexcept { return node_.get(); }

 private:
  struct Node;
  PolyTree() = default;
  explicit PolyTree(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

struct PolyTree::Node {
  Node() = default;
  Node(Node&&) = default;
  Node& operator=(Node&&) = default;
  ~Node();

  Kind kind = Kind::Zero;
  std::string var;
  Branches branches;
  Rational a1;
  Rational a2;
  PolyTree kids[2];
};

inline PolyTree::Kind PolyTree::kind() const noexcept { return node_->kind; }
inline const std::string& PolyTree::variable() const { return node_->var; }
inline const PolyTree::Branches& PolyTree::branches() const { return node_->branches; }
inline const Rational& PolyTree::weight_left() const { return node_->a1; }
inline const Rational& PolyTree::weight_right() const { return node_->a2; }
inline const PolyTree& PolyTree::left() const { return node_->kids[0]; }
inline const PolyTree& PolyTree::right() const { return node_->kids[1]; }

/// `P(1) = 1`, `P(0) = 0`, `P(a1 S1 + a2 S2) = a1 P(S1) + a2 P(S2)`,
/// `P(x·S) = Σ_i x(i) P(S(i))`.
Polynomial tree_to_poly(const PolyTree& t);

/// Evaluates the tree directly at a valuation (same value as
/// `eval(tree_to_poly(t), v)`, without expanding the polynomial).
Rational eval_tree(const PolyTree& t, const Valuation& v);

struct TreeStats {
  std::size_t nodes = 0;  // distinct nodes
  std::size_t combos = 0;
  std::size_t vars = 0;
};
TreeStats tree_stats(const PolyTree& t);

}  // namespace pcf
