#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>

#include "pcfbounds/rational.hpp"

namespace pcf {

/// Simple types: `nat` and arrows. Immutable, shared, compared structurally.
class Type {
 public:
  enum class Kind { Nat, Arrow };

  static Type nat();
  static Type arrow(Type domain, Type codomain);

  Kind kind() const noexcept;
  bool is_nat() const noexcept;
  bool is_arrow() const noexcept;

  // Arrow only.
  const Type& domain() const;
  const Type& codomain() const;

  std::size_t hash() const noexcept;

  friend bool operator==(const Type& a, const Type& b);
  friend bool operator!=(const Type& a, const Type& b) { return !(a == b); }

 private:
  friend class Term;
  struct Node;
  Type() = default;
  explicit Type(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

struct Type::Node {
  Kind kind;
  std::size_t hash;
  Type domain;
  Type codomain;
};

inline Type::Kind Type::kind() const noexcept { return node_->kind; }
inline bool Type::is_nat() const noexcept { return node_->kind == Kind::Nat; }
inline bool Type::is_arrow() const noexcept { return node_->kind == Kind::Arrow; }
inline std::size_t Type::hash() const noexcept { return node_->hash; }

std::string render_type(const Type& t);

/// A term (or machine stack) nested deeper than the library supports.
class DepthExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Largest term depth the recursive algorithms accept.
inline constexpr std::uint32_t kMaxTermDepth = 1'000'000;

/// Term of the probabilistic PCF dialect, in locally nameless form: free
/// variables are named, variables bound by `\` and `let` are de Bruijn
/// indices. Binders keep their source name as a hint for rendering only, so
/// `operator==` is alpha-equivalence.
///
/// The named factories (`abs`, `let`) take a body mentioning the bound name
/// as a free variable and abstract it; the `*_scope` factories take a body
/// already in scope form (index 0 is the binder).
class Term {
 public:
  enum class Kind {
    FreeVar,
    BoundVar,
    Num,
    Succ,
    Pred,
    If,
    Let,
    App,
    Abs,
    Fix,
    Coin,
    ErrDiv,
    ErrConv,
  };

  static Term var(std::string name);
  static Term bound(std::uint32_t index);
  static Term num(std::uint64_t n);
  static Term succ(Term t);
  static Term pred(Term t);
  static Term if_(Term cond, Term then_branch, Term else_branch);
  static Term let(const std::string& x, Term bound_term, const Term& body);
  static Term let_scope(std::string hint, Term bound_term, Term scope);
  static Term app(Term fun, Term arg);
  static Term abs(const std::string& x, Type annot, const Term& body);
  static Term abs_scope(std::string hint, Type annot, Term scope);
  static Term fix(Term t);
  /// Throws std::invalid_argument unless 0 <= r <= 1.
  static Term coin(Rational r);
  static Term errdiv();
  static Term errconv();

  Kind kind() const noexcept;
  bool is(Kind k) const noexcept;

  const std::string& name() const;       // FreeVar
  const std::string& hint() const;       // Let, Abs
  std::uint32_t index() const;           // BoundVar
  std::uint64_t numeral() const;         // Num
  const Rational& probability() const;   // Coin
  const Type& annotation() const;        // Abs

  const Term& operand() const;           // Succ, Pred, Fix
  const Term& cond() const;              // If
  const Term& then_branch() const;       // If
  const Term& else_branch() const;       // If
  const Term& bound_term() const;        // Let
  const Term& scope() const;             // Let, Abs (index 0 = binder)
  const Term& fun() const;               // App
  const Term& arg() const;               // App

  std::size_t hash() const noexcept;
  std::size_t size() const noexcept;
  std::uint32_t depth() const noexcept;
  bool fix_free() const noexcept;
  bool has_free_vars() const noexcept;
  /// One more than the largest dangling de Bruijn index; 0 if locally closed.
  std::uint32_t loose_bound() const noexcept;

  bool same_node(const Term& other) const noexcept { return node_ == other.node_; }

  friend bool operator==(const Term& a, const Term& b);
  friend bool operator!=(const Term& a, const Term& b) { return !(a == b); }

 private:
  struct Node;
  Term() = default;
  explicit Term(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  static Term make(Node n);

  std::shared_ptr<const Node> node_;
};

struct Term::Node {
  Node() = default;
  Node(Node&&) = default;
  Node& operator=(Node&&) = default;
  /// Releases uniquely owned descendants iteratively.
  ~Node();

  Kind kind{};
  std::string text;         // free var name or binder hint
  std::uint64_t value = 0;  // numeral or de Bruijn index
  std::shared_ptr<const Rational> coin;
  Type annot;
  Term kids[3];
  std::size_t hash = 0;
  std::size_t size = 1;
  std::uint32_t depth = 1;
  std::uint32_t loose = 0;
  bool fix_free = true;
  bool has_free = false;
};

inline Term::Kind Term::kind() const noexcept { return node_->kind; }
inline bool Term::is(Kind k) const noexcept { return node_->kind == k; }
inline std::size_t Term::hash() const noexcept { return node_->hash; }
inline std::size_t Term::size() const noexcept { return node_->size; }
inline std::uint32_t Term::depth() const noexcept { return node_->depth; }
inline bool Term::fix_free() const noexcept { return node_->fix_free; }
inline bool Term::has_free_vars() const noexcept { return node_->has_free; }
inline std::uint32_t Term::loose_bound() const noexcept { return node_->loose; }

struct TermHash {
  std::size_t operator()(const Term& t) const noexcept { return t.hash(); }
};

/// Replaces bound index 0 of `scope` by `replacement` (which must be locally
/// closed) and lowers the remaining dangling indices.
Term instantiate(const Term& scope, const Term& replacement);

/// Turns the free variable `name` into bound index 0 (inverse of opening).
Term abstract_var(const Term& body, const std::string& name);

/// Capture-avoiding `t[replacement/v]` for a free variable `v`.
Term substitute(const Term& t, const std::string& v, const Term& replacement);

std::set<std::string> free_vars(const Term& t);

/// True iff `t` has no `Fix` anywhere.
inline bool is_fix_free(const Term& t) { return t.fix_free(); }

/// Deterministic fresh name: `base`, then `base'`, `base''`, ... avoiding `taken`.
std::string fresh_name(const std::string& base, const std::set<std::string>& taken);

}  // namespace pcf
