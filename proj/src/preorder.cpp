#include "pcfbounds/preorder.hpp"

#include <algorithm>
#include <unordered_map>
#include <vector>

#include "pcfbounds/approx.hpp"
#include "deep_stack.hpp"

namespace pcf {

namespace {

struct PairKey {
  Term lhs;
  Term rhs;
  std::vector<Type> env;  // types of the dangling indices both sides may mention

  bool operator==(const PairKey& o) const { return lhs == o.lhs && rhs == o.rhs && env == o.env; }
};

struct PairKeyHash {
  std::size_t operator()(const PairKey& k) const noexcept {
    std::size_t h = k.lhs.hash() * 1000003u ^ k.rhs.hash();
    for (const auto& t : k.env) h = h * 31 + t.hash();
    return h;
  }
};

class PreorderSearch {
 public:
  explicit PreorderSearch(const Context& ctx) : ctx_(ctx) {}

  bool leq(const Term& m, const Term& n) {
    PairKey key{m, n, relevant_env(std::max(m.loose_bound(), n.loose_bound()))};
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    const bool result = derive(m, n);
    memo_.emplace(std::move(key), result);
    return result;
  }

 private:
  std::vector<Type> relevant_env(std::uint32_t loose) const {
    return {binders_.end() - loose, binders_.end()};
  }

  Type type_of(const Term& t) { return typecheck_open(ctx_, binders_, t); }

  // `\x1..xn. e` for an error constant `e`; at type nat this is `e` itself.
  static bool is_err_chain(const Term& t, Term::Kind e) {
    const Term* cur = &t;
    while (cur->is(Term::Kind::Abs)) cur = &cur->scope();
    return cur->is(e);
  }

  bool derive(const Term& m, const Term& n) {
    using K = Term::Kind;
    // The error axioms, read at every type through err_at_type.
    if (is_err_chain(m, K::ErrDiv) && m == err_at_type(type_of(n), Polarity::Lower)) return true;
    if (is_err_chain(n, K::ErrConv) && n == err_at_type(type_of(m), Polarity::Upper)) return true;

    if (m.kind() == n.kind() && congruent(m, n)) return true;

    // fix M ⊑ M' N'  if  M ⊑ M'  and  fix M ⊑ N'
    if (m.is(K::Fix) && n.is(K::App)) {
      if (leq(m.operand(), n.fun()) && leq(m, n.arg())) return true;
    }
    // M' N' ⊑ fix M  if  M' ⊑ M  and  N' ⊑ fix M
    if (m.is(K::App) && n.is(K::Fix)) {
      if (leq(m.fun(), n.operand()) && leq(m.arg(), n)) return true;
    }
    return false;
  }

  bool congruent(const Term& m, const Term& n) {
    using K = Term::Kind;
    switch (m.kind()) {
      case K::FreeVar:
        return m.name() == n.name();
      case K::BoundVar:
        return m.index() == n.index();
      case K::Num:
        return m.numeral() == n.numeral();
      case K::Coin:
        return m.probability() == n.probability();
      case K::ErrDiv:
      case K::ErrConv:
        return true;
      case K::Succ:
      case K::Pred:
      case K::Fix:
        return leq(m.operand(), n.operand());
      case K::If:
        return leq(m.cond(), n.cond()) && leq(m.then_branch(), n.then_branch()) &&
               leq(m.else_branch(), n.else_branch());
      case K::Let: {
        if (!leq(m.bound_term(), n.bound_term())) return false;
        binders_.push_back(Type::nat());
        const bool ok = leq(m.scope(), n.scope());
        binders_.pop_back();
        return ok;
      }
      case K::App:
        return leq(m.fun(), n.fun()) && leq(m.arg(), n.arg());
      case K::Abs: {
        if (m.annotation() != n.annotation()) return false;
        binders_.push_back(m.annotation());
        const bool ok = leq(m.scope(), n.scope());
        binders_.pop_back();
        return ok;
      }
    }
    return false;
  }

  const Context& ctx_;
  std::vector<Type> binders_;
  std::unordered_map<PairKey, bool, PairKeyHash> memo_;
};

}  // namespace

bool term_preorder_leq(const Term& m, const Term& n, const Context& ctx, const Type& ty) {
  const Type tm = typecheck(ctx, m);
  if (tm != ty) throw TypeError("left term has type " + render_type(tm) + ", expected " + render_type(ty), "left");
  const Type tn = typecheck(ctx, n);
  if (tn != ty) throw TypeError("right term has type " + render_type(tn) + ", expected " + render_type(ty), "right");
  return detail::with_depth(std::max(m.depth(), n.depth()), [&] { return PreorderSearch(ctx).leq(m, n); });
}

}  // namespace pcf
