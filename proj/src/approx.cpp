#include "pcfbounds/approx.hpp"
#include "deep_stack.hpp"

#include <algorithm>
#include <unordered_map>
#include <vector>

namespace pcf {

const char* to_string(Polarity p) { return p == Polarity::Lower ? "lower" : "upper"; }

Term err_at_type(const Type& ty, Polarity polarity) {
  std::vector<Type> args;
  const Type* cur = &ty;
  while (cur->is_arrow()) {
    args.push_back(cur->domain());
    cur = &cur->codomain();
  }
  Term t = polarity == Polarity::Lower ? Term::errdiv() : Term::errconv();
  for (std::size_t i = args.size(); i-- > 0;) {
    t = Term::abs_scope("x" + std::to_string(i + 1), args[i], t);
  }
  return t;
}

namespace {

class Unfolder {
 public:
  Unfolder(std::uint32_t k, Polarity polarity, const Context& ctx) : k_(k), polarity_(polarity), ctx_(ctx) {}

  Term run(const Term& t) {
    if (t.fix_free()) return t;
    using K = Term::Kind;
    switch (t.kind()) {
      case K::Succ:
        return Term::succ(run(t.operand()));
      case K::Pred:
        return Term::pred(run(t.operand()));
      case K::If:
        return Term::if_(run(t.cond()), run(t.then_branch()), run(t.else_branch()));
      case K::Let: {
        Term bound = run(t.bound_term());
        binders_.push_back(Type::nat());
        Term body = run(t.scope());
        binders_.pop_back();
        return Term::let_scope(t.hint(), bound, body);
      }
      case K::App:
        return Term::app(run(t.fun()), run(t.arg()));
      case K::Abs: {
        binders_.push_back(t.annotation());
        Term body = run(t.scope());
        binders_.pop_back();
        return Term::abs_scope(t.hint(), t.annotation(), body);
      }
      case K::Fix: {
        Type fty = typecheck_open(ctx_, binders_, t.operand());
        if (!fty.is_arrow()) throw TypeError("fix expects a function", "fix");
        Term body = run(t.operand());
        Term out = err_at_type(fty.domain(), polarity_);
        for (std::uint32_t i = 0; i < k_; ++i) out = Term::app(body, out);
        return out;
      }
      default:
        return t;
    }
  }

 private:
  std::uint32_t k_;
  Polarity polarity_;
  const Context& ctx_;
  std::vector<Type> binders_;
};

}  // namespace

Term unfold(const Term& t, std::uint32_t k, Polarity polarity, const Context& ctx) {
  typecheck(ctx, t);
  // Each unfolding level nests one more copy of the functional.
  const std::uint64_t out_depth = std::uint64_t{t.depth()} * (std::uint64_t{k} + 1);
  const auto depth = static_cast<std::uint32_t>(std::min<std::uint64_t>(out_depth, kMaxTermDepth));
  return detail::with_depth(depth, [&] { return Unfolder(k, polarity, ctx).run(t); });
}

Term wrap_observe(const Term& t) { return Term::let_scope("z", t, Term::errconv()); }

}  // namespace pcf
