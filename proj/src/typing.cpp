#include "pcfbounds/typing.hpp"

#include "pcfbounds/syntax_text.hpp"
#include "deep_stack.hpp"

namespace pcf {

Context::Context(std::initializer_list<std::pair<std::string, Type>> entries) {
  for (const auto& [name, type] : entries) add(name, type);
}

void Context::add(std::string name, Type type) {
  if (lookup(name) != nullptr) throw std::invalid_argument("duplicate context variable '" + name + "'");
  entries_.emplace_back(std::move(name), std::move(type));
}

const Type* Context::lookup(const std::string& name) const {
  for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) {
    if (it->first == name) return &it->second;
  }
  return nullptr;
}

bool Context::is_ground() const {
  for (const auto& entry : entries_) {
    if (!entry.second.is_nat()) return false;
  }
  return true;
}

Context Context::ground_for(const Term& t) {
  Context ctx;
  for (const auto& name : free_vars(t)) ctx.add(name, Type::nat());
  return ctx;
}

namespace {

class Checker {
 public:
  Checker(const Context& ctx, std::vector<Type> binders) : ctx_(ctx), binders_(std::move(binders)) {
    names_.reserve(binders_.size());
    for (std::size_t i = 0; i < binders_.size(); ++i) names_.push_back("#" + std::to_string(binders_.size() - 1 - i));
  }

  Type check(const Term& t) {
    using K = Term::Kind;
    switch (t.kind()) {
      case K::FreeVar: {
        const Type* ty = ctx_.lookup(t.name());
        if (ty == nullptr) fail("unbound variable '" + t.name() + "'", t);
        return *ty;
      }
      case K::BoundVar: {
        if (t.index() >= binders_.size()) fail("dangling de Bruijn index", t);
        return binders_[binders_.size() - 1 - t.index()];
      }
      case K::Num:
      case K::Coin:
      case K::ErrDiv:
      case K::ErrConv:
        return Type::nat();
      case K::Succ:
        expect_nat(t.operand(), "argument of succ");
        return Type::nat();
      case K::Pred:
        expect_nat(t.operand(), "argument of pred");
        return Type::nat();
      case K::If:
        expect_nat(t.cond(), "condition of if");
        expect_nat(t.then_branch(), "then-branch of if");
        expect_nat(t.else_branch(), "else-branch of if");
        return Type::nat();
      case K::Let: {
        expect_nat(t.bound_term(), "bound term of let");
        push(t.hint(), Type::nat());
        expect_nat(t.scope(), "body of let");
        pop();
        return Type::nat();
      }
      case K::Abs: {
        push(t.hint(), t.annotation());
        Type body = check(t.scope());
        pop();
        return Type::arrow(t.annotation(), body);
      }
      case K::App: {
        Type f = check(t.fun());
        if (!f.is_arrow()) {
          fail("applying a term of type " + render_type(f) + " which is not a function", t.fun());
        }
        Type a = check(t.arg());
        if (a != f.domain()) {
          fail("argument has type " + render_type(a) + " but the function expects " + render_type(f.domain()),
               t.arg());
        }
        return f.codomain();
      }
      case K::Fix: {
        Type f = check(t.operand());
        if (!f.is_arrow() || f.domain() != f.codomain()) {
          fail("fix expects a term of type T -> T, got " + render_type(f), t.operand());
        }
        return f.domain();
      }
    }
    fail("unknown term", t);
  }

 private:
  void expect_nat(const Term& t, const char* where) {
    Type ty = check(t);
    if (!ty.is_nat()) fail(std::string(where) + " must have type nat, got " + render_type(ty), t);
  }

  [[noreturn]] void fail(const std::string& msg, const Term& at) {
    const bool free_var = at.is(Term::Kind::FreeVar) && ctx_.lookup(at.name()) != nullptr;
    throw TypeError(msg, render_open(at, names_), free_var);
  }

  void push(const std::string& name, Type ty) {
    binders_.push_back(std::move(ty));
    names_.push_back(name);
  }
  void pop() {
    binders_.pop_back();
    names_.pop_back();
  }

  const Context& ctx_;
  std::vector<Type> binders_;
  std::vector<std::string> names_;
};

}  // namespace

Type typecheck(const Context& ctx, const Term& t) {
  return detail::with_depth(t.depth(), [&] { return Checker(ctx, {}).check(t); });
}

Type typecheck_open(const Context& ctx, const std::vector<Type>& binders, const Term& t) {
  return detail::with_depth(t.depth(), [&] { return Checker(ctx, binders).check(t); });
}

}  // namespace pcf
