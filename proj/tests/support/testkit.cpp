#include "testkit.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <stdexcept>

#include "pcfbounds/approx.hpp"
#include "pcfbounds/typing.hpp"

namespace pcf::testkit {

Rational Rng::dyadic(unsigned bits) {
  const std::uint64_t den = std::uint64_t{1} << bits;
  return canonical(Rational(static_cast<long>(below(den + 1)), static_cast<long>(den)));
}

Rational Rng::dyadic_open(unsigned bits) {
  const std::uint64_t den = std::uint64_t{1} << bits;
  return canonical(Rational(static_cast<long>(1 + below(den - 1)), static_cast<long>(den)));
}

SubDist random_subdist(Rng& rng, const IndexSet& support, bool with_err) {
  std::vector<std::uint64_t> points(support.begin(), support.end());
  std::map<std::uint64_t, Rational> entries;
  Rational remaining = rng.chance(1, 3) ? Rational(1) : rng.dyadic(3);
  Rational err = 0;
  const std::size_t slots = points.size() + (with_err ? 1 : 0);
  for (std::size_t i = 0; i < slots; ++i) {
    const bool last = i + 1 == slots;
    Rational share = last ? remaining : remaining * rng.dyadic(2);
    remaining -= share;
    if (i < points.size()) {
      if (share != 0) entries[points[i]] = share;
    } else {
      err = share;
    }
  }
  return SubDist(std::move(entries), err);
}

Type random_type(Rng& rng) {
  const Type nat = Type::nat();
  switch (rng.below(6)) {
    case 0:
    case 1:
      return nat;
    case 2:
    case 3:
      return Type::arrow(nat, nat);
    case 4:
      return Type::arrow(nat, Type::arrow(nat, nat));
    default:
      return Type::arrow(Type::arrow(nat, nat), nat);
  }
}

namespace {

const char* const kHints[] = {"y", "z", "w", "v"};

class Generator {
 public:
  Generator(Rng& rng, const TermShape& shape) : rng_(rng), shape_(shape) {}

  Term gen(const Type& ty, int depth) { return ty.is_nat() ? nat(depth) : arrow(ty, depth); }

  std::vector<Type> scope;

 private:
  std::vector<std::uint32_t> vars_of(const Type& ty) const {
    std::vector<std::uint32_t> out;
    for (std::size_t i = 0; i < scope.size(); ++i) {
      if (scope[scope.size() - 1 - i] == ty) out.push_back(static_cast<std::uint32_t>(i));
    }
    return out;
  }

  const char* hint() { return kHints[rng_.below(4)]; }

  Term leaf() {
    auto vars = vars_of(Type::nat());
    const std::uint64_t pick = rng_.below(10);
    if (pick < 2) return Term::num(rng_.below(3));
    if (pick < 4) return Term::coin(rng_.dyadic(shape_.coin_bits));
    if (pick == 4 && shape_.allow_errors) return Term::errconv();
    if (pick == 5 && shape_.allow_errors) return Term::errdiv();
    if (pick < 8 && !vars.empty()) return Term::bound(vars[rng_.below(vars.size())]);
    if (pick < 10 && !shape_.free_nat.empty()) return Term::var(shape_.free_nat[rng_.below(shape_.free_nat.size())]);
    return rng_.chance(1, 2) ? Term::num(rng_.below(3)) : Term::coin(rng_.dyadic(shape_.coin_bits));
  }

  Term in_scope(const Type& binder, const Type& ty, int depth) {
    scope.push_back(binder);
    Term t = gen(ty, depth);
    scope.pop_back();
    return t;
  }

  Term nat(int depth) {
    const Type n = Type::nat();
    if (depth <= 0 || rng_.chance(1, 5)) return leaf();
    const std::uint64_t pick = rng_.below(shape_.allow_fix ? 15 : 14);
    if (pick < 2) return Term::succ(nat(depth - 1));
    if (pick < 4) return Term::pred(nat(depth - 1));
    if (pick < 7) return Term::if_(nat(depth - 1), nat(depth - 1), nat(depth - 1));
    if (pick < 9) return Term::let_scope(hint(), nat(depth - 1), in_scope(n, n, depth - 1));
    if (pick < 14) {
      if (depth < 2) return leaf();
      const Type arg_ty = rng_.chance(1, 5) ? Type::arrow(n, n) : n;
      return Term::app(arrow(Type::arrow(arg_ty, n), depth - 1), gen(arg_ty, depth - 1));
    }
    if (depth < 3) return leaf();
    return Term::fix(Term::abs_scope("x", n, in_scope(n, n, depth - 2)));
  }

  Term arrow(const Type& ty, int depth) {
    auto vars = vars_of(ty);
    const std::uint64_t pick = rng_.below(10);
    if (pick < 2 && !vars.empty()) return Term::bound(vars[rng_.below(vars.size())]);
    if (pick == 2 && shape_.allow_fix && depth >= 2) {
      return Term::fix(Term::abs_scope("f", ty, in_scope(ty, ty, depth - 1)));
    }
    if (pick == 3 && depth >= 2) return Term::app(arrow(Type::arrow(Type::nat(), ty), depth - 1), nat(depth - 1));
    return Term::abs_scope(hint(), ty.domain(), in_scope(ty.domain(), ty.codomain(), depth - 1));
  }

  Rng& rng_;
  const TermShape& shape_;
};

}  // namespace

Term random_term(Rng& rng, const Type& ty, const TermShape& shape) {
  Generator g(rng, shape);
  return g.gen(ty, shape.depth);
}

Term random_fix_term(Rng& rng, const std::vector<std::string>& free_nat, bool nested_calls) {
  const Type n = Type::nat();
  const Type nn = Type::arrow(n, n);
  TermShape small;
  small.depth = 2;
  small.free_nat = free_nat;
  small.coin_bits = 2;

  auto base_case = [&] {
    // Generated with y (index 0) as the only binder; f never appears.
    Generator g(rng, small);
    g.scope = {n};
    return g.gen(n, 2);
  };
  auto call_arg = [&]() -> Term {
    switch (rng.below(5)) {
      case 0:
        return Term::bound(0);
      case 1:
        return Term::succ(Term::bound(0));
      case 2:
        return Term::pred(Term::bound(0));
      case 3:
        return Term::coin(rng.dyadic_open(2));
      default:
        return base_case();
    }
  };
  // Inside the body: f is index 1, y is index 0.
  auto call = [&](Term arg) { return Term::app(Term::bound(1), std::move(arg)); };

  Term top = Term::num(0);
  if (rng.chance(7, 10)) {
    Term rec = Term::num(0);
    switch (rng.below(6)) {
      case 0:
      case 1:
        rec = call(call_arg());
        break;
      case 2:
        rec = Term::succ(call(call_arg()));
        break;
      case 3: {
        // let z = f A in f z, with z at index 0 and f shifted to index 2.
        Term second = Term::app(Term::bound(2), Term::bound(0));
        rec = Term::let_scope("z", call(call_arg()), second);
        break;
      }
      case 4:
        if (nested_calls) {
          rec = call(call(call_arg()));
        } else {
          rec = Term::let_scope("z", call(call_arg()), Term::app(Term::bound(2), Term::succ(Term::bound(0))));
        }
        break;
      default:
        rec = Term::if_(Term::coin(rng.dyadic_open(2)), call(call_arg()), base_case());
        break;
    }
    Term body = rng.chance(1, 2) ? Term::if_(Term::coin(rng.dyadic_open(2)), base_case(), rec)
                                 : Term::if_(Term::coin(rng.dyadic_open(2)), rec, base_case());
    Term f = Term::fix(Term::abs_scope("f", nn, Term::abs_scope("y", n, body)));
    Term arg = free_nat.empty() || rng.chance(1, 2) ? Term::num(rng.below(3)) : Term::var(free_nat[0]);
    top = Term::app(f, arg);
  } else {
    Generator g(rng, small);
    g.scope = {n};
    Term other = g.gen(n, 1);
    Term body = Term::num(0);
    switch (rng.below(3)) {
      case 0:
        body = Term::if_(Term::coin(rng.dyadic_open(2)), other, Term::succ(Term::bound(0)));
        break;
      case 1:
        body = Term::if_(Term::coin(rng.dyadic_open(2)), Term::bound(0), other);
        break;
      default:
        body = Term::if_(Term::coin(rng.dyadic_open(2)), other, Term::pred(Term::bound(0)));
        break;
    }
    top = Term::fix(Term::abs_scope("x", n, body));
  }
  switch (rng.below(5)) {
    case 0:
      return Term::succ(top);
    case 1:
      return Term::if_(top, Term::num(0), Term::num(1));
    case 2:
      return Term::let_scope("r", top, Term::if_(Term::coin(Rational(1, 2)), Term::bound(0), Term::num(2)));
    default:
      return top;
  }
}

namespace {

Term mutate(Rng& rng, const Term& t, const Context& ctx, std::vector<Type>& env, Polarity pol) {
  using K = Term::Kind;
  if (rng.chance(1, 6)) return err_at_type(typecheck_open(ctx, env, t), pol);
  auto rec = [&](const Term& s) { return mutate(rng, s, ctx, env, pol); };
  auto rec_under = [&](const Type& binder, const Term& s) {
    env.push_back(binder);
    Term out = mutate(rng, s, ctx, env, pol);
    env.pop_back();
    return out;
  };
  switch (t.kind()) {
    case K::Succ:
      return Term::succ(rec(t.operand()));
    case K::Pred:
      return Term::pred(rec(t.operand()));
    case K::Fix:
      return Term::fix(rec(t.operand()));
    case K::If:
      return Term::if_(rec(t.cond()), rec(t.then_branch()), rec(t.else_branch()));
    case K::Let:
      return Term::let_scope(t.hint(), rec(t.bound_term()), rec_under(Type::nat(), t.scope()));
    case K::App:
      return Term::app(rec(t.fun()), rec(t.arg()));
    case K::Abs:
      return Term::abs_scope(t.hint(), t.annotation(), rec_under(t.annotation(), t.scope()));
    default:
      return t;
  }
}

}  // namespace

Term lower_mutation(Rng& rng, const Term& t) {
  Context ctx = Context::ground_for(t);
  std::vector<Type> env;
  return mutate(rng, t, ctx, env, Polarity::Lower);
}

Term upper_mutation(Rng& rng, const Term& t) {
  Context ctx = Context::ground_for(t);
  std::vector<Type> env;
  return mutate(rng, t, ctx, env, Polarity::Upper);
}

Polynomial random_poly(Rng& rng, const std::vector<std::string>& vars, const IndexSet& indices, unsigned max_terms,
                       unsigned max_degree) {
  std::vector<Point> points;
  for (auto i : indices) points.push_back(Point::num(i));
  points.push_back(Point::err());
  Polynomial::Terms terms;
  const std::uint64_t count = rng.below(max_terms + 1);
  for (std::uint64_t t = 0; t < count; ++t) {
    std::vector<ExponentEntry> entries;
    const std::uint64_t degree = rng.below(max_degree + 1);
    for (std::uint64_t d = 0; d < degree; ++d) {
      entries.push_back({vars[rng.below(vars.size())], points[rng.below(points.size())], 1});
    }
    const Rational coeff = canonical(Rational(static_cast<long>(1 + rng.below(9)), static_cast<long>(1 + rng.below(7))));
    terms[MultiExponent(entries)] += coeff;
  }
  return Polynomial(terms);
}

// ---------------------------------------------------------------- denote

namespace {

using Values = std::vector<std::pair<Rational, Term>>;

void add(Values& out, const Rational& p, Term v) {
  if (p != 0) out.emplace_back(p, std::move(v));
}

bool is_error(const Term& t) { return t.is(Term::Kind::ErrDiv) || t.is(Term::Kind::ErrConv); }

// Weak head values reachable from a closed term, with probabilities.
Values big_step(const Term& t) {
  using K = Term::Kind;
  Values out;
  switch (t.kind()) {
    case K::Num:
    case K::ErrDiv:
    case K::ErrConv:
    case K::Abs:
      add(out, 1, t);
      return out;
    case K::Coin:
      add(out, t.probability(), Term::num(0));
      add(out, 1 - t.probability(), Term::num(1));
      return out;
    case K::Succ:
    case K::Pred:
      for (auto& [p, v] : big_step(t.operand())) {
        if (is_error(v)) {
          add(out, p, v);
        } else {
          const std::uint64_t n = v.numeral();
          add(out, p, Term::num(t.is(K::Succ) ? n + 1 : (n == 0 ? 0 : n - 1)));
        }
      }
      return out;
    case K::If:
      for (auto& [p, v] : big_step(t.cond())) {
        if (is_error(v)) {
          add(out, p, v);
          continue;
        }
        for (auto& [q, w] : big_step(v.numeral() == 0 ? t.then_branch() : t.else_branch())) add(out, p * q, w);
      }
      return out;
    case K::Let:
      for (auto& [p, v] : big_step(t.bound_term())) {
        if (is_error(v)) {
          add(out, p, v);
          continue;
        }
        for (auto& [q, w] : big_step(instantiate(t.scope(), v))) add(out, p * q, w);
      }
      return out;
    case K::App:
      for (auto& [p, v] : big_step(t.fun())) {
        if (is_error(v)) {
          add(out, p, v);
          continue;
        }
        for (auto& [q, w] : big_step(instantiate(v.scope(), t.arg()))) add(out, p * q, w);
      }
      return out;
    case K::Fix:
      throw std::invalid_argument("denote: fixpoints are not supported");
    case K::FreeVar:
    case K::BoundVar:
      throw std::invalid_argument("denote: open term");
  }
  return out;
}

}  // namespace

std::map<Outcome, Rational> denote(const Term& t) {
  std::map<Outcome, Rational> out;
  for (auto& [p, v] : big_step(t)) {
    switch (v.kind()) {
      case Term::Kind::Num:
        out[Outcome::numeral(v.numeral())] += p;
        break;
      case Term::Kind::ErrDiv:
        out[Outcome::errdiv()] += p;
        break;
      case Term::Kind::ErrConv:
        out[Outcome::errconv()] += p;
        break;
      default:
        throw std::invalid_argument("denote: term is not of type nat");
    }
  }
  return out;
}

Rational denote_errconv(const Term& t) {
  auto d = denote(t);
  auto it = d.find(Outcome::errconv());
  return it == d.end() ? Rational(0) : it->second;
}

// ---------------------------------------------------------------- named

Named random_named(Rng& rng, int depth, const std::vector<std::string>& pool) {
  Named t;
  const std::string& name = pool[rng.below(pool.size())];
  if (depth <= 0 || rng.chance(1, 4)) {
    if (rng.chance(3, 4)) {
      t.kind = Named::Kind::Var;
      t.name = name;
    } else {
      t.kind = Named::Kind::Num;
      t.n = rng.below(3);
    }
    return t;
  }
  switch (rng.below(4)) {
    case 0:
      t.kind = Named::Kind::Succ;
      t.kids = {random_named(rng, depth - 1, pool)};
      break;
    case 1:
      t.kind = Named::Kind::Lam;
      t.name = name;
      t.kids = {random_named(rng, depth - 1, pool)};
      break;
    case 2:
      t.kind = Named::Kind::App;
      t.kids = {random_named(rng, depth - 1, pool), random_named(rng, depth - 1, pool)};
      break;
    default:
      t.kind = Named::Kind::Let;
      t.name = name;
      t.kids = {random_named(rng, depth - 1, pool), random_named(rng, depth - 1, pool)};
      break;
  }
  return t;
}

namespace {

void named_free(const Named& t, std::set<std::string>& bound, std::set<std::string>& out) {
  switch (t.kind) {
    case Named::Kind::Var:
      if (!bound.count(t.name)) out.insert(t.name);
      return;
    case Named::Kind::Num:
      return;
    case Named::Kind::Succ:
    case Named::Kind::App:
      for (const auto& k : t.kids) named_free(k, bound, out);
      return;
    case Named::Kind::Lam:
    case Named::Kind::Let: {
      if (t.kind == Named::Kind::Let) named_free(t.kids[0], bound, out);
      const bool was = bound.count(t.name) > 0;
      bound.insert(t.name);
      named_free(t.kids.back(), bound, out);
      if (!was) bound.erase(t.name);
      return;
    }
  }
}

std::set<std::string> named_fv(const Named& t) {
  std::set<std::string> bound, out;
  named_free(t, bound, out);
  return out;
}

Named named_var(const std::string& x) {
  Named v;
  v.kind = Named::Kind::Var;
  v.name = x;
  return v;
}

}  // namespace

Named named_subst(const Named& t, const std::string& v, const Named& r) {
  Named out = t;
  switch (t.kind) {
    case Named::Kind::Var:
      return t.name == v ? r : t;
    case Named::Kind::Num:
      return t;
    case Named::Kind::Succ:
    case Named::Kind::App:
      for (auto& k : out.kids) k = named_subst(k, v, r);
      return out;
    case Named::Kind::Lam:
    case Named::Kind::Let: {
      if (t.kind == Named::Kind::Let) out.kids[0] = named_subst(t.kids[0], v, r);
      Named& body = out.kids.back();
      if (t.name == v) return out;
      const auto fr = named_fv(r);
      if (fr.count(t.name)) {
        std::set<std::string> avoid = fr;
        avoid.merge(named_fv(body));
        avoid.insert(v);
        std::string fresh = t.name;
        while (avoid.count(fresh)) fresh += "'";
        body = named_subst(body, t.name, named_var(fresh));
        out.name = fresh;
      }
      body = named_subst(body, v, r);
      return out;
    }
  }
  return out;
}

Term to_term(const Named& t) {
  switch (t.kind) {
    case Named::Kind::Var:
      return Term::var(t.name);
    case Named::Kind::Num:
      return Term::num(t.n);
    case Named::Kind::Succ:
      return Term::succ(to_term(t.kids[0]));
    case Named::Kind::Lam:
      return Term::abs(t.name, Type::nat(), to_term(t.kids[0]));
    case Named::Kind::App:
      return Term::app(to_term(t.kids[0]), to_term(t.kids[1]));
    case Named::Kind::Let:
      return Term::let(t.name, to_term(t.kids[0]), to_term(t.kids[1]));
  }
  throw std::logic_error("unreachable");
}

namespace {

std::string de_bruijn_in(const Named& t, std::vector<std::string>& env) {
  switch (t.kind) {
    case Named::Kind::Var:
      for (std::size_t i = 0; i < env.size(); ++i) {
        if (env[env.size() - 1 - i] == t.name) return "#" + std::to_string(i);
      }
      return t.name;
    case Named::Kind::Num:
      return std::to_string(t.n);
    case Named::Kind::Succ:
      return "S(" + de_bruijn_in(t.kids[0], env) + ")";
    case Named::Kind::App:
      return "(" + de_bruijn_in(t.kids[0], env) + " " + de_bruijn_in(t.kids[1], env) + ")";
    case Named::Kind::Lam: {
      env.push_back(t.name);
      std::string s = "L(" + de_bruijn_in(t.kids[0], env) + ")";
      env.pop_back();
      return s;
    }
    case Named::Kind::Let: {
      std::string b = de_bruijn_in(t.kids[0], env);
      env.push_back(t.name);
      std::string s = "Let(" + b + ";" + de_bruijn_in(t.kids[1], env) + ")";
      env.pop_back();
      return s;
    }
  }
  return "";
}

}  // namespace

std::string de_bruijn(const Named& t) {
  std::vector<std::string> env;
  return de_bruijn_in(t, env);
}

}  // namespace pcf::testkit
