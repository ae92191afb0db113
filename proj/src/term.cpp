#include "pcfbounds/term.hpp"

#include <functional>
#include <stdexcept>
#include <unordered_map>
#include <utility>
#include <vector>

#include "deep_stack.hpp"

namespace pcf {

namespace {

constexpr std::size_t kGolden = 0x9e3779b97f4a7c15ULL;

std::size_t mix(std::size_t seed, std::size_t v) {
  return seed ^ (v + kGolden + (seed << 6) + (seed >> 2));
}

}  // namespace

// ---------------------------------------------------------------- Type

Type Type::nat() {
  static const Type kNat{std::make_shared<const Node>(Node{Kind::Nat, 0x6e6174, Type{}, Type{}})};
  return kNat;
}

Type Type::arrow(Type domain, Type codomain) {
  std::size_t h = mix(mix(0xa770, domain.hash()), codomain.hash());
  return Type{std::make_shared<const Node>(Node{Kind::Arrow, h, std::move(domain), std::move(codomain)})};
}

const Type& Type::domain() const {
  if (!is_arrow()) throw std::logic_error("domain() on non-arrow type");
  return node_->domain;
}

const Type& Type::codomain() const {
  if (!is_arrow()) throw std::logic_error("codomain() on non-arrow type");
  return node_->codomain;
}

bool operator==(const Type& a, const Type& b) {
  if (a.node_ == b.node_) return true;
  if (a.hash() != b.hash() || a.kind() != b.kind()) return false;
  if (a.is_nat()) return true;
  return a.domain() == b.domain() && a.codomain() == b.codomain();
}

std::string render_type(const Type& t) {
  if (t.is_nat()) return "nat";
  std::string lhs = render_type(t.domain());
  if (t.domain().is_arrow()) lhs = "(" + lhs + ")";
  return lhs + " -> " + render_type(t.codomain());
}

// ---------------------------------------------------------------- Term

Term Term::make(Node n) {
  std::size_t h = mix(static_cast<std::size_t>(n.kind) + 1, n.value);
  switch (n.kind) {
    case Kind::FreeVar:
      h = mix(h, std::hash<std::string>{}(n.text));
      n.has_free = true;
      break;
    case Kind::BoundVar:
      n.loose = static_cast<std::uint32_t>(n.value) + 1;
      break;
    case Kind::Coin:
      h = mix(h, hash_value(*n.coin));
      break;
    case Kind::Abs:
      h = mix(h, n.annot.hash());
      break;
    case Kind::Fix:
      n.fix_free = false;
      break;
    default:
      break;
  }
  const bool binds = n.kind == Kind::Abs || n.kind == Kind::Let;
  for (int i = 0; i < 3; ++i) {
    const Term& kid = n.kids[i];
    if (!kid.node_) continue;
    h = mix(h, kid.hash());
    n.size += kid.size();
    n.depth = std::max(n.depth, kid.depth() + 1);
    n.fix_free = n.fix_free && kid.fix_free();
    n.has_free = n.has_free || kid.has_free_vars();
    std::uint32_t loose = kid.loose_bound();
    // The scope of a binder is its last child.
    const bool is_scope = binds && (n.kind == Kind::Abs ? i == 0 : i == 1);
    if (is_scope && loose > 0) --loose;
    n.loose = std::max(n.loose, loose);
  }
  n.hash = h;
  return Term{std::make_shared<Node>(std::move(n))};
}

Term::Node::~Node() {
  std::vector<std::shared_ptr<const Node>> pending;
  for (Term& kid : kids) {
    if (kid.node_ && kid.node_.use_count() == 1) pending.push_back(std::move(kid.node_));
  }
  while (!pending.empty()) {
    std::shared_ptr<const Node> n = std::move(pending.back());
    pending.pop_back();
    if (n.use_count() != 1) continue;
    // Sole owner: detach the children so this node's destructor stays shallow.
    auto* owned = const_cast<Node*>(n.get());
    for (Term& kid : owned->kids) {
      if (kid.node_ && kid.node_.use_count() == 1) pending.push_back(std::move(kid.node_));
    }
  }
}

Term Term::var(std::string name) {
  Node n;
  n.kind = Kind::FreeVar;
  n.text = std::move(name);
  return make(std::move(n));
}

Term Term::bound(std::uint32_t index) {
  Node n;
  n.kind = Kind::BoundVar;
  n.value = index;
  return make(std::move(n));
}

Term Term::num(std::uint64_t value) {
  Node n;
  n.kind = Kind::Num;
  n.value = value;
  return make(std::move(n));
}

Term Term::succ(Term t) {
  Node n;
  n.kind = Kind::Succ;
  n.kids[0] = std::move(t);
  return make(std::move(n));
}

Term Term::pred(Term t) {
  Node n;
  n.kind = Kind::Pred;
  n.kids[0] = std::move(t);
  return make(std::move(n));
}

Term Term::if_(Term cond, Term then_branch, Term else_branch) {
  Node n;
  n.kind = Kind::If;
  n.kids[0] = std::move(cond);
  n.kids[1] = std::move(then_branch);
  n.kids[2] = std::move(else_branch);
  return make(std::move(n));
}

Term Term::let(const std::string& x, Term bound_term, const Term& body) {
  return let_scope(x, std::move(bound_term), abstract_var(body, x));
}

Term Term::let_scope(std::string hint, Term bound_term, Term scope) {
  Node n;
  n.kind = Kind::Let;
  n.text = std::move(hint);
  n.kids[0] = std::move(bound_term);
  n.kids[1] = std::move(scope);
  return make(std::move(n));
}

Term Term::app(Term fun, Term arg) {
  Node n;
  n.kind = Kind::App;
  n.kids[0] = std::move(fun);
  n.kids[1] = std::move(arg);
  return make(std::move(n));
}

Term Term::abs(const std::string& x, Type annot, const Term& body) {
  return abs_scope(x, std::move(annot), abstract_var(body, x));
}

Term Term::abs_scope(std::string hint, Type annot, Term scope) {
  Node n;
  n.kind = Kind::Abs;
  n.text = std::move(hint);
  n.annot = std::move(annot);
  n.kids[0] = std::move(scope);
  return make(std::move(n));
}

Term Term::fix(Term t) {
  Node n;
  n.kind = Kind::Fix;
  n.kids[0] = std::move(t);
  return make(std::move(n));
}

Term Term::coin(Rational r) {
  r.canonicalize();
  if (r < 0 || r > 1) throw std::invalid_argument("coin probability must lie in [0,1], got " + to_string(r));
  Node n;
  n.kind = Kind::Coin;
  n.coin = std::make_shared<const Rational>(std::move(r));
  return make(std::move(n));
}

Term Term::errdiv() {
  static const Term kErr = [] {
    Node n;
    n.kind = Kind::ErrDiv;
    return make(std::move(n));
  }();
  return kErr;
}

Term Term::errconv() {
  static const Term kErr = [] {
    Node n;
    n.kind = Kind::ErrConv;
    return make(std::move(n));
  }();
  return kErr;
}

namespace {

[[noreturn]] void bad_access(const char* what) {
  throw std::logic_error(std::string("invalid term accessor: ") + what);
}

}  // namespace

const std::string& Term::name() const {
  if (!is(Kind::FreeVar)) bad_access("name");
  return node_->text;
}

const std::string& Term::hint() const {
  if (!is(Kind::Abs) && !is(Kind::Let)) bad_access("hint");
  return node_->text;
}

std::uint32_t Term::index() const {
  if (!is(Kind::BoundVar)) bad_access("index");
  return static_cast<std::uint32_t>(node_->value);
}

std::uint64_t Term::numeral() const {
  if (!is(Kind::Num)) bad_access("numeral");
  return node_->value;
}

const Rational& Term::probability() const {
  if (!is(Kind::Coin)) bad_access("probability");
  return *node_->coin;
}

const Type& Term::annotation() const {
  if (!is(Kind::Abs)) bad_access("annotation");
  return node_->annot;
}

const Term& Term::operand() const {
  if (!is(Kind::Succ) && !is(Kind::Pred) && !is(Kind::Fix)) bad_access("operand");
  return node_->kids[0];
}

const Term& Term::cond() const {
  if (!is(Kind::If)) bad_access("cond");
  return node_->kids[0];
}

const Term& Term::then_branch() const {
  if (!is(Kind::If)) bad_access("then_branch");
  return node_->kids[1];
}

const Term& Term::else_branch() const {
  if (!is(Kind::If)) bad_access("else_branch");
  return node_->kids[2];
}

const Term& Term::bound_term() const {
  if (!is(Kind::Let)) bad_access("bound_term");
  return node_->kids[0];
}

const Term& Term::scope() const {
  if (is(Kind::Abs)) return node_->kids[0];
  if (is(Kind::Let)) return node_->kids[1];
  bad_access("scope");
}

const Term& Term::fun() const {
  if (!is(Kind::App)) bad_access("fun");
  return node_->kids[0];
}

const Term& Term::arg() const {
  if (!is(Kind::App)) bad_access("arg");
  return node_->kids[1];
}

bool operator==(const Term& a, const Term& b) {
  std::vector<std::pair<const Term::Node*, const Term::Node*>> todo{{a.node_.get(), b.node_.get()}};
  while (!todo.empty()) {
    auto [x, y] = todo.back();
    todo.pop_back();
    if (x == y) continue;
    if (x->hash != y->hash || x->kind != y->kind || x->size != y->size || x->value != y->value) return false;
    switch (x->kind) {
      case Term::Kind::FreeVar:
        if (x->text != y->text) return false;
        break;
      case Term::Kind::Coin:
        if (*x->coin != *y->coin) return false;
        break;
      case Term::Kind::Abs:
        if (x->annot != y->annot) return false;
        break;
      default:
        break;
    }
    for (int i = 0; i < 3; ++i) {
      if (x->kids[i].node_) todo.emplace_back(x->kids[i].node_.get(), y->kids[i].node_.get());
    }
  }
  return true;
}

// ---------------------------------------------------------------- operations

namespace {

// Generic structural rebuild. `f(term, depth)` returns a replacement or
// nullopt to descend. Subterms that `skip(term, depth)` are shared unchanged.
template <typename Leaf, typename Skip>
Term rebuild(const Term& t, std::uint32_t depth, const Leaf& leaf, const Skip& skip) {
  if (skip(t, depth)) return t;
  using K = Term::Kind;
  switch (t.kind()) {
    case K::FreeVar:
    case K::BoundVar:
      return leaf(t, depth);
    case K::Num:
    case K::Coin:
    case K::ErrDiv:
    case K::ErrConv:
      return t;
    case K::Succ:
      return Term::succ(rebuild(t.operand(), depth, leaf, skip));
    case K::Pred:
      return Term::pred(rebuild(t.operand(), depth, leaf, skip));
    case K::Fix:
      return Term::fix(rebuild(t.operand(), depth, leaf, skip));
    case K::If:
      return Term::if_(rebuild(t.cond(), depth, leaf, skip), rebuild(t.then_branch(), depth, leaf, skip),
                       rebuild(t.else_branch(), depth, leaf, skip));
    case K::Let:
      return Term::let_scope(t.hint(), rebuild(t.bound_term(), depth, leaf, skip),
                             rebuild(t.scope(), depth + 1, leaf, skip));
    case K::App:
      return Term::app(rebuild(t.fun(), depth, leaf, skip), rebuild(t.arg(), depth, leaf, skip));
    case K::Abs:
      return Term::abs_scope(t.hint(), t.annotation(), rebuild(t.scope(), depth + 1, leaf, skip));
  }
  return t;
}

}  // namespace

Term instantiate(const Term& scope, const Term& replacement) {
  return detail::with_depth(scope.depth(), [&] { return rebuild(
      scope, 0,
      [&](const Term& v, std::uint32_t depth) -> Term {
        if (!v.is(Term::Kind::BoundVar)) return v;
        if (v.index() == depth) return replacement;
        if (v.index() > depth) return Term::bound(v.index() - 1);
        return v;
      },
      [](const Term& t, std::uint32_t depth) { return t.loose_bound() <= depth; }); });
}

Term abstract_var(const Term& body, const std::string& name) {
  return detail::with_depth(body.depth(), [&] { return rebuild(
      body, 0,
      [&](const Term& v, std::uint32_t depth) -> Term {
        if (v.is(Term::Kind::FreeVar) && v.name() == name) return Term::bound(depth);
        if (v.is(Term::Kind::BoundVar) && v.index() >= depth) return Term::bound(v.index() + 1);
        return v;
      },
      [](const Term& t, std::uint32_t depth) { return !t.has_free_vars() && t.loose_bound() <= depth; }); });
}

Term substitute(const Term& t, const std::string& v, const Term& replacement) {
  if (replacement.loose_bound() != 0) throw std::invalid_argument("substitute: replacement has dangling indices");
  return detail::with_depth(t.depth(), [&] { return rebuild(
      t, 0,
      [&](const Term& x, std::uint32_t) -> Term {
        if (x.is(Term::Kind::FreeVar) && x.name() == v) return replacement;
        return x;
      },
      [](const Term& x, std::uint32_t) { return !x.has_free_vars(); }); });
}

namespace {

void collect_free(const Term& t, std::set<std::string>& out) {
  if (!t.has_free_vars()) return;
  using K = Term::Kind;
  switch (t.kind()) {
    case K::FreeVar:
      out.insert(t.name());
      return;
    case K::Succ:
    case K::Pred:
    case K::Fix:
      collect_free(t.operand(), out);
      return;
    case K::If:
      collect_free(t.cond(), out);
      collect_free(t.then_branch(), out);
      collect_free(t.else_branch(), out);
      return;
    case K::Let:
      collect_free(t.bound_term(), out);
      collect_free(t.scope(), out);
      return;
    case K::App:
      collect_free(t.fun(), out);
      collect_free(t.arg(), out);
      return;
    case K::Abs:
      collect_free(t.scope(), out);
      return;
    default:
      return;
  }
}

}  // namespace

std::set<std::string> free_vars(const Term& t) {
  std::set<std::string> out;
  detail::with_depth(t.depth(), [&] { collect_free(t, out); });
  return out;
}

std::string fresh_name(const std::string& base, const std::set<std::string>& taken) {
  std::string candidate = base;
  while (taken.count(candidate) != 0) candidate += '\'';
  return candidate;
}

}  // namespace pcf
