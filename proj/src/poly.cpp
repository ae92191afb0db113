#include "pcfbounds/poly.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_map>

namespace pcf {

std::string to_string(const Point& p) { return p.is_err ? "err" : std::to_string(p.n); }

// ---------------------------------------------------------------- exponents

namespace {

bool entry_key_less(const ExponentEntry& a, const ExponentEntry& b) {
  if (a.var != b.var) return a.var < b.var;
  return a.index < b.index;
}

bool entry_key_equal(const ExponentEntry& a, const ExponentEntry& b) { return a.var == b.var && a.index == b.index; }

}  // namespace

MultiExponent::MultiExponent(std::vector<ExponentEntry> entries) {
  std::sort(entries.begin(), entries.end(), entry_key_less);
  for (auto& e : entries) {
    if (e.multiplicity == 0) continue;
    if (!entries_.empty() && entry_key_equal(entries_.back(), e)) {
      entries_.back().multiplicity += e.multiplicity;
    } else {
      entries_.push_back(std::move(e));
    }
  }
}

MultiExponent MultiExponent::single(const std::string& var, Point index, std::uint32_t multiplicity) {
  return MultiExponent({ExponentEntry{var, index, multiplicity}});
}

std::uint32_t MultiExponent::degree() const {
  std::uint32_t d = 0;
  for (const auto& e : entries_) d += e.multiplicity;
  return d;
}

std::uint32_t MultiExponent::multiplicity(const std::string& var, Point index) const {
  for (const auto& e : entries_) {
    if (e.var == var && e.index == index) return e.multiplicity;
  }
  return 0;
}

MultiExponent MultiExponent::operator+(const MultiExponent& other) const {
  MultiExponent out;
  out.entries_.reserve(entries_.size() + other.entries_.size());
  auto a = entries_.begin();
  auto b = other.entries_.begin();
  while (a != entries_.end() || b != other.entries_.end()) {
    if (b == other.entries_.end() || (a != entries_.end() && entry_key_less(*a, *b))) {
      out.entries_.push_back(*a++);
    } else if (a == entries_.end() || entry_key_less(*b, *a)) {
      out.entries_.push_back(*b++);
    } else {
      ExponentEntry e = *a++;
      e.multiplicity += (b++)->multiplicity;
      out.entries_.push_back(std::move(e));
    }
  }
  return out;
}

bool operator<(const MultiExponent& a, const MultiExponent& b) {
  return std::lexicographical_compare(a.entries_.begin(), a.entries_.end(), b.entries_.begin(), b.entries_.end(),
                                      [](const ExponentEntry& x, const ExponentEntry& y) {
                                        if (!entry_key_equal(x, y)) return entry_key_less(x, y);
                                        return x.multiplicity < y.multiplicity;
                                      });
}

// ---------------------------------------------------------------- polynomials

Polynomial::Polynomial(Terms terms) {
  for (auto& [e, c] : terms) {
    c.canonicalize();
    if (c < 0) throw std::invalid_argument("negative polynomial coefficient");
    if (c == 0) continue;
    terms_.emplace(e, std::move(c));
  }
}

Polynomial Polynomial::constant(const Rational& c) { return monomial(c, MultiExponent{}); }

Polynomial Polynomial::monomial(const Rational& c, MultiExponent e) {
  Terms t;
  t.emplace(std::move(e), c);
  return Polynomial(std::move(t));
}

Rational Polynomial::coefficient(const MultiExponent& e) const {
  auto it = terms_.find(e);
  return it == terms_.end() ? Rational(0) : it->second;
}

Polynomial poly_add(const Polynomial& a, const Polynomial& b) {
  Polynomial::Terms t = a.terms();
  for (const auto& [e, c] : b.terms()) t[e] += c;
  return Polynomial(std::move(t));
}

Polynomial poly_scale(const Rational& alpha, const Polynomial& a) {
  if (alpha < 0) throw std::invalid_argument("negative scale factor");
  if (alpha == 0) return Polynomial::zero();
  Polynomial::Terms t;
  for (const auto& [e, c] : a.terms()) t.emplace(e, alpha * c);
  return Polynomial(std::move(t));
}

Polynomial poly_mul(const Polynomial& a, const Polynomial& b) {
  Polynomial::Terms t;
  for (const auto& [ea, ca] : a.terms()) {
    for (const auto& [eb, cb] : b.terms()) t[ea + eb] += ca * cb;
  }
  return Polynomial(std::move(t));
}

Polynomial var_sum(const std::string& x, const std::vector<std::pair<Point, Polynomial>>& family) {
  Polynomial::Terms t;
  for (const auto& [i, a] : family) {
    const MultiExponent bump = MultiExponent::single(x, i);
    for (const auto& [e, c] : a.terms()) t[e + bump] += c;
  }
  return Polynomial(std::move(t));
}

namespace {

Rational read_point(const Valuation& v, const std::string& var, const Point& index) {
  auto it = v.find(var);
  if (it == v.end()) throw MissingVariable(var);
  return index.is_err ? it->second.err() : it->second.at(index.n);
}

Rational power(Rational base, std::uint32_t e) {
  Rational r = 1;
  while (e > 0) {
    if (e & 1u) r *= base;
    base *= base;
    e >>= 1u;
  }
  return r;
}

}  // namespace

Rational eval(const Polynomial& p, const Valuation& v) {
  Rational total = 0;
  for (const auto& [e, c] : p.terms()) {
    Rational m = c;
    for (const auto& entry : e.entries()) {
      m *= power(read_point(v, entry.var, entry.index), entry.multiplicity);
      if (m == 0) break;
    }
    total += m;
  }
  return total;
}

namespace {

std::vector<std::pair<const MultiExponent*, const Rational*>> display_order(const Polynomial& p) {
  std::vector<std::pair<const MultiExponent*, const Rational*>> items;
  items.reserve(p.terms().size());
  for (const auto& [e, c] : p.terms()) items.emplace_back(&e, &c);
  std::stable_sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
    return a.first->degree() > b.first->degree();
  });
  return items;
}

}  // namespace

std::string render_poly(const Polynomial& p) {
  if (p.is_zero()) return "0";
  std::string out;
  for (const auto& [e, c] : display_order(p)) {
    if (!out.empty()) out += " + ";
    std::string mono;
    for (const auto& entry : e->entries()) {
      if (!mono.empty()) mono += "·";
      mono += entry.var + "(" + to_string(entry.index) + ")";
      if (entry.multiplicity > 1) mono += "^" + std::to_string(entry.multiplicity);
    }
    if (mono.empty()) {
      out += to_string(*c);
    } else if (*c == 1) {
      out += mono;
    } else {
      out += to_string(*c) + "·" + mono;
    }
  }
  return out;
}

nlohmann::json poly_to_json(const Polynomial& p) {
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& [e, c] : display_order(p)) {
    nlohmann::json mono = nlohmann::json::array();
    for (const auto& entry : e->entries()) {
      nlohmann::json idx = entry.index.is_err ? nlohmann::json("err") : nlohmann::json(entry.index.n);
      mono.push_back({{"var", entry.var}, {"index", idx}, {"exp", entry.multiplicity}});
    }
    terms.push_back({{"coeff", to_fraction_string(*c)}, {"monomial", mono}});
  }
  return {{"terms", terms}};
}

// ---------------------------------------------------------------- trees

PolyTree::Node::~Node() {
  std::vector<std::shared_ptr<const Node>> pending;
  auto detach = [&](Node& n) {
    for (PolyTree& k : n.kids) {
      if (k.node_ && k.node_.use_count() == 1) pending.push_back(std::move(k.node_));
    }
    for (auto& [p, s] : n.branches) {
      if (s.node_ && s.node_.use_count() == 1) pending.push_back(std::move(s.node_));
    }
  };
  detach(*this);
  while (!pending.empty()) {
    std::shared_ptr<const Node> n = std::move(pending.back());
    pending.pop_back();
    if (n.use_count() == 1) detach(*const_cast<Node*>(n.get()));
  }
}

PolyTree PolyTree::one() {
  static const PolyTree kOne = [] {
    Node n;
    n.kind = Kind::One;
    return PolyTree{std::make_shared<Node>(std::move(n))};
  }();
  return kOne;
}

PolyTree PolyTree::zero() {
  static const PolyTree kZero = [] {
    Node n;
    n.kind = Kind::Zero;
    return PolyTree{std::make_shared<Node>(std::move(n))};
  }();
  return kZero;
}

PolyTree PolyTree::var(std::string x, Branches branches) {
  std::sort(branches.begin(), branches.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  for (std::size_t i = 1; i < branches.size(); ++i) {
    if (branches[i - 1].first == branches[i].first) throw std::invalid_argument("duplicate branch in variable node");
  }
  if (branches.empty() || !branches.back().first.is_err) {
    throw std::invalid_argument("variable node without err branch");
  }
  Node n;
  n.kind = Kind::Var;
  n.var = std::move(x);
  n.branches = std::move(branches);
  return PolyTree{std::make_shared<Node>(std::move(n))};
}

PolyTree PolyTree::combo(Rational a1, PolyTree s1, Rational a2, PolyTree s2) {
  a1.canonicalize();
  a2.canonicalize();
  if (a1 < 0 || a2 < 0 || a1 + a2 > 1) throw std::invalid_argument("combination weights must be sub-convex");
  Node n;
  n.kind = Kind::Combo;
  n.a1 = std::move(a1);
  n.a2 = std::move(a2);
  n.kids[0] = std::move(s1);
  n.kids[1] = std::move(s2);
  return PolyTree{std::make_shared<Node>(std::move(n))};
}

namespace {

// Post-order over the DAG with an explicit stack, calling `combine` once per
// distinct node after all of its children are done.
template <typename Value, typename Combine>
Value fold_tree(const PolyTree& root, const Combine& combine) {
  std::unordered_map<const void*, Value> done;
  std::vector<std::pair<const PolyTree*, bool>> stack{{&root, false}};
  auto children = [](const PolyTree& t) {
    std::vector<const PolyTree*> out;
    if (t.kind() == PolyTree::Kind::Combo) {
      out = {&t.left(), &t.right()};
    } else if (t.kind() == PolyTree::Kind::Var) {
      for (const auto& [p, s] : t.branches()) out.push_back(&s);
    }
    return out;
  };
  while (!stack.empty()) {
    auto [node, expanded] = stack.back();
    stack.pop_back();
    if (done.count(node->identity())) continue;
    if (!expanded) {
      stack.emplace_back(node, true);
      for (const PolyTree* c : children(*node)) {
        if (!done.count(c->identity())) stack.emplace_back(c, false);
      }
    } else {
      Value v = combine(*node, [&](const PolyTree& c) -> const Value& { return done.at(c.identity()); });
      done.emplace(node->identity(), std::move(v));
    }
  }
  return done.at(root.identity());
}

}  // namespace

Polynomial tree_to_poly(const PolyTree& t) {
  return fold_tree<Polynomial>(t, [](const PolyTree& node, const auto& get) -> Polynomial {
    switch (node.kind()) {
      case PolyTree::Kind::One:
        return Polynomial::one();
      case PolyTree::Kind::Zero:
        return Polynomial::zero();
      case PolyTree::Kind::Combo:
        return poly_add(poly_scale(node.weight_left(), get(node.left())),
                        poly_scale(node.weight_right(), get(node.right())));
      case PolyTree::Kind::Var: {
        std::vector<std::pair<Point, Polynomial>> family;
        family.reserve(node.branches().size());
        for (const auto& [p, s] : node.branches()) family.emplace_back(p, get(s));
        return var_sum(node.variable(), family);
      }
    }
    return Polynomial::zero();
  });
}

Rational eval_tree(const PolyTree& t, const Valuation& v) {
  return fold_tree<Rational>(t, [&](const PolyTree& node, const auto& get) -> Rational {
    switch (node.kind()) {
      case PolyTree::Kind::One:
        return 1;
      case PolyTree::Kind::Zero:
        return 0;
      case PolyTree::Kind::Combo:
        return node.weight_left() * get(node.left()) + node.weight_right() * get(node.right());
      case PolyTree::Kind::Var: {
        Rational sum = 0;
        for (const auto& [p, s] : node.branches()) {
          Rational w = read_point(v, node.variable(), p);
          if (w != 0) sum += w * get(s);
        }
        return sum;
      }
    }
    return 0;
  });
}

TreeStats tree_stats(const PolyTree& t) {
  TreeStats stats;
  fold_tree<char>(t, [&](const PolyTree& node, const auto&) -> char {
    ++stats.nodes;
    if (node.kind() == PolyTree::Kind::Combo) ++stats.combos;
    if (node.kind() == PolyTree::Kind::Var) ++stats.vars;
    return 0;
  });
  return stats;
}

}  // namespace pcf
