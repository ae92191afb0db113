#include "pcfbounds/krivine.hpp"

#include <unordered_map>
#include <vector>

namespace pcf {

// ---------------------------------------------------------------- stacks

Stack Stack::push(Node n) {
  std::size_t h = static_cast<std::size_t>(n.kind) * 0x100000001b3ULL;
  if (n.t1) h = h * 31 + n.t1->hash();
  if (n.t2) h = h * 31 + n.t2->hash();
  h ^= n.rest.hash() + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  n.hash = h;
  n.depth = n.rest.depth() + 1;
  n.fix_free = n.rest.fix_free() && (!n.t1 || n.t1->fix_free()) && (!n.t2 || n.t2->fix_free());
  return Stack{std::make_shared<Node>(std::move(n))};
}

Stack::Node::~Node() {
  // Unlink the uniquely owned tail one frame at a time.
  std::shared_ptr<const Node> next = std::move(rest.node_);
  while (next && next.use_count() == 1) {
    std::shared_ptr<const Node> tail = std::move(const_cast<Node*>(next.get())->rest.node_);
    next = std::move(tail);
  }
}

Stack Stack::empty() { return Stack{}; }

Stack Stack::succ(Stack rest) {
  Node n;
  n.kind = Kind::Succ;
  n.rest = std::move(rest);
  return push(std::move(n));
}

Stack Stack::pred(Stack rest) {
  Node n;
  n.kind = Kind::Pred;
  n.rest = std::move(rest);
  return push(std::move(n));
}

Stack Stack::if_(Term then_branch, Term else_branch, Stack rest) {
  Node n;
  n.kind = Kind::If;
  n.t1 = std::move(then_branch);
  n.t2 = std::move(else_branch);
  n.rest = std::move(rest);
  return push(std::move(n));
}

Stack Stack::let(std::string hint, Term body, Stack rest) {
  Node n;
  n.kind = Kind::Let;
  n.hint = std::move(hint);
  n.t1 = std::move(body);
  n.rest = std::move(rest);
  return push(std::move(n));
}

Stack Stack::arg(Term argument, Stack rest) {
  Node n;
  n.kind = Kind::Arg;
  n.t1 = std::move(argument);
  n.rest = std::move(rest);
  return push(std::move(n));
}

const Stack& Stack::rest() const {
  if (!node_) throw std::logic_error("rest() of the empty stack");
  return node_->rest;
}

const Term& Stack::first_term() const {
  if (!node_ || !node_->t1) throw std::logic_error("stack frame has no term");
  return *node_->t1;
}

const Term& Stack::second_term() const {
  if (!node_ || !node_->t2) throw std::logic_error("stack frame has no second term");
  return *node_->t2;
}

const std::string& Stack::hint() const {
  if (kind() != Kind::Let) throw std::logic_error("hint() on a non-let frame");
  return node_->hint;
}

bool operator==(const Stack& a, const Stack& b) {
  const Stack::Node* x = a.node_.get();
  const Stack::Node* y = b.node_.get();
  while (x != y) {
    if (x == nullptr || y == nullptr) return false;
    if (x->hash != y->hash || x->kind != y->kind || x->depth != y->depth) return false;
    if (x->t1 && !(*x->t1 == *y->t1)) return false;
    if (x->t2 && !(*x->t2 == *y->t2)) return false;
    x = x->rest.node_.get();
    y = y->rest.node_.get();
  }
  return true;
}

// ---------------------------------------------------------------- typing

Type typecheck_stack(const Context& ctx, const Stack& stack) {
  // Walk to the bottom first: the type expected by a frame depends on the
  // frames beneath it only for Arg.
  std::vector<const Stack*> frames;
  for (const Stack* s = &stack; !s->is_empty(); s = &s->rest()) frames.push_back(s);
  Type expected = Type::nat();  // the empty stack expects nat
  auto require_nat = [](const Type& t, const char* frame) {
    if (!t.is_nat()) throw TypeError(std::string(frame) + " frame above a stack expecting " + render_type(t), frame);
  };
  for (auto it = frames.rbegin(); it != frames.rend(); ++it) {
    const Stack& f = **it;
    switch (f.kind()) {
      case Stack::Kind::Succ:
        require_nat(expected, "succ");
        break;
      case Stack::Kind::Pred:
        require_nat(expected, "pred");
        break;
      case Stack::Kind::If: {
        require_nat(expected, "if");
        if (!typecheck(ctx, f.first_term()).is_nat() || !typecheck(ctx, f.second_term()).is_nat()) {
          throw TypeError("if frame branches must have type nat", "if frame");
        }
        break;
      }
      case Stack::Kind::Let: {
        require_nat(expected, "let");
        if (!typecheck_open(ctx, {Type::nat()}, f.first_term()).is_nat()) {
          throw TypeError("let frame body must have type nat", "let frame");
        }
        break;
      }
      case Stack::Kind::Arg:
        expected = Type::arrow(typecheck(ctx, f.first_term()), expected);
        break;
      case Stack::Kind::Empty:
        break;
    }
  }
  return expected;
}

void typecheck_state(const Context& ctx, const MachineState& state) {
  Type tm = typecheck(ctx, state.term);
  Type ts = typecheck_stack(ctx, state.stack);
  if (tm != ts) {
    throw TypeError("term of type " + render_type(tm) + " against a stack expecting " + render_type(ts), "state");
  }
}

// ---------------------------------------------------------------- machine

namespace {

struct StateHash {
  std::size_t operator()(const MachineState& s) const noexcept {
    return s.term.hash() * 0x100000001b3ULL ^ s.stack.hash();
  }
};

class Machine {
 public:
  Machine(const IndexSet& j, const MachineLimits& limits, MachineStats* stats)
      : j_(j), limits_(limits), stats_(stats) {}

  PolyTree run(const MachineState& root) {
    std::optional<PolyTree> ready = advance(root);
    while (!pending_.empty()) {
      const std::size_t top = pending_.size() - 1;
      if (!ready) {
        Pending& p = pending_[top];
        if (p.results.size() < p.children.size()) {
          ready = advance(p.children[p.results.size()]);
          continue;
        }
        ready = finish(p);
        memo_.emplace(std::move(*p.key), *ready);
        pending_.pop_back();
        if (pending_.empty()) break;
      }
      Pending& parent = pending_.back();
      parent.results.push_back(std::move(*ready));
      ready.reset();
    }
    if (stats_ != nullptr) stats_->memo_hits += memo_hits_;
    return *ready;
  }

 private:
  struct Pending {
    std::optional<MachineState> key;
    bool is_coin = false;
    Rational r;
    std::string var;
    std::vector<Point> points;  // numeric points for a variable node
    std::vector<MachineState> children;
    std::vector<PolyTree> results;
  };

  PolyTree finish(const Pending& p) {
    if (p.is_coin) return PolyTree::combo(p.r, p.results[0], 1 - p.r, p.results[1]);
    PolyTree::Branches branches;
    branches.reserve(p.points.size() + 1);
    for (std::size_t i = 0; i < p.points.size(); ++i) branches.emplace_back(p.points[i], p.results[i]);
    branches.emplace_back(Point::err(), PolyTree::one());
    return PolyTree::var(p.var, std::move(branches));
  }

  void tick() {
    if (stats_ != nullptr) ++stats_->transitions;
    if (++transitions_ > limits_.max_transitions) {
      throw DepthExceeded("machine exceeded " + std::to_string(limits_.max_transitions) + " transitions");
    }
  }

  // Runs deterministic transitions from `s`. Returns the tree when the run
  // ends in a leaf or a memoized branching state; otherwise pushes a pending
  // branching node and returns nullopt.
  std::optional<PolyTree> advance(MachineState s) {
    using K = Term::Kind;
    using SK = Stack::Kind;
    while (true) {
      tick();
      const Term& t = s.term;
      switch (t.kind()) {
        case K::ErrConv:
          return PolyTree::one();
        case K::ErrDiv:
          return PolyTree::zero();
        case K::Coin:
        case K::FreeVar:
          return branch(std::move(s));
        case K::Succ: {
          Term m = t.operand();
          s.stack = Stack::succ(std::move(s.stack));
          s.term = std::move(m);
          break;
        }
        case K::Pred: {
          Term m = t.operand();
          s.stack = Stack::pred(std::move(s.stack));
          s.term = std::move(m);
          break;
        }
        case K::If: {
          Term m = t.cond();
          s.stack = Stack::if_(t.then_branch(), t.else_branch(), std::move(s.stack));
          s.term = std::move(m);
          break;
        }
        case K::Let: {
          Term m = t.bound_term();
          s.stack = Stack::let(t.hint(), t.scope(), std::move(s.stack));
          s.term = std::move(m);
          break;
        }
        case K::App: {
          Term m = t.fun();
          s.stack = Stack::arg(t.arg(), std::move(s.stack));
          s.term = std::move(m);
          break;
        }
        case K::Abs: {
          if (s.stack.kind() != SK::Arg) throw TypeError("abstraction meets a non-argument frame", "state");
          Term next = instantiate(t.scope(), s.stack.first_term());
          Stack rest = s.stack.rest();
          s.term = std::move(next);
          s.stack = std::move(rest);
          break;
        }
        case K::Num: {
          const std::uint64_t n = t.numeral();
          switch (s.stack.kind()) {
            case SK::Empty:
              return PolyTree::zero();
            case SK::Succ: {
              Stack rest = s.stack.rest();
              s.term = Term::num(n + 1);
              s.stack = std::move(rest);
              break;
            }
            case SK::Pred: {
              Stack rest = s.stack.rest();
              s.term = Term::num(n == 0 ? 0 : n - 1);
              s.stack = std::move(rest);
              break;
            }
            case SK::If: {
              Term next = n == 0 ? s.stack.first_term() : s.stack.second_term();
              Stack rest = s.stack.rest();
              s.term = std::move(next);
              s.stack = std::move(rest);
              break;
            }
            case SK::Let: {
              Term next = instantiate(s.stack.first_term(), Term::num(n));
              Stack rest = s.stack.rest();
              s.term = std::move(next);
              s.stack = std::move(rest);
              break;
            }
            case SK::Arg:
              throw TypeError("numeral meets an argument frame", "state");
          }
          break;
        }
        case K::Fix:
          throw FixEncountered();
        case K::BoundVar:
          throw TypeError("dangling bound variable in machine state", "state");
      }
    }
  }

  std::optional<PolyTree> branch(MachineState s) {
    if (auto it = memo_.find(s); it != memo_.end()) {
      ++memo_hits_;
      return it->second;
    }
    if (pending_.size() >= limits_.max_pending) {
      throw DepthExceeded("machine exceeded " + std::to_string(limits_.max_pending) + " nested branching states");
    }
    if (stats_ != nullptr) ++stats_->branch_states;
    Pending p;
    if (s.term.is(Term::Kind::Coin)) {
      p.is_coin = true;
      p.r = s.term.probability();
      p.children.push_back({Term::num(0), s.stack});
      p.children.push_back({Term::num(1), s.stack});
    } else {
      p.var = s.term.name();
      for (std::uint64_t n : j_) {
        p.points.push_back(Point::num(n));
        p.children.push_back({Term::num(n), s.stack});
      }
    }
    p.key = std::move(s);
    pending_.push_back(std::move(p));
    return std::nullopt;
  }

  const IndexSet& j_;
  const MachineLimits& limits_;
  MachineStats* stats_;
  std::size_t transitions_ = 0;
  std::size_t memo_hits_ = 0;
  std::vector<Pending> pending_;
  std::unordered_map<MachineState, PolyTree, StateHash> memo_;
};

}  // namespace

PolyTree kreval(const MachineState& state, const Context& ctx, const IndexSet& j, const MachineLimits& limits,
                MachineStats* stats) {
  if (!ctx.is_ground()) throw TypeError("the machine needs a ground context", "context");
  if (!state.term.fix_free() || !state.stack.fix_free()) throw FixEncountered();
  typecheck_state(ctx, state);
  return Machine(j, limits, stats).run(state);
}

PolyTree kreval_term(const Term& m, const Context& ctx, const IndexSet& j, const MachineLimits& limits,
                     MachineStats* stats) {
  return kreval(MachineState{m, Stack::empty()}, ctx, j, limits, stats);
}

}  // namespace pcf
