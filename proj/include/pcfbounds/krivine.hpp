#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>

#include "pcfbounds/groundsem.hpp"
#include "pcfbounds/poly.hpp"
#include "pcfbounds/term.hpp"
#include "pcfbounds/typing.hpp"

namespace pcf {

/// Machine stack (continuation), persistent and shared.
class Stack {
 public:
  enum class Kind { Empty, Succ, Pred, If, Let, Arg };

  static Stack empty();
  static Stack succ(Stack rest);
  static Stack pred(Stack rest);
  static Stack if_(Term then_branch, Term else_branch, Stack rest);
  /// `body` is a let scope: bound index 0 receives the numeral.
  static Stack let(std::string hint, Term body, Stack rest);
  static Stack arg(Term argument, Stack rest);

  Kind kind() const noexcept;
  bool is_empty() const noexcept { return kind() == Kind::Empty; }
  const Stack& rest() const;
  const Term& first_term() const;   // If: then-branch; Let: body; Arg: argument
  const Term& second_term() const;  // If: else-branch
  const std::string& hint() const;  // Let

  std::size_t hash() const noexcept;
  std::size_t depth() const noexcept;
  bool fix_free() const noexcept;

  friend bool operator==(const Stack& a, const Stack& b);

 private:
  struct Node;
  Stack() = default;
  explicit Stack(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  static Stack push(Node n);
  std::shared_ptr<const Node> node_;
};

struct Stack::Node {
  Node() = default;
  Node(Node&&) = default;
  Node& operator=(Node&&) = default;
  ~Node();

  Kind kind = Kind::Empty;
  std::string hint;
  std::optional<Term> t1;
  std::optional<Term> t2;
  Stack rest;
  std::size_t hash = 0;
  std::size_t depth = 0;
  bool fix_free = true;
};

inline Stack::Kind Stack::kind() const noexcept { return node_ ? node_->kind : Kind::Empty; }
inline std::size_t Stack::hash() const noexcept { return node_ ? node_->hash : 0x57ac; }
inline std::size_t Stack::depth() const noexcept { return node_ ? node_->depth : 0; }
inline bool Stack::fix_free() const noexcept { return node_ ? node_->fix_free : true; }

struct MachineState {
  Term term;
  Stack stack;

  friend bool operator==(const MachineState& a, const MachineState& b) {
    return a.stack.hash() == b.stack.hash() && a.term == b.term && a.stack == b.stack;
  }
};

/// The type the stack expects. Throws TypeError.
Type typecheck_stack(const Context& ctx, const Stack& stack);
/// Succeeds iff the term and the stack agree on a type. Throws TypeError.
void typecheck_state(const Context& ctx, const MachineState& state);

class FixEncountered : public std::runtime_error {
 public:
  FixEncountered() : std::runtime_error("the machine only runs fix-free states; unfold fixpoints first") {}
};

struct MachineLimits {
  std::size_t max_transitions = 200'000'000;
  std::size_t max_pending = 10'000'000;  // unfinished branching nodes
};

struct MachineStats {
  std::size_t transitions = 0;
  std::size_t branch_states = 0;
  std::size_t memo_hits = 0;
};

/// Runs the Krivine function on an almost closed, fix-free state. Variable
/// nodes branch on `J ∪ {err}` only, with the err branch fixed to `One`.
/// Throws FixEncountered, TypeError (including a non-ground context) or
/// DepthExceeded.
PolyTree kreval(const MachineState& state, const Context& ctx, const IndexSet& j,
                const MachineLimits& limits = {}, MachineStats* stats = nullptr);

/// `kreval(<m, empty>)`; `m` must have type nat.
PolyTree kreval_term(const Term& m, const Context& ctx, const IndexSet& j, const MachineLimits& limits = {},
                     MachineStats* stats = nullptr);

}  // namespace pcf
