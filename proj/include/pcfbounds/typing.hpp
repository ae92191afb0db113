#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pcfbounds/term.hpp"

namespace pcf {

/// Ordered typing context with no duplicate names.
class Context {
 public:
  Context() = default;
  Context(std::initializer_list<std::pair<std::string, Type>> entries);

  /// Throws std::invalid_argument on a duplicate name.
  void add(std::string name, Type type);

  /// Rightmost binding, or nullptr.
  const Type* lookup(const std::string& name) const;

  bool is_ground() const;
  bool empty() const noexcept { return entries_.empty(); }
  const std::vector<std::pair<std::string, Type>>& entries() const noexcept { return entries_; }

  /// Every free variable of `t` at type nat, in name order.
  static Context ground_for(const Term& t);

 private:
  std::vector<std::pair<std::string, Type>> entries_;
};

class TypeError : public std::runtime_error {
 public:
  TypeError(std::string message, std::string location, bool at_free_variable = false)
      : std::runtime_error(message + " (at " + location + ")"),
        location_(std::move(location)),
        at_free_variable_(at_free_variable) {}

  const std::string& location() const noexcept { return location_; }
  /// The failing subterm is a use of a context variable at the wrong type.
  bool at_free_variable() const noexcept { return at_free_variable_; }

 private:
  std::string location_;
  bool at_free_variable_;
};

Type typecheck(const Context& ctx, const Term& t);

/// Typing under extra de Bruijn binders: `binders.back()` is index 0.
Type typecheck_open(const Context& ctx, const std::vector<Type>& binders, const Term& t);

}  // namespace pcf
