#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pcfbounds/term.hpp"

namespace pcf {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& message, int line, int column)
      : std::runtime_error(std::to_string(line) + ":" + std::to_string(column) + ": " + message),
        line_(line),
        column_(column) {}

  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

/// Concrete syntax:
///
///   T ::= nat | T -> T | (T)
///   M ::= n | x | succ M | pred M | if M then M else M | let x = M in M
///       | \x: T. M | fix M | coin(p/q) | err- | err+ | M M | (M)
///
/// `->` is right-associative, application left-associative, and
/// `succ`/`pred`/`fix` bind tighter than application. `#` starts a comment
/// running to the end of the line.
Term parse_term(std::string_view text);
Type parse_type(std::string_view text);

/// Inverse of `parse_term` up to alpha-equivalence. Binder names are taken
/// from the hints and primed when they would clash.
std::string render(const Term& t);

/// Renders a term with dangling indices; `outer.back()` names index 0.
std::string render_open(const Term& t, const std::vector<std::string>& outer);

}  // namespace pcf
