#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace pcf {

/// Exact arbitrary-precision rational. All probabilities and polynomial
/// coefficients in the library are carried as `Rational`.
using Rational = mpq_class;

class RationalParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// gmpxx does not reduce `mpq_class(p, q)` on construction, and equality
/// assumes reduced operands. Values entering the library go through this.
inline Rational canonical(Rational r) {
  r.canonicalize();
  return r;
}

/// Parses `p/q` or `n` (non-negative decimal integers only). Floats are
/// rejected to keep everything exact.
Rational parse_rational(std::string_view text);

/// Canonical `p/q` (or `n` when the denominator is 1), lowest terms.
std::string to_string(const Rational& r);

/// Always `p/q`, even for integers. Used in JSON reports.
std::string to_fraction_string(const Rational& r);

double to_double(const Rational& r);

std::size_t hash_value(const Rational& r);

}  // namespace pcf
