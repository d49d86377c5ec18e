#pragma once

#include <gmpxx.h>

#include <stdexcept>
#include <string>
#include <string_view>

namespace tarski {

using Rational = mpq_class;
using BigInt = mpz_class;

/// Parses "p/q", "p" or "-p/q". The result is canonicalized.
Rational parse_rational(std::string_view text);

/// "p/q" form, or "p" when the denominator is 1.
std::string to_string(const Rational& q);

inline bool is_zero(const Rational& q) { return sgn(q) == 0; }

/// Exact square root when q is the square of a rational.
bool rational_sqrt(const Rational& q, Rational& root);

}  // namespace tarski
