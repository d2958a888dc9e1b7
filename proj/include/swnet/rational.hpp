#pragma once

#include <gmpxx.h>

#include <string>
#include <string_view>
#include <vector>

#include "swnet/vec.hpp"

namespace swnet {

/// Arbitrary-precision rational; GMP keeps it canonical (gcd 1, positive denominator).
using Rational = mpq_class;
using RatVec = std::vector<Rational>;

/// Accepts "p/q", integers, and finite decimals ("0.25", "-1.5e-2") and converts exactly.
Rational parse_rational(std::string_view text);

/// Exact binary value of a double.
Rational exact_rational(double x);

std::string to_string(const Rational& x);
double to_double(const Rational& x);

RatVec exact_rational(const Vec& x);
Vec to_double(const RatVec& x);

Rational dot(const RatVec& a, const RatVec& b);
/// Rational weights against float data (workloads).
double dot(const RatVec& xi, std::span<const double> q);

/// Lexicographic ordering used as the canonical vertex order.
bool lex_less(const RatVec& a, const RatVec& b);

}  // namespace swnet
