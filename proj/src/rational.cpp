#include "swnet/rational.hpp"

#include <cctype>
#include <cmath>
#include <string>

#include "swnet/error.hpp"

namespace swnet {

namespace {

Rational parse_decimal(std::string_view text) {
  std::string digits;
  bool negative = false;
  std::size_t i = 0;
  if (i < text.size() && (text[i] == '+' || text[i] == '-')) {
    negative = text[i] == '-';
    ++i;
  }
  long frac_digits = 0;
  bool seen_point = false;
  bool any_digit = false;
  for (; i < text.size(); ++i) {
    const char c = text[i];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      digits.push_back(c);
      any_digit = true;
      if (seen_point) ++frac_digits;
    } else if (c == '.' && !seen_point) {
      seen_point = true;
    } else {
      break;
    }
  }
  long exponent = 0;
  if (i < text.size() && (text[i] == 'e' || text[i] == 'E')) {
    const std::string exp_text(text.substr(i + 1));
    std::size_t used = 0;
    try {
      exponent = std::stol(exp_text, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != exp_text.size()) {
      throw Error(ErrorCode::kInvalidArgument, "bad exponent in '" + std::string(text) + "'");
    }
    i = text.size();
  }
  if (!any_digit || i != text.size()) {
    throw Error(ErrorCode::kInvalidArgument, "not a number: '" + std::string(text) + "'");
  }
  mpz_class numerator(digits, 10);
  const long shift = exponent - frac_digits;
  mpz_class power;
  mpz_ui_pow_ui(power.get_mpz_t(), 10, static_cast<unsigned long>(std::labs(shift)));
  Rational value = shift >= 0 ? Rational(numerator * power) : Rational(numerator, power);
  value.canonicalize();
  return negative ? Rational(-value) : value;
}

}  // namespace

Rational parse_rational(std::string_view text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
  const auto slash = text.find('/');
  if (slash == std::string_view::npos) return parse_decimal(text);
  const Rational num = parse_decimal(text.substr(0, slash));
  const Rational den = parse_decimal(text.substr(slash + 1));
  if (den == 0) throw Error(ErrorCode::kInvalidArgument, "zero denominator in '" + std::string(text) + "'");
  Rational out = num / den;
  out.canonicalize();
  return out;
}

Rational exact_rational(double x) {
  if (!std::isfinite(x)) throw Error(ErrorCode::kInvalidArgument, "non-finite value");
  Rational r;
  mpq_set_d(r.get_mpq_t(), x);
  return r;
}

std::string to_string(const Rational& x) {
  if (x.get_den() == 1) return x.get_num().get_str();
  return x.get_num().get_str() + "/" + x.get_den().get_str();
}

double to_double(const Rational& x) { return x.get_d(); }

RatVec exact_rational(const Vec& x) {
  RatVec out;
  out.reserve(x.size());
  for (double v : x) out.push_back(exact_rational(v));
  return out;
}

Vec to_double(const RatVec& x) {
  Vec out;
  out.reserve(x.size());
  for (const auto& v : x) out.push_back(v.get_d());
  return out;
}

Rational dot(const RatVec& a, const RatVec& b) {
  Rational s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double dot(const RatVec& xi, std::span<const double> q) {
  double s = 0.0;
  for (std::size_t i = 0; i < xi.size(); ++i) {
    if (sgn(xi[i]) != 0) s += xi[i].get_d() * q[i];
  }
  return s;
}

bool lex_less(const RatVec& a, const RatVec& b) {
  for (std::size_t i = 0; i < a.size() && i < b.size(); ++i) {
    if (a[i] < b[i]) return true;
    if (b[i] < a[i]) return false;
  }
  return a.size() < b.size();
}

}  // namespace swnet
