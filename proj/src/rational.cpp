#include "frictionlab/rational.hpp"

#include <cctype>

namespace frictionlab {

std::size_t bit_size(const Rational& r) {
  const Integer n = boost::multiprecision::abs(numer(r));
  const Integer d = denom(r);
  auto bits = [](const Integer& z) -> std::size_t {
    if (z == 0) return 1;
    return mpz_sizeinbase(z.backend().data(), 2);
  };
  return bits(n) + bits(d);
}

Rational parse_rational(const std::string& text) {
  std::string s;
  for (char c : text) {
    if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
  }
  if (s.empty()) throw input_error("empty number");

  auto digits_only = [](const std::string& t) {
    if (t.empty()) return false;
    for (char c : t)
      if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    return true;
  };

  bool negative = false;
  std::size_t pos = 0;
  if (s[0] == '+' || s[0] == '-') {
    negative = s[0] == '-';
    pos = 1;
  }
  const std::string body = s.substr(pos);

  Rational value;
  if (auto slash = body.find('/'); slash != std::string::npos) {
    const std::string num = body.substr(0, slash);
    const std::string den = body.substr(slash + 1);
    if (!digits_only(num) || !digits_only(den)) throw input_error("bad rational: " + text);
    Integer d(den);
    if (d == 0) throw input_error("zero denominator: " + text);
    value = Rational(Integer(num), d);
  } else if (auto dot = body.find('.'); dot != std::string::npos) {
    const std::string whole = body.substr(0, dot);
    const std::string frac = body.substr(dot + 1);
    if ((!whole.empty() && !digits_only(whole)) || !digits_only(frac))
      throw input_error("bad decimal: " + text);
    Integer scale = 1;
    for (std::size_t i = 0; i < frac.size(); ++i) scale *= 10;
    Integer n = whole.empty() ? Integer(0) : Integer(whole);
    value = Rational(n * scale + (frac.empty() ? Integer(0) : Integer(frac)), scale);
  } else {
    if (!digits_only(body)) throw input_error("bad number: " + text);
    value = Rational(Integer(body));
  }
  return negative ? Rational(-value) : value;
}

std::string decimal_string(const Rational& r, int digits) {
  if (digits < 0) digits = 0;
  Integer scale = 1;
  for (int i = 0; i < digits; ++i) scale *= 10;
  const bool negative = r < 0;
  const Rational mag = negative ? Rational(-r) : r;
  // round half away from zero
  const Integer scaled = Integer((numer(mag) * scale * 2 + denom(mag)) / (denom(mag) * 2));
  Integer whole = scaled / scale;
  Integer frac = scaled % scale;
  std::string out = negative && scaled != 0 ? "-" : "";
  out += whole.str();
  if (digits > 0) {
    std::string f = frac.str();
    out += "." + std::string(static_cast<std::size_t>(digits) - f.size(), '0') + f;
  }
  return out;
}

}  // namespace frictionlab
