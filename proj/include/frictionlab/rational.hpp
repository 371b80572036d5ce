#pragma once

#include <boost/multiprecision/gmp.hpp>
#include <boost/multiprecision/eigen.hpp>

#include <optional>
#include <stdexcept>
#include <string>

namespace frictionlab {

// Exact scalar used everywhere in the engine. GMP-backed, always canonical
// (reduced, positive denominator). There is no floating point anywhere.
using Rational = boost::multiprecision::mpq_rational;
using Integer = boost::multiprecision::mpz_int;

struct input_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raised when an exact invariant the theory guarantees fails at runtime;
// always indicates an engine bug, never bad user input.
struct internal_error : std::logic_error {
  using std::logic_error::logic_error;
};

inline Integer numer(const Rational& r) { return boost::multiprecision::numerator(r); }
inline Integer denom(const Rational& r) { return boost::multiprecision::denominator(r); }

inline std::string to_string(const Rational& r) { return r.str(); }

// Bits needed to write numerator and denominator; drives the shrink
// resolution bound of the no-arbitrage test.
std::size_t bit_size(const Rational& r);

// Accepts "p/q", plain integers, and finite decimal strings ("3.5", "-0.25");
// all are converted exactly.
Rational parse_rational(const std::string& text);

// k-digit fixed-point rendering (round half away from zero). Never replaces
// the exact value in reports, only accompanies it.
std::string decimal_string(const Rational& r, int digits);

}  // namespace frictionlab
