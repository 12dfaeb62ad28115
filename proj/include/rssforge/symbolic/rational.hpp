#pragma once

#include <gmpxx.h>

#include <string>
#include <string_view>

namespace rssforge::symbolic {

using Rational = mpq_class;

// Accepts integers ("-3"), fractions ("3/10") and decimals ("0.3", "1e-3").
// Decimals are converted exactly, so "0.3" becomes 3/10.
Rational parse_rational(std::string_view text);

// "p" for integers, "p/q" otherwise.
std::string format_rational(const Rational& q);

double to_double(const Rational& q);

// Exact rational value of a finite double.
Rational from_double(double x);

}  // namespace rssforge::symbolic
