#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include "rssforge/symbolic/assertion.hpp"

namespace rssforge::symbolic {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : std::runtime_error(what + " at offset " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

// Canonical prefix form. Terms print as `(poly (c (x e) ...) ...)`, atoms as
// `(<= (poly ...) 0)`, connectives as `(and ...)`, `(or ...)`, `(not A)`,
// `(=> A B)`, quantifiers as `(exists (T) A)` / `(forall (u) A)`.
std::string to_text(const Term& t);
std::string to_text(const Assertion& a);

// Accepts the canonical form plus hand-written prefix arithmetic:
// numerals, identifiers, `(+ ...)`, `(- a)`, `(- a b ...)`, `(* ...)`,
// `(/ a c)` with c constant, `(^ a n)`, and relations `= != <= < >= >`.
Term parse_term(std::string_view text);
Assertion parse_assertion(std::string_view text);

// Infix rendering for humans, e.g. `x_SV - 2*t_SV <= 0`.
std::string to_infix(const Term& t);
std::string to_infix(const Assertion& a);

}  // namespace rssforge::symbolic
