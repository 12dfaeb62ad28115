#pragma once

#include <span>
#include <vector>

#include "rssforge/symbolic/assertion.hpp"

namespace rssforge::symbolic {

// Quantifier-free assertion lowered onto a fixed variable layout, for inner
// loops that evaluate the same guard millions of times.
class CompiledAssertion {
 public:
  CompiledAssertion() = default;
  CompiledAssertion(const Assertion& a, const std::vector<Var>& layout);

  bool operator()(std::span<const double> values) const { return eval(root_, values); }

 private:
  struct Node {
    AssertionKind kind;
    Relation rel;
    std::size_t term;  // index into terms_ for atoms
    std::vector<std::size_t> children;
  };

  std::size_t build(const Assertion& a, const std::vector<Var>& layout);
  bool eval(std::size_t n, std::span<const double> values) const;

  std::vector<Node> nodes_;
  std::vector<CompiledTerm> terms_;
  std::size_t root_ = 0;
};

// Position of v in layout; throws MissingVariable if absent.
std::size_t layout_index(const std::vector<Var>& layout, const Var& v);

}  // namespace rssforge::symbolic
