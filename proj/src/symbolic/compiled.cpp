#include "rssforge/symbolic/compiled.hpp"

#include <algorithm>

namespace rssforge::symbolic {

std::size_t layout_index(const std::vector<Var>& layout, const Var& v) {
  auto it = std::find(layout.begin(), layout.end(), v);
  if (it == layout.end()) throw MissingVariable(v);
  return static_cast<std::size_t>(it - layout.begin());
}

CompiledAssertion::CompiledAssertion(const Assertion& a, const std::vector<Var>& layout) {
  root_ = build(a, layout);
}

std::size_t CompiledAssertion::build(const Assertion& a, const std::vector<Var>& layout) {
  Node n{a.kind(), Relation::kEq, 0, {}};
  switch (a.kind()) {
    case AssertionKind::kTrue:
    case AssertionKind::kFalse: break;
    case AssertionKind::kAtom:
      n.rel = a.relation();
      n.term = terms_.size();
      terms_.emplace_back(a.term(), layout);
      break;
    case AssertionKind::kExists:
    case AssertionKind::kForall:
      throw QuantifiedAssertion("cannot compile a quantified assertion");
    default:
      for (const auto& c : a.children()) n.children.push_back(build(c, layout));
  }
  nodes_.push_back(std::move(n));
  return nodes_.size() - 1;
}

bool CompiledAssertion::eval(std::size_t i, std::span<const double> values) const {
  if (nodes_.empty()) return true;
  const Node& n = nodes_[i];
  switch (n.kind) {
    case AssertionKind::kTrue: return true;
    case AssertionKind::kFalse: return false;
    case AssertionKind::kAtom: {
      double p = terms_[n.term](values);
      switch (n.rel) {
        case Relation::kEq: return p == 0.0;
        case Relation::kLe: return p <= 0.0;
        case Relation::kLt: return p < 0.0;
        case Relation::kNe: return p != 0.0;
      }
      return false;
    }
    case AssertionKind::kAnd:
      for (auto c : n.children) {
        if (!eval(c, values)) return false;
      }
      return true;
    case AssertionKind::kOr:
      for (auto c : n.children) {
        if (eval(c, values)) return true;
      }
      return false;
    case AssertionKind::kNot: return !eval(n.children[0], values);
    case AssertionKind::kImplies: return !eval(n.children[0], values) || eval(n.children[1], values);
    default: return false;
  }
}

}  // namespace rssforge::symbolic
