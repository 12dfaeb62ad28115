#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "rssforge/hcfg/hcfg.hpp"

namespace rssforge::hcfg {

// A user hint for every product location matching `where`.
struct HintRule {
  TuplePattern where;
  Assertion hint;
  // Conjoin with the computed condition instead of replacing it.
  bool strengthen = false;
};

// One network with its final and unsafe tuple sets, safety condition and
// optional hints. Assertions are stored in the canonical prefix text form.
struct ModelDocument {
  std::string name;
  Network network;
  TuplePattern final;
  TuplePattern unsafe;
  Assertion safety = Assertion::top();
  std::vector<HintRule> hints;
};

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Deterministic rendering: keys sorted, two-space indent, trailing newline.
std::string to_json(const ModelDocument& doc);

// Throws ModelError naming the offending field, or the byte offset for
// malformed JSON and assertion text.
ModelDocument model_from_json(std::string_view text);

std::string hints_to_json(const std::vector<HintRule>& hints);
std::vector<HintRule> hints_from_json(std::string_view text);

}  // namespace rssforge::hcfg
