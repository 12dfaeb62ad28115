#include <json.hpp>
#include <stdexcept>

#include "rssforge/program/program.hpp"
#include "rssforge/symbolic/text.hpp"

namespace rssforge::program {

using nlohmann::json;

namespace {

json encode(const HybridProgram& p) {
  switch (p.kind()) {
    case ProgramKind::kSkip: return json{{"kind", "skip"}};
    case ProgramKind::kSeq: return json{{"kind", "seq"}, {"first", encode(p.first())}, {"second", encode(p.second())}};
    case ProgramKind::kAssign:
      return json{{"kind", "assign"}, {"var", p.target().name()}, {"value", symbolic::to_text(p.value())}};
    case ProgramKind::kIf:
      return json{{"kind", "if"},
                  {"guard", symbolic::to_text(p.guard())},
                  {"then", encode(p.first())},
                  {"else", encode(p.second())}};
    case ProgramKind::kWhile:
      return json{{"kind", "while"}, {"guard", symbolic::to_text(p.guard())}, {"body", encode(p.first())}};
    case ProgramKind::kDWhile: {
      json ode = json::array();
      for (const auto& [x, rhs] : p.ode()) ode.push_back(json::array({x.name(), symbolic::to_text(rhs)}));
      return json{{"kind", "dwhile"}, {"guard", symbolic::to_text(p.guard())}, {"ode", ode}};
    }
  }
  throw std::logic_error("unknown program kind");
}

HybridProgram decode(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "skip") return HybridProgram::skip();
  if (kind == "seq") return HybridProgram::seq(decode(j.at("first")), decode(j.at("second")));
  if (kind == "assign") {
    return HybridProgram::assign(Var(j.at("var").get<std::string>()),
                                 symbolic::parse_term(j.at("value").get<std::string>()));
  }
  if (kind == "if") {
    return HybridProgram::if_then_else(symbolic::parse_assertion(j.at("guard").get<std::string>()),
                                       decode(j.at("then")), decode(j.at("else")));
  }
  if (kind == "while") {
    return HybridProgram::while_loop(symbolic::parse_assertion(j.at("guard").get<std::string>()), decode(j.at("body")));
  }
  if (kind == "dwhile") {
    Ode ode;
    for (const auto& eq : j.at("ode")) {
      ode.emplace_back(Var(eq.at(0).get<std::string>()), symbolic::parse_term(eq.at(1).get<std::string>()));
    }
    return HybridProgram::dwhile(symbolic::parse_assertion(j.at("guard").get<std::string>()), std::move(ode));
  }
  throw std::invalid_argument("unknown program kind '" + kind + "'");
}

}  // namespace

std::string program_to_json(const HybridProgram& p) { return encode(p).dump(2) + "\n"; }

HybridProgram program_from_json(std::string_view text) {
  try {
    return decode(json::parse(text));
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed program: ") + e.what());
  }
}

bool same_program(const HybridProgram& a, const HybridProgram& b) {
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case ProgramKind::kSkip: return true;
    case ProgramKind::kSeq: return same_program(a.first(), b.first()) && same_program(a.second(), b.second());
    case ProgramKind::kAssign: return a.target() == b.target() && a.value() == b.value();
    case ProgramKind::kIf:
      return a.guard() == b.guard() && same_program(a.first(), b.first()) && same_program(a.second(), b.second());
    case ProgramKind::kWhile: return a.guard() == b.guard() && same_program(a.first(), b.first());
    case ProgramKind::kDWhile: return a.guard() == b.guard() && a.ode() == b.ode();
  }
  return false;
}

}  // namespace rssforge::program
