#include <json.hpp>

#include "rssforge/symbolic/text.hpp"
#include "rssforge/synthesis/synthesis.hpp"

namespace rssforge::synthesis {

using nlohmann::json;

namespace {

json store_json(const std::optional<Store>& s) {
  if (!s) return nullptr;
  json out = json::object();
  for (const auto& [v, x] : *s) out[v.name()] = x;
  return out;
}

}  // namespace

std::string report_to_json(const SynthesisReport& r, const hcfg::Hcfg& g) {
  auto name = [&](LocId l) { return g.locations.at(l).name; };
  json gamma = json::object();
  for (const auto& [l, a] : r.gamma) gamma[name(l)] = symbolic::to_text(a);
  json locations = json::array();
  for (LocId l : r.order) {
    const auto& st = r.stats.at(l);
    locations.push_back(json{{"name", name(l)},
                             {"source", st.source},
                             {"size", st.size},
                             {"quantified", st.quantified},
                             {"seconds", st.seconds}});
  }
  json vacuous = json::array();
  for (LocId l : r.vacuous) vacuous.push_back(name(l));
  json hints = json::array();
  for (const auto& h : r.hints) {
    hints.push_back(json{{"location", name(h.location)},
                         {"accepted", h.accepted},
                         {"verdict", smt::to_string(h.verdict)},
                         {"counterexample", store_json(h.counterexample)},
                         {"seconds", h.seconds}});
  }
  json items = json::array();
  for (const auto& ob : r.obligations.obligations) {
    items.push_back(json{{"location", name(ob.location)},
                         {"kind", to_string(ob.kind)},
                         {"verdict", smt::to_string(ob.verdict)},
                         {"syntactic", ob.syntactic},
                         {"counterexample", store_json(ob.counterexample)},
                         {"seconds", ob.seconds}});
  }
  json free = json::array();
  for (const auto& v : r.rss_condition.free_variables()) free.push_back(v.name());
  json doc{{"model", g.name},
           {"rss_condition", symbolic::to_text(r.rss_condition)},
           {"rss_condition_smtlib", smt::to_smtlib(r.rss_condition)},
           {"rss_condition_variables", free},
           {"gamma", gamma},
           {"locations", locations},
           {"vacuous", vacuous},
           {"hints", hints},
           {"warnings", r.warnings},
           {"obligations",
            json{{"discharged", r.obligations.discharged},
                 {"refuted", r.obligations.refuted},
                 {"unknown", r.obligations.unknown},
                 {"items", items}}},
           {"seconds", r.seconds},
           {"solver_queries", r.solver_queries}};
  return doc.dump(2) + "\n";
}

std::map<LocId, Assertion> gamma_from_json(std::string_view text, const hcfg::Hcfg& g) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("malformed JSON at byte " + std::to_string(e.byte));
  }
  if (!j.is_object() || !j.contains("gamma") || !j["gamma"].is_object()) {
    throw std::invalid_argument("expected an object with a \"gamma\" map");
  }
  std::map<LocId, Assertion> out;
  for (const auto& [name, text_value] : j["gamma"].items()) {
    auto l = g.find(name);
    if (!l) throw std::invalid_argument("unknown location " + name);
    if (!text_value.is_string()) throw std::invalid_argument("gamma." + name + ": expected a string");
    try {
      out[*l] = symbolic::parse_assertion(text_value.get<std::string>());
    } catch (const symbolic::ParseError& e) {
      throw std::invalid_argument("gamma." + name + ": " + e.what());
    }
  }
  return out;
}

}  // namespace rssforge::synthesis
