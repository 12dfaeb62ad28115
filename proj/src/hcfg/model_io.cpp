#include "rssforge/hcfg/model_io.hpp"

#include <json.hpp>

#include "rssforge/symbolic/text.hpp"

namespace rssforge::hcfg {

using nlohmann::json;

namespace {

json pattern_json(const TuplePattern& p) {
  json clauses = json::array();
  for (const auto& clause : p.any_of) {
    json c = json::object();
    for (const auto& [comp, loc] : clause) c[comp] = loc;
    clauses.push_back(std::move(c));
  }
  return json{{"any_of", clauses}};
}

json pairs_json(const std::vector<std::pair<Var, Term>>& pairs) {
  json out = json::array();
  for (const auto& [v, rhs] : pairs) out.push_back(json::array({v.name(), symbolic::to_text(rhs)}));
  return out;
}

json hints_json(const std::vector<HintRule>& hints) {
  json out = json::array();
  for (const auto& h : hints) {
    out.push_back(json{{"where", pattern_json(h.where)},
                       {"hint", symbolic::to_text(h.hint)},
                       {"mode", h.strengthen ? "strengthen" : "replace"}});
  }
  return out;
}

std::vector<std::string> sorted_names(const std::set<Var>& vs) {
  std::vector<std::string> out;
  for (const auto& v : vs) out.push_back(v.name());
  return out;
}

// Field access with the JSON path in every error message.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {}

  const json& at(const std::string& key) const {
    if (!j_.is_object()) fail("expected an object");
    auto it = j_.find(key);
    if (it == j_.end()) fail("missing field " + key);
    return *it;
  }
  bool has(const std::string& key) const { return j_.is_object() && j_.contains(key); }
  Reader child(const std::string& key) const { return Reader(at(key), path_ + "." + key); }
  Reader item(std::size_t i) const { return Reader(j_.at(i), path_ + "[" + std::to_string(i) + "]"); }
  std::size_t size() const {
    if (!j_.is_array()) fail("expected an array");
    return j_.size();
  }
  std::string str() const {
    if (!j_.is_string()) fail("expected a string");
    return j_.get<std::string>();
  }
  bool boolean() const {
    if (!j_.is_boolean()) fail("expected a boolean");
    return j_.get<bool>();
  }
  Term term() const {
    try {
      return symbolic::parse_term(str());
    } catch (const symbolic::ParseError& e) {
      fail(e.what());
    }
  }
  Assertion assertion() const {
    try {
      return symbolic::parse_assertion(str());
    } catch (const symbolic::ParseError& e) {
      fail(e.what());
    }
  }
  std::vector<std::pair<Var, Term>> pairs() const {
    std::vector<std::pair<Var, Term>> out;
    for (std::size_t i = 0; i < size(); ++i) {
      Reader p = item(i);
      if (p.size() != 2) p.fail("expected a [variable, term] pair");
      out.emplace_back(Var(p.item(0).str()), p.item(1).term());
    }
    return out;
  }
  TuplePattern pattern() const {
    TuplePattern p;
    Reader clauses = child("any_of");
    for (std::size_t i = 0; i < clauses.size(); ++i) {
      Reader c = clauses.item(i);
      if (!c.j_.is_object()) c.fail("expected an object");
      std::map<std::string, std::string> clause;
      for (const auto& [comp, loc] : c.j_.items()) clause[comp] = Reader(loc, c.path_ + "." + comp).str();
      p.any_of.push_back(std::move(clause));
    }
    return p;
  }
  [[noreturn]] void fail(const std::string& msg) const { throw ModelError(path_ + ": " + msg); }

 private:
  const json& j_;
  std::string path_;
};

std::vector<HintRule> read_hints(const Reader& r) {
  std::vector<HintRule> out;
  for (std::size_t i = 0; i < r.size(); ++i) {
    Reader h = r.item(i);
    bool strengthen = false;
    if (h.has("mode")) {
      std::string mode = h.child("mode").str();
      if (mode != "replace" && mode != "strengthen") h.child("mode").fail("expected \"replace\" or \"strengthen\"");
      strengthen = mode == "strengthen";
    }
    out.push_back(HintRule{h.child("where").pattern(), h.child("hint").assertion(), strengthen});
  }
  return out;
}

json parse_json(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ModelError("malformed JSON at byte " + std::to_string(e.byte) + ": " + e.what());
  }
}

}  // namespace

std::string to_json(const ModelDocument& doc) {
  json comps = json::array();
  for (const auto& c : doc.network.components) {
    json locs = json::array();
    for (const auto& l : c.locations) locs.push_back(json{{"name", l.name}, {"flow", pairs_json(l.flow)}});
    json edges = json::array();
    for (const auto& e : c.edges) {
      edges.push_back(json{{"from", c.locations.at(e.from).name},
                           {"to", c.locations.at(e.to).name},
                           {"event", e.event},
                           {"guard", symbolic::to_text(e.guard)},
                           {"assign", pairs_json(e.assign)}});
    }
    comps.push_back(json{{"name", c.name},
                         {"open", c.open},
                         {"variables", sorted_names(c.variables)},
                         {"events", std::vector<std::string>(c.events.begin(), c.events.end())},
                         {"locations", locs},
                         {"init", c.locations.empty() ? std::string() : c.locations.at(c.init).name},
                         {"init_assign", pairs_json(c.init_assign)},
                         {"edges", edges}});
  }
  json j{{"name", doc.name},
         {"components", comps},
         {"final", pattern_json(doc.final)},
         {"unsafe", pattern_json(doc.unsafe)},
         {"safety", symbolic::to_text(doc.safety)},
         {"hints", hints_json(doc.hints)}};
  return j.dump(2) + "\n";
}

ModelDocument model_from_json(std::string_view text) {
  json j = parse_json(text);
  Reader root(j, "$");
  ModelDocument doc;
  doc.name = root.child("name").str();
  Reader comps = root.child("components");
  for (std::size_t i = 0; i < comps.size(); ++i) {
    Reader c = comps.item(i);
    Hcfg g;
    g.name = c.child("name").str();
    g.open = c.has("open") ? c.child("open").boolean() : true;
    Reader vars = c.child("variables");
    for (std::size_t k = 0; k < vars.size(); ++k) g.variables.insert(Var(vars.item(k).str()));
    Reader evs = c.child("events");
    for (std::size_t k = 0; k < evs.size(); ++k) g.events.insert(evs.item(k).str());
    Reader locs = c.child("locations");
    for (std::size_t k = 0; k < locs.size(); ++k) {
      Reader l = locs.item(k);
      g.add_location(l.child("name").str(), l.child("flow").pairs());
    }
    auto loc = [&](const Reader& r) {
      auto id = g.find(r.str());
      if (!id) r.fail("unknown location " + r.str());
      return *id;
    };
    g.init = loc(c.child("init"));
    g.init_assign = c.child("init_assign").pairs();
    Reader edges = c.child("edges");
    for (std::size_t k = 0; k < edges.size(); ++k) {
      Reader e = edges.item(k);
      std::string event = e.child("event").str();
      if (!g.events.contains(event)) e.fail("event " + event + " is not declared");
      g.add_edge(loc(e.child("from")), loc(e.child("to")), event, e.child("guard").assertion(),
                 e.has("assign") ? e.child("assign").pairs() : AssignList{});
    }
    doc.network.components.push_back(std::move(g));
  }
  doc.final = root.child("final").pattern();
  doc.unsafe = root.has("unsafe") ? root.child("unsafe").pattern() : TuplePattern{};
  doc.safety = root.has("safety") ? root.child("safety").assertion() : Assertion::top();
  if (root.has("hints")) doc.hints = read_hints(root.child("hints"));
  try {
    doc.final.check(doc.network);
    doc.unsafe.check(doc.network);
    for (const auto& h : doc.hints) h.where.check(doc.network);
  } catch (const std::invalid_argument& e) {
    throw ModelError(std::string("$: ") + e.what());
  }
  return doc;
}

std::string hints_to_json(const std::vector<HintRule>& hints) { return json{{"hints", hints_json(hints)}}.dump(2) + "\n"; }

std::vector<HintRule> hints_from_json(std::string_view text) {
  json j = parse_json(text);
  return read_hints(Reader(j, "$").child("hints"));
}

}  // namespace rssforge::hcfg
