// Command-line front end: derive, check, simulate, experiment, export.

#include <CLI11.hpp>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "rssforge/hcfg/hcfg.hpp"
#include "rssforge/hcfg/model_io.hpp"
#include "rssforge/scenarios/scenarios.hpp"
#include "rssforge/sim/sim.hpp"
#include "rssforge/symbolic/text.hpp"
#include "rssforge/synthesis/synthesis.hpp"

namespace fs = std::filesystem;
using namespace rssforge;
using nlohmann::json;

namespace {

constexpr int kOk = 0;
constexpr int kModelError = 1;
constexpr int kHintRejected = 2;
constexpr int kSolverFailure = 3;
constexpr int kRefuted = 4;

struct RunConfig {
  std::string scenario;
  std::string model;
  std::string solver;
  double timeout = 60.0;
  double dt = 0.001;
  double horizon = 60.0;
  double cz_length = 5.0;
  std::string out = "out";
  unsigned jobs = 1;
  std::string hints;
  std::string config;
  // Command-specific.
  std::string gamma;
  std::string condition;
  std::string grid = "full";
  double vacuity_timeout = 10.0;
  bool no_vacuity = false;
  bool no_hints = false;
  bool always_solve = false;
  double x_sv = 20, v_sv = 9, x_pov = 20, v_pov = 9, a_pov = 0;
};

struct CliError : std::runtime_error {
  CliError(int code, const std::string& what) : std::runtime_error(what), code(code) {}
  int code;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CliError(kModelError, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CliError(kModelError, "cannot write " + path.string());
  out << text;
  std::cerr << "wrote " << path.string() << "\n";
}

scenarios::IntersectionParams intersection_params(const RunConfig& c) {
  return scenarios::IntersectionParams::with_cz_length(symbolic::from_double(c.cz_length));
}

struct LoadedModel {
  hcfg::ModelDocument doc;
  hcfg::ProductHcfg product;
  bool intersection = false;
};

LoadedModel load_model(const RunConfig& c) {
  if (c.scenario.empty() == c.model.empty()) throw CliError(kModelError, "give exactly one of --scenario and --model");
  LoadedModel m;
  try {
    if (c.scenario == "intersection") {
      m.doc = scenarios::build_intersection(intersection_params(c));
      m.intersection = true;
    } else if (c.scenario == "oneway") {
      m.doc = scenarios::build_oneway();
    } else if (!c.scenario.empty()) {
      throw CliError(kModelError, "unknown scenario '" + c.scenario + "' (intersection, oneway)");
    } else {
      m.doc = hcfg::model_from_json(read_file(c.model));
    }
    if (!c.hints.empty()) m.doc.hints = hcfg::hints_from_json(read_file(c.hints));
    if (c.no_hints) m.doc.hints.clear();
    m.product = hcfg::prune_unreachable(hcfg::synchronized_product(m.doc.network, m.doc.final));
  } catch (const hcfg::ModelError& e) {
    throw CliError(kModelError, std::string("model error: ") + e.what());
  } catch (const hcfg::IncompatibleNetwork& e) {
    std::string why = "incompatible network:";
    for (const auto& v : e.report().violations) why += "\n  " + v;
    throw CliError(kModelError, why);
  } catch (const std::invalid_argument& e) {
    throw CliError(kModelError, std::string("model error: ") + e.what());
  }
  return m;
}

smt::SolverConfig solver_config(const RunConfig& c) {
  smt::SolverConfig s = smt::SolverConfig::from_environment();
  if (!c.solver.empty()) s.command = smt::SolverConfig::split_command(c.solver);
  s.timeout_seconds = c.timeout;
  return s;
}

program::SimCfg sim_config(const RunConfig& c) {
  program::SimCfg s{.dt = c.dt, .horizon = c.horizon, .record_trace = false};
  try {
    s.validate();
  } catch (const std::invalid_argument& e) {
    throw CliError(kModelError, e.what());
  }
  return s;
}

// Initial stores of the intersection grid, used as reachability witnesses.
std::vector<symbolic::Store> grid_starts(const hcfg::Hcfg& g) {
  std::vector<symbolic::Store> starts;
  for (const auto& inst : sim::GridSpec::full().instances()) {
    symbolic::Store s;
    for (const auto& v : g.variables) s[v] = 0.0;
    for (const auto& [v, q] : inst.lane_store()) s[v] = symbolic::to_double(q);
    starts.push_back(std::move(s));
  }
  return starts;
}

int cmd_derive(const RunConfig& c) {
  auto m = load_model(c);
  smt::SolverPool pool(solver_config(c), std::max(1u, c.jobs));
  auto hints = synthesis::expand_hints(m.product, m.doc.hints);
  auto unsafe = m.product.select(m.doc.unsafe);
  synthesis::SynthesisOptions opt;
  opt.hint_timeout_seconds = c.timeout;
  auto report = synthesis::annotate(m.product.graph, m.doc.safety, unsafe, hints, &pool, opt);
  std::cerr << "synthesized " << report.gamma.size() << " annotations in " << report.seconds << " s\n";

  json vacuity{{"checked", false}};
  if (!c.no_vacuity) {
    auto t0 = std::chrono::steady_clock::now();
    synthesis::VacuityOptions vo{.timeout_seconds = c.vacuity_timeout};
    if (m.intersection) vo.witnesses = synthesis::visited_locations(m.product.graph, grid_starts(m.product.graph), sim_config(c));
    auto vac = synthesis::detect_vacuous(m.product.graph, report.gamma, pool, vo);
    report.vacuous = vac.vacuous;
    json reasons = json::object();
    for (const auto& [l, why] : vac.reason) reasons[m.product.graph.locations[l].name] = why;
    json undetermined = json::array();
    for (auto l : vac.undetermined) undetermined.push_back(m.product.graph.locations[l].name);
    json components = json::array();
    for (const auto& [comp, loc] : synthesis::vacuous_component_locations(m.product, vac)) {
      components.push_back(json{{"component", comp}, {"location", loc}});
    }
    vacuity = json{{"checked", true},
                   {"reasons", reasons},
                   {"undetermined", undetermined},
                   {"component_locations", components},
                   {"seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()}};
    std::cerr << "vacuous: " << vac.vacuous.size() << " tuples, " << vac.undetermined.size() << " undetermined\n";
  }

  json simultaneous = json::array();
  if (m.intersection) {
    const auto& g = m.product.graph;
    for (const auto& x : synthesis::simultaneous_exits(g, grid_starts(g), sim_config(c))) {
      json edges = json::array();
      for (auto e : x.edges) edges.push_back(g.edges[e].event + " -> " + g.locations[g.edges[e].to].name);
      json start = json::object();
      for (const auto& [v, val] : x.start) start[v.name()] = val;
      simultaneous.push_back(json{{"location", g.locations[x.location].name}, {"edges", edges}, {"time", x.time},
                                  {"start", start}});
    }
    if (!simultaneous.empty()) std::cerr << "simultaneous guards at " << simultaneous.size() << " locations\n";
  }

  fs::path out(c.out);
  auto doc = json::parse(synthesis::report_to_json(report, m.product.graph));
  doc["simultaneous_guards"] = simultaneous;
  doc["model"] = m.doc.name;
  doc["vacuity"] = vacuity;
  write_file(out / "report.json", doc.dump(2) + "\n");
  write_file(out / "rss_condition.txt", symbolic::to_text(report.rss_condition) + "\n");
  write_file(out / "rss_condition.smt2", doc["rss_condition_smtlib"].get<std::string>());
  for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";
  for (const auto& h : report.hints) {
    if (!h.accepted) {
      std::cerr << "hint rejected at " << m.product.graph.locations[h.location].name << " ("
                << smt::to_string(h.verdict) << ")\n";
      return kHintRejected;
    }
  }
  return kOk;
}

int cmd_check(const RunConfig& c) {
  if (c.gamma.empty()) throw CliError(kModelError, "check needs --gamma <report.json>");
  auto m = load_model(c);
  std::map<hcfg::LocId, symbolic::Assertion> gamma;
  try {
    gamma = synthesis::gamma_from_json(read_file(c.gamma), m.product.graph);
  } catch (const std::invalid_argument& e) {
    throw CliError(kModelError, std::string("annotation file: ") + e.what());
  }
  smt::SolverPool pool(solver_config(c), std::max(1u, c.jobs));
  synthesis::ObligationReport rep;
  try {
    rep = synthesis::check_annotation(m.product.graph, gamma, m.doc.safety, m.product.select(m.doc.unsafe), pool,
                                      c.timeout, c.always_solve);
  } catch (const std::out_of_range& e) {
    throw CliError(kModelError, std::string("missing location: ") + e.what());
  }
  json items = json::array();
  for (const auto& o : rep.obligations) {
    json item{{"location", m.product.graph.locations[o.location].name},
              {"kind", synthesis::to_string(o.kind)},
              {"verdict", smt::to_string(o.verdict)},
              {"syntactic", o.syntactic},
              {"seconds", o.seconds}};
    if (o.counterexample) {
      json cex = json::object();
      for (const auto& [v, x] : *o.counterexample) cex[v.name()] = x;
      item["counterexample"] = cex;
      std::cerr << "refuted " << item["kind"].get<std::string>() << " at " << item["location"].get<std::string>()
                << ": " << cex.dump() << "\n";
    }
    items.push_back(item);
  }
  json doc{{"discharged", rep.discharged}, {"refuted", rep.refuted}, {"unknown", rep.unknown}, {"items", items}};
  write_file(fs::path(c.out) / "obligations.json", doc.dump(2) + "\n");
  std::cerr << rep.discharged << " discharged, " << rep.refuted << " refuted, " << rep.unknown << " unknown\n";
  if (rep.refuted > 0) return kRefuted;
  if (rep.unknown > 0) return kSolverFailure;
  return kOk;
}

symbolic::Assertion read_condition(const std::string& path) {
  std::string text = read_file(path);
  try {
    auto j = json::parse(text, nullptr, false);
    if (!j.is_discarded() && j.is_object()) return symbolic::parse_assertion(j.at("rss_condition").get<std::string>());
    return symbolic::parse_assertion(text);
  } catch (const std::exception& e) {
    throw CliError(kModelError, "condition file " + path + ": " + e.what());
  }
}

symbolic::Assertion condition_for(const RunConfig& c, const LoadedModel& m) {
  if (!c.condition.empty()) return read_condition(c.condition);
  auto hints = synthesis::expand_hints(m.product, m.doc.hints);
  return synthesis::annotate(m.product.graph, m.doc.safety, m.product.select(m.doc.unsafe), hints, nullptr)
      .rss_condition;
}

int cmd_simulate(const RunConfig& c) {
  RunConfig cc = c;
  if (cc.scenario.empty() && cc.model.empty()) cc.scenario = "intersection";
  if (cc.scenario != "intersection") throw CliError(kModelError, "simulate supports the intersection scenario");
  auto m = load_model(cc);
  auto cfg = sim_config(cc);
  cfg.record_trace = true;
  sim::Instance inst{cc.x_sv, cc.v_sv, cc.x_pov, cc.v_pov};
  auto o = sim::simulate(inst, sim::Behavior{cc.a_pov}, intersection_params(cc), cfg);
  smt::SolverPool pool(solver_config(cc), 1);
  auto compliance = sim::ConditionEvaluator(condition_for(cc, m), &pool, cc.timeout).evaluate(inst);
  std::ostringstream csv;
  csv << "t,x_sv,v_sv,x_pov,v_pov\n";
  csv.precision(17);
  for (const auto& s : o.trace) csv << s.t << ',' << s.x_sv << ',' << s.v_sv << ',' << s.x_pov << ',' << s.v_pov << '\n';
  write_file(fs::path(cc.out) / "trace.csv", csv.str());
  json doc{{"collision", o.collision},
           {"t_collision", o.t_collision ? json(*o.t_collision) : json(nullptr)},
           {"t_sv_enter", o.t_sv_enter ? json(*o.t_sv_enter) : json(nullptr)},
           {"t_end", o.t_end},
           {"horizon_exceeded", o.horizon_exceeded},
           {"compliance", sim::to_string(compliance)}};
  std::cout << doc.dump(2) << "\n";
  return kOk;
}

int cmd_experiment(const RunConfig& c) {
  RunConfig cc = c;
  if (cc.scenario.empty() && cc.model.empty()) cc.scenario = "intersection";
  if (cc.scenario != "intersection") throw CliError(kModelError, "experiment supports the intersection scenario");
  auto m = load_model(cc);
  sim::GridSpec grid;
  if (cc.grid == "full") {
    grid = sim::GridSpec::full();
  } else if (cc.grid == "small") {
    grid = sim::GridSpec::small();
  } else {
    throw CliError(kModelError, "unknown grid '" + cc.grid + "' (full, small)");
  }
  auto condition = condition_for(cc, m);
  smt::SolverPool pool(solver_config(cc), std::max(1u, cc.jobs));
  auto ip = intersection_params(cc);
  auto cfg = sim_config(cc);
  auto t0 = std::chrono::steady_clock::now();
  sim::GridResult r;
  try {
    r = sim::run_grid(condition, grid, ip, cfg, &pool, std::max(1u, cc.jobs));
  } catch (const std::invalid_argument& e) {
    throw CliError(kModelError, e.what());
  }
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  fs::path out(cc.out);
  std::ostringstream csv;
  sim::write_csv(csv, r);
  write_file(out / "results.csv", csv.str());
  write_file(out / "summary.json", sim::summary_json(r, ip, cfg));
  std::ostringstream hist;
  hist << "unsafe_runs,instances\n";
  for (std::size_t k = 1; k < r.histogram.size(); ++k) hist << k << ',' << r.histogram[k] << '\n';
  write_file(out / "histogram.csv", hist.str());
  const auto& mx = r.matrix;
  std::cout << "instances " << r.records.size() << ", simulations " << r.simulations << "\n"
            << "                 safe  unsafe\n"
            << "complying     " << std::setw(7) << mx.complying_safe << std::setw(8) << mx.complying_unsafe << "\n"
            << "non-complying " << std::setw(7) << mx.noncomplying_safe << std::setw(8) << mx.noncomplying_unsafe << "\n"
            << "indeterminate " << std::setw(7) << mx.indeterminate_safe << std::setw(8) << mx.indeterminate_unsafe
            << "\n"
            << "precision " << mx.precision() << ", recall " << mx.recall() << ", " << secs << " s\n";
  return mx.indeterminate_safe + mx.indeterminate_unsafe > 0 ? kSolverFailure : kOk;
}

int cmd_export(const RunConfig& c) {
  auto m = load_model(c);
  fs::path out(c.out);
  const std::string& name = m.doc.name;
  write_file(out / (name + ".model.json"), hcfg::to_json(m.doc));
  write_file(out / (name + ".dot"), hcfg::export_dot(m.product.graph));
  auto tr = hcfg::translate_to_program(m.product.graph);
  write_file(out / (name + ".program.json"), program::program_to_json(tr.program));
  write_file(out / (name + ".program.txt"), tr.program.to_string() + "\n");
  if (!m.doc.hints.empty()) write_file(out / (name + ".hints.json"), hcfg::hints_to_json(m.doc.hints));
  return kOk;
}

// Values from a JSON config file fill every option not given on the command line.
void apply_config(CLI::App& app, const std::string& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw CliError(kModelError, "config " + path + ": " + e.what());
  }
  if (!j.is_object()) throw CliError(kModelError, "config " + path + ": expected an object");
  std::vector<CLI::App*> apps{&app};
  for (auto* sub : app.get_subcommands()) apps.push_back(sub);
  for (const auto& [key, value] : j.items()) {
    CLI::Option* opt = nullptr;
    for (auto* a : apps) {
      try {
        opt = a->get_option("--" + key);
        break;
      } catch (const CLI::OptionNotFound&) {
      }
    }
    if (!opt) throw CliError(kModelError, "config " + path + ": unknown key '" + key + "'");
    if (opt->count() > 0) continue;
    std::string text = value.is_string() ? value.get<std::string>() : value.dump();
    if (opt->get_type_size() == 0) {
      if (value == true) opt->add_result("true");
    } else {
      opt->add_result(text);
    }
    opt->run_callback();
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"RSS-condition synthesis over hybrid control flow graphs"};
  app.require_subcommand(1);
  RunConfig c;
  auto common = [&](CLI::App* a) {
    a->add_option("--scenario", c.scenario, "built-in scenario: intersection or oneway");
    a->add_option("--model", c.model, "model JSON file");
    a->add_option("--solver", c.solver, "solver command line (default z3 -in or $RSSFORGE_SMT_SOLVER)");
    a->add_option("--timeout", c.timeout, "solver timeout per query in seconds")->check(CLI::PositiveNumber);
    a->add_option("--dt", c.dt, "integration step in seconds")->check(CLI::PositiveNumber);
    a->add_option("--horizon", c.horizon, "simulation horizon in seconds")->check(CLI::PositiveNumber);
    a->add_option("--cz-length", c.cz_length, "collision zone length in metres")->check(CLI::PositiveNumber);
    a->add_option("--out", c.out, "output directory");
    a->add_option("--jobs", c.jobs, "worker count")->check(CLI::PositiveNumber);
    a->add_option("--hints", c.hints, "hint file replacing the model's hints");
    a->add_option("--config", c.config, "JSON file with option values; flags win");
  };
  auto* derive = app.add_subcommand("derive", "synthesize the RSS condition and annotations");
  common(derive);
  derive->add_option("--vacuity-timeout", c.vacuity_timeout, "solver timeout for vacuity queries")
      ->check(CLI::PositiveNumber);
  derive->add_flag("--no-vacuity", c.no_vacuity, "skip vacuity detection");
  derive->add_flag("--no-hints", c.no_hints, "ignore the model's hints");
  auto* check = app.add_subcommand("check", "re-verify an annotation file");
  common(check);
  check->add_option("--gamma", c.gamma, "report.json from derive")->required();
  check->add_flag("--always-solve", c.always_solve, "send every clause to the solver");
  auto* simulate = app.add_subcommand("simulate", "simulate one intersection instance");
  common(simulate);
  simulate->add_option("--condition", c.condition, "condition file (report.json or assertion text)");
  simulate->add_option("--x-sv", c.x_sv, "SV distance to the crossing (m)");
  simulate->add_option("--v-sv", c.v_sv, "SV speed (m/s)");
  simulate->add_option("--x-pov", c.x_pov, "POV distance to the crossing (m)");
  simulate->add_option("--v-pov", c.v_pov, "POV speed (m/s)");
  simulate->add_option("--a-pov", c.a_pov, "POV acceleration before it reacts (m/s^2)");
  auto* experiment = app.add_subcommand("experiment", "run the instance grid against a condition");
  common(experiment);
  experiment->add_option("--condition", c.condition, "condition file (report.json or assertion text)");
  experiment->add_option("--grid", c.grid, "full or small");
  auto* exp = app.add_subcommand("export", "write DOT, translated program and model JSON");
  common(exp);

  try {
    app.parse(argc, argv);
    if (!c.config.empty()) apply_config(app, c.config);
    if (*derive) return cmd_derive(c);
    if (*check) return cmd_check(c);
    if (*simulate) return cmd_simulate(c);
    if (*experiment) return cmd_experiment(c);
    if (*exp) return cmd_export(c);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kModelError;
  } catch (const CliError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code;
  } catch (const smt::SolverError& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return kSolverFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kModelError;
  }
  return kOk;
}
