#include <atomic>
#include <iomanip>
#include <istream>
#include <json.hpp>
#include <ostream>
#include <sstream>
#include <thread>

#include "rssforge/sim/sim.hpp"
#include "rssforge/synthesis/synthesis.hpp"

namespace rssforge::sim {

using nlohmann::json;

std::string to_string(Compliance c) {
  switch (c) {
    case Compliance::kComplying: return "complying";
    case Compliance::kNonComplying: return "non-complying";
    case Compliance::kIndeterminate: return "indeterminate";
  }
  return "?";
}

ConditionEvaluator::ConditionEvaluator(Assertion condition, smt::SolverPool* pool, double timeout_seconds)
    : condition_(std::move(condition)), pool_(pool), timeout_(timeout_seconds) {
  using namespace scenarios::vars;
  const std::set<symbolic::Var> allowed{x_sv, v_sv, x_pov, v_pov};
  for (const auto& v : condition_.free_variables()) {
    if (!allowed.contains(v)) throw std::invalid_argument("condition mentions " + v.name() + ", not an instance variable");
  }
}

Compliance ConditionEvaluator::evaluate(const Instance& inst) const {
  Assertion closed = synthesis::instantiate(condition_, inst.lane_store());
  if (closed.is_true()) return Compliance::kComplying;
  if (closed.is_false()) return Compliance::kNonComplying;
  if (auto d = synthesis::decide_by_intervals(closed)) return *d ? Compliance::kComplying : Compliance::kNonComplying;
  if (!pool_) return Compliance::kIndeterminate;
  auto v = pool_->check_sat(synthesis::skolemize_existentials(closed), timeout_);
  if (v.is(smt::VerdictKind::kSat)) return Compliance::kComplying;
  if (v.is(smt::VerdictKind::kUnsat)) return Compliance::kNonComplying;
  return Compliance::kIndeterminate;
}

Compliance evaluate_condition(const Instance& inst, const Assertion& a, smt::SolverPool* pool) {
  return ConditionEvaluator(a, pool).evaluate(inst);
}

namespace {

std::vector<double> range(double lo, double hi, double step) {
  std::vector<double> out;
  for (int i = 0; lo + i * step <= hi + 1e-9; ++i) out.push_back(lo + i * step);
  return out;
}

template <typename F>
void parallel_for(std::size_t n, unsigned jobs, F&& body) {
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (jobs == 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> workers;
  std::exception_ptr error;
  std::mutex error_mu;
  for (unsigned j = 0; j < jobs; ++j) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(error_mu);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& w : workers) w.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace

GridSpec GridSpec::full() {
  GridSpec g;
  g.x_sv = g.x_pov = range(5, 45, 5);
  g.v_sv = g.v_pov = range(3, 18, 3);
  g.behaviors = range(-5, 2, 1);
  return g;
}

GridSpec GridSpec::small() {
  GridSpec g;
  g.x_sv = g.x_pov = {10, 40};
  g.v_sv = g.v_pov = {6, 15};
  g.behaviors = range(-5, 2, 1);
  return g;
}

std::vector<Instance> GridSpec::instances() const {
  std::vector<Instance> out;
  for (double xs : x_sv) {
    for (double vs : v_sv) {
      for (double xp : x_pov) {
        for (double vp : v_pov) out.push_back(Instance{xs, vs, xp, vp});
      }
    }
  }
  return out;
}

std::size_t ConfusionMatrix::total() const {
  return complying_safe + complying_unsafe + noncomplying_safe + noncomplying_unsafe + indeterminate_safe +
         indeterminate_unsafe;
}

double ConfusionMatrix::precision() const {
  std::size_t flagged = noncomplying_safe + noncomplying_unsafe;
  return flagged == 0 ? 1.0 : static_cast<double>(noncomplying_unsafe) / static_cast<double>(flagged);
}

double ConfusionMatrix::recall() const {
  std::size_t unsafe = complying_unsafe + noncomplying_unsafe + indeterminate_unsafe;
  return unsafe == 0 ? 1.0 : static_cast<double>(noncomplying_unsafe) / static_cast<double>(unsafe);
}

ConfusionMatrix tabulate(const std::vector<InstanceRecord>& records) {
  ConfusionMatrix m;
  for (const auto& r : records) {
    bool safe = r.safe();
    switch (r.compliance) {
      case Compliance::kComplying: ++(safe ? m.complying_safe : m.complying_unsafe); break;
      case Compliance::kNonComplying: ++(safe ? m.noncomplying_safe : m.noncomplying_unsafe); break;
      case Compliance::kIndeterminate: ++(safe ? m.indeterminate_safe : m.indeterminate_unsafe); break;
    }
  }
  return m;
}

GridResult run_grid(const std::vector<Compliance>& compliance, const GridSpec& grid, const IntersectionParams& p,
                    const program::SimCfg& cfg, unsigned jobs) {
  auto instances = grid.instances();
  if (compliance.size() != instances.size()) throw std::invalid_argument("one compliance value per instance needed");
  program::SimCfg quiet = cfg;
  quiet.record_trace = false;
  GridResult r;
  r.behaviors = grid.behaviors;
  r.records.resize(instances.size());
  parallel_for(instances.size(), jobs, [&](std::size_t i) {
    InstanceRecord rec{instances[i], compliance[i], {}, 0};
    for (double a : grid.behaviors) {
      rec.outcomes.push_back(simulate(instances[i], Behavior{a}, p, quiet));
      if (rec.outcomes.back().collision) ++rec.unsafe_runs;
    }
    r.records[i] = std::move(rec);
  });
  r.matrix = tabulate(r.records);
  r.histogram.assign(grid.behaviors.size() + 1, 0);
  for (const auto& rec : r.records) {
    r.simulations += rec.outcomes.size();
    for (const auto& o : rec.outcomes) r.horizon_exceeded += o.horizon_exceeded;
    if (rec.compliance == Compliance::kNonComplying && !rec.safe()) ++r.histogram[rec.unsafe_runs];
  }
  return r;
}

GridResult run_grid(const Assertion& condition, const GridSpec& grid, const IntersectionParams& p,
                    const program::SimCfg& cfg, smt::SolverPool* pool, unsigned jobs) {
  ConditionEvaluator eval(condition, pool);
  auto instances = grid.instances();
  std::vector<Compliance> compliance(instances.size());
  parallel_for(instances.size(), jobs, [&](std::size_t i) { compliance[i] = eval.evaluate(instances[i]); });
  return run_grid(compliance, grid, p, cfg, jobs);
}

void write_csv(std::ostream& os, const GridResult& r) {
  os << "x_sv,v_sv,x_pov,v_pov,a_pov,collision,t_collision\n";
  os << std::setprecision(17);
  for (const auto& rec : r.records) {
    for (std::size_t k = 0; k < rec.outcomes.size(); ++k) {
      const auto& o = rec.outcomes[k];
      os << rec.inst.x_sv << ',' << rec.inst.v_sv << ',' << rec.inst.x_pov << ',' << rec.inst.v_pov << ','
         << r.behaviors.at(k) << ',' << (o.collision ? 1 : 0) << ',';
      if (o.t_collision) os << *o.t_collision;
      os << '\n';
    }
  }
}

std::vector<CsvRow> read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "x_sv,v_sv,x_pov,v_pov,a_pov,collision,t_collision") {
    throw std::invalid_argument("unexpected CSV header");
  }
  std::vector<CsvRow> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() == 6) cells.emplace_back();
    if (cells.size() != 7) throw std::invalid_argument("malformed CSV row: " + line);
    CsvRow row{std::stod(cells[0]), std::stod(cells[1]), std::stod(cells[2]), std::stod(cells[3]),
               std::stod(cells[4]), cells[5] == "1", std::nullopt};
    if (!cells[6].empty()) row.t_collision = std::stod(cells[6]);
    out.push_back(row);
  }
  return out;
}

std::string summary_json(const GridResult& r, const IntersectionParams& p, const program::SimCfg& cfg) {
  const auto& m = r.matrix;
  std::size_t unsafe_instances = m.complying_unsafe + m.noncomplying_unsafe + m.indeterminate_unsafe;
  json indeterminate = json::array();
  for (const auto& rec : r.records) {
    if (rec.compliance == Compliance::kIndeterminate) {
      indeterminate.push_back(json{{"x_sv", rec.inst.x_sv}, {"v_sv", rec.inst.v_sv}, {"x_pov", rec.inst.x_pov},
                                   {"v_pov", rec.inst.v_pov}});
    }
  }
  json doc{{"instances", r.records.size()},
           {"simulations", r.simulations},
           {"horizon_exceeded", r.horizon_exceeded},
           {"matrix",
            json{{"complying_safe", m.complying_safe},
                 {"complying_unsafe", m.complying_unsafe},
                 {"noncomplying_safe", m.noncomplying_safe},
                 {"noncomplying_unsafe", m.noncomplying_unsafe},
                 {"indeterminate_safe", m.indeterminate_safe},
                 {"indeterminate_unsafe", m.indeterminate_unsafe}}},
           {"unsafe_instances", unsafe_instances},
           {"precision", m.precision()},
           {"recall", m.recall()},
           {"histogram", r.histogram},
           {"indeterminate_instances", indeterminate},
           {"cz_sv", json::array({symbolic::to_double(p.cz_sv.start), symbolic::to_double(p.cz_sv.end)})},
           {"cz_pov", json::array({symbolic::to_double(p.cz_pov.start), symbolic::to_double(p.cz_pov.end)})},
           {"dt", cfg.dt},
           {"horizon", cfg.horizon}};
  return doc.dump(2) + "\n";
}

}  // namespace rssforge::sim
