// sstlab: batch driver for the strong stationary dual toolkit.
//
// Exit codes: 0 success, 1 a check did not pass, 2 a standing assumption
// fails for the model, 3 invalid configuration or arguments.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "sstlab/analysis.hpp"
#include "sstlab/config.hpp"
#include "sstlab/report.hpp"

namespace fs = std::filesystem;
using namespace sstlab;

namespace {

constexpr int kExitCheckFailed = 1;
constexpr int kExitAssumption = 2;
constexpr int kExitInvalid = 3;

struct Options {
  std::string model;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> trials;
  std::optional<double> horizon;
  std::optional<std::int64_t> window;
  std::string out = ".";
  int threads = 1;
  std::optional<std::vector<double>> t_grid;
  std::string init;
};

struct Settings {
  std::uint64_t seed = 1;
  std::int64_t trials = 1000;
  double horizon = 1000;
  std::int64_t window = 0;
  std::vector<double> grid{0.25, 0.5, 1, 2, 4};
  ExplosionPolicy policy;
};

Settings resolve(const Options& o, const ModelSpec& spec) {
  const ExperimentSettings& e = spec.experiment;
  Settings s;
  s.window = spec.kind == ModelSpec::Kind::kLine ? 40 : 10;
  if (e.seed) s.seed = *e.seed;
  if (e.trials) s.trials = *e.trials;
  if (e.horizon) s.horizon = *e.horizon;
  if (e.window) s.window = *e.window;
  if (e.t_grid) s.grid = *e.t_grid;
  if (e.bound_threshold) s.policy.bound_threshold = *e.bound_threshold;
  if (e.tail_time_budget) s.policy.tail_time_budget = *e.tail_time_budget;
  if (e.jump_budget) s.policy.jump_budget = *e.jump_budget;
  if (o.seed) s.seed = *o.seed;
  if (o.trials) s.trials = *o.trials;
  if (o.horizon) s.horizon = *o.horizon;
  if (o.window) s.window = *o.window;
  if (o.t_grid) s.grid = *o.t_grid;
  auto bad = [](const std::string& m) { return Error(ErrorCode::kInvalidArgument, m); };
  if (s.trials <= 0) throw bad("trials must be positive");
  if (!(s.horizon > 0)) throw bad("horizon must be positive");
  if (s.window <= 0) throw bad("window must be positive");
  if (o.threads <= 0) throw bad("threads must be positive");
  for (size_t i = 0; i < s.grid.size(); ++i) {
    if (!(s.grid[i] >= 0) || (i > 0 && s.grid[i] < s.grid[i - 1])) {
      throw bad("t-grid must be nonnegative and sorted");
    }
  }
  return s;
}

void write_file(const Options& o, const std::string& name, const std::string& content) {
  fs::create_directories(o.out);
  std::ofstream f(fs::path(o.out) / name, std::ios::binary);
  if (!f) throw Error(ErrorCode::kInvalidArgument, "cannot write " + name + " in " + o.out);
  f << content;
}

void print(const Json& j) { std::cout << j.dump(2) << '\n'; }

// Recurrence and non-explosion must not fail; diagonal integrability is
// reported but not enforced.
bool assumptions_fail(const AssumptionReport& a) {
  return a.positive_recurrent.verdict == Verdict::kFails ||
         a.nonexplosive.verdict == Verdict::kFails;
}

AssumptionReport assumptions_of(const ModelSpec& spec) {
  return spec.kind == ModelSpec::Kind::kLine ? check_assumptions(*spec.rates)
                                             : check_assumptions(*spec.graph);
}

int refuse(const AssumptionReport& a) {
  std::cerr << "sstlab: standing assumption fails: positive_recurrent="
            << verdict_name(a.positive_recurrent.verdict)
            << " nonexplosive=" << verdict_name(a.nonexplosive.verdict) << '\n';
  return kExitAssumption;
}

Json settings_json(const Settings& s, const Options& o) {
  Json j;
  j["model"] = o.model;
  j["seed"] = s.seed;
  j["trials"] = s.trials;
  j["horizon"] = s.horizon;
  j["window"] = s.window;
  j["t_grid"] = s.grid;
  j["bound_threshold"] = s.policy.bound_threshold;
  j["tail_time_budget"] = s.policy.tail_time_budget;
  j["jump_budget"] = s.policy.jump_budget;
  return j;
}

// ---------------------------------------------------------------------------
// Initial conditions.

ExperimentInit<IntervalModel> line_init(const std::string& text) {
  ExperimentInit<IntervalModel> init;
  const std::string t = text.empty() ? "0" : text;
  if (t.front() == '[' || t.front() == '(') {
    init.set = parse_interval(t);
  } else {
    try {
      size_t used = 0;
      const std::int64_t x = std::stoll(t, &used);
      if (used != t.size()) throw std::invalid_argument(t);
      init.mu0 = {{x, 1.0}};
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::kInvalidArgument, "bad --init '" + t + "'");
    }
  }
  return init;
}

GraphVertex parse_vertex(const GraphModel& g, const std::string& t) {
  for (int v = 0; v < g.center_size(); ++v) {
    if (g.name(v) == t) return {-1, v};
  }
  const size_t colon = t.find(':');
  if (t.size() > 1 && t[0] == 'b' && colon != std::string::npos) {
    try {
      const int i = std::stoi(t.substr(1, colon - 1)) - 1;
      const std::int64_t k = std::stoll(t.substr(colon + 1));
      if (i >= 0 && i < g.branch_count() && k >= 0) return {i, k};
    } catch (const std::logic_error&) {
    }
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown vertex '" + t + "'");
}

ExperimentInit<GraphDualModel> graph_init(const GraphDualModel& m, const std::string& text) {
  ExperimentInit<GraphDualModel> init;
  if (text.rfind("C:", 0) == 0) {
    DualSet q = parse_dual_set(text, m.graph().branch_count());
    if (!m.connected(q)) throw Error(ErrorCode::kInvalidArgument, "--init is not a connected set");
    init.set = q;
  } else {
    init.mu0 = {{text.empty() ? GraphVertex{-1, 0} : parse_vertex(m.graph(), text), 1.0}};
  }
  return init;
}

// Initial law on the truncation's states.
Eigen::VectorXd line_mu0(const IntervalModel& m, const ExperimentInit<IntervalModel>& init,
                         std::int64_t lo, std::int64_t hi) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(hi - lo + 1);
  if (init.set) {
    for (std::int64_t x = lo; x <= hi; ++x) {
      if (init.set->contains(x)) v[x - lo] = static_cast<double>(std::exp(m.log_lambda(*init.set, x)));
    }
  } else {
    for (const auto& [x, p] : init.mu0) {
      if (x < lo || x > hi) throw Error(ErrorCode::kWindowTooSmall, "initial state outside the window");
      v[x - lo] += p;
    }
  }
  if (!(v.sum() > 0)) throw Error(ErrorCode::kWindowTooSmall, "initial law has no mass in the window");
  return v / v.sum();
}

std::vector<GraphVertex> graph_states(const GraphModel& g, std::int64_t depth) {
  std::vector<GraphVertex> xs;
  for (int v = 0; v < g.center_size(); ++v) xs.push_back({-1, v});
  for (int i = 0; i < g.branch_count(); ++i) {
    for (std::int64_t k = 0; k <= depth; ++k) xs.push_back({i, k});
  }
  return xs;
}

Eigen::VectorXd graph_mu0(const GraphDualModel& m, const ExperimentInit<GraphDualModel>& init,
                          std::int64_t depth) {
  const auto xs = graph_states(m.graph(), depth);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(xs.size()));
  for (size_t k = 0; k < xs.size(); ++k) {
    if (init.set) {
      if (m.contains(*init.set, xs[k])) {
        v[k] = static_cast<double>(std::exp(m.log_lambda(*init.set, xs[k])));
      }
    } else {
      for (const auto& [x, p] : init.mu0) {
        if (x == xs[k]) v[k] += p;
      }
    }
  }
  if (!(v.sum() > 0)) throw Error(ErrorCode::kWindowTooSmall, "initial law has no mass in the window");
  return v / v.sum();
}

// ---------------------------------------------------------------------------
// Subcommands.

int run_criterion(const Options& o) {
  const ModelSpec spec = load_model(o.model);
  const Settings s = resolve(o, spec);
  const CriterionReport r =
      spec.kind == ModelSpec::Kind::kLine ? criterion(*spec.rates) : criterion(*spec.graph);
  Json j = to_json(r);
  j["value"] = Json::array();
  for (const CriterionSide& side : r.sides) j["value"].push_back(side.evidence.partial_sum());
  print(j);
  write_file(o, artifact_name("criterion", s.seed, "json"), j.dump(2) + "\n");
  std::ostringstream csv;
  write_criterion_csv(csv, r);
  write_file(o, artifact_name("criterion", s.seed, "csv"), csv.str());
  return assumptions_fail(r.assumptions) ? kExitAssumption : 0;
}

int run_duality_check(const Options& o) {
  const ModelSpec spec = load_model(o.model);
  const Settings s = resolve(o, spec);
  ResidualReport r;
  if (spec.kind == ModelSpec::Kind::kLine) {
    r = duality_check(IntervalModel(*spec.rates), -s.window, s.window);
  } else {
    r = duality_check(GraphDualModel(*spec.graph), s.window);
  }
  Json j = to_json(r);
  j["window"] = s.window;
  j["tolerance"] = 1e-9;
  j["pass"] = r.max_interior < 1e-9;
  print(j);
  write_file(o, artifact_name("duality-check", s.seed, "json"), j.dump(2) + "\n");
  return r.max_interior < 1e-9 ? 0 : kExitCheckFailed;
}

template <class Model>
typename Model::Dual initial_dual(const Model& m, const ExperimentInit<Model>& init) {
  if (init.set) return *init.set;
  return singleton_of(m, init.mu0.front().first);
}

int run_simulate_dual(const Options& o) {
  const ModelSpec spec = load_model(o.model);
  const Settings s = resolve(o, spec);
  const AssumptionReport a = assumptions_of(spec);
  if (assumptions_fail(a)) return refuse(a);
  std::ostringstream csv;
  Json j = settings_json(s, o);
  auto summarize = [&](const auto& tr, const std::string& init) {
    j["init"] = init;
    j["terminal"] = dual_terminal_name(tr.terminal);
    j["events"] = tr.events.size();
    j["explosions"] = tr.explosions.size();
    if (tr.absorption_time) j["absorption_time"] = *tr.absorption_time;
    if (!tr.detail.empty()) j["detail"] = tr.detail;
  };
  if (spec.kind == ModelSpec::Kind::kLine) {
    IntervalModel m(*spec.rates);
    const IntervalState init = initial_dual(m, line_init(o.init));
    auto tr = simulate_dual(m, init, s.horizon, s.policy, {s.seed, 0});
    write_dual_csv(csv, tr);
    summarize(tr, encode(init));
  } else {
    GraphDualModel m(*spec.graph);
    const DualSet init = initial_dual(m, graph_init(m, o.init));
    auto tr = simulate_dual_graph(m, init, s.horizon, s.policy, {s.seed, 0});
    write_dual_csv(csv, tr);
    summarize(tr, encode(init));
  }
  print(j);
  write_file(o, artifact_name("simulate-dual", s.seed, "csv"), csv.str());
  write_file(o, artifact_name("simulate-dual", s.seed, "json"), j.dump(2) + "\n");
  return 0;
}

template <class Model>
Json sst_summary(const Model& m, const SstOutcome<typename Model::Primal>& out,
                 const std::vector<typename Model::Primal>& xs) {
  std::vector<std::int64_t> counts;
  for (const auto& x : xs) {
    auto it = out.x_at_absorption.find(x);
    counts.push_back(it == out.x_at_absorption.end() ? 0 : it->second);
  }
  Json j;
  j["absorption"] = to_json(out.stats);
  if (out.stats.absorbed > 0) {
    j["stationarity"] = to_json(chi_square(stationary_probs(m, xs), counts, out.stats.absorbed));
  }
  return j;
}

int run_sst(const Options& o) {
  const ModelSpec spec = load_model(o.model);
  const Settings s = resolve(o, spec);
  const AssumptionReport a = assumptions_of(spec);
  if (assumptions_fail(a)) return refuse(a);
  ExperimentSettingsRun run;
  run.trials = s.trials;
  run.horizon = s.horizon;
  run.grid = s.grid;
  run.seed = s.seed;
  run.threads = o.threads;
  run.policy = s.policy;
  Json j = settings_json(s, o);
  SeparationCurve sep;
  Json body;
  AbsorptionStats stats;
  if (spec.kind == ModelSpec::Kind::kLine) {
    IntervalModel m(*spec.rates);
    const auto init = line_init(o.init);
    j["init"] = o.init.empty() ? "0" : o.init;
    const std::int64_t lo = std::max(-s.window, spec.rates->lo());
    const std::int64_t hi = std::min(s.window, spec.rates->hi());
    sep = separation_curve(truncate_line(*spec.rates, lo, hi), line_mu0(m, init, lo, hi), s.grid);
    const auto out = sst_experiment(m, init, run);
    std::vector<std::int64_t> xs;
    for (std::int64_t x = lo; x <= hi; ++x) xs.push_back(x);
    body = sst_summary(m, out, xs);
    stats = out.stats;
  } else {
    GraphDualModel m(*spec.graph);
    const auto init = graph_init(m, o.init);
    j["init"] = init.set ? encode(*init.set) : encode(init.mu0.front().first);
    sep = separation_curve(truncate_graph(*spec.graph, s.window), graph_mu0(m, init, s.window),
                           s.grid);
    const auto out = sst_experiment(m, init, run);
    body = sst_summary(m, out, graph_states(*spec.graph, s.window));
    stats = out.stats;
  }
  const auto rows = bound_check(sep, stats);
  bool bound = true, sharp = true;
  for (const BoundRow& r : rows) {
    bound = bound && r.bound_ok;
    sharp = sharp && r.sharp_ok;
  }
  j.update(body);
  j["separation_tail_mass"] = sep.tail_mass;
  j["separation_monotone"] = sep.monotone;
  j["bound_holds"] = bound;
  j["sharp"] = sharp;
  print(j);
  std::ostringstream csv;
  write_bound_csv(csv, rows);
  write_file(o, artifact_name("sst", s.seed, "csv"), csv.str());
  write_file(o, artifact_name("sst", s.seed, "json"), j.dump(2) + "\n");
  return bound ? 0 : kExitCheckFailed;
}

int run_separation(const Options& o) {
  const ModelSpec spec = load_model(o.model);
  const Settings s = resolve(o, spec);
  const AssumptionReport a = assumptions_of(spec);
  if (assumptions_fail(a)) return refuse(a);
  SeparationCurve sep;
  if (spec.kind == ModelSpec::Kind::kLine) {
    IntervalModel m(*spec.rates);
    const std::int64_t lo = std::max(-s.window, spec.rates->lo());
    const std::int64_t hi = std::min(s.window, spec.rates->hi());
    sep = separation_curve(truncate_line(*spec.rates, lo, hi),
                           line_mu0(m, line_init(o.init), lo, hi), s.grid);
  } else {
    GraphDualModel m(*spec.graph);
    sep = separation_curve(truncate_graph(*spec.graph, s.window),
                           graph_mu0(m, graph_init(m, o.init), s.window), s.grid);
  }
  Json j = settings_json(s, o);
  j["init"] = o.init;
  j["window_states"] = sep.window;
  j["tail_mass"] = sep.tail_mass;
  j["monotone"] = sep.monotone;
  j["separation"] = Json::array();
  for (const SeparationPoint& p : sep.points) j["separation"].push_back({p.t, p.separation});
  print(j);
  std::ostringstream csv;
  write_separation_csv(csv, sep);
  write_file(o, artifact_name("separation", s.seed, "csv"), csv.str());
  return 0;
}

bool is_runtime(ErrorCode c) {
  return c == ErrorCode::kWindowExceeded || c == ErrorCode::kInconsistentInput ||
         c == ErrorCode::kAbsorbedState || c == ErrorCode::kNonSummableTail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Strong stationary duals of chains on Z and on graphs with infinite branches"};
  app.require_subcommand(1);
  Options o;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--model", o.model, "model config (TOML)")->required();
    sub->add_option("--seed", o.seed, "base seed");
    sub->add_option("--trials", o.trials, "number of trials");
    sub->add_option("--horizon", o.horizon, "time horizon");
    sub->add_option("--window", o.window, "half-width of the Z window or branch depth");
    sub->add_option("--out", o.out, "output directory")->capture_default_str();
    sub->add_option("--threads", o.threads, "worker threads")->capture_default_str();
    sub->add_option("--t-grid", o.t_grid, "time grid, comma separated")->delimiter(',');
    sub->add_option("--init", o.init,
                    "initial condition: state (x, vertex name, b<i>:<k>) or dual set "
                    "([p,q], C:...)");
  };
  struct Cmd {
    const char* name;
    const char* help;
    int (*fn)(const Options&);
  };
  const Cmd cmds[] = {
      {"criterion", "evaluate the finite-SST criterion per side or branch", run_criterion},
      {"duality-check", "algebraic residual of the dual generator", run_duality_check},
      {"simulate-dual", "simulate one dual trajectory", run_simulate_dual},
      {"sst", "absorption statistics, stationarity at absorption and separation bound", run_sst},
      {"separation", "separation curve on a truncation", run_separation},
  };
  std::vector<std::pair<CLI::App*, int (*)(const Options&)>> subs;
  for (const Cmd& c : cmds) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    add_common(sub);
    subs.push_back({sub, c.fn});
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitInvalid;
  }
  try {
    for (const auto& [sub, fn] : subs) {
      if (sub->parsed()) return fn(o);
    }
  } catch (const ConfigError& e) {
    std::cerr << "sstlab: " << o.model << ": " << e.what() << '\n';
    return kExitInvalid;
  } catch (const Error& e) {
    std::cerr << "sstlab: " << e.what() << '\n';
    return is_runtime(e.code()) ? kExitCheckFailed : kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "sstlab: " << e.what() << '\n';
    return kExitCheckFailed;
  }
  return 0;
}
