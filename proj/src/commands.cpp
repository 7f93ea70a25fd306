#include "mcpilot/commands.hpp"

#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "mcpilot/io.hpp"
#include "mcpilot/plots.hpp"

namespace mcpilot {

namespace fs = std::filesystem;

Settings load_settings(const CommandOptions& opts, std::ostream& log) {
  Config cfg = opts.config ? Config::load(*opts.config) : Config();
  if (opts.seed) cfg.set("seed", std::to_string(*opts.seed));
  if (opts.no_delay_model) cfg.set("use_delay_model", "false");
  Settings s = Settings::from_config(cfg);
  for (const auto& k : cfg.unused_keys()) {
    if (k.rfind("retarget.", 0) == 0) continue;
    log << "warning: unused config key '" << k << "'\n";
  }
  return s;
}

namespace {

struct Context {
  const CommandOptions& opts;
  std::ostream& log;
  Settings s;
  World world;
  RngStream master;
  Config cfg;

  Context(const CommandOptions& o, std::ostream& l)
      : opts(o),
        log(l),
        s(load_settings(o, l)),
        world(s.arm, s.world),
        master(s.seed, 0),
        cfg(o.config ? Config::load(*o.config) : Config()) {}

  fs::path path(const std::string& name) const { return opts.out / name; }

  void save(const std::string& name, const std::string& text) const {
    write_file(path(name), text);
    log << "wrote " << path(name).string() << "\n";
  }
};

template <class F>
std::string to_text(F&& fn) {
  std::ostringstream out;
  fn(out);
  return out.str();
}

std::vector<ThrowRecord> load_records(const Context& c) {
  std::istringstream in(read_file(c.path("throws.csv")));
  return read_throws_csv(in, c.s.world.hit_radius);
}

LearnerState state_from_records(const Context& c) {
  LearnerState st;
  RngStream aug = c.master.derive(StreamPurpose::Augmentation);
  for (const auto& r : load_records(c)) add_record(st, r, c.s.N_a, aug);
  return st;
}

DynamicsModel load_model(const Context& c) {
  std::istringstream in(read_file(c.path("model.txt")));
  return DynamicsModel::load(in);
}

RbfPolicy load_policy(const Context& c, const std::string& name = "policy.txt") {
  std::istringstream in(read_file(c.path(name)));
  return RbfPolicy::load(in);
}

void load_delay(const Context& c, LearnerState& st) {
  if (c.s.use_delay_model && fs::exists(c.path("delay.txt"))) {
    std::istringstream in(read_file(c.path("delay.txt")));
    st.delay = read_delay(in, &st.delay_estimated);
  }
}

std::vector<TargetPoint> eval_targets(const Context& c, const TargetDomain& domain) {
  return evaluation_targets(domain, c.s.eval_targets, c.master.derive(StreamPurpose::Evaluation));
}

RngStream eval_world_rng(const Context& c) {
  return c.master.derive(StreamPurpose::Evaluation).derive(StreamPurpose::World);
}

void save_eval(const Context& c, const EvalReport& rep, const std::string& stem,
               const TargetDomain& domain, const std::string& title) {
  c.save("results" + stem + ".csv", to_text([&](std::ostream& o) { write_results_csv(o, rep); }));
  c.save("scatter" + stem + ".svg", scatter_svg(rep, domain, title));
  c.log << title << ": accuracy " << fmt9(rep.accuracy) << ", median error "
        << fmt9(rep.median_error) << " m\n";
}

struct Baseline {
  SpeedPolicy policy;
  std::string name;
};

Baseline make_baseline(const Context& c, const std::string& kind) {
  if (kind == "ballistic") {
    const BallisticPolicy b{c.s.geometry(), c.s.world.constants, c.s.u_M};
    return {[b](const TargetPoint& P) { return b(P); }, "ballistic"};
  }
  if (kind == "mlp") {
    RngStream rng = c.master.derive(StreamPurpose::Network);
    const RegressionSet data = collect_regression_set(c.s, c.world, c.s.mlp_samples, rng);
    c.save("regression.csv", to_text([&](std::ostream& o) { write_regression_csv(o, data); }));
    RngStream train_rng = rng.derive(StreamPurpose::Network);
    auto net = std::make_shared<Mlp>(train_mlp(data, c.s.mlp, train_rng).model);
    return {[net](const TargetPoint& P) { return (*net)(P); }, "mlp"};
  }
  throw std::invalid_argument("unknown baseline '" + kind + "' (expected ballistic or mlp)");
}

int cmd_simulate(Context& c) {
  const Baseline b = make_baseline(c, c.opts.baseline.empty() ? "ballistic" : c.opts.baseline);
  std::vector<ThrowRecord> recs;
  RngStream rng = eval_world_rng(c);
  const EvalReport rep = evaluate(b.policy, c.world, c.s.timing, c.s.timing.t_release,
                                  eval_targets(c, c.s.domain), rng, &recs);
  c.save("throws.csv", to_text([&](std::ostream& o) { write_throws_csv(o, recs, c.s.seed); }));
  save_eval(c, rep, "", c.s.domain, b.name);
  return 0;
}

RngStream trial_stream(const Context& c) { return c.master.derive(std::uint64_t{1000}); }

int cmd_explore(Context& c) {
  LearnerState st;
  RngStream rng = trial_stream(c).derive(StreamPurpose::Exploration);
  explore(c.s, c.world, st, rng);
  c.save("throws.csv",
         to_text([&](std::ostream& o) { write_throws_csv(o, st.records, c.s.seed); }));
  return 0;
}

int cmd_fit_model(Context& c) {
  LearnerState st = state_from_records(c);
  fit_model(c.s, st);
  for (const auto& l : st.log) c.log << l << "\n";
  c.save("model.txt", to_text([&](std::ostream& o) { st.model->save(o); }));
  return 0;
}

int cmd_estimate_delay(Context& c) {
  LearnerState st;
  st.records = load_records(c);
  st.model = load_model(c);
  RngStream rng = trial_stream(c).derive(StreamPurpose::BayesOpt);
  estimate_delay(c.s, st, rng);
  for (const auto& l : st.log) c.log << l << "\n";
  c.save("delay.txt", to_text([&](std::ostream& o) { write_delay(o, st.delay, true); }));
  c.save("bo_trace.csv", to_text([&](std::ostream& o) { write_bo_trace_csv(o, st.bo.trace); }));
  return 0;
}

int cmd_optimize(Context& c) {
  LearnerState st;
  st.model = load_model(c);
  load_delay(c, st);
  RngStream rng = trial_stream(c).derive(StreamPurpose::Particles);
  optimize(c.s, st, rng);
  for (const auto& l : st.log) c.log << l << "\n";
  c.save("policy.txt", to_text([&](std::ostream& o) { st.policy->save(o); }));
  c.save("opt_trace.csv",
         to_text([&](std::ostream& o) { write_opt_trace_csv(o, st.opt_trace); }));
  return 0;
}

int cmd_evaluate(Context& c) {
  RngStream rng = eval_world_rng(c);
  const auto targets = eval_targets(c, c.s.domain);
  if (!c.opts.baseline.empty()) {
    const Baseline b = make_baseline(c, c.opts.baseline);
    save_eval(c, evaluate(b.policy, c.world, c.s.timing, c.s.timing.t_release, targets, rng),
              "", c.s.domain, b.name);
    return 0;
  }
  LearnerState st;
  load_delay(c, st);
  const RbfPolicy policy = load_policy(c);
  const EvalReport rep = evaluate([&](const TargetPoint& P) { return policy(P); }, c.world,
                                  c.s.timing, command_time(c.s, st), targets, rng);
  save_eval(c, rep, "", c.s.domain, "mc-pilot");
  return 0;
}

int cmd_trial(Context& c) {
  RngStream rng = c.master;
  const LearnerState st = run_pipeline(c.s, c.world, rng);
  for (const auto& l : st.log) c.log << l << "\n";
  c.save("throws.csv",
         to_text([&](std::ostream& o) { write_throws_csv(o, st.records, c.s.seed); }));
  c.save("model.txt", to_text([&](std::ostream& o) { st.model->save(o); }));
  c.save("policy.txt", to_text([&](std::ostream& o) { st.policy->save(o); }));
  c.save("opt_trace.csv",
         to_text([&](std::ostream& o) { write_opt_trace_csv(o, st.opt_trace); }));
  if (st.delay_estimated) {
    c.save("delay.txt", to_text([&](std::ostream& o) { write_delay(o, st.delay, true); }));
    c.save("bo_trace.csv",
           to_text([&](std::ostream& o) { write_bo_trace_csv(o, st.bo.trace); }));
  }
  RngStream erng = eval_world_rng(c);
  const RbfPolicy& policy = *st.policy;
  const EvalReport rep =
      evaluate([&](const TargetPoint& P) { return policy(P); }, c.world, c.s.timing,
               command_time(c.s, st), eval_targets(c, c.s.domain), erng);
  save_eval(c, rep, "", c.s.domain, "mc-pilot");
  return 0;
}

int cmd_retarget(Context& c) {
  LearnerState st;
  st.model = load_model(c);
  st.policy = load_policy(c);
  load_delay(c, st);
  TargetDomain domain = c.s.domain;
  domain.z += c.cfg.get_double("retarget.dz", 0.3);
  domain.z = c.cfg.get_double("retarget.z_P", domain.z);
  RngStream rng = trial_stream(c).derive(std::uint64_t{77});
  std::vector<TraceRow> trace;
  const RbfPolicy policy = retarget(c.s, st, domain, rng, &trace);
  c.save("policy_retarget.txt", to_text([&](std::ostream& o) { policy.save(o); }));
  c.save("opt_trace_retarget.csv",
         to_text([&](std::ostream& o) { write_opt_trace_csv(o, trace); }));
  RngStream erng = eval_world_rng(c);
  const EvalReport rep =
      evaluate([&](const TargetPoint& P) { return policy(P); }, c.world, c.s.timing,
               command_time(c.s, st), eval_targets(c, domain), erng);
  save_eval(c, rep, "_retarget", domain, "mc-pilot retargeted");
  return 0;
}

int cmd_compare_baselines(Context& c) {
  const auto targets = eval_targets(c, c.s.domain);
  std::vector<std::pair<std::string, EvalReport>> reports;
  for (const std::string kind : {"ballistic", "mlp"}) {
    const Baseline b = make_baseline(c, kind);
    RngStream rng = eval_world_rng(c);
    reports.emplace_back(b.name,
                         evaluate(b.policy, c.world, c.s.timing, c.s.timing.t_release, targets, rng));
  }
  if (fs::exists(c.path("policy.txt"))) {
    LearnerState st;
    load_delay(c, st);
    const RbfPolicy policy = load_policy(c);
    RngStream rng = eval_world_rng(c);
    reports.emplace_back("mc-pilot", evaluate([&](const TargetPoint& P) { return policy(P); },
                                              c.world, c.s.timing, command_time(c.s, st),
                                              targets, rng));
  }
  std::ostringstream summary;
  summary << "method,accuracy,median_error,p90_error\n";
  std::vector<std::pair<std::string, std::vector<double>>> errors;
  for (const auto& [name, rep] : reports) {
    save_eval(c, rep, "_" + name, c.s.domain, name);
    summary << name << "," << fmt9(rep.accuracy) << "," << fmt9(rep.median_error) << ","
            << fmt9(rep.p90_error) << "\n";
    std::vector<double> e;
    for (const auto& r : rep.rows) e.push_back(r.error);
    errors.emplace_back(name, std::move(e));
  }
  c.save("summary.csv", summary.str());
  c.save("box.svg", box_svg(errors, "landing error by method", "error [m]"));
  return 0;
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {
      "simulate", "explore", "fit-model", "estimate-delay", "optimize",
      "evaluate", "trial",   "retarget",  "compare-baselines"};
  return names;
}

int run_command(const std::string& name, const CommandOptions& opts, std::ostream& log) {
  static const std::map<std::string, int (*)(Context&)> table = {
      {"simulate", cmd_simulate},         {"explore", cmd_explore},
      {"fit-model", cmd_fit_model},       {"estimate-delay", cmd_estimate_delay},
      {"optimize", cmd_optimize},         {"evaluate", cmd_evaluate},
      {"trial", cmd_trial},               {"retarget", cmd_retarget},
      {"compare-baselines", cmd_compare_baselines}};
  const auto it = table.find(name);
  if (it == table.end()) throw std::invalid_argument("unknown command '" + name + "'");
  Context c(opts, log);
  return it->second(c);
}

}  // namespace mcpilot
