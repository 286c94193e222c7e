#include "buildimpact/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "buildimpact/error.hpp"
#include "buildimpact/estimator.hpp"
#include "buildimpact/evaluation.hpp"
#include "buildimpact/graph.hpp"
#include "buildimpact/history.hpp"
#include "buildimpact/json_io.hpp"
#include "buildimpact/simulator.hpp"

namespace buildimpact {

namespace {

struct CliConfig {
  std::string history_dir;
  std::string prev_graph;
  std::string curr_graph;
  std::size_t top_k = 5;
  int window_days = 90;
  std::string stat = "median";
  double cache_cost_ms = 0;
  std::uint64_t seed = 0;
  std::string format = "text";
  std::string output;

  // simulate
  std::string graph;
  std::string durations;
  bool unit_durations = false;
  std::vector<std::string> dirty;

  // evaluate
  std::size_t period_builds = kDefaultPeriodBuilds;
  std::vector<std::size_t> grid_top_k;
  std::vector<int> grid_window_days;
  std::vector<std::string> grid_stats;

  // gen
  std::string out_dir;
  std::size_t targets = 10;
  double density = 0.2;
  double min_ms = 1;
  double max_ms = 100;
  std::size_t builds = 50;
  double dirty_prob = 0.1;
  std::vector<std::string> dirty_overrides;
  bool single_change = false;
  double jitter = 0;
  bool no_initial_full_build = false;
  std::vector<std::string> add_edges;
  std::size_t change_at = 0;
};

std::chrono::milliseconds days(int n) {
  if (n <= 0) throw PreconditionError("window must be at least one day");
  return std::chrono::days{n};
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::map<TargetId, Millis> load_durations(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open durations file " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  if (!doc.is_object()) throw ParseError(path + ": expected {target: ms}");
  std::map<TargetId, Millis> out;
  for (const auto& [name, ms] : doc.items()) {
    if (!ms.is_number() || ms.get<double>() < 0) {
      throw ParseError(path + ": duration of '" + name + "' must be >= 0");
    }
    out.emplace(name, ms.get<double>());
  }
  return out;
}

DependencyEdge parse_edge_arg(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == text.size()) {
    throw PreconditionError("edge must be written dependency:dependent, got '" +
                            text + "'");
  }
  return {text.substr(0, colon), text.substr(colon + 1)};
}

/// Models over the window ending at the newest build.
struct Models {
  TimeModel time;
  CacheModel cache;
  LcpMining mining;
};

Models build_models(const History& h, const CliConfig& cfg) {
  const TimeWindow window = h.window_through_latest(days(cfg.window_days));
  return {build_time_model(h, window, parse_statistic(cfg.stat)),
          build_cache_model(h, window), mine_top_lcps(h, cfg.top_k, window)};
}

struct Report {
  json doc;
  std::string text;
  int status = kExitOk;
};

Report run_mine(const CliConfig& cfg) {
  const History h = ingest_history(cfg.history_dir);
  const TimeWindow window = h.window_through_latest(days(cfg.window_days));
  const LcpMining mining = mine_top_lcps(h, cfg.top_k, window);
  Report r;
  r.doc = mining;
  std::ostringstream text;
  text << "rank  frequency  share   lcp\n";
  for (std::size_t i = 0; i < mining.profiles.size(); ++i) {
    const auto& p = mining.profiles[i];
    char buf[64];
    std::snprintf(buf, sizeof buf, "%-4zu  %-9zu  %.4f  ", i + 1, p.frequency,
                  p.share);
    text << buf << to_string(p.lcp) << '\n';
  }
  char buf[128];
  std::snprintf(buf, sizeof buf, "coverage %.4f over %zu builds (%zu no-op)\n",
                mining.coverage, mining.window_builds, mining.noop_builds);
  text << buf;
  r.text = text.str();
  return r;
}

Report run_diff(const CliConfig& cfg) {
  const GraphDiff diff = graph_diff(load_graph_file(cfg.prev_graph),
                                    load_graph_file(cfg.curr_graph));
  Report r;
  r.doc = diff;
  std::ostringstream text;
  for (const auto& t : diff.added_targets) text << "+ target " << t << '\n';
  for (const auto& t : diff.removed_targets) text << "- target " << t << '\n';
  for (const auto& e : diff.added_edges) text << "+ edge " << to_string(e) << '\n';
  for (const auto& e : diff.removed_edges) {
    text << "- edge " << to_string(e) << '\n';
  }
  if (diff.empty()) text << "no differences\n";
  r.text = text.str();
  return r;
}

Report run_estimate(const CliConfig& cfg) {
  const DependencyGraph prev = load_graph_file(cfg.prev_graph);
  const DependencyGraph curr = load_graph_file(cfg.curr_graph);
  const History h = ingest_history(cfg.history_dir);

  std::vector<ImpactEstimate> estimates;
  std::vector<DependencyChain> lcps;
  if (!graph_diff(prev, curr).added_edges.empty()) {
    const Models models = build_models(h, cfg);
    for (const auto& p : models.mining.profiles) {
      if (is_valid_chain(prev, p.lcp)) lcps.push_back(p.lcp);
    }
    estimates = estimate_change(prev, curr, models.time, models.cache, lcps);
  }
  Report r;
  r.doc = {{"estimates", estimates},
           {"impact_predicted", any_impact(estimates)},
           {"top_lcps", lcps}};
  r.text = format_estimates(estimates);
  r.status = any_impact(estimates) ? kExitImpact : kExitOk;
  return r;
}

Report run_simulate(const CliConfig& cfg) {
  const DependencyGraph g = load_graph_file(cfg.graph);
  SimConfig sim;
  sim.cache_cost = cfg.cache_cost_ms;
  if (cfg.unit_durations) {
    for (const auto& t : g.targets()) sim.durations.emplace(t, 1.0);
  } else {
    sim.durations = load_durations(cfg.durations);
  }
  std::set<TargetId> dirty;
  for (const auto& d : cfg.dirty) {
    if (d == "all") {
      dirty.insert(g.targets().begin(), g.targets().end());
    } else if (!d.empty()) {
      dirty.insert(d);
    }
  }
  const SimResult result = simulate_build(g, sim, dirty);
  Report r;
  r.doc = result;
  std::ostringstream text;
  text << "makespan " << format_number(result.makespan) << " ms\n"
       << "critical path " << to_string(result.critical_path) << '\n'
       << "executed " << result.executed.size() << " of " << g.size()
       << " targets\n";
  r.text = text.str();
  return r;
}

Report run_evaluate(const CliConfig& cfg) {
  const History h = ingest_history(cfg.history_dir);
  ReplayConfig replay_cfg{cfg.top_k, days(cfg.window_days),
                          parse_statistic(cfg.stat), cfg.period_builds};
  const ReplayResult result = replay(h, replay_cfg);

  Report r;
  r.doc = {{"outcomes", result.outcomes}, {"skipped", json::array()}};
  for (const auto& s : result.skipped) {
    r.doc["skipped"].push_back({{"build_id", s.build_id}, {"reason", s.reason}});
  }
  std::string text = format_outcomes(result.outcomes);
  for (const auto& s : result.skipped) {
    text += "skipped " + s.build_id + ": " + s.reason + "\n";
  }

  const bool tuning = !cfg.grid_top_k.empty() || !cfg.grid_window_days.empty() ||
                      !cfg.grid_stats.empty();
  if (tuning) {
    TuningGrid grid;
    grid.top_k = cfg.grid_top_k.empty() ? std::vector<std::size_t>{cfg.top_k}
                                        : cfg.grid_top_k;
    if (cfg.grid_window_days.empty()) {
      grid.windows.push_back(days(cfg.window_days));
    }
    for (const int d : cfg.grid_window_days) grid.windows.push_back(days(d));
    if (cfg.grid_stats.empty()) grid.stats.push_back(parse_statistic(cfg.stat));
    for (const auto& s : cfg.grid_stats) grid.stats.push_back(parse_statistic(s));
    const auto rows = tune_parameters(h, grid, cfg.period_builds);
    r.doc["tuning"] = rows;
    text += format_tuning_table(rows);
  }
  r.text = std::move(text);
  return r;
}

Report run_gen(const CliConfig& cfg) {
  ChangeModel change;
  change.default_probability = cfg.dirty_prob;
  change.independent = !cfg.single_change;
  for (const auto& o : cfg.dirty_overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) {
      throw PreconditionError("--dirty expects target=probability, got '" + o +
                              "'");
    }
    double q = 0;
    try {
      q = std::stod(o.substr(eq + 1));
    } catch (const std::exception&) {
      throw PreconditionError("bad probability in '" + o + "'");
    }
    change.dirty_probability[o.substr(0, eq)] = q;
  }

  WorkloadOptions options;
  options.cache_cost = cfg.cache_cost_ms;
  options.duration_jitter = cfg.jitter;
  options.initial_full_build = !cfg.no_initial_full_build;
  if (!cfg.add_edges.empty()) {
    if (cfg.change_at == 0) {
      throw PreconditionError("--add-edge needs --change-at");
    }
    ScriptedChange sc{cfg.change_at, {}};
    for (const auto& e : cfg.add_edges) sc.added_edges.push_back(parse_edge_arg(e));
    options.changes.push_back(std::move(sc));
  }

  History h;
  if (!cfg.graph.empty()) {
    const DependencyGraph g = load_graph_file(cfg.graph);
    std::map<TargetId, Millis> durations;
    if (cfg.unit_durations) {
      for (const auto& t : g.targets()) durations.emplace(t, 1.0);
    } else {
      if (cfg.durations.empty()) {
        throw PreconditionError("--graph needs --durations or --unit-durations");
      }
      durations = load_durations(cfg.durations);
    }
    h = generate_history(g, durations, change, cfg.builds, cfg.seed, options);
  } else {
    WorkloadShape shape{cfg.targets, cfg.density, cfg.min_ms, cfg.max_ms};
    h = generate_workload(shape, change, cfg.builds, cfg.seed, options).history;
  }
  write_history(cfg.out_dir, h);

  Report r;
  std::vector<std::string> refs;
  for (const auto& [ref, g] : h.graphs()) refs.push_back(ref);
  r.doc = {{"history_dir", cfg.out_dir},
           {"builds", h.size()},
           {"graphs", refs},
           {"seed", cfg.seed}};
  r.text = "wrote " + std::to_string(h.size()) + " builds and " +
           std::to_string(refs.size()) + " graph snapshot(s) to " +
           cfg.out_dir + "\n";
  return r;
}

bool wants_json(const std::vector<std::string>& args) {
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--format=json") return true;
    if (args[i] == "--format" && i + 1 < args.size() && args[i + 1] == "json") {
      return true;
    }
  }
  if (const char* env = std::getenv("BUILDIMPACT_FORMAT")) {
    return std::string(env) == "json";
  }
  return false;
}

void report_error(std::ostream& out, std::ostream& err, bool json_mode,
                  const std::string& kind, const std::string& message) {
  if (json_mode) {
    out << json{{"error", {{"kind", kind}, {"message", message}}}}.dump(2)
        << '\n';
  }
  err << "error: " << message << '\n';
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  CliConfig cfg;
  CLI::App app{"Predicts how new dependency edges change cached build times",
               "buildimpact"};
  app.require_subcommand(1);

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--format", cfg.format, "Report format")
        ->check(CLI::IsMember({"json", "text"}))
        ->envname("BUILDIMPACT_FORMAT");
    sub->add_option("--output", cfg.output, "Write the report to this file");
  };
  const auto add_history = [&](CLI::App* sub) {
    sub->add_option("--history", cfg.history_dir, "History directory")
        ->required()
        ->envname("BUILDIMPACT_HISTORY");
  };
  const auto add_model = [&](CLI::App* sub) {
    sub->add_option("--top-k", cfg.top_k, "Number of frequent LCPs to track")
        ->check(CLI::PositiveNumber)
        ->envname("BUILDIMPACT_TOP_K");
    sub->add_option("--window-days", cfg.window_days, "History window length")
        ->check(CLI::PositiveNumber)
        ->envname("BUILDIMPACT_WINDOW_DAYS");
    sub->add_option("--stat", cfg.stat, "Duration statistic")
        ->check(CLI::IsMember({"median", "mean", "p90"}))
        ->envname("BUILDIMPACT_STAT");
  };
  const auto add_graphs = [&](CLI::App* sub) {
    sub->add_option("--prev", cfg.prev_graph, "Graph before the change")
        ->required();
    sub->add_option("--curr", cfg.curr_graph, "Graph after the change")
        ->required();
  };

  auto* mine = app.add_subcommand("mine-lcps", "Most frequent realized LCPs");
  add_history(mine);
  add_model(mine);
  add_common(mine);

  auto* diff = app.add_subcommand("diff", "Added and removed targets and edges");
  add_graphs(diff);
  add_common(diff);

  auto* estimate =
      app.add_subcommand("estimate", "Estimate the impact of added edges");
  add_graphs(estimate);
  add_history(estimate);
  add_model(estimate);
  add_common(estimate);

  auto* simulate = app.add_subcommand("simulate", "Simulate one cached build");
  simulate->add_option("--graph", cfg.graph, "Graph file")->required();
  auto* durations_opt =
      simulate->add_option("--durations", cfg.durations, "JSON {target: ms}");
  auto* unit_opt = simulate->add_flag("--unit-durations", cfg.unit_durations,
                                      "Every target takes 1 ms");
  durations_opt->excludes(unit_opt);
  simulate->add_option("--dirty", cfg.dirty, "Changed targets, or 'all'")
      ->delimiter(',');
  simulate->add_option("--cache-cost-ms", cfg.cache_cost_ms)
      ->check(CLI::NonNegativeNumber)
      ->envname("BUILDIMPACT_CACHE_COST_MS");
  add_common(simulate);

  auto* evaluate =
      app.add_subcommand("evaluate", "Replay estimates over a history");
  add_history(evaluate);
  add_model(evaluate);
  evaluate->add_option("--period-builds", cfg.period_builds,
                       "Builds per past/future period")
      ->check(CLI::PositiveNumber);
  evaluate->add_option("--grid-top-k", cfg.grid_top_k)->delimiter(',');
  evaluate->add_option("--grid-window-days", cfg.grid_window_days)
      ->delimiter(',');
  evaluate->add_option("--grid-stat", cfg.grid_stats)
      ->delimiter(',')
      ->check(CLI::IsMember({"median", "mean", "p90"}));
  add_common(evaluate);

  auto* gen = app.add_subcommand("gen", "Generate a synthetic history");
  gen->add_option("--out", cfg.out_dir, "Output history directory")->required();
  gen->add_option("--graph", cfg.graph, "Use this graph instead of a random one");
  auto* gen_durations = gen->add_option("--durations", cfg.durations);
  auto* gen_unit = gen->add_flag("--unit-durations", cfg.unit_durations);
  gen_durations->excludes(gen_unit);
  gen->add_option("--targets", cfg.targets)->check(CLI::PositiveNumber);
  gen->add_option("--density", cfg.density)->check(CLI::Range(0.0, 1.0));
  gen->add_option("--min-ms", cfg.min_ms)->check(CLI::NonNegativeNumber);
  gen->add_option("--max-ms", cfg.max_ms)->check(CLI::NonNegativeNumber);
  gen->add_option("--builds", cfg.builds)->check(CLI::PositiveNumber);
  gen->add_option("--seed", cfg.seed)->envname("BUILDIMPACT_SEED");
  gen->add_option("--dirty-prob", cfg.dirty_prob)->check(CLI::Range(0.0, 1.0));
  gen->add_option("--dirty", cfg.dirty_overrides, "target=probability");
  gen->add_flag("--single-change", cfg.single_change,
                "Dirty exactly one target per build");
  gen->add_option("--jitter", cfg.jitter)->check(CLI::Range(0.0, 1.0));
  gen->add_option("--cache-cost-ms", cfg.cache_cost_ms)
      ->check(CLI::NonNegativeNumber)
      ->envname("BUILDIMPACT_CACHE_COST_MS");
  gen->add_flag("--no-initial-full-build", cfg.no_initial_full_build);
  gen->add_option("--add-edge", cfg.add_edges, "dependency:dependent");
  gen->add_option("--change-at", cfg.change_at, "1-based build of the change");
  add_common(gen);

  const bool json_mode = wants_json(args);
  std::vector<std::string> argv_storage{"buildimpact"};
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_storage) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    report_error(out, err, json_mode, "usage", e.what());
    return kExitUsage;
  }

  Report report;
  try {
    if (*mine) {
      report = run_mine(cfg);
    } else if (*diff) {
      report = run_diff(cfg);
    } else if (*estimate) {
      report = run_estimate(cfg);
    } else if (*simulate) {
      if (cfg.durations.empty() && !cfg.unit_durations) {
        report_error(out, err, json_mode, "usage",
                     "simulate needs --durations or --unit-durations");
        return kExitUsage;
      }
      report = run_simulate(cfg);
    } else if (*evaluate) {
      report = run_evaluate(cfg);
    } else if (*gen) {
      report = run_gen(cfg);
    }
  } catch (const Error& e) {
    report_error(out, err, json_mode, e.kind(), e.what());
    return kExitData;
  } catch (const std::filesystem::filesystem_error& e) {
    report_error(out, err, json_mode, "io", e.what());
    return kExitData;
  }

  const std::string body =
      cfg.format == "json" ? report.doc.dump(2) + "\n" : report.text;
  if (cfg.output.empty()) {
    out << body;
  } else {
    std::ofstream file(cfg.output);
    if (!file) {
      report_error(out, err, json_mode, "io", "cannot write " + cfg.output);
      return kExitData;
    }
    file << body;
  }
  return report.status;
}

}  // namespace buildimpact
