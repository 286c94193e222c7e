#include <doctest.h>

#include <fstream>
#include <sstream>

#include "buildimpact/error.hpp"
#include "buildimpact/history.hpp"
#include "buildimpact/json_io.hpp"
#include "oracles.hpp"
#include "temp_dir.hpp"

using namespace buildimpact;
using oracle::hour;

namespace {

DependencyChain chain(std::vector<TargetId> t) { return DependencyChain{std::move(t)}; }

const std::chrono::milliseconds kNinetyDays = std::chrono::days{90};

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream(p) << text;
}

/// Ten G1 builds: nine rebuild t3 (LCP t3,t5), one rebuilds everything.
History ten_build_history() {
  const auto g = oracle::g1();
  const auto unit = oracle::unit_durations(g);
  std::vector<BuildRecord> records;
  for (int i = 0; i < 10; ++i) {
    const auto executed = i == 4 ? oracle::all_targets(g)
                                 : std::set<TargetId>{"t3", "t5"};
    records.push_back(oracle::make_record("b" + std::to_string(i), hour(i),
                                          "g1.json", g, unit, executed));
  }
  return History(std::move(records), {{"g1.json", g}});
}

/// Single-target-graph history with the given non-cached durations for t4.
History t4_history(const std::vector<Millis>& durations, bool extra_cached) {
  const DependencyGraph g({"t4", "z"}, {});
  std::vector<BuildRecord> records;
  int h = 0;
  for (const Millis d : durations) {
    records.push_back({"b" + std::to_string(h), hour(h), "g", {{"t4", d, false}, {"z", 1, false}}});
    ++h;
  }
  if (extra_cached) {
    records.push_back({"cached", hour(h), "g", {{"t4", 0, true}, {"z", 1, false}}});
  }
  return History(std::move(records), {{"g", g}});
}

}  // namespace

TEST_CASE("timestamps") {
  const auto t = parse_timestamp("2026-03-04T05:06:07Z");
  CHECK(format_timestamp(t) == "2026-03-04T05:06:07Z");
  CHECK(parse_timestamp("2026-03-04T07:06:07+02:00") == t);
  CHECK(format_timestamp(parse_timestamp("2026-03-04T05:06:07.25Z")) ==
        "2026-03-04T05:06:07.250Z");
  CHECK_THROWS_AS(parse_timestamp("2026-03-04 05:06:07"), ParseError);
  CHECK_THROWS_AS(parse_timestamp("2026-13-04T05:06:07Z"), ParseError);
  CHECK_THROWS_AS(parse_timestamp("2026-03-04T05:06:07"), ParseError);
}

TEST_CASE("ingest_history from a directory") {
  TempDir dir;
  const auto g = oracle::g1();
  {
    std::ofstream out(dir.path() / "g1.json");
    write_graph(out, g);
  }
  const auto unit = oracle::unit_durations(g);
  // Written out of time order on purpose.
  for (int i : {2, 0, 1}) {
    const auto r = oracle::make_record("b" + std::to_string(i), hour(i),
                                       "g1.json", g, unit, {"t3", "t5"});
    write_file(dir.path() / ("build" + std::to_string(i) + ".json"),
               record_to_json(r).dump());
  }

  const History h = ingest_history(dir.path());
  REQUIRE(h.size() == 3);
  CHECK(h.records()[0].build_id == "b0");
  CHECK(h.records()[2].build_id == "b2");
  CHECK(h.graph_for(h.records()[0]) == g);

  SUBCASE("manifest restricts and orders files") {
    write_file(dir.path() / "manifest.json",
               R"({"files": ["g1.json", "build1.json"]})");
    const History m = ingest_history(dir.path());
    REQUIRE(m.size() == 1);
    CHECK(m.records()[0].build_id == "b1");
  }
  SUBCASE("write_history round-trips") {
    TempDir copy;
    write_history(copy.path(), h);
    const History again = ingest_history(copy.path());
    CHECK(again.records() == h.records());
    CHECK(again.graphs() == h.graphs());
  }
}

TEST_CASE("ingest_history edge cases") {
  TempDir empty;
  CHECK(ingest_history(empty.path()).empty());

  TempDir bad;
  const auto g = oracle::g1();
  {
    std::ofstream out(bad.path() / "g1.json");
    write_graph(out, g);
  }
  // t3 executed, t5 (its dependent) served from cache.
  auto r = oracle::make_record("broken", hour(0), "g1.json", g,
                               oracle::unit_durations(g), {"t3"});
  write_file(bad.path() / "b.json", record_to_json(r).dump());
  try {
    ingest_history(bad.path());
    FAIL("expected a coherence error");
  } catch (const CoherenceError& e) {
    CHECK(e.target() == "t5");
    CHECK(e.build_id() == "broken");
  }

  SUBCASE("unresolvable graph reference") {
    r = oracle::make_record("x", hour(0), "missing.json", g,
                            oracle::unit_durations(g), {"t3", "t5"});
    write_file(bad.path() / "b.json", record_to_json(r).dump());
    CHECK_THROWS_AS(ingest_history(bad.path()), ParseError);
  }
  SUBCASE("record missing a target") {
    r = oracle::make_record("x", hour(0), "g1.json", g,
                            oracle::unit_durations(g), {"t3", "t5"});
    r.executions.pop_back();
    write_file(bad.path() / "b.json", record_to_json(r).dump());
    CHECK_THROWS_AS(ingest_history(bad.path()), CoherenceError);
  }
  SUBCASE("malformed build file") {
    write_file(bad.path() / "b.json",
               R"({"build_id": "x", "timestamp": "yesterday", "graph_ref": "g1.json", "targets": []})");
    CHECK_THROWS_AS(ingest_history(bad.path()), ParseError);
  }
}

TEST_CASE("ingest_history from a bundle stream") {
  const History h = ten_build_history();
  json doc = {{"graphs", {{"g1.json", graph_to_json(oracle::g1())}}},
              {"builds", json::array()}};
  for (const auto& r : h.records()) doc["builds"].push_back(record_to_json(r));
  std::istringstream in(doc.dump());
  const History again = ingest_history(in);
  CHECK(again.records() == h.records());
}

TEST_CASE("build_time_model") {
  SUBCASE("median of three") {
    const auto h = t4_history({100, 120, 110}, false);
    const auto tm = build_time_model(h, h.window_through_latest(kNinetyDays),
                                     Statistic::Median);
    CHECK(tm.duration("t4") == 110);
  }
  SUBCASE("median of four averages the middle pair") {
    const auto h = t4_history({100, 120, 110, 500}, false);
    const auto w = h.window_through_latest(kNinetyDays);
    CHECK(build_time_model(h, w, Statistic::Median).duration("t4") == 115);
    CHECK(build_time_model(h, w, Statistic::Mean).duration("t4") == 207.5);
    // Ranks 0.9 * 3 = 2.7 between 120 and 500.
    CHECK(build_time_model(h, w, Statistic::P90).duration("t4") ==
          doctest::Approx(120 + 0.7 * 380));
  }
  SUBCASE("cached executions are not samples") {
    const auto h = t4_history({100, 120, 110}, true);
    const auto tm = build_time_model(h, h.window_through_latest(kNinetyDays),
                                     Statistic::Median);
    CHECK(tm.duration("t4") == 110);
  }
  SUBCASE("target always cached in window") {
    const auto h = t4_history({100}, true);
    // Window holding only the last (cached) build.
    const TimeWindow w{hour(1), hour(2)};
    try {
      build_time_model(h, w, Statistic::Median);
      FAIL("expected no-data error");
    } catch (const NoDataError& e) {
      CHECK(e.targets() == std::vector<std::string>{"t4"});
    }
  }
  SUBCASE("empty window") {
    const auto h = t4_history({100}, false);
    CHECK_THROWS_AS(build_time_model(h, TimeWindow{hour(50), hour(60)},
                                     Statistic::Median),
                    EmptyWindowError);
  }
  SUBCASE("unknown target queries are errors") {
    const auto h = t4_history({100}, false);
    const auto tm = build_time_model(h, h.window_through_latest(kNinetyDays),
                                     Statistic::Median);
    CHECK_THROWS_AS(tm.duration("nope"), UnknownTargetError);
  }
}

TEST_CASE("time_of_chain") {
  const auto g = oracle::g1();
  const TimeModel unit(oracle::unit_durations(g));
  CHECK(time_of_chain(unit, chain({"t0", "t2", "t4", "t6"})) == 4);
  CHECK(time_of_chain(unit, chain({})) == 0);
  const TimeModel ab({{"a", 3}, {"b", 5}});
  CHECK(time_of_chain(ab, chain({"a", "b"})) == 8);
  CHECK_THROWS_AS(time_of_chain(ab, chain({"a", "c"})), UnknownTargetError);
}

TEST_CASE("build_cache_model") {
  const auto g = oracle::g1();
  const auto unit = oracle::unit_durations(g);
  std::vector<BuildRecord> records;
  for (int i = 0; i < 10; ++i) {
    const auto executed = i == 0 ? std::set<TargetId>{"t4", "t6"}
                                 : std::set<TargetId>{"t3", "t5"};
    records.push_back(oracle::make_record("b" + std::to_string(i), hour(i),
                                          "g1.json", g, unit, executed));
  }
  const History h(std::move(records), {{"g1.json", g}});
  const auto cm = build_cache_model(h, h.window_through_latest(kNinetyDays));
  CHECK(*cm.built_probability("t3") == doctest::Approx(0.9));
  CHECK(*cm.cached_probability("t3") == doctest::Approx(0.1));
  CHECK(*cm.built_probability("t0") == 0);
  CHECK(cm.samples("t3") == 10);
  CHECK(cm.warnings().empty());

  SUBCASE("targets absent from the window are excluded and flagged") {
    const DependencyGraph small({"a"}, {});
    std::vector<BuildRecord> rs{
        {"x", hour(0), "big", {}},
        {"y", hour(1), "small", {{"a", 1, false}}},
    };
    for (const auto& t : g.targets()) rs[0].executions.push_back({t, 1, false});
    const History mixed(std::move(rs), {{"big", g}, {"small", small}});
    const auto partial = build_cache_model(mixed, TimeWindow{hour(1), hour(2)});
    CHECK(*partial.built_probability("a") == 1.0);
    CHECK_FALSE(partial.built_probability("t3").has_value());
    CHECK(partial.warnings() == g.targets());

    std::vector<std::size_t> only_small{1};
    const auto quiet = build_cache_model(mixed, only_small, TimeWindow{hour(1), hour(2)});
    CHECK(quiet.warnings().empty());
  }
  SUBCASE("empty window") {
    CHECK_THROWS_AS(build_cache_model(h, TimeWindow{hour(100), hour(200)}),
                    EmptyWindowError);
  }
}

TEST_CASE("realized_lcp") {
  const auto g = oracle::g1();
  const auto unit = oracle::unit_durations(g);
  const auto record = [&](std::set<TargetId> executed) {
    return oracle::make_record("b", hour(0), "g", g, unit,
                               oracle::closure_fixpoint(g, executed));
  };
  CHECK(realized_lcp(record({"t3"}), g) == chain({"t3", "t5"}));
  CHECK(realized_lcp(record({"t0"}), g) == chain({"t0", "t2", "t4", "t6"}));
  CHECK(realized_lcp(record({"t2"}), g) == chain({"t2", "t4", "t6"}));
  CHECK(record_makespan(record({"t0"}), g) == 4);
  CHECK(realized_lcp(record({}), g).empty());

  SUBCASE("non-zero retrieval cost keeps cached targets on the path") {
    const auto r = oracle::make_record("b", hour(0), "g", g, unit, {"t3", "t5"}, 5);
    // Cached t0,t2,t4,t6 at 5 each outweigh the executed t3,t5.
    CHECK(realized_lcp(r, g) == chain({"t0", "t2", "t4", "t6"}));
    CHECK(record_makespan(r, g) ==
          oracle::makespan_by_paths(g, unit, {"t3", "t5"}, 5));
  }
  SUBCASE("incoherent record") {
    const auto r = oracle::make_record("b", hour(0), "g", g, unit, {"t3"});
    CHECK_THROWS_AS(realized_lcp(r, g), CoherenceError);
  }
}

TEST_CASE("mine_top_lcps") {
  const History h = ten_build_history();
  const auto w = h.window_through_latest(kNinetyDays);

  const auto top1 = mine_top_lcps(h, 1, w);
  REQUIRE(top1.profiles.size() == 1);
  CHECK(top1.profiles[0].lcp == chain({"t3", "t5"}));
  CHECK(top1.profiles[0].frequency == 9);
  CHECK(top1.profiles[0].share == doctest::Approx(0.9));
  CHECK(top1.coverage == doctest::Approx(0.9));

  const auto top5 = mine_top_lcps(h, 5, w);
  REQUIRE(top5.profiles.size() == 2);
  CHECK(top5.profiles[1].lcp == chain({"t0", "t2", "t4", "t6"}));
  CHECK(top5.coverage == doctest::Approx(1.0));

  CHECK_THROWS_AS(mine_top_lcps(h, 0, w), PreconditionError);
  CHECK_THROWS_AS(mine_top_lcps(h, 1, TimeWindow{hour(100), hour(101)}),
                  EmptyWindowError);

  SUBCASE("frequency ties rank lexicographically") {
    const auto g = oracle::g1();
    const auto unit = oracle::unit_durations(g);
    std::vector<BuildRecord> rs;
    rs.push_back(oracle::make_record("x", hour(0), "g", g, unit, {"t3", "t5"}));
    rs.push_back(oracle::make_record("y", hour(1), "g", g, unit, {"t1"}));
    rs.push_back(oracle::make_record("z", hour(2), "g", g, unit, {}));
    const History tied(std::move(rs), {{"g", g}});
    const auto m = mine_top_lcps(tied, 5, tied.window_through_latest(kNinetyDays));
    REQUIRE(m.profiles.size() == 2);
    CHECK(m.profiles[0].lcp == chain({"t1"}));
    CHECK(m.profiles[1].lcp == chain({"t3", "t5"}));
    CHECK(m.noop_builds == 1);
    CHECK(m.window_builds == 3);
  }
}
