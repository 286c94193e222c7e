#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "buildimpact/error.hpp"
#include "buildimpact/evaluation.hpp"
#include "buildimpact/simulator.hpp"
#include "oracles.hpp"

using namespace buildimpact;
using oracle::hour;

namespace {

DependencyChain chain(std::vector<TargetId> t) { return DependencyChain{std::move(t)}; }

/// Two-sided exact p-value by enumerating every split of the pooled ranks.
double brute_force_exact_p(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> pooled(x);
  pooled.insert(pooled.end(), y.begin(), y.end());
  std::sort(pooled.begin(), pooled.end());
  const auto u_of = [&](const std::vector<bool>& in_x) {
    double u = 0;
    for (std::size_t i = 0; i < pooled.size(); ++i) {
      if (!in_x[i]) continue;
      for (std::size_t j = 0; j < pooled.size(); ++j) {
        if (!in_x[j] && pooled[j] < pooled[i]) u += 1;
      }
    }
    return u;
  };
  std::vector<bool> observed(pooled.size(), false);
  for (std::size_t i = 0; i < pooled.size(); ++i) {
    observed[i] = std::find(x.begin(), x.end(), pooled[i]) != x.end();
  }
  const double u_obs = u_of(observed);

  std::vector<bool> mask(pooled.size(), false);
  std::fill(mask.begin(), mask.begin() + static_cast<long>(x.size()), true);
  std::sort(mask.begin(), mask.end());
  double total = 0, le = 0, ge = 0;
  do {
    const double u = u_of(mask);
    total += 1;
    if (u <= u_obs) le += 1;
    if (u >= u_obs) ge += 1;
  } while (std::next_permutation(mask.begin(), mask.end()));
  return std::min(1.0, 2 * std::min(le, ge) / total);
}

/// prev: a and s unrelated; curr: a waits for s. Past builds rebuild a
/// (4000 ms), future builds rebuild s then a (2000 + 4000 ms).
struct Separated {
  DependencyGraph prev{{"a", "s"}, {}};
  DependencyGraph curr{{"a", "s"}, {{"s", "a"}}};
  ImpactEstimate estimate;

  Separated() {
    estimate.edge = {"s", "a"};
    estimate.classification = {EdgeKind::Outward, chain({"a"}), 0};
    estimate.impacts_lcp = true;
    estimate.lcp_old = chain({"a"});
    estimate.lcp_new = chain({"s", "a"});
    estimate.delta = 2000;
    estimate.affected_fraction = 1.0;
    estimate.gating_target = "s";
  }

  History history(int past, int future) const {
    std::vector<BuildRecord> rs;
    for (int i = 0; i < past; ++i) {
      rs.push_back({"p" + std::to_string(i), hour(i), "prev",
                    {{"a", 4000, false}, {"s", 0, true}}});
    }
    for (int i = 0; i < future; ++i) {
      rs.push_back({"f" + std::to_string(i), hour(past + i), "curr",
                    {{"a", 4000, false}, {"s", 2000, false}}});
    }
    return History(std::move(rs), {{"prev", prev}, {"curr", curr}});
  }
};

/// G1 at 100 ms per target, root rebuilt 80% of the time; t5 -> t2 added at
/// build 51.
History g1_change_history(std::size_t builds = 100) {
  const auto g = oracle::g1();
  std::map<TargetId, Millis> durations;
  for (const auto& t : g.targets()) durations[t] = 100;
  WorkloadOptions opts;
  opts.changes.push_back({51, {{"t5", "t2"}}});
  return generate_history(g, durations, ChangeModel{0, {{"t0", 0.8}}, true},
                          builds, 5, opts);
}

const EvalOutcome* find_outward(const ReplayResult& r) {
  for (const auto& o : r.outcomes) {
    if (o.estimate.classification.kind == EdgeKind::Outward) return &o;
  }
  return nullptr;
}

}  // namespace

TEST_CASE("current_build_check") {
  const auto g = oracle::g1();
  const auto unit = oracle::unit_durations(g);
  ImpactEstimate e;
  e.impacts_lcp = true;
  e.lcp_new = chain({"t3", "t5"});

  auto r = oracle::make_record("b", hour(0), "g", g, unit, {"t3", "t5"});
  auto c = current_build_check(e, r, g);
  CHECK(c.match);
  CHECK_FALSE(c.vacuous);

  r = oracle::make_record("b", hour(0), "g", g, unit, oracle::all_targets(g));
  c = current_build_check(e, r, g);
  CHECK_FALSE(c.match);
  CHECK_FALSE(c.vacuous);

  e.impacts_lcp = false;
  e.lcp_new.reset();
  c = current_build_check(e, r, g);
  CHECK(c.vacuous);
}

TEST_CASE("mann_whitney_u exact distribution") {
  const std::vector<double> x{1.5, 3.2, 7.7, 9.1, 10.0};
  const std::vector<double> y{2.1, 4.4, 5.0, 11.3, 12.0, 13.5};
  const auto r = mann_whitney_u(x, y);
  CHECK(r.exact);
  CHECK(r.u == 10);
  CHECK(r.p_value == doctest::Approx(brute_force_exact_p(x, y)));
  CHECK(r.p_value == doctest::Approx(0.42857142857142855));

  const std::vector<double> lo{1, 2, 3, 4}, hi{5, 6, 7, 8};
  CHECK(mann_whitney_u(lo, hi).p_value == doctest::Approx(0.02857142857142857));
  CHECK(mann_whitney_u(hi, lo).u == 16);

  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> d(0, 1);
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<double> a(1 + trial % 6), b(1 + (trial * 5) % 7);
    for (auto& v : a) v = d(rng);
    for (auto& v : b) v = d(rng);
    CHECK(mann_whitney_u(a, b).p_value == doctest::Approx(brute_force_exact_p(a, b)));
  }
}

TEST_CASE("mann_whitney_u normal approximation") {
  // Reference p-values from scipy.stats.mannwhitneyu (asymptotic,
  // continuity-corrected, two-sided).
  const std::vector<double> x{1, 2, 2, 3, 4, 4, 5}, y{3, 3, 4, 6, 6, 7, 8, 8};
  auto r = mann_whitney_u(x, y);
  CHECK_FALSE(r.exact);
  CHECK(r.u == 9);
  CHECK(r.p_value == doctest::Approx(0.0305949678586612).epsilon(1e-9));

  std::vector<double> big_x, big_y;
  for (int v = 0; v < 50; v += 2) big_x.push_back(v);
  for (int v = 10; v < 60; v += 2) big_y.push_back(v + 0.5);
  r = mann_whitney_u(big_x, big_y);
  CHECK_FALSE(r.exact);
  CHECK(r.u == 190);
  CHECK(r.p_value == doctest::Approx(0.017925777357406476).epsilon(1e-9));

  std::vector<double> tx(10, 1.0), ty(3, 1.0);
  tx.insert(tx.end(), 5, 2.0);
  ty.insert(ty.end(), 10, 2.0);
  ty.insert(ty.end(), 4, 3.0);
  r = mann_whitney_u(tx, ty);
  CHECK(r.u == 55);
  CHECK(r.p_value == doctest::Approx(0.0028215630145112256).epsilon(1e-9));

  const std::vector<double> same(6, 3.0);
  CHECK(mann_whitney_u(same, same).p_value == 1.0);
  CHECK_THROWS_AS(mann_whitney_u({}, same), PreconditionError);
}

TEST_CASE("mann_whitney_u null rejection rate") {
  std::mt19937_64 rng(23);
  std::normal_distribution<double> d(100, 15);
  const int trials = 2000;
  int rejected = 0;
  for (int t = 0; t < trials; ++t) {
    std::vector<double> a(12), b(12);
    for (auto& v : a) v = d(rng);
    for (auto& v : b) v = d(rng);
    if (mann_whitney_u(a, b).p_value < 0.05) ++rejected;
  }
  const double rate = static_cast<double>(rejected) / trials;
  CHECK(rate <= 0.065);
  CHECK(rate >= 0.025);
}

TEST_CASE("past_future_check") {
  const Separated s;

  SUBCASE("fully separated makespans") {
    const auto h = s.history(10, 10);
    const auto r = past_future_check(h, "f0", s.estimate);
    CHECK(r.past_period == 10);
    CHECK(r.future_period == 10);
    CHECK(r.past_sample == std::vector<Millis>(10, 4000));
    CHECK(r.future_sample == std::vector<Millis>(10, 6000));
    CHECK(r.observed_delta == 2000);
    CHECK(r.observed_affected_fraction == 1.0);
    CHECK(r.p_value < 0.01);
  }
  SUBCASE("periods are equal and capped") {
    const auto h = s.history(30, 8);
    const auto r = past_future_check(h, "f0", s.estimate, 50);
    CHECK(r.past_period == 8);
    CHECK(r.past_sample.size() == 8);
    const auto capped = past_future_check(s.history(30, 30), "f0", s.estimate, 6);
    CHECK(capped.future_sample.size() == 6);
  }
  SUBCASE("too few future builds") {
    const auto h = s.history(10, 3);
    try {
      past_future_check(h, "f0", s.estimate);
      FAIL("expected insufficient sample");
    } catch (const InsufficientSampleError& e) {
      CHECK(e.future() == 3);
    }
  }
  SUBCASE("preconditions") {
    const auto h = s.history(10, 10);
    CHECK_THROWS_AS(past_future_check(h, "nope", s.estimate), PreconditionError);
    ImpactEstimate none = s.estimate;
    none.impacts_lcp = false;
    none.lcp_new.reset();
    CHECK_THROWS_AS(past_future_check(h, "f0", none), PreconditionError);
  }
}

TEST_CASE("replay") {
  SUBCASE("history without graph changes") {
    const auto g = oracle::g1();
    const auto h = generate_history(g, oracle::unit_durations(g),
                                    ChangeModel{0.2, {}, true}, 30, 1, {});
    const auto r = replay(h, {});
    CHECK(r.outcomes.empty());
    CHECK(r.skipped.empty());
  }
  SUBCASE("single build") {
    const auto r = replay(g1_change_history().truncated(1), {});
    CHECK(r.outcomes.empty());
    REQUIRE(r.skipped.size() == 1);
    CHECK(r.skipped[0].reason == "insufficient history");
  }
  SUBCASE("edge added mid-history") {
    const auto h = g1_change_history();
    const auto r = replay(h, {});
    const auto* o = find_outward(r);
    REQUIRE(o != nullptr);
    CHECK(o->build_id == "b0051");
    CHECK(o->estimate.edge == DependencyEdge{"t5", "t2"});
    CHECK(o->estimate.lcp_old == chain({"t0", "t2", "t4", "t6"}));
    CHECK(o->estimate.delta == 200);
    CHECK(o->estimate.lcp_new == chain({"t0", "t3", "t5", "t2", "t4", "t6"}));
    REQUIRE(o->past_future.has_value());
    CHECK(o->past_future->observed_delta == 200);
    CHECK(o->past_future->p_value < 0.01);
    CHECK(o->past_future->observed_affected_fraction ==
          doctest::Approx(o->estimate.affected_fraction).epsilon(0.2));
    CHECK(format_outcomes(r.outcomes).find("b0051  t5 -> t2  outward") !=
          std::string::npos);
  }
  SUBCASE("no lookahead") {
    const auto h = g1_change_history();
    const auto at = h.position("b0051");
    const auto cut = h.truncated(at + 1);
    const auto full_models = models_before(h, at, {});
    const auto cut_models = models_before(cut, at, {});
    CHECK(full_models.time == cut_models.time);
    CHECK(full_models.cache == cut_models.cache);
    CHECK(full_models.lcps == cut_models.lcps);

    const auto* full = find_outward(replay(h, {}));
    const auto cut_result = replay(cut, {});
    const auto* partial = find_outward(cut_result);
    REQUIRE(full != nullptr);
    REQUIRE(partial != nullptr);
    CHECK(full->estimate == partial->estimate);
    CHECK(full->current_lcp_match == partial->current_lcp_match);
    CHECK_FALSE(partial->past_future.has_value());
  }
}

TEST_CASE("tune_parameters") {
  const auto h = g1_change_history();
  const TuningGrid one{{5}, {std::chrono::days{90}}, {Statistic::Median}};
  const auto rows = tune_parameters(h, one);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].top_k == 5);
  CHECK(rows[0].outcomes > 0);
  REQUIRE(rows[0].match_rate.has_value());

  // Every non-empty LCP in this history is the same, so k does not matter.
  const TuningGrid ks{{1, 5}, {std::chrono::days{90}}, {Statistic::Median}};
  const auto both = tune_parameters(h, ks);
  REQUIRE(both.size() == 2);
  CHECK(both[0].match_rate == both[1].match_rate);
  CHECK(both[0].top_k == 1);  // grid order breaks the tie

  const auto table = format_tuning_table(both);
  CHECK(table.rfind("rank  top_k", 0) == 0);

  CHECK_THROWS_AS(tune_parameters(h, TuningGrid{}), PreconditionError);
}
