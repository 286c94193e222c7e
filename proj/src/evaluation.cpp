#include "buildimpact/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "buildimpact/error.hpp"

namespace buildimpact {

CurrentBuildCheck current_build_check(const ImpactEstimate& e,
                                      const BuildRecord& r,
                                      const DependencyGraph& g) {
  if (!e.impacts_lcp || !e.lcp_new) return {true, true};
  return {realized_lcp(r, g) == *e.lcp_new, false};
}

namespace {

constexpr std::size_t kExactLimit = 20;

/// Null distribution of U for tie-free samples: counts[u] is the number of
/// orderings with statistic u, via N(u; m, n) = N(u - n; m - 1, n) +
/// N(u; m, n - 1).
std::vector<double> exact_u_counts(std::size_t m, std::size_t n) {
  // table[a][b] holds the distribution for sizes (a, b).
  std::vector<std::vector<std::vector<double>>> table(
      m + 1, std::vector<std::vector<double>>(n + 1));
  for (std::size_t a = 0; a <= m; ++a) {
    for (std::size_t b = 0; b <= n; ++b) {
      auto& dist = table[a][b];
      dist.assign(a * b + 1, 0.0);
      if (a == 0 || b == 0) {
        dist[0] = 1.0;
        continue;
      }
      const auto& drop_x = table[a - 1][b];  // largest value belongs to x
      const auto& drop_y = table[a][b - 1];  // largest value belongs to y
      for (std::size_t u = 0; u < drop_x.size(); ++u) dist[u + b] += drop_x[u];
      for (std::size_t u = 0; u < drop_y.size(); ++u) dist[u] += drop_y[u];
    }
  }
  return table[m][n];
}

}  // namespace

MannWhitneyResult mann_whitney_u(std::span<const double> x,
                                 std::span<const double> y) {
  const std::size_t n1 = x.size();
  const std::size_t n2 = y.size();
  if (n1 == 0 || n2 == 0) throw PreconditionError("Mann-Whitney needs data");
  const std::size_t total = n1 + n2;

  std::vector<std::pair<double, bool>> pooled;  // (value, from x)
  pooled.reserve(total);
  for (const double v : x) pooled.emplace_back(v, true);
  for (const double v : y) pooled.emplace_back(v, false);
  std::sort(pooled.begin(), pooled.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  double rank_sum_x = 0;
  double tie_term = 0;
  bool ties = false;
  for (std::size_t i = 0; i < total;) {
    std::size_t j = i;
    while (j < total && pooled[j].first == pooled[i].first) ++j;
    const double t = static_cast<double>(j - i);
    const double avg_rank = (static_cast<double>(i + 1 + j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) {
      if (pooled[k].second) rank_sum_x += avg_rank;
    }
    if (t > 1) {
      ties = true;
      tie_term += t * t * t - t;
    }
    i = j;
  }

  const double m = static_cast<double>(n1);
  const double n = static_cast<double>(n2);
  MannWhitneyResult out;
  out.u = rank_sum_x - m * (m + 1) / 2.0;

  if (!ties && n1 <= kExactLimit && n2 <= kExactLimit) {
    const auto counts = exact_u_counts(n1, n2);
    const double all = std::accumulate(counts.begin(), counts.end(), 0.0);
    const auto u = static_cast<std::size_t>(std::llround(out.u));
    double lower = 0;
    for (std::size_t k = 0; k <= u; ++k) lower += counts[k];
    double upper = 0;
    for (std::size_t k = u; k < counts.size(); ++k) upper += counts[k];
    out.p_value = std::min(1.0, 2.0 * std::min(lower, upper) / all);
    out.exact = true;
    return out;
  }

  const double mean = m * n / 2.0;
  const double big_n = m + n;
  const double variance =
      m * n / 12.0 * ((big_n + 1) - tie_term / (big_n * (big_n - 1)));
  if (variance <= 0) {
    out.p_value = 1.0;
    return out;
  }
  const double z =
      std::max(0.0, std::fabs(out.u - mean) - 0.5) / std::sqrt(variance);
  out.p_value = std::min(1.0, std::erfc(z / std::sqrt(2.0)));
  return out;
}

PastFutureResult past_future_check(const History& h,
                                   std::string_view build_id,
                                   const ImpactEstimate& e,
                                   std::size_t period_builds) {
  const std::size_t i = h.position(build_id);
  if (i == h.size()) {
    throw PreconditionError("unknown build '" + std::string(build_id) + "'");
  }
  if (!e.impacts_lcp || !e.lcp_new) {
    throw PreconditionError("estimate predicts no new LCP to look for");
  }
  const std::size_t period = std::min({period_builds, i, h.size() - i});

  PastFutureResult out;
  out.past_period = period;
  out.future_period = period;
  std::size_t future_hits = 0;
  const auto scan = [&](std::size_t index, const DependencyChain& expected,
                        std::vector<Millis>& sample, std::size_t& near_miss) {
    const auto& r = h.records()[index];
    const auto& g = h.graph_for(r);
    const auto lcp = realized_lcp(r, g);
    if (lcp == expected) {
      sample.push_back(record_makespan(r, g));
      return true;
    }
    if (!lcp.empty() && lcp.back() == expected.back()) ++near_miss;
    return false;
  };
  for (std::size_t k = i - period; k < i; ++k) {
    scan(k, e.lcp_old, out.past_sample, out.past_near_miss);
  }
  for (std::size_t k = i; k < i + period; ++k) {
    if (scan(k, *e.lcp_new, out.future_sample, out.future_near_miss)) {
      ++future_hits;
    }
  }
  if (out.past_sample.size() < kMinQualifyingBuilds ||
      out.future_sample.size() < kMinQualifyingBuilds) {
    throw InsufficientSampleError(out.past_sample.size(),
                                  out.future_sample.size(),
                                  kMinQualifyingBuilds);
  }

  out.p_value = mann_whitney_u(out.past_sample, out.future_sample).p_value;
  out.observed_delta = summarize(out.future_sample, Statistic::Median) -
                       summarize(out.past_sample, Statistic::Median);
  out.observed_affected_fraction =
      static_cast<double>(future_hits) / static_cast<double>(period);
  return out;
}

ReplayModels models_before(const History& h, std::size_t index,
                           const ReplayConfig& cfg) {
  if (index >= h.size()) throw PreconditionError("replay index out of range");
  std::vector<std::size_t> earlier(index);
  std::iota(earlier.begin(), earlier.end(), std::size_t{0});
  const TimeWindow window =
      trailing_window(h.records()[index].timestamp, cfg.window);

  ReplayModels models;
  models.time = build_time_model(h, earlier, window, cfg.stat);
  models.cache = build_cache_model(h, earlier, window);
  for (auto& p : mine_top_lcps(h, earlier, cfg.top_k, window).profiles) {
    models.lcps.push_back(std::move(p.lcp));
  }
  return models;
}

ReplayResult replay(const History& h, const ReplayConfig& cfg) {
  ReplayResult out;
  if (h.size() < 2) {
    out.skipped.push_back(
        {h.empty() ? std::string() : h.records().front().build_id,
         "insufficient history"});
    return out;
  }
  for (std::size_t i = 1; i < h.size(); ++i) {
    const auto& record = h.records()[i];
    const auto& prev = h.graph_for(h.records()[i - 1]);
    const auto& curr = h.graph_for(record);
    if (prev == curr) continue;

    std::vector<ImpactEstimate> estimates;
    try {
      ReplayModels models = models_before(h, i, cfg);
      std::erase_if(models.lcps, [&](const DependencyChain& lcp) {
        return !is_valid_chain(prev, lcp);
      });
      estimates =
          estimate_change(prev, curr, models.time, models.cache, models.lcps);
    } catch (const Error& e) {
      out.skipped.push_back({record.build_id, e.what()});
      continue;
    }

    for (auto& estimate : estimates) {
      EvalOutcome o;
      o.build_id = record.build_id;
      const auto check = current_build_check(estimate, record, curr);
      o.current_lcp_match = check.match;
      o.current_check_vacuous = check.vacuous;
      if (!estimate.impacts_lcp) {
        o.note = "no-impact prediction";
      } else {
        try {
          o.past_future =
              past_future_check(h, record.build_id, estimate, cfg.period_builds);
        } catch (const InsufficientSampleError& e) {
          o.note = e.what();
        }
      }
      o.estimate = std::move(estimate);
      out.outcomes.push_back(std::move(o));
    }
  }
  return out;
}

namespace {

std::optional<double> mean_of(const std::vector<double>& v) {
  if (v.empty()) return std::nullopt;
  return std::accumulate(v.begin(), v.end(), 0.0) /
         static_cast<double>(v.size());
}

/// -1 if a ranks before b, 1 if after, 0 if tied. Missing values rank last.
int compare_score(const std::optional<double>& a, const std::optional<double>& b,
                  bool higher_is_better) {
  if (!a && !b) return 0;
  if (!a) return 1;
  if (!b) return -1;
  if (*a == *b) return 0;
  const bool a_better = higher_is_better ? *a > *b : *a < *b;
  return a_better ? -1 : 1;
}

}  // namespace

std::vector<TuningRow> tune_parameters(const History& h, const TuningGrid& grid,
                                       std::size_t period_builds) {
  if (grid.top_k.empty() || grid.windows.empty() || grid.stats.empty()) {
    throw PreconditionError("tuning grid is empty");
  }
  std::vector<TuningRow> rows;
  for (const std::size_t k : grid.top_k) {
    for (const auto window : grid.windows) {
      for (const Statistic stat : grid.stats) {
        const auto result = replay(h, {k, window, stat, period_builds});
        TuningRow row{k, window, stat, result.outcomes.size(), {}, {}, {}};
        std::vector<double> matches, delta_errors, fraction_errors;
        for (const auto& o : result.outcomes) {
          matches.push_back(o.current_lcp_match ? 1.0 : 0.0);
          if (!o.past_future) continue;
          const auto& pf = *o.past_future;
          if (o.estimate.delta > 0) {
            delta_errors.push_back(std::fabs(pf.observed_delta -
                                             o.estimate.delta) /
                                   o.estimate.delta);
          }
          fraction_errors.push_back(std::fabs(pf.observed_affected_fraction -
                                              o.estimate.affected_fraction));
        }
        row.match_rate = mean_of(matches);
        row.delta_error = mean_of(delta_errors);
        row.fraction_error = mean_of(fraction_errors);
        rows.push_back(row);
      }
    }
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const TuningRow& a, const TuningRow& b) {
                     if (int c = compare_score(a.match_rate, b.match_rate, true))
                       return c < 0;
                     if (int c = compare_score(a.delta_error, b.delta_error,
                                               false))
                       return c < 0;
                     return compare_score(a.fraction_error, b.fraction_error,
                                          false) < 0;
                   });
  return rows;
}

namespace {

std::string fixed(const std::optional<double>& v, const char* fmt = "%.4f") {
  if (!v) return "-";
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, *v);
  return buf;
}

}  // namespace

std::string format_tuning_table(std::span<const TuningRow> rows) {
  std::string out =
      "rank  top_k  window_days  stat    outcomes  match_rate  delta_error  "
      "fraction_error\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    const double days =
        static_cast<double>(r.window.count()) / (24.0 * 3600.0 * 1000.0);
    char buf[256];
    std::snprintf(buf, sizeof buf, "%-4zu  %-5zu  %-11s  %-6s  %-8zu  %-10s  %-11s  %s\n",
                  i + 1, r.top_k, fixed(days, "%g").c_str(),
                  to_string(r.stat).c_str(), r.outcomes,
                  fixed(r.match_rate).c_str(), fixed(r.delta_error).c_str(),
                  fixed(r.fraction_error).c_str());
    out += buf;
  }
  return out;
}

std::string format_outcomes(std::span<const EvalOutcome> outcomes) {
  if (outcomes.empty()) return "no graph changes evaluated\n";
  std::string out;
  for (const auto& o : outcomes) {
    const auto& e = o.estimate;
    out += o.build_id + "  " + to_string(e.edge) + "  " +
           to_string(e.classification.kind);
    if (e.impacts_lcp) {
      out += "  predicted_delta=" + fixed(e.delta, "%g") +
             " predicted_p=" + fixed(e.affected_fraction, "%.3f");
    } else {
      out += "  no-impact";
    }
    out += o.current_check_vacuous
               ? "  current=vacuous"
               : (o.current_lcp_match ? "  current=match" : "  current=miss");
    if (o.past_future) {
      const auto& pf = *o.past_future;
      out += "  p_value=" + fixed(pf.p_value, "%.3g") +
             " observed_delta=" + fixed(pf.observed_delta, "%g") +
             " observed_p=" + fixed(pf.observed_affected_fraction, "%.3f");
    } else if (!o.note.empty()) {
      out += "  (" + o.note + ")";
    }
    out += '\n';
  }
  return out;
}

}  // namespace buildimpact
