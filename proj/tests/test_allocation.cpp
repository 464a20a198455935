#include <doctest.h>

#include <cmath>
#include <numeric>

#include "qoesim/allocation.hpp"
#include "qoesim/csv.hpp"
#include "support.hpp"

using namespace qoesim;

namespace {

constexpr auto kNone = SessionAllocation::kNotAdmitted;

struct Instance {
  std::vector<int> grid;
  std::vector<std::vector<double>> rows;
  UtilityCurve curve;

  AllocationInput input(double capacity) const {
    AllocationInput in{capacity, {}, grid, curve};
    for (const auto& r : rows) in.demands.emplace_back(r);
    return in;
  }
};

Instance worked_example() { return {{50, 70, 90}, {{1e6, 1.5e6, 3e6}, {2e6, 3e6, 6e6}}, UtilityCurve()}; }

double sum_r(const Allocation& a) {
  double s = 0.0;
  for (const auto& x : a.sessions) s += x.r;
  return s;
}

/// Small random instance: up to 4 sessions, up to 5 targets, integer kbit/s demands.
Instance random_instance(std::mt19937_64& rng) {
  Instance in;
  const int g = test::uniform_int(rng, 1, 5);
  std::vector<int> pool;
  for (int v = 40; v <= 95; ++v) pool.push_back(v);
  std::shuffle(pool.begin(), pool.end(), rng);
  in.grid.assign(pool.begin(), pool.begin() + g);
  if (std::none_of(in.grid.begin(), in.grid.end(), [](int v) { return v >= 50 && v <= 90; }))
    in.grid[0] = test::uniform_int(rng, 50, 90);
  std::sort(in.grid.begin(), in.grid.end());
  in.grid.erase(std::unique(in.grid.begin(), in.grid.end()), in.grid.end());

  const int n = test::uniform_int(rng, 1, 4);
  for (int s = 0; s < n; ++s) {
    std::vector<double> row;
    double r = test::uniform_int(rng, 0, 3) == 0 ? 0.0 : 1e3 * test::uniform_int(rng, 100, 3000);
    for (std::size_t i = 0; i < in.grid.size(); ++i) {
      if (i > 0 && test::uniform_int(rng, 0, 5) > 0) r += 1e3 * test::uniform_int(rng, 0, 2000);
      row.push_back(r);
    }
    in.rows.push_back(row);
  }
  return in;
}

/// Marginal utilities along the admissible part of the grid are non-increasing.
bool concave(const Instance& in, std::size_t s) {
  double prev = std::numeric_limits<double>::infinity();
  int v = 0;
  double r = 0.0;
  for (std::size_t i = 0; i < in.grid.size(); ++i) {
    if (in.grid[i] < in.curve.v_min() || in.grid[i] > in.curve.v_max()) continue;
    const double mu = marginal_utility(in.curve, v, in.grid[i], r, in.rows[s][i]);
    if (mu > prev) return false;
    prev = mu;
    v = in.grid[i];
    r = in.rows[s][i];
  }
  return true;
}

bool all_at_top(const Instance& in, const Allocation& a) {
  std::size_t top = 0;
  for (std::size_t i = 0; i < in.grid.size(); ++i)
    if (in.grid[i] <= in.curve.v_max()) top = i;
  return std::all_of(a.sessions.begin(), a.sessions.end(), [&](const auto& s) { return s.grid_index == top; });
}

void check_allocation_invariants(const Instance& inst, const AllocationInput& in, const Allocation& a, bool utility_based) {
  REQUIRE(a.sessions.size() == inst.rows.size());
  CHECK(sum_r(a) <= in.capacity_bps);
  CHECK(sum_r(a) + a.leftover_bps == doctest::Approx(in.capacity_bps));
  for (std::size_t s = 0; s < a.sessions.size(); ++s) {
    const auto& x = a.sessions[s];
    if (x.grid_index == kNone) {
      CHECK(x.v == 0);
      continue;
    }
    CHECK(x.v == inst.grid[x.grid_index]);
    if (utility_based) {
      CHECK(x.r == inst.rows[s][x.grid_index]);
      CHECK(x.v >= inst.curve.v_min());
      CHECK(x.v <= inst.curve.v_max());
    }
  }
}

}  // namespace

TEST_CASE("worked example: ample capacity") {
  auto inst = worked_example();
  auto a = allocate_max_utility(inst.input(5e6));
  CHECK(a.sessions[0] == SessionAllocation{70, 1.5e6, 1});
  CHECK(a.sessions[1] == SessionAllocation{70, 3e6, 1});
  CHECK(a.leftover_bps == 0.5e6);
  CHECK(a.total_utility == 240);
  CHECK(brute_force_max_utility(inst.input(5e6)).total_utility == 240);
}

TEST_CASE("worked example: break leaves utility on the table") {
  auto inst = worked_example();
  auto a = allocate_max_utility(inst.input(2.5e6));
  CHECK(a.sessions[0] == SessionAllocation{50, 1e6, 0});
  CHECK(a.sessions[1].grid_index == kNone);
  CHECK(a.total_utility == 100);
  auto o = brute_force_max_utility(inst.input(2.5e6));
  CHECK(o.total_utility == 120);
  CHECK(o.sessions[0].v == 70);
  CHECK(o.sessions[1].v == 0);
  // skip mode goes on after B's admission fails
  CHECK(allocate_max_utility(inst.input(2.5e6), GreedyMode::skip).total_utility == 120);
}

TEST_CASE("zero capacity admits nobody") {
  auto inst = worked_example();
  for (auto a : {allocate_max_utility(inst.input(0)), allocate_equal_vmaf(inst.input(0)),
                 brute_force_max_utility(inst.input(0))}) {
    CHECK(a.total_utility == 0);
    for (const auto& s : a.sessions) CHECK(s == SessionAllocation{});
  }
}

TEST_CASE("equal vmaf examples") {
  auto inst = worked_example();
  auto a = allocate_equal_vmaf(inst.input(5e6));
  CHECK(a.sessions[0] == SessionAllocation{70, 1.5e6, 1});
  CHECK(a.sessions[1] == SessionAllocation{70, 3e6, 1});
  CHECK(a.leftover_bps == 0.5e6);
  auto none = allocate_equal_vmaf(inst.input(2.9e6));
  for (const auto& s : none.sessions) CHECK(s.v == 0);

  // single session reduces to its best affordable target
  Instance one{{30, 50, 70, 90}, {{0.2e6, 1e6, 2e6, 4e6}}, UtilityCurve()};
  CHECK(allocate_equal_vmaf(one.input(1.9e6)).sessions[0].v == 50);
  CHECK(allocate_equal_vmaf(one.input(0.5e6)).sessions[0].v == 30);
}

TEST_CASE("rate fair examples") {
  CHECK(fair_share(50e6, 30) == doctest::Approx(1.6667e6).epsilon(1e-4));
  CHECK(fair_share(50e6, 1) == 50e6);
  CHECK_THROWS_AS(fair_share(1, 0), Error);

  auto inst = worked_example();
  auto a = allocate_rate_fair(inst.input(3e6));
  CHECK(a.sessions[0] == SessionAllocation{70, 1.5e6, 1});
  CHECK(a.sessions[1] == SessionAllocation{0, 1.5e6, kNone});
}

TEST_CASE("property: fair share never overshoots") {
  std::mt19937_64 rng(17);
  for (int iter = 0; iter < 2000; ++iter) {
    const double c = test::uniform(rng, 0, 2e8);
    const auto n = static_cast<std::size_t>(test::uniform_int(rng, 1, 60));
    const double r = fair_share(c, n);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += r;
    CHECK(total <= c);
    CHECK(r >= c / static_cast<double>(n) * (1 - 1e-12));
  }
}

TEST_CASE("input errors") {
  Instance bad{{50, 70}, {{2e6, 1e6}}, UtilityCurve()};
  CHECK_THROWS_AS(allocate_max_utility(bad.input(5e6)), Error);
  Instance mismatch{{50, 70}, {{1e6}}, UtilityCurve()};
  CHECK_THROWS_AS(allocate_max_utility(mismatch.input(5e6)), Error);
  CHECK_THROWS_AS(allocate_equal_vmaf(worked_example().input(-1)), Error);
  Instance off_curve{{10, 20}, {{1e6, 2e6}}, UtilityCurve()};
  CHECK_THROWS_AS(allocate_max_utility(off_curve.input(5e6)), Error);
}

TEST_CASE("brute force guard") {
  Instance big{default_target_grid(), std::vector<std::vector<double>>(5, std::vector<double>(86, 1e6)), UtilityCurve()};
  CHECK_THROWS_AS(brute_force_max_utility(big.input(1e7)), Error);
  auto inst = worked_example();
  CHECK_THROWS_AS(brute_force_max_utility(inst.input(5e6), 8), Error);
  CHECK_NOTHROW(brute_force_max_utility(inst.input(5e6), 16));
  CHECK_THROWS_AS(brute_force_max_utility(inst.input(5e6), {{50}, {60}}), Error);
}

TEST_CASE("brute force prefers the lexicographically smallest optimum") {
  Instance twins{{50}, {{1e6}, {1e6}}, UtilityCurve()};
  auto o = brute_force_max_utility(twins.input(1.5e6));
  CHECK(o.sessions[0].v == 0);
  CHECK(o.sessions[1].v == 50);
}

TEST_CASE("flat demand steps are free") {
  Instance flat{{50, 51, 52, 90}, {{1e6, 1e6, 1e6, 9e6}}, UtilityCurve()};
  auto a = allocate_max_utility(flat.input(2e6));
  CHECK(a.sessions[0].v == 52);
  CHECK(a.leftover_bps == 1e6);
}

TEST_CASE("unreachable steps stop a session without blocking others") {
  const double inf = kUnreachable;
  Instance in{{50, 70, 90}, {{1e6, inf, inf}, {1e6, 2e6, 3e6}}, UtilityCurve()};
  auto a = allocate_max_utility(in.input(100e6));
  CHECK(a.sessions[0].v == 50);
  CHECK(a.sessions[1].v == 90);
}

TEST_CASE("property: greedy never beats the oracle and matches it on concave unbroken runs") {
  std::mt19937_64 rng(2024);
  int exact_cases = 0;
  for (int iter = 0; iter < 1500; ++iter) {
    auto inst = random_instance(rng);
    double c = 1e3 * test::uniform_int(rng, 0, 12000);
    auto g = allocate_max_utility(inst.input(c));
    // half the time shrink C to exactly what greedy used, so nothing is left over
    if (iter % 2 == 1) {
      c -= g.leftover_bps;
      g = allocate_max_utility(inst.input(c));
      REQUIRE(g.leftover_bps == 0);
    }
    auto in = inst.input(c);
    check_allocation_invariants(inst, in, g, true);
    auto o = brute_force_max_utility(in);
    CHECK(o.total_utility >= g.total_utility);
    CHECK(sum_r(o) <= c);

    auto skip = allocate_max_utility(in, GreedyMode::skip);
    check_allocation_invariants(inst, in, skip, true);
    CHECK(skip.total_utility >= g.total_utility);
    CHECK(skip.total_utility <= o.total_utility);

    bool all_concave = true;
    for (std::size_t s = 0; s < inst.rows.size(); ++s) all_concave &= concave(inst, s);
    if (all_concave && (g.leftover_bps == 0 || all_at_top(inst, g))) {
      ++exact_cases;
      CHECK(g.total_utility == o.total_utility);
    }
  }
  CHECK(exact_cases >= 100);
}

TEST_CASE("property: every method respects capacity; equal vmaf level is maximal") {
  std::mt19937_64 rng(99);
  for (int iter = 0; iter < 1000; ++iter) {
    auto inst = random_instance(rng);
    auto in = inst.input(1e3 * test::uniform_int(rng, 0, 12000));
    check_allocation_invariants(inst, in, allocate_max_utility(in), true);
    auto eq = allocate_equal_vmaf(in);
    check_allocation_invariants(inst, in, eq, false);
    const std::size_t level = eq.sessions[0].grid_index;
    for (const auto& s : eq.sessions) CHECK(s.grid_index == level);
    const std::size_t next = level == kNone ? 0 : level + 1;
    if (next < inst.grid.size()) {
      double need = 0.0;
      for (const auto& r : inst.rows) need += r[next];
      CHECK(need > in.capacity_bps);
    }
    auto rf = allocate_rate_fair(in);
    check_allocation_invariants(inst, in, rf, false);
    for (std::size_t s = 0; s < inst.rows.size(); ++s) {
      CHECK(rf.sessions[s].r == fair_share(in.capacity_bps, inst.rows.size()));
      if (rf.sessions[s].grid_index != kNone) CHECK(inst.rows[s][rf.sessions[s].grid_index] <= rf.sessions[s].r);
    }
  }
}

TEST_CASE("property: utility grows with capacity") {
  std::mt19937_64 rng(123);
  for (int iter = 0; iter < 500; ++iter) {
    auto inst = random_instance(rng);
    double prev_mu = -1, prev_eq = -1;
    for (double c = 0; c <= 12e6; c += 2.5e5) {
      const double mu = allocate_max_utility(inst.input(c)).total_utility;
      const double eq = allocate_equal_vmaf(inst.input(c)).total_utility;
      CHECK(mu >= prev_mu);
      CHECK(eq >= prev_eq);
      prev_mu = mu;
      prev_eq = eq;
    }
  }
}

TEST_CASE("property: scaling the curve changes no decision") {
  std::mt19937_64 rng(8);
  for (int iter = 0; iter < 500; ++iter) {
    auto inst = random_instance(rng);
    const double c = 1e3 * test::uniform_int(rng, 0, 12000);
    auto base = allocate_max_utility(inst.input(c));
    for (double k : {0.25, 3.0, 10.0, 1024.0}) {
      Instance scaled{inst.grid, inst.rows, inst.curve.scaled(k)};
      auto a = allocate_max_utility(scaled.input(c));
      CHECK(a.sessions == base.sessions);
      CHECK(a.total_utility == doctest::Approx(k * base.total_utility));
      CHECK(allocate_equal_vmaf(scaled.input(c)).sessions == allocate_equal_vmaf(inst.input(c)).sessions);
      CHECK(allocate_rate_fair(scaled.input(c)).sessions == allocate_rate_fair(inst.input(c)).sessions);
    }
  }
}

TEST_CASE("static rates from one shared curve") {
  AvgScc shared{"x", default_target_grid(), {}};
  for (int v : shared.grid) shared.avg_rate_bps.push_back(2e4 * v);
  std::vector<AvgScc> curves{shared};
  std::vector<std::size_t> map(6, 0);

  // 6 sessions x demand(70) fits exactly: everybody lands on 70
  auto even = compute_static_rates(curves, map, 6 * 2e4 * 70, UtilityCurve());
  for (double r : even) CHECK(r == 2e4 * 70);

  for (double c : {3e6, 7.77e6, 10e6, 50e6}) {
    auto rates = compute_static_rates(curves, map, c, UtilityCurve());
    Instance inst{shared.grid, std::vector<std::vector<double>>(6, shared.avg_rate_bps), UtilityCurve()};
    auto mu = allocate_max_utility(inst.input(c));
    for (std::size_t s = 0; s < 6; ++s) CHECK(rates[s] == mu.sessions[s].r);
    CHECK(std::accumulate(rates.begin(), rates.end(), 0.0) <= c);
    for (std::size_t s = 1; s < 6; ++s) CHECK(rates[s] <= rates[s - 1]);
  }
  std::vector<std::size_t> bad_map{1};
  CHECK_THROWS_AS(compute_static_rates(curves, bad_map, 1e6, UtilityCurve()), Error);
}

TEST_CASE("static rates on the reference corpus match the independent replay") {
  const auto& set = test::reference_set();
  std::vector<std::size_t> identity(set.size());
  std::iota(identity.begin(), identity.end(), 0);
  auto per_clip = compute_static_rates(set.clip_sccs, set.clip_of_session, 50e6, UtilityCurve());
  auto per_session = compute_static_rates(set.session_sccs, identity, 50e6, UtilityCurve());
  auto gold = test::golden("golden_static_rates.csv");
  REQUIRE(gold.size() == 60);
  for (std::size_t k = 0; k < 30; ++k) {
    CHECK(gold[k][1] == set.sessions[k].session_id());
    CHECK(per_clip[k] == test::num(gold[k][2]));
    CHECK(per_session[k] == test::num(gold[30 + k][2]));
  }
  // same clip, same curve: rates only drop with the session index
  for (std::size_t k = 0; k < 30; ++k)
    if (k % 6 != 0) CHECK(per_clip[k] <= per_clip[k - 1]);
  CHECK(std::accumulate(per_clip.begin(), per_clip.end(), 0.0) <= 50e6);
  CHECK(std::accumulate(per_session.begin(), per_session.end(), 0.0) <= 50e6);
}
