#include "qoesim/allocation.hpp"

#include <algorithm>
#include <cmath>

#include "qoesim/csv.hpp"

namespace qoesim {

namespace {

constexpr std::size_t npos = SessionAllocation::kNotAdmitted;

void check_input(const AllocationInput& in) {
  if (!(in.capacity_bps >= 0.0)) throw Error("capacity must be non-negative");
  for (auto row : in.demands) {
    if (row.size() != in.grid.size()) throw Error("demand row does not match the target grid");
  }
}

double utility_of(const AllocationInput& in, const std::vector<SessionAllocation>& s) {
  double total = 0.0;
  for (const auto& a : s) total += in.curve(a.v);
  return total;
}

}  // namespace

Allocation allocate_max_utility(const AllocationInput& in, GreedyMode mode) {
  check_input(in);
  const std::size_t n = in.demands.size();
  const auto grid = in.grid;
  const std::size_t first =
      static_cast<std::size_t>(std::lower_bound(grid.begin(), grid.end(), in.curve.v_min()) - grid.begin());
  const std::size_t last_plus_one =
      static_cast<std::size_t>(std::upper_bound(grid.begin(), grid.end(), in.curve.v_max()) - grid.begin());
  if (first >= last_plus_one) throw Error("target grid has no point in [v_min, v_max]");

  Allocation out;
  out.sessions.assign(n, SessionAllocation{});
  std::vector<std::size_t> next(n, first);
  std::vector<double> gain(n);
  for (std::size_t s = 0; s < n; ++s) gain[s] = marginal_utility(in.curve, 0, grid[first], 0.0, in.demands[s][first]);

  double remaining = in.capacity_bps;
  while (n > 0) {
    const auto s = static_cast<std::size_t>(std::max_element(gain.begin(), gain.end()) - gain.begin());
    if (gain[s] == 0.0) break;
    SessionAllocation& a = out.sessions[s];
    const double r_next = in.demands[s][next[s]];
    const double step = r_next - a.r;
    if (step < 0.0) throw Error("negative rate step: demand not sanitized");
    if (remaining < step) {
      if (mode == GreedyMode::stop) break;
      gain[s] = 0.0;
      continue;
    }
    remaining -= step;
    a.grid_index = next[s];
    a.v = grid[a.grid_index];
    a.r = r_next;
    next[s] = a.grid_index + 1;
    gain[s] = next[s] >= last_plus_one
                  ? 0.0
                  : marginal_utility(in.curve, a.v, grid[next[s]], a.r, in.demands[s][next[s]]);
  }
  out.leftover_bps = remaining;
  out.total_utility = utility_of(in, out.sessions);
  return out;
}

Allocation allocate_equal_vmaf(const AllocationInput& in) {
  check_input(in);
  const std::size_t n = in.demands.size();
  Allocation out;
  out.sessions.assign(n, SessionAllocation{});
  out.leftover_bps = in.capacity_bps;
  for (std::size_t i = in.grid.size(); i-- > 0;) {
    double total = 0.0;
    for (auto row : in.demands) total += row[i];
    if (total <= in.capacity_bps) {
      for (std::size_t s = 0; s < n; ++s) out.sessions[s] = {in.grid[i], in.demands[s][i], i};
      out.leftover_bps = in.capacity_bps - total;
      break;
    }
  }
  out.total_utility = utility_of(in, out.sessions);
  return out;
}

double fair_share(double capacity_bps, std::size_t sessions) {
  if (sessions == 0) throw Error("rate fair allocation needs at least one session");
  double share = capacity_bps / static_cast<double>(sessions);
  auto fits = [&](double r) {
    double total = 0.0;
    for (std::size_t i = 0; i < sessions; ++i) total += r;
    return total <= capacity_bps;
  };
  while (share > 0.0 && !fits(share)) share = std::nextafter(share, 0.0);
  return share;
}

Allocation allocate_rate_fair(const AllocationInput& in) {
  check_input(in);
  const std::size_t n = in.demands.size();
  const double share = fair_share(in.capacity_bps, n);
  Allocation out;
  out.sessions.resize(n);
  double used = 0.0;
  for (std::size_t s = 0; s < n; ++s) {
    const std::size_t i = affordable_index(in.demands[s], share);
    out.sessions[s] = {i == npos ? 0 : in.grid[i], share, i};
    used += share;
  }
  out.leftover_bps = in.capacity_bps - used;
  out.total_utility = utility_of(in, out.sessions);
  return out;
}

Allocation brute_force_max_utility(const AllocationInput& in, const std::vector<std::vector<int>>& candidates,
                                   std::size_t max_assignments) {
  check_input(in);
  const std::size_t n = in.demands.size();
  if (candidates.size() != n) throw Error("one candidate set per session required");

  // options[s] holds grid indices: npos (not admitted) first, then ascending.
  std::vector<std::vector<std::size_t>> options(n);
  double space = 1.0;
  for (std::size_t s = 0; s < n; ++s) {
    options[s].push_back(npos);
    std::vector<int> sorted = candidates[s];
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    for (int v : sorted) {
      auto it = std::lower_bound(in.grid.begin(), in.grid.end(), v);
      if (v <= 0 || it == in.grid.end() || *it != v) throw Error("candidate " + std::to_string(v) + " not on the grid");
      options[s].push_back(static_cast<std::size_t>(it - in.grid.begin()));
    }
    space *= static_cast<double>(options[s].size());
  }
  if (space > static_cast<double>(max_assignments)) {
    throw Error("brute force search space of " + csv::format_number(space) + " assignments exceeds the guard of " +
                std::to_string(max_assignments) + "; use fewer sessions or candidates");
  }

  std::vector<std::size_t> pick(n, 0);
  std::vector<std::size_t> best_pick(n, 0);
  double best_utility = -1.0;
  for (bool done = false; !done;) {
    double rate = 0.0;
    double util = 0.0;
    for (std::size_t s = 0; s < n; ++s) {
      const std::size_t gi = options[s][pick[s]];
      if (gi == npos) continue;
      rate += in.demands[s][gi];
      util += in.curve(in.grid[gi]);
    }
    if (rate <= in.capacity_bps && util > best_utility) {
      best_utility = util;
      best_pick = pick;
    }
    // Odometer, last session fastest: target vectors come in lexicographic order.
    for (std::size_t s = n;;) {
      if (s == 0) {
        done = true;
        break;
      }
      --s;
      if (++pick[s] < options[s].size()) break;
      pick[s] = 0;
    }
  }

  Allocation out;
  out.sessions.resize(n);
  double used = 0.0;
  for (std::size_t s = 0; s < n; ++s) {
    const std::size_t gi = options[s][best_pick[s]];
    if (gi == npos) continue;
    out.sessions[s] = {in.grid[gi], in.demands[s][gi], gi};
    used += in.demands[s][gi];
  }
  out.leftover_bps = in.capacity_bps - used;
  out.total_utility = utility_of(in, out.sessions);
  return out;
}

Allocation brute_force_max_utility(const AllocationInput& in, std::size_t max_assignments) {
  std::vector<int> all;
  for (int v : in.grid)
    if (v >= in.curve.v_min() && v <= in.curve.v_max()) all.push_back(v);
  return brute_force_max_utility(in, std::vector<std::vector<int>>(in.demands.size(), all), max_assignments);
}

std::vector<double> compute_static_rates(std::span<const AvgScc> curves, std::span<const std::size_t> curve_of_session,
                                         double capacity_bps, const UtilityCurve& curve, GreedyMode mode) {
  if (curves.empty()) throw Error("no average SCCs given");
  const auto& grid = curves.front().grid;
  for (const auto& c : curves)
    if (c.grid != grid) throw Error("average SCC grid mismatch: " + c.label);
  AllocationInput in{capacity_bps, {}, grid, curve};
  for (std::size_t idx : curve_of_session) {
    if (idx >= curves.size()) throw Error("session mapped to a missing average SCC");
    in.demands.emplace_back(curves[idx].avg_rate_bps);
  }
  Allocation a = allocate_max_utility(in, mode);
  std::vector<double> rates;
  rates.reserve(a.sessions.size());
  for (const auto& s : a.sessions) rates.push_back(s.r);
  return rates;
}

}  // namespace qoesim
