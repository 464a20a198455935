#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "qoesim/emulation.hpp"
#include "qoesim/utility.hpp"

namespace qoesim {

/// One reallocation problem: share `capacity_bps` among sessions whose
/// demand rows are indexed like `grid` (non-decreasing, +inf = unreachable).
struct AllocationInput {
  double capacity_bps = 0.0;
  std::vector<std::span<const double>> demands;
  std::span<const int> grid;
  const UtilityCurve& curve;
};

struct SessionAllocation {
  static constexpr std::size_t kNotAdmitted = static_cast<std::size_t>(-1);
  int v = 0;  ///< VMAF target, 0 when not admitted
  double r = 0.0;
  std::size_t grid_index = kNotAdmitted;

  friend bool operator==(const SessionAllocation&, const SessionAllocation&) = default;
};

struct Allocation {
  std::vector<SessionAllocation> sessions;
  double leftover_bps = 0.0;
  double total_utility = 0.0;
};

/// What the greedy allocator does when the best step does not fit.
enum class GreedyMode {
  stop,  ///< end the allocation (the reference behaviour)
  skip,  ///< freeze that session and continue with the others
};

/// Greedy maximum-utility allocation.
///
/// Every session starts unadmitted; its first step is the admission jump to
/// the lowest grid target >= v_min, later steps walk the grid one point at a
/// time up to v_max. Each round the session with the largest marginal
/// utility (lowest index on ties) takes its next step. Steps to an
/// unreachable target have zero marginal utility. Throws Error when a demand
/// row decreases.
Allocation allocate_max_utility(const AllocationInput& in, GreedyMode mode = GreedyMode::stop);

/// Largest common grid target whose summed demand fits; every session gets
/// it (or nothing when even the lowest target does not fit). Spare
/// capacity stays unallocated.
Allocation allocate_equal_vmaf(const AllocationInput& in);

/// Equal rate share; each session reaches whatever target that share buys.
Allocation allocate_rate_fair(const AllocationInput& in);

/// Largest double r <= capacity / sessions such that adding r `sessions`
/// times never exceeds capacity.
double fair_share(double capacity_bps, std::size_t sessions);

/// Exhaustive search over {0} U candidates[s] per session (candidate values
/// are grid targets). Returns a feasible assignment of maximal total utility;
/// ties resolve to the lexicographically smallest target vector. Throws
/// Error when the search space exceeds `max_assignments`.
Allocation brute_force_max_utility(const AllocationInput& in, const std::vector<std::vector<int>>& candidates,
                                   std::size_t max_assignments = 10'000'000);

/// Candidates = every grid target in [v_min, v_max], for every session.
Allocation brute_force_max_utility(const AllocationInput& in, std::size_t max_assignments = 10'000'000);

/// Fixed per-session rates from long-term curves: runs the greedy allocator
/// once on the time-invariant demand `curves[curve_of_session[s]]`.
std::vector<double> compute_static_rates(std::span<const AvgScc> curves,
                                         std::span<const std::size_t> curve_of_session, double capacity_bps,
                                         const UtilityCurve& curve, GreedyMode mode = GreedyMode::stop);

}  // namespace qoesim
