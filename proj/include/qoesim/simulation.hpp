#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qoesim/allocation.hpp"
#include "qoesim/emulation.hpp"
#include "qoesim/trace.hpp"
#include "qoesim/utility.hpp"

namespace qoesim {

enum class Method { max_utility, equal_vmaf, rate_fair, mu_per_clip, mu_per_session };

std::string_view method_name(Method m);
/// Accepts the canonical name or its hyphenated form ("max-utility").
Method parse_method(std::string_view text);
std::vector<Method> all_methods();
/// Static methods fix each session's rate once for the whole run.
bool is_static(Method m);

/// Parses a rate in bit/s: plain or scientific ("50e6") or with an "M"
/// suffix for Mbit/s ("50M").
double parse_rate(std::string_view text);
/// "lo:hi:step" (inclusive) or a single rate.
std::vector<double> parse_capacity_range(std::string_view text);

/// Emulated sessions cut from a corpus, plus their long-term curves.
struct SessionSet {
  std::vector<int> grid;
  std::vector<std::string> clip_ids;
  std::vector<TargetVmafTrace> sessions;  ///< sanitized, ordered by (clip, index)
  std::vector<std::size_t> clip_of_session;
  std::vector<AvgScc> clip_sccs;     ///< over each full clip
  std::vector<AvgScc> session_sccs;  ///< over each session

  std::size_t size() const { return sessions.size(); }
  /// Shortest session length in windows.
  std::size_t min_length() const;
};

/// Emulates every clip, cuts `sessions_per_clip` sessions of
/// `session_length` windows from each and computes the average curves.
SessionSet build_session_set(std::span<const LadderTrace> corpus, const std::vector<int>& grid,
                             std::size_t sessions_per_clip, std::size_t session_length);

struct ScenarioConfig {
  double capacity_bps = 50e6;
  Method method = Method::max_utility;
  UtilityCurve curve;
  GreedyMode mode = GreedyMode::stop;
  std::size_t length = 0;  ///< windows to simulate; 0 = shortest session
};

struct PerSecondRecord {
  std::uint32_t t = 0;
  std::uint32_t session = 0;  ///< index into SessionSet::sessions
  int v = 0;                  ///< target reached, 0 = none
  double experienced_vmaf = 0.0;
  double r = 0.0;  ///< allocated rate
  double utility = 0.0;
};

/// Runs one method over the sessions, reallocating every window. Records
/// are ordered by window, then session.
std::vector<PerSecondRecord> run_scenario(const SessionSet& set, const ScenarioConfig& config);

/// Default threshold of the "VMAF below minimum" KPI.
inline constexpr double kKpiVmafThreshold = 50.0;

struct KpiSummary {
  double capacity_bps = 0.0;
  Method method = Method::max_utility;
  double avg_utility = 0.0;
  double avg_vmaf = 0.0;
  double frac_below_50 = 0.0;
  double frac_zero = 0.0;
};

struct SecondStats {
  std::uint32_t t = 0;
  double avg_utility = 0.0;
  double avg_vmaf = 0.0;
  double min_vmaf = 0.0;
  std::size_t sessions = 0;
};

struct KpiResult {
  KpiSummary summary;
  std::vector<SecondStats> per_second;
};

/// Per-second averages and minimum over all records of that second (zeros
/// included); scenario averages are means of the per-second averages, the
/// fractions count session-seconds.
KpiResult compute_kpis(std::span<const PerSecondRecord> records, double capacity_bps = 0.0,
                       Method method = Method::max_utility, double vmaf_threshold = kKpiVmafThreshold);

/// One KpiSummary per (capacity, method), ordered by capacity then by the
/// order of `methods`. Uses up to `jobs` threads; the result does not depend
/// on `jobs`.
std::vector<KpiSummary> sweep_capacity(const SessionSet& set, std::span<const double> capacities,
                                       std::span<const Method> methods, const UtilityCurve& curve,
                                       unsigned jobs = 1, GreedyMode mode = GreedyMode::stop);

struct ShareRow {
  std::uint32_t t = 0;
  std::size_t session = 0;
  double cum_rate_bps = 0.0;
};

/// Per window, running sums of session demand at `target_v` in session order.
std::vector<ShareRow> export_cumulative_shares(const SessionSet& set, int target_v);

/// Total demand of all sessions per window, one column per grid target
/// (row-major [t][grid index]).
std::vector<double> aggregate_demand(const SessionSet& set);

inline constexpr const char* kPerSecondHeader =
    "t,session_id,method,capacity_bps,target_vmaf,experienced_vmaf,rate_bps,utility";
inline constexpr const char* kSummaryHeader = "capacity_bps,method,avg_utility,avg_vmaf,frac_below_50,frac_zero";
inline constexpr const char* kSharesHeader = "t,session_id,cum_rate_bps";
inline constexpr const char* kAggregateHeader = "t,target_vmaf,aggregate_rate_bps";

void write_per_second_csv(std::ostream& out, const SessionSet& set, std::span<const PerSecondRecord> records,
                          Method method, double capacity_bps, bool header = true);
void write_summary_csv(std::ostream& out, std::span<const KpiSummary> rows);
void write_shares_csv(std::ostream& out, const SessionSet& set, std::span<const ShareRow> rows);
void write_aggregate_csv(std::ostream& out, const SessionSet& set, std::span<const double> aggregate,
                         std::span<const int> targets);

}  // namespace qoesim
