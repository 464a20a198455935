#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "qoesim/trace.hpp"

namespace qoesim {

inline constexpr double kUnreachable = std::numeric_limits<double>::infinity();

/// Integer targets 10..95.
std::vector<int> default_target_grid();

/// Parses "lo:hi" (inclusive integer range) or a comma separated list.
std::vector<int> parse_target_grid(const std::string& text);

/// One (window, target) cell of an emulated target-VMAF encode.
struct TargetCell {
  static constexpr int kNone = -1;
  int selected_crf = kNone;  ///< kNone when no encode reaches the target
  double rate_bps = 0.0;
  double experienced_vmaf = 0.0;

  bool reachable() const { return selected_crf != kNone; }
  friend bool operator==(const TargetCell&, const TargetCell&) = default;
};

/// Target-VMAF emulation of a clip or session, window by window.
///
/// After sanitize_demand() each window also carries a demand row: the rate
/// needed to reach each grid target, non-decreasing along the grid and
/// +inf where the target is unreachable.
class TargetVmafTrace {
 public:
  TargetVmafTrace() = default;
  TargetVmafTrace(std::string session_id, std::vector<int> grid, std::size_t window_count,
                  std::vector<TargetCell> cells);

  const std::string& session_id() const { return session_id_; }
  const std::vector<int>& grid() const { return grid_; }
  std::size_t window_count() const { return window_count_; }
  bool sanitized() const { return !demand_.empty(); }

  const TargetCell& cell(std::size_t t, std::size_t grid_index) const { return cells_[t * grid_.size() + grid_index]; }
  std::span<const TargetCell> cells(std::size_t t) const { return {cells_.data() + t * grid_.size(), grid_.size()}; }
  /// Sanitized demand of window `t`, indexed like grid(). Requires sanitized().
  std::span<const double> demand_row(std::size_t t) const { return {demand_.data() + t * grid_.size(), grid_.size()}; }

  /// Grid index of target `v`, or npos.
  std::size_t grid_index(int v) const;

  /// Copy of windows [start, start + length) under a new id.
  TargetVmafTrace slice(std::size_t start, std::size_t length, std::string new_id) const;

  friend TargetVmafTrace sanitize_demand(TargetVmafTrace trace);

 private:
  std::string session_id_;
  std::vector<int> grid_;
  std::size_t window_count_ = 0;
  std::vector<TargetCell> cells_;
  std::vector<double> demand_;
};

/// Per window and target, picks the encode with the smallest window VMAF that
/// is still >= target; equal VMAFs resolve to the higher CRF.
TargetVmafTrace emulate_target_vmaf(const LadderTrace& ladder, const std::vector<int>& target_grid);

/// Fills the demand rows: running maximum of the selected rates along the
/// grid, +inf for unreachable targets.
TargetVmafTrace sanitize_demand(TargetVmafTrace trace);

/// Sanitized rate for target `v` at window `t`.
double demand(const TargetVmafTrace& trace, std::size_t t, int v);

/// Index of the highest grid target whose demand fits in `budget`, or npos.
/// `row` must be non-decreasing.
std::size_t affordable_index(std::span<const double> row, double budget);

/// Highest grid target with demand(t, v) <= budget; 0 if none.
int achievable_vmaf(const TargetVmafTrace& trace, std::size_t t, double rate_budget);

/// Long-term average spatial complexity curve.
struct AvgScc {
  std::string label;
  std::vector<int> grid;
  std::vector<double> avg_rate_bps;  ///< +inf where unreachable
};

/// Per target, the mean demand over all reachable windows of all traces,
/// followed by a running maximum along the grid so the curve stays
/// non-decreasing.
AvgScc average_scc(std::span<const TargetVmafTrace> traces, std::string label);
AvgScc average_scc(const TargetVmafTrace& trace, std::string label);

inline constexpr const char* kTargetTraceHeader =
    "session_id,window_index,target_vmaf,selected_crf,rate_bps,experienced_vmaf";
inline constexpr const char* kAvgSccHeader = "label,target_vmaf,avg_rate_bps";

/// Unreachable cells are omitted.
void write_target_trace(std::ostream& out, const TargetVmafTrace& trace, bool header = true);
void write_avg_scc(std::ostream& out, std::span<const AvgScc> curves);

}  // namespace qoesim
