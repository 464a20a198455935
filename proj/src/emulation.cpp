#include "qoesim/emulation.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ostream>

#include "qoesim/csv.hpp"

namespace qoesim {

namespace {

constexpr std::size_t npos = static_cast<std::size_t>(-1);

int parse_int(std::string_view s, const std::string& text) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) throw Error("bad target grid '" + text + "'");
  return v;
}

void check_grid(const std::vector<int>& grid) {
  if (grid.empty()) throw Error("empty target grid");
  if (std::adjacent_find(grid.begin(), grid.end(), std::greater_equal<>()) != grid.end())
    throw Error("target grid must be strictly ascending");
  if (grid.front() < 1 || grid.back() > 100) throw Error("target grid must lie in [1,100]");
}

}  // namespace

std::vector<int> default_target_grid() {
  std::vector<int> g;
  for (int v = 10; v <= 95; ++v) g.push_back(v);
  return g;
}

std::vector<int> parse_target_grid(const std::string& text) {
  std::vector<int> grid;
  std::string_view s = text;
  if (auto colon = s.find(':'); colon != std::string_view::npos) {
    int lo = parse_int(s.substr(0, colon), text);
    int hi = parse_int(s.substr(colon + 1), text);
    if (hi < lo) throw Error("bad target grid '" + text + "'");
    for (int v = lo; v <= hi; ++v) grid.push_back(v);
  } else {
    std::size_t start = 0;
    while (start <= s.size()) {
      auto comma = s.find(',', start);
      if (comma == std::string_view::npos) comma = s.size();
      grid.push_back(parse_int(s.substr(start, comma - start), text));
      start = comma + 1;
    }
  }
  check_grid(grid);
  return grid;
}

TargetVmafTrace::TargetVmafTrace(std::string session_id, std::vector<int> grid, std::size_t window_count,
                                 std::vector<TargetCell> cells)
    : session_id_(std::move(session_id)), grid_(std::move(grid)), window_count_(window_count), cells_(std::move(cells)) {
  check_grid(grid_);
  if (cells_.size() != window_count_ * grid_.size()) throw Error("target trace " + session_id_ + ": wrong cell count");
}

std::size_t TargetVmafTrace::grid_index(int v) const {
  auto it = std::lower_bound(grid_.begin(), grid_.end(), v);
  if (it == grid_.end() || *it != v) return npos;
  return static_cast<std::size_t>(it - grid_.begin());
}

TargetVmafTrace TargetVmafTrace::slice(std::size_t start, std::size_t length, std::string new_id) const {
  if (length == 0 || start + length > window_count_) throw Error("slice out of range for " + session_id_);
  const std::size_t g = grid_.size();
  const auto b = static_cast<std::ptrdiff_t>(start * g);
  const auto e = static_cast<std::ptrdiff_t>((start + length) * g);
  TargetVmafTrace out(std::move(new_id), grid_, length, std::vector<TargetCell>(cells_.begin() + b, cells_.begin() + e));
  if (sanitized()) out.demand_.assign(demand_.begin() + b, demand_.begin() + e);
  return out;
}

TargetVmafTrace emulate_target_vmaf(const LadderTrace& ladder, const std::vector<int>& target_grid) {
  check_grid(target_grid);
  const auto& crfs = ladder.crf_values();
  std::vector<TargetCell> cells;
  cells.reserve(ladder.window_count() * target_grid.size());
  for (std::size_t t = 0; t < ladder.window_count(); ++t) {
    auto encodes = ladder.window(t);
    for (int v : target_grid) {
      TargetCell best;
      for (std::size_t k = 0; k < encodes.size(); ++k) {
        const double vmaf = encodes[k].window_vmaf;
        if (vmaf < v) continue;
        // CRFs are ascending, so ">=" keeps the higher CRF on equal VMAF.
        if (!best.reachable() || vmaf <= best.experienced_vmaf) {
          best = {crfs[k], encodes[k].mean_rate_bps, vmaf};
        }
      }
      cells.push_back(best);
    }
  }
  return TargetVmafTrace(ladder.clip_id(), target_grid, ladder.window_count(), std::move(cells));
}

TargetVmafTrace sanitize_demand(TargetVmafTrace trace) {
  const std::size_t g = trace.grid_.size();
  trace.demand_.assign(trace.cells_.size(), 0.0);
  for (std::size_t t = 0; t < trace.window_count_; ++t) {
    double running = 0.0;
    for (std::size_t i = 0; i < g; ++i) {
      const TargetCell& c = trace.cells_[t * g + i];
      running = c.reachable() ? std::max(running, c.rate_bps) : kUnreachable;
      trace.demand_[t * g + i] = running;
    }
  }
  return trace;
}

double demand(const TargetVmafTrace& trace, std::size_t t, int v) {
  if (!trace.sanitized()) throw Error("demand requested on unsanitized trace " + trace.session_id());
  if (t >= trace.window_count()) throw Error("window " + std::to_string(t) + " out of range for " + trace.session_id());
  const std::size_t i = trace.grid_index(v);
  if (i == npos) throw Error("target " + std::to_string(v) + " not on the grid");
  return trace.demand_row(t)[i];
}

std::size_t affordable_index(std::span<const double> row, double budget) {
  auto it = std::upper_bound(row.begin(), row.end(), budget);
  if (it == row.begin()) return npos;
  return static_cast<std::size_t>(it - row.begin()) - 1;
}

int achievable_vmaf(const TargetVmafTrace& trace, std::size_t t, double rate_budget) {
  if (!trace.sanitized()) throw Error("achievable_vmaf requested on unsanitized trace " + trace.session_id());
  if (t >= trace.window_count()) throw Error("window " + std::to_string(t) + " out of range for " + trace.session_id());
  const std::size_t i = affordable_index(trace.demand_row(t), rate_budget);
  return i == npos ? 0 : trace.grid()[i];
}

AvgScc average_scc(std::span<const TargetVmafTrace> traces, std::string label) {
  if (traces.empty()) throw Error("average_scc needs at least one trace");
  const auto& grid = traces.front().grid();
  std::vector<double> sum(grid.size(), 0.0);
  std::vector<std::size_t> count(grid.size(), 0);
  for (const auto& tr : traces) {
    if (tr.grid() != grid) throw Error("grid mismatch between " + traces.front().session_id() + " and " + tr.session_id());
    if (!tr.sanitized()) throw Error("average_scc requires sanitized trace " + tr.session_id());
    for (std::size_t t = 0; t < tr.window_count(); ++t) {
      auto row = tr.demand_row(t);
      for (std::size_t i = 0; i < grid.size(); ++i) {
        if (std::isinf(row[i])) continue;
        sum[i] += row[i];
        ++count[i];
      }
    }
  }
  AvgScc out{std::move(label), grid, std::vector<double>(grid.size())};
  double running = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    running = count[i] == 0 ? kUnreachable : std::max(running, sum[i] / static_cast<double>(count[i]));
    out.avg_rate_bps[i] = running;
  }
  return out;
}

AvgScc average_scc(const TargetVmafTrace& trace, std::string label) {
  return average_scc(std::span<const TargetVmafTrace>(&trace, 1), std::move(label));
}

void write_target_trace(std::ostream& out, const TargetVmafTrace& trace, bool header) {
  if (header) out << kTargetTraceHeader << '\n';
  for (std::size_t t = 0; t < trace.window_count(); ++t) {
    auto cells = trace.cells(t);
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (!cells[i].reachable()) continue;
      out << trace.session_id() << ',' << t << ',' << trace.grid()[i] << ',' << cells[i].selected_crf << ','
          << csv::format_number(cells[i].rate_bps) << ',' << csv::format_number(cells[i].experienced_vmaf) << '\n';
    }
  }
}

void write_avg_scc(std::ostream& out, std::span<const AvgScc> curves) {
  out << kAvgSccHeader << '\n';
  for (const auto& c : curves) {
    for (std::size_t i = 0; i < c.grid.size(); ++i) {
      if (std::isinf(c.avg_rate_bps[i])) continue;
      out << c.label << ',' << c.grid[i] << ',' << csv::format_number(c.avg_rate_bps[i]) << '\n';
    }
  }
}

}  // namespace qoesim
