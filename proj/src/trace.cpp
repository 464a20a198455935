#include "qoesim/trace.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "qoesim/csv.hpp"

namespace qoesim {

namespace {

constexpr double kWindowEps = 1e-9;

void check_vmaf(double vmaf, const std::string& what) {
  if (!(vmaf >= 0.0 && vmaf <= 100.0)) throw Error(what + ": VMAF " + std::to_string(vmaf) + " outside [0,100]");
}

}  // namespace

void FrameLog::validate() const {
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const Frame& f = frames[i];
    if (i > 0 && !(f.timestamp_s > frames[i - 1].timestamp_s)) {
      throw Error("frame log " + clip_id + "/crf" + std::to_string(crf) + ": timestamps not strictly increasing at frame " +
                  std::to_string(i));
    }
    if (!(f.size_bytes > 0.0)) throw Error("frame log " + clip_id + ": frame size must be positive");
    check_vmaf(f.vmaf, "frame log " + clip_id);
  }
}

std::vector<WindowStat> aggregate_frames(const FrameLog& log, double window_duration) {
  if (!(window_duration > 0.0)) throw Error("window duration must be positive");
  if (log.frames.empty()) throw Error("no frames");
  log.validate();

  const auto& frames = log.frames;
  const double origin = frames.front().timestamp_s;
  double frame_interval = 0.0;
  if (frames.size() > 1) {
    std::vector<double> deltas;
    deltas.reserve(frames.size() - 1);
    for (std::size_t i = 1; i < frames.size(); ++i) deltas.push_back(frames[i].timestamp_s - frames[i - 1].timestamp_s);
    std::nth_element(deltas.begin(), deltas.begin() + deltas.size() / 2, deltas.end());
    frame_interval = deltas[deltas.size() / 2];
  }
  const double end = frames.back().timestamp_s + frame_interval;
  const auto complete = static_cast<std::size_t>(std::floor((end - origin) / window_duration + kWindowEps));

  std::vector<double> bytes(complete, 0.0);
  std::vector<double> inv_sum(complete, 0.0);
  std::vector<std::size_t> count(complete, 0);
  for (const Frame& f : frames) {
    auto w = static_cast<std::size_t>(std::floor((f.timestamp_s - origin) / window_duration + kWindowEps));
    if (w >= complete) break;
    bytes[w] += f.size_bytes;
    inv_sum[w] += 1.0 / std::max(f.vmaf, kMinFrameVmaf);
    ++count[w];
  }

  std::vector<WindowStat> out(complete);
  for (std::size_t w = 0; w < complete; ++w) {
    if (count[w] == 0) throw Error("gap in trace: window " + std::to_string(w) + " of " + log.clip_id + " has no frames");
    out[w].mean_rate_bps = bytes[w] * 8.0 / window_duration;
    out[w].window_vmaf = static_cast<double>(count[w]) / inv_sum[w];
  }
  return out;
}

LadderTrace::LadderTrace(std::string clip_id, std::vector<int> crf_values, std::size_t window_count,
                         std::vector<WindowStat> cells, double window_duration)
    : clip_id_(std::move(clip_id)),
      crf_values_(std::move(crf_values)),
      window_count_(window_count),
      cells_(std::move(cells)),
      window_duration_(window_duration) {
  if (crf_values_.empty()) throw Error("ladder " + clip_id_ + ": no CRF values");
  if (!std::is_sorted(crf_values_.begin(), crf_values_.end()) ||
      std::adjacent_find(crf_values_.begin(), crf_values_.end()) != crf_values_.end()) {
    throw Error("ladder " + clip_id_ + ": CRF values must be strictly ascending");
  }
  if (cells_.size() != window_count_ * crf_values_.size()) throw Error("incomplete ladder: " + clip_id_);
  if (!(window_duration_ > 0.0)) throw Error("ladder " + clip_id_ + ": window duration must be positive");
  for (const WindowStat& c : cells_) {
    if (!(c.mean_rate_bps >= 0.0) || std::isinf(c.mean_rate_bps)) throw Error("ladder " + clip_id_ + ": negative or non-finite rate");
    check_vmaf(c.window_vmaf, "ladder " + clip_id_);
  }
}

LadderTrace LadderTrace::slice(std::size_t start, std::size_t length, std::string new_id) const {
  if (length == 0 || start + length > window_count_) throw Error("slice out of range for " + clip_id_);
  const std::size_t n = crf_values_.size();
  std::vector<WindowStat> cells(cells_.begin() + static_cast<std::ptrdiff_t>(start * n),
                                cells_.begin() + static_cast<std::ptrdiff_t>((start + length) * n));
  return LadderTrace(std::move(new_id), crf_values_, length, std::move(cells), window_duration_);
}

LadderTrace ladder_from_frame_logs(std::span<const FrameLog> logs, double window_duration) {
  if (logs.empty()) throw Error("no frames");
  std::vector<const FrameLog*> sorted;
  for (const auto& l : logs) sorted.push_back(&l);
  std::sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) { return a->crf < b->crf; });

  std::vector<int> crfs;
  std::vector<std::vector<WindowStat>> per_crf;
  for (const FrameLog* l : sorted) {
    if (l->clip_id != sorted.front()->clip_id) throw Error("frame logs mix clips " + sorted.front()->clip_id + " and " + l->clip_id);
    crfs.push_back(l->crf);
    per_crf.push_back(aggregate_frames(*l, window_duration));
    if (per_crf.back().size() != per_crf.front().size()) {
      throw Error("frame logs of " + l->clip_id + " disagree on window count");
    }
  }
  const std::size_t windows = per_crf.front().size();
  std::vector<WindowStat> cells;
  cells.reserve(windows * crfs.size());
  for (std::size_t w = 0; w < windows; ++w)
    for (const auto& series : per_crf) cells.push_back(series[w]);
  return LadderTrace(sorted.front()->clip_id, std::move(crfs), windows, std::move(cells), window_duration);
}

LadderTrace read_ladder_trace(std::istream& in, const std::string& source_name) {
  csv::Reader reader(in, source_name);
  reader.expect_header(kLadderHeader);

  struct Row {
    std::size_t window;
    int crf;
    WindowStat stat;
  };
  std::vector<Row> rows;
  std::string clip_id;
  std::vector<std::string_view> f;
  while (reader.next(f)) {
    if (f.size() != 5) throw ParseError(source_name, reader.line(), "expected 5 fields, got " + std::to_string(f.size()));
    if (clip_id.empty()) {
      clip_id = std::string(f[0]);
    } else if (f[0] != clip_id) {
      throw ParseError(source_name, reader.line(), "mixed clip ids '" + clip_id + "' and '" + std::string(f[0]) + "'");
    }
    long long w = reader.to_int(f[1], "window_index");
    if (w < 0) throw ParseError(source_name, reader.line(), "negative window_index");
    Row r{static_cast<std::size_t>(w), static_cast<int>(reader.to_int(f[2], "crf")),
          {reader.to_double(f[3], "mean_rate_bps"), reader.to_double(f[4], "window_vmaf")}};
    if (!(r.stat.mean_rate_bps >= 0.0)) throw ParseError(source_name, reader.line(), "negative rate");
    if (!(r.stat.window_vmaf >= 0.0 && r.stat.window_vmaf <= 100.0))
      throw ParseError(source_name, reader.line(), "VMAF outside [0,100]");
    rows.push_back(r);
  }
  if (rows.empty()) throw Error(source_name + ": empty ladder");

  std::vector<int> crfs;
  std::size_t windows = 0;
  for (const Row& r : rows) {
    crfs.push_back(r.crf);
    windows = std::max(windows, r.window + 1);
  }
  std::sort(crfs.begin(), crfs.end());
  crfs.erase(std::unique(crfs.begin(), crfs.end()), crfs.end());

  const std::size_t n = crfs.size();
  std::vector<WindowStat> cells(windows * n);
  std::vector<char> seen(windows * n, 0);
  for (const Row& r : rows) {
    auto k = static_cast<std::size_t>(std::lower_bound(crfs.begin(), crfs.end(), r.crf) - crfs.begin());
    std::size_t idx = r.window * n + k;
    if (seen[idx]) {
      throw Error(source_name + ": duplicate row for window " + std::to_string(r.window) + " crf " + std::to_string(r.crf));
    }
    seen[idx] = 1;
    cells[idx] = r.stat;
  }
  for (std::size_t idx = 0; idx < seen.size(); ++idx) {
    if (!seen[idx]) {
      throw Error(source_name + ": incomplete ladder: window " + std::to_string(idx / n) + " lacks crf " +
                  std::to_string(crfs[idx % n]));
    }
  }
  return LadderTrace(clip_id, std::move(crfs), windows, std::move(cells));
}

LadderTrace load_ladder_trace(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open ladder trace " + path.string());
  return read_ladder_trace(in, path.string());
}

void write_ladder_trace(std::ostream& out, const LadderTrace& trace) {
  out << kLadderHeader << '\n';
  for (std::size_t w = 0; w < trace.window_count(); ++w) {
    auto cells = trace.window(w);
    for (std::size_t k = 0; k < cells.size(); ++k) {
      out << trace.clip_id() << ',' << w << ',' << trace.crf_values()[k] << ','
          << csv::format_number(cells[k].mean_rate_bps) << ',' << csv::format_number(cells[k].window_vmaf) << '\n';
    }
  }
}

void save_ladder_trace(const std::filesystem::path& path, const LadderTrace& trace) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  write_ladder_trace(out, trace);
  if (!out) throw Error("write failed: " + path.string());
}

std::vector<LadderTrace> load_ladder_corpus(const std::filesystem::path& path) {
  namespace fs = std::filesystem;
  if (!fs::exists(path)) throw Error("no such ladder path: " + path.string());
  if (!fs::is_directory(path)) return {load_ladder_trace(path)};
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(path)) {
    if (entry.is_regular_file() && entry.path().extension() == ".csv") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw Error("no ladder CSV files in " + path.string());
  std::vector<LadderTrace> out;
  for (const auto& f : files) out.push_back(load_ladder_trace(f));
  return out;
}

std::vector<FrameLog> read_frame_logs(std::istream& in, const std::string& source_name) {
  csv::Reader reader(in, source_name);
  reader.expect_header(kFrameLogHeader);
  std::map<std::pair<std::string, int>, FrameLog> logs;
  std::vector<std::string_view> f;
  while (reader.next(f)) {
    if (f.size() != 5) throw ParseError(source_name, reader.line(), "expected 5 fields, got " + std::to_string(f.size()));
    int crf = static_cast<int>(reader.to_int(f[1], "crf"));
    auto& log = logs[{std::string(f[0]), crf}];
    log.clip_id = std::string(f[0]);
    log.crf = crf;
    log.frames.push_back({reader.to_double(f[2], "timestamp_s"), reader.to_double(f[3], "frame_size_bytes"),
                          reader.to_double(f[4], "frame_vmaf")});
  }
  std::vector<FrameLog> out;
  for (auto& [key, log] : logs) {
    log.validate();
    out.push_back(std::move(log));
  }
  return out;
}

std::vector<FrameLog> load_frame_logs(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open frame log " + path.string());
  return read_frame_logs(in, path.string());
}

std::vector<SessionTrace> cut_sessions(const LadderTrace& trace, std::size_t session_length, std::size_t count) {
  if (session_length == 0 || count == 0) throw Error("session length and count must be positive");
  const std::size_t required = session_length * count;
  if (required > trace.window_count()) {
    throw Error("insufficient trace length for " + trace.clip_id() + ": need " + std::to_string(required) +
                " windows, have " + std::to_string(trace.window_count()));
  }
  std::vector<SessionTrace> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    out.push_back({trace.clip_id() + "_s" + std::to_string(k), trace.clip_id(), k * session_length, session_length});
  }
  return out;
}

}  // namespace qoesim
