#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace qoesim {

struct Frame {
  double timestamp_s = 0.0;
  double size_bytes = 0.0;
  double vmaf = 0.0;
};

/// Per-frame log of one encode (one clip at one CRF).
struct FrameLog {
  std::string clip_id;
  int crf = 0;
  std::vector<Frame> frames;

  /// Throws Error when timestamps are not strictly increasing, a size is
  /// not positive or a VMAF lies outside [0, 100].
  void validate() const;
};

/// Aggregated statistics of one encode over one window.
struct WindowStat {
  double mean_rate_bps = 0.0;
  double window_vmaf = 0.0;
  friend bool operator==(const WindowStat&, const WindowStat&) = default;
};

/// Frame VMAFs are clamped to this floor before the harmonic mean.
inline constexpr double kMinFrameVmaf = 0.01;

/// Sums frame bits and harmonic-averages frame VMAF over non-overlapping
/// windows. The trailing partial window is dropped. Window k covers
/// [t0 + k*d, t0 + (k+1)*d) where t0 is the first timestamp; the log is
/// taken to end one median frame interval after the last frame.
std::vector<WindowStat> aggregate_frames(const FrameLog& log, double window_duration = 1.0);

/// CRF ladder of one clip: every window holds a (rate, VMAF) pair per CRF.
class LadderTrace {
 public:
  LadderTrace() = default;
  LadderTrace(std::string clip_id, std::vector<int> crf_values, std::size_t window_count,
              std::vector<WindowStat> cells, double window_duration = 1.0);

  const std::string& clip_id() const { return clip_id_; }
  double window_duration() const { return window_duration_; }
  const std::vector<int>& crf_values() const { return crf_values_; }
  std::size_t window_count() const { return window_count_; }

  /// Cells of window `w`, ordered like crf_values().
  std::span<const WindowStat> window(std::size_t w) const {
    return {cells_.data() + w * crf_values_.size(), crf_values_.size()};
  }
  const WindowStat& at(std::size_t w, std::size_t crf_index) const {
    return cells_[w * crf_values_.size() + crf_index];
  }

  /// Copy of windows [start, start + length) under a new id.
  LadderTrace slice(std::size_t start, std::size_t length, std::string new_id) const;

  friend bool operator==(const LadderTrace&, const LadderTrace&) = default;

 private:
  std::string clip_id_;
  std::vector<int> crf_values_;
  std::size_t window_count_ = 0;
  std::vector<WindowStat> cells_;
  double window_duration_ = 1.0;
};

/// Builds a ladder from one frame log per CRF of the same clip.
LadderTrace ladder_from_frame_logs(std::span<const FrameLog> logs, double window_duration = 1.0);

inline constexpr const char* kLadderHeader = "clip_id,window_index,crf,mean_rate_bps,window_vmaf";
inline constexpr const char* kFrameLogHeader = "clip_id,crf,timestamp_s,frame_size_bytes,frame_vmaf";

LadderTrace read_ladder_trace(std::istream& in, const std::string& source_name = "<stream>");
LadderTrace load_ladder_trace(const std::filesystem::path& path);
void write_ladder_trace(std::ostream& out, const LadderTrace& trace);
void save_ladder_trace(const std::filesystem::path& path, const LadderTrace& trace);

/// Loads every `*.csv` ladder in a directory (sorted by file name), or the
/// single file when `path` names one.
std::vector<LadderTrace> load_ladder_corpus(const std::filesystem::path& path);

/// One FrameLog per (clip, CRF) found in the file, ordered by CRF.
std::vector<FrameLog> read_frame_logs(std::istream& in, const std::string& source_name = "<stream>");
std::vector<FrameLog> load_frame_logs(const std::filesystem::path& path);

/// A session: a contiguous run of windows of one clip.
struct SessionTrace {
  std::string session_id;
  std::string source_clip;
  std::size_t start_window = 0;
  std::size_t length = 0;
};

/// Consecutive non-overlapping sessions starting at window 0.
/// Session ids are "<clip>_s<k>" with k counted from 0.
std::vector<SessionTrace> cut_sessions(const LadderTrace& trace, std::size_t session_length,
                                       std::size_t count);

}  // namespace qoesim
