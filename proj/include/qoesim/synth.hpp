#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qoesim/trace.hpp"

namespace qoesim {

/// Content model of one synthetic clip.
///
/// A clip alternates between regimes (scenes / game states). Each regime
/// lasts a dwell time drawn uniformly from [dwell_min, dwell_max] windows and
/// scales the clip's base rate by a multiplier drawn log-uniformly from
/// [multiplier_min, multiplier_max]. Each window adds independent jitter.
struct ClipProfile {
  double base_rate_bps = 6.0e6;  ///< rate at the lowest CRF for multiplier 1
  int dwell_min = 10;
  int dwell_max = 90;
  double multiplier_min = 0.3;
  double multiplier_max = 3.0;
  double jitter = 0.2;  ///< per-window rate jitter fraction, in [0,1)
};

struct GenParams {
  int clip_count = 5;
  int windows_per_clip = 1320;
  std::vector<int> crf_values;
  std::uint64_t seed = 42;
  std::vector<ClipProfile> clips;  ///< one entry per clip

  /// Rate halves every this many CRF steps.
  double rate_halving_crf = 6.0;
  /// Window VMAF at the lowest / highest CRF for multiplier 1 and no jitter.
  double vmaf_at_min_crf = 96.5;
  double vmaf_at_max_crf = 33.0;
  /// Harder content loses quality at equal CRF: quality index scales by
  /// multiplier^-complexity_quality_exponent.
  double complexity_quality_exponent = 0.15;
  /// Quality jitter relative to the rate jitter fraction.
  double quality_jitter = 0.3;

  /// Throws Error when any invariant is violated.
  void validate() const;
};

/// CRFs {20, 25, 26, ..., 45}.
std::vector<int> default_crf_values();

/// Five clips x 1320 windows with base rates 2.4, 4, 6.4, 10 and 16 Mbit/s.
GenParams default_gen_params(std::uint64_t seed = 42);

/// Deterministic corpus; clip k is named "clip<k+1>" and draws from its own
/// substream seeded by derive_clip_seed(seed, k).
std::vector<LadderTrace> generate_corpus(const GenParams& params);

/// SplitMix64 finalizer applied to seed + (clip_index + 1) * 0x9E3779B97F4A7C15.
std::uint64_t derive_clip_seed(std::uint64_t seed, std::size_t clip_index);

}  // namespace qoesim
