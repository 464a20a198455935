#include "qoesim/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "qoesim/csv.hpp"

namespace qoesim {

namespace {

/// Uniform double in [0,1) from the top 53 bits of one engine output.
double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  const double span = static_cast<double>(hi - lo + 1);
  return lo + std::min(hi - lo, static_cast<int>(uniform01(rng) * span));
}

double log_uniform(std::mt19937_64& rng, double lo, double hi) {
  const double u = uniform01(rng);
  return std::exp(std::log(lo) + u * (std::log(hi) - std::log(lo)));
}

double quality_index(double vmaf) { return -std::log1p(-vmaf / 100.0); }

}  // namespace

std::uint64_t derive_clip_seed(std::uint64_t seed, std::size_t clip_index) {
  std::uint64_t z = seed + (static_cast<std::uint64_t>(clip_index) + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::vector<int> default_crf_values() {
  std::vector<int> crfs{20};
  for (int c = 25; c <= 45; ++c) crfs.push_back(c);
  return crfs;
}

GenParams default_gen_params(std::uint64_t seed) {
  GenParams p;
  p.seed = seed;
  p.crf_values = default_crf_values();
  for (double base : {2.4e6, 4.0e6, 6.4e6, 10.0e6, 16.0e6}) {
    ClipProfile c;
    c.base_rate_bps = base;
    p.clips.push_back(c);
  }
  return p;
}

void GenParams::validate() const {
  if (clip_count < 1) throw Error("clip_count must be >= 1");
  if (windows_per_clip < 1) throw Error("windows_per_clip must be >= 1");
  if (crf_values.empty()) throw Error("crf_values must not be empty");
  if (std::adjacent_find(crf_values.begin(), crf_values.end(), std::greater_equal<>()) != crf_values.end())
    throw Error("crf_values must be strictly ascending");
  if (clips.size() != static_cast<std::size_t>(clip_count))
    throw Error("expected " + std::to_string(clip_count) + " clip profiles, got " + std::to_string(clips.size()));
  for (const auto& c : clips) {
    if (!(c.base_rate_bps > 0.0)) throw Error("base rate must be positive");
    if (c.dwell_min < 1 || c.dwell_max < c.dwell_min) throw Error("dwell range must satisfy 1 <= min <= max");
    if (!(c.multiplier_min > 0.0) || c.multiplier_max < c.multiplier_min)
      throw Error("multiplier range must satisfy 0 < min <= max");
    if (!(c.jitter >= 0.0 && c.jitter < 1.0)) throw Error("jitter fraction must be in [0,1)");
  }
  if (!(rate_halving_crf > 0.0)) throw Error("rate_halving_crf must be positive");
  if (!(vmaf_at_max_crf > 0.0 && vmaf_at_min_crf < 100.0 && vmaf_at_max_crf < vmaf_at_min_crf))
    throw Error("need 0 < vmaf_at_max_crf < vmaf_at_min_crf < 100");
  if (!(complexity_quality_exponent >= 0.0)) throw Error("complexity_quality_exponent must be >= 0");
  if (!(quality_jitter >= 0.0 && quality_jitter < 1.0)) throw Error("quality_jitter must be in [0,1)");
}

std::vector<LadderTrace> generate_corpus(const GenParams& params) {
  params.validate();
  const auto& crfs = params.crf_values;
  const std::size_t n = crfs.size();
  const double x_top = quality_index(params.vmaf_at_min_crf);
  const double x_bottom = quality_index(params.vmaf_at_max_crf);
  const double crf_span = static_cast<double>(crfs.back() - crfs.front());
  const double decay = crf_span > 0 ? std::log(x_top / x_bottom) / crf_span : 0.0;

  std::vector<double> rate_scale(n), x_scale(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double dc = static_cast<double>(crfs[k] - crfs.front());
    rate_scale[k] = std::exp2(-dc / params.rate_halving_crf);
    x_scale[k] = x_top * std::exp(-decay * dc);
  }

  std::vector<LadderTrace> corpus;
  corpus.reserve(params.clips.size());
  for (std::size_t clip = 0; clip < params.clips.size(); ++clip) {
    const ClipProfile& prof = params.clips[clip];
    std::mt19937_64 rng(derive_clip_seed(params.seed, clip));
    std::vector<WindowStat> cells;
    cells.reserve(static_cast<std::size_t>(params.windows_per_clip) * n);

    double multiplier = 1.0;
    int remaining = 0;
    for (int w = 0; w < params.windows_per_clip; ++w) {
      if (remaining == 0) {
        remaining = uniform_int(rng, prof.dwell_min, prof.dwell_max);
        multiplier = log_uniform(rng, prof.multiplier_min, prof.multiplier_max);
      }
      --remaining;
      const double rate_jitter = 1.0 + prof.jitter * (2.0 * uniform01(rng) - 1.0);
      const double quality_jitter = 1.0 + params.quality_jitter * prof.jitter * (2.0 * uniform01(rng) - 1.0);
      const double complexity = prof.base_rate_bps * multiplier * rate_jitter;
      const double quality = std::pow(multiplier, -params.complexity_quality_exponent) * quality_jitter;

      for (std::size_t k = 0; k < n; ++k) {
        WindowStat s;
        s.mean_rate_bps = std::max(1.0, std::round(complexity * rate_scale[k]));
        s.window_vmaf = 100.0 * -std::expm1(-x_scale[k] * quality);
        if (k > 0) {
          const WindowStat& prev = cells.back();
          if (s.mean_rate_bps >= prev.mean_rate_bps) s.mean_rate_bps = prev.mean_rate_bps - 1.0;
          if (s.window_vmaf >= prev.window_vmaf) s.window_vmaf = std::nextafter(prev.window_vmaf, 0.0);
        }
        cells.push_back(s);
      }
    }
    corpus.emplace_back("clip" + std::to_string(clip + 1), crfs, static_cast<std::size_t>(params.windows_per_clip),
                        std::move(cells));
  }
  return corpus;
}

}  // namespace qoesim
