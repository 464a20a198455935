#include <doctest.h>

#include <cmath>
#include <numeric>
#include <sstream>

#include "qoesim/csv.hpp"
#include "support.hpp"

using namespace qoesim;

namespace {

std::string to_csv(const std::vector<LadderTrace>& corpus) {
  std::ostringstream out;
  for (const auto& l : corpus) write_ladder_trace(out, l);
  return out.str();
}

}  // namespace

TEST_CASE("same seed gives identical bytes") {
  auto p = default_gen_params(42);
  CHECK(to_csv(generate_corpus(p)) == to_csv(generate_corpus(p)));
  CHECK(to_csv(generate_corpus(p)) != to_csv(generate_corpus(default_gen_params(43))));
}

TEST_CASE("default corpus dimensions") {
  const auto& c = test::reference_corpus();
  REQUIRE(c.size() == 5);
  for (std::size_t k = 0; k < 5; ++k) {
    CHECK(c[k].clip_id() == "clip" + std::to_string(k + 1));
    CHECK(c[k].window_count() == 1320);
    CHECK(c[k].crf_values() == default_crf_values());
  }
  CHECK(default_crf_values().size() == 22);
}

TEST_CASE("clip substreams do not depend on clip count") {
  auto p = default_gen_params(9);
  auto full = generate_corpus(p);
  p.clip_count = 2;
  p.clips.resize(2);
  auto part = generate_corpus(p);
  CHECK(part[0] == full[0]);
  CHECK(part[1] == full[1]);
}

TEST_CASE("no jitter and one regime gives constant windows") {
  GenParams p = default_gen_params(3);
  p.clip_count = 1;
  p.clips.resize(1);
  p.windows_per_clip = 50;
  p.clips[0].jitter = 0.0;
  p.clips[0].dwell_min = p.clips[0].dwell_max = 1000;
  auto c = generate_corpus(p);
  for (std::size_t w = 1; w < 50; ++w)
    for (std::size_t k = 0; k < p.crf_values.size(); ++k) {
      CHECK(c[0].at(w, k).mean_rate_bps == c[0].at(0, k).mean_rate_bps);
      CHECK(c[0].at(w, k).window_vmaf == c[0].at(0, k).window_vmaf);
    }
}

TEST_CASE("property: rate and vmaf strictly decrease in CRF") {
  for (std::uint64_t seed : {1ULL, 42ULL, 1234567ULL}) {
    auto corpus = generate_corpus(default_gen_params(seed));
    for (const auto& l : corpus)
      for (std::size_t w = 0; w < l.window_count(); ++w) {
        auto cells = l.window(w);
        for (std::size_t k = 1; k < cells.size(); ++k) {
          REQUIRE(cells[k].mean_rate_bps < cells[k - 1].mean_rate_bps);
          REQUIRE(cells[k].window_vmaf < cells[k - 1].window_vmaf);
        }
        REQUIRE(cells.back().mean_rate_bps > 0.0);
        REQUIRE(cells.back().window_vmaf > 0.0);
        REQUIRE(cells.front().window_vmaf < 100.0);
      }
  }
}

TEST_CASE("property: second-scale variability above 0.2") {
  for (const auto& l : test::reference_corpus())
    for (std::size_t k = 0; k < l.crf_values().size(); ++k) {
      double sum = 0.0, sq = 0.0;
      for (std::size_t w = 0; w < l.window_count(); ++w) sum += l.at(w, k).mean_rate_bps;
      const double mean = sum / static_cast<double>(l.window_count());
      for (std::size_t w = 0; w < l.window_count(); ++w) sq += std::pow(l.at(w, k).mean_rate_bps - mean, 2);
      const double cv = std::sqrt(sq / static_cast<double>(l.window_count())) / mean;
      CHECK(cv > 0.2);
    }
}

TEST_CASE("vmaf range covers the emulation grid") {
  double lo = 100, hi = 0;
  for (const auto& l : test::reference_corpus())
    for (std::size_t w = 0; w < l.window_count(); ++w) {
      lo = std::min(lo, l.at(w, l.crf_values().size() - 1).window_vmaf);
      hi = std::max(hi, l.at(w, 0).window_vmaf);
    }
  CHECK(lo < 35);
  CHECK(hi > 95);
}

TEST_CASE("clip averages differ at least threefold at vmaf 70") {
  const auto& set = test::reference_set();
  const std::size_t i = set.sessions[0].grid_index(70);
  double lo = kUnreachable, hi = 0;
  for (const auto& c : set.clip_sccs) {
    lo = std::min(lo, c.avg_rate_bps[i]);
    hi = std::max(hi, c.avg_rate_bps[i]);
  }
  CHECK(hi / lo >= 3.0);
}

TEST_CASE("derived clip seeds") {
  CHECK(derive_clip_seed(42, 0) != derive_clip_seed(42, 1));
  CHECK(derive_clip_seed(42, 0) != derive_clip_seed(43, 0));
  // SplitMix64 of 0 + golden gamma.
  CHECK(derive_clip_seed(0, 0) == 0xE220A8397B1DCDAFULL);
}

TEST_CASE("parameter validation") {
  auto bad = [](auto mutate) {
    GenParams p = default_gen_params();
    mutate(p);
    CHECK_THROWS_AS(generate_corpus(p), Error);
  };
  bad([](GenParams& p) { p.clip_count = 0; });
  bad([](GenParams& p) { p.windows_per_clip = 0; });
  bad([](GenParams& p) { p.crf_values = {30, 25}; });
  bad([](GenParams& p) { p.crf_values = {}; });
  bad([](GenParams& p) { p.clips[0].jitter = 1.0; });
  bad([](GenParams& p) { p.clips[0].jitter = -0.1; });
  bad([](GenParams& p) { p.clips.pop_back(); });
  bad([](GenParams& p) { p.clips[1].dwell_min = 0; });
  bad([](GenParams& p) { p.clips[1].multiplier_max = 0.1; });
  bad([](GenParams& p) { p.vmaf_at_max_crf = 99; });
}
