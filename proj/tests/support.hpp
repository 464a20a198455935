#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "qoesim/emulation.hpp"
#include "qoesim/simulation.hpp"
#include "qoesim/synth.hpp"
#include "qoesim/trace.hpp"

namespace test {

inline std::filesystem::path data(const std::string& name) { return std::filesystem::path(QOESIM_TEST_DATA) / name; }

inline double num(const std::string& s) {
  if (s == "inf") return std::numeric_limits<double>::infinity();
  double v = 0.0;
  std::from_chars(s.data(), s.data() + s.size(), v);
  return v;
}

/// Rows of a golden CSV, header dropped.
inline std::vector<std::vector<std::string>> golden(const std::string& name) {
  std::ifstream in(data(name));
  std::vector<std::vector<std::string>> rows;
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    rows.push_back(std::move(f));
  }
  return rows;
}

inline const std::vector<qoesim::LadderTrace>& reference_corpus() {
  static const auto corpus = qoesim::generate_corpus(qoesim::default_gen_params(42));
  return corpus;
}

/// 30 sessions x 220 windows on the full 10..95 grid.
inline const qoesim::SessionSet& reference_set() {
  static const auto set = qoesim::build_session_set(reference_corpus(), qoesim::default_target_grid(), 6, 220);
  return set;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline int uniform_int(std::mt19937_64& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("qoesim_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace test
