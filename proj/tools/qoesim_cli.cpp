// qoesim: generate synthetic CRF-ladder corpora, emulate target-VMAF
// encoding and compare bottleneck sharing methods.
//
// Exit codes: 0 success, 1 runtime error, 2 usage error.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "qoesim/csv.hpp"
#include "qoesim/emulation.hpp"
#include "qoesim/simulation.hpp"
#include "qoesim/synth.hpp"
#include "qoesim/trace.hpp"
#include "qoesim/utility.hpp"

namespace fs = std::filesystem;
using namespace qoesim;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

constexpr const char* kConfigFooter =
    "Any option can also be set in a TOML/INI file passed with --config, one `key = value` per line "
    "(key = option name without dashes). Flags win over file values.";

// Top-level keys of a --config file belong to the subcommand being run.
class SubcommandConfig : public CLI::ConfigTOML {
 public:
  explicit SubcommandConfig(const CLI::App& app) : app_(app) {}

  std::vector<CLI::ConfigItem> from_config(std::istream& in) const override {
    auto items = CLI::ConfigTOML::from_config(in);
    const auto active = app_.get_subcommands();
    if (active.empty()) return items;
    for (auto& item : items)
      if (item.parents.empty()) item.parents.push_back(active.front()->get_name());
    return items;
  }

 private:
  const CLI::App& app_;
};

std::ofstream open_output(const fs::path& dir, const std::string& name) {
  fs::create_directories(dir);
  std::ofstream out(dir / name, std::ios::binary);
  if (!out) throw Error("cannot write " + (dir / name).string());
  return out;
}

struct GenOptions {
  int clips = 5;
  int windows = 1320;
  std::uint64_t seed = 42;
  std::vector<int> crfs;
  std::vector<std::string> base_rates;
  int dwell_min = ClipProfile{}.dwell_min;
  int dwell_max = ClipProfile{}.dwell_max;
  double mult_min = ClipProfile{}.multiplier_min;
  double mult_max = ClipProfile{}.multiplier_max;
  double jitter = ClipProfile{}.jitter;
  double rate_halving_crf = GenParams{}.rate_halving_crf;
  double vmaf_at_min_crf = GenParams{}.vmaf_at_min_crf;
  double vmaf_at_max_crf = GenParams{}.vmaf_at_max_crf;
  double complexity_quality_exponent = GenParams{}.complexity_quality_exponent;
  double quality_jitter = GenParams{}.quality_jitter;
  std::string out;

  GenParams params() const {
    GenParams p = default_gen_params(seed);
    p.clip_count = clips;
    p.windows_per_clip = windows;
    if (!crfs.empty()) p.crf_values = crfs;
    p.rate_halving_crf = rate_halving_crf;
    p.vmaf_at_min_crf = vmaf_at_min_crf;
    p.vmaf_at_max_crf = vmaf_at_max_crf;
    p.complexity_quality_exponent = complexity_quality_exponent;
    p.quality_jitter = quality_jitter;

    std::vector<double> bases;
    for (const auto& b : base_rates) bases.push_back(parse_rate(b));
    if (bases.empty()) {
      for (const auto& c : p.clips) bases.push_back(c.base_rate_bps);
    } else if (bases.size() != 1 && bases.size() != static_cast<std::size_t>(std::max(clips, 0))) {
      throw Error("--base-rates needs one value or one per clip");
    }
    p.clips.clear();
    for (int k = 0; k < clips; ++k) {
      ClipProfile c;
      c.base_rate_bps = bases[static_cast<std::size_t>(k) % bases.size()];
      c.dwell_min = dwell_min;
      c.dwell_max = dwell_max;
      c.multiplier_min = mult_min;
      c.multiplier_max = mult_max;
      c.jitter = jitter;
      p.clips.push_back(c);
    }
    return p;
  }
};

void add_gen_options(CLI::App& cmd, GenOptions& o) {
  cmd.add_option("--clips", o.clips, "Number of clips")->capture_default_str()->check(CLI::PositiveNumber);
  cmd.add_option("--windows", o.windows, "Windows (seconds) per clip")->capture_default_str()->check(CLI::PositiveNumber);
  cmd.add_option("--seed", o.seed, "Generator seed")->capture_default_str();
  cmd.add_option("--crfs", o.crfs, "CRF values, ascending (default 20,25..45)")->delimiter(',');
  cmd.add_option("--base-rates", o.base_rates,
                 "Per-clip rate at the lowest CRF (bit/s or with M suffix); one value applies to all clips")
      ->delimiter(',');
  cmd.add_option("--dwell-min", o.dwell_min, "Shortest regime, windows")->capture_default_str();
  cmd.add_option("--dwell-max", o.dwell_max, "Longest regime, windows")->capture_default_str();
  cmd.add_option("--mult-min", o.mult_min, "Smallest regime rate multiplier")->capture_default_str();
  cmd.add_option("--mult-max", o.mult_max, "Largest regime rate multiplier")->capture_default_str();
  cmd.add_option("--jitter", o.jitter, "Per-window rate jitter fraction in [0,1)")->capture_default_str();
  cmd.add_option("--rate-halving-crf", o.rate_halving_crf, "CRF steps per halving of the rate")->capture_default_str();
  cmd.add_option("--vmaf-at-min-crf", o.vmaf_at_min_crf, "Nominal VMAF at the lowest CRF")->capture_default_str();
  cmd.add_option("--vmaf-at-max-crf", o.vmaf_at_max_crf, "Nominal VMAF at the highest CRF")->capture_default_str();
  cmd.add_option("--complexity-quality-exponent", o.complexity_quality_exponent,
                 "Quality loss exponent of harder regimes")
      ->capture_default_str();
  cmd.add_option("--quality-jitter", o.quality_jitter, "Quality jitter relative to rate jitter")->capture_default_str();
}

/// Where the sessions come from: ladder CSVs on disk or the default
/// synthetic profile with a given seed.
struct CorpusOptions {
  std::string ladder;
  std::optional<std::uint64_t> seed;
  int sessions = 30;
  int length = 220;
  std::string targets = "10:95";

  void add(CLI::App& cmd) {
    auto* l = cmd.add_option("--ladder", ladder, "Ladder CSV file or directory of ladder CSVs")->check(CLI::ExistingPath);
    auto* s = cmd.add_option("--seed", seed, "Use the default synthetic corpus with this seed (default 42)");
    l->excludes(s);
    cmd.add_option("--sessions", sessions, "Total sessions, split evenly across clips")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    cmd.add_option("--len", length, "Session length, windows")->capture_default_str()->check(CLI::PositiveNumber);
    cmd.add_option("--targets", targets, "Target VMAF grid, lo:hi or a comma list")->capture_default_str();
  }

  SessionSet build() const {
    std::vector<LadderTrace> corpus =
        ladder.empty() ? generate_corpus(default_gen_params(seed.value_or(42))) : load_ladder_corpus(ladder);
    if (static_cast<std::size_t>(sessions) % corpus.size() != 0) {
      throw Error(std::to_string(sessions) + " sessions cannot be split evenly across " +
                  std::to_string(corpus.size()) + " clips");
    }
    return build_session_set(corpus, parse_target_grid(targets), static_cast<std::size_t>(sessions) / corpus.size(),
                             static_cast<std::size_t>(length));
  }
};

struct PolicyOptions {
  std::string curve;
  std::string greedy = "stop";

  void add(CLI::App& cmd) {
    cmd.add_option("--curve", curve, "Utility curve JSON (default anchors 50:100, 70:120, 90:130)")
        ->check(CLI::ExistingFile);
    cmd.add_option("--greedy", greedy, "Greedy allocator on an infeasible step: stop or skip")
        ->capture_default_str()
        ->check(CLI::IsMember({"stop", "skip"}));
  }
  UtilityCurve utility_curve() const { return curve.empty() ? UtilityCurve{} : load_utility_curve(curve); }
  GreedyMode mode() const { return greedy == "skip" ? GreedyMode::skip : GreedyMode::stop; }
};

std::vector<Method> parse_methods(const std::vector<std::string>& names) {
  std::vector<Method> out;
  for (const auto& n : names) {
    if (n == "all") {
      for (Method m : all_methods()) out.push_back(m);
    } else {
      out.push_back(parse_method(n));
    }
  }
  return out;
}

int cmd_gen(const GenOptions& o) {
  const auto corpus = generate_corpus(o.params());
  fs::create_directories(o.out);
  for (const auto& clip : corpus) save_ladder_trace(fs::path(o.out) / (clip.clip_id() + ".csv"), clip);
  std::cerr << "wrote " << corpus.size() << " ladder traces to " << o.out << '\n';
  return 0;
}

int cmd_emulate(const std::string& ladder, const std::string& targets, int sessions, int length,
                const std::string& out_dir) {
  const auto grid = parse_target_grid(targets);
  const auto corpus = load_ladder_corpus(ladder);
  std::vector<AvgScc> curves;
  for (const auto& clip : corpus) {
    const TargetVmafTrace trace = sanitize_demand(emulate_target_vmaf(clip, grid));
    auto out = open_output(out_dir, clip.clip_id() + ".tv.csv");
    write_target_trace(out, trace);
    curves.push_back(average_scc(trace, clip.clip_id()));
    if (sessions > 0) {
      for (const auto& cut : cut_sessions(clip, static_cast<std::size_t>(length), static_cast<std::size_t>(sessions)))
        curves.push_back(average_scc(trace.slice(cut.start_window, cut.length, cut.session_id), cut.session_id));
    }
  }
  auto out = open_output(out_dir, "avg_scc.csv");
  write_avg_scc(out, curves);
  return 0;
}

int cmd_simulate(const CorpusOptions& corpus, const PolicyOptions& policy, const std::string& cap,
                 const std::vector<std::string>& method_names, const std::string& out_dir) {
  const double capacity = parse_rate(cap);
  const auto methods = parse_methods(method_names);
  const SessionSet set = corpus.build();
  const UtilityCurve curve = policy.utility_curve();

  auto per_second = open_output(out_dir, "per_second.csv");
  auto seconds = open_output(out_dir, "seconds.csv");
  seconds << "t,method,capacity_bps,avg_utility,avg_vmaf,min_vmaf\n";
  std::vector<KpiSummary> summary;
  bool header = true;
  for (Method m : methods) {
    const auto records = run_scenario(set, {capacity, m, curve, policy.mode(), 0});
    write_per_second_csv(per_second, set, records, m, capacity, header);
    header = false;
    const KpiResult kpi = compute_kpis(records, capacity, m);
    for (const auto& s : kpi.per_second) {
      seconds << s.t << ',' << method_name(m) << ',' << csv::format_number(capacity) << ','
              << csv::format_number(s.avg_utility) << ',' << csv::format_number(s.avg_vmaf) << ','
              << csv::format_number(s.min_vmaf) << '\n';
    }
    summary.push_back(kpi.summary);
  }
  auto out = open_output(out_dir, "summary.csv");
  write_summary_csv(out, summary);
  return 0;
}

int cmd_sweep(const CorpusOptions& corpus, const PolicyOptions& policy, const std::string& cap,
              const std::vector<std::string>& method_names, unsigned jobs, const std::string& out_dir) {
  const auto capacities = parse_capacity_range(cap);
  const auto methods = parse_methods(method_names);
  const SessionSet set = corpus.build();
  const auto rows = sweep_capacity(set, capacities, methods, policy.utility_curve(), jobs, policy.mode());
  auto out = open_output(out_dir, "summary.csv");
  write_summary_csv(out, rows);
  return 0;
}

int cmd_export_shares(const CorpusOptions& corpus, int target, const std::vector<int>& aggregate_targets,
                      const std::string& out_dir) {
  const SessionSet set = corpus.build();
  auto shares = open_output(out_dir, "shares.csv");
  write_shares_csv(shares, set, export_cumulative_shares(set, target));
  auto agg = open_output(out_dir, "aggregate.csv");
  write_aggregate_csv(agg, set, aggregate_demand(set), aggregate_targets);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"QoE-aware bottleneck sharing simulator for target-VMAF video sessions"};
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML/INI file with option values for the subcommand; flags win");
  app.config_formatter(std::make_shared<SubcommandConfig>(app));
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.fallthrough();

  GenOptions gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a synthetic CRF-ladder corpus");
  gen_cmd->footer(kConfigFooter);
  add_gen_options(*gen_cmd, gen);
  gen_cmd->add_option("--out", gen.out, "Output directory")->required();

  std::string em_ladder, em_targets = "10:95", em_out;
  int em_sessions = 0, em_len = 220;
  auto* em_cmd = app.add_subcommand("emulate", "Emulate target-VMAF encoding of ladder traces");
  em_cmd->footer(kConfigFooter);
  em_cmd->add_option("--ladder", em_ladder, "Ladder CSV file or directory")->required()->check(CLI::ExistingPath);
  em_cmd->add_option("--targets", em_targets, "Target VMAF grid, lo:hi or a comma list")->capture_default_str();
  em_cmd->add_option("--sessions", em_sessions, "Sessions per clip for per-session average SCCs (0 = none)")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  em_cmd->add_option("--len", em_len, "Session length, windows")->capture_default_str()->check(CLI::PositiveNumber);
  em_cmd->add_option("--out", em_out, "Output directory")->required();

  CorpusOptions sim_corpus;
  PolicyOptions sim_policy;
  std::string sim_cap = "50e6", sim_out;
  std::vector<std::string> sim_methods{"max_utility"};
  auto* sim_cmd = app.add_subcommand("simulate", "Run one capacity with one or more methods");
  sim_cmd->footer(kConfigFooter);
  sim_corpus.add(*sim_cmd);
  sim_policy.add(*sim_cmd);
  sim_cmd->add_option("--cap", sim_cap, "Bottleneck capacity, bit/s (50e6 or 50M)")->capture_default_str();
  sim_cmd->add_option("--method", sim_methods,
                      "max-utility, equal-vmaf, rate-fair, mu-per-clip, mu-per-session or all (comma list)")
      ->delimiter(',')
      ->capture_default_str();
  sim_cmd->add_option("--out", sim_out, "Output directory")->required();

  CorpusOptions sw_corpus;
  PolicyOptions sw_policy;
  std::string sw_cap = "10e6:100e6:1e6", sw_out;
  std::vector<std::string> sw_methods{"all"};
  unsigned sw_jobs = std::max(1u, std::thread::hardware_concurrency());
  auto* sw_cmd = app.add_subcommand("sweep", "Sweep the bottleneck capacity and summarize KPIs");
  sw_cmd->footer(kConfigFooter);
  sw_corpus.add(*sw_cmd);
  sw_policy.add(*sw_cmd);
  sw_cmd->add_option("--cap", sw_cap, "Capacity range lo:hi:step in bit/s (M suffix allowed)")->capture_default_str();
  sw_cmd->add_option("--methods", sw_methods, "Comma list of methods or all")->delimiter(',')->capture_default_str();
  sw_cmd->add_option("--jobs", sw_jobs, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
  sw_cmd->add_option("--out", sw_out, "Output directory")->required();

  CorpusOptions sh_corpus;
  int sh_target = 70;
  std::vector<int> sh_aggregate{30, 50, 70, 90};
  std::string sh_out;
  auto* sh_cmd = app.add_subcommand("export-shares", "Export cumulative session demand at one target");
  sh_cmd->footer(kConfigFooter);
  sh_corpus.add(*sh_cmd);
  sh_cmd->add_option("--target", sh_target, "Target VMAF of the share table")->capture_default_str();
  sh_cmd->add_option("--aggregate-targets", sh_aggregate, "Targets of the aggregate demand table")
      ->delimiter(',')
      ->capture_default_str();
  sh_cmd->add_option("--out", sh_out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  // Flag values that CLI11 cannot check on its own.
  try {
    if (*gen_cmd) gen.params().validate();
    if (*em_cmd) parse_target_grid(em_targets);
    if (*sim_cmd) {
      parse_target_grid(sim_corpus.targets);
      parse_rate(sim_cap);
      parse_methods(sim_methods);
    }
    if (*sw_cmd) {
      parse_target_grid(sw_corpus.targets);
      parse_capacity_range(sw_cap);
      parse_methods(sw_methods);
    }
    if (*sh_cmd) {
      const auto grid = parse_target_grid(sh_corpus.targets);
      for (int v : sh_aggregate)
        if (!std::binary_search(grid.begin(), grid.end(), v)) throw Error("aggregate target " + std::to_string(v) + " not on the grid");
      if (!std::binary_search(grid.begin(), grid.end(), sh_target)) throw Error("--target not on the grid");
    }
  } catch (const Error& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (*gen_cmd) return cmd_gen(gen);
    if (*em_cmd) return cmd_emulate(em_ladder, em_targets, em_sessions, em_len, em_out);
    if (*sim_cmd) return cmd_simulate(sim_corpus, sim_policy, sim_cap, sim_methods, sim_out);
    if (*sw_cmd) return cmd_sweep(sw_corpus, sw_policy, sw_cap, sw_methods, sw_jobs, sw_out);
    if (*sh_cmd) return cmd_export_shares(sh_corpus, sh_target, sh_aggregate, sh_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}
