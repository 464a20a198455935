#include "qoesim/simulation.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <mutex>
#include <ostream>
#include <thread>

#include "qoesim/csv.hpp"

namespace qoesim {

namespace {

constexpr std::array kMethodNames{"max_utility", "equal_vmaf", "rate_fair", "mu_per_clip", "mu_per_session"};

constexpr std::size_t npos = SessionAllocation::kNotAdmitted;

double parse_double(std::string_view text, std::string_view whole) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty())
    throw Error("malformed rate '" + std::string(whole) + "'");
  return v;
}

}  // namespace

std::string_view method_name(Method m) { return kMethodNames[static_cast<std::size_t>(m)]; }

Method parse_method(std::string_view text) {
  std::string s(text);
  std::replace(s.begin(), s.end(), '-', '_');
  for (std::size_t i = 0; i < kMethodNames.size(); ++i)
    if (s == kMethodNames[i]) return static_cast<Method>(i);
  throw Error("unknown method '" + std::string(text) + "'");
}

std::vector<Method> all_methods() {
  return {Method::max_utility, Method::equal_vmaf, Method::rate_fair, Method::mu_per_clip, Method::mu_per_session};
}

bool is_static(Method m) { return m == Method::mu_per_clip || m == Method::mu_per_session; }

double parse_rate(std::string_view text) {
  double scale = 1.0;
  std::string_view num = text;
  if (!num.empty() && (num.back() == 'M' || num.back() == 'm')) {
    scale = 1e6;
    num.remove_suffix(1);
  }
  const double v = parse_double(num, text) * scale;
  if (!(v >= 0.0) || std::isinf(v)) throw Error("rate must be finite and non-negative: '" + std::string(text) + "'");
  return v;
}

std::vector<double> parse_capacity_range(std::string_view text) {
  const auto first = text.find(':');
  if (first == std::string_view::npos) return {parse_rate(text)};
  const auto second = text.find(':', first + 1);
  if (second == std::string_view::npos) throw Error("capacity range must be lo:hi:step, got '" + std::string(text) + "'");
  const double lo = parse_rate(text.substr(0, first));
  const double hi = parse_rate(text.substr(first + 1, second - first - 1));
  const double step = parse_rate(text.substr(second + 1));
  if (!(step > 0.0) || hi < lo) throw Error("invalid capacity range '" + std::string(text) + "'");
  const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  std::vector<double> caps;
  caps.reserve(count);
  for (std::size_t k = 0; k < count; ++k) caps.push_back(lo + static_cast<double>(k) * step);
  return caps;
}

std::size_t SessionSet::min_length() const {
  std::size_t len = sessions.empty() ? 0 : sessions.front().window_count();
  for (const auto& s : sessions) len = std::min(len, s.window_count());
  return len;
}

SessionSet build_session_set(std::span<const LadderTrace> corpus, const std::vector<int>& grid,
                             std::size_t sessions_per_clip, std::size_t session_length) {
  if (corpus.empty()) throw Error("empty corpus");
  SessionSet set;
  set.grid = grid;
  for (std::size_t c = 0; c < corpus.size(); ++c) {
    const LadderTrace& clip = corpus[c];
    if (std::find(set.clip_ids.begin(), set.clip_ids.end(), clip.clip_id()) != set.clip_ids.end())
      throw Error("duplicate clip id " + clip.clip_id());
    const auto cuts = cut_sessions(clip, session_length, sessions_per_clip);
    TargetVmafTrace full = sanitize_demand(emulate_target_vmaf(clip, grid));
    set.clip_ids.push_back(clip.clip_id());
    set.clip_sccs.push_back(average_scc(full, clip.clip_id()));
    for (const auto& cut : cuts) {
      set.sessions.push_back(full.slice(cut.start_window, cut.length, cut.session_id));
      set.clip_of_session.push_back(c);
      set.session_sccs.push_back(average_scc(set.sessions.back(), cut.session_id));
    }
  }
  return set;
}

std::vector<PerSecondRecord> run_scenario(const SessionSet& set, const ScenarioConfig& config) {
  const std::size_t n = set.size();
  if (n == 0) throw Error("scenario has no sessions");
  if (!(config.capacity_bps > 0.0)) throw Error("capacity must be positive");
  const std::size_t length = config.length == 0 ? set.min_length() : config.length;
  for (const auto& s : set.sessions) {
    if (s.window_count() < length) {
      throw Error("session " + s.session_id() + " has " + std::to_string(s.window_count()) +
                  " windows, scenario needs " + std::to_string(length));
    }
  }
  const UtilityCurve& curve = config.curve;

  std::vector<double> static_rates;
  if (config.method == Method::mu_per_clip) {
    static_rates = compute_static_rates(set.clip_sccs, set.clip_of_session, config.capacity_bps, curve, config.mode);
  } else if (config.method == Method::mu_per_session) {
    std::vector<std::size_t> identity(n);
    for (std::size_t s = 0; s < n; ++s) identity[s] = s;
    static_rates = compute_static_rates(set.session_sccs, identity, config.capacity_bps, curve, config.mode);
  }

  std::vector<PerSecondRecord> records;
  records.reserve(length * n);
  AllocationInput input{config.capacity_bps, std::vector<std::span<const double>>(n), set.grid, curve};
  std::vector<SessionAllocation> picks(n);

  for (std::size_t t = 0; t < length; ++t) {
    for (std::size_t s = 0; s < n; ++s) input.demands[s] = set.sessions[s].demand_row(t);
    switch (config.method) {
      case Method::max_utility:
        picks = allocate_max_utility(input, config.mode).sessions;
        break;
      case Method::equal_vmaf:
        picks = allocate_equal_vmaf(input).sessions;
        break;
      case Method::rate_fair:
        picks = allocate_rate_fair(input).sessions;
        break;
      case Method::mu_per_clip:
      case Method::mu_per_session:
        for (std::size_t s = 0; s < n; ++s) {
          const std::size_t gi = affordable_index(input.demands[s], static_rates[s]);
          picks[s] = {gi == npos ? 0 : set.grid[gi], static_rates[s], gi};
        }
        break;
    }
    for (std::size_t s = 0; s < n; ++s) {
      PerSecondRecord rec;
      rec.t = static_cast<std::uint32_t>(t);
      rec.session = static_cast<std::uint32_t>(s);
      rec.r = picks[s].r;
      if (picks[s].grid_index != npos) {
        rec.v = picks[s].v;
        rec.experienced_vmaf = set.sessions[s].cell(t, picks[s].grid_index).experienced_vmaf;
        rec.utility = curve(rec.experienced_vmaf);
      }
      records.push_back(rec);
    }
  }
  return records;
}

KpiResult compute_kpis(std::span<const PerSecondRecord> records, double capacity_bps, Method method,
                       double vmaf_threshold) {
  if (records.empty()) throw Error("no records to summarize");
  KpiResult out;
  out.summary.capacity_bps = capacity_bps;
  out.summary.method = method;

  std::uint32_t max_t = 0;
  for (const auto& r : records) max_t = std::max(max_t, r.t);
  std::vector<SecondStats> seconds(static_cast<std::size_t>(max_t) + 1);
  std::size_t below = 0, zero = 0;
  for (const auto& r : records) {
    SecondStats& s = seconds[r.t];
    s.min_vmaf = s.sessions == 0 ? r.experienced_vmaf : std::min(s.min_vmaf, r.experienced_vmaf);
    s.avg_utility += r.utility;
    s.avg_vmaf += r.experienced_vmaf;
    ++s.sessions;
    if (r.experienced_vmaf < vmaf_threshold) ++below;
    if (r.experienced_vmaf == 0.0) ++zero;
  }
  double util_sum = 0.0, vmaf_sum = 0.0;
  for (std::size_t t = 0; t < seconds.size(); ++t) {
    SecondStats& s = seconds[t];
    if (s.sessions == 0) continue;
    s.t = static_cast<std::uint32_t>(t);
    s.avg_utility /= static_cast<double>(s.sessions);
    s.avg_vmaf /= static_cast<double>(s.sessions);
    util_sum += s.avg_utility;
    vmaf_sum += s.avg_vmaf;
    out.per_second.push_back(s);
  }
  const auto secs = static_cast<double>(out.per_second.size());
  const auto total = static_cast<double>(records.size());
  out.summary.avg_utility = util_sum / secs;
  out.summary.avg_vmaf = vmaf_sum / secs;
  out.summary.frac_below_50 = static_cast<double>(below) / total;
  out.summary.frac_zero = static_cast<double>(zero) / total;
  return out;
}

std::vector<KpiSummary> sweep_capacity(const SessionSet& set, std::span<const double> capacities,
                                       std::span<const Method> methods, const UtilityCurve& curve, unsigned jobs,
                                       GreedyMode mode) {
  const std::size_t tasks = capacities.size() * methods.size();
  std::vector<KpiSummary> out(tasks);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    for (std::size_t i = next++; i < tasks; i = next++) {
      try {
        ScenarioConfig cfg{capacities[i / methods.size()], methods[i % methods.size()], curve, mode, 0};
        const auto records = run_scenario(set, cfg);
        out[i] = compute_kpis(records, cfg.capacity_bps, cfg.method).summary;
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = tasks;
      }
    }
  };

  const unsigned threads = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(tasks, 1))));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

std::vector<ShareRow> export_cumulative_shares(const SessionSet& set, int target_v) {
  if (set.size() == 0) throw Error("no sessions");
  const std::size_t gi = set.sessions.front().grid_index(target_v);
  if (gi == npos) throw Error("target " + std::to_string(target_v) + " not on the grid");
  const std::size_t length = set.min_length();
  std::vector<ShareRow> rows;
  rows.reserve(length * set.size());
  for (std::size_t t = 0; t < length; ++t) {
    double cum = 0.0;
    for (std::size_t s = 0; s < set.size(); ++s) {
      cum += set.sessions[s].demand_row(t)[gi];
      rows.push_back({static_cast<std::uint32_t>(t), s, cum});
    }
  }
  return rows;
}

std::vector<double> aggregate_demand(const SessionSet& set) {
  const std::size_t length = set.min_length();
  const std::size_t g = set.grid.size();
  std::vector<double> total(length * g, 0.0);
  for (const auto& s : set.sessions)
    for (std::size_t t = 0; t < length; ++t) {
      auto row = s.demand_row(t);
      for (std::size_t i = 0; i < g; ++i) total[t * g + i] += row[i];
    }
  return total;
}

void write_per_second_csv(std::ostream& out, const SessionSet& set, std::span<const PerSecondRecord> records,
                          Method method, double capacity_bps, bool header) {
  if (header) out << kPerSecondHeader << '\n';
  const std::string cap = csv::format_number(capacity_bps);
  const std::string_view name = method_name(method);
  for (const auto& r : records) {
    out << r.t << ',' << set.sessions[r.session].session_id() << ',' << name << ',' << cap << ',' << r.v << ','
        << csv::format_number(r.experienced_vmaf) << ',' << csv::format_number(r.r) << ','
        << csv::format_number(r.utility) << '\n';
  }
}

void write_summary_csv(std::ostream& out, std::span<const KpiSummary> rows) {
  out << kSummaryHeader << '\n';
  for (const auto& k : rows) {
    out << csv::format_number(k.capacity_bps) << ',' << method_name(k.method) << ','
        << csv::format_number(k.avg_utility) << ',' << csv::format_number(k.avg_vmaf) << ','
        << csv::format_number(k.frac_below_50) << ',' << csv::format_number(k.frac_zero) << '\n';
  }
}

void write_shares_csv(std::ostream& out, const SessionSet& set, std::span<const ShareRow> rows) {
  out << kSharesHeader << '\n';
  for (const auto& r : rows)
    out << r.t << ',' << set.sessions[r.session].session_id() << ',' << csv::format_number(r.cum_rate_bps) << '\n';
}

void write_aggregate_csv(std::ostream& out, const SessionSet& set, std::span<const double> aggregate,
                         std::span<const int> targets) {
  out << kAggregateHeader << '\n';
  const std::size_t g = set.grid.size();
  const std::size_t length = aggregate.size() / g;
  std::vector<std::size_t> cols;
  for (int v : targets) {
    auto it = std::lower_bound(set.grid.begin(), set.grid.end(), v);
    if (it == set.grid.end() || *it != v) throw Error("target " + std::to_string(v) + " not on the grid");
    cols.push_back(static_cast<std::size_t>(it - set.grid.begin()));
  }
  for (std::size_t t = 0; t < length; ++t)
    for (std::size_t k = 0; k < cols.size(); ++k)
      out << t << ',' << targets[k] << ',' << csv::format_number(aggregate[t * g + cols[k]]) << '\n';
}

}  // namespace qoesim
