#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace qoesim {

struct UtilityAnchor {
  int vmaf = 0;
  double utility = 0.0;
  friend bool operator==(const UtilityAnchor&, const UtilityAnchor&) = default;
};

/// Piecewise-linear VMAF -> utility policy. Zero below v_min (sessions that
/// cannot reach it are not worth admitting), flat above v_max.
class UtilityCurve {
 public:
  /// Anchors (50,100), (70,120), (90,130).
  UtilityCurve();
  explicit UtilityCurve(std::vector<UtilityAnchor> anchors);

  int v_min() const { return anchors_.front().vmaf; }
  int v_max() const { return anchors_.back().vmaf; }
  const std::vector<UtilityAnchor>& anchors() const { return anchors_; }
  double max_utility() const { return anchors_.back().utility; }

  double operator()(double vmaf) const;

  /// Same shape with every utility multiplied by `k` (> 0).
  UtilityCurve scaled(double k) const;

  friend bool operator==(const UtilityCurve&, const UtilityCurve&) = default;

 private:
  std::vector<UtilityAnchor> anchors_;
};

double utility(const UtilityCurve& curve, double vmaf);

/// Utility gained per bit/s when moving from (v_from, r_from) to
/// (v_to, r_to). From v_from = 0 (admission) this is U(v_to) / r_to.
/// Returns +inf for a free step with positive gain, 0 when the gain is 0.
/// Throws Error when r_to < r_from.
double marginal_utility(const UtilityCurve& curve, int v_from, int v_to, double r_from, double r_to);

/// JSON: {"v_min": 50, "v_max": 90, "anchors": [[50,100],[70,120],[90,130]]}.
/// v_min / v_max are optional but must match the first / last anchor.
UtilityCurve utility_curve_from_json(const std::string& text);
UtilityCurve load_utility_curve(const std::filesystem::path& path);

}  // namespace qoesim
