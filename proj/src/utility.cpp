#include "qoesim/utility.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "qoesim/csv.hpp"

namespace qoesim {

UtilityCurve::UtilityCurve() : UtilityCurve({{50, 100.0}, {70, 120.0}, {90, 130.0}}) {}

UtilityCurve::UtilityCurve(std::vector<UtilityAnchor> anchors) : anchors_(std::move(anchors)) {
  if (anchors_.size() < 2) throw Error("utility curve needs at least two anchors");
  for (std::size_t i = 1; i < anchors_.size(); ++i) {
    if (anchors_[i].vmaf <= anchors_[i - 1].vmaf || !(anchors_[i].utility > anchors_[i - 1].utility))
      throw Error("utility anchors must be strictly increasing in VMAF and utility");
  }
  if (anchors_.front().vmaf < 1 || anchors_.back().vmaf > 100) throw Error("utility anchors must lie in [1,100]");
  if (!(anchors_.front().utility > 0.0)) throw Error("utility at v_min must be positive");
}

double UtilityCurve::operator()(double vmaf) const {
  if (vmaf < anchors_.front().vmaf) return 0.0;
  if (vmaf >= anchors_.back().vmaf) return anchors_.back().utility;
  std::size_t i = 1;
  while (anchors_[i].vmaf <= vmaf) ++i;
  const auto& a = anchors_[i - 1];
  const auto& b = anchors_[i];
  return a.utility + (b.utility - a.utility) * (vmaf - a.vmaf) / (b.vmaf - a.vmaf);
}

UtilityCurve UtilityCurve::scaled(double k) const {
  if (!(k > 0.0)) throw Error("utility scale must be positive");
  auto anchors = anchors_;
  for (auto& a : anchors) a.utility *= k;
  return UtilityCurve(std::move(anchors));
}

double utility(const UtilityCurve& curve, double vmaf) { return curve(vmaf); }

double marginal_utility(const UtilityCurve& curve, int v_from, int v_to, double r_from, double r_to) {
  if (v_to <= v_from) throw Error("marginal utility needs v_to > v_from");
  if (r_to < r_from) {
    throw Error("demand decreases from " + std::to_string(r_from) + " to " + std::to_string(r_to) +
                " bit/s between VMAF " + std::to_string(v_from) + " and " + std::to_string(v_to) + " (unsanitized)");
  }
  const double gain = v_from == 0 ? curve(v_to) : curve(v_to) - curve(v_from);
  const double cost = v_from == 0 ? r_to : r_to - r_from;
  if (gain <= 0.0) return 0.0;
  if (std::isinf(r_to)) return 0.0;
  if (cost == 0.0) return std::numeric_limits<double>::infinity();
  return gain / cost;
}

namespace {

UtilityCurve curve_from_json(const nlohmann::json& j) {
  if (!j.contains("anchors")) throw Error("utility curve: missing 'anchors'");
  std::vector<UtilityAnchor> anchors;
  for (const auto& a : j.at("anchors")) {
    if (!a.is_array() || a.size() != 2) throw Error("utility curve: anchors must be [vmaf, utility] pairs");
    anchors.push_back({a[0].get<int>(), a[1].get<double>()});
  }
  UtilityCurve curve(std::move(anchors));
  if (j.contains("v_min") && j["v_min"].get<int>() != curve.v_min())
    throw Error("utility curve: v_min does not match the first anchor");
  if (j.contains("v_max") && j["v_max"].get<int>() != curve.v_max())
    throw Error("utility curve: v_max does not match the last anchor");
  return curve;
}

}  // namespace

UtilityCurve utility_curve_from_json(const std::string& text) {
  try {
    return curve_from_json(nlohmann::json::parse(text));
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("utility curve: ") + e.what());
  }
}

UtilityCurve load_utility_curve(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open utility curve " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return utility_curve_from_json(ss.str());
}

}  // namespace qoesim
