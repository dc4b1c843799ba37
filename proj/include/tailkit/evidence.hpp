#pragma once

// Evidence containers for the limit scans. A scan walks a checkpoint
// schedule, records one ratio per point, and condenses the trailing window
// into sup/inf/trend plus a three-valued verdict. The raw sequences ride
// along so a report can always be audited by eye.

#include <cmath>
#include <limits>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

namespace tailkit {

enum class Verdict { SUPPORTS, REFUTES, INCONCLUSIVE };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::SUPPORTS: return "SUPPORTS";
    case Verdict::REFUTES: return "REFUTES";
    default: return "INCONCLUSIVE";
  }
}

// Knobs shared by the window verdicts. One checkpoint per ladder level is
// the decisive resolution, so the defaults assume a handful of levels.
struct WindowParams {
  int window = 8;        // trailing checkpoints condensed per verdict
  double delta = 0.05;   // half-width of the acceptance band around 1
  double margin = 0.25;  // excess a refuting subsequence must sustain
  // Shortfall below 1 that refutes a one-sided lower-bound claim. Separate
  // from `margin` because an inequality is broken by any persistent strict
  // shortfall, not only an asymmetric one; widen it (>= a few interpolation
  // tolerances) when the values come from certified grids rather than
  // analytic tails.
  double floor_slack = 1e-6;
};

struct LimitEvidence {
  std::string claim;
  std::vector<double> points;
  // Linear-domain ratios (safe: always ratios of comparable magnitudes).
  // +infinity marks a vanished denominator under positive mass.
  std::vector<double> values;
  // Optional parallel annotations: the checkpoint level and role behind each
  // recorded value. Scans that walk a structured schedule fill these so a
  // refuting subsequence can be audited; simple scans leave them empty.
  std::vector<int> levels;
  std::vector<std::string> roles;
  double window_sup = std::numeric_limits<double>::quiet_NaN();
  double window_inf = std::numeric_limits<double>::quiet_NaN();
  int trend = 0;  // sign of the drift across the trailing window
  Verdict verdict = Verdict::INCONCLUSIVE;
  // Secondary readings of the same value series (e.g. the one-sided
  // lower-bound form of a two-sided equivalence claim), keyed by name.
  std::map<std::string, Verdict> aux;
  std::string note;

  nlohmann::ordered_json to_json() const;
  void to_csv(std::ostream& os) const;
};

namespace detail {

// JSON has no infinity; encode non-finite ratios as strings.
inline nlohmann::ordered_json encode_real(double v) {
  if (std::isnan(v)) return nullptr;
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

struct WindowStats {
  double sup = std::numeric_limits<double>::quiet_NaN();
  double inf = std::numeric_limits<double>::quiet_NaN();
  int trend = 0;
};

// sup/inf over the last `window` entries, plus the sign of last-vs-first
// drift within that window (zero when the move is below 1e-9 relative).
inline WindowStats trailing_stats(const std::vector<double>& v, int window) {
  WindowStats s;
  if (v.empty()) return s;
  size_t k = std::min<size_t>(v.size(), std::max(window, 1));
  size_t first = v.size() - k;
  s.sup = -std::numeric_limits<double>::infinity();
  s.inf = std::numeric_limits<double>::infinity();
  for (size_t i = first; i < v.size(); ++i) {
    s.sup = std::max(s.sup, v[i]);
    s.inf = std::min(s.inf, v[i]);
  }
  double a = v[first], b = v.back();
  double drift = b - a;
  double scale = std::max({1e-300, std::fabs(a), std::fabs(b)});
  if (std::isfinite(drift) && std::fabs(drift) > 1e-9 * scale)
    s.trend = drift > 0 ? 1 : -1;
  else if (!std::isfinite(drift))
    s.trend = (std::isinf(b) && !std::isinf(a)) ? 1
              : (std::isinf(a) && !std::isinf(b)) ? -1 : 0;
  return s;
}

}  // namespace detail

inline nlohmann::ordered_json LimitEvidence::to_json() const {
  nlohmann::ordered_json j;
  j["claim"] = claim;
  j["points"] = points;
  nlohmann::ordered_json vals = nlohmann::ordered_json::array();
  for (double v : values) vals.push_back(detail::encode_real(v));
  j["values"] = vals;
  if (!levels.empty()) j["levels"] = levels;
  if (!roles.empty()) j["roles"] = roles;
  j["window_sup"] = detail::encode_real(window_sup);
  j["window_inf"] = detail::encode_real(window_inf);
  j["trend"] = trend;
  j["verdict"] = to_string(verdict);
  if (!aux.empty()) {
    nlohmann::ordered_json a;
    for (const auto& [k, v] : aux) a[k] = to_string(v);
    j["aux"] = a;
  }
  j["note"] = note;
  return j;
}

// One row per checkpoint. Non-finite ratios print as inf/-inf/nan, which
// spreadsheet tools accept; the annotation columns are blank when a scan
// did not record them.
inline void LimitEvidence::to_csv(std::ostream& os) const {
  const bool annotated = levels.size() == values.size() &&
                         roles.size() == values.size();
  os << (annotated ? "x,value,level,role\n" : "x,value\n");
  for (size_t i = 0; i < values.size(); ++i) {
    os << points[i] << ',' << values[i];
    if (annotated) os << ',' << levels[i] << ',' << roles[i];
    os << '\n';
  }
}

}  // namespace tailkit
