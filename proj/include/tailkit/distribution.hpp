#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "tailkit/logmag.hpp"
#include "tailkit/quadrature.hpp"

namespace tailkit {

struct Atom {
  double position;
  LogMag mass;
};

// A kink or anchor of a piecewise tail. `level` is the ladder level the
// point belongs to (-1 when the notion does not apply); `role` names the
// structural position ("branch_start", "branch_end", "step", ...). Roles let
// scan verdicts group evidence by structural position across levels instead
// of by raw coordinate.
struct Breakpoint {
  double x;
  int level = -1;
  std::string role;
};

struct FamilyMeta {
  std::string family;
  std::map<std::string, double> params;
  // True when the base mean integral(tail) diverges. Families set this from
  // closed-form knowledge; numeric divergence detection requires it to agree.
  bool mean_infinite = false;
  // sup of the rates at which the exponential moment is finite, and whether
  // the sup itself is attained.
  double moment_abscissa = 0.0;
  bool abscissa_attained = true;
};

// Tail-first description of a distribution on [support_min, infinity).
// log_tail is authoritative; density and atoms must reconcile with it
// (tail differences equal the integrated density plus atom masses).
struct AnalyticDistribution {
  double support_min = 0.0;
  std::function<LogMag(double)> log_tail;
  std::function<LogMag(double)> log_density;  // empty: no density part
  std::vector<Atom> atoms;                    // ascending by position
  std::vector<Breakpoint> breakpoints;        // ascending, kinks only
  std::vector<Breakpoint> schedule_hints;     // extra anchors, not kinks
  std::vector<double> quadrature_cuts;        // kinks that never anchor schedules
  FamilyMeta meta;

  LogMag tail(double x) const {
    if (std::isnan(x)) throw std::invalid_argument("tail: x is NaN");
    if (x < support_min) return LogMag::one();
    LogMag t = log_tail(x);
    // Tails are probabilities; summing branch + remainder terms at a support
    // edge can land a hair above 1 in the log domain.  Clamp.
    if (t.log_value_l() > 0.0L) return LogMag::one();
    return t;
  }

  LogMag density(double x) const {
    if (!log_density || x < support_min) return LogMag::zero();
    return log_density(x);
  }

  bool has_density() const { return static_cast<bool>(log_density); }

  std::vector<double> breakpoints_in(double lo, double hi) const {
    std::vector<double> out;
    for (const auto& b : breakpoints)
      if (b.x > lo && b.x < hi) out.push_back(b.x);
    for (double c : quadrature_cuts)
      if (c > lo && c < hi) out.push_back(c);
    for (const auto& a : atoms)
      if (a.position > lo && a.position < hi) out.push_back(a.position);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  // Total atom mass on (lo, hi].
  LogMag atom_mass_in(double lo, double hi) const {
    LogMag m = LogMag::zero();
    for (const auto& a : atoms)
      if (a.position > lo && a.position <= hi) m = log_add(m, a.mass);
    return m;
  }
};

// ------------------------------------------------------------- schedules

struct CheckpointPoint {
  double x;
  int level = -1;
  std::string role;
};

struct CheckpointSchedule {
  std::vector<CheckpointPoint> points;  // strictly increasing x
  int window = 8;                       // trailing window length
  std::string origin;

  void validate() const {
    if (window < 2) throw std::invalid_argument("schedule: window < 2");
    if (points.size() < static_cast<size_t>(3 * window))
      throw std::invalid_argument(
          "schedule: fewer than 3*window checkpoints");
    for (size_t i = 1; i < points.size(); ++i)
      if (!(points[i - 1].x < points[i].x))
        throw std::invalid_argument("schedule: not strictly increasing");
  }

  std::vector<double> xs() const {
    std::vector<double> v;
    v.reserve(points.size());
    for (const auto& p : points) v.push_back(p.x);
    return v;
  }
};

namespace detail {

inline bool nearly_same_point(double a, double b) {
  return std::fabs(a - b) <= 1e-9 * std::max({1.0, std::fabs(a),
                                              std::fabs(b)});
}

// %.6g for note strings: std::to_string flattens small magnitudes to zero
inline std::string fmt_g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace detail

// Anchor-plus-fill schedule: every breakpoint and hint with level <= n_max,
// each shifted by +-t for each offset, plus a log-uniform fill. Anchors keep
// their roles so downstream verdicts can follow a structural subsequence.
inline CheckpointSchedule default_schedule(
    const AnalyticDistribution& F, int n_max, int fill_per_decade = 16,
    const std::vector<double>& t_offsets = {1.0, 2.0}) {
  if (n_max < 0) throw std::invalid_argument("default_schedule: n_max < 0");
  if (fill_per_decade < 1)
    throw std::invalid_argument("default_schedule: fill_per_decade < 1");
  std::vector<CheckpointPoint> pts;
  // anchors and offsets below the support edge stay in: tail ratios across
  // the edge are legitimate scan data, the tail is simply 1 there
  auto push = [&](double x, int level, const std::string& role) {
    if (!(x > 0.0)) return;
    if (!std::isfinite(x)) return;
    pts.push_back({x, level, role});
  };
  std::vector<Breakpoint> anchors;
  for (const auto* src : {&F.breakpoints, &F.schedule_hints})
    for (const auto& b : *src)
      if (b.level <= n_max) anchors.push_back(b);
  for (const auto& b : anchors) {
    push(b.x, b.level, b.role);
    for (double t : t_offsets) {
      if (b.x - t < b.x) push(b.x - t, b.level, b.role + "-t");
      if (b.x + t > b.x) push(b.x + t, b.level, b.role + "+t");
    }
  }
  // fill range: through the anchor span, or a pure fill when there are none
  double lo = std::max(F.support_min, 1e-2);
  double hi = 0.0;
  for (const auto& p : pts) hi = std::max(hi, p.x);
  if (pts.empty()) {
    lo = std::max(F.support_min, 0.1);
    hi = std::pow(10.0, std::max(2, n_max));
  } else {
    hi *= 3.0;
    lo = std::max(lo, 1e-2);
  }
  if (lo <= 0.0) lo = 0.1;
  double ldec = std::log10(hi / lo);
  int nfill = std::max(2, static_cast<int>(std::ceil(ldec * fill_per_decade)));
  for (int i = 0; i <= nfill; ++i) {
    double x = lo * std::pow(10.0, ldec * i / nfill);
    push(x, -1, "fill");
  }
  std::stable_sort(pts.begin(), pts.end(),
                   [](const CheckpointPoint& a, const CheckpointPoint& b) {
                     return a.x < b.x;
                   });
  // dedup: keep the structural anchor over a fill point
  std::vector<CheckpointPoint> out;
  for (auto& p : pts) {
    if (!out.empty() && detail::nearly_same_point(out.back().x, p.x)) {
      if (out.back().role == "fill" && p.role != "fill") out.back() = p;
      continue;
    }
    out.push_back(p);
  }
  CheckpointSchedule sched;
  sched.points = std::move(out);
  sched.origin = "default_schedule(n_max=" + std::to_string(n_max) +
                 ", fill_per_decade=" + std::to_string(fill_per_decade) + ")";
  return sched;
}

// Restrict a schedule to checkpoints at or below x_max — typically the
// highest certified quadrature cut of a family, past which integrands may
// hold unresolvable kinks. Shrinks the window when few points remain.
inline CheckpointSchedule clip_schedule(CheckpointSchedule s, double x_max) {
  std::erase_if(s.points,
                [x_max](const CheckpointPoint& p) { return p.x > x_max; });
  s.window = std::max(
      2, std::min(s.window, static_cast<int>(s.points.size()) / 3));
  s.origin += " clipped at " + std::to_string(x_max);
  return s;
}

// ---------------------------------------------------- exponential moments

struct ExpMomentResult {
  bool divergent = false;
  double value = std::numeric_limits<double>::quiet_NaN();
  LogMag log_integral = LogMag::zero();
  std::string note;
};

namespace detail {

inline bool meta_says_divergent(const FamilyMeta& m, double gamma) {
  if (gamma == 0.0) return m.mean_infinite;
  if (gamma > m.moment_abscissa) return true;
  if (gamma == m.moment_abscissa && !m.abscissa_attained) return true;
  return false;
}

}  // namespace detail

// I(gamma) = integral over [0, inf) of e^{gamma y} tail(y) dy, summed level
// by level. Finite only with a trailing-geometric certificate; divergent
// only when the numeric growth signal and the family metadata agree (or the
// metadata alone, when the growth is too slow to show within the horizon).
inline ExpMomentResult exp_weighted_tail_integral(
    const AnalyticDistribution& F, double gamma,
    const QuadratureSpec& spec = {}) {
  ExpMomentResult res;
  const bool meta_div = detail::meta_says_divergent(F.meta, gamma);
  // segment edges: 0, support edge, breakpoints, then doubling extension
  std::vector<double> edges{0.0};
  if (F.support_min > 0.0) edges.push_back(F.support_min);
  {
    std::vector<double> cuts;
    for (const auto& b : F.breakpoints) cuts.push_back(b.x);
    cuts.insert(cuts.end(), F.quadrature_cuts.begin(),
                F.quadrature_cuts.end());
    std::sort(cuts.begin(), cuts.end());
    for (double c : cuts)
      if (c > edges.back()) edges.push_back(c);
  }
  auto integrand = [&](double y) {
    LogMag t = F.tail(y);
    if (t.is_zero()) return LogMag::zero();
    return LogMag::from_log_l(static_cast<long double>(gamma) * y +
                              t.log_value_l());
  };
  LogMag total = LogMag::zero();
  LogMag prev_seg = LogMag::zero();
  std::vector<double> ratios;
  int growth_run = 0;
  int zero_run = 0;
  size_t i = 1;
  double last_edge = edges.empty() ? 0.0 : edges.back();
  const int kMaxSegments = 500;
  for (int seg = 0; seg < kMaxSegments; ++seg) {
    double lo, hi;
    if (i < edges.size()) {
      lo = edges[i - 1];
      hi = edges[i];
      ++i;
    } else {
      lo = last_edge;
      hi = (lo < 1.0) ? lo + 1.0 : lo * 2.0;
      last_edge = hi;
    }
    if (!(hi > lo)) continue;
    LogMag s = integrate_log(integrand, lo, hi, {}, spec);
    total = log_add(total, s);
    if (s.is_zero()) {
      if (++zero_run >= 2 && i >= edges.size()) {
        if (meta_div) {
          res.divergent = true;
          res.note = "materialized tail reaches its level cap; family "
                     "metadata marks the moment divergent";
          return res;
        }
        res.log_integral = total;
        res.note = "tail reached zero";
        return res;
      }
      prev_seg = s;
      continue;
    }
    zero_run = 0;
    if (!prev_seg.is_zero()) {
      double g = ratio(s, prev_seg);
      ratios.push_back(g);
      growth_run = (g > 1.5) ? growth_run + 1 : 0;
      if (growth_run >= 5 && meta_div) {
        res.divergent = true;
        res.note = "5 consecutive level growth factors above 1.5; "
                   "family metadata confirms divergence";
        return res;
      }
      // Trailing geometric certificate, valid wherever the walk stands:
      // once three consecutive level ratios sit below 0.9 the constructions'
      // segment sums stay dominated by the geometric continuation. Firing
      // mid-walk matters: far ladder segments are astronomically wide, and
      // a decaying integrand over such a span cannot be panel-resolved, so
      // the walk must be able to stop before reaching them.
      if (ratios.size() >= 3) {
        double q = *std::max_element(ratios.end() - 3, ratios.end());
        if (q < 0.9) {
          double rem_rel = ratio(s, total) * q / (1.0 - q);
          if (rem_rel < 1e-13) {
            res.log_integral = total;
            res.note = "trailing geometric certificate, q=" +
                       std::to_string(q);
            return res;
          }
        }
      }
    }
    prev_seg = s;
  }
  if (meta_div) {
    res.divergent = true;
    res.note = "family metadata marks the moment divergent; numeric growth "
               "did not stabilize within the horizon";
    return res;
  }
  throw std::runtime_error(
      "exp_weighted_tail_integral: no convergence certificate within the "
      "segment horizon");
}

// m(F, gamma) = 1 + gamma * I(gamma). gamma = 0 gives exactly 1.
inline ExpMomentResult exp_moment(const AnalyticDistribution& F, double gamma,
                                  const QuadratureSpec& spec = {}) {
  if (gamma < 0.0) throw std::invalid_argument("exp_moment: gamma < 0");
  if (gamma == 0.0) {
    ExpMomentResult r;
    r.value = 1.0;
    r.log_integral = LogMag::zero();
    r.note = "gamma = 0";
    return r;
  }
  ExpMomentResult r = exp_weighted_tail_integral(F, gamma, spec);
  if (!r.divergent) r.value = 1.0 + gamma * r.log_integral.to_linear();
  return r;
}

// Mean of the distribution as the integral of the tail over [0, inf).
inline ExpMomentResult mean_integral(const AnalyticDistribution& F,
                                     const QuadratureSpec& spec = {}) {
  ExpMomentResult r = exp_weighted_tail_integral(F, 0.0, spec);
  if (!r.divergent) r.value = r.log_integral.to_linear();
  return r;
}

// --------------------------------------------------------- serialization

inline nlohmann::json to_descriptor(const AnalyticDistribution& F) {
  nlohmann::json j;
  j["family"] = F.meta.family;
  j["params"] = F.meta.params;
  j["support_min"] = F.support_min;
  return j;
}

inline void write_grid_csv(const AnalyticDistribution& F,
                           const std::vector<double>& xs,
                           const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_grid_csv: cannot open " + path);
  out << "x,log_tail\n";
  out.precision(17);
  for (double x : xs) {
    LogMag t = F.tail(x);
    out << x << ",";
    if (t.is_zero())
      out << "-inf";
    else
      out << t.log_value();
    out << "\n";
  }
}

}  // namespace tailkit
