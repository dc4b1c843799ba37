#pragma once

// Sampled tail of a convolution result. Convolution outputs have no closed
// form, so they are carried as a strictly increasing grid of positions with
// the log-tail at each node, interpolated linearly in (x, log tail) between
// nodes. Node values are computed exactly (one quadrature per node) by the
// builders in convolution.hpp; the grid is refined until the midpoint
// interpolation residual meets the requested tolerance, and the largest
// residual observed on any accepted segment is recorded as `certificate`.
//
// Jumps (pair sums of operand atoms) cannot be interpolated: the builders
// bracket each one inside a hairline segment of relative width ~1e-9 whose
// endpoints carry the left and right limits. Such segments are exempt from
// the certificate; everywhere else the certificate applies.

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "tailkit/logmag.hpp"

namespace tailkit {

namespace detail {

// Segments at or below this width carry discontinuities and are exempt
// from interpolation certification.
inline double jump_segment_width(double x) {
  return 1e-9 * std::max(1.0, std::fabs(x));
}

}  // namespace detail

struct GridDistribution {
  std::vector<double> grid;      // strictly increasing; front() == support_min
  std::vector<LogMag> log_tail;  // right-continuous tail value at each node
  double support_min = 0.0;

  // Structural positions (operand kink images, atom sums) kept for use as
  // quadrature cuts when this object is itself an operand of a later fold.
  std::vector<double> anchors;
  // Positions where the tail genuinely jumps (sums of operand atoms).
  std::vector<double> jump_points;

  // Largest midpoint interpolation residual (log scale) on any certified
  // segment, and whether every segment met the builder's tolerance.
  double certificate = std::numeric_limits<double>::quiet_NaN();
  bool certificate_met = false;
  // Largest log gap between the two integration orders, when cross-checked.
  double order_cross_diff = std::numeric_limits<double>::quiet_NaN();
  // Certified bound on the tail mass a truncated series omitted (random
  // mixtures only; exact builders leave it 0).
  double remainder = 0.0;
  std::string truncation_note;
  std::string provenance;

  LogMag tail(double x) const {
    if (std::isnan(x)) throw std::invalid_argument("grid tail: x is NaN");
    if (grid.size() < 2 || grid.size() != log_tail.size())
      throw std::logic_error("grid tail: malformed grid");
    if (x < support_min || x < grid.front()) return LogMag::one();
    if (x >= grid.back()) {
      // extend the final log-linear segment; never let the tail grow
      const LogMag lb = log_tail.back();
      if (lb.is_zero()) return LogMag::zero();
      const size_t n = grid.size();
      const long double run =
          static_cast<long double>(grid[n - 1]) - grid[n - 2];
      long double slope = 0.0L;
      if (!log_tail[n - 2].is_zero() && run > 0.0L)
        slope = (lb.log_value_l() - log_tail[n - 2].log_value_l()) / run;
      if (slope > 0.0L) slope = 0.0L;
      return LogMag::from_log_l(lb.log_value_l() +
                                slope * (static_cast<long double>(x) -
                                         grid.back()));
    }
    const auto it = std::upper_bound(grid.begin(), grid.end(), x);
    const size_t i = static_cast<size_t>(it - grid.begin()) - 1;
    if (grid[i] == x) return log_tail[i];
    const LogMag lv = log_tail[i], rv = log_tail[i + 1];
    if (lv.is_zero()) return LogMag::zero();
    // Tail hits zero somewhere inside (grid[i], grid[i+1]): hold the left
    // value; zero starts only at the first zero-valued node.
    if (rv.is_zero()) return lv;
    const long double t =
        (static_cast<long double>(x) - grid[i]) /
        (static_cast<long double>(grid[i + 1]) - grid[i]);
    return LogMag::from_log_l(lv.log_value_l() +
                              t * (rv.log_value_l() - lv.log_value_l()));
  }

  // head_log: expected log value at the first node. 0 in the ordinary case;
  // log(1 - m) when the operands' atoms collide exactly at the support edge
  // with joint mass m, or log(1 - p0) for a random mixture with weight at 0.
  void validate(double head_log = 0.0, double slack = 1e-8) const {
    if (grid.size() < 2)
      throw std::invalid_argument("grid: fewer than 2 nodes");
    if (grid.size() != log_tail.size())
      throw std::invalid_argument("grid: node/value length mismatch");
    for (size_t i = 1; i < grid.size(); ++i)
      if (!(grid[i - 1] < grid[i]))
        throw std::invalid_argument("grid: positions not strictly increasing");
    if (std::fabs(grid.front() - support_min) >
        1e-12 * std::max(1.0, std::fabs(support_min)))
      throw std::invalid_argument("grid: front node is not the support edge");
    if (std::isinf(head_log) && head_log < 0.0) {
      // degenerate head: every unit of mass sits exactly at the support edge
      if (!log_tail.front().is_zero())
        throw std::invalid_argument("grid: expected an empty tail above the "
                                    "support edge");
    } else if (log_tail.front().is_zero() ||
               std::fabs(log_tail.front().log_value() - head_log) >
                   std::max(slack, 1e-8)) {
      throw std::invalid_argument("grid: head value disagrees with the "
                                  "expected mass above the support edge");
    }
    for (size_t i = 1; i < log_tail.size(); ++i) {
      if (log_tail[i].is_zero()) continue;
      if (log_tail[i - 1].is_zero())
        throw std::invalid_argument("grid: tail resurrects after zero");
      if (log_tail[i].log_value_l() >
          log_tail[i - 1].log_value_l() + static_cast<long double>(slack))
        throw std::invalid_argument("grid: tail values increase");
    }
  }

  void to_csv(std::ostream& out) const {
    out << "x,log_tail,certificate\n";
    out.precision(17);
    for (size_t i = 0; i < grid.size(); ++i) {
      out << grid[i] << ",";
      if (log_tail[i].is_zero())
        out << "-inf";
      else
        out << log_tail[i].log_value();
      out << "," << certificate << "\n";
    }
  }

  nlohmann::json descriptor() const {
    nlohmann::json j;
    j["schema"] = 1;
    j["provenance"] = provenance;
    j["support_min"] = support_min;
    j["n_points"] = grid.size();
    j["x_range"] = {grid.empty() ? 0.0 : grid.front(),
                    grid.empty() ? 0.0 : grid.back()};
    j["certificate"] = certificate;
    j["certificate_met"] = certificate_met;
    if (!std::isnan(order_cross_diff))
      j["order_cross_diff"] = order_cross_diff;
    j["remainder"] = remainder;
    if (!truncation_note.empty()) j["truncation_note"] = truncation_note;
    return j;
  }
};

}  // namespace tailkit
