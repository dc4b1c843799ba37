#pragma once

// Panel-adaptive Gauss-Legendre quadrature carried out entirely in log
// domain. Integrands are log-valued (LogMag); panel sums accumulate via
// log_add, so integrals of magnitudes like e^{-60000} never underflow.
//
// All integrands in this library are piecewise-smooth with known kink
// locations (ladder breakpoints, interval endpoints, convolution images
// of breakpoints). Panels are split at every supplied breakpoint before
// any adaptive refinement, so Gauss panels only ever see smooth pieces.

#include <algorithm>
#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <sstream>
#include <vector>

#include "tailkit/logmag.hpp"

namespace tailkit {

struct QuadratureSpec {
  double relative_tolerance = 1e-10;  // in (0, 1e-3]
  int max_panel_depth = 40;           // >= 4
  int nodes_per_panel = 15;           // 7 or 15

  void validate() const {
    if (!(relative_tolerance > 0.0) || relative_tolerance > 1e-3)
      throw std::invalid_argument("QuadratureSpec: tolerance outside (0, 1e-3]");
    if (max_panel_depth < 4)
      throw std::invalid_argument("QuadratureSpec: max_panel_depth < 4");
    if (nodes_per_panel != 7 && nodes_per_panel != 15)
      throw std::invalid_argument("QuadratureSpec: unsupported node count");
  }
};

class QuadratureError : public std::runtime_error {
 public:
  QuadratureError(double lo, double hi, LogMag prev, LogMag last)
      : std::runtime_error(format(lo, hi, prev, last)),
        panel_lo(lo), panel_hi(hi), previous_estimate(prev), last_estimate(last) {}

  double panel_lo, panel_hi;
  LogMag previous_estimate, last_estimate;

 private:
  static std::string format(double lo, double hi, LogMag prev, LogMag last) {
    std::ostringstream os;
    os << "quadrature did not converge on panel [" << lo << ", " << hi
       << "]; last two log estimates " << prev.log_value() << ", "
       << last.log_value();
    return os.str();
  }
};

using LogIntegrand = std::function<LogMag(double)>;

namespace detail {

struct GaussNode { double x, w; };

inline constexpr std::array<GaussNode, 7> kGauss7{{
  {-0.94910791234275852453, 0.12948496616886969327},
  {-0.74153118559939443986, 0.2797053914892766679},
  {-0.40584515137739716691, 0.38183005050511894495},
  {0.0, 0.41795918367346938776},
  {0.40584515137739716691, 0.38183005050511894495},
  {0.74153118559939443986, 0.2797053914892766679},
  {0.94910791234275852453, 0.12948496616886969327},
}};

inline constexpr std::array<GaussNode, 15> kGauss15{{
  {-0.98799251802048542849, 0.030753241996117268355},
  {-0.93727339240070590431, 0.070366047488108124709},
  {-0.8482065834104272162, 0.10715922046717193501},
  {-0.72441773136017004742, 0.13957067792615431445},
  {-0.57097217260853884754, 0.16626920581699393355},
  {-0.3941513470775633699, 0.18616100001556221103},
  {-0.2011940939974345223, 0.19843148532711157646},
  {0.0, 0.20257824192556127288},
  {0.2011940939974345223, 0.19843148532711157646},
  {0.3941513470775633699, 0.18616100001556221103},
  {0.57097217260853884754, 0.16626920581699393355},
  {0.72441773136017004742, 0.13957067792615431445},
  {0.8482065834104272162, 0.10715922046717193501},
  {0.93727339240070590431, 0.070366047488108124709},
  {0.98799251802048542849, 0.030753241996117268355},
}};

// One Gauss panel in log domain: log( (hi-lo)/2 * sum w_i f(x_i) ).
inline LogMag gauss_panel(const LogIntegrand& f, double lo, double hi,
                          std::span<const GaussNode> nodes) {
  const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
  double peak = NEG_INF;
  // Two passes: find the peak log term, then sum shifted exponentials.
  std::array<double, 15> terms;
  std::size_t n = nodes.size();
  for (std::size_t i = 0; i < n; ++i) {
    const LogMag fx = f(mid + half * nodes[i].x);
    if (std::isnan(fx.log_value()))
      throw std::invalid_argument("integrate_log: integrand returned NaN");
    terms[i] = fx.is_zero() ? NEG_INF
                            : fx.log_value() + std::log(nodes[i].w);
    peak = std::max(peak, terms[i]);
  }
  if (peak == NEG_INF) return LogMag::zero();
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    if (terms[i] != NEG_INF) acc += std::exp(terms[i] - peak);
  return LogMag::from_log(peak + std::log(acc) + std::log(half));
}

inline bool close_rel(LogMag a, LogMag b, double tol) {
  if (a.is_zero() && b.is_zero()) return true;
  if (a.is_zero() || b.is_zero()) return false;
  return std::fabs(std::expm1(a.log_value() - b.log_value())) <= tol;
}

inline LogMag adaptive(const LogIntegrand& f, double lo, double hi,
                       std::span<const GaussNode> nodes,
                       const QuadratureSpec& spec, int depth) {
  const LogMag whole = gauss_panel(f, lo, hi, nodes);
  const double mid = 0.5 * (lo + hi);
  if (!(mid > lo && mid < hi)) return whole;  // panel at double resolution
  const LogMag left = gauss_panel(f, lo, mid, nodes);
  const LogMag right = gauss_panel(f, mid, hi, nodes);
  const LogMag halves = log_add(left, right);
  // Identically-zero panels (tails beyond support, plateau densities)
  // short-circuit: refinement cannot resurrect a vanished integrand.
  if (whole.is_zero() && halves.is_zero()) return LogMag::zero();
  if (close_rel(whole, halves, spec.relative_tolerance)) return halves;
  if (depth >= spec.max_panel_depth)
    throw QuadratureError(lo, hi, whole, halves);
  return log_add(adaptive(f, lo, mid, nodes, spec, depth + 1),
                 adaptive(f, mid, hi, nodes, spec, depth + 1));
}

}  // namespace detail

// Integrate a log-valued function over [lo, hi]. Breakpoints interior to
// the interval become mandatory panel boundaries.
inline LogMag integrate_log(const LogIntegrand& f, double lo, double hi,
                            std::span<const double> breakpoints = {},
                            const QuadratureSpec& spec = {}) {
  spec.validate();
  if (std::isnan(lo) || std::isnan(hi) || lo > hi)
    throw std::invalid_argument("integrate_log: bad interval");
  if (lo == hi) return LogMag::zero();

  std::vector<double> cuts;
  cuts.push_back(lo);
  for (double b : breakpoints)
    if (b > lo && b < hi) cuts.push_back(b);
  cuts.push_back(hi);
  std::sort(cuts.begin(), cuts.end());
  // Drop cuts that coincide at double resolution.
  cuts.erase(std::unique(cuts.begin(), cuts.end(),
                         [](double a, double b) {
                           return b - a <= 1e-14 * std::max(1.0, std::fabs(a));
                         }),
             cuts.end());
  if (cuts.back() != hi) cuts.back() = hi;

  std::span<const detail::GaussNode> nodes =
      spec.nodes_per_panel == 7
          ? std::span<const detail::GaussNode>(detail::kGauss7)
          : std::span<const detail::GaussNode>(detail::kGauss15);

  LogMag total = LogMag::zero();
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
    total = log_add(total, detail::adaptive(f, cuts[i], cuts[i + 1], nodes,
                                            spec, 0));
  return total;
}

}  // namespace tailkit
