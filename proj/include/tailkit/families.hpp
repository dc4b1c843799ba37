#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "tailkit/distribution.hpp"
#include "tailkit/logmag.hpp"

namespace tailkit {

namespace detail {

// Positions materialize while a_n = a^{r^n} stays below 1e250; beyond that
// the ladder continues symbolically with zero tail contribution (the first
// dropped term is below e^-250 of the retained sum for every admissible
// parameter set).
inline constexpr double kPositionCapLog = 575.6462732485114;  // log(1e250)
inline constexpr double kPositionCap = 1e250;

struct Ladder {
  double alpha = 0.0, a = 0.0, r = 0.0;
  // exponents carried in long double so the deepest levels keep ~1e-17
  // relative accuracy; double mirrors serve as positions and metadata
  std::vector<long double> log_an_l;
  std::vector<double> log_an, an;
  long double log_C_l = 0.0L;
  double log_C = 0.0;
  std::vector<LogMag> T;  // T[m] = C * sum_{n>=m} a_n^-alpha, T[levels]=0

  int levels() const { return static_cast<int>(an.size()); }
};

inline Ladder build_ladder(double alpha, double a) {
  Ladder L;
  L.alpha = alpha;
  L.a = a;
  L.r = 1.0 + 1.0 / alpha;
  const long double lga = logl(static_cast<long double>(a));
  const long double rl = static_cast<long double>(L.r);
  for (long double p = 1.0L;
       static_cast<double>(p * lga) < kPositionCapLog; p *= rl)
    L.log_an_l.push_back(p * lga);
  for (long double lg : L.log_an_l) {
    L.log_an.push_back(static_cast<double>(lg));
    L.an.push_back(static_cast<double>(expl(lg)));
  }
  const long double al = static_cast<long double>(alpha);
  LogMag s = LogMag::zero();  // accumulate small-to-large for full precision
  for (int n = L.levels() - 1; n >= 0; --n)
    s = log_add(s, LogMag::from_log_l(-al * L.log_an_l[n]));
  L.log_C_l = -s.log_value_l();
  L.log_C = static_cast<double>(L.log_C_l);
  L.T.assign(L.levels() + 1, LogMag::zero());
  for (int m = L.levels() - 1; m >= 0; --m)
    L.T[m] = log_add(LogMag::from_log_l(L.log_C_l - al * L.log_an_l[m]),
                     L.T[m + 1]);
  return L;
}

inline double ulp_at(double x) {
  double ax = std::fabs(x);
  return std::nextafter(ax, std::numeric_limits<double>::infinity()) - ax;
}

// x sits measurably below end on the double grid.
inline bool resolvable_below(double end, double x) {
  return end - x > 8.0 * ulp_at(end);
}

// Largest n with key[n] <= v (requires key ascending, key[0] <= v).
inline int locate(const std::vector<double>& key, double v) {
  return static_cast<int>(std::upper_bound(key.begin(), key.end(), v) -
                          key.begin()) - 1;
}

// Largest n with key[n] <= v, or -1 when v sits below every key.
inline int locate_or_minus1(const std::vector<double>& key, double v) {
  auto it = std::upper_bound(key.begin(), key.end(), v);
  return static_cast<int>(it - key.begin()) - 1;
}

}  // namespace detail

// --------------------------------------------------------------------- F3

// Ladder tail with a linear branch on [a_n, 2a_n) dropping from T_n to the
// plateau T_{n+1}, constant until a_{n+1}.
inline AnalyticDistribution make_f3(double alpha, double a) {
  const double golden = (1.0 + std::sqrt(5.0)) / 2.0;
  if (!(alpha > 1.5 && alpha < golden))
    throw std::invalid_argument(
        "make_f3: alpha must lie in (3/2, (1+sqrt(5))/2)");
  const double r = 1.0 + 1.0 / alpha;
  if (!((r - 1.0) * std::log(a) > std::log(8.0)))
    throw std::invalid_argument(
        "make_f3: ladder gap too small, need a^r > 8a");
  auto L = std::make_shared<detail::Ladder>(detail::build_ladder(alpha, a));
  AnalyticDistribution F;
  F.support_min = L->an[0];
  F.meta.family = "f3";
  F.meta.params = {{"alpha", alpha}, {"a", a}};
  F.meta.mean_infinite = false;
  F.meta.moment_abscissa = 0.0;
  F.meta.abscissa_attained = true;
  F.log_tail = [L](double x) -> LogMag {
    if (x < L->an[0]) return LogMag::one();
    int n = detail::locate(L->an, x);
    if (x < 2.0 * L->an[n]) {
      // (2a - x)/a, not 2 - x/a: the numerator is exact for x in [a, 2a),
      // so z keeps full relative precision at the branch end where it -> 0
      double z = (2.0 * L->an[n] - x) / L->an[n];
      if (z <= 0.0) return L->T[n + 1];
      LogMag branch = LogMag::from_log_l(
          L->log_C_l -
          static_cast<long double>(L->alpha) * L->log_an_l[n] +
          logl(static_cast<long double>(z)));
      return log_add(L->T[n + 1], branch);
    }
    return L->T[n + 1];
  };
  F.log_density = [L](double x) -> LogMag {
    if (x < L->an[0]) return LogMag::zero();
    int n = detail::locate(L->an, x);
    if (x < 2.0 * L->an[n])
      return LogMag::from_log_l(
          L->log_C_l -
          static_cast<long double>(L->alpha + 1.0) * L->log_an_l[n]);
    return LogMag::zero();
  };
  for (int n = 0; n < L->levels(); ++n) {
    F.breakpoints.push_back({L->an[n], n, "branch_start"});
    F.breakpoints.push_back({2.0 * L->an[n], n, "branch_end"});
  }
  return F;
}

// --------------------------------------------------------------------- F1

// Branch on [a_n, 2^s a_n) interpolated by 1 - (u-1)^b with u = (x/a_n)^{1/s}.
inline AnalyticDistribution make_f1(double alpha, double a, double b,
                                    double s) {
  if (!(alpha >= 0.5 && alpha < 1.0))
    throw std::invalid_argument("make_f1: alpha must lie in [1/2, 1)");
  if (!(b >= 1.0)) throw std::invalid_argument("make_f1: b must be >= 1");
  if (!(s >= 1.0)) throw std::invalid_argument("make_f1: s must be >= 1");
  const double r = 1.0 + 1.0 / alpha;
  if (!((r - 1.0) * std::log(a) > (s + 2.0) * std::log(2.0)))
    throw std::invalid_argument(
        "make_f1: ladder gap too small, need a^r > 2^{s+2} a");
  auto L = std::make_shared<detail::Ladder>(detail::build_ladder(alpha, a));
  const double end_factor = std::pow(2.0, s);
  AnalyticDistribution F;
  F.support_min = L->an[0];
  F.meta.family = "f1";
  F.meta.params = {{"alpha", alpha}, {"a", a}, {"b", b}, {"s", s}};
  F.meta.mean_infinite = true;  // alpha < 1: plateau widths dominate
  F.meta.moment_abscissa = 0.0;
  F.meta.abscissa_attained = false;
  F.log_tail = [L, b, s, end_factor](double x) -> LogMag {
    if (x < L->an[0]) return LogMag::one();
    int n = detail::locate(L->an, x);
    double an = L->an[n];
    if (x < end_factor * an) {
      double u = std::pow(x / an, 1.0 / s);
      double inner;  // 1 - (u-1)^b without cancellation near u = 2
      if (u <= 1.0) {
        inner = 1.0;
      } else {
        double w = b * std::log(u - 1.0);
        inner = (w < 0.0) ? -std::expm1(w) : 0.0;
      }
      if (inner <= 0.0) return L->T[n + 1];
      LogMag branch = LogMag::from_log_l(
          L->log_C_l -
          static_cast<long double>(L->alpha) * L->log_an_l[n] +
          logl(static_cast<long double>(inner)));
      return log_add(L->T[n + 1], branch);
    }
    return L->T[n + 1];
  };
  F.log_density = [L, b, s, end_factor](double x) -> LogMag {
    if (x < L->an[0]) return LogMag::zero();
    int n = detail::locate(L->an, x);
    double an = L->an[n];
    if (x >= end_factor * an) return LogMag::zero();
    double u = std::pow(x / an, 1.0 / s);
    long double lg =
        L->log_C_l + static_cast<long double>(std::log(b / s)) +
        static_cast<long double>((1.0 / s - 1.0) * std::log(x)) -
        static_cast<long double>(L->alpha + 1.0 / s) * L->log_an_l[n];
    if (b > 1.0) {
      if (u <= 1.0) return LogMag::zero();
      lg += static_cast<long double>((b - 1.0) * std::log(u - 1.0));
    }
    return LogMag::from_log_l(lg);
  };
  for (int n = 0; n < L->levels(); ++n) {
    F.breakpoints.push_back({L->an[n], n, "branch_start"});
    F.breakpoints.push_back({end_factor * L->an[n], n, "branch_end"});
    // balance hint: where the branch term decays to the plateau level
    double end = end_factor * L->an[n];
    double hint = L->an[n] *
        std::pow(1.0 + std::pow(1.0 - 1.0 / L->an[n], 1.0 / b), s);
    if (hint > L->an[n] && detail::resolvable_below(end, hint))
      F.schedule_hints.push_back({hint, n, "balance"});
  }
  return F;
}

// --------------------------------------------------------------------- F2

// Ladder lives at positions a_n^{1/s}; the branch interpolant 2 - x^s/a_n
// is linear in x^s rather than x.
inline AnalyticDistribution make_f2(double alpha, double a, double s) {
  if (!(s > 1.0 && s < 2.0))
    throw std::invalid_argument("make_f2: s must lie in (1, 2)");
  if (!(alpha > 1.0 - 1.0 / s && alpha < 1.0 / s))
    throw std::invalid_argument(
        "make_f2: alpha must lie in (1 - 1/s, 1/s)");
  const double r = 1.0 + 1.0 / alpha;
  if (!((r - 1.0) * std::log(a) > std::log(2.0)))
    throw std::invalid_argument(
        "make_f2: ladder gap too small, need a^r > 2a");
  auto L = std::make_shared<detail::Ladder>(detail::build_ladder(alpha, a));
  const double ln2 = std::log(2.0);
  AnalyticDistribution F;
  F.support_min = static_cast<double>(expl(L->log_an_l[0] / s));
  F.meta.family = "f2";
  F.meta.params = {{"alpha", alpha}, {"a", a}, {"s", s}};
  F.meta.mean_infinite = true;  // alpha < 1/s: plateau widths dominate
  F.meta.moment_abscissa = 0.0;
  F.meta.abscissa_attained = false;
  F.log_tail = [L, s, ln2](double x) -> LogMag {
    long double lx = static_cast<long double>(s) *
                     logl(static_cast<long double>(x));
    if (lx < L->log_an_l[0]) return LogMag::one();
    int n = std::max(0, detail::locate_or_minus1(L->log_an,
                                                 static_cast<double>(lx)));
    if (lx < L->log_an_l[n] + static_cast<long double>(ln2)) {
      long double z = 2.0L - expl(lx - L->log_an_l[n]);
      if (z <= 0.0L) return L->T[n + 1];
      LogMag branch = LogMag::from_log_l(
          L->log_C_l -
          static_cast<long double>(L->alpha) * L->log_an_l[n] + logl(z));
      return log_add(L->T[n + 1], branch);
    }
    return L->T[n + 1];
  };
  F.log_density = [L, s, ln2](double x) -> LogMag {
    long double lx = static_cast<long double>(s) *
                     logl(static_cast<long double>(x));
    if (lx < L->log_an_l[0]) return LogMag::zero();
    int n = std::max(0, detail::locate_or_minus1(L->log_an,
                                                 static_cast<double>(lx)));
    if (lx < L->log_an_l[n] + static_cast<long double>(ln2))
      return LogMag::from_log_l(
          L->log_C_l + static_cast<long double>(std::log(s)) +
          static_cast<long double>(s - 1.0) * logl(static_cast<long double>(x)) -
          static_cast<long double>(L->alpha + 1.0) * L->log_an_l[n]);
    return LogMag::zero();
  };
  for (int n = 0; n < L->levels(); ++n) {
    double start = std::exp(L->log_an[n] / s);
    double end = std::exp((L->log_an[n] + ln2) / s);
    F.breakpoints.push_back({start, n, "branch_start"});
    F.breakpoints.push_back({end, n, "branch_end"});
    // balance hint: image of 2a_n - 1 under the 1/s power map, while the
    // double grid still separates it from the branch end
    double za = 2.0 * L->an[n] - 1.0;
    if (za < 2.0 * L->an[n]) {
      double hint = std::exp(std::log(za) / s);
      if (detail::resolvable_below(end, hint))
        F.schedule_hints.push_back({hint, n, "balance"});
    }
  }
  return F;
}

// --------------------------------------------------------------------- F4

// Exponential tail averaged with its own value at the next power-of-e step;
// atoms sit at the steps. The tail formula needs no level materialization,
// only the breakpoint/atom lists are capped.
inline AnalyticDistribution make_f4(double gamma) {
  if (!(gamma > 0.0)) throw std::invalid_argument("make_f4: gamma <= 0");
  AnalyticDistribution F;
  F.support_min = 1.0;
  F.meta.family = "f4";
  F.meta.params = {{"gamma", gamma}};
  F.meta.mean_infinite = false;
  F.meta.moment_abscissa = gamma;
  F.meta.abscissa_attained = false;
  F.log_tail = [gamma](double x) -> LogMag {
    if (x < 1.0) return LogMag::one();
    int k = static_cast<int>(std::floor(std::log(x)));
    if (k < 0) k = 0;
    while (x >= std::exp(static_cast<double>(k + 1))) ++k;
    while (k > 0 && x < std::exp(static_cast<double>(k))) --k;
    double step = std::exp(static_cast<double>(k + 1));
    LogMag sum = log_add(LogMag::from_log(-gamma * x),
                         LogMag::from_log(-gamma * step));
    return LogMag::from_log_l(sum.log_value_l() -
                              0.693147180559945309L);
  };
  F.log_density = [gamma](double x) -> LogMag {
    if (x < 1.0) return LogMag::zero();
    return LogMag::from_log(std::log(gamma / 2.0) - gamma * x);
  };
  double m1 = 1.0 - (std::exp(-gamma) + std::exp(-gamma * std::exp(1.0))) / 2.0;
  F.atoms.push_back({1.0, LogMag::from_linear(m1)});
  F.breakpoints.push_back({1.0, -1, "support_step"});
  for (int k = 0;; ++k) {
    double pos = std::exp(static_cast<double>(k + 1));
    if (std::log(pos) > detail::kPositionCapLog) break;
    double nxt = std::exp(static_cast<double>(k + 2));
    LogMag mass = log_sub(LogMag::from_log(-gamma * pos),
                          LogMag::from_log(-gamma * nxt));
    mass = LogMag::from_log_l(mass.log_value_l() - 0.693147180559945309L);
    F.atoms.push_back({pos, mass});
    F.breakpoints.push_back({pos, k, "step"});
  }
  return F;
}

// --------------------------------------------- 6.2-style first construction

// Steep-then-flat tail: branch on [x_n, 2x_n) with slope x_n^{-a-2}-x_n^{-a-1},
// plateau x_n^{-a-1} until x_{n+1} = x_n^{1+1/a}. Continuous everywhere.
inline AnalyticDistribution make_sec62_first(double alpha, double x1) {
  if (!(alpha > 5.0))
    throw std::invalid_argument("make_sec62_first: alpha must exceed 5");
  if (!(x1 > std::pow(4.0, alpha)))
    throw std::invalid_argument("make_sec62_first: need x1 > 4^alpha");
  auto xs = std::make_shared<std::vector<double>>();
  auto lxs = std::make_shared<std::vector<long double>>();
  const long double rexp = static_cast<long double>(1.0 + 1.0 / alpha);
  for (long double lx = logl(static_cast<long double>(x1));
       lx < static_cast<long double>(detail::kPositionCapLog); lx *= rexp) {
    lxs->push_back(lx);
    xs->push_back(static_cast<double>(expl(lx)));
  }
  AnalyticDistribution F;
  F.support_min = 0.0;
  F.meta.family = "sec62_first";
  F.meta.params = {{"alpha", alpha}, {"x1", x1}};
  F.meta.mean_infinite = false;
  F.meta.moment_abscissa = 0.0;
  F.meta.abscissa_attained = true;
  const double x1ma = static_cast<double>(
      expl(-static_cast<long double>(alpha) * (*lxs)[0]));
  F.log_tail = [xs, lxs, alpha, x1ma](double x) -> LogMag {
    if (x < 0.0) return LogMag::one();
    if (x >= detail::kPositionCap) return LogMag::zero();
    if (x < (*xs)[0]) {
      // ((x1 - x) + x * x1^-alpha)/x1: both summands nonnegative, and the
      // subtraction is exact in the binade that matters
      double v = ((*xs)[0] - x) + x * x1ma;
      return LogMag::from_log_l(logl(static_cast<long double>(v)) -
                                (*lxs)[0]);
    }
    int n = detail::locate(*xs, x);
    double xn = (*xs)[n];
    long double lxn = (*lxs)[n];
    if (x < 2.0 * xn) {
      // bracket B = x_n^2 - (x_n - 1)(x - x_n), evaluated from whichever
      // end avoids cancellation; tail = x_n^{-alpha-2} B
      LogMag B;
      if (x < 1.5 * xn) {
        LogMag main = LogMag::from_log_l(2.0L * lxn);
        double d = x - xn;
        if (d <= 0.0) {
          B = main;
        } else {
          LogMag sub = LogMag::from_log_l(lxn + log1pl(-1.0L / xn) +
                                          logl(static_cast<long double>(d)));
          B = log_sub(main, sub);
        }
      } else {
        double d = 2.0 * xn - x;
        LogMag base = LogMag::from_log_l(lxn);
        if (d <= 0.0) {
          B = base;
        } else {
          LogMag add = LogMag::from_log_l(lxn + log1pl(-1.0L / xn) +
                                          logl(static_cast<long double>(d)));
          B = log_add(base, add);
        }
      }
      return LogMag::from_log_l(B.log_value_l() -
                                static_cast<long double>(alpha + 2.0) * lxn);
    }
    return LogMag::from_log_l(-static_cast<long double>(alpha + 1.0) * lxn);
  };
  F.log_density = [xs, lxs, alpha, x1ma](double x) -> LogMag {
    if (x < 0.0 || x >= detail::kPositionCap) return LogMag::zero();
    if (x < (*xs)[0])
      return LogMag::from_log_l(log1pl(-static_cast<long double>(x1ma)) -
                                (*lxs)[0]);
    int n = detail::locate(*xs, x);
    double xn = (*xs)[n];
    long double lxn = (*lxs)[n];
    if (x < 2.0 * xn)
      return LogMag::from_log_l(-static_cast<long double>(alpha + 1.0) * lxn +
                                log1pl(-1.0L / xn));
    return LogMag::zero();
  };
  for (int n = 0; n < static_cast<int>(xs->size()); ++n) {
    F.breakpoints.push_back({(*xs)[n], n + 1, "branch_start"});
    F.breakpoints.push_back({2.0 * (*xs)[n], n + 1, "branch_end"});
  }
  return F;
}

// -------------------------------------------- 6.2-style second construction

// Base tail 1/(2x - 2n + 1) on [2n-1, 2n), 1/(2n+1) on [2n, 2n+1).
inline double sec62_base_tail(double x) {
  if (x < 1.0) return 1.0;
  double n = std::floor((x + 1.0) / 2.0);
  if (x < 2.0 * n) return 1.0 / (2.0 * x - 2.0 * n + 1.0);
  return 1.0 / (2.0 * n + 1.0);
}

inline double sec62_base_density(double x) {
  if (x < 1.0) return 0.0;
  double n = std::floor((x + 1.0) / 2.0);
  if (x < 2.0 * n) {
    double w = 2.0 * x - 2.0 * n + 1.0;
    return 2.0 / (w * w);
  }
  return 0.0;
}

// Flatten the base across [x_i, y_i) so the level ratio at y_i equals `a`;
// the jump at y_i becomes an atom of mass (a-1) * base(y_i).
inline AnalyticDistribution make_sec62_second(
    double a, double y0, const std::vector<double>& anchors) {
  if (!(a > 1.0))
    throw std::invalid_argument("make_sec62_second: a must exceed 1");
  if (!(y0 >= 0.0))
    throw std::invalid_argument("make_sec62_second: y0 must be nonnegative");
  if (a * sec62_base_tail(y0) > 1.0)
    throw std::invalid_argument(
        "make_sec62_second: a * base_tail(y0) exceeds 1");
  if (anchors.empty())
    throw std::invalid_argument("make_sec62_second: no anchors");
  auto ys = std::make_shared<std::vector<double>>(anchors);
  for (size_t i = 0; i < ys->size(); ++i) {
    if ((*ys)[i] <= ((i == 0) ? y0 : (*ys)[i - 1]))
      throw std::invalid_argument(
          "make_sec62_second: anchors must increase strictly past y0");
  }
  // solve base(x_i) = a * base(y_i) by bisection on the monotone base tail
  auto solve = [&](double y) {
    double v = a * sec62_base_tail(y);
    if (v > 1.0)
      throw std::invalid_argument(
          "make_sec62_second: anchor unsolvable, a * base_tail(y) > 1");
    double lo = 0.0, hi = y;
    for (int it = 0; it < 200; ++it) {
      double mid = 0.5 * (lo + hi);
      if (sec62_base_tail(mid) >= v)
        lo = mid;
      else
        hi = mid;
      if (hi - lo <= 1e-13 * std::max(1.0, hi)) break;
    }
    return 0.5 * (lo + hi);
  };
  auto xsolved = std::make_shared<std::vector<double>>();
  auto flat_vals = std::make_shared<std::vector<double>>();
  for (size_t i = 0; i < ys->size(); ++i) {
    double xi = solve((*ys)[i]);
    if (i > 0 && xi <= (*ys)[i - 1])
      throw std::invalid_argument(
          "make_sec62_second: anchors too close, x_i <= y_{i-1}");
    if (!(xi < (*ys)[i]))
      throw std::invalid_argument("make_sec62_second: x_i not below y_i");
    xsolved->push_back(xi);
    flat_vals->push_back(a * sec62_base_tail((*ys)[i]));
  }
  AnalyticDistribution F;
  F.support_min = 0.0;
  F.meta.family = "sec62_second";
  F.meta.params = {{"a", a}, {"y0", y0}};
  F.meta.params["anchor_count"] = static_cast<double>(ys->size());
  F.meta.mean_infinite = true;  // base tail ~ 1/(2x) is not integrable
  F.meta.moment_abscissa = 0.0;
  F.meta.abscissa_attained = false;
  auto in_flat = [xsolved, ys](double x) -> int {
    // index of the flat [x_i, y_i) containing x, or -1
    int i = detail::locate_or_minus1(*xsolved, x);
    if (i >= 0 && x < (*ys)[i]) return i;
    return -1;
  };
  F.log_tail = [xsolved, ys, flat_vals, in_flat](double x) -> LogMag {
    if (x < 1.0) return LogMag::one();
    int i = in_flat(x);
    if (i >= 0) return LogMag::from_linear((*flat_vals)[i]);
    return LogMag::from_linear(sec62_base_tail(x));
  };
  F.log_density = [in_flat](double x) -> LogMag {
    if (x < 1.0) return LogMag::zero();
    if (in_flat(x) >= 0) return LogMag::zero();
    double d = sec62_base_density(x);
    return d > 0.0 ? LogMag::from_linear(d) : LogMag::zero();
  };
  for (size_t i = 0; i < ys->size(); ++i)
    F.atoms.push_back({(*ys)[i],
                       LogMag::from_linear((a - 1.0) * sec62_base_tail((*ys)[i]))});
  // breakpoints: flat edges anchor the schedules; base kinks cut quadrature
  // panels, and only a handful per inter-flat zone act as schedule anchors
  std::vector<Breakpoint> bps;
  for (size_t i = 0; i < ys->size(); ++i) {
    bps.push_back({(*xsolved)[i], static_cast<int>(i), "flat_start"});
    bps.push_back({(*ys)[i], static_cast<int>(i), "flat_end"});
  }
  double cap = ys->back() * 1.25 + 50.0;
  std::vector<double> zone_edges(*ys);
  for (double k = 1.0; 2.0 * k - 1.0 <= cap; k += 1.0) {
    for (double pos : {2.0 * k - 1.0, 2.0 * k}) {
      if (in_flat(pos) >= 0) continue;  // interior kinks vanish when flat
      int zone = static_cast<int>(
          std::upper_bound(zone_edges.begin(), zone_edges.end(), pos) -
          zone_edges.begin());
      std::string role = (pos == 2.0 * k) ? "plateau_start" : "branch_start";
      bps.push_back({pos, zone, role});
    }
  }
  std::sort(bps.begin(), bps.end(),
            [](const Breakpoint& p, const Breakpoint& q) { return p.x < q.x; });
  // schedule anchors: flat edges plus the first few base kinks of each zone
  std::map<int, int> seen_in_zone;
  for (auto& b : bps) {
    bool keep_anchor = (b.role == "flat_start" || b.role == "flat_end");
    if (!keep_anchor) {
      int c = seen_in_zone[b.level]++;
      keep_anchor = c < 8;
    }
    if (keep_anchor)
      F.breakpoints.push_back(b);
    else
      F.quadrature_cuts.push_back(b.x);
  }
  return F;
}

// Default anchor sequence y_i = y0 + 4^i.
inline AnalyticDistribution make_sec62_second(double a, double y0,
                                              int levels) {
  if (levels < 1)
    throw std::invalid_argument("make_sec62_second: levels < 1");
  std::vector<double> ys;
  double p = 4.0;
  for (int i = 0; i < levels; ++i, p *= 4.0) ys.push_back(y0 + p);
  return make_sec62_second(a, y0, ys);
}

// ------------------------------------------------------------------ misc

inline AnalyticDistribution make_exponential(double lambda) {
  if (!(lambda > 0.0))
    throw std::invalid_argument("make_exponential: lambda <= 0");
  AnalyticDistribution F;
  F.support_min = 0.0;
  F.meta.family = "exp";
  F.meta.params = {{"lambda", lambda}};
  F.meta.mean_infinite = false;
  F.meta.moment_abscissa = lambda;
  F.meta.abscissa_attained = false;
  F.log_tail = [lambda](double x) -> LogMag {
    if (x < 0.0) return LogMag::one();
    return LogMag::from_log(-lambda * x);
  };
  F.log_density = [lambda](double x) -> LogMag {
    if (x < 0.0) return LogMag::zero();
    return LogMag::from_log(std::log(lambda) - lambda * x);
  };
  return F;
}

inline AnalyticDistribution make_point_mass(double position) {
  AnalyticDistribution F;
  F.support_min = position;
  F.meta.family = "point_mass";
  F.meta.params = {{"position", position}};
  F.meta.mean_infinite = false;
  F.meta.moment_abscissa = std::numeric_limits<double>::infinity();
  F.meta.abscissa_attained = true;
  F.log_tail = [position](double x) -> LogMag {
    return (x < position) ? LogMag::one() : LogMag::zero();
  };
  F.atoms.push_back({position, LogMag::one()});
  F.breakpoints.push_back({position, -1, "atom"});
  return F;
}

}  // namespace tailkit
