#pragma once

// Tail convolution by direct per-point quadrature. Everything rests on the
// decomposition
//
//   (F * G)-bar(x) = G-bar(x) + integral_{[0,x]} F-bar(x - y) G(dy),
//
// with the Stieltjes measure G(dy) expanded into its density part and its
// atoms. Each requested position gets its own certified integral — no
// transform tricks, no recurrence between positions — so a value is exactly
// as trustworthy as the quadrature under it. Results are returned as
// GridDistribution samples with an interpolation certificate (grid.hpp).
//
// Powers fold left: F^{*(k+1)} is F folded onto the sampled F^{*k}, using
// the same decomposition with F as the integrating measure and the sampled
// tail under the integral. Random-count mixtures sum weighted powers with a
// certified truncation. kesten_estimate probes for a geometric bound
// R_k <= C e^{alpha k} on the fold-to-base tail ratios and refuses to
// certify one when the ratios are still growing at the sampled horizon.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "tailkit/distribution.hpp"
#include "tailkit/grid.hpp"
#include "tailkit/logmag.hpp"
#include "tailkit/quadrature.hpp"

namespace tailkit {

struct ConvSpec {
  double x_max = 0.0;  // upper end of the sampled range; must be set
  int fill_per_decade = 64;
  double interp_tol = 1e-6;   // admissible midpoint interpolation residual
  int max_refine_depth = 42;  // bisection depth per initial segment
  int max_nodes = 60000;      // hard cap on grid size
  std::vector<double> extra_points;  // forced nodes, e.g. comparison abscissas
  bool check_both_orders = false;    // also evaluate the swapped decomposition
  QuadratureSpec quad;
  // folds integrate a sampled tail whose own accuracy is the interpolation
  // certificate, so their panels use a cheaper rule than the analytic pairs
  QuadratureSpec fold_quad{1e-8, 40, 7};

  void validate(double support_sum) const {
    if (std::isnan(x_max) || !(x_max > support_sum))
      throw std::invalid_argument(
          "ConvSpec: x_max must exceed the support edge of the result");
    if (fill_per_decade < 1)
      throw std::invalid_argument("ConvSpec: fill_per_decade < 1");
    if (!(interp_tol > 0.0))
      throw std::invalid_argument("ConvSpec: interp_tol must be positive");
    if (max_refine_depth < 1 || max_nodes < 16)
      throw std::invalid_argument("ConvSpec: refinement budget too small");
    quad.validate();
    fold_quad.validate();
  }
};

namespace detail {

// Positions that shape an operand's tail: breakpoints (the leading ones)
// and atoms. Bulk quadrature-cut lists stay out — they number in the tens
// of thousands for the staircase constructions and belong to integrals,
// not to grid scaffolding.
inline std::vector<double> shape_positions(const AnalyticDistribution& F,
                                           std::size_t cap = 30) {
  std::vector<double> out;
  for (const auto& b : F.breakpoints) {
    if (out.size() >= cap) break;
    out.push_back(b.x);
  }
  for (const auto& a : F.atoms) out.push_back(a.position);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

inline void sort_unique_rel(std::vector<double>& v, double rel = 1e-12) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end(),
                      [rel](double a, double b) {
                        return b - a <= rel * std::max(1.0, std::fabs(a));
                      }),
          v.end());
}

// Cut positions for integral_{[lo,hi]} T-bar(x - y) dMeas(y): the measure's
// own kinks, plus the reflections x - b of the shifted tail's kinks.
inline std::vector<double> stieltjes_cuts(const AnalyticDistribution& T,
                                          const AnalyticDistribution& Meas,
                                          double x, double lo, double hi) {
  std::vector<double> cuts = Meas.breakpoints_in(lo, hi);
  for (double b : T.breakpoints_in(0.0, x)) {
    const double y = x - b;
    if (y > lo && y < hi) cuts.push_back(y);
  }
  const double edge = x - T.support_min;
  if (edge > lo && edge < hi) cuts.push_back(edge);
  return cuts;
}

}  // namespace detail

// ------------------------------------------------------ pointwise formulas

// Exact (up to quadrature) tail of F * G at one position.
inline LogMag conv_pair_tail_at(const AnalyticDistribution& F,
                                const AnalyticDistribution& G, double x,
                                const QuadratureSpec& quad = {}) {
  if (std::isnan(x)) throw std::invalid_argument("conv_pair_tail_at: x NaN");
  if (x < F.support_min + G.support_min) return LogMag::one();
  LogMag acc = G.tail(x);
  if (G.has_density()) {
    const double lo = std::max(G.support_min, 0.0);
    if (x > lo) {
      auto f = [&](double y) { return log_mul(F.tail(x - y), G.density(y)); };
      const std::vector<double> cuts = detail::stieltjes_cuts(F, G, x, lo, x);
      acc = log_add(acc, integrate_log(f, lo, x, cuts, quad));
    }
  }
  for (const auto& a : G.atoms) {
    if (a.position > x) break;
    acc = log_add(acc, log_mul(a.mass, F.tail(x - a.position)));
  }
  if (acc.log_value_l() > 0.0L) return LogMag::one();
  return acc;
}

// Tail of F * H at one position, H sampled. F supplies the integrating
// measure; the sampled tail sits under the integral, where interpolation
// error enters bounded by H's certificate. Reflected grid nodes become
// panel cuts (capped), keeping each panel inside a few log-linear pieces.
inline LogMag conv_fold_tail_at(const GridDistribution& H,
                                const AnalyticDistribution& F, double x,
                                const QuadratureSpec& quad = {}) {
  if (std::isnan(x)) throw std::invalid_argument("conv_fold_tail_at: x NaN");
  if (x < H.support_min + F.support_min) return LogMag::one();
  LogMag acc = F.tail(x);
  if (F.has_density()) {
    const double lo = std::max(F.support_min, 0.0);
    if (x > lo) {
      auto f = [&](double y) { return log_mul(H.tail(x - y), F.density(y)); };
      std::vector<double> cuts = F.breakpoints_in(lo, x);
      auto reflect = [&](double p) {
        const double y = x - p;
        if (y > lo && y < x) cuts.push_back(y);
      };
      reflect(H.support_min);
      for (double p : H.jump_points) reflect(p);
      const std::size_t cap = 2048;
      const std::size_t stride = std::max<std::size_t>(
          1, (H.grid.size() + cap - 1) / cap);
      for (std::size_t i = 0; i < H.grid.size(); i += stride)
        reflect(H.grid[i]);
      acc = log_add(acc, integrate_log(f, lo, x, cuts, quad));
    }
  }
  for (const auto& a : F.atoms) {
    if (a.position > x) break;
    acc = log_add(acc, log_mul(a.mass, H.tail(x - a.position)));
  }
  if (acc.log_value_l() > 0.0L) return LogMag::one();
  return acc;
}

// Tail of tilt(F10, gamma) * tilt(F20, gamma) at one position, computed from
// heavy-side quantities only:
//
//   e^{-gamma x} [ (F10 * F20)-bar(x)
//                  + gamma integral_0^x F20-bar(x-y) F10-bar(y) dy ].
//
// The bracket never leaves heavy scale, and the exponential prefactor is
// applied as an exact log shift, so positions deep in the ladder cost no
// precision. gamma = 0 reduces to the plain pair tail.
inline LogMag tilted_conv_tail_at(const AnalyticDistribution& F10,
                                  const AnalyticDistribution& F20,
                                  double gamma, double x,
                                  const QuadratureSpec& quad = {}) {
  if (std::isnan(gamma) || gamma < 0.0)
    throw std::invalid_argument("tilted_conv_tail_at: rate must be >= 0");
  if (gamma == 0.0) return conv_pair_tail_at(F10, F20, x, quad);
  if (F10.support_min < 0.0 || F20.support_min < 0.0)
    throw std::invalid_argument(
        "tilted_conv_tail_at: bases must live on [0, infinity)");
  if (std::isnan(x)) throw std::invalid_argument("tilted_conv_tail_at: x NaN");
  if (x < 0.0) return LogMag::one();
  const LogMag heavy = conv_pair_tail_at(F10, F20, x, quad);
  LogMag cross = LogMag::zero();
  if (x > 0.0) {
    auto f = [&](double y) {
      return log_mul(F20.tail(x - y), F10.tail(y));
    };
    std::vector<double> cuts = detail::stieltjes_cuts(F20, F10, x, 0.0, x);
    if (F10.support_min > 0.0 && F10.support_min < x)
      cuts.push_back(F10.support_min);
    cross = integrate_log(f, 0.0, x, cuts, quad);
  }
  const LogMag bracket =
      log_add(heavy, log_mul(LogMag::from_linear(gamma), cross));
  const LogMag out = log_mul(
      bracket,
      LogMag::from_log_l(-static_cast<long double>(gamma) * x));
  if (out.log_value_l() > 0.0L) return LogMag::one();
  return out;
}

// ---------------------------------------------------------- grid building

namespace detail {

struct GridBuildPlan {
  double support_min = 0.0;
  double head_log = 0.0;  // expected log tail at the first node
  std::vector<double> structural;
  std::vector<double> jumps;
  std::string provenance;
};

// Assemble nodes (structural + jump guards + forced + log-uniform fill),
// evaluate each exactly, then bisect any segment whose exact midpoint strays
// from the interpolated one by more than the tolerance. Passing midpoints
// are discarded, so the recorded certificate is the measured residual of the
// exact segments the grid ends up with.
inline GridDistribution build_grid(const std::function<LogMag(double)>& eval,
                                   const GridBuildPlan& plan,
                                   const ConvSpec& spec) {
  spec.validate(plan.support_min);
  auto eval_at = [&](double x) -> LogMag {
    try {
      return eval(x);
    } catch (const QuadratureError& e) {
      throw std::runtime_error(plan.provenance +
                               ": quadrature failed at x = " +
                               std::to_string(x) + " (" + e.what() + ")");
    }
  };

  std::vector<double> xs{plan.support_min, spec.x_max};
  for (double a : plan.structural)
    if (a > plan.support_min && a < spec.x_max) xs.push_back(a);
  for (double j : plan.jumps) {
    if (j <= plan.support_min || j > spec.x_max) continue;
    if (j < spec.x_max) xs.push_back(j);
    const double g = j - jump_segment_width(j);
    if (g > plan.support_min) xs.push_back(g);
  }
  for (double e : spec.extra_points)
    if (e >= plan.support_min && e <= spec.x_max) xs.push_back(e);
  {
    const double flo = std::max(plan.support_min, 1e-2);
    if (flo < spec.x_max) {
      const double ldec = std::log10(spec.x_max / flo);
      const int n = std::max(
          2, static_cast<int>(std::ceil(ldec * spec.fill_per_decade)));
      for (int i = 0; i <= n; ++i)
        xs.push_back(flo * std::pow(10.0, ldec * i / n));
    }
  }
  sort_unique_rel(xs);
  xs.front() = plan.support_min;
  xs.back() = spec.x_max;

  std::vector<LogMag> vals(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) vals[i] = eval_at(xs[i]);

  struct Seg {
    double a, b;
    LogMag va, vb;
    int depth;
  };
  std::vector<Seg> todo;
  todo.reserve(xs.size());
  for (std::size_t i = 0; i + 1 < xs.size(); ++i)
    todo.push_back({xs[i], xs[i + 1], vals[i], vals[i + 1], 0});
  std::vector<std::pair<double, LogMag>> inserted;
  double worst_ok = 0.0, worst_fail = 0.0;
  bool budget_hit = false;
  while (!todo.empty()) {
    const Seg s = todo.back();
    todo.pop_back();
    if (s.b - s.a <= 2.0 * jump_segment_width(s.b)) continue;  // jump carrier
    if (s.va.is_zero()) continue;  // tail already vanished
    const double m = 0.5 * (s.a + s.b);
    if (!(m > s.a && m < s.b)) continue;  // below double resolution
    const LogMag ve = eval_at(m);
    double resid;
    if (ve.is_zero()) {
      // an unanticipated vanish: keep bisecting toward it so the zero ends
      // up bracketed by a hairline segment like a declared jump
      resid = std::numeric_limits<double>::infinity();
    } else if (s.vb.is_zero()) {
      // query convention holds the left value on a vanishing segment
      resid = std::fabs(static_cast<double>(ve.log_value_l() -
                                            s.va.log_value_l()));
    } else {
      const long double t =
          (static_cast<long double>(m) - s.a) /
          (static_cast<long double>(s.b) - s.a);
      const long double li =
          s.va.log_value_l() +
          t * (s.vb.log_value_l() - s.va.log_value_l());
      resid = std::fabs(static_cast<double>(ve.log_value_l() - li));
    }
    if (resid <= spec.interp_tol) {
      worst_ok = std::max(worst_ok, resid);
      continue;
    }
    if (s.depth >= spec.max_refine_depth || budget_hit ||
        xs.size() + inserted.size() + 1 >
            static_cast<std::size_t>(spec.max_nodes)) {
      if (xs.size() + inserted.size() + 1 >
          static_cast<std::size_t>(spec.max_nodes))
        budget_hit = true;
      worst_fail = std::max(worst_fail, resid);
      continue;
    }
    inserted.push_back({m, ve});
    todo.push_back({s.a, m, s.va, ve, s.depth + 1});
    todo.push_back({m, s.b, ve, s.vb, s.depth + 1});
  }

  std::vector<std::pair<double, LogMag>> nodes;
  nodes.reserve(xs.size() + inserted.size());
  for (std::size_t i = 0; i < xs.size(); ++i) nodes.push_back({xs[i], vals[i]});
  for (const auto& p : inserted) nodes.push_back(p);
  std::sort(nodes.begin(), nodes.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  GridDistribution H;
  H.support_min = plan.support_min;
  H.grid.reserve(nodes.size());
  H.log_tail.reserve(nodes.size());
  for (const auto& p : nodes) {
    H.grid.push_back(p.first);
    H.log_tail.push_back(p.second);
  }
  H.anchors = plan.structural;
  H.anchors.insert(H.anchors.end(), plan.jumps.begin(), plan.jumps.end());
  std::erase_if(H.anchors, [&](double a) { return a > spec.x_max; });
  sort_unique_rel(H.anchors);
  H.jump_points = plan.jumps;
  std::erase_if(H.jump_points, [&](double a) { return a > spec.x_max; });
  H.certificate = std::max(worst_ok, worst_fail);
  H.certificate_met = (worst_fail == 0.0);
  H.provenance = plan.provenance;
  if (!H.certificate_met) {
    H.provenance += budget_hit ? " [node budget exhausted]"
                               : " [interpolation tolerance not met]";
  }
  H.validate(plan.head_log);
  return H;
}

// Joint mass of atom pairs landing exactly (to relative 1e-12) on `target`.
inline LogMag atom_collision_mass(const AnalyticDistribution& F,
                                  const AnalyticDistribution& G,
                                  double target) {
  LogMag m = LogMag::zero();
  for (const auto& af : F.atoms)
    for (const auto& ag : G.atoms)
      if (std::fabs(af.position + ag.position - target) <=
          1e-12 * std::max(1.0, std::fabs(target)))
        m = log_add(m, log_mul(af.mass, ag.mass));
  return m;
}

inline double head_from_collision(LogMag coll) {
  if (coll.is_zero()) return 0.0;
  const double c = coll.to_linear();
  return (c < 1.0) ? std::log1p(-c)
                   : -std::numeric_limits<double>::infinity();
}

}  // namespace detail

// ------------------------------------------------------------- pair builds

inline GridDistribution conv_pair(const AnalyticDistribution& F,
                                  const AnalyticDistribution& G,
                                  const ConvSpec& spec) {
  for (const AnalyticDistribution* D : {&F, &G})
    if (!D->has_density() && D->atoms.empty())
      throw std::invalid_argument(
          "conv_pair: operand carries neither density nor atoms");
  const double ssum = F.support_min + G.support_min;
  detail::GridBuildPlan plan;
  plan.support_min = ssum;
  const std::vector<double> pf = detail::shape_positions(F);
  const std::vector<double> pg = detail::shape_positions(G);
  for (double p : pf) plan.structural.push_back(p + G.support_min);
  for (double q : pg) plan.structural.push_back(q + F.support_min);
  for (double p : pf)
    for (double q : pg) plan.structural.push_back(p + q);
  detail::sort_unique_rel(plan.structural);
  for (const auto& af : F.atoms)
    for (const auto& ag : G.atoms)
      plan.jumps.push_back(af.position + ag.position);
  detail::sort_unique_rel(plan.jumps);
  plan.head_log =
      detail::head_from_collision(detail::atom_collision_mass(F, G, ssum));
  plan.provenance =
      "conv_pair(" + F.meta.family + ", " + G.meta.family + ")";
  auto eval = [&F, &G, &spec](double x) {
    return conv_pair_tail_at(F, G, x, spec.quad);
  };
  GridDistribution H = detail::build_grid(eval, plan, spec);
  if (spec.check_both_orders) {
    double worst = 0.0;
    for (std::size_t i = 0; i < H.grid.size(); ++i) {
      const LogMag sw = conv_pair_tail_at(G, F, H.grid[i], spec.quad);
      const LogMag& v = H.log_tail[i];
      if (v.is_zero() && sw.is_zero()) continue;
      if (v.is_zero() || sw.is_zero()) {
        worst = std::numeric_limits<double>::infinity();
        break;
      }
      worst = std::max(worst, std::fabs(static_cast<double>(
                                  v.log_value_l() - sw.log_value_l())));
    }
    H.order_cross_diff = worst;
  }
  return H;
}

inline GridDistribution conv_fold(const GridDistribution& H,
                                  const AnalyticDistribution& F,
                                  const ConvSpec& spec) {
  if (!F.has_density() && F.atoms.empty())
    throw std::invalid_argument(
        "conv_fold: operand carries neither density nor atoms");
  detail::GridBuildPlan plan;
  plan.support_min = H.support_min + F.support_min;
  for (double p : detail::shape_positions(F))
    plan.structural.push_back(p + H.support_min);
  for (double a : H.anchors) plan.structural.push_back(a + F.support_min);
  detail::sort_unique_rel(plan.structural);
  for (const auto& af : F.atoms)
    for (double jp : H.jump_points)
      plan.jumps.push_back(af.position + jp);
  detail::sort_unique_rel(plan.jumps);
  {
    // mass exactly at the new edge: F's support atom times H's edge jump
    double mf = 0.0;
    for (const auto& a : F.atoms)
      if (std::fabs(a.position - F.support_min) <=
          1e-12 * std::max(1.0, std::fabs(F.support_min)))
        mf += a.mass.to_linear();
    const double jump_h =
        H.log_tail.empty()
            ? 0.0
            : 1.0 - (H.log_tail.front().is_zero()
                         ? 0.0
                         : std::exp(H.log_tail.front().log_value()));
    const double c = mf * jump_h;
    plan.head_log = (c <= 0.0) ? 0.0
                               : (c < 1.0 ? std::log1p(-c)
                                          : -std::numeric_limits<
                                                double>::infinity());
  }
  plan.provenance = H.provenance + " * " + F.meta.family;
  auto eval = [&H, &F, &spec](double x) {
    return conv_fold_tail_at(H, F, x, spec.fold_quad);
  };
  return detail::build_grid(eval, plan, spec);
}

inline GridDistribution conv_power(const AnalyticDistribution& F, int k,
                                   const ConvSpec& spec) {
  if (k < 1) throw std::invalid_argument("conv_power: k < 1");
  if (k == 1) {
    detail::GridBuildPlan plan;
    plan.support_min = F.support_min;
    plan.structural = detail::shape_positions(F, 60);
    for (const auto& a : F.atoms) plan.jumps.push_back(a.position);
    {
      double mf = 0.0;
      for (const auto& a : F.atoms)
        if (std::fabs(a.position - F.support_min) <=
            1e-12 * std::max(1.0, std::fabs(F.support_min)))
          mf += a.mass.to_linear();
      plan.head_log = (mf <= 0.0) ? 0.0
                                  : (mf < 1.0 ? std::log1p(-mf)
                                              : -std::numeric_limits<
                                                    double>::infinity());
    }
    plan.provenance = "power 1 of " + F.meta.family;
    auto eval = [&F](double x) { return F.tail(x); };
    return detail::build_grid(eval, plan, spec);
  }
  GridDistribution H = conv_pair(F, F, spec);
  for (int j = 3; j <= k; ++j) H = conv_fold(H, F, spec);
  H.provenance = "power " + std::to_string(k) + " of " + F.meta.family;
  return H;
}

inline GridDistribution tilted_conv_pair(const AnalyticDistribution& F10,
                                         const AnalyticDistribution& F20,
                                         double gamma, const ConvSpec& spec) {
  if (std::isnan(gamma) || gamma < 0.0)
    throw std::invalid_argument("tilted_conv_pair: rate must be >= 0");
  if (gamma == 0.0) return conv_pair(F10, F20, spec);
  if (F10.support_min < 0.0 || F20.support_min < 0.0)
    throw std::invalid_argument(
        "tilted_conv_pair: bases must live on [0, infinity)");
  detail::GridBuildPlan plan;
  plan.support_min = 0.0;  // both tilted operands live on [0, infinity)
  const std::vector<double> pf = detail::shape_positions(F10);
  const std::vector<double> pg = detail::shape_positions(F20);
  for (double p : pf) plan.structural.push_back(p);
  for (double q : pg) plan.structural.push_back(q);
  for (double p : pf)
    for (double q : pg) plan.structural.push_back(p + q);
  plan.structural.push_back(F10.support_min);
  plan.structural.push_back(F20.support_min);
  plan.structural.push_back(F10.support_min + F20.support_min);
  detail::sort_unique_rel(plan.structural);
  for (const auto& af : F10.atoms)
    for (const auto& ag : F20.atoms)
      plan.jumps.push_back(af.position + ag.position);
  detail::sort_unique_rel(plan.jumps);
  plan.head_log = 0.0;  // positive-position atoms cannot collide at zero
  plan.provenance = "tilted_conv_pair(" + F10.meta.family + ", " +
                    F20.meta.family + "; rate " + detail::fmt_g(gamma) + ")";
  auto eval = [&F10, &F20, gamma, &spec](double x) {
    return tilted_conv_tail_at(F10, F20, gamma, x, spec.quad);
  };
  return detail::build_grid(eval, plan, spec);
}

// -------------------------------------------------------- random mixtures

struct WeightSequence {
  std::vector<double> p;   // p[k] = P(count = k), k = 0 .. p.size()-1
  double remainder = 0.0;  // certified bound on the mass beyond the last k
  // certified sup of p_{k+1}/p_k beyond the truncation, when the generator
  // knows one (NaN otherwise); lets a Kesten bound close the omitted series
  double geo_ratio = std::numeric_limits<double>::quiet_NaN();
  std::string origin;

  void validate() const {
    if (p.empty())
      throw std::invalid_argument("WeightSequence: no weights");
    long double s = 0.0L;
    for (double w : p) {
      if (!(w >= 0.0))
        throw std::invalid_argument("WeightSequence: negative or NaN weight");
      s += w;
    }
    if (!(remainder >= 0.0))
      throw std::invalid_argument("WeightSequence: negative remainder");
    if (std::fabs(static_cast<double>(s + remainder - 1.0L)) > 1e-12)
      throw std::invalid_argument(
          "WeightSequence: weights plus remainder do not sum to 1");
  }
};

inline WeightSequence poisson_weights(double lambda,
                                      double tail_bound = 1e-13) {
  if (!(lambda > 0.0))
    throw std::invalid_argument("poisson_weights: lambda must be positive");
  if (!(tail_bound > 0.0))
    throw std::invalid_argument("poisson_weights: tail bound must be > 0");
  WeightSequence w;
  w.origin = "poisson(lambda=" + std::to_string(lambda) + ")";
  long double pk = expl(-static_cast<long double>(lambda));
  w.p.push_back(static_cast<double>(pk));
  for (int k = 1; k < 400; ++k) {
    pk *= static_cast<long double>(lambda) / k;
    w.p.push_back(static_cast<double>(pk));
    const long double q = static_cast<long double>(lambda) / (k + 2);
    if (q < 1.0L) {
      const long double rem =
          pk * (static_cast<long double>(lambda) / (k + 1)) / (1.0L - q);
      if (rem < static_cast<long double>(tail_bound)) {
        w.remainder = static_cast<double>(rem);
        w.geo_ratio = static_cast<double>(q);
        return w;
      }
    }
  }
  throw std::runtime_error(
      "poisson_weights: truncation bound not reached within 400 terms");
}

inline WeightSequence geometric_weights(double q, int m) {
  if (!(q > 0.0 && q < 1.0))
    throw std::invalid_argument("geometric_weights: q outside (0, 1)");
  if (m < 1) throw std::invalid_argument("geometric_weights: m < 1");
  WeightSequence w;
  w.origin = "geometric(q=" + std::to_string(q) + ")";
  long double pw = 1.0L - static_cast<long double>(q);
  long double tail = 1.0L;
  for (int k = 0; k <= m; ++k) {
    w.p.push_back(static_cast<double>(pw * powl(q, k)));
    tail *= q;
  }
  w.remainder = static_cast<double>(tail);  // q^{m+1}
  w.geo_ratio = q;
  return w;
}

struct KestenResult {
  bool certified = false;
  double C = std::numeric_limits<double>::quiet_NaN();
  double alpha = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> log_R;  // log R_k for k = 1 .. k_max
  std::string note;
};

// Probe for R_k = sup_x F-bar^{*k b}(x) / F-bar^{*b}(x) <= C e^{alpha k}
// over an anchor-plus-fill set of comparison points (positions where the
// base tail vanishes are outside the comparison). The bound is refused when
// the k = 2 ratio is visibly not done growing: either it climbs along a
// structural ladder subsequence, or its running sup is still improving at
// the sampled horizon, or the R_k increments themselves accelerate.
inline KestenResult kesten_estimate(const AnalyticDistribution& F, int k_max,
                                    const ConvSpec& spec, int base_power = 1,
                                    int n_max = 3) {
  if (k_max < 3) throw std::invalid_argument("kesten_estimate: k_max < 3");
  if (base_power < 1)
    throw std::invalid_argument("kesten_estimate: base_power < 1");
  KestenResult res;
  const int top = k_max * base_power;
  std::vector<GridDistribution> folds;
  folds.reserve(top);
  folds.push_back(conv_power(F, 1, spec));
  for (int j = 2; j <= top; ++j)
    folds.push_back(j == 2 ? conv_pair(F, F, spec)
                           : conv_fold(folds.back(), F, spec));
  const GridDistribution& base = folds[base_power - 1];

  CheckpointSchedule sched = default_schedule(F, n_max, 8);
  std::vector<CheckpointPoint> pts;
  for (const auto& pt : sched.points)
    if (pt.x > 0.0 && pt.x <= spec.x_max) pts.push_back(pt);
  if (pts.size() < 6)
    throw std::runtime_error(
        "kesten_estimate: fewer than 6 comparison points inside the sampled "
        "range; raise x_max");

  std::vector<double> R(k_max + 1, 0.0);
  double sup_run = 0.0, first_r2 = -1.0;
  std::size_t last_improve = 0, n_valid = 0;
  std::map<std::string, std::map<int, double>> role_vals;
  for (const auto& pt : pts) {
    const LogMag hb = base.tail(pt.x);
    if (hb.is_zero()) continue;
    const std::size_t idx = n_valid++;
    for (int k = 1; k <= k_max; ++k) {
      const LogMag hk = folds[k * base_power - 1].tail(pt.x);
      if (hk.is_zero()) continue;
      const double v = ratio(hk, hb);
      R[k] = std::max(R[k], v);
      if (k == 2) {
        if (first_r2 < 0.0) first_r2 = v;
        if (v > sup_run * (1.0 + 1e-3)) {
          sup_run = v;
          last_improve = idx;
        }
        if (pt.role != "fill" && pt.level >= 0) {
          double& slot = role_vals[pt.role][pt.level];
          slot = std::max(slot, v);
        }
      }
    }
  }
  if (n_valid == 0)
    throw std::runtime_error("kesten_estimate: no comparison points with a "
                             "positive base tail");
  res.log_R.reserve(k_max);
  for (int k = 1; k <= k_max; ++k)
    res.log_R.push_back(R[k] > 0.0 ? std::log(R[k]) : NEG_INF);

  // ladder-subsequence growth: same structural role, ratio climbing by
  // >= 25% at each of the last two level steps
  for (const auto& [role, by_level] : role_vals) {
    if (by_level.size() < 3) continue;
    std::vector<double> vs;
    for (const auto& [lvl, v] : by_level) vs.push_back(v);
    const std::size_t n = vs.size();
    if (vs[n - 1] >= 1.25 * vs[n - 2] && vs[n - 2] >= 1.25 * vs[n - 3]) {
      res.note = "no certificate: the fold-to-base ratio grows along the '" +
                 role + "' ladder subsequence";
      return res;
    }
  }
  {
    // a flat ratio sequence is converged, not stalled; only a sup that grew
    // and kept improving near the end of the sample is inconclusive
    const bool grew = first_r2 > 0.0 && sup_run > first_r2 * (1.0 + 1e-3);
    const std::size_t window =
        std::max<std::size_t>(4, std::min<std::size_t>(8, n_valid / 4));
    if (grew && last_improve + window >= n_valid) {
      res.note =
          "no certificate: the k = 2 ratio sup was still improving at the "
          "sampled horizon";
      return res;
    }
  }
  {
    std::vector<double> d;
    for (int k = 2; k <= k_max; ++k)
      d.push_back(res.log_R[k - 1] - res.log_R[k - 2]);
    if (d.size() >= 3) {
      const std::size_t n = d.size();
      if (d[n - 1] > d[n - 2] + 0.1 && d[n - 2] > d[n - 3] + 0.1) {
        res.note = "no certificate: super-geometric growth of R_k";
        return res;
      }
    }
  }
  double alpha = 0.0;
  for (std::size_t i = 1; i < res.log_R.size(); ++i)
    alpha = std::max(alpha, res.log_R[i] - res.log_R[i - 1]);
  double logC = -std::numeric_limits<double>::infinity();
  for (int k = 1; k <= k_max; ++k)
    logC = std::max(logC, res.log_R[k - 1] - alpha * k);
  res.alpha = alpha;
  res.C = std::exp(logC);
  res.certified = true;
  res.note = "geometric envelope from the worst single-step growth";
  return res;
}

// Tail of the random-count sum: sum over k of p_k F-bar^{*k}(x). The series
// is truncated under a certificate: either the omitted weight mass is below
// 1e-12 outright (after dropping trailing weights that cannot move any value
// at that scale), or a Kesten bound C e^{alpha k} paired with the weights'
// declared geometric envelope closes the omitted series, with the resulting
// per-position bound B * F-bar(x) recorded as `remainder`.
inline GridDistribution random_conv(const AnalyticDistribution& F,
                                    const WeightSequence& w,
                                    const ConvSpec& spec) {
  w.validate();
  const int m_given = static_cast<int>(w.p.size()) - 1;
  int kmin = 0;
  for (int k = 1; k <= m_given; ++k)
    if (w.p[k] > 0.0) {
      kmin = k;
      break;
    }
  if (kmin == 0)
    throw std::invalid_argument(
        "random_conv: no positive weight beyond count zero");

  int m_eff = m_given;
  double dropped = 0.0;
  std::string note;
  double remainder_bound;
  if (w.remainder < 1e-12) {
    // absolute certificate; also drop trailing weights too small to matter
    long double t = w.remainder;
    while (m_eff > kmin && t + w.p[m_eff] < 1e-12) {
      t += w.p[m_eff];
      --m_eff;
    }
    dropped = static_cast<double>(t) - w.remainder;
    remainder_bound = static_cast<double>(t);
    note = "absolute weight-mass bound " + detail::fmt_g(remainder_bound) +
           " (series truncated at k = " + std::to_string(m_eff) + ")";
  } else {
    if (!(w.geo_ratio > 0.0) || !(w.geo_ratio < 1.0))
      throw std::runtime_error(
          "random_conv: omitted weight mass " + detail::fmt_g(w.remainder) +
          " is not negligible and the weights declare no geometric envelope; "
          "extend the weight sequence or provide geo_ratio so a Kesten "
          "bound can close the series");
    const KestenResult kr = kesten_estimate(F, 3, spec);
    if (!kr.certified)
      throw std::runtime_error(
          "random_conv: omitted weight mass " + detail::fmt_g(w.remainder) +
          " needs a Kesten certificate for the base, and none was found (" +
          kr.note + "); extend the weight sequence instead");
    const double g = w.geo_ratio * std::exp(kr.alpha);
    if (!(g < 1.0))
      throw std::runtime_error(
          "random_conv: the weights' geometric envelope times e^alpha "
          "reaches 1, so the omitted series has no finite bound; extend "
          "the weight sequence");
    // sum_{j>=1} p_{M+j} C e^{alpha (M+j)} <= C p_M e^{alpha M} g/(1-g)
    remainder_bound = kr.C * w.p[m_given] *
                      std::exp(kr.alpha * m_given) * g / (1.0 - g);
    note = "Kesten envelope bound: omitted series <= " +
           detail::fmt_g(remainder_bound) +
           " * F-bar(x) (C = " + detail::fmt_g(kr.C) +
           ", alpha = " + detail::fmt_g(kr.alpha) + ")";
  }

  // a fold whose support edge reaches x_max is identically one below it;
  // represent it analytically instead of sampling it
  int k_build = m_eff;
  if (F.support_min > 0.0)
    k_build = std::min(
        m_eff, static_cast<int>(std::ceil(spec.x_max / F.support_min)) - 1);
  if (k_build < kmin) k_build = 0;
  std::vector<GridDistribution> folds;
  folds.reserve(std::max(k_build, 0));
  if (k_build >= 1) folds.push_back(conv_power(F, 1, spec));
  if (k_build >= 2) folds.push_back(conv_pair(F, F, spec));
  for (int k = 3; k <= k_build; ++k)
    folds.push_back(conv_fold(folds.back(), F, spec));

  detail::GridBuildPlan plan;
  const double p0 = w.p[0];
  plan.support_min =
      (p0 > 0.0 || F.support_min <= 0.0) ? 0.0 : kmin * F.support_min;
  {
    long double head_lin = 0.0L;
    for (int k = 1; k <= m_eff; ++k) {
      if (w.p[k] <= 0.0) continue;
      double hk = 1.0;
      if (k <= k_build) {
        const GridDistribution& Hk = folds[k - 1];
        if (Hk.support_min <=
            plan.support_min +
                1e-12 * std::max(1.0, std::fabs(plan.support_min)))
          hk = Hk.log_tail.front().is_zero()
                   ? 0.0
                   : std::exp(Hk.log_tail.front().log_value());
      }
      head_lin += static_cast<long double>(w.p[k]) * hk;
    }
    plan.head_log = (head_lin > 0.0L)
                        ? static_cast<double>(logl(head_lin))
                        : -std::numeric_limits<double>::infinity();
  }
  for (const auto& Hk : folds) {
    plan.structural.insert(plan.structural.end(), Hk.anchors.begin(),
                           Hk.anchors.end());
    plan.jumps.insert(plan.jumps.end(), Hk.jump_points.begin(),
                      Hk.jump_points.end());
  }
  if (F.support_min > 0.0 && !F.atoms.empty())
    for (int k = k_build + 1; k <= m_eff; ++k)
      plan.jumps.push_back(k * F.support_min);  // clipped to range below
  detail::sort_unique_rel(plan.structural);
  detail::sort_unique_rel(plan.jumps);
  plan.provenance =
      "random_conv(" + F.meta.family + "; " + w.origin + ")";
  const double s1 = F.support_min;
  double edge_mass = 0.0;  // F's atom mass exactly at its support edge
  for (const auto& a : F.atoms)
    if (std::fabs(a.position - s1) <= 1e-12 * std::max(1.0, std::fabs(s1)))
      edge_mass += a.mass.to_linear();
  auto unbuilt_tail = [s1, edge_mass](int k, double x) -> LogMag {
    // only x <= x_max <= k*s1 can reach here; beyond-edge queries occur at
    // the boundary node alone, where the tail is 1 minus the collision mass
    if (x < k * s1) return LogMag::one();
    if (edge_mass >= 1.0) return LogMag::zero();
    if (edge_mass <= 0.0) return LogMag::one();
    return LogMag::from_log(std::log1p(-std::pow(edge_mass, k)));
  };
  auto eval = [&folds, &w, m_eff, k_build, &unbuilt_tail](double x) {
    LogMag acc = LogMag::zero();
    for (int k = 1; k <= m_eff; ++k) {
      if (w.p[k] <= 0.0) continue;
      const LogMag term = (k <= k_build) ? folds[k - 1].tail(x)
                                         : unbuilt_tail(k, x);
      acc = log_add(acc, log_mul(LogMag::from_linear(w.p[k]), term));
    }
    if (acc.log_value_l() > 0.0L) return LogMag::one();
    return acc;
  };
  GridDistribution H = detail::build_grid(eval, plan, spec);
  H.remainder = remainder_bound;
  H.truncation_note = note;
  if (dropped > 0.0)
    H.truncation_note += "; dropped trailing weight mass " +
                         detail::fmt_g(dropped);
  return H;
}

}  // namespace tailkit
