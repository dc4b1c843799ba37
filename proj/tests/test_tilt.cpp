#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "tailkit/families.hpp"
#include "tailkit/tilt.hpp"
#include "reference/reference_values.hpp"

using tailkit::AnalyticDistribution;
using tailkit::CheckpointSchedule;
using tailkit::LimitEvidence;
using tailkit::LogMag;
using tailkit::TiltedDistribution;
using tailkit::Verdict;
using tailkit::log_add;
using tailkit::log_mul;
using tailkit::log_sub;
using namespace refvals;

namespace {

const tailkit::Breakpoint& breakpoint_of(const AnalyticDistribution& F,
                                         int level,
                                         const std::string& role) {
  for (const auto& b : F.breakpoints)
    if (b.level == level && b.role == role) return b;
  FAIL("no breakpoint with level " << level << " role " << role);
  return F.breakpoints.front();  // unreachable
}

CheckpointSchedule flat_schedule(const std::vector<double>& xs, int window) {
  CheckpointSchedule s;
  for (double x : xs) s.points.push_back({x, -1, "fill"});
  s.window = window;
  s.origin = "handmade";
  return s;
}

int count_infinite(const std::vector<double>& v) {
  return static_cast<int>(
      std::count_if(v.begin(), v.end(), [](double x) { return std::isinf(x); }));
}

double max_value(const std::vector<double>& v) {
  return *std::max_element(v.begin(), v.end());
}

}  // namespace

TEST_CASE("tilt rejects invalid rates and negative support") {
  auto f3 = tailkit::make_f3(1.6, 28.0);
  REQUIRE_THROWS_AS(tailkit::tilt(f3, -0.5), std::invalid_argument);
  REQUIRE_THROWS_AS(
      tailkit::tilt(f3, std::numeric_limits<double>::quiet_NaN()),
      std::invalid_argument);
  AnalyticDistribution neg;
  neg.support_min = -1.0;
  neg.log_tail = [](double x) {
    return x < -1.0 ? LogMag::one() : LogMag::from_log(-(x + 1.0));
  };
  REQUIRE_THROWS_AS(tailkit::tilt(neg, 1.0), std::invalid_argument);
}

TEST_CASE("zero-rate tilt is the identity") {
  auto f3 = tailkit::make_f3(1.6, 28.0);
  TiltedDistribution G = tailkit::tilt(f3, 0.0);
  REQUIRE(G.gamma == 0.0);
  REQUIRE(G.support_min == 28.0);
  REQUIRE(G.base.support_min == 28.0);
  for (double x : {5.0, 28.0, 30.0, 100.0, 449.0, 7000.0})
    REQUIRE(G.tail(x).log_value_l() == f3.tail(x).log_value_l());
  REQUIRE(G.meta.params.find("tilt_gamma") == G.meta.params.end());
  REQUIRE(G.meta.moment_abscissa == 0.0);
  REQUIRE_FALSE(G.meta.mean_infinite);
  REQUIRE(G.breakpoints.size() == f3.breakpoints.size());
}

TEST_CASE("tilt identity holds exactly in the log domain") {
  auto f3 = tailkit::make_f3(1.6, 28.0);
  TiltedDistribution G = tailkit::tilt(f3, 1.0);
  REQUIRE(G.support_min == 0.0);
  REQUIRE(G.gamma == 1.0);
  REQUIRE(G.meta.params.at("tilt_gamma") == 1.0);

  auto check_identity = [&](const AnalyticDistribution& base,
                            const TiltedDistribution& T, double gamma,
                            double x) {
    const long double gl = static_cast<long double>(gamma);
    long double ref = -(gl * static_cast<long double>(x)) +
                      base.tail(x).log_value_l();
    long double got = T.tail(x).log_value_l();
    long double tol =
        1e-15L * std::max<long double>(1.0L, std::fabs(ref));
    if (std::fabs(got - ref) > tol) {
      CAPTURE(x, gamma, static_cast<double>(ref), static_cast<double>(got));
      REQUIRE(std::fabs(got - ref) <= tol);
    }
  };

  auto sched = tailkit::default_schedule(f3, 4);
  for (const auto& p : sched.points) check_identity(f3, G, 1.0, p.x);
  std::mt19937_64 rng(20260822u);
  std::uniform_real_distribution<double> u(std::log(0.1), std::log(1e8));
  for (int i = 0; i < 2000; ++i) check_identity(f3, G, 1.0, std::exp(u(rng)));
  SUCCEED("identity held on the schedule and 2000 random points");

  // below the base support the tail is a pure exponential, exactly
  REQUIRE(G.tail(5.0).log_value_l() == -5.0L);
  REQUIRE(G.density(5.0).log_value_l() == -5.0L);

  // base support edge is recorded for schedules; the family already owns a
  // breakpoint at 28 so no duplicate appears
  int at28 = 0;
  for (const auto& b : G.breakpoints)
    if (b.x == 28.0) ++at28;
  REQUIRE(at28 == 1);

  // frozen value at the first ladder plateau
  double two_a1 = breakpoint_of(f3, 1, "branch_end").x;
  REQUIRE(G.tail(two_a1).log_value() ==
          Catch::Approx(-two_a1 + kF3LogT2).epsilon(1e-12));

  // a second rate on another family
  auto f1 = tailkit::make_f1(0.5, 3.0, 1.0, 1.0);
  TiltedDistribution H = tailkit::tilt(f1, 0.37);
  for (int i = 0; i < 500; ++i) check_identity(f1, H, 0.37, std::exp(u(rng)));
}

TEST_CASE("tilt scales atoms and builds the ramp") {
  auto f4 = tailkit::make_f4(1.0);
  TiltedDistribution G = tailkit::tilt(f4, 0.3);
  REQUIRE(G.atoms.size() == f4.atoms.size());
  const long double gl = 0.3;  // the rate as the transform widens it
  for (size_t i = 0; i < G.atoms.size(); ++i) {
    REQUIRE(G.atoms[i].position == f4.atoms[i].position);
    LogMag want = log_mul(
        f4.atoms[i].mass,
        LogMag::from_log_l(-gl *
                           static_cast<long double>(f4.atoms[i].position)));
    REQUIRE(G.atoms[i].mass.log_value_l() == want.log_value_l());
  }

  auto pm = tailkit::make_point_mass(2.5);
  REQUIRE_FALSE(pm.has_density());
  TiltedDistribution P = tailkit::tilt(pm, 1.0);
  REQUIRE(P.has_density());  // the ramp below the atom
  REQUIRE(P.support_min == 0.0);
  REQUIRE(P.atoms.size() == 1);
  REQUIRE(P.atoms[0].position == 2.5);
  REQUIRE(P.atoms[0].mass.log_value_l() == -2.5L);
  REQUIRE(P.tail(1.0).log_value_l() == -1.0L);
  REQUIRE(P.tail(2.5).is_zero());
  // ramp mass + atom mass add to one
  LogMag ramp = tailkit::integrate_log([&](double y) { return P.density(y); },
                                       0.0, 2.5, {});
  double total = log_add(ramp, P.atoms[0].mass).to_linear();
  REQUIRE(total == Catch::Approx(1.0).epsilon(1e-12));
  // the base support edge becomes a schedule breakpoint
  bool edge = false;
  for (const auto& b : P.breakpoints)
    if (b.role == "base_support_edge" || b.x == 2.5) edge = true;
  REQUIRE(edge);
}

TEST_CASE("tilted interval masses reconcile tails, density, and atoms") {
  auto f3 = tailkit::make_f3(1.6, 28.0);
  TiltedDistribution G = tailkit::tilt(f3, 1.0);
  auto check_interval = [](const AnalyticDistribution& F, double lo,
                           double hi) {
    LogMag from_tails = log_sub(F.tail(lo), F.tail(hi));
    std::vector<double> cuts = F.breakpoints_in(lo, hi);
    LogMag dens = tailkit::integrate_log(
        [&](double y) { return F.density(y); }, lo, hi, cuts);
    LogMag total = log_add(dens, F.atom_mass_in(lo, hi));
    REQUIRE(tailkit::ratio(total, from_tails) ==
            Catch::Approx(1.0).epsilon(1e-9));
  };
  check_interval(G, 0.0, 5.0);
  check_interval(G, 5.0, 30.0);
  check_interval(G, 20.0, 100.0);
  check_interval(G, 300.0, 1e4);

  auto f4 = tailkit::make_f4(1.0);
  TiltedDistribution T4 = tailkit::tilt(f4, 0.5);
  check_interval(T4, 0.5, 3.0);
}

TEST_CASE("tilted tail ratios respect the exponential floor") {
  struct Case {
    const char* name;
    AnalyticDistribution base;
  };
  std::vector<Case> cases;
  cases.push_back({"f1", tailkit::make_f1(0.5, 3.0, 1.0, 1.0)});
  cases.push_back({"f2", tailkit::make_f2(0.5, 3.0, 1.5)});
  cases.push_back({"f3", tailkit::make_f3(1.6, 28.0)});
  const double gamma = 1.0;
  std::mt19937_64 rng(777u);
  std::uniform_real_distribution<double> ux(std::log(1.0), std::log(1e8));
  for (auto& c : cases) {
    TiltedDistribution G = tailkit::tilt(c.base, gamma);
    int checked = 0;
    for (int i = 0; i < 10000; ++i) {
      double x = std::exp(ux(rng));
      std::uniform_real_distribution<double> ut(std::log(1e-3),
                                                std::log(x / 2.0));
      double t = std::exp(ut(rng));
      double tp = x - (x - t);  // the offset the arithmetic actually used
      if (!(tp > 0.0)) continue;
      LogMag bh = c.base.tail(x - tp), bl = c.base.tail(x);
      if (!(bh >= bl)) {
        CAPTURE(c.name, x, tp);
        REQUIRE(bh >= bl);
      }
      long double diff =
          G.tail(x - tp).log_value_l() - G.tail(x).log_value_l();
      long double floor_l = static_cast<long double>(gamma) *
                            static_cast<long double>(tp);
      long double slack =
          1e-10L * std::max(1.0L, static_cast<long double>(gamma * x));
      if (diff < floor_l - slack) {
        CAPTURE(c.name, x, tp, static_cast<double>(diff),
                static_cast<double>(floor_l));
        REQUIRE(diff >= floor_l - slack);
      }
      ++checked;
    }
    REQUIRE(checked == 10000);
  }
}

TEST_CASE("tilts compose additively") {
  auto f3 = tailkit::make_f3(1.6, 28.0);
  TiltedDistribution inner = tailkit::tilt(f3, 0.4);
  TiltedDistribution G = tailkit::tilt(inner, 0.6);
  TiltedDistribution S = tailkit::tilt(f3, 1.0);
  double two_a1 = breakpoint_of(f3, 1, "branch_end").x;
  for (double x : {3.0, 28.0, 100.0, two_a1, 7000.0}) {
    long double d = G.tail(x).log_value_l() - S.tail(x).log_value_l();
    REQUIRE(std::fabs(d) <=
            1e-14L * std::max(1.0L,
                              std::fabs(S.tail(x).log_value_l())));
  }
  REQUIRE(G.meta.params.at("tilt_gamma") ==
          Catch::Approx(1.0).margin(1e-15));
  REQUIRE(G.meta.moment_abscissa == Catch::Approx(1.0).margin(1e-15));
  REQUIRE(G.meta.abscissa_attained);
  // rates fold and the stored base stays the original heavy one
  REQUIRE(G.gamma == 1.0);
  REQUIRE(G.base.support_min == 28.0);
  // moments reach the heavy base in a single provenance hop
  auto m = tailkit::tilted_exp_moment(G, 1.0);
  REQUIRE_FALSE(m.divergent);
  REQUIRE(m.value == Catch::Approx(kMTiltF3).epsilon(1e-9));
}

TEST_CASE("tilted moments route through the base") {
  auto f3 = tailkit::make_f3(1.6, 28.0);
  TiltedDistribution G = tailkit::tilt(f3, 1.0);

  auto m1 = tailkit::tilted_exp_moment(G, 1.0);
  REQUIRE_FALSE(m1.divergent);
  REQUIRE(m1.value == Catch::Approx(kMTiltF3).epsilon(1e-9));

  auto mhalf = tailkit::tilted_exp_moment(G, 0.5);
  REQUIRE_FALSE(mhalf.divergent);
  REQUIRE(mhalf.value > 1.0);
  REQUIRE(mhalf.value < kMTiltF3);

  auto mover = tailkit::tilted_exp_moment(G, 1.5);
  REQUIRE(mover.divergent);
  REQUIRE(std::isnan(mover.value));

  auto m0 = tailkit::tilted_exp_moment(G, 0.0);
  REQUIRE(m0.value == 1.0);
  REQUIRE_THROWS_AS(tailkit::tilted_exp_moment(G, -0.1),
                    std::invalid_argument);

  auto mean = tailkit::tilted_mean_integral(G);
  REQUIRE_FALSE(mean.divergent);
  REQUIRE(mean.value > 0.0);
  REQUIRE(mean.value < kF3Mu);

  // a base with an infinite mean still tilts to finite mean, but its own
  // rate stays out of reach
  auto f1 = tailkit::make_f1(0.5, 3.0, 1.0, 1.0);
  TiltedDistribution H = tailkit::tilt(f1, 1.0);
  REQUIRE(tailkit::tilted_exp_moment(H, 1.0).divergent);
  auto hm = tailkit::tilted_mean_integral(H);
  REQUIRE_FALSE(hm.divergent);
  REQUIRE(hm.value > 0.95);
  REQUIRE(hm.value <= 1.0);
}

TEST_CASE("interval-mass domination: smooth exponential baseline") {
  auto E = tailkit::make_exponential(1.0);
  std::vector<double> xs;
  for (int k = 0; k <= 30; ++k) xs.push_back(2.0 + 0.5 * k);
  auto sched = flat_schedule(xs, 4);
  LimitEvidence ev = tailkit::check_cond_47(E, {1.0, 2.0}, sched);
  REQUIRE(ev.verdict == Verdict::SUPPORTS);
  REQUIRE(ev.values.size() == xs.size());
  const double expect = (std::exp(2.0) - 1.0) / (std::exp(2.0) + 1.0);
  for (double v : ev.values)
    REQUIRE(v == Catch::Approx(expect).epsilon(1e-12));
  REQUIRE(ev.window_sup == Catch::Approx(expect).epsilon(1e-12));
  REQUIRE(ev.trend == 0);
}

TEST_CASE("interval-mass domination: ladder family with sharp sup") {
  auto f3 = tailkit::make_f3(1.6, 28.0);
  double a1 = breakpoint_of(f3, 1, "branch_start").x;
  auto sched = flat_schedule(
      {26.0, 27.0, 28.0, 28.5, 29.0, 29.9, 30.0, 31.0, 40.0, 50.0, 56.0,
       57.0, 58.0, 100.0, 230.0, 449.0, 451.0, 500.0, 1000.0, 3000.0,
       6630.0, 7000.0},
      4);
  LimitEvidence ev = tailkit::check_cond_47(f3, {1.0, 2.0}, sched);
  REQUIRE(ev.verdict == Verdict::SUPPORTS);
  REQUIRE(count_infinite(ev.values) == 0);
  // branches carry constant density, so intervals wholly inside a branch
  // give t/2 and intervals reaching below the branch start give x - a
  REQUIRE(ev.values[3] == Catch::Approx(0.5).epsilon(1e-9));   // x = 28.5
  REQUIRE(ev.values[4] == Catch::Approx(1.0).epsilon(1e-9));   // x = 29
  REQUIRE(ev.values[5] == Catch::Approx(1.9).epsilon(1e-9));   // x = 29.9
  REQUIRE(ev.values[6] == Catch::Approx(1.0).epsilon(1e-9));   // x = 30
  REQUIRE(ev.values[8] == Catch::Approx(1.0).epsilon(1e-9));   // x = 40
  // the sup is 2, attained exactly where a plateau opens: only the left
  // density survives there
  REQUIRE(ev.values[10] == Catch::Approx(2.0).epsilon(1e-9));  // x = 56
  REQUIRE(max_value(ev.values) == Catch::Approx(2.0).epsilon(1e-9));
  REQUIRE(ev.values[11] == Catch::Approx(1.0).epsilon(1e-9));  // x = 57
  REQUIRE(ev.values[12] == 0.0);                               // x = 58
  REQUIRE(ev.values[14] == Catch::Approx(1.0).epsilon(1e-9));  // x = 230
  // just past a plateau start the surviving reach is t - (x - 2 a1)
  REQUIRE(ev.values[16] ==
          Catch::Approx(2.0 * a1 - 449.0).epsilon(1e-8));      // x = 451
  // plateau interior carries no interval mass at all
  REQUIRE(ev.values[17] == 0.0);
  REQUIRE(ev.values[0] == 0.0);
  REQUIRE(ev.values[2] <= 1e-9);
  // next rung: x = 6630 reaches below the branch start at a2
  REQUIRE(ev.values[20] ==
          Catch::Approx(6630.0 - kF3A2).epsilon(1e-9));
  REQUIRE(ev.window_sup ==
          Catch::Approx(6630.0 - kF3A2).epsilon(1e-9));
}

TEST_CASE("interval-mass domination: default ladder schedule supports") {
  auto f3 = tailkit::make_f3(1.6, 28.0);
  auto sched = tailkit::default_schedule(f3, 4);
  LimitEvidence ev = tailkit::check_cond_47(f3, {1.0, 2.0}, sched);
  REQUIRE(ev.verdict == Verdict::SUPPORTS);
  REQUIRE(count_infinite(ev.values) == 0);
  double m = max_value(ev.values);
  REQUIRE(m >= 1.0 - 1e-9);
  REQUIRE(m <= 2.08);
  REQUIRE(ev.window_sup <= 0.6);
}

TEST_CASE("interval-mass domination: flats against plateaus refute") {
  auto S2 = tailkit::make_sec62_second(
      2.0, 3.0, std::vector<double>{7.0, 19.0, 259.0, 65539.0});
  auto sched = tailkit::default_schedule(S2, 3, 8, {0.5, 2.0});
  LimitEvidence ev = tailkit::check_cond_47(S2, {2.0}, sched);
  REQUIRE(ev.verdict == Verdict::REFUTES);
  REQUIRE(count_infinite(ev.values) >= 3);
  REQUIRE(ev.note.find("vanishing") != std::string::npos);

  // a single isolated witness is not structure
  auto single = flat_schedule({18.2, 19.3, 20.5, 21.3, 21.7, 23.4, 23.8}, 2);
  LimitEvidence one = tailkit::check_cond_47(S2, {2.0}, single);
  REQUIRE(one.verdict == Verdict::INCONCLUSIVE);
  REQUIRE(count_infinite(one.values) == 1);
  REQUIRE(one.note.find("isolated") != std::string::npos);
  REQUIRE(one.values[0] == 0.0);  // flat-to-flat interval holds no mass

  // parameter validation
  auto pm = tailkit::make_point_mass(2.5);
  REQUIRE_THROWS_AS(tailkit::check_cond_47(pm, {1.0}, single),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(tailkit::check_cond_47(S2, {}, single),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(tailkit::check_cond_47(S2, {0.0}, single),
                    std::invalid_argument);
}

TEST_CASE("interval-mass domination: first staircase supports") {
  auto S1 = tailkit::make_sec62_first(5.1, kSec62FirstX1);
  auto sched = tailkit::default_schedule(S1, 5);
  LimitEvidence ev = tailkit::check_cond_47(S1, {1.0, 2.0}, sched);
  REQUIRE(ev.verdict == Verdict::SUPPORTS);
  REQUIRE(count_infinite(ev.values) == 0);
  REQUIRE(max_value(ev.values) <= 2.01);
  REQUIRE(ev.window_sup <= 1.2);
}

TEST_CASE("upper-half overlap integrals match frozen values") {
  auto f3 = tailkit::make_f3(1.6, 28.0);
  double x = 2.0 * kF3A2;
  auto oi = tailkit::upper_half_overlap(f3, f3, x);
  REQUIRE(oi.stieltjes.log_value() ==
          Catch::Approx(kF3StieltjesOverlapLogAt2a2).margin(1e-9));
  REQUIRE(oi.tail_product.log_value() ==
          Catch::Approx(kF3TailOverlapLogAt2a2).margin(1e-9));
  REQUIRE(tailkit::ratio(oi.stieltjes, oi.tail_product) ==
          Catch::Approx(kF3OverlapRatioAt2a2).epsilon(1e-8));
  REQUIRE_THROWS_AS(tailkit::upper_half_overlap(f3, f3, 0.0),
                    std::invalid_argument);
}

TEST_CASE("overlap decay scan: ladder family supports") {
  auto f3 = tailkit::make_f3(1.6, 28.0);
  auto sched = tailkit::default_schedule(f3, 4);
  LimitEvidence ev = tailkit::check_cond_48(f3, f3, sched);
  REQUIRE(ev.verdict == Verdict::SUPPORTS);
  REQUIRE(ev.note.find("factor") != std::string::npos);
  REQUIRE(count_infinite(ev.values) == 0);
}

TEST_CASE("overlap decay scan: first staircase refutes by persistent role") {
  auto S1 = tailkit::make_sec62_first(5.1, kSec62FirstX1);
  auto sched = tailkit::default_schedule(S1, 6);
  LimitEvidence ev = tailkit::check_cond_48(S1, S1, sched);
  REQUIRE(ev.verdict == Verdict::REFUTES);
  REQUIRE(ev.note.find("branch_end") != std::string::npos);
  REQUIRE(ev.note.find("holds its level") != std::string::npos);
  REQUIRE(ev.window_inf >= 0.5 * kSec62FirstWTLimit);
  REQUIRE(ev.window_sup <= 1.5 * kSec62FirstWTLimit);
}

TEST_CASE("overlap decay scan: flat-top staircase supports in coverage") {
  auto S2 = tailkit::make_sec62_second(
      2.0, 3.0, std::vector<double>{7.0, 19.0, 259.0, 65539.0});
  auto sched = tailkit::clip_schedule(tailkit::default_schedule(S2, 3, 8,
                                                               {0.5, 2.0}),
                                      S2.quadrature_cuts.back());
  LimitEvidence ev = tailkit::check_cond_48(S2, S2, sched);
  REQUIRE(ev.verdict == Verdict::SUPPORTS);
  REQUIRE(ev.note.find("factor") != std::string::npos);
}

TEST_CASE("overlap decay scan: point mass refutes pointwise") {
  auto E = tailkit::make_exponential(1.0);
  auto pm = tailkit::make_point_mass(3.0);
  auto sched = flat_schedule({1.0, 2.0, 2.5, 3.0, 4.0, 5.0, 6.0, 7.0}, 2);
  LimitEvidence ev = tailkit::check_cond_48(E, pm, sched);
  REQUIRE(ev.verdict == Verdict::REFUTES);
  REQUIRE(ev.note.find("vanishes") != std::string::npos);
  REQUIRE(std::isinf(ev.values[6]));  // x = 6 = twice the atom position
}

TEST_CASE("overlap decay scan: structureless schedule is inconclusive") {
  auto E = tailkit::make_exponential(1.0);
  auto sched = tailkit::default_schedule(E, 2);
  LimitEvidence ev = tailkit::check_cond_48(E, E, sched);
  REQUIRE(ev.verdict == Verdict::INCONCLUSIVE);
  REQUIRE(ev.note.find("ladder levels") != std::string::npos);
  for (double v : ev.values) REQUIRE(v == Catch::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("evidence JSON is deterministic and encodes infinities") {
  LimitEvidence ev;
  ev.claim = "demo";
  ev.points = {1.0, 2.0, 3.0};
  ev.values = {0.5, std::numeric_limits<double>::infinity(), 0.25};
  auto st = tailkit::detail::trailing_stats(ev.values, 2);
  ev.window_sup = st.sup;
  ev.window_inf = st.inf;
  ev.trend = st.trend;
  ev.verdict = Verdict::REFUTES;
  ev.note = "n";
  auto j = ev.to_json();
  REQUIRE(j["values"][1].is_string());
  REQUIRE(j["values"][1].get<std::string>() == "inf");
  REQUIRE(j["verdict"].get<std::string>() == "REFUTES");
  std::string d1 = j.dump();
  std::string d2 = ev.to_json().dump();
  REQUIRE(d1 == d2);
  REQUIRE(d1.find("\"claim\"") < d1.find("\"points\""));
  REQUIRE(d1.find("\"points\"") < d1.find("\"values\""));
  REQUIRE(d1.find("\"values\"") < d1.find("\"verdict\""));

  LimitEvidence nan_ev;
  nan_ev.claim = "empty";
  auto jn = nan_ev.to_json();
  REQUIRE(jn["window_sup"].is_null());
}

TEST_CASE("schedules clip to certified coverage") {
  auto f3 = tailkit::make_f3(1.6, 28.0);
  auto sched = tailkit::default_schedule(f3, 4);
  auto clipped = tailkit::clip_schedule(sched, 1000.0);
  REQUIRE(!clipped.points.empty());
  for (const auto& p : clipped.points) REQUIRE(p.x <= 1000.0);
  REQUIRE(clipped.window >= 2);
  REQUIRE(clipped.window <= sched.window);
  REQUIRE(clipped.origin.find("clipped") != std::string::npos);
  REQUIRE_NOTHROW(clipped.validate());
}
