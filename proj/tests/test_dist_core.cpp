#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "tailkit/distribution.hpp"
#include "tailkit/families.hpp"
#include "reference/reference_values.hpp"

using tailkit::AnalyticDistribution;
using tailkit::CheckpointPoint;
using tailkit::CheckpointSchedule;
using tailkit::LogMag;
using tailkit::default_schedule;
using tailkit::exp_moment;
using tailkit::integrate_log;
using tailkit::log_add;
using tailkit::log_sub;
using tailkit::mean_integral;
using tailkit::to_descriptor;
using tailkit::write_grid_csv;
using namespace refvals;

namespace {

// P(lo < X <= hi) two ways: tail difference vs integrated density + atoms.
void check_mass_consistency(const AnalyticDistribution& F, double lo,
                            double hi, double rel_tol) {
  CAPTURE(F.meta.family, lo, hi);
  LogMag lhs = log_sub(F.tail(lo), F.tail(hi));
  LogMag rhs = F.atom_mass_in(lo, hi);
  if (F.has_density()) {
    auto cuts = F.breakpoints_in(lo, hi);
    LogMag integral = integrate_log(
        [&](double y) { return F.density(y); }, lo, hi, cuts);
    rhs = log_add(rhs, integral);
  }
  if (lhs.is_zero()) {
    REQUIRE(rhs.is_zero());
    return;
  }
  REQUIRE_FALSE(rhs.is_zero());
  REQUIRE(lhs.to_linear() ==
          Catch::Approx(rhs.to_linear()).epsilon(rel_tol));
}

void check_mass_consistency_random(const AnalyticDistribution& F, double lo0,
                                   double hi0, unsigned seed,
                                   double rel_tol = 1e-8) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo0, hi0);
  for (int i = 0; i < 12; ++i) {
    double p = u(rng), q = u(rng);
    if (p > q) std::swap(p, q);
    if (q - p < 1e-3 * (hi0 - lo0)) continue;
    check_mass_consistency(F, p, q, rel_tol);
  }
}

bool schedule_has(const CheckpointSchedule& s, double x, int level,
                  const std::string& role, double rel = 1e-12) {
  for (const auto& p : s.points)
    if (p.level == level && p.role == role &&
        std::fabs(p.x - x) <= rel * std::max(1.0, std::fabs(x)))
      return true;
  return false;
}

}  // namespace

TEST_CASE("tail is one below the support and rejects NaN") {
  auto E = tailkit::make_exponential(1.0);
  REQUIRE(E.tail(-3.0).log_value() == 0.0);
  REQUIRE(E.tail(10.0).log_value() == Catch::Approx(-10.0).margin(1e-14));
  REQUIRE_THROWS_AS(E.tail(std::nan("")), std::invalid_argument);

  auto F3 = tailkit::make_f3(1.6, 28.0);
  REQUIRE(F3.tail(27.999).log_value() == 0.0);
  REQUIRE(F3.tail(0.0).log_value() == 0.0);
}

TEST_CASE("ladder tail hits the frozen plateau value at the branch end") {
  auto F3 = tailkit::make_f3(1.6, 28.0);
  // at x = 2 a_1 the branch term vanishes and the tail equals the next
  // plateau; frozen from the high-precision run
  double x = 0.0;
  for (const auto& b : F3.breakpoints)
    if (b.level == 1 && b.role == "branch_end") x = b.x;
  REQUIRE(x > 0.0);
  double got = F3.tail(x).log_value();
  REQUIRE(std::fabs(got - kF3LogT2) <= 5e-15);
}

TEST_CASE("tails are nonincreasing along a default schedule") {
  struct Case {
    AnalyticDistribution F;
    int n_max;
  };
  std::vector<Case> cases;
  cases.push_back({tailkit::make_exponential(0.7), 2});
  cases.push_back({tailkit::make_f3(1.6, 28.0), 4});
  cases.push_back({tailkit::make_f4(1.0), 8});
  cases.push_back({tailkit::make_f1(0.5, 3.0, 1.0, 1.0), 3});
  for (auto& c : cases) {
    CAPTURE(c.F.meta.family);
    auto sched = default_schedule(c.F, c.n_max);
    sched.validate();
    LogMag prev = LogMag::one();
    for (const auto& p : sched.points) {
      LogMag t = c.F.tail(p.x);
      CAPTURE(p.x);
      REQUIRE(t <= prev);
      prev = t;
    }
  }
}

TEST_CASE("tail differences equal integrated density plus atom mass") {
  SECTION("exponential") {
    check_mass_consistency_random(tailkit::make_exponential(0.7), 0.0, 20.0,
                                  11u);
  }
  SECTION("ladder with linear branches") {
    check_mass_consistency_random(tailkit::make_f3(1.6, 28.0), 28.0, 500.0,
                                  12u);
  }
  SECTION("ladder with power-map branches") {
    check_mass_consistency_random(tailkit::make_f2(0.5, 3.0, 1.5), 2.0, 40.0,
                                  13u);
  }
  SECTION("step-averaged exponential with atoms") {
    check_mass_consistency_random(tailkit::make_f4(1.0), 0.5, 30.0, 14u);
  }
  SECTION("flattened staircase with atoms") {
    auto F = tailkit::make_sec62_second(2.0, 3.0, 4);
    check_mass_consistency_random(F, 1.0, 300.0, 15u);
  }
  SECTION("steep-then-flat tail") {
    auto F = tailkit::make_sec62_first(5.1, kSec62FirstX1);
    check_mass_consistency_random(F, 0.0, 3.0 * kSec62FirstX1, 16u);
  }
}

TEST_CASE("schedule validation rejects malformed checkpoint lists") {
  CheckpointSchedule s;
  for (int i = 0; i < 30; ++i)
    s.points.push_back({1.0 + i, -1, "fill"});
  s.window = 8;
  REQUIRE_NOTHROW(s.validate());

  CheckpointSchedule narrow = s;
  narrow.window = 1;
  REQUIRE_THROWS_AS(narrow.validate(), std::invalid_argument);

  CheckpointSchedule few = s;
  few.points.resize(20);  // below 3 * window
  REQUIRE_THROWS_AS(few.validate(), std::invalid_argument);

  CheckpointSchedule bad = s;
  bad.points[5].x = bad.points[4].x;
  REQUIRE_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("default schedule anchors carry structural roles") {
  SECTION("ladder breakpoints and their offsets") {
    auto F3 = tailkit::make_f3(1.6, 28.0);
    auto s = default_schedule(F3, 4);
    s.validate();
    REQUIRE(schedule_has(s, 28.0, 0, "branch_start"));
    REQUIRE(schedule_has(s, 56.0, 0, "branch_end"));
    double a1 = std::exp(1.625 * std::log(28.0));
    REQUIRE(schedule_has(s, a1, 1, "branch_start", 1e-9));
    REQUIRE(schedule_has(s, 2.0 * a1, 1, "branch_end", 1e-9));
    REQUIRE(schedule_has(s, 27.0, 0, "branch_start-t"));
    REQUIRE(schedule_has(s, 58.0, 0, "branch_end+t"));
    for (const auto& p : s.points) REQUIRE(p.level <= 4);
  }
  SECTION("step tail keeps its steps up to the requested level") {
    auto F4 = tailkit::make_f4(1.0);
    auto s = default_schedule(F4, 10);
    s.validate();
    for (int k = 0; k <= 10; ++k)
      REQUIRE(schedule_has(s, std::exp(static_cast<double>(k + 1)), k,
                           "step", 1e-9));
  }
  SECTION("anchor-free tails get a pure fill") {
    auto E = tailkit::make_exponential(1.0);
    auto s = default_schedule(E, 3);
    s.validate();
    for (const auto& p : s.points) REQUIRE(p.role == "fill");
    REQUIRE(s.points.front().x >= 0.1);
    REQUIRE(s.points.back().x <= 1000.0 * (1.0 + 1e-12));
  }
}

TEST_CASE("exponential moment of the exponential distribution") {
  auto E = tailkit::make_exponential(2.0);
  SECTION("below the abscissa the moment is lambda/(lambda-gamma)") {
    auto r = exp_moment(E, 1.0);
    REQUIRE_FALSE(r.divergent);
    REQUIRE(r.value == Catch::Approx(2.0).epsilon(1e-9));
  }
  SECTION("gamma = 0 is exactly one") {
    auto r = exp_moment(E, 0.0);
    REQUIRE_FALSE(r.divergent);
    REQUIRE(r.value == 1.0);
  }
  SECTION("at the abscissa the moment diverges") {
    auto r = exp_moment(E, 2.0);
    REQUIRE(r.divergent);
  }
  SECTION("above the abscissa the moment diverges") {
    auto r = exp_moment(E, 3.0);
    REQUIRE(r.divergent);
  }
  SECTION("negative gamma is rejected") {
    REQUIRE_THROWS_AS(exp_moment(E, -0.5), std::invalid_argument);
  }
}

TEST_CASE("mean integrals: finite ladders vs heavy plateaus") {
  SECTION("interpolated ladder has no mean") {
    auto F1 = tailkit::make_f1(0.5, 3.0, 1.0, 1.0);
    auto r = mean_integral(F1);
    REQUIRE(r.divergent);
  }
  SECTION("linear-branch ladder mean matches the frozen value") {
    auto F3 = tailkit::make_f3(1.6, 28.0);
    auto r = mean_integral(F3);
    REQUIRE_FALSE(r.divergent);
    REQUIRE(r.value == Catch::Approx(kF3Mu).epsilon(1e-9));
  }
  SECTION("exponential mean is 1/lambda") {
    auto r = mean_integral(tailkit::make_exponential(1.0));
    REQUIRE_FALSE(r.divergent);
    REQUIRE(r.value == Catch::Approx(1.0).epsilon(1e-9));
  }
  SECTION("flattened staircase mean diverges on metadata") {
    auto F = tailkit::make_sec62_second(2.0, 3.0, 3);
    auto r = mean_integral(F);
    REQUIRE(r.divergent);
  }
}

TEST_CASE("descriptor and grid export round-trip") {
  auto F3 = tailkit::make_f3(1.6, 28.0);
  auto j = to_descriptor(F3);
  REQUIRE(j["family"] == "f3");
  REQUIRE(j["params"]["alpha"] == 1.6);
  REQUIRE(j["params"]["a"] == 28.0);
  REQUIRE(j["support_min"] == 28.0);

  std::string path = "test_grid_export.csv";
  std::vector<double> xs{10.0, 30.0, 60.0, 100.0};
  write_grid_csv(F3, xs, path);
  std::ifstream in(path);
  REQUIRE(in.good());
  std::string header;
  std::getline(in, header);
  REQUIRE(header == "x,log_tail");
  double worst = 0.0;
  int rows = 0;
  std::string line;
  while (std::getline(in, line)) {
    auto comma = line.find(',');
    REQUIRE(comma != std::string::npos);
    double x = std::stod(line.substr(0, comma));
    double lt = std::stod(line.substr(comma + 1));
    worst = std::max(worst, std::fabs(lt - F3.tail(x).log_value()));
    ++rows;
  }
  REQUIRE(rows == 4);
  REQUIRE(worst <= 1e-12);
  std::remove(path.c_str());
}
