#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "tailkit/logmag.hpp"
#include "tailkit/quadrature.hpp"
#include "reference/reference_values.hpp"

using tailkit::LogMag;
using tailkit::QuadratureError;
using tailkit::QuadratureSpec;
using tailkit::integrate_log;
using tailkit::log_add;
using tailkit::log_div;
using tailkit::log_mul;
using tailkit::log_sub;

namespace {

double ulps_between(double a, double b) {
  double m = std::max(std::fabs(a), std::fabs(b));
  double ulp = std::nextafter(m, std::numeric_limits<double>::infinity()) - m;
  return std::fabs(a - b) / ulp;
}

}  // namespace

TEST_CASE("LogMag round-trips linear magnitudes across 600 orders") {
  for (int e = -300; e <= 300; e += 7) {
    double v = 1.7 * std::pow(10.0, e);
    LogMag m = LogMag::from_linear(v);
    REQUIRE(std::fabs(m.to_linear() - v) <= 1e-15 * v);
  }
  REQUIRE(LogMag::from_linear(0.0).is_zero());
  REQUIRE(LogMag::zero().is_zero());
  REQUIRE(LogMag::one().log_value() == 0.0);
  REQUIRE_FALSE(LogMag::one().is_zero());
}

TEST_CASE("LogMag rejects invalid inputs") {
  REQUIRE_THROWS_AS(LogMag::from_linear(-1.0), std::invalid_argument);
  REQUIRE_THROWS_AS(
      LogMag::from_linear(std::numeric_limits<double>::quiet_NaN()),
      std::invalid_argument);
  REQUIRE_THROWS_AS(
      LogMag::from_log(std::numeric_limits<double>::quiet_NaN()),
      std::invalid_argument);
}

TEST_CASE("LogMag ordering follows magnitude") {
  REQUIRE(LogMag::zero() < LogMag::from_linear(1e-300));
  REQUIRE(LogMag::from_linear(2.0) > LogMag::from_linear(1.0));
  REQUIRE(LogMag::from_log(-3.0) == LogMag::from_log(-3.0));
}

TEST_CASE("log_add matches high-precision references to 4 ulp") {
  struct Case {
    double x, y, sum;
  };
  const Case cases[] = {
      {refvals::kLogAddAX, refvals::kLogAddAY, refvals::kLogAddASum},
      {refvals::kLogAddBX, refvals::kLogAddBY, refvals::kLogAddBSum},
      {refvals::kLogAddCX, refvals::kLogAddCY, refvals::kLogAddCSum},
  };
  for (const auto& c : cases) {
    LogMag r = log_add(LogMag::from_log(c.x), LogMag::from_log(c.y));
    INFO("x=" << c.x << " y=" << c.y);
    REQUIRE(ulps_between(r.log_value(), c.sum) <= 4.0);
    LogMag r2 = log_add(LogMag::from_log(c.y), LogMag::from_log(c.x));
    REQUIRE(r2.log_value() == r.log_value());
  }
}

TEST_CASE("log_add unit examples") {
  LogMag half = LogMag::from_linear(0.5);
  REQUIRE(std::fabs(log_add(half, half).log_value()) <= 5e-16);

  LogMag three = LogMag::from_linear(3.0);
  REQUIRE(log_add(LogMag::zero(), three).log_value() == three.log_value());
  REQUIRE(log_add(three, LogMag::zero()).log_value() == three.log_value());

  LogMag tiny = LogMag::from_log(std::log(1e-200));
  LogMag r = log_add(tiny, tiny);
  REQUIRE(ulps_between(r.log_value(), refvals::kLogTwoE200) <= 4.0);
}

TEST_CASE("log_add is associative to 1e-12 across 200 orders of magnitude") {
  std::mt19937_64 rng(20260822u);
  std::uniform_real_distribution<double> mag(-230.0, 230.0);
  for (int i = 0; i < 500; ++i) {
    LogMag a = LogMag::from_log(mag(rng));
    LogMag b = LogMag::from_log(mag(rng));
    LogMag c = LogMag::from_log(mag(rng));
    double lhs = log_add(log_add(a, b), c).log_value();
    double rhs = log_add(a, log_add(b, c)).log_value();
    REQUIRE(std::fabs(lhs - rhs) <= 1e-12);
  }
}

TEST_CASE("log_sub recovers a small difference of near-equal magnitudes") {
  LogMag a = LogMag::from_log(refvals::kLogSubX);
  LogMag b = LogMag::from_log(refvals::kLogSubY);
  LogMag d = log_sub(a, b);
  REQUIRE_FALSE(d.is_zero());
  REQUIRE(std::fabs(d.log_value() - refvals::kLogSubDiff) <= 1e-10);
}

TEST_CASE("log_sub cancellation guard returns zero on indistinguishable inputs") {
  // log(1e-100 + 1e-130) and log(1e-100) are the same double: the relative
  // perturbation 1e-30 is far below one ulp of the stored logarithm.
  double a = std::log(1e-100 + 1e-130);
  double b = std::log(1e-100);
  REQUIRE(a == b);
  REQUIRE(log_sub(LogMag::from_log(a), LogMag::from_log(b)).is_zero());

  // Differences within the 1e-14 guard band collapse to zero as well.
  LogMag u = LogMag::from_log(-5.0);
  LogMag v = LogMag::from_log(-5.0 + 3e-15);
  REQUIRE(log_sub(v, u).is_zero());
}

TEST_CASE("log_sub domain errors and identities") {
  LogMag big = LogMag::from_linear(2.0);
  LogMag small = LogMag::from_linear(1.0);
  REQUIRE_THROWS_AS(log_sub(small, big), std::domain_error);
  REQUIRE_THROWS_AS(log_sub(LogMag::zero(), small), std::domain_error);
  REQUIRE(log_sub(big, LogMag::zero()).log_value() == big.log_value());
  REQUIRE(log_sub(big, big).is_zero());
  double lnr = log_sub(big, small).log_value();
  REQUIRE(std::fabs(lnr) <= 1e-15);  // 2 - 1 = 1
}

TEST_CASE("log_mul and log_div") {
  LogMag a = LogMag::from_linear(1e-20);
  LogMag b = LogMag::from_linear(1e-30);
  REQUIRE(std::fabs(log_mul(a, b).log_value() - std::log(1e-50)) <= 1e-12);
  REQUIRE(log_mul(a, LogMag::zero()).is_zero());
  REQUIRE(std::fabs(log_div(a, b).log_value() - std::log(1e10)) <= 1e-12);
  REQUIRE(log_div(LogMag::zero(), b).is_zero());
  REQUIRE_THROWS_AS(log_div(a, LogMag::zero()), std::domain_error);
  REQUIRE(tailkit::ratio(a, a) == 1.0);
  REQUIRE(tailkit::ratio(LogMag::zero(), a) == 0.0);
  REQUIRE_THROWS_AS(tailkit::ratio(a, LogMag::zero()), std::domain_error);
}

TEST_CASE("QuadratureSpec validation") {
  QuadratureSpec spec;
  REQUIRE_NOTHROW(spec.validate());
  QuadratureSpec bad = spec;
  bad.relative_tolerance = 0.0;
  REQUIRE_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = spec;
  bad.relative_tolerance = 1e-2;
  REQUIRE_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = spec;
  bad.max_panel_depth = 3;
  REQUIRE_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = spec;
  bad.nodes_per_panel = 10;
  REQUIRE_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = spec;
  bad.nodes_per_panel = 7;
  REQUIRE_NOTHROW(bad.validate());
}

TEST_CASE("integrate_log: exponential tail mass over [0, 50]") {
  auto f = [](double y) { return LogMag::from_log(-y); };
  LogMag r = integrate_log(f, 0.0, 50.0);
  REQUIRE(std::fabs(r.log_value() - refvals::kLogOneMinusExpNeg50) <= 1e-10);
}

TEST_CASE("integrate_log: breakpoints split panels exactly") {
  // A kinked integrand is integrated exactly and cheaply when the kink is
  // declared: each side is linear, so the first panel estimate converges.
  int evals = 0;
  auto f = [&evals](double y) {
    ++evals;
    return LogMag::from_linear(std::fabs(y - 1.0) + 0.1);
  };
  std::vector<double> bps{1.0};
  LogMag r = integrate_log(f, 0.0, 2.0, bps);
  // integral of |y-1| + 0.1 over [0,2] = 1 + 0.2
  REQUIRE(std::fabs(r.log_value() - std::log(1.2)) <= 1e-12);
  REQUIRE(evals <= 200);

  evals = 0;
  auto g = [&evals](double) {
    ++evals;
    return LogMag::one();
  };
  std::vector<double> bps2{1.0, 2.0};
  LogMag r2 = integrate_log(g, 0.0, 3.0, bps2);
  REQUIRE(std::fabs(r2.log_value() - std::log(3.0)) <= 1e-13);
}

TEST_CASE("integrate_log: piecewise ladder tail over [28, a_2]") {
  // Ladder with alpha = 1.6, a = 28: branch tail on [a_n, 2a_n), flat
  // plateau after. Levels and normalization follow the frozen references.
  const double alpha = 1.6;
  const double r = 1.0 + 1.0 / alpha;
  const double lga = std::log(28.0);
  std::vector<double> log_an;
  double p = 1.0;
  while (p * lga < std::log(1e250)) {
    log_an.push_back(p * lga);
    p *= r;
  }
  const int levels = static_cast<int>(log_an.size());
  REQUIRE(levels == 11);
  // suffix sums T_m = C * sum_{n>=m} a_n^{-alpha}, built backwards
  std::vector<LogMag> logT(levels + 1, LogMag::zero());
  for (int m = levels - 1; m >= 0; --m) {
    LogMag term = LogMag::from_log(refvals::kF3LogC - alpha * log_an[m]);
    logT[m] = log_add(term, logT[m + 1]);
  }
  auto tail = [&](double x) {
    if (x < 28.0) return LogMag::one();
    for (int n = 0; n < levels; ++n) {
      double an = std::exp(log_an[n]);
      if (x >= an && x < 2.0 * an) {
        LogMag branch = LogMag::from_log(refvals::kF3LogC -
                                         alpha * log_an[n] +
                                         std::log(2.0 - x / an));
        return log_add(logT[n + 1], branch);
      }
      double nxt = (n + 1 < levels) ? std::exp(log_an[n + 1])
                                    : std::numeric_limits<double>::infinity();
      if (x >= 2.0 * an && x < nxt) return logT[n + 1];
    }
    return LogMag::zero();
  };
  std::vector<double> bps;
  for (int n = 0; n < levels; ++n) {
    double an = std::exp(log_an[n]);
    if (an < refvals::kF3A2 * 1.01) {
      bps.push_back(an);
      bps.push_back(2.0 * an);
    }
  }
  LogMag r2 = integrate_log(tail, 28.0, refvals::kF3A2, bps);
  REQUIRE(std::fabs(r2.log_value() - refvals::kF3LogIntTail28ToA2) <= 1e-9);

  SECTION("additivity across a split point") {
    for (double split : {40.0, 56.0, 311.0, 2000.0}) {
      LogMag left = integrate_log(tail, 28.0, split, bps);
      LogMag right = integrate_log(tail, split, refvals::kF3A2, bps);
      double sum = log_add(left, right).log_value();
      REQUIRE(std::fabs(sum - r2.log_value()) <= 2e-10);
    }
  }
}

TEST_CASE("integrate_log: additivity for the exponential integrand") {
  auto f = [](double y) { return LogMag::from_log(-y); };
  LogMag whole = integrate_log(f, 0.0, 20.0);
  LogMag a = integrate_log(f, 0.0, 7.3);
  LogMag b = integrate_log(f, 7.3, 20.0);
  REQUIRE(std::fabs(log_add(a, b).log_value() - whole.log_value()) <= 2e-10);
}

TEST_CASE("integrate_log: refinement is monotone in the tolerance") {
  auto f = [](double y) { return LogMag::from_log(-y * y); };
  QuadratureSpec tight;
  tight.relative_tolerance = 1e-12;
  LogMag best = integrate_log(f, 0.0, 6.0, {}, tight);
  double prev_err = std::numeric_limits<double>::infinity();
  for (double tol : {1e-6, 1e-8, 1e-10}) {
    QuadratureSpec s;
    s.relative_tolerance = tol;
    LogMag r = integrate_log(f, 0.0, 6.0, {}, s);
    double err = std::fabs(r.log_value() - best.log_value());
    REQUIRE(err <= prev_err + 1e-15);
    prev_err = err;
  }
}

TEST_CASE("integrate_log: zero integrand short-circuits") {
  int evals = 0;
  auto f = [&evals](double) {
    ++evals;
    return LogMag::zero();
  };
  LogMag r = integrate_log(f, 0.0, 1e6);
  REQUIRE(r.is_zero());
  REQUIRE(evals <= 200);
}

TEST_CASE("integrate_log: bound and spec errors") {
  auto f = [](double) { return LogMag::one(); };
  REQUIRE(integrate_log(f, 2.0, 2.0).is_zero());
  REQUIRE_THROWS_AS(integrate_log(f, 3.0, 2.0), std::invalid_argument);
  REQUIRE_THROWS_AS(
      integrate_log(f, std::numeric_limits<double>::quiet_NaN(), 2.0),
      std::invalid_argument);
  QuadratureSpec bad;
  bad.max_panel_depth = 0;
  REQUIRE_THROWS_AS(integrate_log(f, 0.0, 1.0, {}, bad),
                    std::invalid_argument);
  // breakpoints outside the range are ignored
  std::vector<double> bps{-5.0, 0.5, 7.0};
  LogMag r = integrate_log(f, 0.0, 1.0, bps);
  REQUIRE(std::fabs(r.log_value()) <= 1e-13);
}

TEST_CASE("integrate_log: convergence failure carries the last two estimates") {
  QuadratureSpec shallow;
  shallow.max_panel_depth = 4;
  auto f = [](double y) { return LogMag::from_log(50.0 * std::sin(1e6 * y)); };
  try {
    integrate_log(f, 0.0, 1.0, {}, shallow);
    FAIL("expected QuadratureError");
  } catch (const QuadratureError& e) {
    REQUIRE(e.panel_lo >= 0.0);
    REQUIRE(e.panel_hi <= 1.0);
    REQUIRE(e.panel_lo < e.panel_hi);
    // the two disagreeing estimates are reported with the failing panel
    REQUIRE(e.previous_estimate.log_value() != e.last_estimate.log_value());
  }
}
