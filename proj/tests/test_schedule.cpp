#include "diagprod/schedule.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"

using namespace diagprod;

namespace {

ProfileSpec log_profile() {
  // rho(x) = x / (1 + ln x): admissible, with f(x) = 1 + ln x.
  return ProfileSpec::custom(
      [](double x) { return x / (1.0 + std::log(x)); }, "x/(1+ln x)");
}

ProfileSpec bounded_ratio_profile() {
  // rho(x) = (x + 1)/2: f(x) = 2x/(x+1) increases to 2 without reaching it.
  return ProfileSpec::custom([](double x) { return 0.5 * (x + 1.0); },
                             "(x+1)/2");
}

void check_structural(const ParameterSchedule& s) {
  REQUIRE(s.k.size() == s.l.size());
  REQUIRE(s.k.size() == s.k_exp.size());
  REQUIRE(s.l.size() == s.l_exp.size());
  CHECK(s.k[0] == 0);
  CHECK(s.l[0] == 1);
  for (int m = 1; m <= s.max_level(); ++m) {
    CHECK(s.k[m] == int_pow(s.kappa, s.k_exp[m]));
    CHECK(s.k[m] > s.k[m - 1]);
    CHECK(s.k[m] >= 2 * s.k[m - 1]);
  }
  for (int m = 0; m <= s.max_level(); ++m) {
    CHECK(s.l[m] == int_pow(s.lambda, s.l_exp[m]));
    if (m > 0) CHECK(s.l[m] >= s.l[m - 1]);
  }
}

}  // namespace

TEST_CASE("power profiles synthesize exact geometric sequences") {
  struct Case {
    double alpha;
    int64_t kappa, lambda;
  };
  for (const Case& c : {Case{1, 2, 2}, Case{2, 2, 4}, Case{3, 2, 8},
                        Case{2, 3, 9}}) {
    CAPTURE(c.alpha);
    CAPTURE(c.kappa);
    ParameterSchedule s =
        synthesize(ProfileSpec::power(c.alpha), c.kappa, c.lambda, 40);
    check_structural(s);
    CHECK_FALSE(s.terminated);
    REQUIRE(s.max_level() == 40);
    for (int m = 1; m <= 40; ++m) {
      CHECK(s.k[m] == int_pow(c.kappa, m));
      CHECK(s.l[m] == int_pow(c.lambda, m));
    }
  }
  ParameterSchedule q = synthesize(ProfileSpec::power(2.0), 2, 4, 40);
  CHECK(q.l[40].str() == "1208925819614629174706176");  // 2^80
}

TEST_CASE("flat profiles terminate the k sequence") {
  for (const ProfileSpec& p :
       {ProfileSpec::identity(), ProfileSpec::power(0.0)}) {
    ParameterSchedule s = synthesize(p, 2, 2, 40);
    check_structural(s);
    CHECK(s.terminated);
    CHECK(s.max_level() == 0);
    CHECK(s.l == std::vector<BigInt>{1});
    CHECK(fbar(s, 1e9) == 1.0);
    CHECK(rhobar(s, 1e9) == 1e9);
    CHECK(s.is_infinite(1));
    CHECK(s.is_infinite(7));
    CHECK(s.l_value(7) == 1);
    CHECK_THROWS_AS(s.k_value(1), std::out_of_range);
  }
  // f bounded above by 2: one finite level, then the sup diverges.
  ParameterSchedule s = synthesize(bounded_ratio_profile(), 2, 2, 10);
  check_structural(s);
  CHECK(s.terminated);
  CHECK(s.max_level() == 1);
  CHECK(s.k[1] == 2);
  CHECK(s.l[1] == 2);
}

TEST_CASE("half power profile follows the hand-derived pattern") {
  // alpha = 1/2: solving l = (kappa^{m+1} l)^{1/3} gives l = 2^{(m+1)/2},
  // rounded up to powers of two, while the sup recurrence revisits the same
  // breakpoint and the admissibility floor advances k by single steps.
  ParameterSchedule s = synthesize(ProfileSpec::power(0.5), 2, 2, 30);
  check_structural(s);
  CHECK_FALSE(s.terminated);
  REQUIRE(s.max_level() == 30);
  for (int m = 1; m <= 30; ++m) {
    CHECK(s.k_exp[m] == m);
    CHECK(s.l_exp[m] == (m + 1) / 2);
  }
}

TEST_CASE("generic profile synthesis keeps the structural invariants") {
  ParameterSchedule s = synthesize(log_profile(), 2, 2, 8);
  check_structural(s);
  CHECK_FALSE(s.terminated);
  CHECK(s.max_level() == 8);
  CHECK(s.k_exp[1] == 1);
  // k grows roughly like exp(l_m), so exponents accelerate.
  for (int m = 2; m <= 8; ++m) CHECK(s.k_exp[m] > s.k_exp[m - 1] + 1);
}

TEST_CASE("interpolant tracks the profile within a bounded factor") {
  struct Case {
    ProfileSpec p;
    int64_t kappa, lambda;
    int depth;
    double factor;  // bound on max(f/fbar, fbar/f)
  };
  const std::vector<Case> cases = {
      {ProfileSpec::power(1.0), 2, 2, 40, std::sqrt(2.0)},
      {ProfileSpec::power(2.0), 2, 4, 40, std::pow(2.0, 2.0 / 3.0)},
      {ProfileSpec::power(0.5), 2, 2, 40, 4.0},
      {log_profile(), 2, 2, 8, 4.0},
  };
  for (const Case& c : cases) {
    CAPTURE(c.p.label());
    ParameterSchedule s = synthesize(c.p, c.kappa, c.lambda, c.depth);
    double log_max = std::log(1e12);
    for (int i = 0; i <= 500; ++i) {
      double x = std::exp(log_max * i / 500);
      double fb = fbar(s, x);
      double fx = c.p.f(x);
      CAPTURE(x);
      // Rounding l up to a power of lambda can push the interpolant above
      // f, so the bound is two-sided.
      CHECK(fb <= fx * c.factor * (1.0 + 1e-9));
      CHECK(fx <= fb * c.factor * (1.0 + 1e-9));
    }
  }
}

TEST_CASE("interpolant breakpoints and monotonicity") {
  ParameterSchedule s = synthesize(ProfileSpec::power(1.0), 2, 2, 40);
  CHECK(fbar(s, 4.0) == 2.0);
  CHECK(fbar(s, 0.0) == 1.0);
  CHECK(fbar(s, 1.0) == 1.0);
  for (int m = 1; m <= 20; ++m) {
    // Flat piece ends where the sloped piece starts; both give l at the
    // joint, and the sloped piece ends where the next flat piece starts.
    double joint1 = (s.k[m] * s.l[m - 1]).convert_to<double>();
    double joint2 = (s.k[m] * s.l[m]).convert_to<double>();
    CHECK(fbar(s, joint1) == s.l[m - 1].convert_to<double>());
    CHECK(fbar(s, joint2) == s.l[m].convert_to<double>());
    CHECK(fbar(s, joint1 * (1 + 1e-13)) ==
          doctest::Approx(fbar(s, joint1)).epsilon(1e-9));
    CHECK(fbar(s, joint2 * (1 + 1e-13)) ==
          doctest::Approx(fbar(s, joint2)).epsilon(1e-9));
  }
  double prev_f = 0.0, prev_r = 0.0;
  for (int i = 0; i <= 1000; ++i) {
    double x = std::exp(std::log(1e12) * i / 1000);
    double fb = fbar(s, x), rb = rhobar(s, x);
    CHECK(fb >= prev_f * (1 - 1e-12));
    CHECK(rb >= prev_r * (1 - 1e-12));
    prev_f = fb;
    prev_r = rb;
  }
}

TEST_CASE("index maps satisfy their defining inequalities") {
  ParameterSchedule s = synthesize(ProfileSpec::power(1.0), 2, 2, 40);
  CHECK(little_l(s, 6) == 2);  // k_2 = 4 <= 6 < 8 = k_3
  CHECK(little_l(s, 0) == 0);
  CHECK(little_l(s, 1) == 0);
  CHECK(little_l(s, 2) == 1);
  for (int n = 0; n <= 5000; ++n) {
    int m = little_l(s, n);
    REQUIRE(s.k[m] <= n);
    REQUIRE(s.k[m + 1] > n);
  }
  CHECK(big_L(s, 0) == 0);
  for (int n = 1; n <= 40; ++n) CHECK(big_L(s, n) == n - 1);
}

TEST_CASE("consecutive truncation levels land on adjacent k levels") {
  struct Case {
    ProfileSpec p;
    int64_t kappa, lambda;
    int depth, n_max;
  };
  const std::vector<Case> cases = {
      {ProfileSpec::power(1.0), 2, 2, 40, 39},
      {ProfileSpec::power(2.0), 2, 4, 40, 39},
      {ProfileSpec::power(0.5), 2, 2, 30, 29},
      {ProfileSpec::power(2.0), 3, 9, 30, 29},
      {log_profile(), 2, 2, 8, 300},
      {ProfileSpec::identity(), 2, 2, 5, 50},
  };
  for (const Case& c : cases) {
    CAPTURE(c.p.label());
    ParameterSchedule s = synthesize(c.p, c.kappa, c.lambda, c.depth);
    for (int n = 0; n < c.n_max; ++n) {
      int cur = big_L(s, n);
      int nxt = big_L(s, n + 1);
      CHECK(nxt <= n + 1);
      REQUIRE((nxt == cur || nxt == cur + 1));
      if (nxt == cur + 1) CHECK(s.k[nxt] == int_pow(c.kappa, n));
    }
  }
}

TEST_CASE("scaled arguments scale the interpolated inverse profile") {
  for (const auto& [p, lambda] :
       {std::pair{ProfileSpec::power(1.0), int64_t{2}},
        std::pair{ProfileSpec::power(2.0), int64_t{4}},
        std::pair{log_profile(), int64_t{2}}}) {
    ParameterSchedule s = synthesize(p, 2, lambda, p.label() == "x/(1+ln x)"
                                                       ? 8
                                                       : 40);
    for (double c : {0.05, 0.3, 0.9}) {
      for (int i = 0; i <= 200; ++i) {
        double x = (1.0 / c) * std::exp(std::log(1e10) * i / 200);
        CAPTURE(c);
        CAPTURE(x);
        CHECK(c * rhobar(s, x) <= rhobar(s, c * x) * (1.0 + 1e-9));
      }
    }
  }
}

TEST_CASE("truncation powers evaluate the inverse profile exactly") {
  ParameterSchedule s = synthesize(ProfileSpec::power(1.0), 2, 2, 40);
  for (int n = 0; n <= 35; ++n) {
    double x = int_pow(2, n).convert_to<double>() *
               s.l[big_L(s, n)].convert_to<double>();
    CHECK(rhobar(s, x) == int_pow(2, n).convert_to<double>());
  }
}

TEST_CASE("inadmissible profiles and parameters are rejected") {
  CHECK_THROWS_AS(
      synthesize(ProfileSpec::custom([](double x) { return 2.0 * x; }, "2x"),
                 2, 2, 5),
      std::invalid_argument);
  CHECK_THROWS_AS(
      synthesize(ProfileSpec::custom([](double x) { return x * x; }, "x^2"),
                 2, 2, 5),
      std::invalid_argument);
  CHECK_THROWS_AS(
      synthesize(ProfileSpec::custom([](double x) { return 1.0 / x; }, "1/x"),
                 2, 2, 5),
      std::invalid_argument);
  CHECK_THROWS_AS(synthesize(ProfileSpec::identity(), 1, 2, 5),
                  std::invalid_argument);
  CHECK_THROWS_AS(synthesize(ProfileSpec::identity(), 2, 2, -1),
                  std::invalid_argument);
  CHECK_THROWS_AS(ProfileSpec::power(-0.5), std::invalid_argument);
  // rho plateaus at 4 while f keeps growing: no l solves l = f(k l) once
  // k exceeds the plateau.
  CHECK_THROWS_AS(
      synthesize(ProfileSpec::custom(
                     [](double x) { return std::min(x, 4.0); }, "min(x,4)"),
                 2, 2, 3),
      std::domain_error);
}

TEST_CASE("queries outside the materialized range are reported") {
  ParameterSchedule s = synthesize(ProfileSpec::power(1.0), 2, 2, 3);
  CHECK_FALSE(s.terminated);
  double covered = (s.k[3] * s.l[3]).convert_to<double>();
  CHECK_NOTHROW(fbar(s, covered));
  CHECK_THROWS_AS(fbar(s, covered * 1.01), std::out_of_range);
  CHECK_THROWS_AS(fbar(s, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(little_l(s, BigInt(-1)), std::invalid_argument);
  CHECK_THROWS_AS(little_l(s, s.k[3] * 2), std::out_of_range);
  CHECK_THROWS_AS(s.is_infinite(4), std::out_of_range);
  CHECK_THROWS_AS(s.l_value(4), std::out_of_range);
  CHECK(s.k_value(3) == 8);
  CHECK(int_pow(2, 10) == 1024);
  CHECK(int_pow(5, 0) == 1);
  CHECK_THROWS_AS(int_pow(2, -1), std::invalid_argument);
}
