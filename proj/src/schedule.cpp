#include "diagprod/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace diagprod {

namespace {

constexpr double kRelTol = 1e-9;
// Doubling past this point treats the searched quantity as infinite.
constexpr double kHuge = 1e250;

double to_double(const BigInt& v) { return v.convert_to<double>(); }

// Smallest exponent e >= floor_exp with base^e >= v, where values within
// relative kRelTol below a power snap onto that power.
int enclosing_exponent(double v, int64_t base, int floor_exp) {
  if (v <= 1.0) return std::max(0, floor_exp);
  double e = std::ceil(std::log(v) / std::log(static_cast<double>(base)) -
                       kRelTol);
  return std::max(static_cast<int>(e), floor_exp);
}

}  // namespace

BigInt int_pow(int64_t base, int exponent) {
  if (exponent < 0) throw std::invalid_argument("int_pow: negative exponent");
  BigInt out = 1;
  for (int i = 0; i < exponent; ++i) out *= base;
  return out;
}

ProfileSpec ProfileSpec::identity() {
  return ProfileSpec([](double x) { return x; }, "identity");
}

ProfileSpec ProfileSpec::power(double alpha) {
  if (!(alpha >= 0.0))
    throw std::invalid_argument("power profile needs alpha >= 0");
  double exp = 1.0 / (1.0 + alpha);
  return ProfileSpec([exp](double x) { return std::pow(x, exp); },
                     "power(alpha=" + std::to_string(alpha) + ")");
}

ProfileSpec ProfileSpec::custom(std::function<double(double)> rho,
                                std::string label) {
  return ProfileSpec(std::move(rho), std::move(label));
}

double ProfileSpec::rho(double x) const { return rho_(x); }

double ProfileSpec::f(double x) const { return x / rho_(x); }

void ProfileSpec::validate(double x_max, int grid_points) const {
  auto fail = [this](const std::string& what) {
    throw std::invalid_argument("profile '" + label_ + "': " + what);
  };
  if (std::abs(rho(1.0) - 1.0) > kRelTol) fail("rho(1) != 1");
  double prev_rho = 1.0;
  double prev_f = 1.0;
  double log_max = std::log(x_max);
  for (int i = 0; i <= grid_points; ++i) {
    double x = std::exp(log_max * i / grid_points);
    double r = rho(x);
    if (!std::isfinite(r) || r <= 0.0) fail("rho not finite positive");
    if (r < prev_rho * (1.0 - 1e-12)) fail("rho decreases");
    double fx = x / r;
    if (fx < prev_f * (1.0 - 1e-12)) fail("x/rho(x) decreases");
    if (fx < 1.0 - kRelTol) fail("rho(x) exceeds x");
    prev_rho = r;
    prev_f = fx;
  }
}

bool ParameterSchedule::is_infinite(int m) const {
  if (m < 0) throw std::invalid_argument("negative level");
  if (m <= max_level()) return false;
  if (terminated) return true;
  throw std::out_of_range("level beyond materialized schedule");
}

const BigInt& ParameterSchedule::k_value(int m) const {
  if (is_infinite(m)) throw std::out_of_range("k is infinite at this level");
  return k[m];
}

const BigInt& ParameterSchedule::l_value(int m) const {
  if (m < 0) throw std::invalid_argument("negative level");
  if (m <= max_level()) return l[m];
  if (terminated) return l.back();
  throw std::out_of_range("level beyond materialized schedule");
}

ParameterSchedule synthesize(const ProfileSpec& profile, int64_t kappa,
                             int64_t lambda, int depth) {
  if (kappa < 2 || lambda < 2)
    throw std::invalid_argument("kappa and lambda must be >= 2");
  if (depth < 0) throw std::invalid_argument("negative depth");
  profile.validate();

  ParameterSchedule s;
  s.kappa = kappa;
  s.lambda = lambda;
  s.k = {BigInt(0)};
  s.k_exp = {-1};
  s.l = {BigInt(1)};
  s.l_exp = {0};

  for (int m = 0; m < depth; ++m) {
    double lm = to_double(s.l[m]);
    double x_lo = std::max(to_double(s.k[m] * s.l[m]), 1.0);
    double x_star;
    if (profile.f(x_lo) > lm * (1.0 + kRelTol)) {
      x_star = x_lo;
    } else {
      double lo = x_lo;
      while (lo < kHuge && profile.f(2.0 * lo) <= lm) lo *= 2.0;
      if (lo >= kHuge) {
        s.terminated = true;
        break;
      }
      double hi = 2.0 * lo;
      for (int it = 0; it < 200 && hi - lo > 1e-12 * lo; ++it) {
        double mid = lo + (hi - lo) / 2.0;
        (profile.f(mid) <= lm ? lo : hi) = mid;
      }
      x_star = lo;
    }

    int k_floor = (m == 0) ? 1 : s.k_exp[m] + 1;
    int ke = enclosing_exponent(x_star / lm, kappa, k_floor);
    BigInt k_next = int_pow(kappa, ke);
    double kd = to_double(k_next);

    // Solve l = f(k_next * l); f(k l)/l is non-increasing in l, so the
    // crossing is unique. f(k_next * 1) >= 1 by monotonicity.
    double l_hi = 1.0;
    while (l_hi < kHuge && profile.f(kd * l_hi) > l_hi) l_hi *= 2.0;
    if (l_hi >= kHuge)
      throw std::domain_error(
          "profile '" + profile.label() +
          "' admits no finite lamp size at level " + std::to_string(m + 1));
    double l_lo = std::max(l_hi / 2.0, 1.0);
    for (int it = 0; it < 200 && l_hi - l_lo > 1e-12 * l_lo; ++it) {
      double mid = l_lo + (l_hi - l_lo) / 2.0;
      (profile.f(kd * mid) > mid ? l_lo : l_hi) = mid;
    }
    int le = enclosing_exponent(l_hi, lambda, s.l_exp[m]);

    s.k.push_back(k_next);
    s.k_exp.push_back(ke);
    s.l.push_back(int_pow(lambda, le));
    s.l_exp.push_back(le);
  }
  return s;
}

double fbar(const ParameterSchedule& s, double x) {
  if (!std::isfinite(x) || x < 0.0)
    throw std::invalid_argument("fbar needs finite x >= 0");
  for (int m = 0; m <= s.max_level(); ++m) {
    if (m == s.max_level()) {
      if (s.terminated) return to_double(s.l[m]);
      throw std::out_of_range("x beyond last materialized segment");
    }
    if (x <= to_double(s.k[m + 1] * s.l[m])) return to_double(s.l[m]);
    if (x <= to_double(s.k[m + 1] * s.l[m + 1]))
      return x / to_double(s.k[m + 1]);
  }
  throw std::out_of_range("empty schedule");
}

double rhobar(const ParameterSchedule& s, double x) { return x / fbar(s, x); }

int little_l(const ParameterSchedule& s, const BigInt& n) {
  if (n < 0) throw std::invalid_argument("little_l needs n >= 0");
  auto it = std::upper_bound(s.k.begin(), s.k.end(), n);
  if (it == s.k.end()) {
    if (s.terminated) return s.max_level();
    throw std::out_of_range("n beyond materialized schedule");
  }
  return static_cast<int>(it - s.k.begin()) - 1;
}

int big_L(const ParameterSchedule& s, int n) {
  if (n < 0) throw std::invalid_argument("big_L needs n >= 0");
  return little_l(s, int_pow(s.kappa, n) - 1);
}

}  // namespace diagprod
