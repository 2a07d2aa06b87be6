#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace diagprod {

using BigInt = boost::multiprecision::cpp_int;

// An isoperimetric-style profile rho on [1, inf) with rho(1) = 1, rho
// non-decreasing and x / rho(x) non-decreasing. f(x) := x / rho(x).
class ProfileSpec {
 public:
  static ProfileSpec identity();
  static ProfileSpec power(double alpha);
  static ProfileSpec custom(std::function<double(double)> rho,
                            std::string label);

  double rho(double x) const;
  double f(double x) const;
  const std::string& label() const { return label_; }

  // Samples a geometric grid on [1, x_max] and throws std::invalid_argument
  // naming the first violated admissibility condition.
  void validate(double x_max = 1e15, int grid_points = 1000) const;

 private:
  ProfileSpec(std::function<double(double)> rho, std::string label)
      : rho_(std::move(rho)), label_(std::move(label)) {}
  std::function<double(double)> rho_;
  std::string label_;
};

// Geometric parameter sequences (k_m), (l_m). Entries k[m] are powers of
// kappa (k[0] = 0), entries l[m] are powers of lambda. When `terminated` is
// set, k_m = infinity for every m past the stored entries and l_m repeats
// the last stored value.
struct ParameterSchedule {
  int64_t kappa = 2;
  int64_t lambda = 2;
  std::vector<BigInt> k;
  std::vector<int> k_exp;  // k[m] == kappa^k_exp[m] for m >= 1; k_exp[0] = -1
  std::vector<BigInt> l;
  std::vector<int> l_exp;
  bool terminated = false;

  int max_level() const { return static_cast<int>(k.size()) - 1; }
  // True when k_m is infinite. Levels past the materialized prefix of a
  // non-terminated schedule are unknown and raise std::out_of_range.
  bool is_infinite(int m) const;
  const BigInt& k_value(int m) const;  // throws when infinite or unknown
  const BigInt& l_value(int m) const;
};

// Builds the schedule for `profile` by the breakpoint recurrence: given
// (k_m, l_m), the next k is the smallest admissible power of kappa at or
// above x*/l_m with x* = sup{x >= k_m l_m : f(x) <= l_m}, and the next l is
// the smallest power of lambda at or above the solution of l = f(k_{m+1} l).
// Profiles with f eventually constant terminate the k-sequence at infinity.
// `depth` bounds the number of finite positive k-levels.
ParameterSchedule synthesize(const ProfileSpec& profile, int64_t kappa,
                             int64_t lambda, int depth);

// Piecewise interpolant of f induced by the schedule: l_m on
// [k_m l_m, k_{m+1} l_m] and x / k_{m+1} on [k_{m+1} l_m, k_{m+1} l_{m+1}].
// Throws std::out_of_range past the last materialized segment.
double fbar(const ParameterSchedule& sched, double x);
double rhobar(const ParameterSchedule& sched, double x);

// little_l(n): the level m with k_m <= n < k_{m+1}.
// big_L(n) := little_l(kappa^n - 1).
int little_l(const ParameterSchedule& sched, const BigInt& n);
int big_L(const ParameterSchedule& sched, int n);

BigInt int_pow(int64_t base, int exponent);

}  // namespace diagprod
