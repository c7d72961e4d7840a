// SPDX-License-Identifier: Apache-2.0
#ifndef POLLING_MODEL_DISTRIBUTION_HPP
#define POLLING_MODEL_DISTRIBUTION_HPP

#include <cmath>
#include <cstdio>
#include <string>
#include <string_view>

#include "polling/error.hpp"
#include "polling/random.hpp"

namespace polling {

enum class Family { deterministic, exponential, erlang, uniform };

inline std::string_view to_string(Family f) {
  switch (f) {
    case Family::deterministic: return "deterministic";
    case Family::exponential: return "exponential";
    case Family::erlang: return "erlang";
    case Family::uniform: return "uniform";
  }
  return "?";
}

/**
 * Nonnegative random time with closed-form moments and Laplace-Stieltjes
 * transform. Used for service times (per queue) and switchover times (per
 * stage). Immutable; parameters are checked by the named constructors.
 */
class DistributionSpec {
 public:
  static DistributionSpec deterministic(double value) {
    if (!(value >= 0.0) || !std::isfinite(value))
      throw DomainError("deterministic value must be finite and >= 0");
    return DistributionSpec(Family::deterministic, value, 0.0, 1);
  }

  static DistributionSpec exponential(double rate) {
    if (!(rate > 0.0) || !std::isfinite(rate)) throw DomainError("exponential rate must be > 0");
    return DistributionSpec(Family::exponential, rate, 0.0, 1);
  }

  static DistributionSpec erlang(int shape, double rate) {
    if (shape < 1) throw DomainError("erlang shape must be a positive integer");
    if (!(rate > 0.0) || !std::isfinite(rate)) throw DomainError("erlang rate must be > 0");
    return DistributionSpec(Family::erlang, rate, 0.0, shape);
  }

  static DistributionSpec uniform(double lower, double upper) {
    if (!(lower >= 0.0) || !(upper > lower) || !std::isfinite(upper))
      throw DomainError("uniform bounds must satisfy 0 <= lower < upper");
    return DistributionSpec(Family::uniform, lower, upper, 1);
  }

  Family family() const { return family_; }
  // Raw parameters: deterministic(value), exponential(rate), erlang(rate; shape()),
  // uniform(lower, upper).
  double param1() const { return a_; }
  double param2() const { return b_; }
  int shape() const { return shape_; }

  double mean() const {
    switch (family_) {
      case Family::deterministic: return a_;
      case Family::exponential: return 1.0 / a_;
      case Family::erlang: return shape_ / a_;
      case Family::uniform: return 0.5 * (a_ + b_);
    }
    return 0.0;
  }

  double second_moment() const {
    switch (family_) {
      case Family::deterministic: return a_ * a_;
      case Family::exponential: return 2.0 / (a_ * a_);
      case Family::erlang: return shape_ * (shape_ + 1.0) / (a_ * a_);
      case Family::uniform: return (a_ * a_ + a_ * b_ + b_ * b_) / 3.0;
    }
    return 0.0;
  }

  double variance() const { return second_moment() - mean() * mean(); }

  /// E[exp(-u X)] for u >= 0.
  template <class Real = double>
  Real lst(Real u) const {
    using std::exp;
    using std::log1p;
    check_argument(static_cast<double>(u));
    const Real a = static_cast<Real>(a_);
    switch (family_) {
      case Family::deterministic: return exp(-u * a);
      case Family::exponential: return a / (a + u);
      case Family::erlang: return exp(-static_cast<Real>(shape_) * log1p(u / a));
      case Family::uniform: {
        const Real x = u * (static_cast<Real>(b_) - a);
        return exp(-u * a) * (Real(1) - uniform_kernel_complement(x));
      }
    }
    return Real(1);
  }

  /// 1 - E[exp(-u X)], evaluated without cancellation for small u.
  template <class Real = double>
  Real lst_complement(Real u) const {
    using std::expm1;
    using std::exp;
    using std::log1p;
    check_argument(static_cast<double>(u));
    const Real a = static_cast<Real>(a_);
    switch (family_) {
      case Family::deterministic: return -expm1(-u * a);
      case Family::exponential: return u / (a + u);
      case Family::erlang: return -expm1(-static_cast<Real>(shape_) * log1p(u / a));
      case Family::uniform: {
        // lst = e^{-u lo} g(u w), g(x) = (1 - e^{-x})/x, w = hi - lo
        const Real w = static_cast<Real>(b_) - a;
        const Real x = u * w;
        const Real one_minus_g = uniform_kernel_complement(x);
        const Real g = Real(1) - one_minus_g;
        return one_minus_g + g * (-expm1(-u * a));
      }
    }
    return Real(0);
  }

  /// One draw; always >= 0.
  template <Uniform64 G>
  double sample(G& rng) const {
    switch (family_) {
      case Family::deterministic: return a_;
      case Family::exponential: return -std::log(uniform01(rng)) / a_;
      case Family::erlang: {
        double total = 0.0;
        for (int t = 0; t < shape_; ++t) total -= std::log(uniform01(rng));
        return total / a_;
      }
      case Family::uniform: return a_ + (b_ - a_) * (1.0 - uniform01(rng));
    }
    return 0.0;
  }

  /// Same family with the mean multiplied by `factor` (> 0).
  DistributionSpec scaled(double factor) const {
    if (!(factor > 0.0)) throw DomainError("scale factor must be > 0");
    switch (family_) {
      case Family::deterministic: return deterministic(a_ * factor);
      case Family::exponential: return exponential(a_ / factor);
      case Family::erlang: return erlang(shape_, a_ / factor);
      case Family::uniform: return uniform(a_ * factor, b_ * factor);
    }
    return *this;
  }

  bool is_zero() const { return family_ == Family::deterministic && a_ == 0.0; }

  std::string describe() const {
    switch (family_) {
      case Family::deterministic: return "Det(" + fmt(a_) + ")";
      case Family::exponential: return "Exp(" + fmt(a_) + ")";
      case Family::erlang: return "Erlang(" + std::to_string(shape_) + "," + fmt(a_) + ")";
      case Family::uniform: return "Uniform(" + fmt(a_) + "," + fmt(b_) + ")";
    }
    return "?";
  }

  friend bool operator==(const DistributionSpec&, const DistributionSpec&) = default;

 private:
  DistributionSpec(Family f, double a, double b, int shape) : family_(f), a_(a), b_(b), shape_(shape) {}

  static void check_argument(double u) {
    if (!(u >= 0.0)) throw DomainError("LST argument must be >= 0");
  }

  // 1 - (1 - e^{-x})/x
  template <class Real>
  static Real uniform_kernel_complement(Real x) {
    if (x < Real(0.1)) {
      // x/2! - x^2/3! + x^3/4! - ...
      Real term = Real(1);
      Real sum = Real(0);
      for (int n = 1; n <= 14; ++n) {
        term *= x / Real(n + 1);
        sum += (n % 2 == 1) ? term : -term;
      }
      return sum;
    }
    using std::expm1;
    return Real(1) + expm1(-x) / x;
  }

  static std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
  }

  Family family_;
  double a_;
  double b_;
  int shape_;
};

/// Moment of order 1 or 2.
inline double distribution_moment(const DistributionSpec& spec, int order) {
  switch (order) {
    case 1: return spec.mean();
    case 2: return spec.second_moment();
    default: throw DomainError("distribution_moment supports orders 1 and 2, got " + std::to_string(order));
  }
}

inline double distribution_lst(const DistributionSpec& spec, double u) { return spec.lst(u); }

}  // namespace polling

#endif  // POLLING_MODEL_DISTRIBUTION_HPP
