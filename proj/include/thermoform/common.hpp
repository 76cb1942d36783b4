#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace thermoform {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input (bad matrix, missing potential word, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// An enumeration or table would exceed the configured item cap.
class CapExceeded : public Error {
 public:
  CapExceeded(const std::string& what, std::uint64_t cap)
      : Error(what + " exceeds enumeration cap " + std::to_string(cap)), cap_(cap) {}
  std::uint64_t cap() const { return cap_; }

 private:
  std::uint64_t cap_;
};

/// Spectral operations need a primitive transition matrix (unique equilibrium).
class NotPrimitive : public Error {
 public:
  NotPrimitive()
      : Error("uniqueness premise fails: transition matrix is not primitive, "
              "so a unique equilibrium state for every potential is not guaranteed") {}
};

class NonConvergence : public Error {
 public:
  using Error::Error;
};

struct Limits {
  std::uint64_t enumeration_cap = std::uint64_t{1} << 24;
  /// Configurations summed by the 2-D periodic-box engine (k^{a1 a2}).
  std::uint64_t box_budget = std::uint64_t{1} << 20;
  /// Largest strip width for the 2-D row transfer matrix.
  int max_strip_width = 6;
  unsigned jobs = 1;
};

/// Real number or one of the two infinities. Infinite values carry no payload,
/// so they cannot leak into arithmetic as sentinels.
class Extended {
 public:
  enum class Kind { finite, pos_inf, neg_inf };

  static Extended finite(double v) { return Extended(Kind::finite, v); }
  static Extended pos_inf() { return Extended(Kind::pos_inf, 0.0); }
  static Extended neg_inf() { return Extended(Kind::neg_inf, 0.0); }

  Kind kind() const { return kind_; }
  bool is_finite() const { return kind_ == Kind::finite; }
  bool is_pos_inf() const { return kind_ == Kind::pos_inf; }
  bool is_neg_inf() const { return kind_ == Kind::neg_inf; }

  double value() const {
    if (kind_ != Kind::finite) throw Error("value() on an infinite extended real");
    return value_;
  }

  /// Unwrapped value for display; infinities map to +/-inf.
  double as_double() const {
    switch (kind_) {
      case Kind::pos_inf: return std::numeric_limits<double>::infinity();
      case Kind::neg_inf: return -std::numeric_limits<double>::infinity();
      default: return value_;
    }
  }

  Extended operator-() const {
    switch (kind_) {
      case Kind::pos_inf: return neg_inf();
      case Kind::neg_inf: return pos_inf();
      default: return finite(-value_);
    }
  }

 private:
  Extended(Kind k, double v) : kind_(k), value_(v) {}
  Kind kind_;
  double value_;
};

/// Neumaier compensated summation. Merging two partial sums in a fixed
/// order gives results independent of how many threads produced them.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  void merge(const CompensatedSum& other) {
    add(other.sum_);
    add(other.comp_);
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Runs fn(i) for i in [0, count) on up to `jobs` threads. Callers write into
/// per-index slots and reduce afterwards in index order.
template <class Fn>
void parallel_for(std::size_t count, unsigned jobs, Fn&& fn) {
  if (jobs <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> workers;
  const unsigned n = static_cast<unsigned>(std::min<std::size_t>(jobs, count));
  std::vector<std::exception_ptr> errors(n);
  for (unsigned w = 0; w < n; ++w) {
    workers.emplace_back([&, w] {
      try {
        for (std::size_t i = next++; i < count; i = next++) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
        next = count;
      }
    });
  }
  workers.clear();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace thermoform
