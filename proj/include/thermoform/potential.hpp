#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "thermoform/shift.hpp"

namespace thermoform {

/// Locally constant function: f(xi) depends on xi_0 .. xi_{m-1} only.
/// Values are stored densely by word code; inadmissible slots are unused.
class Potential {
 public:
  static Potential zero(const ShiftSpace& space, int window, const Limits& limits = {});
  static Potential constant(const ShiftSpace& space, int window, double c, const Limits& limits = {});
  static Potential from_function(const ShiftSpace& space, int window,
                                 const std::function<double(SymbolSpan)>& fn,
                                 const Limits& limits = {});
  /// Every admissible window word must appear exactly once; no extra words.
  static Potential from_values(const ShiftSpace& space, int window,
                               const std::map<std::string, double>& values,
                               const Limits& limits = {});
  /// 1_[w]: indicator of the cylinder w at position 0.
  static Potential indicator(const ShiftSpace& space, SymbolSpan w, const Limits& limits = {});

  const ShiftSpace& space() const { return space_; }
  int window() const { return window_; }

  /// Value on a word of at least `window` symbols (only the first window count).
  double operator()(SymbolSpan w) const { return values_[word_code(w.first(window_), space_.alphabet_size())]; }
  double at_code(std::uint64_t code) const { return values_[code]; }

  /// Admissible window words in lexicographic order.
  const std::vector<std::uint64_t>& codes() const { return codes_; }
  WordList words() const;

  double max_value() const;
  double min_value() const;
  /// sup |f|
  double sup_norm() const;

  /// Same function read through a longer window.
  Potential extended(int window, const Limits& limits = {}) const;

  Potential& operator+=(const Potential& other);
  Potential& operator*=(double c);
  Potential& add_scaled(const Potential& other, double c);
  friend Potential operator+(Potential a, const Potential& b) { return a += b; }
  friend Potential operator*(double c, Potential a) { return a *= c; }

  /// f(xi) + g(tau xi) summed over the n windows starting at 0..n-1 of w
  /// (w needs n + window - 1 symbols).
  double birkhoff_sum(SymbolSpan w, int n) const;
  /// Sum over the n cyclic windows of a periodic word.
  double cyclic_birkhoff_sum(SymbolSpan cycle) const;

 private:
  Potential(ShiftSpace space, int window, std::vector<double> values, std::vector<std::uint64_t> codes)
      : space_(std::move(space)), window_(window), values_(std::move(values)), codes_(std::move(codes)) {}

  ShiftSpace space_;
  int window_;
  std::vector<double> values_;
  std::vector<std::uint64_t> codes_;
};

/// S = (g_1, ..., g_d), all read through a common window.
class ObservableFamily {
 public:
  explicit ObservableFamily(std::vector<Potential> members, const Limits& limits = {});

  std::size_t dimension() const { return members_.size(); }
  int window() const { return window_; }
  const ShiftSpace& space() const { return members_.front().space(); }
  const Potential& operator[](std::size_t j) const { return members_[j]; }
  const std::vector<Potential>& members() const { return members_; }

  /// tS = sum_j t_j g_j at the common window.
  Potential combination(std::span<const double> t) const;
  /// Vector of g_j evaluated on a word of at least window symbols.
  void evaluate(SymbolSpan w, std::span<double> out) const;

 private:
  std::vector<Potential> members_;
  int window_;
};

}  // namespace thermoform
