#pragma once

#include <string>
#include <vector>

#include "thermoform/convex.hpp"

namespace thermoform {

enum class Variant { periodic, separated, gibbs };

std::string to_string(Variant v);
Variant parse_variant(const std::string& name);

/// Finite distribution of moment vectors p_S(empirical measure) at size n.
struct WeightedPointCloud {
  struct Atom {
    double weight;
    std::vector<double> point;
  };
  std::vector<Atom> atoms;
  int n = 0;
  Variant provenance = Variant::gibbs;

  double total_weight() const;
  std::size_t dimension() const { return atoms.empty() ? 0 : atoms.front().point.size(); }
};

/// Sorts atoms by point and merges points equal within `tolerance` per coordinate.
void merge_atoms(WeightedPointCloud& cloud, double tolerance = 1e-12);

struct BoxQuery {
  std::vector<double> lo;
  std::vector<double> hi;
  std::vector<bool> lo_closed;
  std::vector<bool> hi_closed;

  static BoxQuery closed(std::vector<double> lo, std::vector<double> hi);
  std::size_t dimension() const { return lo.size(); }
  bool contains(const std::vector<double>& x) const;
  /// Same box with every face closed.
  BoxQuery closure() const;
  void validate() const;
  std::string str() const;
};

/// Weights exp(cyclic Birkhoff sum of f) over the n-periodic points.
WeightedPointCloud empirical_distribution_periodic(const ShiftSpace& space, const Potential& f, int n,
                                                   const ObservableFamily& s, const Limits& limits = {});
/// Weights exp(S_n f) over canonical extensions of the admissible (n+r)-words.
WeightedPointCloud empirical_distribution_separated(const ShiftSpace& space, const Potential& f, int n, int r,
                                                    const ObservableFamily& s, const Limits& limits = {});
/// Law of the moment vector of the first n windows under the equilibrium
/// state of f_base. Built by dynamic programming over (recent symbols,
/// accumulated sums), so merged atoms keep the cost polynomial in n.
WeightedPointCloud empirical_distribution_gibbs(const ShiftSpace& space, const Potential& f_base, int n,
                                                const ObservableFamily& s, const Limits& limits = {});
/// Same law by enumerating every word of length n + window - 1.
WeightedPointCloud empirical_distribution_gibbs_enumerated(const ShiftSpace& space, const Potential& f_base,
                                                           int n, const ObservableFamily& s,
                                                           const Limits& limits = {});

struct RateEstimate {
  double mass = 0.0;
  /// (1/n) log mass; -inf when the mass is zero.
  Extended value = Extended::neg_inf();
};

RateEstimate rate_estimate(const WeightedPointCloud& cloud, const BoxQuery& box);

struct BoxInfimum {
  /// inf over the box of I_S; +inf when the box misses the moment range.
  Extended value = Extended::pos_inf();
  std::vector<double> argmin;
  /// Grid resolution error bound (d = 2 only).
  double grid_bound = 0.0;
};

BoxInfimum inf_rate_over_box(const RateFunctionHandle& handle, const BoxQuery& box);

struct LdpRow {
  Variant variant;
  int n;
  std::string box;
  double mass;
  Extended rate_estimate;
  Extended neg_inf_rate;
  double slack;
  /// neg_inf_rate - rate_estimate, when both are finite.
  Extended gap;
};

struct LdpOptions {
  int r = 0;
  DualOptions dual;
  Limits limits;
};

/// One row per n. The closed-box upper bound reads
/// rate_estimate <= neg_inf_rate + slack, slack = d log(n+1) / n.
std::vector<LdpRow> ldp_report(const ShiftSpace& space, const Potential& f, const ObservableFamily& s,
                               const BoxQuery& box, const std::vector<int>& ns, Variant variant,
                               const LdpOptions& options = {});

}  // namespace thermoform
