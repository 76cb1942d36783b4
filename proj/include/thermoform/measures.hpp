#pragma once

#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "thermoform/potential.hpp"
#include "thermoform/shift.hpp"

namespace thermoform {

/// Unique stationary vector of an irreducible row-stochastic matrix.
/// Throws ValidationError naming the closed class when Q is reducible.
Eigen::VectorXd stationary_distribution(const Eigen::MatrixXd& q);

/// Stationary Markov measure of order m: the chain runs on admissible
/// m-words, moving u -> v only when v overlaps u in m-1 symbols.
class MarkovMeasure {
 public:
  /// Stationary vector computed from q (q must be irreducible).
  static MarkovMeasure from_transition(const ShiftSpace& space, int order, Eigen::MatrixXd q,
                                       const Limits& limits = {});
  /// Explicit stationary vector; allows reducible chains such as periodic orbits.
  static MarkovMeasure with_stationary(const ShiftSpace& space, int order, Eigen::MatrixXd q,
                                       Eigen::VectorXd pi, const Limits& limits = {});
  /// Product measure on a full shift.
  static MarkovMeasure bernoulli(const ShiftSpace& space, const std::vector<double>& p);
  /// Dirac measure on the periodic orbit of `cycle` (order = period).
  static MarkovMeasure periodic_orbit(const ShiftSpace& space, SymbolSpan cycle,
                                      const Limits& limits = {});

  const ShiftSpace& space() const { return space_; }
  int order() const { return order_; }
  const WordList& states() const { return states_; }
  const Eigen::MatrixXd& transition() const { return q_; }
  const Eigen::VectorXd& stationary() const { return pi_; }

  /// Index of an order-length word among states(), or -1.
  int state_index(SymbolSpan w) const;
  /// Whether states u -> v overlap and their concatenation is admissible.
  bool overlap_admissible(int u, int v) const;

  double cylinder_probability(SymbolSpan w) const;
  /// -sum pi_u Q_uv log Q_uv, in nats.
  double entropy_rate() const;

 private:
  MarkovMeasure(ShiftSpace space, int order, WordList states, std::vector<int> index)
      : space_(std::move(space)), order_(order), states_(std::move(states)), index_(std::move(index)) {}
  static MarkovMeasure skeleton(const ShiftSpace& space, int order, const Limits& limits);
  void validate_transition(Eigen::MatrixXd& q) const;

  ShiftSpace space_;
  int order_;
  WordList states_;
  std::vector<int> index_;
  Eigen::MatrixXd q_;
  Eigen::VectorXd pi_;
};

/// Finite convex combination of Markov measures on one base space.
class InvariantMeasure {
 public:
  struct Component {
    double weight;
    MarkovMeasure measure;
  };

  InvariantMeasure(const MarkovMeasure& m) : components_{{1.0, m}} {}  // NOLINT(google-explicit-constructor)
  explicit InvariantMeasure(std::vector<Component> components);

  const std::vector<Component>& components() const { return components_; }
  const ShiftSpace& space() const { return components_.front().measure.space(); }

 private:
  std::vector<Component> components_;
};

InvariantMeasure mix(const std::vector<std::pair<double, InvariantMeasure>>& parts);

double entropy_rate(const InvariantMeasure& mu);
double cylinder_probability(const InvariantMeasure& mu, SymbolSpan w);
/// mu(f) = sum over admissible window words w of mu([w]) f(w).
double integrate(const InvariantMeasure& mu, const Potential& f);
/// p_S(mu) = (mu(g_1), ..., mu(g_d)).
std::vector<double> moments(const InvariantMeasure& mu, const ObservableFamily& s);

/// (1/n) sum_x delta_{tau^x xi} for the n-periodic point xi generated by a cyclic word.
class EmpiricalOrbitMeasure {
 public:
  explicit EmpiricalOrbitMeasure(Word cycle) : cycle_(std::move(cycle)) {}
  const Word& cycle() const { return cycle_; }
  std::size_t period() const { return cycle_.size(); }
  /// Frequency of w as a cyclic factor of the cycle.
  double cylinder_probability(SymbolSpan w) const;

 private:
  Word cycle_;
};

struct OrbitEmpirical {
  std::vector<double> moments;
  EmpiricalOrbitMeasure measure;
};

OrbitEmpirical orbit_empirical(const ShiftSpace& space, SymbolSpan cycle, const ObservableFamily& s);

}  // namespace thermoform
