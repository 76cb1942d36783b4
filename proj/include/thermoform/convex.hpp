#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "thermoform/measures.hpp"
#include "thermoform/pressure.hpp"

namespace thermoform {

/// Q*(mu) = P(f) - h(mu) - mu(f). Zero exactly at equilibrium states of f.
double q_star(const ShiftSpace& space, const Potential& f, const InvariantMeasure& mu,
              const Limits& limits = {});

/// Indicators of the admissible n-cylinders at position 0, lexicographically
/// last one dropped (the full set sums to 1).
ObservableFamily cylinder_family(const ShiftSpace& space, int n, const Limits& limits = {});

struct DualOptions {
  double gradient_tolerance = 1e-9;
  /// sup-norm of t beyond which the dual is declared divergent.
  double divergence_bound = 1e3;
  int max_iterations = 500;
};

struct RateResult {
  enum class Status { converged, diverged, stalled };

  /// I_S(x); +inf when the dual diverges (x outside the closed moment range).
  Extended value = Extended::pos_inf();
  Status status = Status::stalled;
  /// Dual argmax t* (the last iterate unless converged).
  std::vector<double> t;
  /// Equilibrium state for f + t*S when converged.
  std::optional<MarkovMeasure> witness;
  double gradient_norm = 0.0;
  int iterations = 0;

  bool converged() const { return status == Status::converged; }
};

std::string to_string(RateResult::Status status);

/// L_S(t) = P(f + tS) - P(f) and its conjugate I_S = L_S^* for fixed (f, S).
/// rate_at is memoised; concurrent callers may duplicate work but always see
/// identical values.
class RateFunctionHandle {
 public:
  RateFunctionHandle(ShiftSpace space, Potential f, ObservableFamily s, DualOptions options = {},
                     Limits limits = {});

  const ShiftSpace& space() const { return space_; }
  const Potential& base() const { return f_; }
  const ObservableFamily& family() const { return s_; }
  std::size_t dimension() const { return s_.dimension(); }
  double base_pressure() const { return base_pressure_; }
  const DualOptions& options() const { return options_; }

  /// f + tS at the common window.
  Potential tilted(std::span<const double> t) const;

  double l_eval(std::span<const double> t) const;
  /// p_S of the equilibrium state for f + tS.
  std::vector<double> l_grad(std::span<const double> t) const;
  /// Hessian of L_S: the asymptotic covariance of S under the equilibrium state.
  Eigen::MatrixXd l_hessian(std::span<const double> t) const;
  /// l_grad(0): moments of the equilibrium state for f.
  std::vector<double> equilibrium_moments() const;

  /// sup_t <t, x> - L_S(t) by damped Newton ascent from t = 0.
  RateResult rate_at(std::span<const double> x) const;
  std::size_t cache_size() const;

 private:
  struct Evaluation {
    double l;
    Eigen::VectorXd moments;
    Eigen::MatrixXd hessian;
  };
  Evaluation evaluate(const Eigen::VectorXd& t, bool with_hessian) const;
  RateResult solve(std::span<const double> x) const;

  struct Cache {
    std::mutex mutex;
    std::map<std::vector<double>, RateResult> entries;
  };

  ShiftSpace space_;
  Potential f_;
  ObservableFamily s_;
  DualOptions options_;
  Limits limits_;
  double base_pressure_;
  std::unique_ptr<Cache> cache_;
};

/// Brute-force conjugate over sampled values of L on a grid of t (d <= 2).
/// Lower-bounds the true conjugate.
class GridConjugate {
 public:
  struct Sample {
    std::vector<double> t;
    double value;
  };

  GridConjugate(std::vector<Sample> samples, double step);

  double at(std::span<const double> x) const;
  /// step * |x|_inf + d * curvature * step^2 / 8, valid when the argmax lies
  /// inside the grid and L has curvature at most `curvature`.
  double gap_bound(std::span<const double> x, double curvature) const;
  std::size_t size() const { return samples_.size(); }

 private:
  std::vector<Sample> samples_;
  double step_;
};

/// Samples l on the cube [lo, hi]^d with spacing `step` and returns the grid conjugate.
GridConjugate grid_conjugate_oracle(const std::function<double(std::span<const double>)>& l, int d,
                                    double lo, double hi, double step);

struct ApproximationOptions {
  /// Interior perturbation weight for boundary moment vectors.
  double perturbation = 1e-6;
  DualOptions dual;
  Limits limits;
};

struct ApproximationStep {
  int window = 0;
  std::size_t family_size = 0;
  std::vector<double> target_moments;
  bool perturbed = false;
  std::vector<double> t;
  std::optional<MarkovMeasure> measure;
  double moment_error = 0.0;
  double entropy = 0.0;
  double entropy_gap = 0.0;
  bool converged = false;
  std::string diagnostics;
};

/// For n = 1..max_window, the equilibrium state of f + t_n S_n matching the
/// n-cylinder probabilities of `target` (S_n = cylinder_family(n)).
std::vector<ApproximationStep> entropy_approximation_sequence(const ShiftSpace& space, const Potential& f,
                                                              const InvariantMeasure& target, int max_window,
                                                              const ApproximationOptions& options = {});

}  // namespace thermoform
