#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "thermoform/measures.hpp"
#include "thermoform/potential.hpp"

namespace thermoform {

enum class Route { spectral, periodic, separated, strip, box };

std::string to_string(Route route);

struct PressureParameters {
  int n = 0;
  int r = 0;
  int width = 0;
  int box_rows = 0;
  int box_cols = 0;
};

/// Pressure estimate in nats per site.
struct PressureResult {
  Extended value;
  Route route;
  PressureParameters parameters;
};

/// Potential read on one transition of the recoded space: states are
/// admissible (W-1)-words (symbols when W = 1), and the edge u -> v carries
/// the W-word u + last(v) (just v when W = 1).
struct TransferMatrix {
  int window;
  int state_length;
  WordList states;
  /// exp(f - log_shift) on allowed edges, 0 elsewhere.
  Eigen::MatrixXd weights;
  double log_shift;
  bool primitive;

  struct Edge {
    int from;
    int to;
    std::uint64_t word;  ///< code of the W-word read on this edge
  };
  std::vector<Edge> edges;
};

TransferMatrix weighted_transfer_matrix(const ShiftSpace& space, const Potential& f,
                                        const Limits& limits = {});

/// Perron root and positive eigenvectors of a primitive nonnegative matrix.
struct PerronPair {
  double log_lambda;
  Eigen::VectorXd right;
  Eigen::VectorXd left;
  /// Final Collatz-Wielandt bracket width relative to lambda.
  double relative_gap;
};

/// Collatz-Wielandt iteration from the all-ones vector. The iterate is
/// advanced by repeated squares of the matrix, so spectral-gap ratios close
/// to one cost logarithmically many steps.
PerronPair perron_pair(const Eigen::MatrixXd& m);

/// Everything the spectral route produces for one potential.
struct SpectralSolution {
  TransferMatrix transfer;
  PerronPair perron;
  double pressure;
  /// Ruelle-Perron-Frobenius chain on transfer.states.
  Eigen::MatrixXd q;
  Eigen::VectorXd pi;
};

SpectralSolution spectral_solution(const ShiftSpace& space, const Potential& f, const Limits& limits = {});

PressureResult pressure_spectral(const ShiftSpace& space, const Potential& f, const Limits& limits = {});
MarkovMeasure equilibrium_state(const ShiftSpace& space, const Potential& f, const Limits& limits = {});
MarkovMeasure equilibrium_state(const SpectralSolution& solution, const ShiftSpace& space,
                                const Limits& limits = {});

/// (1/n) log sum over n-periodic points of exp(cyclic Birkhoff sum).
PressureResult pressure_periodic(const ShiftSpace& space, const Potential& f, int n,
                                 const Limits& limits = {});
/// (1/n) log sum over a maximal (2^-(r+1), n)-separated set.
PressureResult pressure_separated(const ShiftSpace& space, const Potential& f, int n, int r,
                                  const Limits& limits = {});

/// P(f) - (mu(f) + h(mu)); nonnegative by the variational principle.
double variational_gap(const ShiftSpace& space, const Potential& f, const InvariantMeasure& mu,
                       const Limits& limits = {});

/// Nearest-neighbour pair interaction on the 2-D full shift: nn(a, b) for an
/// ordered pair (left, right) or (top, bottom).
class PairInteraction {
 public:
  PairInteraction(int k, std::vector<double> values);
  static PairInteraction zero(int k) { return PairInteraction(k, std::vector<double>(k * k, 0.0)); }
  /// J * [a == b]
  static PairInteraction potts(int k, double coupling);

  int alphabet_size() const { return k_; }
  double operator()(int a, int b) const { return values_[a * k_ + b]; }

 private:
  int k_;
  std::vector<double> values_;
};

/// (1/w) log of the spectral radius of the k^w x k^w row transfer matrix
/// (periodic in the width direction).
PressureResult pressure_2d_strip(const PairInteraction& nn, int width, const Limits& limits = {});
/// (1/(a1 a2)) log sum over all doubly periodic a1 x a2 configurations of
/// exp(total bond energy). Every cell bonds to its right and lower neighbour
/// with wraparound, so each direction contributes a1*a2 bonds.
PressureResult pressure_2d_box(const PairInteraction& nn, int rows, int cols, const Limits& limits = {});

/// Row transfer matrix used by the strip route (exposed for cross-checks).
Eigen::MatrixXd strip_transfer_matrix(const PairInteraction& nn, int width, const Limits& limits = {});

}  // namespace thermoform
