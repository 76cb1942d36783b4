#include "thermoform/pressure.hpp"

#include <algorithm>
#include <limits>

#include "thermoform/reduce.hpp"

namespace thermoform {

namespace {

// exp() floor relative to the largest entry; keeps the support intact for
// dual points of norm ~1e3.
constexpr double kLogFloor = -700.0;
constexpr double kBracketTolerance = 1e-12;

struct Bracket {
  double lo;
  double hi;
};

Bracket collatz_wielandt(const Eigen::MatrixXd& a, const Eigen::VectorXd& x) {
  const Eigen::VectorXd y = a * x;
  Bracket b{std::numeric_limits<double>::infinity(), 0.0};
  for (int i = 0; i < x.size(); ++i) {
    if (x(i) <= 0.0) return {0.0, std::numeric_limits<double>::infinity()};
    const double ratio = y(i) / x(i);
    b.lo = std::min(b.lo, ratio);
    b.hi = std::max(b.hi, ratio);
  }
  return b;
}

bool converged(const Bracket& b) { return b.hi - b.lo <= kBracketTolerance * b.hi; }

struct PerronVector {
  Eigen::VectorXd x;
  Bracket bracket;
};

PerronVector perron_vector(const Eigen::MatrixXd& a) {
  const int n = static_cast<int>(a.rows());
  Eigen::VectorXd x = Eigen::VectorXd::Ones(n);
  Eigen::MatrixXd power = a / a.maxCoeff();
  // x_{j+1} = A^{2^j} x_j
  for (int iter = 0; iter < 80; ++iter) {
    const Bracket b = collatz_wielandt(a, x);
    if (converged(b)) return {x, b};
    x = power * x;
    x /= x.maxCoeff();
    power = power * power;
    power /= power.maxCoeff();
  }
  for (int iter = 0; iter < 100000; ++iter) {
    const Bracket b = collatz_wielandt(a, x);
    if (converged(b)) return {x, b};
    x = a * x;
    x /= x.maxCoeff();
  }
  throw NonConvergence("Perron iteration did not reach the Collatz-Wielandt tolerance");
}

void require_primitive(const ShiftSpace& space) {
  detail::require_one_dimensional(space, "spectral pressure");
  if (!space.is_primitive()) throw NotPrimitive();
}

}  // namespace

std::string to_string(Route route) {
  switch (route) {
    case Route::spectral: return "spectral";
    case Route::periodic: return "periodic";
    case Route::separated: return "separated";
    case Route::strip: return "strip";
    case Route::box: return "box";
  }
  return "unknown";
}

TransferMatrix weighted_transfer_matrix(const ShiftSpace& space, const Potential& f, const Limits& limits) {
  detail::require_one_dimensional(space, "weighted_transfer_matrix");
  if (!(f.space() == space)) throw ValidationError("potential lives on a different space");
  const int w = f.window();
  const int len = std::max(w - 1, 1);
  const int k = space.alphabet_size();
  TransferMatrix tm{w, len, admissible_words(space, len, limits), {}, f.max_value(), space.is_primitive(), {}};
  const int n = static_cast<int>(tm.states.size());
  std::vector<int> index(*checked_power(k, len, std::numeric_limits<std::uint64_t>::max()), -1);
  for (int i = 0; i < n; ++i) index[word_code(tm.states[i], k)] = i;

  tm.weights = Eigen::MatrixXd::Zero(n, n);
  std::vector<Symbol> next(len);
  for (int u = 0; u < n; ++u) {
    const auto su = tm.states[u];
    const std::uint64_t su_code = word_code(su, k);
    for (Symbol b : space.successors(su.back())) {
      std::copy(su.begin() + 1, su.end(), next.begin());
      next[len - 1] = b;
      const std::uint64_t word = w == 1 ? b : su_code * k + b;
      const int v = index[word_code(next, k)];
      const double z = std::max(f.at_code(word) - tm.log_shift, kLogFloor);
      tm.weights(u, v) = std::exp(z);
      tm.edges.push_back({u, v, word});
    }
  }
  return tm;
}

PerronPair perron_pair(const Eigen::MatrixXd& m) {
  if (m.rows() == 0 || m.rows() != m.cols()) throw ValidationError("perron_pair needs a square matrix");
  if (!(m.maxCoeff() > 0.0)) throw ValidationError("perron_pair needs a nonzero nonnegative matrix");
  const PerronVector right = perron_vector(m);
  const PerronVector left = perron_vector(m.transpose());
  const double lambda = 0.5 * (right.bracket.lo + right.bracket.hi);
  return {std::log(lambda), right.x / right.x.sum(), left.x / left.x.sum(),
          (right.bracket.hi - right.bracket.lo) / right.bracket.hi};
}

SpectralSolution spectral_solution(const ShiftSpace& space, const Potential& f, const Limits& limits) {
  require_primitive(space);
  TransferMatrix tm = weighted_transfer_matrix(space, f, limits);
  PerronPair pp = perron_pair(tm.weights);
  const double lambda = std::exp(pp.log_lambda);
  const int n = static_cast<int>(tm.states.size());
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(n, n);
  for (const auto& e : tm.edges)
    q(e.from, e.to) = tm.weights(e.from, e.to) * pp.right(e.to) / (lambda * pp.right(e.from));
  for (int u = 0; u < n; ++u) q.row(u) /= q.row(u).sum();
  Eigen::VectorXd pi = stationary_distribution(q);
  const double pressure = pp.log_lambda + tm.log_shift;
  return {std::move(tm), std::move(pp), pressure, std::move(q), std::move(pi)};
}

PressureResult pressure_spectral(const ShiftSpace& space, const Potential& f, const Limits& limits) {
  require_primitive(space);
  const TransferMatrix tm = weighted_transfer_matrix(space, f, limits);
  const PerronVector right = perron_vector(tm.weights);
  const double lambda = 0.5 * (right.bracket.lo + right.bracket.hi);
  return {Extended::finite(std::log(lambda) + tm.log_shift), Route::spectral, {}};
}

MarkovMeasure equilibrium_state(const SpectralSolution& solution, const ShiftSpace& space, const Limits& limits) {
  return MarkovMeasure::with_stationary(space, solution.transfer.state_length, solution.q, solution.pi, limits);
}

MarkovMeasure equilibrium_state(const ShiftSpace& space, const Potential& f, const Limits& limits) {
  return equilibrium_state(spectral_solution(space, f, limits), space, limits);
}

PressureResult pressure_periodic(const ShiftSpace& space, const Potential& f, int n, const Limits& limits) {
  detail::require_one_dimensional(space, "pressure_periodic");
  if (n < 1) throw ValidationError("period n must be >= 1");
  if (count_periodic_points(space, n) > limits.enumeration_cap)
    throw CapExceeded("periodic point count for n = " + std::to_string(n), limits.enumeration_cap);
  const Extended log_z = log_sum_exp_words(
      space, n, true, [&](SymbolSpan w) { return f.cyclic_birkhoff_sum(w); }, limits.jobs);
  PressureResult out{log_z, Route::periodic, {}};
  out.parameters.n = n;
  if (log_z.is_finite()) out.value = Extended::finite(log_z.value() / n);
  return out;
}

PressureResult pressure_separated(const ShiftSpace& space, const Potential& f, int n, int r,
                                  const Limits& limits) {
  detail::require_one_dimensional(space, "pressure_separated");
  if (n < 1 || r < 0) throw ValidationError("separated pressure needs n >= 1 and r >= 0");
  const int len = n + r;
  if (count_admissible_words(space, len) > limits.enumeration_cap)
    throw CapExceeded("separated set size for n + r = " + std::to_string(len), limits.enumeration_cap);
  const std::size_t extended_len = static_cast<std::size_t>(n + std::max(r, f.window() - 1));
  const Extended log_z = log_sum_exp_words(
      space, len, false,
      [&](SymbolSpan w) {
        if (w.size() >= extended_len) return f.birkhoff_sum(w, n);
        return f.birkhoff_sum(canonical_extension(space, w, extended_len), n);
      },
      limits.jobs);
  PressureResult out{Extended::finite(log_z.value() / n), Route::separated, {}};
  out.parameters.n = n;
  out.parameters.r = r;
  return out;
}

double variational_gap(const ShiftSpace& space, const Potential& f, const InvariantMeasure& mu,
                       const Limits& limits) {
  const double p = pressure_spectral(space, f, limits).value.value();
  return p - (integrate(mu, f) + entropy_rate(mu));
}

PairInteraction::PairInteraction(int k, std::vector<double> values) : k_(k), values_(std::move(values)) {
  if (k < 1 || k > kMaxPrintableAlphabet) throw ValidationError("pair interaction alphabet must be in [1, 36]");
  if (static_cast<int>(values_.size()) != k * k)
    throw ValidationError("pair interaction needs k*k = " + std::to_string(k * k) + " values");
  for (double v : values_)
    if (!std::isfinite(v)) throw ValidationError("pair interaction values must be finite");
}

PairInteraction PairInteraction::potts(int k, double coupling) {
  std::vector<double> v(k * k, 0.0);
  for (int a = 0; a < k; ++a) v[a * k + a] = coupling;
  return PairInteraction(k, std::move(v));
}

namespace {

Eigen::MatrixXd strip_energies(const PairInteraction& nn, int width, const Limits& limits) {
  if (width < 2 || width > limits.max_strip_width)
    throw ValidationError("strip width must be in [2, " + std::to_string(limits.max_strip_width) + "]");
  const int k = nn.alphabet_size();
  const auto states = checked_power(k, width, limits.enumeration_cap);
  if (!states) throw CapExceeded("strip state count k^" + std::to_string(width), limits.enumeration_cap);
  const int n = static_cast<int>(*states);
  std::vector<std::vector<Symbol>> rows(n, std::vector<Symbol>(width));
  std::vector<double> row_energy(n, 0.0);
  for (int s = 0; s < n; ++s) {
    decode_word(static_cast<std::uint64_t>(s), k, rows[s]);
    for (int i = 0; i < width; ++i) row_energy[s] += nn(rows[s][i], rows[s][(i + 1) % width]);
  }
  Eigen::MatrixXd e(n, n);
  for (int s = 0; s < n; ++s)
    for (int s2 = 0; s2 < n; ++s2) {
      double x = row_energy[s2];
      for (int i = 0; i < width; ++i) x += nn(rows[s][i], rows[s2][i]);
      e(s, s2) = x;
    }
  return e;
}

}  // namespace

Eigen::MatrixXd strip_transfer_matrix(const PairInteraction& nn, int width, const Limits& limits) {
  return strip_energies(nn, width, limits).array().exp().matrix();
}

PressureResult pressure_2d_strip(const PairInteraction& nn, int width, const Limits& limits) {
  const Eigen::MatrixXd e = strip_energies(nn, width, limits);
  const double shift = e.maxCoeff();
  const PerronVector right = perron_vector((e.array() - shift).exp().matrix());
  const double lambda = 0.5 * (right.bracket.lo + right.bracket.hi);
  PressureResult out{Extended::finite((std::log(lambda) + shift) / width), Route::strip, {}};
  out.parameters.width = width;
  return out;
}

PressureResult pressure_2d_box(const PairInteraction& nn, int rows, int cols, const Limits& limits) {
  if (rows < 1 || cols < 1) throw ValidationError("box sides must be >= 1");
  const int k = nn.alphabet_size();
  const int cells = rows * cols;
  const auto configs = checked_power(k, cells, limits.box_budget);
  if (!configs)
    throw CapExceeded("2-D box " + std::to_string(rows) + "x" + std::to_string(cols) + " (k^" +
                          std::to_string(cells) + " configurations)",
                      limits.box_budget);
  constexpr std::uint64_t kChunks = 64;
  const std::uint64_t total = *configs;
  const std::uint64_t chunk_count = std::min<std::uint64_t>(kChunks, total);
  auto energy = [&](std::uint64_t config) {
    std::vector<Symbol> g(cells);
    decode_word(config, k, g);
    double e = 0.0;
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) {
        const int a = g[i * cols + j];
        e += nn(a, g[i * cols + (j + 1) % cols]);
        e += nn(a, g[((i + 1) % rows) * cols + j]);
      }
    return e;
  };
  const Extended log_z = chunked_log_sum_exp(
      chunk_count,
      [&](std::size_t c, auto&& fn) {
        const std::uint64_t lo = total * c / chunk_count, hi = total * (c + 1) / chunk_count;
        for (std::uint64_t x = lo; x < hi; ++x) fn(x);
      },
      energy, limits.jobs);
  PressureResult out{Extended::finite(log_z.value() / cells), Route::box, {}};
  out.parameters.box_rows = rows;
  out.parameters.box_cols = cols;
  return out;
}

}  // namespace thermoform
