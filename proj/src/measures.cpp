#include "thermoform/measures.hpp"

#include <algorithm>
#include <queue>
#include <sstream>

namespace thermoform {

namespace {

constexpr double kStochasticTolerance = 1e-9;

std::vector<int> reachable_from(const Eigen::MatrixXd& q, int start) {
  const int n = static_cast<int>(q.rows());
  std::vector<int> seen(n, 0);
  std::queue<int> pending;
  seen[start] = 1;
  pending.push(start);
  while (!pending.empty()) {
    const int u = pending.front();
    pending.pop();
    for (int v = 0; v < n; ++v)
      if (q(u, v) > 0.0 && !seen[v]) {
        seen[v] = 1;
        pending.push(v);
      }
  }
  return seen;
}

}  // namespace

Eigen::VectorXd stationary_distribution(const Eigen::MatrixXd& q) {
  const int n = static_cast<int>(q.rows());
  if (n == 0 || q.cols() != n) throw ValidationError("transition matrix must be square and nonempty");
  for (int u = 0; u < n; ++u) {
    const auto seen = reachable_from(q, u);
    if (std::find(seen.begin(), seen.end(), 0) != seen.end()) {
      std::ostringstream msg;
      msg << "transition matrix is reducible: the closed set reachable from state " << u << " is {";
      bool first = true;
      for (int v = 0; v < n; ++v)
        if (seen[v]) {
          msg << (first ? "" : ",") << v;
          first = false;
        }
      msg << "}";
      throw ValidationError(msg.str());
    }
  }
  // pi (Q - I) = 0 with the last equation replaced by sum(pi) = 1.
  Eigen::MatrixXd system = q.transpose() - Eigen::MatrixXd::Identity(n, n);
  system.row(n - 1).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  rhs(n - 1) = 1.0;
  Eigen::VectorXd pi = system.fullPivLu().solve(rhs);
  for (int i = 0; i < n; ++i) pi(i) = std::max(pi(i), 0.0);
  pi /= pi.sum();
  return pi;
}

MarkovMeasure MarkovMeasure::skeleton(const ShiftSpace& space, int order, const Limits& limits) {
  detail::require_one_dimensional(space, "MarkovMeasure");
  if (order < 1) throw ValidationError("Markov order must be >= 1");
  const auto size = checked_power(space.alphabet_size(), order, limits.enumeration_cap);
  if (!size) throw CapExceeded("Markov state table k^" + std::to_string(order), limits.enumeration_cap);
  WordList states = admissible_words(space, order, limits);
  std::vector<int> index(*size, -1);
  for (std::size_t i = 0; i < states.size(); ++i)
    index[word_code(states[i], space.alphabet_size())] = static_cast<int>(i);
  return MarkovMeasure(space, order, std::move(states), std::move(index));
}

int MarkovMeasure::state_index(SymbolSpan w) const {
  for (Symbol s : w)
    if (s >= space_.alphabet_size()) return -1;
  return index_[word_code(w, space_.alphabet_size())];
}

bool MarkovMeasure::overlap_admissible(int u, int v) const {
  const auto su = states_[u], sv = states_[v];
  if (order_ == 1) return space_.allowed(su[0], sv[0]);
  return std::equal(su.begin() + 1, su.end(), sv.begin()) && space_.allowed(su.back(), sv.back());
}

void MarkovMeasure::validate_transition(Eigen::MatrixXd& q) const {
  const int n = static_cast<int>(states_.size());
  if (q.rows() != n || q.cols() != n)
    throw ValidationError("order-" + std::to_string(order_) + " transition matrix must be " +
                          std::to_string(n) + " x " + std::to_string(n));
  for (int u = 0; u < n; ++u) {
    double row = 0.0;
    for (int v = 0; v < n; ++v) {
      const double e = q(u, v);
      if (!std::isfinite(e) || e < 0.0)
        throw ValidationError("transition entry (" + std::to_string(u) + "," + std::to_string(v) +
                              ") must be a finite nonnegative number");
      if (e > 0.0 && !overlap_admissible(u, v))
        throw ValidationError("transition " + to_string(states_[u]) + " -> " + to_string(states_[v]) +
                              " is not overlap-admissible");
      row += e;
    }
    if (std::abs(row - 1.0) > kStochasticTolerance)
      throw ValidationError("transition row " + std::to_string(u) + " sums to " + std::to_string(row));
    q.row(u) /= row;
  }
}

MarkovMeasure MarkovMeasure::from_transition(const ShiftSpace& space, int order, Eigen::MatrixXd q,
                                             const Limits& limits) {
  MarkovMeasure m = skeleton(space, order, limits);
  m.validate_transition(q);
  m.pi_ = stationary_distribution(q);
  m.q_ = std::move(q);
  return m;
}

MarkovMeasure MarkovMeasure::with_stationary(const ShiftSpace& space, int order, Eigen::MatrixXd q,
                                             Eigen::VectorXd pi, const Limits& limits) {
  MarkovMeasure m = skeleton(space, order, limits);
  m.validate_transition(q);
  if (pi.size() != q.rows()) throw ValidationError("stationary vector has wrong length");
  for (int i = 0; i < pi.size(); ++i)
    if (!std::isfinite(pi(i)) || pi(i) < 0.0) throw ValidationError("stationary vector must be nonnegative");
  if (std::abs(pi.sum() - 1.0) > kStochasticTolerance) throw ValidationError("stationary vector must sum to 1");
  pi /= pi.sum();
  const double residual = (pi.transpose() * q - pi.transpose()).cwiseAbs().maxCoeff();
  if (residual > kStochasticTolerance)
    throw ValidationError("stationary vector is not invariant (residual " + std::to_string(residual) + ")");
  m.q_ = std::move(q);
  m.pi_ = std::move(pi);
  return m;
}

MarkovMeasure MarkovMeasure::bernoulli(const ShiftSpace& space, const std::vector<double>& p) {
  if (!space.is_full()) throw ValidationError("Bernoulli measures need a full shift");
  const int k = space.alphabet_size();
  if (static_cast<int>(p.size()) != k) throw ValidationError("Bernoulli vector must have k entries");
  Eigen::MatrixXd q(k, k);
  for (int u = 0; u < k; ++u)
    for (int v = 0; v < k; ++v) q(u, v) = p[v];
  Eigen::VectorXd pi = Eigen::Map<const Eigen::VectorXd>(p.data(), k);
  return with_stationary(space, 1, std::move(q), std::move(pi));
}

MarkovMeasure MarkovMeasure::periodic_orbit(const ShiftSpace& space, SymbolSpan cycle, const Limits& limits) {
  if (!space.cyclically_admissible(cycle))
    throw ValidationError("periodic word " + to_string(cycle) + " is not cyclically admissible");
  const int p = static_cast<int>(cycle.size());
  MarkovMeasure m = skeleton(space, p, limits);
  const int n = static_cast<int>(m.states_.size());
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd pi = Eigen::VectorXd::Zero(n);
  std::vector<Symbol> rot(p), next(p);
  auto rotation = [&](int x, std::vector<Symbol>& out) {
    for (int i = 0; i < p; ++i) out[i] = cycle[(x + i) % p];
  };
  std::vector<int> on_orbit(n, 0);
  for (int x = 0; x < p; ++x) {
    rotation(x, rot);
    rotation((x + 1) % p, next);
    const int u = m.state_index(rot), v = m.state_index(next);
    q(u, v) = 1.0;
    pi(u) += 1.0 / p;
    on_orbit[u] = 1;
  }
  // Off-orbit states get the least admissible continuation; they carry no mass.
  for (int u = 0; u < n; ++u) {
    if (on_orbit[u]) continue;
    const auto s = m.states_[u];
    std::vector<Symbol> w(s.begin() + 1, s.end());
    w.push_back(space.successors(s.back()).front());
    q(u, m.state_index(w)) = 1.0;
  }
  m.q_ = std::move(q);
  m.pi_ = std::move(pi);
  return m;
}

double MarkovMeasure::cylinder_probability(SymbolSpan w) const {
  if (w.empty()) return 1.0;
  if (!space_.admissible(w)) return 0.0;
  const int k = space_.alphabet_size();
  const int len = static_cast<int>(w.size());
  if (len < order_) {
    // Marginal: mass of states with prefix w (a contiguous code range).
    const std::uint64_t span = *checked_power(k, order_ - len, std::numeric_limits<std::uint64_t>::max());
    const std::uint64_t lo = word_code(w, k) * span;
    CompensatedSum sum;
    for (std::uint64_t c = lo; c < lo + span; ++c)
      if (index_[c] >= 0) sum.add(pi_(index_[c]));
    return sum.value();
  }
  int u = index_[word_code(w.first(order_), k)];
  double p = pi_(u);
  for (int i = 1; i + order_ <= len && p > 0.0; ++i) {
    const int v = index_[word_code(w.subspan(i, order_), k)];
    p *= q_(u, v);
    u = v;
  }
  return p;
}

double MarkovMeasure::entropy_rate() const {
  CompensatedSum h;
  for (int u = 0; u < q_.rows(); ++u) {
    if (pi_(u) == 0.0) continue;
    for (int v = 0; v < q_.cols(); ++v) {
      const double e = q_(u, v);
      if (e > 0.0) h.add(-pi_(u) * e * std::log(e));
    }
  }
  return std::max(h.value(), 0.0);
}

InvariantMeasure::InvariantMeasure(std::vector<Component> components) : components_(std::move(components)) {
  if (components_.empty()) throw ValidationError("invariant measure needs at least one component");
  double total = 0.0;
  for (const auto& c : components_) {
    if (!(c.weight > 0.0)) throw ValidationError("mixture weights must be positive");
    if (!(c.measure.space() == components_.front().measure.space()))
      throw ValidationError("mixture components live on different spaces");
    total += c.weight;
  }
  if (std::abs(total - 1.0) > 1e-12) throw ValidationError("mixture weights must sum to 1");
}

InvariantMeasure mix(const std::vector<std::pair<double, InvariantMeasure>>& parts) {
  if (parts.empty()) throw ValidationError("mix needs at least one part");
  double total = 0.0;
  for (const auto& [beta, mu] : parts) {
    if (!(beta > 0.0)) throw ValidationError("mixture weights must be positive");
    total += beta;
  }
  if (std::abs(total - 1.0) > 1e-12) throw ValidationError("mixture weights must sum to 1");
  std::vector<InvariantMeasure::Component> flat;
  for (const auto& [beta, mu] : parts)
    for (const auto& c : mu.components()) flat.push_back({beta * c.weight, c.measure});
  return InvariantMeasure(std::move(flat));
}

double entropy_rate(const InvariantMeasure& mu) {
  CompensatedSum h;
  for (const auto& c : mu.components()) h.add(c.weight * c.measure.entropy_rate());
  return h.value();
}

double cylinder_probability(const InvariantMeasure& mu, SymbolSpan w) {
  CompensatedSum p;
  for (const auto& c : mu.components()) p.add(c.weight * c.measure.cylinder_probability(w));
  return p.value();
}

double integrate(const InvariantMeasure& mu, const Potential& f) {
  if (!(f.space() == mu.space())) throw ValidationError("potential and measure live on different spaces");
  CompensatedSum total;
  std::vector<Symbol> w(f.window());
  for (auto code : f.codes()) {
    decode_word(code, f.space().alphabet_size(), w);
    total.add(cylinder_probability(mu, w) * f.at_code(code));
  }
  return total.value();
}

std::vector<double> moments(const InvariantMeasure& mu, const ObservableFamily& s) {
  std::vector<double> out(s.dimension());
  for (std::size_t j = 0; j < s.dimension(); ++j) out[j] = integrate(mu, s[j]);
  return out;
}

double EmpiricalOrbitMeasure::cylinder_probability(SymbolSpan w) const {
  const std::size_t n = cycle_.size();
  std::size_t hits = 0;
  for (std::size_t x = 0; x < n; ++x) {
    bool match = true;
    for (std::size_t i = 0; i < w.size() && match; ++i) match = cycle_[(x + i) % n] == w[i];
    hits += match;
  }
  return static_cast<double>(hits) / static_cast<double>(n);
}

OrbitEmpirical orbit_empirical(const ShiftSpace& space, SymbolSpan cycle, const ObservableFamily& s) {
  if (!space.cyclically_admissible(cycle))
    throw ValidationError("periodic word " + to_string(cycle) + " is not cyclically admissible");
  const double n = static_cast<double>(cycle.size());
  std::vector<double> m(s.dimension());
  for (std::size_t j = 0; j < s.dimension(); ++j) m[j] = s[j].cyclic_birkhoff_sum(cycle) / n;
  return {std::move(m), EmpiricalOrbitMeasure(Word(cycle))};
}

}  // namespace thermoform
