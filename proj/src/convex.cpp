#include "thermoform/convex.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace thermoform {

namespace {

// Hessian eigenvalues below this fraction of the largest are treated as flat
// directions (coboundary relations among the observables).
constexpr double kFlatDirection = 1e-10;
constexpr double kArmijo = 1e-4;
constexpr int kMaxBacktracks = 60;

Eigen::VectorXd to_vector(std::span<const double> x) {
  return Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

double q_star(const ShiftSpace& space, const Potential& f, const InvariantMeasure& mu, const Limits& limits) {
  const double p = pressure_spectral(space, f, limits).value.value();
  return p - entropy_rate(mu) - integrate(mu, f);
}

ObservableFamily cylinder_family(const ShiftSpace& space, int n, const Limits& limits) {
  const WordList words = admissible_words(space, n, limits);
  if (words.size() < 2)
    throw ValidationError("cylinder family of length " + std::to_string(n) + " is empty after dropping the last cylinder");
  std::vector<Potential> members;
  members.reserve(words.size() - 1);
  for (std::size_t i = 0; i + 1 < words.size(); ++i) members.push_back(Potential::indicator(space, words[i], limits));
  return ObservableFamily(std::move(members), limits);
}

std::string to_string(RateResult::Status status) {
  switch (status) {
    case RateResult::Status::converged: return "converged";
    case RateResult::Status::diverged: return "diverged";
    case RateResult::Status::stalled: return "stalled";
  }
  return "unknown";
}

RateFunctionHandle::RateFunctionHandle(ShiftSpace space, Potential f, ObservableFamily s, DualOptions options,
                                       Limits limits)
    : space_(std::move(space)),
      f_(std::move(f)),
      s_(std::move(s)),
      options_(options),
      limits_(limits),
      cache_(std::make_unique<Cache>()) {
  if (!(f_.space() == space_) || !(s_.space() == space_))
    throw ValidationError("potential and observables must live on the handle's space");
  const int window = std::max(f_.window(), s_.window());
  f_ = f_.extended(window, limits_);
  std::vector<Potential> members;
  for (const auto& g : s_.members()) members.push_back(g.extended(window, limits_));
  s_ = ObservableFamily(std::move(members), limits_);
  base_pressure_ = pressure_spectral(space_, f_, limits_).value.value();
}

Potential RateFunctionHandle::tilted(std::span<const double> t) const {
  if (t.size() != s_.dimension()) throw ValidationError("dual vector has wrong dimension");
  Potential out = f_;
  for (std::size_t j = 0; j < t.size(); ++j)
    if (t[j] != 0.0) out.add_scaled(s_[j], t[j]);
  return out;
}

double RateFunctionHandle::l_eval(std::span<const double> t) const {
  return pressure_spectral(space_, tilted(t), limits_).value.value() - base_pressure_;
}

std::vector<double> RateFunctionHandle::l_grad(std::span<const double> t) const {
  return moments(equilibrium_state(space_, tilted(t), limits_), s_);
}

std::vector<double> RateFunctionHandle::equilibrium_moments() const {
  const std::vector<double> zero(s_.dimension(), 0.0);
  return l_grad(zero);
}

Eigen::MatrixXd RateFunctionHandle::l_hessian(std::span<const double> t) const {
  if (t.size() != s_.dimension()) throw ValidationError("dual vector has wrong dimension");
  return evaluate(to_vector(t), true).hessian;
}

RateFunctionHandle::Evaluation RateFunctionHandle::evaluate(const Eigen::VectorXd& t, bool with_hessian) const {
  const std::vector<double> tv = to_std(t);
  const SpectralSolution sol = spectral_solution(space_, tilted(tv), limits_);
  const auto& edges = sol.transfer.edges;
  const auto e_count = static_cast<Eigen::Index>(edges.size());
  const auto d = static_cast<Eigen::Index>(s_.dimension());

  Eigen::MatrixXd phi(e_count, d);
  Eigen::VectorXd w(e_count);
  for (Eigen::Index e = 0; e < e_count; ++e) {
    const auto& edge = edges[e];
    w(e) = sol.pi(edge.from) * sol.q(edge.from, edge.to);
    for (Eigen::Index j = 0; j < d; ++j) phi(e, j) = s_[j].at_code(edge.word);
  }
  Evaluation out{sol.pressure - base_pressure_, phi.transpose() * w, {}};
  if (!with_hessian) return out;

  // Asymptotic covariance of the edge observables under the stationary chain:
  // E[c c^T] + sum_{k>=1} (E[c_0 c_k^T] + E[c_k c_0^T]), the tail summed through
  // the fundamental matrix (I - Q + 1 pi^T)^{-1}.
  const Eigen::Index n = sol.q.rows();
  phi.rowwise() -= out.moments.transpose();
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, d);
  for (Eigen::Index e = 0; e < e_count; ++e) h.row(edges[e].from) += sol.q(edges[e].from, edges[e].to) * phi.row(e);
  Eigen::MatrixXd fundamental = Eigen::MatrixXd::Identity(n, n) - sol.q;
  fundamental.rowwise() += sol.pi.transpose();
  const Eigen::MatrixXd z = fundamental.partialPivLu().solve(h);
  Eigen::MatrixXd z_next(e_count, d);
  for (Eigen::Index e = 0; e < e_count; ++e) z_next.row(e) = z.row(edges[e].to);
  const Eigen::MatrixXd weighted = w.asDiagonal() * phi;
  const Eigen::MatrixXd cross = weighted.transpose() * z_next;
  out.hessian = weighted.transpose() * phi + cross + cross.transpose();
  out.hessian = 0.5 * (out.hessian + out.hessian.transpose());
  return out;
}

RateResult RateFunctionHandle::solve(std::span<const double> x) const {
  const Eigen::Index d = static_cast<Eigen::Index>(s_.dimension());
  const Eigen::VectorXd target = to_vector(x);
  RateResult result;
  Eigen::VectorXd t = Eigen::VectorXd::Zero(d);
  Evaluation ev = evaluate(t, true);
  double dual = -ev.l;
  Eigen::VectorXd g = target - ev.moments;

  for (int iter = 0;; ++iter) {
    result.iterations = iter;
    result.gradient_norm = g.norm();
    result.t = to_std(t);
    if (result.gradient_norm < options_.gradient_tolerance) {
      result.status = RateResult::Status::converged;
      result.value = Extended::finite(dual);
      result.witness = equilibrium_state(space_, tilted(result.t), limits_);
      return result;
    }
    if (t.lpNorm<Eigen::Infinity>() > options_.divergence_bound) {
      result.status = RateResult::Status::diverged;
      result.value = Extended::pos_inf();
      return result;
    }
    if (iter >= options_.max_iterations) break;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(ev.hessian);
    const double top = eig.eigenvalues().maxCoeff();
    Eigen::VectorXd step = Eigen::VectorXd::Zero(d);
    if (top > 0.0) {
      const Eigen::VectorXd coeffs = eig.eigenvectors().transpose() * g;
      for (Eigen::Index k = 0; k < d; ++k) {
        const double lam = eig.eigenvalues()(k);
        if (lam > kFlatDirection * top) step += eig.eigenvectors().col(k) * (coeffs(k) / lam);
      }
    }
    if (!step.allFinite() || !(step.dot(g) > 0.0)) step = g;
    // Stay within reach of the divergence test; further out exp() underflows.
    const double reach = 2.0 * options_.divergence_bound;
    const double longest = (t + step).lpNorm<Eigen::Infinity>();
    if (longest > reach) step *= (reach - t.lpNorm<Eigen::Infinity>()) / (longest - t.lpNorm<Eigen::Infinity>());

    const double slope = step.dot(g);
    bool accepted = false;
    double alpha = 1.0;
    for (int ls = 0; ls < kMaxBacktracks && !accepted; ++ls, alpha *= 0.5) {
      const Eigen::VectorXd trial = t + alpha * step;
      Evaluation next;
      try {
        next = evaluate(trial, true);
      } catch (const Error&) {
        continue;
      }
      const double trial_dual = trial.dot(target) - next.l;
      const Eigen::VectorXd trial_g = target - next.moments;
      const bool armijo = trial_dual >= dual + kArmijo * alpha * slope;
      // Near the optimum dual increments drop below round-off; accept
      // non-decreasing steps (up to noise) that shrink the gradient.
      const bool noise_tie = trial_dual >= dual - 1e-13 * (1.0 + std::abs(dual)) && trial_g.norm() < g.norm();
      if (armijo || noise_tie) {
        t = trial;
        ev = std::move(next);
        dual = std::max(dual, trial_dual);
        g = trial_g;
        accepted = true;
      }
    }
    if (!accepted) break;
  }
  result.status = RateResult::Status::stalled;
  result.value = Extended::finite(dual);
  return result;
}

RateResult RateFunctionHandle::rate_at(std::span<const double> x) const {
  if (x.size() != s_.dimension()) throw ValidationError("moment vector has wrong dimension");
  for (double v : x)
    if (!std::isfinite(v)) throw ValidationError("moment vector must be finite");
  const std::vector<double> key(x.begin(), x.end());
  {
    std::lock_guard lock(cache_->mutex);
    const auto it = cache_->entries.find(key);
    if (it != cache_->entries.end()) return it->second;
  }
  RateResult r = solve(x);
  std::lock_guard lock(cache_->mutex);
  return cache_->entries.emplace(key, std::move(r)).first->second;
}

std::size_t RateFunctionHandle::cache_size() const {
  std::lock_guard lock(cache_->mutex);
  return cache_->entries.size();
}

GridConjugate::GridConjugate(std::vector<Sample> samples, double step) : samples_(std::move(samples)), step_(step) {
  if (samples_.empty()) throw ValidationError("grid conjugate needs samples");
}

double GridConjugate::at(std::span<const double> x) const {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& s : samples_) {
    if (s.t.size() != x.size()) throw ValidationError("grid sample dimension mismatch");
    double dot = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) dot += s.t[j] * x[j];
    best = std::max(best, dot - s.value);
  }
  return best;
}

double GridConjugate::gap_bound(std::span<const double> x, double curvature) const {
  double sup = 0.0;
  for (double v : x) sup = std::max(sup, std::abs(v));
  return step_ * sup + static_cast<double>(x.size()) * curvature * step_ * step_ / 8.0;
}

GridConjugate grid_conjugate_oracle(const std::function<double(std::span<const double>)>& l, int d, double lo,
                                    double hi, double step) {
  if (d < 1 || d > 2) throw ValidationError("grid conjugate supports d = 1 or 2");
  if (!(step > 0.0) || !(hi >= lo)) throw ValidationError("grid bounds and step must be positive");
  const int per_axis = static_cast<int>(std::llround((hi - lo) / step)) + 1;
  std::vector<GridConjugate::Sample> samples;
  samples.reserve(static_cast<std::size_t>(d == 1 ? per_axis : per_axis * per_axis));
  std::vector<double> t(d);
  for (int i = 0; i < per_axis; ++i) {
    t[0] = lo + i * step;
    if (d == 1) {
      samples.push_back({t, l(t)});
      continue;
    }
    for (int j = 0; j < per_axis; ++j) {
      t[1] = lo + j * step;
      samples.push_back({t, l(t)});
    }
  }
  return GridConjugate(std::move(samples), step);
}

std::vector<ApproximationStep> entropy_approximation_sequence(const ShiftSpace& space, const Potential& f,
                                                              const InvariantMeasure& target, int max_window,
                                                              const ApproximationOptions& options) {
  if (max_window < 1) throw ValidationError("max window must be >= 1");
  if (!space.is_primitive()) throw NotPrimitive();
  const double target_entropy = entropy_rate(target);
  std::vector<ApproximationStep> steps;
  for (int n = 1; n <= max_window; ++n) {
    ApproximationStep step;
    step.window = n;
    const WordList words = admissible_words(space, n, options.limits);
    ObservableFamily family = cylinder_family(space, n, options.limits);
    step.family_size = family.dimension();

    bool boundary = false;
    std::vector<double> x(family.dimension());
    for (std::size_t i = 0; i < words.size(); ++i) {
      const double p = cylinder_probability(target, words[i]);
      boundary = boundary || !(p > 0.0);
      if (i < x.size()) x[i] = p;
    }

    RateFunctionHandle handle(space, f, family, options.dual, options.limits);
    auto perturb = [&] {
      const auto eq = handle.equilibrium_moments();
      for (std::size_t j = 0; j < x.size(); ++j)
        x[j] = (1.0 - options.perturbation) * x[j] + options.perturbation * eq[j];
      step.perturbed = true;
    };
    if (boundary) perturb();
    RateResult r = handle.rate_at(x);
    if (!r.converged() && !step.perturbed) {
      perturb();
      r = handle.rate_at(x);
    }
    step.target_moments = x;
    step.t = r.t;
    step.converged = r.converged();
    std::ostringstream diag;
    diag << "dual " << to_string(r.status) << " after " << r.iterations << " iterations, |grad| = " << r.gradient_norm;
    step.diagnostics = diag.str();
    if (r.converged()) {
      step.measure = r.witness;
      const auto achieved = moments(*step.measure, family);
      for (std::size_t j = 0; j < x.size(); ++j)
        step.moment_error = std::max(step.moment_error, std::abs(achieved[j] - x[j]));
      step.entropy = step.measure->entropy_rate();
      step.entropy_gap = step.entropy - target_entropy;
    }
    steps.push_back(std::move(step));
  }
  return steps;
}

}  // namespace thermoform
