#include "thermoform/ldp.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "thermoform/reduce.hpp"

namespace thermoform {

namespace {

constexpr double kMergeTolerance = 1e-12;
// Faces are compared with this slack so that atoms such as 16/20 land on a
// closed face at 0.8 regardless of rounding.
constexpr double kFaceSlack = 1e-12;

bool points_close(const std::vector<double>& a, const std::vector<double>& b, double tol) {
  for (std::size_t j = 0; j < a.size(); ++j)
    if (std::abs(a[j] - b[j]) > tol) return false;
  return true;
}

struct ScoredPoint {
  double score;
  std::vector<double> point;
};

// Turns chunked (log-weight, point) lists into a normalised cloud, preserving chunk order.
WeightedPointCloud normalise(std::vector<std::vector<ScoredPoint>> chunks, int n, Variant variant) {
  double shift = -std::numeric_limits<double>::infinity();
  for (const auto& c : chunks)
    for (const auto& p : c) shift = std::max(shift, p.score);
  WeightedPointCloud cloud;
  cloud.n = n;
  cloud.provenance = variant;
  CompensatedSum total;
  for (auto& c : chunks)
    for (auto& p : c) {
      const double w = std::exp(p.score - shift);
      total.add(w);
      cloud.atoms.push_back({w, std::move(p.point)});
    }
  const double z = total.value();
  for (auto& a : cloud.atoms) a.weight /= z;
  return cloud;
}

void check_inputs(const ShiftSpace& space, const Potential& f, const ObservableFamily& s, int n, const char* op) {
  detail::require_one_dimensional(space, op);
  if (n < 1) throw ValidationError(std::string(op) + " needs n >= 1");
  if (!(f.space() == space) || !(s.space() == space))
    throw ValidationError(std::string(op) + ": potential and observables must live on the same space");
}

}  // namespace

std::string to_string(Variant v) {
  switch (v) {
    case Variant::periodic: return "periodic";
    case Variant::separated: return "separated";
    case Variant::gibbs: return "gibbs";
  }
  return "unknown";
}

Variant parse_variant(const std::string& name) {
  if (name == "periodic") return Variant::periodic;
  if (name == "separated") return Variant::separated;
  if (name == "gibbs") return Variant::gibbs;
  throw ValidationError("unknown variant \"" + name + "\" (expected periodic, separated or gibbs)");
}

double WeightedPointCloud::total_weight() const {
  CompensatedSum s;
  for (const auto& a : atoms) s.add(a.weight);
  return s.value();
}

void merge_atoms(WeightedPointCloud& cloud, double tolerance) {
  auto& atoms = cloud.atoms;
  std::stable_sort(atoms.begin(), atoms.end(), [](const auto& a, const auto& b) { return a.point < b.point; });
  std::vector<WeightedPointCloud::Atom> merged;
  for (auto& a : atoms) {
    if (!merged.empty() && points_close(merged.back().point, a.point, tolerance))
      merged.back().weight += a.weight;
    else
      merged.push_back(std::move(a));
  }
  atoms = std::move(merged);
}

BoxQuery BoxQuery::closed(std::vector<double> lo, std::vector<double> hi) {
  BoxQuery b;
  b.lo_closed.assign(lo.size(), true);
  b.hi_closed.assign(hi.size(), true);
  b.lo = std::move(lo);
  b.hi = std::move(hi);
  b.validate();
  return b;
}

void BoxQuery::validate() const {
  if (lo.empty()) throw ValidationError("box needs at least one coordinate");
  if (hi.size() != lo.size() || lo_closed.size() != lo.size() || hi_closed.size() != lo.size())
    throw ValidationError("box bounds have mismatched dimensions");
  for (std::size_t j = 0; j < lo.size(); ++j) {
    if (!std::isfinite(lo[j]) || !std::isfinite(hi[j])) throw ValidationError("box bounds must be finite");
    if (lo[j] > hi[j]) throw ValidationError("box has lo > hi in coordinate " + std::to_string(j));
  }
}

bool BoxQuery::contains(const std::vector<double>& x) const {
  for (std::size_t j = 0; j < lo.size(); ++j) {
    const bool above = lo_closed[j] ? x[j] >= lo[j] - kFaceSlack : x[j] > lo[j] + kFaceSlack;
    const bool below = hi_closed[j] ? x[j] <= hi[j] + kFaceSlack : x[j] < hi[j] - kFaceSlack;
    if (!above || !below) return false;
  }
  return true;
}

BoxQuery BoxQuery::closure() const {
  BoxQuery b = *this;
  b.lo_closed.assign(lo.size(), true);
  b.hi_closed.assign(hi.size(), true);
  return b;
}

std::string BoxQuery::str() const {
  std::ostringstream out;
  out.precision(12);
  for (std::size_t j = 0; j < lo.size(); ++j) {
    if (j) out << 'x';
    out << (lo_closed[j] ? '[' : '(') << lo[j] << ',' << hi[j] << (hi_closed[j] ? ']' : ')');
  }
  return out.str();
}

WeightedPointCloud empirical_distribution_periodic(const ShiftSpace& space, const Potential& f, int n,
                                                   const ObservableFamily& s, const Limits& limits) {
  check_inputs(space, f, s, n, "empirical_distribution_periodic");
  const std::uint64_t count = count_periodic_points(space, n);
  if (count == 0) throw ValidationError("no periodic points of period " + std::to_string(n));
  if (count > limits.enumeration_cap)
    throw CapExceeded("periodic points of period " + std::to_string(n), limits.enumeration_cap);
  const WordChunks chunks = chunk_words(space, n, true);
  std::vector<std::vector<ScoredPoint>> parts(chunks.prefixes.size());
  parallel_for(parts.size(), limits.jobs, [&](std::size_t c) {
    for_each_extension(space, chunks.prefixes[c], n, true, [&](SymbolSpan w) {
      std::vector<double> point(s.dimension());
      for (std::size_t j = 0; j < point.size(); ++j) point[j] = s[j].cyclic_birkhoff_sum(w) / n;
      parts[c].push_back({f.cyclic_birkhoff_sum(w), std::move(point)});
    });
  });
  return normalise(std::move(parts), n, Variant::periodic);
}

WeightedPointCloud empirical_distribution_separated(const ShiftSpace& space, const Potential& f, int n, int r,
                                                    const ObservableFamily& s, const Limits& limits) {
  check_inputs(space, f, s, n, "empirical_distribution_separated");
  if (r < 0) throw ValidationError("separated cloud needs r >= 0");
  const int len = n + r;
  if (count_admissible_words(space, len) > limits.enumeration_cap)
    throw CapExceeded("separated set size for n + r = " + std::to_string(len), limits.enumeration_cap);
  const int window = std::max(f.window(), s.window());
  const std::size_t extended_len = static_cast<std::size_t>(n + std::max(r, window - 1));
  const WordChunks chunks = chunk_words(space, len, false);
  std::vector<std::vector<ScoredPoint>> parts(chunks.prefixes.size());
  parallel_for(parts.size(), limits.jobs, [&](std::size_t c) {
    for_each_extension(space, chunks.prefixes[c], len, false, [&](SymbolSpan w) {
      const Word ext = canonical_extension(space, w, std::max(extended_len, w.size()));
      std::vector<double> point(s.dimension());
      for (std::size_t j = 0; j < point.size(); ++j) point[j] = s[j].birkhoff_sum(ext, n) / n;
      parts[c].push_back({f.birkhoff_sum(ext, n), std::move(point)});
    });
  });
  return normalise(std::move(parts), n, Variant::separated);
}

WeightedPointCloud empirical_distribution_gibbs_enumerated(const ShiftSpace& space, const Potential& f_base,
                                                           int n, const ObservableFamily& s,
                                                           const Limits& limits) {
  check_inputs(space, f_base, s, n, "empirical_distribution_gibbs");
  const MarkovMeasure mu = equilibrium_state(space, f_base, limits);
  const int len = n + s.window() - 1;
  if (count_admissible_words(space, len) > limits.enumeration_cap)
    throw CapExceeded("words of length " + std::to_string(len), limits.enumeration_cap);
  WeightedPointCloud cloud;
  cloud.n = n;
  cloud.provenance = Variant::gibbs;
  for_each_word(space, len, false, [&](SymbolSpan w) {
    std::vector<double> point(s.dimension());
    for (std::size_t j = 0; j < point.size(); ++j) point[j] = s[j].birkhoff_sum(w, n) / n;
    cloud.atoms.push_back({mu.cylinder_probability(w), std::move(point)});
  });
  merge_atoms(cloud, kMergeTolerance);
  return cloud;
}

WeightedPointCloud empirical_distribution_gibbs(const ShiftSpace& space, const Potential& f_base, int n,
                                                const ObservableFamily& s, const Limits& limits) {
  check_inputs(space, f_base, s, n, "empirical_distribution_gibbs");
  const MarkovMeasure mu = equilibrium_state(space, f_base, limits);
  const int k = space.alphabet_size();
  const int sw = s.window();
  const int m = mu.order();
  const int keep = std::max(m, sw - 1);
  const int len = n + sw - 1;
  if (len <= keep) return empirical_distribution_gibbs_enumerated(space, f_base, n, s, limits);

  const auto keep_mod = checked_power(k, keep, limits.enumeration_cap);
  if (!keep_mod || count_admissible_words(space, keep) > limits.enumeration_cap)
    throw CapExceeded("gibbs state words of length " + std::to_string(keep), limits.enumeration_cap);
  const std::uint64_t m_mod = *checked_power(k, m, limits.enumeration_cap);
  const std::uint64_t sw_mod = *checked_power(k, sw, UINT64_MAX);

  // Order-m state index for every m-word code.
  std::vector<int> state_of(m_mod, -1);
  {
    std::vector<Symbol> buf(m);
    for (std::uint64_t c = 0; c < m_mod; ++c) {
      decode_word(c, k, buf);
      state_of[c] = mu.state_index(buf);
    }
  }
  const Eigen::MatrixXd& q = mu.transition();
  const std::size_t d = s.dimension();

  struct Entry {
    std::uint64_t code;  // last `keep` symbols
    std::vector<double> sums;
    double prob;
  };
  std::vector<Entry> entries;
  for_each_word(space, keep, false, [&](SymbolSpan w) {
    std::vector<double> sums(d, 0.0);
    for (int x = 0; x + sw <= keep; ++x)
      for (std::size_t j = 0; j < d; ++j) sums[j] += s[j](w.subspan(x));
    const double p = mu.cylinder_probability(w);
    if (p > 0.0) entries.push_back({word_code(w, k), std::move(sums), p});
  });

  auto merge = [&](std::vector<Entry>& es) {
    std::stable_sort(es.begin(), es.end(), [](const Entry& a, const Entry& b) {
      return a.code != b.code ? a.code < b.code : a.sums < b.sums;
    });
    std::vector<Entry> out;
    for (auto& e : es) {
      if (!out.empty() && out.back().code == e.code && points_close(out.back().sums, e.sums, kMergeTolerance))
        out.back().prob += e.prob;
      else
        out.push_back(std::move(e));
    }
    es = std::move(out);
  };
  merge(entries);

  for (int length = keep; length < len; ++length) {
    std::vector<Entry> next;
    for (const auto& e : entries) {
      const Symbol last = static_cast<Symbol>(e.code % k);
      const int u = state_of[e.code % m_mod];
      for (Symbol b : space.successors(last)) {
        const std::uint64_t wide = e.code * k + b;
        const int v = state_of[wide % m_mod];
        const double p = e.prob * q(u, v);
        if (!(p > 0.0)) continue;
        Entry ne{wide % *keep_mod, e.sums, p};
        for (std::size_t j = 0; j < d; ++j) ne.sums[j] += s[j].at_code(wide % sw_mod);
        next.push_back(std::move(ne));
      }
    }
    merge(next);
    if (next.size() > limits.enumeration_cap)
      throw CapExceeded("gibbs atoms at length " + std::to_string(length + 1), limits.enumeration_cap);
    entries = std::move(next);
  }

  WeightedPointCloud cloud;
  cloud.n = n;
  cloud.provenance = Variant::gibbs;
  CompensatedSum total;
  for (auto& e : entries) {
    for (double& x : e.sums) x /= n;
    total.add(e.prob);
    cloud.atoms.push_back({e.prob, std::move(e.sums)});
  }
  merge_atoms(cloud, kMergeTolerance);
  const double z = total.value();
  for (auto& a : cloud.atoms) a.weight /= z;
  return cloud;
}

RateEstimate rate_estimate(const WeightedPointCloud& cloud, const BoxQuery& box) {
  box.validate();
  if (!cloud.atoms.empty() && box.dimension() != cloud.dimension())
    throw ValidationError("box dimension does not match the cloud");
  CompensatedSum mass;
  bool all_inside = true;
  for (const auto& a : cloud.atoms) {
    if (box.contains(a.point))
      mass.add(a.weight);
    else
      all_inside = false;
  }
  RateEstimate out;
  out.mass = all_inside ? 1.0 : mass.value();
  if (out.mass > 0.0) out.value = Extended::finite(all_inside ? 0.0 : std::log(out.mass) / cloud.n);
  return out;
}

namespace {

double clamp(double x, double lo, double hi) { return std::min(std::max(x, lo), hi); }

BoxInfimum inf_rate_1d(const RateFunctionHandle& handle, const BoxQuery& box) {
  BoxInfimum out;
  const double x0 = handle.equilibrium_moments()[0];
  if (x0 >= box.lo[0] && x0 <= box.hi[0]) {
    out.value = Extended::finite(0.0);
    out.argmin = {x0};
    return out;
  }
  const double x = x0 < box.lo[0] ? box.lo[0] : box.hi[0];
  const RateResult r = handle.rate_at(std::vector<double>{x});
  out.argmin = {x};
  if (r.status == RateResult::Status::stalled)
    throw NonConvergence("rate_at(" + std::to_string(x) + ") stalled: |grad| = " + std::to_string(r.gradient_norm));
  out.value = r.value;
  return out;
}

BoxInfimum inf_rate_2d(const RateFunctionHandle& handle, const BoxQuery& box) {
  constexpr double kCoarse = 0.02;
  constexpr double kFine = 1e-4;
  BoxInfimum out;
  const auto x0 = handle.equilibrium_moments();
  if (box.closure().contains(x0)) {
    out.value = Extended::finite(0.0);
    out.argmin = x0;
    return out;
  }
  auto eval = [&](const std::vector<double>& x) -> std::pair<double, std::vector<double>> {
    const RateResult r = handle.rate_at(x);
    if (!r.converged()) return {std::numeric_limits<double>::infinity(), {}};
    return {r.value.value(), r.t};
  };
  std::array<int, 2> steps{};
  for (int j = 0; j < 2; ++j)
    steps[j] = std::max(1, static_cast<int>(std::ceil((box.hi[j] - box.lo[j]) / kCoarse)));
  double best = std::numeric_limits<double>::infinity();
  std::vector<double> best_x, best_t;
  for (int i = 0; i <= steps[0]; ++i)
    for (int j = 0; j <= steps[1]; ++j) {
      const std::vector<double> x{box.lo[0] + (box.hi[0] - box.lo[0]) * i / steps[0],
                                  box.lo[1] + (box.hi[1] - box.lo[1]) * j / steps[1]};
      const auto [v, t] = eval(x);
      if (v < best) best = v, best_x = x, best_t = t;
    }
  if (best_x.empty()) return out;
  // Compass search from the best node, halving the step down to kFine.
  for (double h = kCoarse; h >= kFine; h *= 0.5) {
    bool moved = true;
    while (moved) {
      moved = false;
      for (const auto& [dx, dy] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}}) {
        const std::vector<double> x{clamp(best_x[0] + dx * h, box.lo[0], box.hi[0]),
                                    clamp(best_x[1] + dy * h, box.lo[1], box.hi[1])};
        if (x == best_x) continue;
        const auto [v, t] = eval(x);
        if (v < best) {
          best = v, best_x = x, best_t = t, moved = true;
          break;
        }
      }
    }
  }
  out.value = Extended::finite(best);
  out.argmin = best_x;
  // I is convex with gradient t* at the argmin; the unresolved displacement is at most kFine per axis.
  out.grid_bound = kFine * (std::abs(best_t[0]) + std::abs(best_t[1]));
  return out;
}

}  // namespace

BoxInfimum inf_rate_over_box(const RateFunctionHandle& handle, const BoxQuery& box) {
  box.validate();
  if (box.dimension() != handle.dimension()) throw ValidationError("box dimension does not match the observables");
  if (box.dimension() == 1) return inf_rate_1d(handle, box);
  if (box.dimension() == 2) return inf_rate_2d(handle, box);
  throw ValidationError("inf_rate_over_box supports d = 1 or 2");
}

std::vector<LdpRow> ldp_report(const ShiftSpace& space, const Potential& f, const ObservableFamily& s,
                               const BoxQuery& box, const std::vector<int>& ns, Variant variant,
                               const LdpOptions& options) {
  const RateFunctionHandle handle(space, f, s, options.dual, options.limits);
  const BoxInfimum inf = inf_rate_over_box(handle, box.closure());
  const Extended neg_inf = -inf.value;
  const double d = static_cast<double>(s.dimension());
  std::vector<LdpRow> rows;
  for (int n : ns) {
    WeightedPointCloud cloud;
    switch (variant) {
      case Variant::periodic: cloud = empirical_distribution_periodic(space, f, n, s, options.limits); break;
      case Variant::separated:
        cloud = empirical_distribution_separated(space, f, n, options.r, s, options.limits);
        break;
      case Variant::gibbs: cloud = empirical_distribution_gibbs(space, f, n, s, options.limits); break;
    }
    const RateEstimate est = rate_estimate(cloud, box);
    LdpRow row{variant, n, box.str(), est.mass, est.value, neg_inf, d * std::log(n + 1.0) / n, Extended::finite(0.0)};
    if (neg_inf.is_finite() && est.value.is_finite())
      row.gap = Extended::finite(neg_inf.value() - est.value.value());
    else if (neg_inf.is_finite())
      row.gap = Extended::pos_inf();
    else
      row.gap = est.value.is_neg_inf() ? Extended::finite(0.0) : Extended::neg_inf();
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace thermoform
