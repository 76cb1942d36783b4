#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "thermoform/common.hpp"
#include "thermoform/shift.hpp"

namespace thermoform {

/// log sum_i exp(score(i)) over a chunked index set, computed in two passes
/// (max, then shifted compensated sum). visit(c, fn) must call fn(x) for every
/// element of chunk c; chunk partials are merged in chunk order, so the
/// result does not depend on limits.jobs.
template <class Visit, class Score>
Extended chunked_log_sum_exp(std::size_t chunk_count, Visit&& visit, Score&& score, unsigned jobs) {
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  std::vector<double> maxima(chunk_count, kNegInf);
  parallel_for(chunk_count, jobs, [&](std::size_t c) {
    double m = kNegInf;
    visit(c, [&](const auto& x) { m = std::max(m, score(x)); });
    maxima[c] = m;
  });
  double shift = kNegInf;
  for (double m : maxima) shift = std::max(shift, m);
  if (shift == kNegInf) return Extended::neg_inf();

  std::vector<CompensatedSum> partial(chunk_count);
  parallel_for(chunk_count, jobs, [&](std::size_t c) {
    if (maxima[c] == kNegInf) return;
    CompensatedSum s;
    visit(c, [&](const auto& x) { s.add(std::exp(score(x) - shift)); });
    partial[c] = s;
  });
  CompensatedSum total;
  for (const auto& s : partial) total.merge(s);
  return Extended::finite(shift + std::log(total.value()));
}

/// chunked_log_sum_exp over admissible (or cyclically admissible) n-words.
template <class Score>
Extended log_sum_exp_words(const ShiftSpace& space, int n, bool cyclic, Score&& score, unsigned jobs) {
  const WordChunks chunks = chunk_words(space, n, cyclic);
  return chunked_log_sum_exp(
      chunks.prefixes.size(),
      [&](std::size_t c, auto&& fn) { for_each_extension(space, chunks.prefixes[c], n, cyclic, fn); },
      score, jobs);
}

}  // namespace thermoform
