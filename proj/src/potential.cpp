#include "thermoform/potential.hpp"

#include <algorithm>
#include <limits>

namespace thermoform {

namespace {

std::uint64_t table_size(const ShiftSpace& space, int window, const Limits& limits) {
  detail::require_one_dimensional(space, "Potential");
  if (window < 1) throw ValidationError("potential window must be >= 1");
  const auto size = checked_power(space.alphabet_size(), window, limits.enumeration_cap);
  if (!size)
    throw CapExceeded("potential table k^" + std::to_string(window), limits.enumeration_cap);
  return *size;
}

std::vector<std::uint64_t> admissible_codes(const ShiftSpace& space, int window, const Limits& limits) {
  const WordList words = admissible_words(space, window, limits);
  std::vector<std::uint64_t> codes(words.size());
  for (std::size_t i = 0; i < words.size(); ++i) codes[i] = word_code(words[i], space.alphabet_size());
  return codes;
}

}  // namespace

Potential Potential::from_function(const ShiftSpace& space, int window,
                                   const std::function<double(SymbolSpan)>& fn, const Limits& limits) {
  const auto size = table_size(space, window, limits);
  auto codes = admissible_codes(space, window, limits);
  std::vector<double> values(size, std::numeric_limits<double>::quiet_NaN());
  std::vector<Symbol> w(window);
  for (auto c : codes) {
    decode_word(c, space.alphabet_size(), w);
    const double v = fn(w);
    if (!std::isfinite(v)) throw ValidationError("potential value on " + to_string(w) + " is not finite");
    values[c] = v;
  }
  return Potential(space, window, std::move(values), std::move(codes));
}

Potential Potential::zero(const ShiftSpace& space, int window, const Limits& limits) {
  return constant(space, window, 0.0, limits);
}

Potential Potential::constant(const ShiftSpace& space, int window, double c, const Limits& limits) {
  return from_function(space, window, [c](SymbolSpan) { return c; }, limits);
}

Potential Potential::from_values(const ShiftSpace& space, int window,
                                 const std::map<std::string, double>& values, const Limits& limits) {
  for (const auto& [word, value] : values) {
    Word w;
    try {
      w = Word::parse(word);
    } catch (const ValidationError&) {
      throw ValidationError("potential word \"" + word + "\" has an invalid symbol");
    }
    if (static_cast<int>(w.size()) != window)
      throw ValidationError("potential word \"" + word + "\" has length " + std::to_string(w.size()) +
                            ", expected window " + std::to_string(window));
    if (!space.admissible(w))
      throw ValidationError("potential word \"" + word + "\" is not admissible");
    if (!std::isfinite(value)) throw ValidationError("potential value on \"" + word + "\" is not finite");
  }
  return from_function(
      space, window,
      [&](SymbolSpan w) {
        const auto it = values.find(to_string(w));
        if (it == values.end())
          throw ValidationError("potential is missing admissible word \"" + to_string(w) + "\"");
        return it->second;
      },
      limits);
}

Potential Potential::indicator(const ShiftSpace& space, SymbolSpan w, const Limits& limits) {
  if (!space.admissible(w)) throw ValidationError("indicator word " + to_string(w) + " is not admissible");
  const Word target(w);
  return from_function(
      space, static_cast<int>(w.size()),
      [&](SymbolSpan x) { return std::equal(x.begin(), x.end(), target.symbols().begin()) ? 1.0 : 0.0; },
      limits);
}

WordList Potential::words() const {
  WordList out(window_);
  std::vector<Symbol> w(window_);
  for (auto c : codes_) {
    decode_word(c, space_.alphabet_size(), w);
    out.push_back(w);
  }
  return out;
}

double Potential::max_value() const {
  double m = -std::numeric_limits<double>::infinity();
  for (auto c : codes_) m = std::max(m, values_[c]);
  return m;
}

double Potential::min_value() const {
  double m = std::numeric_limits<double>::infinity();
  for (auto c : codes_) m = std::min(m, values_[c]);
  return m;
}

double Potential::sup_norm() const { return std::max(std::abs(max_value()), std::abs(min_value())); }

Potential Potential::extended(int window, const Limits& limits) const {
  if (window < window_) throw ValidationError("cannot shrink a potential window");
  if (window == window_) return *this;
  return from_function(space_, window, [this](SymbolSpan w) { return (*this)(w); }, limits);
}

Potential& Potential::add_scaled(const Potential& other, double c) {
  if (!(other.space_ == space_)) throw ValidationError("potentials live on different spaces");
  if (other.window_ > window_) *this = extended(other.window_);
  std::vector<Symbol> w(window_);
  const int k = space_.alphabet_size();
  for (auto code : codes_) {
    decode_word(code, k, w);
    values_[code] += c * other(w);
  }
  return *this;
}

Potential& Potential::operator+=(const Potential& other) { return add_scaled(other, 1.0); }

Potential& Potential::operator*=(double c) {
  for (auto code : codes_) values_[code] *= c;
  return *this;
}

double Potential::birkhoff_sum(SymbolSpan w, int n) const {
  if (static_cast<int>(w.size()) < n + window_ - 1) throw Error("birkhoff_sum: word too short");
  const int k = space_.alphabet_size();
  const std::uint64_t top = *checked_power(k, window_ - 1, std::numeric_limits<std::uint64_t>::max());
  std::uint64_t code = word_code(w.first(window_), k);
  double s = values_[code];
  for (int x = 1; x < n; ++x) {
    code = (code % top) * k + w[x + window_ - 1];
    s += values_[code];
  }
  return s;
}

double Potential::cyclic_birkhoff_sum(SymbolSpan cycle) const {
  const std::size_t n = cycle.size();
  const int k = space_.alphabet_size();
  const std::uint64_t top = *checked_power(k, window_ - 1, std::numeric_limits<std::uint64_t>::max());
  std::uint64_t code = 0;
  for (int i = 0; i < window_; ++i) code = code * k + cycle[i % n];
  double s = values_[code];
  for (std::size_t x = 1; x < n; ++x) {
    code = (code % top) * k + cycle[(x + window_ - 1) % n];
    s += values_[code];
  }
  return s;
}

ObservableFamily::ObservableFamily(std::vector<Potential> members, const Limits& limits) {
  if (members.empty()) throw ValidationError("observable family must have at least one member");
  window_ = 0;
  for (const auto& g : members) {
    if (!(g.space() == members.front().space()))
      throw ValidationError("observables live on different spaces");
    window_ = std::max(window_, g.window());
  }
  members_.reserve(members.size());
  for (auto& g : members) members_.push_back(g.extended(window_, limits));
}

Potential ObservableFamily::combination(std::span<const double> t) const {
  if (t.size() != members_.size()) throw ValidationError("coefficient vector has wrong dimension");
  Potential out = Potential::zero(space(), window_);
  for (std::size_t j = 0; j < t.size(); ++j)
    if (t[j] != 0.0) out.add_scaled(members_[j], t[j]);
  return out;
}

void ObservableFamily::evaluate(SymbolSpan w, std::span<double> out) const {
  const std::uint64_t code = word_code(w.first(window_), space().alphabet_size());
  for (std::size_t j = 0; j < members_.size(); ++j) out[j] = members_[j].at_code(code);
}

}  // namespace thermoform
