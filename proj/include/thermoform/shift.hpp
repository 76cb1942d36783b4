#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "thermoform/common.hpp"

namespace thermoform {

using Symbol = std::uint8_t;
using SymbolSpan = std::span<const Symbol>;

/// Largest alphabet accepted (recoded spaces included).
inline constexpr int kMaxAlphabet = 255;
/// Largest alphabet with a text form; symbols print as 0-9 then a-z.
inline constexpr int kMaxPrintableAlphabet = 36;

char symbol_char(Symbol s);
Symbol parse_symbol(char c);

/// A finite block of symbols.
class Word {
 public:
  Word() = default;
  explicit Word(std::vector<Symbol> symbols) : symbols_(std::move(symbols)) {}
  Word(SymbolSpan symbols) : symbols_(symbols.begin(), symbols.end()) {}

  /// Parses "0110"-style strings.
  static Word parse(std::string_view text);

  std::size_t size() const { return symbols_.size(); }
  bool empty() const { return symbols_.empty(); }
  Symbol operator[](std::size_t i) const { return symbols_[i]; }
  SymbolSpan symbols() const { return symbols_; }
  operator SymbolSpan() const { return symbols_; }
  std::string str() const;

  auto operator<=>(const Word&) const = default;

 private:
  std::vector<Symbol> symbols_;
};

std::string to_string(SymbolSpan w);

/// Equal-length words stored contiguously, in insertion order (which is
/// lexicographic for every enumeration in this library).
class WordList {
 public:
  explicit WordList(int length) : length_(length) {}

  int length() const { return length_; }
  std::size_t size() const { return length_ == 0 ? 0 : data_.size() / length_; }
  bool empty() const { return data_.empty(); }

  SymbolSpan operator[](std::size_t i) const {
    return SymbolSpan(data_).subspan(i * length_, length_);
  }
  Word word(std::size_t i) const { return Word((*this)[i]); }
  void push_back(SymbolSpan w);
  void reserve(std::size_t n) { data_.reserve(n * length_); }

  /// Newline-delimited symbol strings.
  std::string to_text() const;

 private:
  int length_;
  std::vector<Symbol> data_;
};

/// Box Λ(a) = {x : 0 <= x_i < a_i}.
struct Box {
  std::vector<int> sides;
  std::uint64_t volume() const;
};

/// One-sided subshift of finite type (dimension 1) or a 2-D full shift.
class ShiftSpace {
 public:
  /// Validates a 0/1 transition matrix and computes its primitivity index.
  static ShiftSpace sft(int k, const std::vector<std::vector<int>>& matrix);
  static ShiftSpace full(int k, int dimension = 1);

  int alphabet_size() const { return k_; }
  int dimension() const { return dimension_; }

  bool allowed(Symbol a, Symbol b) const { return a_[a * k_ + b] != 0; }
  const std::vector<Symbol>& successors(Symbol a) const { return successors_[a]; }
  bool admissible(SymbolSpan w) const;
  /// Admissible including the wrap transition w.back() -> w.front().
  bool cyclically_admissible(SymbolSpan w) const;

  /// Smallest m with A^m > 0 entrywise; nullopt when not primitive.
  std::optional<int> primitivity_index() const { return primitivity_index_; }
  bool is_primitive() const { return primitivity_index_.has_value(); }
  bool is_full() const;

  std::vector<std::vector<int>> matrix() const;

  bool operator==(const ShiftSpace& other) const {
    return k_ == other.k_ && dimension_ == other.dimension_ && a_ == other.a_;
  }

 private:
  ShiftSpace(int k, int dimension, std::vector<std::uint8_t> a);

  int k_;
  int dimension_;
  std::vector<std::uint8_t> a_;
  std::vector<std::vector<Symbol>> successors_;
  std::optional<int> primitivity_index_;
};

/// Base-k code of a word; lexicographic order on equal lengths is numeric order.
std::uint64_t word_code(SymbolSpan w, int k);
void decode_word(std::uint64_t code, int k, std::span<Symbol> out);
/// k^n, or nullopt when it would not fit below `cap`.
std::optional<std::uint64_t> checked_power(int k, int n, std::uint64_t cap);

/// Sum of entries of A^{n-1}, saturating at UINT64_MAX.
std::uint64_t count_admissible_words(const ShiftSpace& space, int n);
/// trace(A^n), saturating at UINT64_MAX.
std::uint64_t count_periodic_points(const ShiftSpace& space, int n);

WordList admissible_words(const ShiftSpace& space, int n, const Limits& limits = {});
WordList enumerate_periodic_points(const ShiftSpace& space, int n, const Limits& limits = {});
/// Maximal (2^-(r+1), n)-separated set, one admissible (n+r)-word per point.
WordList separated_set_representatives(const ShiftSpace& space, int n, int r,
                                       const Limits& limits = {});
/// Extends w with the least admissible symbol until it has target_len symbols.
Word canonical_extension(const ShiftSpace& space, SymbolSpan w, std::size_t target_len);

struct BlockRecoding {
  ShiftSpace space;
  int block_length;
  /// Symbol i of `space` is the block blocks[i] of the original space.
  WordList blocks;

  /// Original word of length n + m - 1 for a recoded word of length n.
  Word decode(SymbolSpan recoded) const;
  /// Recoded word of length n - m + 1 for an admissible original word.
  Word encode(SymbolSpan original, int original_alphabet) const;
};

BlockRecoding higher_block_recode(const ShiftSpace& space, int m, const Limits& limits = {});

/// Prefix-partitioned enumeration. Chunks depend only on (space, n), never
/// on the thread count, so reductions in chunk order are reproducible.
struct WordChunks {
  int word_length;
  bool cyclic;
  WordList prefixes;
};

WordChunks chunk_words(const ShiftSpace& space, int n, bool cyclic);

namespace detail {
void require_one_dimensional(const ShiftSpace& space, const char* op);
}

/// Calls fn(SymbolSpan) for every admissible (or cyclically admissible)
/// n-word starting with `prefix`, in lexicographic order.
template <class Fn>
void for_each_extension(const ShiftSpace& space, SymbolSpan prefix, int n, bool cyclic,
                        Fn&& fn) {
  std::vector<Symbol> word(prefix.begin(), prefix.end());
  const int p = static_cast<int>(prefix.size());
  if (p == n) {
    if (!cyclic || space.allowed(word.back(), word.front())) fn(SymbolSpan(word));
    return;
  }
  word.resize(n);
  // pos[i] indexes the successor list used at position i.
  std::vector<std::size_t> pos(n, 0);
  int depth = p;
  while (depth >= p) {
    const auto& succ = space.successors(word[depth - 1]);
    if (pos[depth] >= succ.size()) {
      pos[depth] = 0;
      --depth;
      if (depth >= p) ++pos[depth];
      continue;
    }
    word[depth] = succ[pos[depth]];
    if (depth == n - 1) {
      if (!cyclic || space.allowed(word[depth], word[0])) fn(SymbolSpan(word));
      ++pos[depth];
    } else {
      ++depth;
    }
  }
}

template <class Fn>
void for_each_word(const ShiftSpace& space, int n, bool cyclic, Fn&& fn) {
  const WordChunks chunks = chunk_words(space, n, cyclic);
  for (std::size_t c = 0; c < chunks.prefixes.size(); ++c)
    for_each_extension(space, chunks.prefixes[c], n, cyclic, fn);
}

}  // namespace thermoform
