#include "thermoform/shift.hpp"

#include <numeric>
#include <queue>

namespace thermoform {

namespace {

constexpr std::uint64_t kSaturated = std::numeric_limits<std::uint64_t>::max();

std::uint64_t sat_add(std::uint64_t a, std::uint64_t b) {
  return a > kSaturated - b ? kSaturated : a + b;
}

// Counts of paths: v <- v * A, saturating.
std::vector<std::uint64_t> step_counts(const ShiftSpace& space, const std::vector<std::uint64_t>& v) {
  const int k = space.alphabet_size();
  std::vector<std::uint64_t> out(k, 0);
  for (int a = 0; a < k; ++a) {
    if (v[a] == 0) continue;
    for (Symbol b : space.successors(static_cast<Symbol>(a))) out[b] = sat_add(out[b], v[a]);
  }
  return out;
}

// BFS distances from `start`; -1 where unreachable.
std::vector<int> bfs_distances(const std::vector<std::vector<Symbol>>& succ, int start) {
  std::vector<int> dist(succ.size(), -1);
  std::queue<int> q;
  dist[start] = 0;
  q.push(start);
  while (!q.empty()) {
    const int u = q.front();
    q.pop();
    for (Symbol v : succ[u]) {
      if (dist[v] < 0) {
        dist[v] = dist[u] + 1;
        q.push(v);
      }
    }
  }
  return dist;
}

// Primitive iff strongly connected with period 1. Index found by boolean
// powers on packed rows, bounded by Wielandt's (k-1)^2 + 1.
std::optional<int> compute_primitivity_index(int k, const std::vector<std::vector<Symbol>>& succ) {
  const auto fwd = bfs_distances(succ, 0);
  std::vector<std::vector<Symbol>> pred(k);
  for (int u = 0; u < k; ++u)
    for (Symbol v : succ[u]) pred[v].push_back(static_cast<Symbol>(u));
  const auto bwd = bfs_distances(pred, 0);
  for (int u = 0; u < k; ++u)
    if (fwd[u] < 0 || bwd[u] < 0) return std::nullopt;

  int period = 0;
  for (int u = 0; u < k; ++u)
    for (Symbol v : succ[u]) period = std::gcd(period, std::abs(fwd[u] + 1 - fwd[v]));
  if (period != 1) return std::nullopt;

  const int words = (k + 63) / 64;
  using Rows = std::vector<std::uint64_t>;
  Rows base(static_cast<std::size_t>(k) * words, 0);
  for (int u = 0; u < k; ++u)
    for (Symbol v : succ[u]) base[u * words + v / 64] |= std::uint64_t{1} << (v % 64);
  auto all_positive = [&](const Rows& m) {
    for (int u = 0; u < k; ++u)
      for (int w = 0; w < words; ++w) {
        const int bits = std::min(64, k - 64 * w);
        const std::uint64_t full = bits == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << bits) - 1;
        if (m[u * words + w] != full) return false;
      }
    return true;
  };
  Rows power = base;
  const long bound = static_cast<long>(k - 1) * (k - 1) + 1;
  for (long m = 1; m <= bound; ++m) {
    if (all_positive(power)) return static_cast<int>(m);
    Rows next(power.size(), 0);
    for (int u = 0; u < k; ++u)
      for (int j = 0; j < k; ++j)
        if (power[u * words + j / 64] >> (j % 64) & 1)
          for (int w = 0; w < words; ++w) next[u * words + w] |= base[j * words + w];
    power.swap(next);
  }
  return std::nullopt;
}

void check_cap(std::uint64_t count, const Limits& limits, const std::string& what) {
  if (count > limits.enumeration_cap) throw CapExceeded(what, limits.enumeration_cap);
}

}  // namespace

char symbol_char(Symbol s) {
  return s < 10 ? static_cast<char>('0' + s) : static_cast<char>('a' + (s - 10));
}

Symbol parse_symbol(char c) {
  if (c >= '0' && c <= '9') return static_cast<Symbol>(c - '0');
  if (c >= 'a' && c <= 'z') return static_cast<Symbol>(10 + (c - 'a'));
  throw ValidationError(std::string("invalid symbol character '") + c + "'");
}

Word Word::parse(std::string_view text) {
  std::vector<Symbol> s;
  s.reserve(text.size());
  for (char c : text) s.push_back(parse_symbol(c));
  return Word(std::move(s));
}

std::string to_string(SymbolSpan w) {
  std::string s;
  s.reserve(w.size());
  for (Symbol x : w) s.push_back(symbol_char(x));
  return s;
}

std::string Word::str() const { return to_string(symbols_); }

void WordList::push_back(SymbolSpan w) {
  if (static_cast<int>(w.size()) != length_) throw Error("WordList: length mismatch");
  data_.insert(data_.end(), w.begin(), w.end());
}

std::string WordList::to_text() const {
  std::string out;
  for (std::size_t i = 0; i < size(); ++i) {
    out += to_string((*this)[i]);
    out += '\n';
  }
  return out;
}

std::uint64_t Box::volume() const {
  std::uint64_t v = 1;
  for (int s : sides) v *= static_cast<std::uint64_t>(s);
  return v;
}

ShiftSpace::ShiftSpace(int k, int dimension, std::vector<std::uint8_t> a)
    : k_(k), dimension_(dimension), a_(std::move(a)), successors_(k) {
  for (int u = 0; u < k_; ++u)
    for (int v = 0; v < k_; ++v)
      if (a_[u * k_ + v]) successors_[u].push_back(static_cast<Symbol>(v));
  primitivity_index_ = compute_primitivity_index(k_, successors_);
}

ShiftSpace ShiftSpace::sft(int k, const std::vector<std::vector<int>>& matrix) {
  if (k < 1 || k > kMaxAlphabet)
    throw ValidationError("alphabet size k must be in [1, " + std::to_string(kMaxAlphabet) + "]");
  if (static_cast<int>(matrix.size()) != k)
    throw ValidationError("transition matrix must be k x k (has " + std::to_string(matrix.size()) +
                          " rows, k = " + std::to_string(k) + ")");
  std::vector<std::uint8_t> a(static_cast<std::size_t>(k) * k);
  for (int u = 0; u < k; ++u) {
    if (static_cast<int>(matrix[u].size()) != k)
      throw ValidationError("transition matrix row " + std::to_string(u) + " has " +
                            std::to_string(matrix[u].size()) + " entries, expected " +
                            std::to_string(k));
    for (int v = 0; v < k; ++v) {
      const int e = matrix[u][v];
      if (e != 0 && e != 1)
        throw ValidationError("transition matrix entry (" + std::to_string(u) + "," +
                              std::to_string(v) + ") is not 0 or 1");
      a[u * k + v] = static_cast<std::uint8_t>(e);
    }
  }
  for (int u = 0; u < k; ++u) {
    bool row = false, col = false;
    for (int v = 0; v < k; ++v) {
      row = row || a[u * k + v];
      col = col || a[v * k + u];
    }
    if (!row) throw ValidationError("transition matrix row " + std::to_string(u) + " is zero (stranded symbol)");
    if (!col) throw ValidationError("transition matrix column " + std::to_string(u) + " is zero (stranded symbol)");
  }
  return ShiftSpace(k, 1, std::move(a));
}

ShiftSpace ShiftSpace::full(int k, int dimension) {
  if (k < 1 || k > kMaxAlphabet)
    throw ValidationError("alphabet size k must be in [1, " + std::to_string(kMaxAlphabet) + "]");
  if (dimension != 1 && dimension != 2) throw ValidationError("dimension must be 1 or 2");
  return ShiftSpace(k, dimension, std::vector<std::uint8_t>(static_cast<std::size_t>(k) * k, 1));
}

bool ShiftSpace::admissible(SymbolSpan w) const {
  for (Symbol s : w)
    if (s >= k_) return false;
  for (std::size_t i = 1; i < w.size(); ++i)
    if (!allowed(w[i - 1], w[i])) return false;
  return true;
}

bool ShiftSpace::cyclically_admissible(SymbolSpan w) const {
  return !w.empty() && admissible(w) && allowed(w.back(), w.front());
}

bool ShiftSpace::is_full() const {
  return std::all_of(a_.begin(), a_.end(), [](std::uint8_t e) { return e == 1; });
}

std::vector<std::vector<int>> ShiftSpace::matrix() const {
  std::vector<std::vector<int>> m(k_, std::vector<int>(k_));
  for (int u = 0; u < k_; ++u)
    for (int v = 0; v < k_; ++v) m[u][v] = a_[u * k_ + v];
  return m;
}

std::uint64_t word_code(SymbolSpan w, int k) {
  std::uint64_t c = 0;
  for (Symbol s : w) c = c * static_cast<std::uint64_t>(k) + s;
  return c;
}

void decode_word(std::uint64_t code, int k, std::span<Symbol> out) {
  for (std::size_t i = out.size(); i-- > 0;) {
    out[i] = static_cast<Symbol>(code % k);
    code /= k;
  }
}

std::optional<std::uint64_t> checked_power(int k, int n, std::uint64_t cap) {
  std::uint64_t p = 1;
  for (int i = 0; i < n; ++i) {
    if (p > cap / static_cast<std::uint64_t>(k)) return std::nullopt;
    p *= k;
  }
  return p;
}

namespace detail {
void require_one_dimensional(const ShiftSpace& space, const char* op) {
  if (space.dimension() != 1) throw ValidationError(std::string(op) + " requires a one-dimensional shift");
}
}  // namespace detail

std::uint64_t count_admissible_words(const ShiftSpace& space, int n) {
  if (n < 1) return 0;
  std::vector<std::uint64_t> v(space.alphabet_size(), 1);
  for (int i = 1; i < n; ++i) v = step_counts(space, v);
  std::uint64_t total = 0;
  for (auto x : v) total = sat_add(total, x);
  return total;
}

std::uint64_t count_periodic_points(const ShiftSpace& space, int n) {
  if (n < 1) return 0;
  const int k = space.alphabet_size();
  std::uint64_t total = 0;
  for (int a = 0; a < k; ++a) {
    std::vector<std::uint64_t> v(k, 0);
    v[a] = 1;
    for (int i = 0; i < n; ++i) v = step_counts(space, v);
    total = sat_add(total, v[a]);
  }
  return total;
}

WordChunks chunk_words(const ShiftSpace& space, int n, bool cyclic) {
  constexpr std::uint64_t kTargetChunks = 64;
  int p = 1;
  while (p < n && count_admissible_words(space, p) < kTargetChunks) ++p;
  WordChunks chunks{n, cyclic, WordList(p)};
  // Prefixes are plain admissible words; cyclic closure is checked at full length.
  std::vector<Symbol> start(1);
  for (int a = 0; a < space.alphabet_size(); ++a) {
    start[0] = static_cast<Symbol>(a);
    for_each_extension(space, start, p, false, [&](SymbolSpan w) { chunks.prefixes.push_back(w); });
  }
  return chunks;
}

WordList admissible_words(const ShiftSpace& space, int n, const Limits& limits) {
  detail::require_one_dimensional(space, "admissible_words");
  if (n < 1) throw ValidationError("word length must be >= 1");
  const auto count = count_admissible_words(space, n);
  check_cap(count, limits, "admissible word count for n = " + std::to_string(n));
  WordList out(n);
  out.reserve(count);
  for_each_word(space, n, false, [&](SymbolSpan w) { out.push_back(w); });
  return out;
}

WordList enumerate_periodic_points(const ShiftSpace& space, int n, const Limits& limits) {
  detail::require_one_dimensional(space, "enumerate_periodic_points");
  if (n < 1) throw ValidationError("period must be >= 1");
  const auto count = count_periodic_points(space, n);
  check_cap(count, limits, "periodic point count for n = " + std::to_string(n));
  WordList out(n);
  out.reserve(count);
  for_each_word(space, n, true, [&](SymbolSpan w) { out.push_back(w); });
  return out;
}

WordList separated_set_representatives(const ShiftSpace& space, int n, int r, const Limits& limits) {
  if (n < 1 || r < 0) throw ValidationError("separated set needs n >= 1 and r >= 0");
  return admissible_words(space, n + r, limits);
}

Word canonical_extension(const ShiftSpace& space, SymbolSpan w, std::size_t target_len) {
  if (target_len < w.size()) throw ValidationError("canonical_extension: target shorter than word");
  std::vector<Symbol> out(w.begin(), w.end());
  if (out.empty() && target_len > 0) out.push_back(0);
  while (out.size() < target_len) out.push_back(space.successors(out.back()).front());
  return Word(std::move(out));
}

Word BlockRecoding::decode(SymbolSpan recoded) const {
  if (recoded.empty()) return Word();
  std::vector<Symbol> out;
  const auto first = blocks[recoded[0]];
  out.assign(first.begin(), first.end());
  for (std::size_t i = 1; i < recoded.size(); ++i) out.push_back(blocks[recoded[i]].back());
  return Word(std::move(out));
}

Word BlockRecoding::encode(SymbolSpan original, int original_alphabet) const {
  const int m = block_length;
  if (static_cast<int>(original.size()) < m) throw ValidationError("word shorter than block length");
  std::vector<Symbol> out;
  for (std::size_t i = 0; i + m <= original.size(); ++i) {
    const auto code = word_code(original.subspan(i, m), original_alphabet);
    std::size_t lo = 0, hi = blocks.size();
    while (lo < hi) {
      const std::size_t mid = (lo + hi) / 2;
      if (word_code(blocks[mid], original_alphabet) < code) lo = mid + 1; else hi = mid;
    }
    if (lo == blocks.size() || word_code(blocks[lo], original_alphabet) != code)
      throw ValidationError("word is not admissible: " + to_string(original));
    out.push_back(static_cast<Symbol>(lo));
  }
  return Word(std::move(out));
}

BlockRecoding higher_block_recode(const ShiftSpace& space, int m, const Limits& limits) {
  detail::require_one_dimensional(space, "higher_block_recode");
  if (m < 1) throw ValidationError("block length must be >= 1");
  if (m == 1) return BlockRecoding{space, 1, admissible_words(space, 1, limits)};
  WordList blocks = admissible_words(space, m, limits);
  const int k = static_cast<int>(blocks.size());
  if (k > kMaxAlphabet) throw CapExceeded("recoded alphabet size " + std::to_string(k), kMaxAlphabet);
  std::vector<std::vector<int>> a(k, std::vector<int>(k, 0));
  for (int u = 0; u < k; ++u)
    for (int v = 0; v < k; ++v) {
      const auto bu = blocks[u], bv = blocks[v];
      a[u][v] = std::equal(bu.begin() + 1, bu.end(), bv.begin()) && space.allowed(bu.back(), bv.back());
    }
  return BlockRecoding{ShiftSpace::sft(k, a), m, std::move(blocks)};
}

}  // namespace thermoform
