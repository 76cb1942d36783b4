#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "thermoform/shift.hpp"

using namespace thermoform;

namespace {

std::vector<std::string> texts(const WordList& l) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < l.size(); ++i) out.push_back(to_string(l[i]));
  return out;
}

// Bowen distance over the first n positions: 2^-(first disagreement).
double bowen_distance(SymbolSpan a, SymbolSpan b, int n) {
  double d = 0.0;
  for (int x = 0; x < n; ++x)
    for (std::size_t j = x; j < a.size(); ++j)
      if (a[j] != b[j]) {
        d = std::max(d, std::ldexp(1.0, -static_cast<int>(j - x)));
        break;
      }
  return d;
}

}  // namespace

TEST_CASE("build_sft validates and computes primitivity") {
  CHECK(oracle::full_shift(2).primitivity_index() == 1);
  CHECK(oracle::golden_mean().primitivity_index() == 2);
  const auto id = ShiftSpace::sft(2, {{1, 0}, {0, 1}});
  CHECK_FALSE(id.is_primitive());
  CHECK_THROWS_AS(ShiftSpace::sft(2, {{1, 1}, {0, 0}}), ValidationError);
  CHECK_THROWS_AS(ShiftSpace::sft(2, {{1, 0}, {1, 0}}), ValidationError);
  CHECK_THROWS_AS(ShiftSpace::sft(2, {{1, 2}, {1, 1}}), ValidationError);
  CHECK_THROWS_AS(ShiftSpace::sft(2, {{1, 1}}), ValidationError);
  try {
    ShiftSpace::sft(3, {{1, 1, 0}, {0, 0, 0}, {1, 1, 1}});
    FAIL("expected error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("row 1") != std::string::npos);
  }
  // Period 2: irreducible but never primitive.
  CHECK_FALSE(ShiftSpace::sft(2, {{0, 1}, {1, 0}}).is_primitive());
}

TEST_CASE("primitivity index matches the first positive power") {
  std::mt19937_64 rng(17);
  std::bernoulli_distribution coin(0.45);
  int checked = 0;
  while (checked < 30) {
    const int k = 2 + static_cast<int>(rng() % 4);
    std::vector<std::vector<int>> a(k, std::vector<int>(k));
    for (auto& row : a)
      for (auto& v : row) v = coin(rng);
    std::optional<ShiftSpace> s;
    try {
      s = ShiftSpace::sft(k, a);
    } catch (const ValidationError&) {
      continue;
    }
    ++checked;
    std::optional<int> first;
    for (int m = 1; m <= (k - 1) * (k - 1) + 1 && !first; ++m) {
      const auto p = oracle::power(a, m);
      bool pos = true;
      for (const auto& row : p)
        for (auto v : row) pos = pos && v > 0;
      if (pos) first = m;
    }
    CHECK(s->primitivity_index() == first);
  }
}

TEST_CASE("admissible words") {
  CHECK(admissible_words(oracle::full_shift(2), 3).size() == 8);
  CHECK(texts(admissible_words(oracle::golden_mean(), 3)) == std::vector<std::string>{"000", "001", "010", "100", "101"});
  CHECK(admissible_words(oracle::golden_mean(), 1).size() == 2);
  Limits tiny;
  tiny.enumeration_cap = 10;
  CHECK_THROWS_AS(admissible_words(oracle::full_shift(2), 4, tiny), CapExceeded);
}

TEST_CASE("word counts agree with brute force and matrix powers") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 4; ++trial) {
    const auto a = oracle::random_primitive(rng, 3);
    const auto s = ShiftSpace::sft(3, a);
    for (int n = 1; n <= 9; ++n) {
      const auto words = admissible_words(s, n);
      const auto brute = oracle::brute_words(a, n, false);
      REQUIRE(words.size() == brute.size());
      CHECK(words.size() == oracle::sum_power(a, n - 1));
      CHECK(count_admissible_words(s, n) == words.size());
      for (std::size_t i = 0; i < words.size(); ++i)
        for (int j = 0; j < n; ++j) CHECK(words[i][j] == brute[i][j]);
    }
    for (int n = 1; n <= 12; ++n) {
      CHECK(enumerate_periodic_points(s, n).size() == oracle::trace_power(a, n));
      CHECK(count_periodic_points(s, n) == oracle::trace_power(a, n));
    }
  }
}

TEST_CASE("periodic points") {
  CHECK(enumerate_periodic_points(oracle::full_shift(2), 2).size() == 4);
  CHECK(texts(enumerate_periodic_points(oracle::golden_mean(), 3)) == std::vector<std::string>{"000", "001", "010", "100"});
  CHECK(texts(enumerate_periodic_points(oracle::golden_mean(), 1)) == std::vector<std::string>{"0"});
  const std::vector<std::uint64_t> lucas{1, 3, 4, 7, 11, 18, 29, 47, 76, 123};
  for (int n = 1; n <= 10; ++n) CHECK(count_periodic_points(oracle::golden_mean(), n) == lucas[n - 1]);
  const auto pts = enumerate_periodic_points(oracle::golden_mean(), 8);
  for (std::size_t i = 0; i < pts.size(); ++i) CHECK(oracle::golden_mean().cyclically_admissible(pts[i]));
}

TEST_CASE("separated set representatives") {
  CHECK(separated_set_representatives(oracle::full_shift(2), 10, 2).size() == 4096);
  CHECK(separated_set_representatives(oracle::golden_mean(), 2, 1).size() == 5);
  CHECK(texts(separated_set_representatives(oracle::golden_mean(), 1, 0)) == texts(admissible_words(oracle::golden_mean(), 1)));
}

TEST_CASE("separated sets are maximal and separated in the Bowen metric") {
  const auto gm = oracle::golden_mean();
  for (int n = 1; n <= 4; ++n)
    for (int r = 0; r <= 3; ++r) {
      const double eps = std::ldexp(1.0, -(r + 1));
      const int len = n + r + 2;
      const auto reps = separated_set_representatives(gm, n, r);
      std::vector<Word> ext;
      for (std::size_t i = 0; i < reps.size(); ++i) ext.push_back(canonical_extension(gm, reps[i], len));
      for (std::size_t i = 0; i < ext.size(); ++i)
        for (std::size_t j = i + 1; j < ext.size(); ++j) CHECK(bowen_distance(ext[i], ext[j], n) > eps);
      // Every point (approximated by a longer word) lies within eps of some representative.
      const auto all = admissible_words(gm, len);
      for (std::size_t i = 0; i < all.size(); ++i) {
        double best = 1.0;
        for (const auto& e : ext) best = std::min(best, bowen_distance(all[i], e, n));
        CHECK(best <= eps);
      }
    }
}

TEST_CASE("canonical extension") {
  CHECK(canonical_extension(oracle::golden_mean(), Word::parse("01"), 4).str() == "0100");
  CHECK(canonical_extension(oracle::full_shift(2), Word::parse("1"), 3).str() == "100");
  CHECK(canonical_extension(oracle::golden_mean(), Word::parse("0101"), 4).str() == "0101");
}

TEST_CASE("higher block recoding") {
  const auto gm2 = higher_block_recode(oracle::golden_mean(), 2);
  CHECK(gm2.space.alphabet_size() == 3);
  CHECK(texts(gm2.blocks) == std::vector<std::string>{"00", "01", "10"});
  CHECK(gm2.space.matrix() == std::vector<std::vector<int>>{{1, 1, 0}, {0, 0, 1}, {1, 1, 0}});
  CHECK(higher_block_recode(oracle::golden_mean(), 1).space == oracle::golden_mean());
  const auto f2 = higher_block_recode(oracle::full_shift(2), 2);
  for (int a = 0; a < 4; ++a) CHECK(f2.space.successors(static_cast<Symbol>(a)).size() == 2);

  std::mt19937_64 rng(8);
  const auto a = oracle::random_primitive(rng, 3);
  const auto s = ShiftSpace::sft(3, a);
  for (int m = 1; m <= 4; ++m) {
    const auto rec = higher_block_recode(s, m);
    for (int n = 1; n <= 8; ++n) CHECK(count_admissible_words(rec.space, n) == count_admissible_words(s, n + m - 1));
    const auto words = admissible_words(s, 6 + m - 1);
    for (std::size_t i = 0; i < words.size(); i += 7) {
      const Word enc = rec.encode(words[i], 3);
      CHECK(rec.space.admissible(enc));
      CHECK(rec.decode(enc) == words.word(i));
    }
  }
}

TEST_CASE("words and codes") {
  const Word w = Word::parse("0z9a");
  CHECK(w.str() == "0z9a");
  CHECK(w[1] == 35);
  CHECK_THROWS_AS(Word::parse("0-1"), ValidationError);
  std::vector<Symbol> out(4);
  decode_word(word_code(w, 36), 36, out);
  CHECK(Word(out) == w);
  CHECK(admissible_words(oracle::golden_mean(), 2).to_text() == "00\n01\n10\n");
  CHECK(Box{{3, 4}}.volume() == 12);
  CHECK_FALSE(checked_power(2, 30, 1 << 20).has_value());
  CHECK(checked_power(3, 4, 100) == 81u);
}

TEST_CASE("chunked enumeration visits every word in lexicographic order") {
  const auto s = oracle::full_shift(3);
  std::vector<std::uint64_t> codes;
  for_each_word(s, 7, false, [&](SymbolSpan w) { codes.push_back(word_code(w, 3)); });
  REQUIRE(codes.size() == 2187);
  for (std::size_t i = 0; i < codes.size(); ++i) CHECK(codes[i] == i);
}

TEST_CASE("2-D spaces reject one-dimensional operations") {
  const auto s = ShiftSpace::full(2, 2);
  CHECK(s.dimension() == 2);
  CHECK_THROWS_AS(enumerate_periodic_points(s, 3), ValidationError);
}
