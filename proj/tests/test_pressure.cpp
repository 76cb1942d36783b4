#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "thermoform/pressure.hpp"

using namespace thermoform;

namespace {

Potential random_potential(const ShiftSpace& space, int window, std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  return Potential::from_function(space, window, [&](SymbolSpan) { return u(rng); });
}

Potential log3_on_one(const ShiftSpace& s) { return std::log(3.0) * Potential::indicator(s, Word::parse("1")); }

// Direct torus energy sum for the box oracle.
double box_oracle(const PairInteraction& nn, int rows, int cols) {
  const int k = nn.alphabet_size(), cells = rows * cols;
  long total = 1;
  for (int i = 0; i < cells; ++i) total *= k;
  double z = 0.0;
  std::vector<int> g(cells);
  for (long c = 0; c < total; ++c) {
    long x = c;
    for (int i = 0; i < cells; ++i, x /= k) g[i] = static_cast<int>(x % k);
    double e = 0.0;
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j)
        e += nn(g[i * cols + j], g[i * cols + (j + 1) % cols]) + nn(g[i * cols + j], g[((i + 1) % rows) * cols + j]);
    z += std::exp(e);
  }
  return std::log(z) / cells;
}

}  // namespace

TEST_CASE("transfer matrices") {
  const auto s2 = oracle::full_shift(2);
  CHECK(weighted_transfer_matrix(s2, Potential::zero(s2, 1)).weights == Eigen::MatrixXd::Ones(2, 2));
  const auto t = weighted_transfer_matrix(s2, log3_on_one(s2));
  const Eigen::MatrixXd m = t.weights * std::exp(t.log_shift);
  CHECK(m(0, 0) == doctest::Approx(1.0));
  CHECK(m(1, 1) == doctest::Approx(3.0));
  CHECK(m(0, 1) == doctest::Approx(3.0));
  const auto g = weighted_transfer_matrix(oracle::golden_mean(), Potential::zero(oracle::golden_mean(), 1));
  CHECK(g.weights(1, 1) == 0.0);
  CHECK(g.primitive);
}

TEST_CASE("spectral pressure") {
  const auto s2 = oracle::full_shift(2);
  CHECK(pressure_spectral(s2, Potential::zero(s2, 1)).value.value() == doctest::Approx(std::log(2.0)).epsilon(1e-13));
  CHECK(pressure_spectral(oracle::golden_mean(), Potential::zero(oracle::golden_mean(), 1)).value.value() ==
        doctest::Approx(oracle::log_golden()).epsilon(1e-13));
  CHECK(pressure_spectral(s2, log3_on_one(s2)).value.value() == doctest::Approx(std::log(4.0)).epsilon(1e-13));
  const auto id = ShiftSpace::sft(2, {{1, 0}, {0, 1}});
  CHECK_THROWS_AS(pressure_spectral(id, Potential::zero(id, 1)), NotPrimitive);
  try {
    equilibrium_state(id, Potential::zero(id, 1));
  } catch (const NotPrimitive& e) {
    CHECK(std::string(e.what()).find("uniqueness premise fails") != std::string::npos);
  }
}

TEST_CASE("spectral pressure equals the periodic limit for larger windows") {
  std::mt19937_64 rng(12);
  const auto a = oracle::random_primitive(rng, 3);
  const auto s = ShiftSpace::sft(3, a);
  const auto f = random_potential(s, 3, rng);
  const double p = pressure_spectral(s, f).value.value();
  // Z_n = trace of the n-th power of the recoded weighted matrix, so (1/n) log Z_n -> P at rate 1/n.
  const double p20 = pressure_periodic(s, f, 20).value.value();
  const double p10 = pressure_periodic(s, f, 10).value.value();
  CHECK(std::abs(p20 - p) < std::abs(p10 - p) + 1e-12);
  CHECK(std::abs(p20 - p) < 0.05);
}

TEST_CASE("Perron pair of explicit matrices") {
  Eigen::MatrixXd m(2, 2);
  m << 1, 1, 1, 0;
  const PerronPair pp = perron_pair(m);
  CHECK(pp.log_lambda == doctest::Approx(oracle::log_golden()).epsilon(1e-12));
  CHECK(pp.relative_gap < 1e-12);
  CHECK(pp.right(0) / pp.right(1) == doctest::Approx((1 + std::sqrt(5.0)) / 2).epsilon(1e-12));
  // Slowly mixing chain: second eigenvalue close to the first.
  Eigen::MatrixXd slow(3, 3);
  slow << 1, 1e-6, 0, 0, 1, 1e-6, 1e-6, 0, 1;
  CHECK(perron_pair(slow).log_lambda == doctest::Approx(std::log(1 + 1e-6)).epsilon(1e-6));
}

TEST_CASE("equilibrium states") {
  const auto s2 = oracle::full_shift(2);
  const auto b = equilibrium_state(s2, log3_on_one(s2));
  CHECK(b.stationary()(1) == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(b.transition()(0, 1) == doctest::Approx(0.75).epsilon(1e-12));
  const auto gm = oracle::golden_mean();
  const auto p = equilibrium_state(gm, Potential::zero(gm, 1));
  CHECK(p.transition()(0, 0) == doctest::Approx(0.618033988749895).epsilon(1e-12));
  CHECK(p.transition()(1, 0) == doctest::Approx(1.0));
  CHECK(p.stationary()(0) == doctest::Approx(0.723606797749979).epsilon(1e-12));
}

TEST_CASE("Gibbs identity and the variational principle") {
  std::mt19937_64 rng(7);
  const auto gm = oracle::golden_mean();
  for (int trial = 0; trial < 10; ++trial) {
    const auto f = random_potential(gm, 1 + trial % 3, rng, 2.0);
    const auto mu = equilibrium_state(gm, f);
    CHECK(std::abs(variational_gap(gm, f, mu)) < 1e-10);
  }
  const auto s2 = oracle::full_shift(2);
  CHECK(variational_gap(s2, Potential::zero(s2, 1), MarkovMeasure::bernoulli(s2, {0.25, 0.75})) ==
        doctest::Approx(std::log(2.0) - 0.562335144618808).epsilon(1e-12));
  CHECK(variational_gap(s2, Potential::zero(s2, 1), MarkovMeasure::periodic_orbit(s2, Word::parse("0"))) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-13));
}

TEST_CASE("pressure properties on random potentials") {
  std::mt19937_64 rng(19);
  const auto a = oracle::random_primitive(rng, 3);
  const auto s = ShiftSpace::sft(3, a);
  std::uniform_real_distribution<double> uc(-5, 5), pos(0, 1);
  for (int trial = 0; trial < 10; ++trial) {
    const auto f = random_potential(s, 2, rng, 2.0);
    const double p = pressure_spectral(s, f).value.value();
    const double c = uc(rng);
    CHECK(std::abs(pressure_spectral(s, f + Potential::constant(s, 1, c)).value.value() - (p + c)) < 1e-10);
    const auto bump = Potential::from_function(s, 2, [&](SymbolSpan) { return pos(rng); });
    const double pg = pressure_spectral(s, f + bump).value.value();
    CHECK(p <= pg + 1e-10);
    CHECK(pg - p <= bump.sup_norm() + 1e-10);
  }
}

TEST_CASE("periodic route") {
  const auto s2 = oracle::full_shift(2);
  for (int n : {1, 5, 13}) CHECK(pressure_periodic(s2, Potential::zero(s2, 1), n).value.value() == doctest::Approx(std::log(2.0)).epsilon(1e-14));
  CHECK(pressure_periodic(oracle::golden_mean(), Potential::zero(oracle::golden_mean(), 1), 3).value.value() ==
        doctest::Approx(std::log(4.0) / 3).epsilon(1e-14));
  CHECK(pressure_periodic(s2, log3_on_one(s2), 1).value.value() == doctest::Approx(std::log(4.0)).epsilon(1e-14));
  const auto flip = ShiftSpace::sft(2, {{0, 1}, {1, 0}});
  CHECK(pressure_periodic(flip, Potential::zero(flip, 1), 3).value.is_neg_inf());
  CHECK(pressure_periodic(flip, Potential::zero(flip, 1), 4).value.value() == doctest::Approx(std::log(2.0) / 4));
  const auto gm = oracle::golden_mean();
  double prev = 1.0;
  for (int n : {8, 12, 16, 20}) {
    const double err = std::abs(pressure_periodic(gm, Potential::zero(gm, 1), n).value.value() - oracle::log_golden());
    CHECK(err < prev);
    prev = err;
  }
}

TEST_CASE("separated route") {
  const auto s2 = oracle::full_shift(2);
  CHECK(pressure_separated(s2, Potential::zero(s2, 1), 10, 2).value.value() == doctest::Approx(1.2 * std::log(2.0)).epsilon(1e-14));
  const auto one = ShiftSpace::sft(1, {{1}});
  CHECK(pressure_separated(one, Potential::zero(one, 1), 5, 1).value.value() == 0.0);
  // Brute force on a window-2 potential.
  std::mt19937_64 rng(3);
  const auto gm = oracle::golden_mean();
  const auto f = random_potential(gm, 2, rng);
  const int n = 6, r = 2;
  double z = 0.0;
  for (const auto& w : oracle::brute_words(gm.matrix(), n + r, false)) {
    std::vector<Symbol> sym(w.begin(), w.end());
    z += std::exp(f.birkhoff_sum(canonical_extension(gm, sym, n + r), n));
  }
  CHECK(pressure_separated(gm, f, n, r).value.value() == doctest::Approx(std::log(z) / n).epsilon(1e-13));
  // Bracketing on the full shift: |estimate - spectral| <= (r + 1)/n (1 + max|f|).
  const auto g = random_potential(s2, 2, rng);
  const double p = pressure_spectral(s2, g).value.value();
  for (int m : {8, 12, 16})
    CHECK(std::abs(pressure_separated(s2, g, m, 2).value.value() - p) <= 3.0 / m * (1 + g.sup_norm()));
}

TEST_CASE("results are identical across thread counts") {
  const auto gm = oracle::golden_mean();
  std::mt19937_64 rng(23);
  const auto f = random_potential(gm, 3, rng);
  Limits one, many;
  many.jobs = 8;
  CHECK(pressure_periodic(gm, f, 18, one).value.value() == pressure_periodic(gm, f, 18, many).value.value());
  CHECK(pressure_separated(gm, f, 14, 2, one).value.value() == pressure_separated(gm, f, 14, 2, many).value.value());
  const auto nn = PairInteraction::potts(2, 0.3);
  CHECK(pressure_2d_box(nn, 3, 5, one).value.value() == pressure_2d_box(nn, 3, 5, many).value.value());
}

TEST_CASE("2-D engines") {
  const auto zero = PairInteraction::zero(2);
  for (int w = 2; w <= 6; ++w) CHECK(pressure_2d_strip(zero, w).value.value() == doctest::Approx(std::log(2.0)).epsilon(1e-13));
  CHECK(pressure_2d_box(zero, 4, 5).value.value() == doctest::Approx(std::log(2.0)).epsilon(1e-14));
  const auto potts = PairInteraction::potts(2, 0.5);
  CHECK(pressure_2d_box(potts, 2, 2).value.value() == doctest::Approx(box_oracle(potts, 2, 2)).epsilon(1e-13));
  CHECK(pressure_2d_box(potts, 1, 1).value.value() == doctest::Approx(std::log(2 * std::exp(1.0))).epsilon(1e-14));
  CHECK(pressure_2d_box(potts, 3, 4).value.value() == doctest::Approx(box_oracle(potts, 3, 4)).epsilon(1e-13));
  double prev = 0.0;
  for (int w = 4; w <= 6; ++w) {
    const double v = pressure_2d_strip(potts, w).value.value();
    if (w > 4) CHECK(std::abs(v - prev) < 0.05);
    prev = v;
  }
  // box(w x L) = (1/(wL)) log tr T^L
  const Eigen::MatrixXd t = strip_transfer_matrix(potts, 3);
  Eigen::MatrixXd p = t;
  for (int i = 1; i < 4; ++i) p = p * t;
  CHECK(pressure_2d_box(potts, 4, 3).value.value() == doctest::Approx(std::log(p.trace()) / 12).epsilon(1e-12));
  CHECK_THROWS_AS(pressure_2d_strip(potts, 7), ValidationError);
  try {
    pressure_2d_box(potts, 5, 5);
    FAIL("expected cap");
  } catch (const CapExceeded& e) {
    CHECK(e.cap() == (1u << 20));
  }
}
