#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "thermoform/ldp.hpp"

using namespace thermoform;

namespace {

ObservableFamily ones(const ShiftSpace& space) { return ObservableFamily({Potential::indicator(space, Word::parse("1"))}); }

double mass_at(const WeightedPointCloud& c, double x) {
  double m = 0.0;
  for (const auto& a : c.atoms)
    if (std::abs(a.point[0] - x) < 1e-12) m += a.weight;
  return m;
}

}  // namespace

TEST_CASE("periodic clouds") {
  const auto s2 = oracle::full_shift(2);
  const auto c1 = empirical_distribution_periodic(s2, Potential::zero(s2, 1), 1, ones(s2));
  REQUIRE(c1.atoms.size() == 2);
  CHECK(mass_at(c1, 0.0) == doctest::Approx(0.5));
  const auto c2 = empirical_distribution_periodic(s2, Potential::zero(s2, 1), 2, ones(s2));
  REQUIRE(c2.atoms.size() == 4);
  CHECK(mass_at(c2, 0.5) == doctest::Approx(0.5));
  const Potential f = std::log(3.0) * Potential::indicator(s2, Word::parse("1"));
  const auto c3 = empirical_distribution_periodic(s2, f, 1, ones(s2));
  CHECK(mass_at(c3, 0.0) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(mass_at(c3, 1.0) == doctest::Approx(0.75).epsilon(1e-14));
  CHECK(c3.provenance == Variant::periodic);
}

TEST_CASE("separated clouds") {
  const auto s2 = oracle::full_shift(2);
  CHECK(empirical_distribution_separated(s2, Potential::zero(s2, 1), 1, 0, ones(s2)).atoms.size() == 2);
  const auto gm = oracle::golden_mean();
  const auto c = empirical_distribution_separated(gm, Potential::zero(gm, 1), 2, 0, ones(gm));
  REQUIRE(c.atoms.size() == 3);
  CHECK(mass_at(c, 0.0) == doctest::Approx(1.0 / 3));
  CHECK(mass_at(c, 0.5) == doctest::Approx(2.0 / 3));
}

TEST_CASE("periodic and separated clouds coincide for window-1 potentials on the full shift") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1, 1);
  const auto s3 = oracle::full_shift(3);
  const Potential f = Potential::from_function(s3, 1, [&](SymbolSpan) { return u(rng); });
  const ObservableFamily fam({Potential::indicator(s3, Word::parse("2")), Potential::indicator(s3, Word::parse("0"))});
  const auto p = empirical_distribution_periodic(s3, f, 5, fam);
  const auto s = empirical_distribution_separated(s3, f, 5, 0, fam);
  REQUIRE(p.atoms.size() == s.atoms.size());
  for (std::size_t i = 0; i < p.atoms.size(); ++i) {
    CHECK(p.atoms[i].weight == s.atoms[i].weight);
    CHECK(p.atoms[i].point == s.atoms[i].point);
  }
}

TEST_CASE("gibbs cloud is the binomial law for Bernoulli measures") {
  const auto s2 = oracle::full_shift(2);
  for (int n : {1, 4, 13, 20}) {
    const auto c = empirical_distribution_gibbs(s2, Potential::zero(s2, 1), n, ones(s2));
    REQUIRE(c.atoms.size() == static_cast<std::size_t>(n + 1));
    for (int j = 0; j <= n; ++j)
      CHECK(c.atoms[j].weight == doctest::Approx(oracle::binomial(n, j) / std::pow(2.0, n)).epsilon(1e-14));
  }
  SUBCASE("biased coin") {
    const Potential f = std::log(3.0) * Potential::indicator(s2, Word::parse("1"));
    const auto c = empirical_distribution_gibbs(s2, f, 2, ones(s2));
    CHECK(mass_at(c, 0.0) == doctest::Approx(1.0 / 16).epsilon(1e-12));
    CHECK(mass_at(c, 0.5) == doctest::Approx(6.0 / 16).epsilon(1e-12));
    CHECK(mass_at(c, 1.0) == doctest::Approx(9.0 / 16).epsilon(1e-12));
  }
}

TEST_CASE("gibbs dynamic programme matches word enumeration") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-1, 1);
  const auto gm = oracle::golden_mean();
  const Potential f = Potential::from_function(gm, 3, [&](SymbolSpan) { return u(rng); });
  const ObservableFamily fam({Potential::indicator(gm, Word::parse("00")), Potential::indicator(gm, Word::parse("1"))});
  for (int n : {1, 2, 7}) {
    const auto a = empirical_distribution_gibbs(gm, f, n, fam);
    const auto b = empirical_distribution_gibbs_enumerated(gm, f, n, fam);
    REQUIRE(a.atoms.size() == b.atoms.size());
    for (std::size_t i = 0; i < a.atoms.size(); ++i) {
      CHECK(a.atoms[i].weight == doctest::Approx(b.atoms[i].weight).epsilon(1e-12));
      CHECK(a.atoms[i].point[0] == doctest::Approx(b.atoms[i].point[0]).epsilon(1e-12));
    }
    CHECK(a.total_weight() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("rate_estimate") {
  const auto s2 = oracle::full_shift(2);
  const auto c = empirical_distribution_gibbs(s2, Potential::zero(s2, 1), 20, ones(s2));
  const auto r = rate_estimate(c, BoxQuery::closed({0.8}, {1.0}));
  CHECK(r.value.value() == doctest::Approx(std::log(6196.0 / 1048576.0) / 20).epsilon(1e-13));
  CHECK(rate_estimate(c, BoxQuery::closed({-1}, {2})).value.value() == 0.0);
  CHECK(rate_estimate(c, BoxQuery::closed({0.81}, {0.84})).value.is_neg_inf());
  BoxQuery open = BoxQuery::closed({0.8}, {1.0});
  open.lo_closed[0] = false;
  CHECK(rate_estimate(c, open).mass == doctest::Approx((6196.0 - 4845.0) / 1048576.0).epsilon(1e-13));
  CHECK_THROWS_AS(BoxQuery::closed({1.0}, {0.5}), ValidationError);
}

TEST_CASE("inf_rate_over_box") {
  const auto s2 = oracle::full_shift(2);
  const RateFunctionHandle h(s2, Potential::zero(s2, 1), ones(s2));
  CHECK(inf_rate_over_box(h, BoxQuery::closed({0.3}, {0.6})).value.value() == 0.0);
  CHECK(inf_rate_over_box(h, BoxQuery::closed({0.8}, {1.0})).value.value() ==
        doctest::Approx(oracle::coin_rate(0.8)).epsilon(1e-10));
  CHECK(inf_rate_over_box(h, BoxQuery::closed({0.0}, {0.1})).value.value() ==
        doctest::Approx(oracle::coin_rate(0.1)).epsilon(1e-10));
  CHECK(inf_rate_over_box(h, BoxQuery::closed({1.1}, {1.2})).value.is_pos_inf());

  SUBCASE("two observables") {
    const auto s3 = oracle::full_shift(3);
    const ObservableFamily fam({Potential::indicator(s3, Word::parse("0")), Potential::indicator(s3, Word::parse("1"))});
    const RateFunctionHandle h3(s3, Potential::zero(s3, 1), fam);
    // Relative entropy to the uniform law is smallest at the corner (0.5, 0.3).
    const auto inf = inf_rate_over_box(h3, BoxQuery::closed({0.5, 0.3}, {0.7, 0.5}));
    const double kl = 0.5 * std::log(1.5) + 0.3 * std::log(0.9) + 0.2 * std::log(0.6);
    const double exact = h3.rate_at(std::vector<double>{0.5, 0.3}).value.value();
    CHECK(exact == doctest::Approx(kl).epsilon(1e-9));
    CHECK(inf.value.value() <= exact + 1e-9);
    CHECK(inf.value.value() >= exact - 1e-3);
  }
}

TEST_CASE("ldp_report rows") {
  const auto s2 = oracle::full_shift(2);
  const auto rows = ldp_report(s2, Potential::zero(s2, 1), ones(s2), BoxQuery::closed({0.8}, {1.0}), {8, 20},
                               Variant::gibbs);
  REQUIRE(rows.size() == 2);
  CHECK(rows[1].neg_inf_rate.value() == doctest::Approx(-oracle::coin_rate(0.8)).epsilon(1e-10));
  CHECK(rows[1].gap.value() == doctest::Approx(0.0636).epsilon(1e-3));
  for (const auto& r : rows) CHECK(r.rate_estimate.value() <= r.neg_inf_rate.value() + r.slack);
  const auto full = ldp_report(s2, Potential::zero(s2, 1), ones(s2), BoxQuery::closed({0.0}, {1.0}), {6},
                               Variant::periodic);
  CHECK(full[0].rate_estimate.value() == 0.0);
  CHECK(full[0].gap.value() == 0.0);
}

TEST_CASE("gibbs variant reaches n = 100 through merged atoms") {
  const auto s2 = oracle::full_shift(2);
  const auto rows = ldp_report(s2, Potential::zero(s2, 1), ones(s2), BoxQuery::closed({0.8}, {1.0}), {100},
                               Variant::gibbs);
  CHECK(rows[0].gap.value() < 0.04);
}
