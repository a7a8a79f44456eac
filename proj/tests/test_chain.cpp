#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "rpos/chain.hpp"
#include "rpos/error.hpp"
#include "rpos/radius.hpp"

using namespace rpos;

namespace {

NearestNeighborMatrix sym(std::vector<double> prefix, double tail) {
  return NearestNeighborMatrix::symmetric_from_products(
      make_sequence(std::move(prefix), ConstantTail{tail}));
}

const NearestNeighborMatrix kGap = sym({2.0}, 0.25);
const NearestNeighborMatrix kQuarter = sym({}, 0.25);
const double kR0 = std::sqrt(7.0) / 4.0;

long double pmf_by_paths(const BirthDeathChain& c, std::size_t x, std::size_t k) {
  return oracle::first_return_by_paths([&](std::size_t y) { return c.up_prob(y); }, c.base(), x, k);
}

}  // namespace

TEST_CASE("chain probabilities") {
  const BirthDeathChain q = build_chain(kQuarter, 0, 1.0, 1000);
  CHECK(q.up_prob(0) == 1.0);
  CHECK(q.down_prob(0) == 0.0);
  for (std::size_t x : {1u, 2u, 3u, 500u}) {
    CHECK(q.up_prob(x) == doctest::Approx((x + 2.0) / (2.0 * (x + 1.0))).epsilon(1e-12));
  }
  CHECK_THROWS_AS(q.up_prob(5000), Error);

  const BirthDeathChain g = build_chain(kGap, 0, kR0, 1000);
  CHECK(g.up_prob(0) == 1.0);
  for (std::size_t x : {1u, 2u, 10u, 999u}) CHECK(g.up_prob(x) == doctest::Approx(0.125).epsilon(1e-14));

  try {
    (void)build_chain(kGap, 0, 1.0, 1000);
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::OmegaCollapse);
    CHECK(e.index() == 1u);
  }
}

TEST_CASE("critical chain stays on the minimal orbit") {
  // (2, 2, 1/4, ...): the forward orbit at s* rides a repelling fixed point
  // and would collapse within a few dozen steps.
  const NearestNeighborMatrix m = sym({2.0, 2.0}, 0.25);
  const BirthDeathChain c = build_critical_chain(m, 0, 100000);
  CHECK(c.minimal_orbit());
  const double s = c.scale();
  for (std::size_t x = 0; x + 1 < 2000; ++x) {
    const double w = c.up_prob(x);
    CHECK(w > 0.0);
    CHECK(w <= 1.0);
    if (x > 0) CHECK(std::abs(w * (1.0 - c.up_prob(x + 1)) - s * m.products().value_at(x)) <= 1e-15);
  }
  CHECK(c.up_prob(0) == 1.0);
  CHECK(std::abs(c.up_prob(1) * (1.0 - c.up_prob(2)) - 2.0 * s) <= 1e-14);
}

TEST_CASE("eigenvector") {
  const NearestNeighborMatrix one = sym({}, 1.0);
  const BirthDeathChain c = build_chain(one, 0, 0.5, 100);
  const EigenvectorTable f = eigenvector_log(c, one);
  CHECK(f.at(0) == 0.0);
  CHECK(std::exp(f.at(1)) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(std::exp(f.at(2)) == doctest::Approx(3.0).epsilon(1e-14));
  // f_x = x + 1 solves f_{x-1} + f_{x+1} = 2 f_x.
  CHECK(std::exp(f.at(50)) == doctest::Approx(51.0).epsilon(1e-12));

  for (const auto* mat : {&kGap, &kQuarter}) {
    const BirthDeathChain crit = build_critical_chain(*mat, 0, 1000);
    const EigenvectorTable t = eigenvector_log(crit, *mat);
    for (std::size_t x = 0; x < 500; ++x) CHECK(std::abs(eigen_row_residual(t, crit, *mat, x)) <= 1e-10);
  }
}

TEST_CASE("return-time law, hand values") {
  const BirthDeathChain q = build_chain(kQuarter, 0, 1.0, 1000);
  const ReturnTimeDistribution pq = return_time_pmf(q, 0, 20);
  CHECK(pq.p(1) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(pq.p(2) == doctest::Approx(1.0 / 16.0).epsilon(1e-15));

  const BirthDeathChain g0 = build_critical_chain(kGap, 0, 1000);
  const BirthDeathChain g1 = build_critical_chain(kGap, 1, 1000);
  const ReturnTimeDistribution p0 = return_time_pmf(g0, 1, 40);
  const ReturnTimeDistribution p1 = return_time_pmf(g1, 1, 40);
  CHECK(std::abs(p0.p(1) - 63.0 / 64.0) <= 1e-15);
  CHECK(std::abs(p0.p(2) - 49.0 / 4096.0) <= 1e-14 * 49.0 / 4096.0);
  CHECK(std::abs(p1.p(2) - 1.0 / 16.0) <= 1e-15);
}

TEST_CASE("return-time law matches path enumeration") {
  const NearestNeighborMatrix m = sym({0.7, 3.0, 0.2, 1.1}, 0.4);
  const BirthDeathChain c = build_critical_chain(m, 0, 1000);
  for (std::size_t x : {0u, 1u, 3u}) {
    const ReturnTimeDistribution p = return_time_pmf(c, x, 9);
    for (std::size_t k = 1; k <= 9; ++k) {
      const double ref = static_cast<double>(pmf_by_paths(c, x, k));
      CHECK(p.p(k) == doctest::Approx(ref).epsilon(1e-13));
    }
  }
}

TEST_CASE("pmf entries are probabilities with total at most one") {
  for (const auto* mat : {&kGap, &kQuarter}) {
    const BirthDeathChain c = build_critical_chain(*mat, 0, 5000);
    for (std::size_t x : {0u, 1u, 5u}) {
      const ReturnTimeDistribution p = return_time_pmf(c, x, 400);
      for (double v : p.pmf) CHECK((v >= 0.0 && v <= 1.0));
      CHECK(p.mass_accounted <= 1.0 + 1e-12);
    }
  }
}

TEST_CASE("deep pmf uses the log scale") {
  const BirthDeathChain g0 = build_critical_chain(kGap, 0, 5000);
  const ReturnTimeDistribution p = return_time_pmf(g0, 1, 2000);
  const double lp = p.log_pmf[1999];
  CHECK(std::isfinite(lp));
  CHECK(lp < -1000.0);
  // Consecutive log ratios settle near log(7/16).
  CHECK((p.log_pmf[1999] - p.log_pmf[1998]) == doctest::Approx(std::log(7.0 / 16.0)).epsilon(1e-2));
}

TEST_CASE("excursion identity") {
  const BirthDeathChain g0 = build_critical_chain(kGap, 0, 2000);
  const BirthDeathChain g1 = build_critical_chain(kGap, 1, 2000);
  CHECK(g0.up_prob(1) * (1.0 - g0.up_prob(2)) == doctest::Approx(7.0 / 64.0).epsilon(1e-15));
  CHECK(verify_excursion_identity(g0, g1, 1000) <= 1e-12);

  const BirthDeathChain q0 = build_critical_chain(kQuarter, 0, 2000);
  const BirthDeathChain q1 = build_critical_chain(kQuarter, 1, 2000);
  try {
    (void)verify_excursion_identity(q0, q1, 100);
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::GapRequired);
  }
}

TEST_CASE("xi scaling") {
  const BirthDeathChain g0 = build_critical_chain(kGap, 0, 2000);
  const BirthDeathChain g1 = build_critical_chain(kGap, 1, 2000);
  const ReturnTimeDistribution p0 = return_time_pmf(g0, 1, 40);
  const ReturnTimeDistribution p1 = return_time_pmf(g1, 1, 40);
  const auto res = verify_scaling(p0, p1, 7.0 / 16.0, 1, 40);
  CHECK(res[0].residual <= 1e-14);
  CHECK(res[0].rhs == doctest::Approx(63.0 / 64.0).epsilon(1e-15));
  for (std::size_t i = 1; i < res.size(); ++i) CHECK(res[i].residual <= 1e-12);
  CHECK_THROWS_AS(verify_scaling(p0, p1, 7.0 / 16.0, 1, 41), Error);
}

TEST_CASE("xi scaling on a longer prefix") {
  // Gap at 0 for (2, 2, 1/4, ...); xi from the ladder.
  const NearestNeighborMatrix m = sym({2.0, 2.0}, 0.25);
  const GapReport r = gap_scan(m.products(), 8);
  const BirthDeathChain c0 = build_critical_chain(m, 0, 2000);
  const BirthDeathChain c1 = build_critical_chain(m, 1, 2000);
  CHECK(verify_excursion_identity(c0, c1, 1000) <= 1e-12);
  const auto res = verify_scaling(return_time_pmf(c0, 1, 30), return_time_pmf(c1, 1, 30), *r.xi, 1, 30);
  for (const auto& s : res) CHECK(s.residual <= 1e-11);
}

TEST_CASE("tail rate and moments") {
  const BirthDeathChain g0 = build_critical_chain(kGap, 0, 5000);
  const ReturnTimeDistribution p = return_time_pmf(g0, 1, 400);
  const TailFit fit = fit_tail(p);
  CHECK(std::abs(fit.rate - 7.0 / 16.0) <= 0.02 * 7.0 / 16.0);
  CHECK(exp_moment(p, 1.2).verdict == MomentVerdict::Finite);
  CHECK(exp_moment(p, 1.6).verdict == MomentVerdict::DivergesAtTheta);
  CHECK(std::abs(critical_theta(p) - std::sqrt(16.0 / 7.0)) <= 0.03 * std::sqrt(16.0 / 7.0));
}

TEST_CASE("stationary distribution and mean return time") {
  const BirthDeathChain g0 = build_critical_chain(kGap, 0, 5000);
  const StationaryDistribution pi = stationary_distribution(g0);
  CHECK(std::abs(pi.at(0) - 3.0 / 7.0) <= 1e-9);
  CHECK(pi.tail_ratio == doctest::Approx(1.0 / 7.0).epsilon(1e-12));
  const MeanReturnTime mrt = mean_return_time(return_time_pmf(g0, 0, 400));
  CHECK(std::abs(mrt.mean - 7.0 / 3.0) <= 1e-6);
  CHECK(mrt.remainder_bound < 1e-6);

  const BirthDeathChain q = build_critical_chain(kQuarter, 0, 5000);
  try {
    (void)stationary_distribution(q);
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotPositiveRecurrent);
  }
}

TEST_CASE("detailed balance of the stationary law") {
  const NearestNeighborMatrix m = sym({0.7, 3.0, 0.2, 1.1}, 0.4);
  const GapReport r = gap_scan(m.products(), 8);
  REQUIRE(r.gap_index.has_value());
  const BirthDeathChain c = build_critical_chain(m, *r.gap_index, 3000);
  const StationaryDistribution pi = stationary_distribution(c);
  for (std::size_t x = c.base(); x < c.base() + 100; ++x) {
    CHECK(pi.at(x) * c.up_prob(x) == doctest::Approx(pi.at(x + 1) * c.down_prob(x + 1)).epsilon(1e-12));
  }
}

TEST_CASE("simulation is reproducible and thread independent") {
  const BirthDeathChain g0 = build_critical_chain(kGap, 0, 5000);
  SimulationOptions one;
  one.replicas = 4;
  one.threads = 1;
  SimulationOptions four = one;
  four.threads = 4;
  const SimulationReport a = simulate(g0, 0, ReturnsTo{0, 20000, 100000}, 42, one);
  const SimulationReport b = simulate(g0, 0, ReturnsTo{0, 20000, 100000}, 42, four);
  CHECK(a.return_time_counts == b.return_time_counts);
  CHECK(a.mean == b.mean);
  CHECK(a.returns == 20000);
  CHECK(std::abs(a.mean - 7.0 / 3.0) <= 4.0 * a.std_error);

  const SimulationReport s = simulate(g0, 0, Steps{10000}, 7, one);
  std::uint64_t visits = 0;
  for (const auto& [x, n] : s.visits) visits += n;
  CHECK(visits == 10000 + one.replicas);
}

TEST_CASE("empirical return law matches the DP") {
  const BirthDeathChain g0 = build_critical_chain(kGap, 0, 5000);
  const ReturnTimeDistribution p = return_time_pmf(g0, 1, 10);
  SimulationOptions o;
  o.replicas = 4;
  const SimulationReport s = simulate(g0, 1, ReturnsTo{1, 200000, 10000}, 3, o);
  for (std::size_t k = 1; k <= 3; ++k) {
    const double q = p.p(k);
    const double sd = std::sqrt(q * (1.0 - q) / 200000.0);
    CHECK(std::abs(s.empirical_p(2 * k) - q) <= 5.0 * sd + 1e-12);
  }
  CHECK(s.empirical_p(3) == 0.0);
}

TEST_CASE("a = 1/4 critical chain rarely returns quickly") {
  const BirthDeathChain q = build_critical_chain(kQuarter, 0, 200000);
  SimulationOptions o;
  o.replicas = 2;
  const SimulationReport near = simulate(q, 0, ReturnsTo{0, 2000, 100}, 11, o);
  const SimulationReport far = simulate(q, 0, ReturnsTo{0, 2000, 10000}, 11, o);
  const auto frac = [](const SimulationReport& r) {
    return static_cast<double>(r.returns) / static_cast<double>(r.returns + r.censored);
  };
  CHECK(frac(far) < 1.0);
  CHECK(frac(near) <= frac(far));
}
