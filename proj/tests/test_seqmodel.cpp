#include <doctest.h>

#include <cmath>
#include <functional>
#include <json.hpp>

#include "rpos/error.hpp"
#include "rpos/model_io.hpp"
#include "rpos/seqmodel.hpp"

using namespace rpos;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected rpos::Error");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("value_at follows prefix then tail") {
  const PositiveSequence a = make_sequence({2.0, 3.0}, ConstantTail{0.25});
  CHECK(a.value_at(0) == 2.0);
  CHECK(a.value_at(1) == 3.0);
  CHECK(a.value_at(2) == 0.25);
  CHECK(a.value_at(1000000) == 0.25);
  CHECK_FALSE(a.domain_size().has_value());
}

TEST_CASE("NoTail sequences are defined on their prefix only") {
  const PositiveSequence a = make_sequence({1.0, 2.0, 3.0}, NoTail{});
  CHECK(a.domain_size() == 3u);
  CHECK(a.in_domain(2));
  CHECK_FALSE(a.in_domain(3));
  CHECK(code_of([&] { (void)a.value_at(3); }) == ErrorCode::OutOfDomain);
}

TEST_CASE("make_sequence rejects nonpositive entries with their index") {
  try {
    (void)make_sequence({1.0, 0.0, 2.0}, ConstantTail{1.0});
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonPositiveEntry);
    CHECK(e.index() == 1u);
  }
  try {
    (void)make_sequence({1.0, 2.0}, ConstantTail{-0.5});
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonPositiveEntry);
    CHECK(e.index() == 2u);
  }
  CHECK(code_of([] { (void)make_sequence({1.0, NAN}, NoTail{}); }) == ErrorCode::Validation);
}

TEST_CASE("shift drops the first m entries") {
  const PositiveSequence a = make_sequence({2.0, 3.0, 4.0}, ConstantTail{0.5});
  const PositiveSequence b = shift(a, 2);
  CHECK(b.value_at(0) == 4.0);
  CHECK(b.value_at(1) == 0.5);
  const PositiveSequence c = shift(a, 10);
  CHECK(c.value_at(0) == 0.5);
  CHECK(c.prefix_size() == 0);

  const PositiveSequence n = make_sequence({1.0, 2.0}, NoTail{});
  CHECK(shift(n, 1).value_at(0) == 2.0);
  CHECK(code_of([&] { (void)shift(n, 3); }) == ErrorCode::ShiftBeyondDomain);
}

TEST_CASE("products of up and down weights") {
  const PositiveSequence up = make_sequence({1.0, 2.0}, ConstantTail{0.5});
  const PositiveSequence down = make_sequence({3.0}, ConstantTail{0.5});
  const NearestNeighborMatrix q = NearestNeighborMatrix::from_entries(up, down);
  const PositiveSequence a = q.products();
  CHECK(a.value_at(0) == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(a.value_at(1) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(a.value_at(7) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(a.has_constant_tail());
  CHECK(q.split() == "edge");

  const NearestNeighborMatrix s = NearestNeighborMatrix::symmetric_from_products(a);
  CHECK(s.split() == "symmetric");
  CHECK(s.up(0) == doctest::Approx(std::sqrt(3.0)).epsilon(1e-15));
  CHECK(s.up(0) == s.down(0));
}

TEST_CASE("a NoTail factor makes the product NoTail") {
  const PositiveSequence up = make_sequence({1.0, 2.0, 3.0}, NoTail{});
  const PositiveSequence down = make_sequence({1.0}, ConstantTail{2.0});
  const PositiveSequence a = NearestNeighborMatrix::from_entries(up, down).products();
  CHECK_FALSE(a.has_constant_tail());
  CHECK(a.domain_size() == 3u);
  CHECK(a.value_at(2) == doctest::Approx(6.0));
}

TEST_CASE("edge rewards exponentiate") {
  const NearestNeighborMatrix q =
      matrix_from_edge_rewards(RealSequence::constant(std::log(2.0)), RealSequence::constant(0.0));
  CHECK(q.up(5) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(q.down(5) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("alpha_from_bc satisfies the site/edge relation") {
  const RealSequence b({0.3, -0.2, 0.1}, ConstantTail{0.4});
  const RealSequence c({0.0, 0.5}, ConstantTail{-0.1});
  const RealSequence alpha = alpha_from_bc(b, c, 0.7, 10);
  CHECK(alpha.domain_size() == 11u);
  CHECK(alpha.value_at(0) == 0.7);
  for (std::size_t x = 0; x < 10; ++x) {
    CHECK(alpha.value_at(x) + alpha.value_at(x + 1) ==
          doctest::Approx(b.value_at(x) + c.value_at(x)).epsilon(1e-15));
  }
  CHECK(code_of([&] { (void)alpha_from_bc(b, c, 0.0, 0); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("model JSON round trip and validation") {
  const auto j = nlohmann::json::parse(
      R"({"matrix": {"a": {"prefix": [2], "tail": 0.25}},
          "hamiltonian": {"alpha": {"prefix": [0.1, 0.2], "tail": null}}})");
  const Model m = parse_model(j);
  CHECK(m.matrix.products().value_at(0) == doctest::Approx(2.0));
  REQUIRE(m.hamiltonian.has_value());
  CHECK(std::holds_alternative<SiteRewards>(*m.hamiltonian));

  const RealSequence s({1.0, 2.0}, ConstantTail{3.0});
  CHECK(parse_real_sequence(to_json(s), "s").value_at(5) == 3.0);

  auto bad = [](const char* text) {
    return code_of([&] { (void)parse_model(nlohmann::json::parse(text)); });
  };
  CHECK(bad(R"({"matrix": {"a": {"prefix": [1], "tail": 1}}, "extra": 1})") == ErrorCode::Validation);
  CHECK(bad(R"({"matrix": {"a": {"prefix": [1], "tial": 1}}})") == ErrorCode::Validation);
  CHECK(bad(R"({"matrix": {"a": {"prefix": [1, -1], "tail": 1}}})") == ErrorCode::Validation);
  CHECK(bad(R"({"matrix": {"a": {"prefix": ["x"]}}})") == ErrorCode::Validation);
  CHECK(bad(R"({"matrix": {"b": {"prefix": [1]}}})") == ErrorCode::Validation);
  CHECK(code_of([] { (void)load_model("/nonexistent/model.json"); }) == ErrorCode::Validation);
}
