// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any
// failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <unistd.h>

#include "rpos/chain.hpp"
#include "rpos/cli.hpp"
#include "rpos/error.hpp"
#include "rpos/gibbs.hpp"
#include "rpos/radius.hpp"

using namespace rpos;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

PositiveSequence seq(std::vector<double> prefix, double tail) {
  return make_sequence(std::move(prefix), ConstantTail{tail});
}

NearestNeighborMatrix sym(std::vector<double> prefix, double tail) {
  return NearestNeighborMatrix::symmetric_from_products(seq(std::move(prefix), tail));
}

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

Outcome c1_radius() {
  const std::pair<PositiveSequence, std::pair<std::size_t, double>> cases[] = {
      {seq({}, 1.0), {0, 0.25}},
      {seq({}, 0.25), {0, 1.0}},
      {seq({2.0}, 0.25), {0, 0.4375}},
      {seq({2.0}, 0.25), {1, 1.0}},
  };
  bool ok = true;
  double worst = 0.0, slowest = 0.0;
  for (const auto& [a, mv] : cases) {
    const auto t0 = Clock::now();
    const double v = s_star(a, mv.first).value;
    const double dt = seconds_since(t0);
    worst = std::max(worst, std::abs(v - mv.second));
    slowest = std::max(slowest, dt);
    ok = ok && std::abs(v - mv.second) <= 1e-9 && dt < 1.0;
  }
  return {ok, fmt("max |ds| = %.3g, slowest %.3g s", worst, slowest)};
}

Outcome c2_oracles() {
  const NearestNeighborMatrix one = sym({}, 1.0);
  const double lam = truncated_radius_oracle(one, 4000).lambda;
  const std::vector<double> roots = diagonal_power_series(one, 500);
  bool monotone = true;
  for (std::size_t i = 1; i < roots.size(); ++i) monotone = monotone && roots[i] >= roots[i - 1];
  const double last = roots.back();
  const bool ok = std::abs(lam - 2.0) <= 1e-3 && std::abs(last - 2.0) <= 0.02 * 2.0 && monotone;
  return {ok, fmt("lambda_4000 = %.9f, series(500) = %.6f", lam, last) +
                  (monotone ? ", monotone" : ", not monotone")};
}

Outcome c3_gap_crossing() {
  const auto t0 = Clock::now();
  const PositiveSequence a = seq({2.0}, 0.25);
  const double s0 = s_star(a, 0).value;
  const double s1 = s_star(a, 1).value;
  const HLimit h0 = h_limit(a, s0, 0);
  // Truncations at s*^[1] go above 1 (here already at y = 1).
  const HLimit h1 = h_limit(a, s1, 0);
  double trunc = 0.0;
  try {
    trunc = h_finite(a, s1, 0, 1);
  } catch (const Error&) {
    trunc = INFINITY;
  }
  const double dt = seconds_since(t0);
  const bool ok = std::abs(h0.value - 1.0) <= 1e-8 && h1.exceeded && trunc > 1.0 && dt < 1.0;
  return {ok, fmt("h(s*0;0) = %.15f, h_1(s*1;0) = %.6g, h(s*1;0) = %.6g, %.3g s", h0.value, trunc,
                  h1.value, dt)};
}

Outcome c4_excursion() {
  const NearestNeighborMatrix q = sym({2.0}, 0.25);
  const BirthDeathChain c0 = build_critical_chain(q, 0, 2000);
  const BirthDeathChain c1 = build_critical_chain(q, 1, 2000);
  const double r = verify_excursion_identity(c0, c1, 1000);
  return {r <= 1e-12, fmt("max residual %.3g over x <= 1000", r)};
}

Outcome c5_scaling() {
  const NearestNeighborMatrix q = sym({2.0}, 0.25);
  const BirthDeathChain c0 = build_critical_chain(q, 0, 2000);
  const BirthDeathChain c1 = build_critical_chain(q, 1, 2000);
  const ReturnTimeDistribution p0 = return_time_pmf(c0, 1, 40);
  const ReturnTimeDistribution p1 = return_time_pmf(c1, 1, 40);
  const double rel4 = std::abs(p0.p(2) - 49.0 / 4096.0) / (49.0 / 4096.0);
  const auto res = verify_scaling(p0, p1, 7.0 / 16.0, 1, 40);
  double worst = 0.0;
  for (std::size_t i = 1; i < res.size(); ++i) worst = std::max(worst, res[i].residual);
  const double k1 = res[0].residual;
  const double k1_exact = std::abs(res[0].rhs - 63.0 / 64.0) / (63.0 / 64.0);
  const bool ok = rel4 <= 1e-14 && worst <= 1e-12 && k1 <= 1e-14 && k1_exact <= 1e-14;
  return {ok, fmt("P(tau=4) rel err %.3g, k=2..40 max %.3g, k=1 residual %.3g (vs 63/64 %.3g)", rel4,
                  worst, k1, k1_exact)};
}

Outcome c6_geometric() {
  const NearestNeighborMatrix q = sym({2.0}, 0.25);
  const BirthDeathChain c0 = build_critical_chain(q, 0, 2000);
  const ReturnTimeDistribution p = return_time_pmf(c0, 1, 400);
  const double rate = fit_tail(p).rate;
  const MomentVerdict v12 = exp_moment(p, 1.2).verdict;
  const MomentVerdict v16 = exp_moment(p, 1.6).verdict;
  const double theta = critical_theta(p);
  const double target = std::sqrt(16.0 / 7.0);
  const bool ok = std::abs(rate - 7.0 / 16.0) <= 0.02 * 7.0 / 16.0 && v12 == MomentVerdict::Finite &&
                  v16 == MomentVerdict::DivergesAtTheta && std::abs(theta - target) <= 0.03 * target;
  return {ok, std::string("rate ") + fmt("%.6f", rate) + ", theta=1.2 " + to_string(v12) +
                  ", theta=1.6 " + to_string(v16) + ", theta* " + fmt("%.5f", theta)};
}

Outcome c7_positive_recurrence() {
  const NearestNeighborMatrix q = sym({2.0}, 0.25);
  const BirthDeathChain c0 = build_critical_chain(q, 0, 2000);
  const double pi0 = stationary_distribution(c0).at(0);
  const double mean = mean_return_time(return_time_pmf(c0, 0, 400)).mean;
  SimulationOptions o;
  o.replicas = 8;
  o.threads = 4;
  const SimulationReport sim = simulate(c0, 0, ReturnsTo{0, 1'000'000, 1'000'000}, 20240601, o);
  const double z = std::abs(sim.mean - 7.0 / 3.0) / sim.std_error;
  const bool ok = std::abs(pi0 - 3.0 / 7.0) <= 1e-9 && std::abs(mean - 7.0 / 3.0) <= 1e-6 &&
                  sim.returns == 1'000'000 && z <= 3.0;
  return {ok, fmt("pi_0 = %.12f, E tau = %.12f, MC %.5f (%.2f sigma)", pi0, mean, sim.mean, z)};
}

Outcome c8_no_gap() {
  const Classification c = classify(sym({}, 0.25), 64);
  const double h = c.h_at_critical ? c.h_at_critical->value : NAN;
  const bool ok = c.verdict == Verdict::TailRTransient && std::abs(h - 0.5) <= 1e-9;
  return {ok, std::string(to_string(c.verdict)) + fmt(", h = %.15f", h)};
}

Outcome c9_gibbs() {
  std::mt19937_64 eng(9);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  auto rseq = [&] {
    std::vector<double> p(24);
    for (double& v : p) v = u(eng);
    return RealSequence(p, ConstantTail{u(eng)});
  };
  auto diff = [](const BlockDistribution& p, const BlockDistribution& q) {
    double w = 0.0;
    for (const auto& [s, v] : p) {
      auto it = q.find(s);
      w = std::max(w, std::abs(v - (it == q.end() ? 0.0 : it->second)));
    }
    for (const auto& [s, v] : q) {
      if (!p.contains(s)) w = std::max(w, v);
    }
    return w;
  };

  double enum_diff = 0.0, norm = 0.0;
  for (int n = 0; n < 100; ++n) {
    const HamiltonianSpec H = (n % 2 == 0) ? HamiltonianSpec(EdgeRewards{rseq(), rseq()})
                                           : HamiltonianSpec(SiteRewards{rseq()});
    Window w;
    w.i = static_cast<std::int64_t>(eng() % 9) - 4;
    w.j = w.i + 2 + static_cast<std::int64_t>(eng() % 19);  // 4..22 steps
    w.left = static_cast<int>(eng() % 4);
    w.right = static_cast<int>(eng() % 4);
    if ((static_cast<int>(w.steps()) - std::abs(w.left - w.right)) % 2 != 0) {
      w.right += w.right == 0 ? 1 : -1;
    }
    const FiniteVolumeMeasure mu(H, w);
    const EnumeratedMeasure en = enumerate_measure(H, w);
    const std::int64_t k = w.i + 1 + static_cast<std::int64_t>(eng() % (w.width() - 2));
    const std::int64_t l = k + static_cast<std::int64_t>(eng() % static_cast<std::uint64_t>(w.j - k));
    const BlockDistribution d = mu.block_distribution(k, l);
    enum_diff = std::max(enum_diff, diff(d, en.block_distribution(k, l)));
    double total = 0.0;
    for (const auto& [s, p] : d) total += p;
    norm = std::max(norm, std::abs(total - 1.0));
  }

  double equiv = 0.0;
  for (int n = 0; n < 50; ++n) {
    const RealSequence b = rseq();
    const RealSequence c = rseq();
    const double alpha0 = u(eng);
    Window w{0, 6 + static_cast<std::int64_t>(eng() % 8), static_cast<int>(eng() % 3), 0};
    w.right = w.left + ((static_cast<int>(w.steps()) % 2 == 0) ? 0 : 1);
    const RealSequence alpha = alpha_from_bc(b, c, alpha0, 64);
    equiv = std::max(equiv, verify_site_edge_equivalence(alpha, b, c, w, 2, w.j - 2));
  }
  const bool ok = enum_diff <= 1e-12 && norm <= 1e-10 && equiv <= 1e-12;
  return {ok, fmt("transfer vs enumeration %.3g, normalization %.3g, site/edge %.3g", enum_diff, norm,
                  equiv)};
}

Outcome c10_round_trip() {
  const PositiveSequence ext = extend_to_gap(seq({}, 0.25), 0.8);
  const double a_minus1 = ext.value_at(0);
  const double s0 = s_star(ext, 0).value;
  const Classification c = classify(NearestNeighborMatrix::symmetric_from_products(ext), 64);
  const bool ok = std::abs(a_minus1 - 0.904508) <= 1e-6 && std::abs(s0 - 0.8) <= 1e-9 &&
                  c.verdict == Verdict::RPositive;
  return {ok, fmt("a_-1 = %.9f, s*0 = %.12f, ", a_minus1, s0) + to_string(c.verdict)};
}

Outcome c11_determinism() {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / ("rpos_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const fs::path model = dir / "gap.json";
  std::ofstream(model) << R"({"matrix": {"a": {"prefix": [2], "tail": 0.25}}})";

  RunConfig cfg;
  cfg.command = "verify";
  cfg.model_path = model.string();
  cfg.seed = 0x5eed;
  std::ostringstream out, err;
  cfg.output_path = (dir / "first.json").string();
  cfg.threads = 1;
  const int e1 = run(cfg, out, err);
  cfg.output_path = (dir / "second.json").string();
  cfg.threads = 4;
  const int e2 = run(cfg, out, err);

  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
  };
  const std::string a = slurp(dir / "first.json");
  const std::string b = slurp(dir / "second.json");
  std::error_code ec;
  fs::remove_all(dir, ec);
  const bool ok = e1 == 0 && e2 == 0 && !a.empty() && a == b;
  return {ok, "exit codes " + std::to_string(e1) + "/" + std::to_string(e2) + ", " +
                  std::to_string(a.size()) + " bytes, " + (a == b ? "identical" : "different")};
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"1 radius solver", c1_radius},
      {"2 oracle concordance", c2_oracles},
      {"3 gap crossing", c3_gap_crossing},
      {"4 excursion identity", c4_excursion},
      {"5 xi-scaling", c5_scaling},
      {"6 geometric recurrence", c6_geometric},
      {"7 positive recurrence", c7_positive_recurrence},
      {"8 no-gap branch", c8_no_gap},
      {"9 Gibbs oracle equivalence", c9_gibbs},
      {"10 gap round trip", c10_round_trip},
      {"11 determinism", c11_determinism},
  };
  int failures = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o{false, ""};
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s  %-28s %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    if (!o.pass) ++failures;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(std::size(criteria)) - failures,
              std::size(criteria));
  return failures == 0 ? 0 : 1;
}
