#include "rpos/verify.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "rpos/chain.hpp"
#include "rpos/error.hpp"
#include "rpos/gibbs.hpp"
#include "rpos/radius.hpp"

namespace rpos {

namespace {

class Draw {
 public:
  explicit Draw(std::uint64_t seed) : eng_(seed) {}

  double uniform(double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(eng_() >> 11) * 0x1.0p-53);
  }
  int integer(int lo, int hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo + 1);
    return lo + static_cast<int>(eng_() % span);
  }

 private:
  std::mt19937_64 eng_;
};

double max_diff(const BlockDistribution& p, const BlockDistribution& q) {
  double worst = 0.0;
  for (const auto& [sigma, v] : p) {
    auto it = q.find(sigma);
    worst = std::max(worst, std::abs(v - (it == q.end() ? 0.0 : it->second)));
  }
  for (const auto& [sigma, v] : q) {
    if (!p.contains(sigma)) worst = std::max(worst, v);
  }
  return worst;
}

RealSequence random_sequence(Draw& d, double lo, double hi) {
  std::vector<double> prefix(16);
  for (double& v : prefix) v = d.uniform(lo, hi);
  return {std::move(prefix), ConstantTail{d.uniform(lo, hi)}};
}

Window random_window(Draw& d, int min_width, int max_width) {
  Window w;
  w.i = d.integer(-5, 5);
  w.j = w.i + d.integer(min_width, max_width) - 1;
  w.left = d.integer(0, 4);
  w.right = d.integer(0, 4);
  // Fix parity by moving the right boundary.
  if ((static_cast<int>(w.steps()) - std::abs(w.left - w.right)) % 2 != 0) {
    w.right += w.right == 0 ? 1 : -1;
  }
  return w;
}

void add(VerifyReport& r, std::string name, double value, double tolerance,
         std::string detail = {}) {
  r.checks.push_back({std::move(name), value <= tolerance, value, tolerance, std::move(detail)});
}

void add_failure(VerifyReport& r, std::string name, const Error& e) {
  r.checks.push_back({std::move(name), false, 0.0, 0.0,
                      std::string(to_string(e.code())) + ": " + e.what()});
}

void model_checks(VerifyReport& r, const Model& model, const VerifyOptions& o) {
  const NearestNeighborMatrix& mat = model.matrix;
  const PositiveSequence a = mat.products();
  const Classification cls = classify(mat, o.m_max, o.tol, o.depth);
  if (!cls.report) {
    r.checks.push_back({"classification", false, 0.0, 0.0, cls.reason});
    return;
  }
  const auto& ladder = cls.report->ladder;

  double drop = 0.0;
  for (std::size_t m = 0; m + 1 < ladder.size(); ++m) {
    drop = std::max(drop, ladder[m].value - ladder[m + 1].value);
  }
  add(r, "ladder_nondecreasing", drop, 10.0 * o.tol);

  const double s0 = ladder.front().value;
  if (a.has_constant_tail()) {
    const bool below = is_admissible(a, s0, o.depth);
    const bool above = is_admissible(a, s0 * (1.0 + 1e-6) + 10.0 * o.tol, o.depth);
    add(r, "critical_scale_bracket", below && !above ? 0.0 : 1.0, 0.0,
        "admissible at s*, not just above");
  }

  const double inv_radius = 1.0 / std::sqrt(s0);
  std::size_t L = 400;
  if (auto n = a.domain_size()) L = std::min(L, *n - 1);
  if (L >= 2) {
    try {
      const OracleResult orc = truncated_radius_oracle(mat, L);
      add(r, "truncated_perron_below_inverse_radius",
          std::max(0.0, orc.lambda / inv_radius - 1.0), 1e-9);
      const auto roots = diagonal_power_series(mat, std::min<std::size_t>(L / 2, 100));
      double excess = 0.0;
      for (double v : roots) excess = std::max(excess, v / inv_radius - 1.0);
      add(r, "diagonal_series_below_inverse_radius", std::max(0.0, excess), 1e-9);
    } catch (const Error& e) {
      add_failure(r, "truncated_perron_below_inverse_radius", e);
    }
  }

  if (cls.verdict == Verdict::TailRTransient) {
    const HLimit& h = *cls.h_at_critical;
    add(r, "h_at_critical_at_most_one", h.exceeded ? 1.0 : std::max(0.0, h.value - 1.0), 1e-9);
  }
  if (cls.verdict != Verdict::RPositive) return;

  const std::size_t m = *cls.gap_index;
  const double xi = *cls.xi;
  try {
    const BirthDeathChain cm = build_critical_chain(mat, m, o.depth, o.tol);
    const BirthDeathChain cm1 = build_critical_chain(mat, m + 1, o.depth, o.tol);
    add(r, "excursion_identity", verify_excursion_identity(cm, cm1, m + 1000), 1e-12);

    const std::size_t k_last = std::min<std::size_t>(40, o.k_max);
    const ReturnTimeDistribution pm = return_time_pmf(cm, m + 1, o.k_max);
    const ReturnTimeDistribution pm1 = return_time_pmf(cm1, m + 1, o.k_max);
    const auto res = verify_scaling(pm, pm1, xi, 1, k_last);
    add(r, "return_time_scaling_k1", res.front().residual, 1e-14);
    double worst = 0.0;
    for (std::size_t i = 1; i < res.size(); ++i) worst = std::max(worst, res[i].residual);
    add(r, "return_time_scaling", worst, 1e-12, "k = 2.." + std::to_string(k_last));

    const EigenvectorTable f = eigenvector_log(cm, mat);
    double row = 0.0;
    for (std::size_t x = m; x < m + 200 && x + 1 <= m + cm.depth(); ++x) {
      row = std::max(row, std::abs(eigen_row_residual(f, cm, mat, x)));
    }
    add(r, "eigenvector_rows", row, 1e-10);

    const StationaryDistribution pi = stationary_distribution(cm, o.tol);
    double total = pi.tail_mass;
    for (double p : pi.pi) total += p;
    add(r, "stationary_normalization", std::abs(total - 1.0), 1e-12);

    const ReturnTimeDistribution p0 = return_time_pmf(cm, m, o.k_max);
    const double mean = mean_return_time(p0).mean;
    const double kac = 1.0 / pi.at(m);
    add(r, "mean_return_time_kac", std::abs(mean - kac) / kac, 1e-6);

    if (o.mc_returns > 0) {
      SimulationOptions so;
      so.replicas = 8;
      so.threads = o.threads;
      const SimulationReport sim =
          simulate(cm, m, ReturnsTo{m, o.mc_returns, 1'000'000}, o.seed, so);
      const double z = sim.std_error > 0.0 ? std::abs(sim.mean - kac) / sim.std_error : 0.0;
      add(r, "monte_carlo_mean_return_time", z, 4.0, "standard errors from 1/pi_m");
    }
  } catch (const Error& e) {
    add_failure(r, "chain_checks", e);
  }
}

void gibbs_checks(VerifyReport& r, const VerifyOptions& o) {
  Draw d(o.seed);
  double enum_diff = 0.0, norm_err = 0.0, equiv = 0.0, offset = 0.0, marg = 0.0, counts = 0.0;
  for (std::size_t n = 0; n < o.gibbs_instances; ++n) {
    const RealSequence b = random_sequence(d, -1.0, 1.0);
    const RealSequence c = random_sequence(d, -1.0, 1.0);
    const HamiltonianSpec H = EdgeRewards{b, c};
    const Window win = random_window(d, 5, 12);
    const std::int64_t k = win.i + 1 + d.integer(0, static_cast<int>(win.width()) - 3);
    const std::int64_t l = k + d.integer(0, static_cast<int>(win.j - 1 - k));

    const FiniteVolumeMeasure mu(H, win);
    const EnumeratedMeasure en = enumerate_measure(H, win);
    const BlockDistribution direct = mu.block_distribution(k, l);
    enum_diff = std::max(enum_diff, max_diff(direct, en.block_distribution(k, l)));
    double total = 0.0;
    for (const auto& [sigma, p] : direct) total += p;
    norm_err = std::max(norm_err, std::abs(total - 1.0));

    if (k - 1 > win.i && l + 1 < win.j) {
      BlockDistribution folded;
      for (const auto& [sigma, p] : mu.block_distribution(k - 1, l + 1)) {
        folded[std::vector<int>(sigma.begin() + 1, sigma.end() - 1)] += p;
      }
      marg = std::max(marg, max_diff(direct, folded));
    }

    const double alpha0 = d.uniform(-1.0, 1.0);
    const RealSequence alpha = alpha_from_bc(b, c, alpha0, 64);
    equiv = std::max(equiv, verify_site_edge_equivalence(alpha, b, c, win, k, l));
    offset = std::max(offset, boundary_offset_spread(alpha, b, c, win));

    for (std::size_t p = 0; p < std::min<std::size_t>(en.size(), 8); ++p) {
      const TrajectoryBlock blk(win.i, en.interior(p));
      std::size_t nv = 0, ne = 0;
      for (const auto& [x, cnt] : visit_counts(blk)) nv += cnt;
      for (const auto& [xy, cnt] : edge_counts(blk)) ne += cnt;
      counts = std::max(counts, std::abs(static_cast<double>(nv) - static_cast<double>(blk.size())) +
                                    std::abs(static_cast<double>(ne) + 1.0 -
                                             static_cast<double>(blk.size())));
    }
  }
  add(r, "gibbs_transfer_vs_enumeration", enum_diff, 1e-12);
  add(r, "gibbs_normalization", norm_err, 1e-10);
  add(r, "gibbs_marginal_consistency", marg, 1e-12);
  add(r, "site_edge_equivalence", equiv, 1e-12);
  add(r, "boundary_offset_constant", offset, 1e-9);
  add(r, "visit_edge_count_identities", counts, 0.0);
}

}  // namespace

bool VerifyReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
}

VerifyReport run_property_suite(const Model& model, const VerifyOptions& options) {
  VerifyReport r;
  try {
    model_checks(r, model, options);
  } catch (const Error& e) {
    add_failure(r, "model_checks", e);
  }
  try {
    gibbs_checks(r, options);
  } catch (const Error& e) {
    add_failure(r, "gibbs_checks", e);
  }
  return r;
}

}  // namespace rpos
