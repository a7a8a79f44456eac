#include "rpos/radius.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rpos/error.hpp"

namespace rpos {

namespace {

double log_add(double x, double y) {
  if (x == -std::numeric_limits<double>::infinity()) return y;
  if (y == -std::numeric_limits<double>::infinity()) return x;
  const double hi = std::max(x, y);
  return hi + std::log1p(std::exp(std::min(x, y) - hi));
}

Certificate ladder_certificate(const PositiveSequence& b, std::size_t depth) {
  if (b.has_constant_tail()) return Certificate::ClosedFormTail;
  if (b.prefix_size() <= depth) return Certificate::DepthExhaustedPositive;
  return Certificate::None;
}

}  // namespace

SStar s_star(const PositiveSequence& a, std::size_t m, double tol, std::size_t depth) {
  if (!(tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "tol must be positive");
  const PositiveSequence b = shift(a, m);
  SStar out{m, 0.0, ladder_certificate(b, depth)};
  auto admissible = [&](double s) { return is_admissible(b, s, depth); };

  double hi = 0.0;
  if (auto tail = b.tail_value()) {
    // c = s * a_tail must stay <= 1/4, so s* <= 1/(4 a_tail); when that
    // bound is itself admissible it is the answer.
    hi = 0.25 / *tail;
    if (admissible(hi)) {
      out.value = hi;
      return out;
    }
  } else {
    hi = 1.0 / b.value_at(0);
    int doublings = 0;
    while (admissible(hi)) {
      hi *= 2.0;
      if (++doublings > 64) {
        throw Error(ErrorCode::NoTailUndetermined, "no inadmissible scale found for NoTail sequence");
      }
    }
  }

  double lo = 0.0;
  for (int it = 0; it < 4096 && (hi - lo > tol || lo == 0.0); ++it) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;
    (admissible(mid) ? lo : hi) = mid;
  }
  out.value = lo;
  return out;
}

double gap_threshold(double s_m, double tol) { return std::max(10.0 * tol, 1e-9 * s_m); }

GapReport gap_scan(const PositiveSequence& a, std::size_t m_max, double tol, std::size_t depth) {
  if (m_max < 1) throw Error(ErrorCode::InvalidArgument, "m_max must be >= 1");
  std::size_t last = m_max;
  if (a.has_constant_tail()) {
    last = std::min(m_max, a.prefix_size() + 1);
  } else {
    last = std::min(m_max, a.prefix_size() - 1);
  }

  GapReport r;
  r.tol = tol;
  r.ladder.reserve(last + 1);
  for (std::size_t m = 0; m <= last; ++m) r.ladder.push_back(s_star(a, m, tol, depth));

  for (std::size_t m = 0; m + 1 < r.ladder.size(); ++m) {
    const double lo = r.ladder[m].value;
    const double hi = r.ladder[m + 1].value;
    if (hi - lo > gap_threshold(lo, tol)) {
      r.gap_index = m;
      r.xi = lo / hi;
      r.theta_bounds = std::make_pair(1.0 / *r.xi, 1.0 / std::sqrt(*r.xi));
      break;
    }
  }
  return r;
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::RPositive: return "RPositive";
    case Verdict::TailRTransient: return "TailRTransient";
    case Verdict::Undetermined: return "Undetermined";
  }
  return "?";
}

const char* to_string(GibbsLabel g) {
  switch (g) {
    case GibbsLabel::UniqueTIGibbsState: return "UniqueTIGibbsState";
    case GibbsLabel::NoTIGibbsState: return "NoTIGibbsState";
    case GibbsLabel::Unknown: return "Unknown";
  }
  return "?";
}

Classification classify(const NearestNeighborMatrix& mat, std::size_t m_max, double tol,
                        std::size_t depth) {
  Classification c;
  PositiveSequence a;
  try {
    a = mat.products();
    c.report = gap_scan(a, m_max, tol, depth);
    c.h_at_critical = h_limit(a, c.report->ladder.front().value, 0, tol, depth);
  } catch (const Error& e) {
    c.verdict = Verdict::Undetermined;
    c.reason = to_string(e.code());
    return c;
  }

  if (!a.has_constant_tail()) {
    // A flat or stepped ladder over a finite horizon proves nothing.
    c.verdict = Verdict::Undetermined;
    c.reason = "NoTailUndetermined";
    return c;
  }

  if (c.report->gap_index) {
    c.verdict = Verdict::RPositive;
    c.gap_index = c.report->gap_index;
    c.xi = c.report->xi;
    c.gibbs_label = GibbsLabel::UniqueTIGibbsState;
    return c;
  }

  c.verdict = Verdict::TailRTransient;
  // h < 1 at the critical scale makes X^[0] transient as well, so Q is not
  // R-positive; h = 1 leaves null versus positive recurrence open.
  const HLimit& h = *c.h_at_critical;
  if (!h.exceeded && h.value < 1.0 - 1e-9) c.gibbs_label = GibbsLabel::NoTIGibbsState;
  return c;
}

OracleResult truncated_radius_oracle(const NearestNeighborMatrix& mat, std::size_t L, double tol,
                                     std::size_t max_iterations) {
  if (L < 2) throw Error(ErrorCode::InvalidArgument, "truncation needs L >= 2");
  // Q restricted to {0..L} is diagonally similar to the symmetric tridiagonal
  // matrix with off-diagonal sqrt(q_{x,x+1} q_{x+1,x}).
  const std::size_t n = L + 1;
  std::vector<double> log_e(L);
  for (std::size_t x = 0; x < L; ++x) log_e[x] = 0.5 * mat.log_product(x);
  const double log_scale = *std::max_element(log_e.begin(), log_e.end());
  std::vector<double> e(L);
  for (std::size_t x = 0; x < L; ++x) e[x] = std::exp(log_e[x] - log_scale);

  // Resolvent power iteration: (sigma - J)^{-1} with sigma a strict upper
  // bound (Gershgorin) is positive definite and has the Perron vector as its
  // dominant eigenvector. Plain power iteration on J would oscillate, J
  // being bipartite.
  double sigma = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double row = (i > 0 ? e[i - 1] : 0.0) + (i < L ? e[i] : 0.0);
    sigma = std::max(sigma, row);
  }
  sigma *= 1.0 + 1e-15;

  std::vector<double> v(n, 1.0 / std::sqrt(static_cast<double>(n)));
  std::vector<double> y(n), cprime(n), dprime(n);
  double lambda = 0.0;
  for (std::size_t it = 1; it <= max_iterations; ++it) {
    // Thomas solve of (sigma I - J) y = v.
    cprime[0] = -e[0] / sigma;
    dprime[0] = v[0] / sigma;
    for (std::size_t i = 1; i < n; ++i) {
      const double denom = sigma + e[i - 1] * cprime[i - 1];
      cprime[i] = i < L ? -e[i] / denom : 0.0;
      dprime[i] = (v[i] + e[i - 1] * dprime[i - 1]) / denom;
    }
    y[n - 1] = dprime[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) y[i] = dprime[i] - cprime[i] * y[i + 1];

    double norm = 0.0;
    for (double t : y) norm += t * t;
    norm = std::sqrt(norm);
    for (std::size_t i = 0; i < n; ++i) v[i] = y[i] / norm;

    double quad = 0.0;
    for (std::size_t i = 0; i < L; ++i) quad += 2.0 * e[i] * v[i] * v[i + 1];
    const double prev = lambda;
    lambda = quad;
    if (it > 1 && std::abs(lambda - prev) <= tol * std::abs(lambda)) {
      return {L, lambda * std::exp(log_scale), it};
    }
  }
  throw Error(ErrorCode::NonConvergence,
              "power iteration did not settle within " + std::to_string(max_iterations) +
                  " iterations",
              max_iterations);
}

std::vector<double> diagonal_power_series(const NearestNeighborMatrix& mat, std::size_t n_max) {
  if (n_max < 1) throw Error(ErrorCode::InvalidArgument, "n_max must be >= 1");
  constexpr double ninf = -std::numeric_limits<double>::infinity();
  // A closed path of length 2N from 0 never rises above N.
  const std::size_t top = n_max;
  std::vector<double> log_up(top), log_down(top);
  for (std::size_t x = 0; x < top; ++x) {
    log_up[x] = mat.log_up(x);
    log_down[x] = mat.log_down(x);
  }

  std::vector<double> cur(top + 1, ninf), next(top + 1, ninf);
  cur[0] = 0.0;
  std::vector<double> roots;
  roots.reserve(n_max);
  for (std::size_t t = 1; t <= 2 * n_max; ++t) {
    const std::size_t reach = std::min({t, 2 * n_max - t, top});
    for (std::size_t y = 0; y <= reach; ++y) {
      double acc = ninf;
      if (y > 0) acc = log_add(acc, cur[y - 1] + log_up[y - 1]);
      if (y + 1 <= top) acc = log_add(acc, cur[y + 1] + log_down[y]);
      next[y] = acc;
    }
    for (std::size_t y = reach + 1; y <= top; ++y) next[y] = ninf;
    std::swap(cur, next);
    if (t % 2 == 0) roots.push_back(std::exp(cur[0] / static_cast<double>(t)));
  }
  return roots;
}

PositiveSequence extend_to_gap(const PositiveSequence& a, double s, double tol) {
  const double critical = s_star(a, 0, tol).value;
  if (!(s > 0.0) || !(s < critical)) {
    throw Error(ErrorCode::NotInteriorScale, "scale must lie strictly inside (0, s*)");
  }
  const HLimit h = h_limit(a, s, 0, tol);
  if (h.exceeded || !(h.value < 1.0)) {
    throw Error(ErrorCode::NotInteriorScale, "h(s;0,inf) is not below 1");
  }
  std::vector<double> prefix;
  prefix.reserve(a.prefix_size() + 1);
  prefix.push_back((1.0 - h.value) / s);
  prefix.insert(prefix.end(), a.prefix().begin(), a.prefix().end());
  return make_sequence(std::move(prefix), a.tail());
}

}  // namespace rpos
