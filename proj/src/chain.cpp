#include "rpos/chain.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <limits>
#include <string>

#include "rpos/contfrac.hpp"
#include "rpos/error.hpp"
#include "rpos/radius.hpp"

namespace rpos {

double BirthDeathChain::up_prob(std::size_t x) const {
  if (x < base_) throw Error(ErrorCode::InvalidArgument, "state below chain base", x);
  const std::size_t i = x - base_;
  if (i < omega_.size()) return omega_[i];
  if (tail_) return *tail_;
  throw Error(ErrorCode::DepthExceeded,
              "state " + std::to_string(x) + " beyond chain depth " + std::to_string(depth()), x);
}

double BirthDeathChain::down_prob(std::size_t x) const {
  if (x == base_) return 0.0;
  return 1.0 - up_prob(x);
}

BirthDeathChain build_chain(const NearestNeighborMatrix& mat, std::size_t m, double r,
                            std::size_t depth) {
  if (!(r > 0.0)) throw Error(ErrorCode::InvalidArgument, "r must be positive");
  if (depth < 1) throw Error(ErrorCode::InvalidArgument, "depth must be >= 1");
  const double s = r * r;
  const PositiveSequence a = shift(mat.products(), m);

  BirthDeathChain chain;
  chain.base_ = m;
  chain.r_ = r;

  if (auto tail = a.tail_value()) {
    const HLimit h0 = h_limit(a, s, 0);
    if (std::isfinite(h0.value) && std::abs(h0.value - 1.0) <= kCriticalSnap) {
      const std::size_t prefix = a.prefix_size();
      const double fixed = lower_fixed_point(s * *tail);
      const std::size_t stored = std::max(depth, prefix);
      chain.omega_.assign(stored + 1, fixed);
      double v = fixed;
      for (std::size_t x = prefix; x-- > 1;) {
        v = s * a.value_at(x) / (1.0 - v);
        chain.omega_[x] = v;
      }
      chain.omega_[0] = 1.0;
      chain.tail_ = fixed;
      chain.minimal_ = true;
      return chain;
    }
  }

  const OmegaTrace t = omega_trace(a, s, depth);
  if (t.first_failure) {
    throw Error(ErrorCode::OmegaCollapse,
                "omega vanishes at state " + std::to_string(m + *t.first_failure),
                m + *t.first_failure);
  }
  chain.omega_ = t.values;
  if (t.tail_entered) chain.tail_ = t.values.back();
  return chain;
}

BirthDeathChain build_critical_chain(const NearestNeighborMatrix& mat, std::size_t m,
                                     std::size_t depth, double tol) {
  const SStar crit = s_star(mat.products(), m, tol);
  return build_chain(mat, m, std::sqrt(crit.value), depth);
}

EigenvectorTable eigenvector_log(const BirthDeathChain& chain, const NearestNeighborMatrix& mat) {
  EigenvectorTable t;
  t.base = chain.base();
  const std::size_t n = chain.depth() + 1;
  t.log_f.resize(n);
  t.log_f[0] = 0.0;
  const double log_r = std::log(chain.r());
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const std::size_t x = chain.base() + i;
    t.log_f[i + 1] = t.log_f[i] + std::log(chain.up_prob(x)) - log_r - mat.log_up(x);
  }
  return t;
}

double eigen_row_residual(const EigenvectorTable& table, const BirthDeathChain& chain,
                          const NearestNeighborMatrix& mat, std::size_t x) {
  const double lf = table.at(x);
  double sum = std::exp(mat.log_up(x) + table.at(x + 1) - lf);
  if (x > chain.base()) sum += std::exp(mat.log_down(x - 1) + table.at(x - 1) - lf);
  return chain.r() * sum - 1.0;
}

ReturnTimeDistribution return_time_pmf(const BirthDeathChain& chain, std::size_t x,
                                       std::size_t k_max) {
  if (x < chain.base()) throw Error(ErrorCode::InvalidArgument, "state below chain base", x);
  if (k_max < 1) throw Error(ErrorCode::InvalidArgument, "k_max must be >= 1");
  const std::size_t base = chain.base();
  const std::size_t top = x + k_max;
  const std::size_t width = top - base + 1;

  std::vector<double> up(width);
  for (std::size_t i = 0; i < width; ++i) up[i] = chain.up_prob(base + i);

  ReturnTimeDistribution out;
  out.state = x;
  out.first_step_down = chain.down_prob(x);
  out.pmf.assign(k_max, 0.0);
  out.log_pmf.assign(k_max, -std::numeric_limits<double>::infinity());

  const std::size_t xi = x - base;
  std::vector<double> cur(width, 0.0), next(width, 0.0);
  // First step out of x.
  cur[xi + 1] = up[xi];
  if (xi > 0) cur[xi - 1] = 1.0 - up[xi];
  double log_scale = 0.0;

  for (std::size_t t = 2; t <= 2 * k_max; ++t) {
    // After t-1 steps the walker is within t-1 of x, and only mass that can
    // still come back within the remaining steps matters.
    const std::size_t radius = std::min(t - 1, 2 * k_max - t + 1);
    const std::size_t lo = xi > radius ? xi - radius : 0;
    const std::size_t hi = std::min(width - 1, xi + radius);
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t y = lo; y <= hi; ++y) {
      const double mass = cur[y];
      if (mass == 0.0 || y == xi) continue;
      if (y + 1 < width) next[y + 1] += mass * up[y];
      if (y > 0) next[y - 1] += mass * (1.0 - up[y]);
    }
    if (t % 2 == 0 && next[xi] > 0.0) {
      const std::size_t k = t / 2;
      out.log_pmf[k - 1] = std::log(next[xi]) + log_scale;
      out.pmf[k - 1] = log_scale == 0.0 ? next[xi] : std::exp(out.log_pmf[k - 1]);
    }
    next[xi] = 0.0;
    std::swap(cur, next);

    // Rescale before the live mass underflows; pmf entries carry the scale.
    double live = 0.0;
    for (double v : cur) live += v;
    if (live > 0.0 && live < 1e-200) {
      for (double& v : cur) v /= live;
      log_scale += std::log(live);
    }
  }

  for (double p : out.pmf) out.mass_accounted += p;
  return out;
}

double verify_excursion_identity(const BirthDeathChain& chain_m, const BirthDeathChain& chain_m1,
                                 std::size_t x_max) {
  if (chain_m1.base() != chain_m.base() + 1) {
    throw Error(ErrorCode::InvalidArgument, "chains must have bases m and m+1");
  }
  const double s0 = chain_m.scale();
  const double s1 = chain_m1.scale();
  if (!(s1 - s0 > gap_threshold(s0, kDefaultTol))) {
    throw Error(ErrorCode::GapRequired, "no gap between the two critical scales");
  }
  const double xi = s0 / s1;
  double worst = 0.0;
  for (std::size_t x = chain_m.base() + 1; x <= x_max; ++x) {
    const double lhs = chain_m.up_prob(x) * (1.0 - chain_m.up_prob(x + 1));
    const double rhs = xi * chain_m1.up_prob(x) * (1.0 - chain_m1.up_prob(x + 1));
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  return worst;
}

std::vector<ScalingResidual> verify_scaling(const ReturnTimeDistribution& pmf_m,
                                            const ReturnTimeDistribution& pmf_m1, double xi,
                                            std::size_t k_first, std::size_t k_last) {
  if (pmf_m.state != pmf_m1.state) {
    throw Error(ErrorCode::InvalidArgument, "return-time laws must be at the same state");
  }
  if (k_first < 1 || k_first > k_last) throw Error(ErrorCode::InvalidArgument, "empty k range");
  if (k_last > pmf_m.k_max() || k_last > pmf_m1.k_max()) {
    throw Error(ErrorCode::LengthMismatch, "k range exceeds the computed return-time laws", k_last);
  }
  std::vector<ScalingResidual> out;
  out.reserve(k_last - k_first + 1);
  for (std::size_t k = k_first; k <= k_last; ++k) {
    ScalingResidual r;
    r.k = k;
    r.lhs = pmf_m.p(k);
    if (k == 1) {
      r.rhs = pmf_m.first_step_down + xi * pmf_m1.p(1);
    } else {
      r.rhs = pmf_m1.p(k) > 0.0
                  ? std::pow(xi, static_cast<double>(k)) * pmf_m1.p(k)
                  : std::exp(static_cast<double>(k) * std::log(xi) + pmf_m1.log_pmf[k - 1]);
    }
    r.residual = std::abs(r.lhs - r.rhs) / std::max(r.lhs, DBL_MIN);
    out.push_back(r);
  }
  return out;
}

TailFit fit_tail(const ReturnTimeDistribution& pmf) {
  const std::size_t n = pmf.k_max();
  const std::size_t first = n - n / 3 + 1;
  std::vector<double> ks, ys;
  for (std::size_t k = std::max<std::size_t>(first, 1); k <= n; ++k) {
    const double lp = pmf.log_pmf[k - 1];
    if (std::isfinite(lp)) {
      ks.push_back(static_cast<double>(k));
      ys.push_back(lp);
    }
  }
  TailFit fit;
  fit.points = ks.size();
  if (ks.size() < 3) {
    throw Error(ErrorCode::InvalidArgument, "need at least three positive tail points to fit");
  }
  const double cnt = static_cast<double>(ks.size());
  double mk = 0.0, my = 0.0;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    mk += ks[i];
    my += ys[i];
  }
  mk /= cnt;
  my /= cnt;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    sxx += (ks[i] - mk) * (ks[i] - mk);
    sxy += (ks[i] - mk) * (ys[i] - my);
  }
  const double slope = sxy / sxx;
  const double icpt = my - slope * mk;
  double sse = 0.0;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    const double e = ys[i] - (icpt + slope * ks[i]);
    sse += e * e;
  }
  fit.log_slope = slope;
  fit.log_slope_stderr = std::sqrt(sse / (cnt - 2.0) / sxx);
  fit.rate = std::exp(slope);
  return fit;
}

double critical_theta(const ReturnTimeDistribution& pmf) {
  return 1.0 / std::sqrt(fit_tail(pmf).rate);
}

const char* to_string(MomentVerdict v) {
  switch (v) {
    case MomentVerdict::Finite: return "Finite";
    case MomentVerdict::DivergesAtTheta: return "DivergesAtTheta";
    case MomentVerdict::Inconclusive: return "Inconclusive";
  }
  return "?";
}

MomentEstimate exp_moment(const ReturnTimeDistribution& pmf, double theta) {
  if (!(theta > 1.0)) throw Error(ErrorCode::InvalidArgument, "theta must exceed 1");
  MomentEstimate est;
  est.theta = theta;
  const double log_theta2 = 2.0 * std::log(theta);
  for (std::size_t k = 1; k <= pmf.k_max(); ++k) {
    const double lp = pmf.log_pmf[k - 1];
    if (std::isfinite(lp)) est.truncated_sum += std::exp(static_cast<double>(k) * log_theta2 + lp);
  }
  const TailFit fit = fit_tail(pmf);
  est.tail_rate = fit.rate;
  est.uncertainty = 2.0 * fit.log_slope_stderr;
  const double growth = log_theta2 + fit.log_slope;  // log(theta^2 * rate)
  if (growth < -est.uncertainty) {
    est.verdict = MomentVerdict::Finite;
  } else if (growth > est.uncertainty) {
    est.verdict = MomentVerdict::DivergesAtTheta;
  }
  return est;
}

MeanReturnTime mean_return_time(const ReturnTimeDistribution& pmf) {
  MeanReturnTime out;
  for (std::size_t k = 1; k <= pmf.k_max(); ++k) out.mean += 2.0 * static_cast<double>(k) * pmf.p(k);
  const TailFit fit = fit_tail(pmf);
  const double rho = fit.rate;
  const double last = pmf.p(pmf.k_max());
  if (rho < 1.0) {
    const double kk = static_cast<double>(pmf.k_max());
    out.remainder_bound = 2.0 * last * (kk * rho / (1.0 - rho) + rho / ((1.0 - rho) * (1.0 - rho)));
  } else {
    out.remainder_bound = std::numeric_limits<double>::infinity();
  }
  return out;
}

double StationaryDistribution::at(std::size_t x) const {
  if (x < base) throw Error(ErrorCode::InvalidArgument, "state below chain base", x);
  const std::size_t i = x - base;
  if (i < pi.size()) return pi[i];
  return pi.back() * std::pow(tail_ratio, static_cast<double>(i - (pi.size() - 1)));
}

StationaryDistribution stationary_distribution(const BirthDeathChain& chain, double tol) {
  const std::vector<double>& w = chain.omega();
  const std::size_t n = w.size();
  std::vector<double> log_w(n);
  log_w[0] = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    log_w[i + 1] = log_w[i] + std::log(w[i]) - std::log1p(-w[i + 1]);
  }

  double ratio = 0.0;
  if (auto t = chain.tail_omega(); t && w.back() == *t) {
    ratio = *t / (1.0 - *t);
  } else {
    // Largest weight ratio over the last tenth of the stored orbit.
    const std::size_t from = n - std::max<std::size_t>(n / 10, 1);
    for (std::size_t i = std::max<std::size_t>(from, 1); i < n; ++i) {
      ratio = std::max(ratio, std::exp(log_w[i] - log_w[i - 1]));
    }
  }
  if (!(ratio < 1.0 - tol)) {
    throw Error(ErrorCode::NotPositiveRecurrent,
                "stationary weights are not summable (tail ratio " + std::to_string(ratio) + ")");
  }

  const double top = *std::max_element(log_w.begin(), log_w.end());
  double total = 0.0;
  for (double lw : log_w) total += std::exp(lw - top);
  const double tail = std::exp(log_w.back() - top) * ratio / (1.0 - ratio);
  total += tail;

  StationaryDistribution out;
  out.base = chain.base();
  out.tail_ratio = ratio;
  out.pi.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.pi[i] = std::exp(log_w[i] - top) / total;
  out.tail_mass = tail / total;
  return out;
}

}  // namespace rpos
