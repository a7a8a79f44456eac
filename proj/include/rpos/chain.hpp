#pragma once

// The h-transformed birth-death chain P^(r) of Q^[m], reflected at its base
// state m: p_{x,x+1} = w_x, p_{x+1,x} = 1 - w_{x+1}, with
//   w_m = 1,  w_{x+1} = 1 - r^2 a_x / w_x.
//
// At the critical r of a gapped shift the orbit sits on the repelling
// fixed point of the tail map, so the forward recursion loses every digit
// within a few dozen steps. The builder detects h(r^2; m, inf) = 1 and
// then takes w_x = h(r^2; x, inf) for x > m, the same orbit evaluated
// backward.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <variant>
#include <vector>

#include "rpos/seqmodel.hpp"

namespace rpos {

/// |h(r^2; m, inf) - 1| below this selects the backward (minimal) orbit.
inline constexpr double kCriticalSnap = 1e-9;

class BirthDeathChain {
 public:
  std::size_t base() const noexcept { return base_; }
  double r() const noexcept { return r_; }
  double scale() const noexcept { return r_ * r_; }
  /// States base..base+depth() have stored probabilities.
  std::size_t depth() const noexcept { return omega_.size() - 1; }
  /// True when the orbit was taken from h(r^2; x, inf).
  bool minimal_orbit() const noexcept { return minimal_; }
  /// Constant w beyond the stored range, when the orbit is eventually constant.
  std::optional<double> tail_omega() const noexcept { return tail_; }

  double up_prob(std::size_t x) const;
  double down_prob(std::size_t x) const;
  const std::vector<double>& omega() const noexcept { return omega_; }

 private:
  friend BirthDeathChain build_chain(const NearestNeighborMatrix&, std::size_t, double,
                                     std::size_t);
  std::size_t base_ = 0;
  double r_ = 0.0;
  std::vector<double> omega_;
  std::optional<double> tail_;
  bool minimal_ = false;
};

/// Throws OmegaCollapse(x) when w_x <= 0 for some x within depth.
BirthDeathChain build_chain(const NearestNeighborMatrix& mat, std::size_t m, double r,
                            std::size_t depth);

/// Chain at r = sqrt(s*^[m]).
BirthDeathChain build_critical_chain(const NearestNeighborMatrix& mat, std::size_t m,
                                     std::size_t depth, double tol = 1e-12);

struct EigenvectorTable {
  std::size_t base = 0;
  std::vector<double> log_f;  // log f_x for x = base.., log f_base = 0

  double at(std::size_t x) const { return log_f.at(x - base); }
};

/// f_{x+1} = f_x w_x / (r q_{x,x+1}).
EigenvectorTable eigenvector_log(const BirthDeathChain& chain, const NearestNeighborMatrix& mat);

/// r (q_{x,x-1} f_{x-1} + q_{x,x+1} f_{x+1}) / f_x - 1 (no left term at the base).
double eigen_row_residual(const EigenvectorTable& table, const BirthDeathChain& chain,
                          const NearestNeighborMatrix& mat, std::size_t x);

struct ReturnTimeDistribution {
  std::size_t state = 0;
  std::vector<double> pmf;      // pmf[k-1] = P(tau = 2k); odd times are impossible
  std::vector<double> log_pmf;  // same in logs; valid where pmf underflows
  double mass_accounted = 0.0;
  double first_step_down = 0.0;  // 1 - w_state, zero at the base

  std::size_t k_max() const noexcept { return pmf.size(); }
  double p(std::size_t k) const { return pmf.at(k - 1); }
};

/// Exact first-return law at even times 2..2 k_max by taboo dynamic
/// programming on [base, x + k_max].
ReturnTimeDistribution return_time_pmf(const BirthDeathChain& chain, std::size_t x,
                                       std::size_t k_max);

/// max over x in (base, x_max] of
///   |w^[m]_x (1 - w^[m]_{x+1}) - xi w^[m+1]_x (1 - w^[m+1]_{x+1})|.
double verify_excursion_identity(const BirthDeathChain& chain_m, const BirthDeathChain& chain_m1,
                                 std::size_t x_max);

struct ScalingResidual {
  std::size_t k = 0;
  double lhs = 0.0;
  double rhs = 0.0;
  double residual = 0.0;  // relative
};

/// P^[m](tau = 2k) against xi^k P^[m+1](tau = 2k), both at state m+1. For
/// k = 1 the right side is (1 - w^[m]_{m+1}) + xi P^[m+1](tau = 2).
std::vector<ScalingResidual> verify_scaling(const ReturnTimeDistribution& pmf_m,
                                            const ReturnTimeDistribution& pmf_m1, double xi,
                                            std::size_t k_first, std::size_t k_last);

struct TailFit {
  double rate = 0.0;  // per two steps
  double log_slope = 0.0;
  double log_slope_stderr = 0.0;
  std::size_t points = 0;
};

/// Least squares of log P(tau = 2k) on k over the last third of the range.
TailFit fit_tail(const ReturnTimeDistribution& pmf);

/// theta at which theta^2 * tail_rate = 1.
double critical_theta(const ReturnTimeDistribution& pmf);

enum class MomentVerdict { Finite, DivergesAtTheta, Inconclusive };
const char* to_string(MomentVerdict v);

struct MomentEstimate {
  double theta = 0.0;
  double truncated_sum = 0.0;  // sum_k theta^{2k} P(tau = 2k)
  double tail_rate = 0.0;
  double uncertainty = 0.0;  // 2 x standard error of the log-rate
  MomentVerdict verdict = MomentVerdict::Inconclusive;
};

MomentEstimate exp_moment(const ReturnTimeDistribution& pmf, double theta);

struct MeanReturnTime {
  double mean = 0.0;              // sum over the computed range
  double remainder_bound = 0.0;   // geometric bound on the rest
};

MeanReturnTime mean_return_time(const ReturnTimeDistribution& pmf);

struct StationaryDistribution {
  std::size_t base = 0;
  std::vector<double> pi;  // explicit part, states base..base+pi.size()-1
  double tail_ratio = 0.0;  // pi_{x+1}/pi_x beyond the explicit part
  double tail_mass = 0.0;

  double at(std::size_t x) const;
};

/// Throws NotPositiveRecurrent when the weights are not summable.
StationaryDistribution stationary_distribution(const BirthDeathChain& chain, double tol = 1e-12);

// ---------------------------------------------------------------------------
// Monte Carlo
// ---------------------------------------------------------------------------

struct Steps {
  std::uint64_t n = 0;
};

struct ReturnsTo {
  std::size_t x = 0;
  std::uint64_t count = 0;
  std::uint64_t cap = 0;
};

using SimulationMode = std::variant<Steps, ReturnsTo>;

struct SimulationOptions {
  std::size_t replicas = 1;
  std::size_t threads = 1;
  std::vector<double> theta_grid{1.1, 1.2, 1.4, 1.6};
};

struct SimulationReport {
  std::uint64_t seed = 0;
  std::size_t replicas = 0;
  bool returns_mode = false;

  // Steps mode
  std::uint64_t steps = 0;
  std::map<std::size_t, std::uint64_t> visits;

  // ReturnsTo mode
  std::size_t target = 0;
  std::uint64_t cap = 0;
  std::map<std::uint64_t, std::uint64_t> return_time_counts;
  std::uint64_t returns = 0;
  std::uint64_t censored = 0;
  double mean = 0.0;
  double std_error = 0.0;
  std::vector<std::pair<double, double>> theta_moments;  // (theta, mean of theta^tau)

  double empirical_p(std::uint64_t tau) const;
};

/// Replica i draws from std::mt19937_64 seeded with seed ^ i; results are
/// merged in replica order, so the report depends on neither thread count
/// nor scheduling.
SimulationReport simulate(const BirthDeathChain& chain, std::size_t x0, const SimulationMode& mode,
                          std::uint64_t seed, const SimulationOptions& options = {});

}  // namespace rpos
