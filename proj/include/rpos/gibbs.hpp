#pragma once

// Path ensembles on Z+ with fixed boundary heights. A window [i, j] has
// boundary heights w_{i-1} and w_{j+1}; the site Hamiltonian counts visits
// of w[i, j+1] and the edge Hamiltonian counts steps of w[i-1, j+1], so both
// are products of j - i + 2 transfer-matrix entries M(x, y):
//   site:  M(x, y) = exp(alpha_y)
//   edge:  M(x, x+1) = exp(b_x),  M(x+1, x) = exp(c_x)

#include <cstddef>
#include <cstdint>
#include <map>
#include <ostream>
#include <span>
#include <utility>
#include <vector>

#include "rpos/seqmodel.hpp"

namespace rpos {

class TrajectoryBlock {
 public:
  /// Throws Validation unless heights are nonnegative nearest-neighbour steps.
  TrajectoryBlock(std::int64_t start, std::vector<int> heights);

  std::int64_t start() const noexcept { return start_; }
  std::int64_t end() const noexcept { return start_ + static_cast<std::int64_t>(heights_.size()) - 1; }
  std::size_t size() const noexcept { return heights_.size(); }
  const std::vector<int>& heights() const noexcept { return heights_; }
  int at(std::int64_t t) const { return heights_.at(static_cast<std::size_t>(t - start_)); }

 private:
  std::int64_t start_ = 0;
  std::vector<int> heights_;
};

struct Window {
  std::int64_t i = 0;
  std::int64_t j = 0;
  int left = 0;   // w_{i-1}
  int right = 0;  // w_{j+1}

  std::size_t width() const noexcept { return static_cast<std::size_t>(j - i + 1); }
  /// Transitions from w_{i-1} to w_{j+1}.
  std::size_t steps() const noexcept { return width() + 1; }
  /// Heights above this are unreachable inside the window.
  int height_cap() const noexcept;
  bool nonempty() const noexcept;
};

std::map<int, std::size_t> visit_counts(const TrajectoryBlock& block);
std::map<std::pair<int, int>, std::size_t> edge_counts(const TrajectoryBlock& block);

/// sum_x alpha_x N_x over the given heights (meant to be w[i, j+1]).
double hamiltonian_sites(const RealSequence& alpha, std::span<const int> heights);
double hamiltonian_sites(const RealSequence& alpha, const TrajectoryBlock& block);

/// sum_x b_x N_{x,x+1} + c_x N_{x+1,x} over the given heights (meant to be w[i-1, j+1]).
double hamiltonian_edges(const RealSequence& b, const RealSequence& c, std::span<const int> heights);
double hamiltonian_edges(const RealSequence& b, const RealSequence& c,
                         const TrajectoryBlock& block);

/// Hamiltonian of a full path w[i-1, j+1] under either specification.
double hamiltonian(const HamiltonianSpec& H, std::span<const int> path);

using BlockDistribution = std::map<std::vector<int>, double>;

class FiniteVolumeMeasure {
 public:
  /// Throws EmptyEnsemble when no path joins the boundaries.
  FiniteVolumeMeasure(HamiltonianSpec H, Window win);

  const Window& window() const noexcept { return win_; }
  const HamiltonianSpec& hamiltonian() const noexcept { return H_; }
  double log_partition() const noexcept { return log_z_; }

  /// mu(sigma) for sigma on [k, l] with i < k <= l < j; IndexOutOfWindow otherwise.
  double log_probability(const TrajectoryBlock& sigma) const;
  double probability(const TrajectoryBlock& sigma) const;

  /// P(w_t = x) for x = 0..height_cap, i <= t <= j.
  std::vector<double> site_marginal(std::int64_t t) const;

  /// Every sigma on [k, l] with positive probability.
  BlockDistribution block_distribution(std::int64_t k, std::int64_t l) const;

 private:
  double log_m(int x, int y) const;
  void check_block(std::int64_t k, std::int64_t l) const;

  HamiltonianSpec H_;
  Window win_;
  int cap_ = 0;
  std::vector<double> log_up_;    // log M(x, x+1)
  std::vector<double> log_down_;  // log M(x+1, x)
  // fwd_[n][x] = log M^n(left, x), bwd_[n][x] = log M^n(x, right)
  std::vector<std::vector<double>> fwd_;
  std::vector<std::vector<double>> bwd_;
  double log_z_ = 0.0;
};

double finite_volume_prob(const HamiltonianSpec& H, const Window& win, const TrajectoryBlock& sigma);

/// Enumeration handles at most 2^22 step sequences.
inline constexpr std::size_t kMaxEnumerationSteps = 22;

/// Brute-force distribution over all interior paths w[i, j].
class EnumeratedMeasure {
 public:
  const Window& window() const noexcept { return win_; }
  std::size_t size() const noexcept { return prob_.size(); }
  /// Interior heights w_i..w_j of path n.
  std::vector<int> interior(std::size_t n) const;
  double probability(std::size_t n) const { return prob_.at(n); }
  BlockDistribution block_distribution(std::int64_t k, std::int64_t l) const;

 private:
  friend EnumeratedMeasure enumerate_measure(const HamiltonianSpec&, const Window&);
  Window win_;
  std::vector<std::uint32_t> up_mask_;  // bit t set: step t of w[i-1, j] goes up
  std::vector<double> prob_;
};

/// Throws WindowTooLarge beyond kMaxEnumerationSteps, EmptyEnsemble when no
/// path joins the boundaries.
EnumeratedMeasure enumerate_measure(const HamiltonianSpec& H, const Window& win);

/// Max |mu^{b,c}(sigma) - mu^alpha(sigma)| over sigma on [k, l]. Throws
/// RelationViolated(x) if alpha_x + alpha_{x+1} differs from b_x + c_x by more
/// than 1e-12 at a reachable height.
double verify_site_edge_equivalence(const RealSequence& alpha, const RealSequence& b,
                                    const RealSequence& c, const Window& win, std::int64_t k,
                                    std::int64_t l);

/// max - min over admissible paths of H^{b,c}(w) - H^alpha(w); zero up to
/// rounding when the offset depends on the boundaries only.
double boundary_offset_spread(const RealSequence& alpha, const RealSequence& b,
                              const RealSequence& c, const Window& win);

/// "heights",probability per line, heights comma joined.
void write_distribution_csv(std::ostream& os, const BlockDistribution& dist);

}  // namespace rpos
