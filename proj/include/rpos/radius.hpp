#pragma once

// Critical scalings s*^[m] = R(Q^[m])^2, the gap ladder and the resulting
// classification, plus two brute-force routes to R(Q) that do not go
// through the continued fraction.

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rpos/contfrac.hpp"
#include "rpos/seqmodel.hpp"

namespace rpos {

inline constexpr double kDefaultTol = 1e-12;

struct SStar {
  std::size_t m = 0;
  double value = 0.0;  // largest scale known to be admissible
  Certificate certificate = Certificate::None;
};

/// sup{s : s a^[m] allowed} to absolute tolerance tol, by bisection on the
/// admissibility predicate. The returned value sits on the admissible side
/// of the final bracket.
SStar s_star(const PositiveSequence& a, std::size_t m, double tol = kDefaultTol,
             std::size_t depth = kDefaultDepth);

struct GapReport {
  std::vector<SStar> ladder;
  std::optional<std::size_t> gap_index;
  std::optional<double> xi;  // s*^[m] / s*^[m+1]
  // (1/xi, 1/sqrt(xi)): the wider candidate moment range and the
  // range the excursion scaling actually supports.
  std::optional<std::pair<double, double>> theta_bounds;
  double tol = kDefaultTol;
};

/// Step threshold above which s*^[m] < s*^[m+1] counts as a gap.
double gap_threshold(double s_m, double tol);

/// Ladder for m = 0..m_max; constant-tail sequences stop at prefix length
/// + 1 since every further shift is the same sequence.
GapReport gap_scan(const PositiveSequence& a, std::size_t m_max, double tol = kDefaultTol,
                   std::size_t depth = kDefaultDepth);

enum class Verdict { RPositive, TailRTransient, Undetermined };
enum class GibbsLabel { UniqueTIGibbsState, NoTIGibbsState, Unknown };

const char* to_string(Verdict v);
const char* to_string(GibbsLabel g);

struct Classification {
  Verdict verdict = Verdict::Undetermined;
  std::optional<std::size_t> gap_index;
  std::optional<double> xi;
  std::string reason;  // set for Undetermined
  GibbsLabel gibbs_label = GibbsLabel::Unknown;
  std::optional<HLimit> h_at_critical;  // h(s*^[0]; 0, inf)
  std::optional<GapReport> report;
};

/// RPositive iff a gap is found. TailRTransient only for constant tails
/// with a flat ladder. Everything else is Undetermined.
Classification classify(const NearestNeighborMatrix& mat, std::size_t m_max,
                        double tol = kDefaultTol, std::size_t depth = kDefaultDepth);

struct OracleResult {
  std::size_t L = 0;
  double lambda = 0.0;
  std::size_t iterations = 0;
};

/// Perron value of the principal (L+1)x(L+1) section of Q on {0..L},
/// lambda_L increasing towards 1/R(Q).
OracleResult truncated_radius_oracle(const NearestNeighborMatrix& mat, std::size_t L,
                                     double tol = 1e-13, std::size_t max_iterations = 10000);

/// (q^{(2N)}_{0,0})^{1/2N} for N = 1..n_max by exact path counting.
std::vector<double> diagonal_power_series(const NearestNeighborMatrix& mat, std::size_t n_max);

/// Prepends a_{-1} = (1 - h(s;0,inf))/s, which puts a gap at index 0 with
/// s*^[0] = s. Needs 0 < s < s*^[0](a).
PositiveSequence extend_to_gap(const PositiveSequence& a, double s, double tol = kDefaultTol);

}  // namespace rpos
