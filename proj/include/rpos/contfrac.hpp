#pragma once

// Maps phi_a(w) = 1 - a/w and phi_a^{-1}(w) = a/(1 - w), the forward orbit
//   w_0 = 1,  w_{x+1} = 1 - s a_x / w_x,
// the "allowed" predicate (orbit stays strictly positive forever) and the
// backward continued fractions
//   h(s; x, y) = phi^{-1}_{s a_x} o ... o phi^{-1}_{s a_y}(0),
//   h(s; x, inf) = lim_y h(s; x, y).
//
// For a constant tail c = s * a_tail the map w -> 1 - c/w has the fixed
// points (1 +- sqrt(1 - 4c))/2 when c <= 1/4. An orbit entering the tail at
// or above the lower one stays positive forever; any other orbit reaches a
// nonpositive value after finitely many steps. That makes the verdict exact
// for constant tails.

#include <cstddef>
#include <optional>
#include <vector>

#include "rpos/seqmodel.hpp"

namespace rpos {

inline constexpr std::size_t kDefaultDepth = 1'000'000;

double phi(double a, double omega);
double phi_inv(double a, double omega);

/// Smaller root of h^2 - h + c = 0, i.e. (1 - sqrt(1 - 4c))/2, evaluated
/// without cancellation. Requires 0 < c <= 1/4.
double lower_fixed_point(double c);

struct OmegaTrace {
  double scale = 0.0;
  std::vector<double> values;                // w_0 .. w_D
  std::optional<std::size_t> first_failure;  // smallest x with w_x <= 0
  std::optional<std::size_t> tail_entered;   // w_x constant from here on

  /// w_x; beyond the stored range only valid once a fixed point was hit.
  double at(std::size_t x) const;
};

/// Forward orbit of s*a up to w_depth. Stops at the first nonpositive value
/// or when the orbit lands exactly on a fixed point inside the constant tail.
OmegaTrace omega_trace(const PositiveSequence& a, double s, std::size_t depth);

enum class AllowedStatus { Allowed, NotAllowed, Undetermined };
enum class Certificate { None, ClosedFormTail, DepthExhaustedPositive };

const char* to_string(AllowedStatus s);
const char* to_string(Certificate c);

struct AllowedVerdict {
  AllowedStatus status = AllowedStatus::Undetermined;
  Certificate certificate = Certificate::None;
  // Set for NotAllowed when the failing index lies within the scanned depth.
  std::optional<std::size_t> first_failure;
  std::size_t depth = 0;

  bool allowed() const noexcept { return status == AllowedStatus::Allowed; }
};

/// Constant tails are decided in closed form once the prefix is consumed;
/// `depth` then only bounds the search for the failing index. A NoTail
/// sequence is Allowed(DepthExhaustedPositive) when its whole prefix was
/// scanned without failure and Undetermined when depth < prefix length.
AllowedVerdict is_allowed(const PositiveSequence& a, double s,
                          std::size_t depth = kDefaultDepth);

/// Same predicate as is_allowed(...).status != NotAllowed, without the
/// search for the failing index.
bool is_admissible(const PositiveSequence& a, double s, std::size_t depth = kDefaultDepth);

/// Backward evaluation from y down to x. Throws SingularContinuant when an
/// intermediate value reaches 1.
double h_finite(const PositiveSequence& a, double s, std::size_t x, std::size_t y);

struct HLimit {
  double value = 0.0;  // +inf when a continuant was singular
  bool exceeded = false;  // some truncation went above 1
  std::size_t truncation_depth = 0;  // 0 for the closed-form tail
  bool converged = false;
};

HLimit h_limit(const PositiveSequence& a, double s, std::size_t x, double tol = 1e-12,
               std::size_t depth = kDefaultDepth);

}  // namespace rpos
