#pragma once

// Sequence and matrix data model.
//
// Every sequence is a finite prefix followed by a tail descriptor. Only
// constant tails get closed-form treatment downstream; a sequence with
// NoTail is defined on its prefix only and every answer derived from it is
// horizon bounded.

#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace rpos {

struct NoTail {
  bool operator==(const NoTail&) const = default;
};

struct ConstantTail {
  double value = 0.0;
  bool operator==(const ConstantTail&) const = default;
};

using Tail = std::variant<NoTail, ConstantTail>;

/// Real sequence (any sign), total under its tail descriptor.
class RealSequence {
 public:
  RealSequence() = default;
  RealSequence(std::vector<double> prefix, Tail tail);

  static RealSequence constant(double value) { return {{}, ConstantTail{value}}; }

  double value_at(std::size_t x) const;

  const std::vector<double>& prefix() const noexcept { return prefix_; }
  const Tail& tail() const noexcept { return tail_; }
  bool has_constant_tail() const noexcept {
    return std::holds_alternative<ConstantTail>(tail_);
  }
  std::optional<double> tail_value() const noexcept;

  /// Number of defined entries; nullopt when the tail is constant.
  std::optional<std::size_t> domain_size() const noexcept;
  bool in_domain(std::size_t x) const noexcept;

  RealSequence shift(std::size_t m) const;

 private:
  std::vector<double> prefix_;
  Tail tail_ = NoTail{};
};

/// Strictly positive sequence a = (a_x).
class PositiveSequence {
 public:
  PositiveSequence() = default;

  double value_at(std::size_t x) const { return seq_.value_at(x); }
  const std::vector<double>& prefix() const noexcept { return seq_.prefix(); }
  const Tail& tail() const noexcept { return seq_.tail(); }
  bool has_constant_tail() const noexcept { return seq_.has_constant_tail(); }
  std::optional<double> tail_value() const noexcept { return seq_.tail_value(); }
  std::optional<std::size_t> domain_size() const noexcept { return seq_.domain_size(); }
  bool in_domain(std::size_t x) const noexcept { return seq_.in_domain(x); }
  std::size_t prefix_size() const noexcept { return seq_.prefix().size(); }

  const RealSequence& as_real() const noexcept { return seq_; }

 private:
  friend PositiveSequence make_sequence(std::vector<double> prefix, Tail tail);
  explicit PositiveSequence(RealSequence seq) : seq_(std::move(seq)) {}

  RealSequence seq_;
};

/// Validates positivity; throws NonPositiveEntry(index), where the tail
/// reports the first tail index (the prefix length).
PositiveSequence make_sequence(std::vector<double> prefix, Tail tail);

/// a^[m]: value_at(x) of the result is value_at(x + m) of the input.
PositiveSequence shift(const PositiveSequence& seq, std::size_t m);

/// Off-diagonal weights of a nearest-neighbour matrix on Z+, kept as logs:
/// log_up(x) = log q_{x,x+1}, log_down(x) = log q_{x+1,x}.
class NearestNeighborMatrix {
 public:
  NearestNeighborMatrix(RealSequence log_up, RealSequence log_down,
                        std::string split = "edge");

  static NearestNeighborMatrix from_entries(const PositiveSequence& up,
                                            const PositiveSequence& down);
  /// up = down = sqrt(a).
  static NearestNeighborMatrix symmetric_from_products(const PositiveSequence& a);

  double log_up(std::size_t x) const { return log_up_.value_at(x); }
  double log_down(std::size_t x) const { return log_down_.value_at(x); }
  double up(std::size_t x) const;
  double down(std::size_t x) const;

  const RealSequence& log_up_sequence() const noexcept { return log_up_; }
  const RealSequence& log_down_sequence() const noexcept { return log_down_; }

  /// log a_x = log q_{x,x+1} + log q_{x+1,x}.
  double log_product(std::size_t x) const { return log_up(x) + log_down(x); }

  /// a_x = q_{x,x+1} q_{x+1,x}; constant tail iff both factors have one.
  PositiveSequence products() const;

  /// "edge" for explicit up/down weights, "symmetric" for an a-only model.
  const std::string& split() const noexcept { return split_; }

 private:
  RealSequence log_up_;
  RealSequence log_down_;
  std::string split_;
};

/// q_{x,x+1} = exp(b_x), q_{x+1,x} = exp(c_x).
NearestNeighborMatrix matrix_from_edge_rewards(const RealSequence& b,
                                               const RealSequence& c);

/// alpha_0 = alpha0, alpha_{x+1} = b_x + c_x - alpha_x for x < horizon.
/// The result is a NoTail sequence with horizon + 1 entries.
RealSequence alpha_from_bc(const RealSequence& b, const RealSequence& c,
                           double alpha0, std::size_t horizon);

struct SiteRewards {
  RealSequence alpha;
};

struct EdgeRewards {
  RealSequence b;
  RealSequence c;
};

using HamiltonianSpec = std::variant<SiteRewards, EdgeRewards>;

}  // namespace rpos
