#include "rpos/seqmodel.hpp"

#include <algorithm>
#include <cmath>

#include "rpos/error.hpp"

namespace rpos {

RealSequence::RealSequence(std::vector<double> prefix, Tail tail)
    : prefix_(std::move(prefix)), tail_(tail) {
  for (std::size_t i = 0; i < prefix_.size(); ++i) {
    if (!std::isfinite(prefix_[i])) {
      throw Error(ErrorCode::Validation, "non-finite sequence entry", i);
    }
  }
  if (auto v = tail_value(); v && !std::isfinite(*v)) {
    throw Error(ErrorCode::Validation, "non-finite tail value", prefix_.size());
  }
}

std::optional<double> RealSequence::tail_value() const noexcept {
  if (const auto* t = std::get_if<ConstantTail>(&tail_)) return t->value;
  return std::nullopt;
}

std::optional<std::size_t> RealSequence::domain_size() const noexcept {
  if (has_constant_tail()) return std::nullopt;
  return prefix_.size();
}

bool RealSequence::in_domain(std::size_t x) const noexcept {
  return x < prefix_.size() || has_constant_tail();
}

double RealSequence::value_at(std::size_t x) const {
  if (x < prefix_.size()) return prefix_[x];
  if (const auto* t = std::get_if<ConstantTail>(&tail_)) return t->value;
  throw Error(ErrorCode::OutOfDomain,
              "index " + std::to_string(x) + " beyond prefix of NoTail sequence", x);
}

RealSequence RealSequence::shift(std::size_t m) const {
  if (!has_constant_tail() && m >= prefix_.size()) {
    throw Error(ErrorCode::ShiftBeyondDomain,
                "shift " + std::to_string(m) + " of NoTail sequence with " +
                    std::to_string(prefix_.size()) + " entries",
                m);
  }
  std::vector<double> rest;
  if (m < prefix_.size()) rest.assign(prefix_.begin() + static_cast<std::ptrdiff_t>(m), prefix_.end());
  return {std::move(rest), tail_};
}

PositiveSequence make_sequence(std::vector<double> prefix, Tail tail) {
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (std::isnan(prefix[i])) throw Error(ErrorCode::Validation, "entry is NaN", i);
    if (!(prefix[i] > 0.0)) {
      throw Error(ErrorCode::NonPositiveEntry,
                  "entry " + std::to_string(i) + " is not strictly positive", i);
    }
  }
  if (const auto* t = std::get_if<ConstantTail>(&tail); t && !(t->value > 0.0)) {
    throw Error(ErrorCode::NonPositiveEntry, "constant tail is not strictly positive",
                prefix.size());
  }
  return PositiveSequence(RealSequence(std::move(prefix), tail));
}

PositiveSequence shift(const PositiveSequence& seq, std::size_t m) {
  RealSequence s = seq.as_real().shift(m);
  return make_sequence(s.prefix(), s.tail());
}

NearestNeighborMatrix::NearestNeighborMatrix(RealSequence log_up, RealSequence log_down,
                                             std::string split)
    : log_up_(std::move(log_up)), log_down_(std::move(log_down)), split_(std::move(split)) {}

namespace {

RealSequence log_of(const PositiveSequence& s) {
  std::vector<double> lp;
  lp.reserve(s.prefix_size());
  for (double v : s.prefix()) lp.push_back(std::log(v));
  Tail t = NoTail{};
  if (auto v = s.tail_value()) t = ConstantTail{std::log(*v)};
  return {std::move(lp), t};
}

}  // namespace

NearestNeighborMatrix NearestNeighborMatrix::from_entries(const PositiveSequence& up,
                                                          const PositiveSequence& down) {
  return {log_of(up), log_of(down), "edge"};
}

NearestNeighborMatrix NearestNeighborMatrix::symmetric_from_products(const PositiveSequence& a) {
  RealSequence la = log_of(a);
  std::vector<double> half;
  half.reserve(la.prefix().size());
  for (double v : la.prefix()) half.push_back(0.5 * v);
  Tail t = NoTail{};
  if (auto v = la.tail_value()) t = ConstantTail{0.5 * *v};
  RealSequence h(std::move(half), t);
  return {h, h, "symmetric"};
}

double NearestNeighborMatrix::up(std::size_t x) const { return std::exp(log_up(x)); }
double NearestNeighborMatrix::down(std::size_t x) const { return std::exp(log_down(x)); }

PositiveSequence NearestNeighborMatrix::products() const {
  const bool constant = log_up_.has_constant_tail() && log_down_.has_constant_tail();
  std::size_t n = 0;
  if (constant) {
    n = std::max(log_up_.prefix().size(), log_down_.prefix().size());
  } else {
    n = std::min(log_up_.domain_size().value_or(SIZE_MAX),
                 log_down_.domain_size().value_or(SIZE_MAX));
  }
  std::vector<double> a;
  a.reserve(n);
  for (std::size_t x = 0; x < n; ++x) a.push_back(std::exp(log_product(x)));
  Tail t = NoTail{};
  if (constant) t = ConstantTail{std::exp(*log_up_.tail_value() + *log_down_.tail_value())};
  return make_sequence(std::move(a), t);
}

NearestNeighborMatrix matrix_from_edge_rewards(const RealSequence& b, const RealSequence& c) {
  return {b, c, "edge"};
}

RealSequence alpha_from_bc(const RealSequence& b, const RealSequence& c, double alpha0,
                           std::size_t horizon) {
  if (horizon < 1) throw Error(ErrorCode::InvalidArgument, "horizon must be >= 1");
  std::vector<double> alpha(horizon + 1);
  alpha[0] = alpha0;
  for (std::size_t x = 0; x < horizon; ++x) {
    alpha[x + 1] = (b.value_at(x) + c.value_at(x)) - alpha[x];
  }
  return {std::move(alpha), NoTail{}};
}

}  // namespace rpos
