#include "rpos/contfrac.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "rpos/error.hpp"

namespace rpos {

double phi(double a, double omega) {
  if (!(omega > 0.0)) throw Error(ErrorCode::DomainError, "phi needs omega > 0");
  return 1.0 - a / omega;
}

double phi_inv(double a, double omega) {
  if (!(omega < 1.0)) throw Error(ErrorCode::SingularContinuant, "phi_inv needs omega < 1");
  return a / (1.0 - omega);
}

double lower_fixed_point(double c) {
  if (!(c > 0.0) || c > 0.25) {
    throw Error(ErrorCode::DomainError, "lower fixed point needs 0 < c <= 1/4");
  }
  return 2.0 * c / (1.0 + std::sqrt(1.0 - 4.0 * c));
}

const char* to_string(AllowedStatus s) {
  switch (s) {
    case AllowedStatus::Allowed: return "Allowed";
    case AllowedStatus::NotAllowed: return "NotAllowed";
    case AllowedStatus::Undetermined: return "Undetermined";
  }
  return "?";
}

const char* to_string(Certificate c) {
  switch (c) {
    case Certificate::None: return "None";
    case Certificate::ClosedFormTail: return "ClosedFormTail";
    case Certificate::DepthExhaustedPositive: return "DepthExhaustedPositive";
  }
  return "?";
}

double OmegaTrace::at(std::size_t x) const {
  if (x < values.size()) return values[x];
  if (tail_entered) return values.back();
  throw Error(ErrorCode::DepthExceeded, "omega index " + std::to_string(x) + " beyond trace", x);
}

OmegaTrace omega_trace(const PositiveSequence& a, double s, std::size_t depth) {
  if (!(s > 0.0)) throw Error(ErrorCode::InvalidArgument, "scale must be positive");
  OmegaTrace t;
  t.scale = s;
  t.values.reserve(std::min<std::size_t>(depth, 1u << 20) + 1);
  t.values.push_back(1.0);
  const std::size_t prefix = a.prefix_size();
  for (std::size_t x = 0; x < depth && a.in_domain(x); ++x) {
    const double w = t.values.back();
    const double next = 1.0 - s * a.value_at(x) / w;
    t.values.push_back(next);
    if (next <= 0.0) {
      t.first_failure = x + 1;
      break;
    }
    if (x >= prefix && a.has_constant_tail() && next == w) {
      t.tail_entered = x;
      break;
    }
  }
  return t;
}

namespace {

struct PrefixScan {
  double omega = 1.0;  // orbit value entering the first unscanned index
  std::size_t scanned = 0;
  std::optional<std::size_t> failure;
};

PrefixScan scan(const PositiveSequence& a, double s, std::size_t limit) {
  PrefixScan r;
  for (std::size_t x = 0; x < limit; ++x) {
    r.omega = 1.0 - s * a.value_at(x) / r.omega;
    r.scanned = x + 1;
    if (r.omega <= 0.0) {
      r.failure = x + 1;
      return r;
    }
  }
  return r;
}

bool tail_keeps_positive(double entering, double c) {
  return c <= 0.25 && entering >= lower_fixed_point(c);
}

}  // namespace

AllowedVerdict is_allowed(const PositiveSequence& a, double s, std::size_t depth) {
  if (!(s > 0.0)) throw Error(ErrorCode::InvalidArgument, "scale must be positive");
  AllowedVerdict v;
  const std::size_t prefix = a.prefix_size();

  if (auto tail = a.tail_value()) {
    PrefixScan p = scan(a, s, prefix);
    v.depth = p.scanned;
    if (p.failure) {
      v.status = AllowedStatus::NotAllowed;
      v.first_failure = p.failure;
      return v;
    }
    const double c = s * *tail;
    v.certificate = Certificate::ClosedFormTail;
    if (tail_keeps_positive(p.omega, c)) {
      v.status = AllowedStatus::Allowed;
      return v;
    }
    v.status = AllowedStatus::NotAllowed;
    // Locate the crossing inside the tail, bounded by depth.
    double w = p.omega;
    for (std::size_t x = prefix; x < std::max(depth, prefix); ++x) {
      w = 1.0 - c / w;
      if (w <= 0.0) {
        v.first_failure = x + 1;
        v.depth = x + 1;
        return v;
      }
    }
    v.depth = std::max(depth, prefix);
    return v;
  }

  const std::size_t limit = std::min(depth, prefix);
  PrefixScan p = scan(a, s, limit);
  v.depth = p.scanned;
  if (p.failure) {
    v.status = AllowedStatus::NotAllowed;
    v.first_failure = p.failure;
  } else if (limit == prefix) {
    v.status = AllowedStatus::Allowed;
    v.certificate = Certificate::DepthExhaustedPositive;
  } else {
    v.status = AllowedStatus::Undetermined;
  }
  return v;
}

bool is_admissible(const PositiveSequence& a, double s, std::size_t depth) {
  const std::size_t prefix = a.prefix_size();
  if (auto tail = a.tail_value()) {
    PrefixScan p = scan(a, s, prefix);
    return !p.failure && tail_keeps_positive(p.omega, s * *tail);
  }
  return !scan(a, s, std::min(depth, prefix)).failure;
}

double h_finite(const PositiveSequence& a, double s, std::size_t x, std::size_t y) {
  if (x > y) throw Error(ErrorCode::InvalidArgument, "h_finite needs x <= y");
  double v = 0.0;
  for (std::size_t z = y + 1; z-- > x;) v = phi_inv(s * a.value_at(z), v);
  return v;
}

HLimit h_limit(const PositiveSequence& a, double s, std::size_t x, double tol,
               std::size_t depth) {
  if (!(s > 0.0) || !(tol > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "h_limit needs s > 0 and tol > 0");
  }
  constexpr double inf = std::numeric_limits<double>::infinity();
  HLimit out;
  const std::size_t prefix = a.prefix_size();

  if (auto tail = a.tail_value()) {
    out.converged = true;
    const double c = s * *tail;
    if (c > 0.25) {
      out.value = inf;
      out.exceeded = true;
      return out;
    }
    double v = lower_fixed_point(c);
    for (std::size_t z = prefix; z-- > x;) {
      if (v >= 1.0) {
        out.value = inf;
        out.exceeded = true;
        return out;
      }
      v = s * a.value_at(z) / (1.0 - v);
    }
    out.value = v;
    out.exceeded = v > 1.0;
    return out;
  }

  if (x >= prefix) {
    throw Error(ErrorCode::OutOfDomain, "h_limit start beyond NoTail prefix", x);
  }
  const std::size_t last = std::min(prefix - 1, x + std::max<std::size_t>(depth, 1) - 1);
  out.truncation_depth = last;
  try {
    const double full = h_finite(a, s, x, last);
    const double half = h_finite(a, s, x, x + (last - x) / 2);
    out.value = full;
    out.exceeded = full > 1.0 || half > 1.0;
    out.converged = std::abs(full - half) < tol;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::SingularContinuant) throw;
    out.value = inf;
    out.exceeded = true;
  }
  return out;
}

}  // namespace rpos
