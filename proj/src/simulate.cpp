#include <algorithm>
#include <cmath>
#include <exception>
#include <random>
#include <thread>

#include "rpos/chain.hpp"
#include "rpos/error.hpp"

namespace rpos {

namespace {

// 53 random bits; independent of the standard library's distributions,
// whose output is implementation defined.
double uniform01(std::mt19937_64& eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

struct ReplicaResult {
  std::map<std::size_t, std::uint64_t> visits;
  std::map<std::uint64_t, std::uint64_t> returns;
  std::uint64_t censored = 0;
  std::uint64_t steps = 0;
};

class Walker {
 public:
  Walker(const BirthDeathChain& chain, std::size_t start, std::uint64_t seed)
      : chain_(chain), state_(start), eng_(seed) {}

  std::size_t state() const noexcept { return state_; }
  void place(std::size_t x) noexcept { state_ = x; }

  void step() {
    if (uniform01(eng_) < chain_.up_prob(state_)) {
      ++state_;
    } else {
      --state_;
    }
  }

 private:
  const BirthDeathChain& chain_;
  std::size_t state_;
  std::mt19937_64 eng_;
};

std::uint64_t share(std::uint64_t total, std::size_t replicas, std::size_t r) {
  const std::uint64_t q = total / replicas;
  return q + (r < total % replicas ? 1 : 0);
}

ReplicaResult run_replica(const BirthDeathChain& chain, std::size_t x0, const SimulationMode& mode,
                          std::uint64_t seed, std::size_t replicas, std::size_t r) {
  ReplicaResult out;
  Walker w(chain, x0, seed ^ static_cast<std::uint64_t>(r));

  if (const auto* s = std::get_if<Steps>(&mode)) {
    const std::uint64_t n = share(s->n, replicas, r);
    for (std::uint64_t i = 0; i < n; ++i) {
      ++out.visits[w.state()];
      w.step();
    }
    ++out.visits[w.state()];
    out.steps = n;
    return out;
  }

  const auto& rt = std::get<ReturnsTo>(mode);
  const std::uint64_t count = share(rt.count, replicas, r);
  // Reach the target first; an unreached target counts as one censoring.
  if (w.state() != rt.x) {
    std::uint64_t t = 0;
    while (w.state() != rt.x && t < rt.cap) {
      w.step();
      ++t;
    }
    out.steps += t;
    if (w.state() != rt.x) {
      ++out.censored;
      w.place(rt.x);
    }
  }
  for (std::uint64_t i = 0; i < count; ++i) {
    std::uint64_t t = 0;
    do {
      w.step();
      ++t;
    } while (w.state() != rt.x && t < rt.cap);
    out.steps += t;
    if (w.state() == rt.x) {
      ++out.returns[t];
    } else {
      ++out.censored;
      w.place(rt.x);
    }
  }
  return out;
}

}  // namespace

double SimulationReport::empirical_p(std::uint64_t tau) const {
  const std::uint64_t total = returns + censored;
  if (total == 0) return 0.0;
  auto it = return_time_counts.find(tau);
  return it == return_time_counts.end()
             ? 0.0
             : static_cast<double>(it->second) / static_cast<double>(total);
}

SimulationReport simulate(const BirthDeathChain& chain, std::size_t x0, const SimulationMode& mode,
                          std::uint64_t seed, const SimulationOptions& options) {
  if (x0 < chain.base()) throw Error(ErrorCode::InvalidArgument, "start below chain base", x0);
  if (const auto* rt = std::get_if<ReturnsTo>(&mode)) {
    if (rt->x < chain.base()) throw Error(ErrorCode::InvalidArgument, "target below chain base");
    if (rt->cap == 0) throw Error(ErrorCode::InvalidArgument, "cap must be positive");
  }
  const std::size_t replicas = std::max<std::size_t>(options.replicas, 1);
  const std::size_t threads = std::clamp<std::size_t>(options.threads, 1, replicas);

  std::vector<ReplicaResult> parts(replicas);
  std::vector<std::exception_ptr> errors(replicas);
  auto worker = [&](std::size_t first) {
    for (std::size_t r = first; r < replicas; r += threads) {
      try {
        parts[r] = run_replica(chain, x0, mode, seed, replicas, r);
      } catch (...) {
        errors[r] = std::current_exception();
      }
    }
  };
  if (threads == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker, t);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  SimulationReport rep;
  rep.seed = seed;
  rep.replicas = replicas;
  for (const ReplicaResult& p : parts) {
    rep.steps += p.steps;
    rep.censored += p.censored;
    for (const auto& [x, c] : p.visits) rep.visits[x] += c;
    for (const auto& [t, c] : p.returns) rep.return_time_counts[t] += c;
  }
  if (const auto* rt = std::get_if<ReturnsTo>(&mode)) {
    rep.returns_mode = true;
    rep.target = rt->x;
    rep.cap = rt->cap;
    double sum = 0.0, sum2 = 0.0;
    for (const auto& [t, c] : rep.return_time_counts) {
      rep.returns += c;
      sum += static_cast<double>(t) * static_cast<double>(c);
      sum2 += static_cast<double>(t) * static_cast<double>(t) * static_cast<double>(c);
    }
    if (rep.returns > 0) {
      const double n = static_cast<double>(rep.returns);
      rep.mean = sum / n;
      const double var = n > 1 ? (sum2 - n * rep.mean * rep.mean) / (n - 1) : 0.0;
      rep.std_error = std::sqrt(std::max(var, 0.0) / n);
    }
    for (double theta : options.theta_grid) {
      double acc = 0.0;
      for (const auto& [t, c] : rep.return_time_counts) {
        acc += std::pow(theta, static_cast<double>(t)) * static_cast<double>(c);
      }
      rep.theta_moments.emplace_back(
          theta, rep.returns > 0 ? acc / static_cast<double>(rep.returns) : 0.0);
    }
  }
  return rep;
}

}  // namespace rpos
