#include "rpos/gibbs.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <limits>

#include "rpos/error.hpp"

namespace rpos {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_add(double x, double y) {
  if (x == kNegInf) return y;
  if (y == kNegInf) return x;
  const double hi = std::max(x, y);
  return hi + std::log1p(std::exp(std::min(x, y) - hi));
}

void check_window(const Window& win) {
  if (win.j < win.i) throw Error(ErrorCode::InvalidArgument, "window needs j >= i");
  if (win.left < 0 || win.right < 0) {
    throw Error(ErrorCode::Validation, "boundary heights must be nonnegative");
  }
  if (!win.nonempty()) {
    throw Error(ErrorCode::EmptyEnsemble, "no path joins the boundary heights");
  }
}

// Highest height any admissible path reaches: climbing to h and coming back
// down costs (h - left) + (h - right) steps.
int reach(const Window& win) {
  return (win.left + win.right + static_cast<int>(win.steps())) / 2;
}

// Visits every admissible path w[i-1, j+1] in lexicographic order (down
// before up). The mask has bit t set when step t rises.
void for_each_path(const Window& win,
                   const std::function<void(const std::vector<int>&, std::uint32_t)>& visit) {
  const int n = static_cast<int>(win.steps());
  std::vector<int> path(static_cast<std::size_t>(n) + 1);
  path[0] = win.left;
  std::function<void(int, std::uint32_t)> dfs = [&](int t, std::uint32_t mask) {
    if (t == n) {
      visit(path, mask);
      return;
    }
    const int h = path[static_cast<std::size_t>(t)];
    for (int d : {-1, 1}) {
      const int next = h + d;
      if (next < 0 || std::abs(next - win.right) > n - t - 1) continue;
      path[static_cast<std::size_t>(t) + 1] = next;
      dfs(t + 1, d > 0 ? mask | (std::uint32_t{1} << t) : mask);
    }
  };
  dfs(0, 0);
}

}  // namespace

TrajectoryBlock::TrajectoryBlock(std::int64_t start, std::vector<int> heights)
    : start_(start), heights_(std::move(heights)) {
  if (heights_.empty()) throw Error(ErrorCode::Validation, "empty trajectory block");
  for (std::size_t t = 0; t < heights_.size(); ++t) {
    if (heights_[t] < 0) throw Error(ErrorCode::Validation, "negative height", t);
    if (t > 0 && std::abs(heights_[t] - heights_[t - 1]) != 1) {
      throw Error(ErrorCode::Validation, "heights must move by one per step", t);
    }
  }
}

int Window::height_cap() const noexcept {
  return std::max(left, right) + static_cast<int>(steps());
}

bool Window::nonempty() const noexcept {
  if (j < i || left < 0 || right < 0) return false;
  const int n = static_cast<int>(steps());
  const int d = std::abs(left - right);
  return d <= n && (n - d) % 2 == 0;
}

std::map<int, std::size_t> visit_counts(const TrajectoryBlock& block) {
  std::map<int, std::size_t> out;
  for (int h : block.heights()) ++out[h];
  return out;
}

std::map<std::pair<int, int>, std::size_t> edge_counts(const TrajectoryBlock& block) {
  std::map<std::pair<int, int>, std::size_t> out;
  const auto& h = block.heights();
  for (std::size_t t = 0; t + 1 < h.size(); ++t) ++out[{h[t], h[t + 1]}];
  return out;
}

double hamiltonian_sites(const RealSequence& alpha, std::span<const int> heights) {
  double sum = 0.0;
  for (int h : heights) sum += alpha.value_at(static_cast<std::size_t>(h));
  return sum;
}

double hamiltonian_sites(const RealSequence& alpha, const TrajectoryBlock& block) {
  return hamiltonian_sites(alpha, std::span<const int>(block.heights()));
}

double hamiltonian_edges(const RealSequence& b, const RealSequence& c, std::span<const int> heights) {
  double sum = 0.0;
  for (std::size_t t = 0; t + 1 < heights.size(); ++t) {
    const int x = heights[t];
    const int y = heights[t + 1];
    sum += y > x ? b.value_at(static_cast<std::size_t>(x)) : c.value_at(static_cast<std::size_t>(y));
  }
  return sum;
}

double hamiltonian_edges(const RealSequence& b, const RealSequence& c,
                         const TrajectoryBlock& block) {
  return hamiltonian_edges(b, c, std::span<const int>(block.heights()));
}

double hamiltonian(const HamiltonianSpec& H, std::span<const int> path) {
  if (const auto* s = std::get_if<SiteRewards>(&H)) {
    return hamiltonian_sites(s->alpha, path.subspan(1));
  }
  const auto& e = std::get<EdgeRewards>(H);
  return hamiltonian_edges(e.b, e.c, path);
}

FiniteVolumeMeasure::FiniteVolumeMeasure(HamiltonianSpec H, Window win)
    : H_(std::move(H)), win_(win) {
  check_window(win_);
  // Tighter than max(left, right) + steps and equally exact.
  cap_ = reach(win_);
  const auto top = static_cast<std::size_t>(cap_);
  log_up_.resize(top);
  log_down_.resize(top);
  for (std::size_t x = 0; x < top; ++x) {
    if (const auto* s = std::get_if<SiteRewards>(&H_)) {
      log_up_[x] = s->alpha.value_at(x + 1);
      log_down_[x] = s->alpha.value_at(x);
    } else {
      const auto& e = std::get<EdgeRewards>(H_);
      log_up_[x] = e.b.value_at(x);
      log_down_[x] = e.c.value_at(x);
    }
  }

  const std::size_t n = win_.steps();
  fwd_.assign(n + 1, std::vector<double>(top + 1, kNegInf));
  bwd_.assign(n + 1, std::vector<double>(top + 1, kNegInf));
  fwd_[0][static_cast<std::size_t>(win_.left)] = 0.0;
  bwd_[0][static_cast<std::size_t>(win_.right)] = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    const auto& f = fwd_[t];
    const auto& g = bwd_[t];
    auto& f1 = fwd_[t + 1];
    auto& g1 = bwd_[t + 1];
    for (std::size_t y = 0; y <= top; ++y) {
      double acc = kNegInf;
      if (y > 0) acc = log_add(acc, f[y - 1] + log_up_[y - 1]);
      if (y < top) acc = log_add(acc, f[y + 1] + log_down_[y]);
      f1[y] = acc;

      double back = kNegInf;
      if (y < top) back = log_add(back, log_up_[y] + g[y + 1]);
      if (y > 0) back = log_add(back, log_down_[y - 1] + g[y - 1]);
      g1[y] = back;
    }
  }
  log_z_ = fwd_[n][static_cast<std::size_t>(win_.right)];
  if (log_z_ == kNegInf || std::isnan(log_z_)) {
    throw Error(ErrorCode::EmptyEnsemble, "partition function vanishes");
  }
}

double FiniteVolumeMeasure::log_m(int x, int y) const {
  if (x < 0 || y < 0 || x > cap_ || y > cap_) return kNegInf;
  if (y == x + 1) return log_up_[static_cast<std::size_t>(x)];
  if (y + 1 == x) return log_down_[static_cast<std::size_t>(y)];
  return kNegInf;
}

void FiniteVolumeMeasure::check_block(std::int64_t k, std::int64_t l) const {
  if (!(win_.i < k && k <= l && l < win_.j)) {
    throw Error(ErrorCode::IndexOutOfWindow, "block must satisfy i < k <= l < j");
  }
}

double FiniteVolumeMeasure::log_probability(const TrajectoryBlock& sigma) const {
  check_block(sigma.start(), sigma.end());
  const auto& h = sigma.heights();
  if (*std::max_element(h.begin(), h.end()) > cap_) return kNegInf;
  double lp = fwd_[static_cast<std::size_t>(sigma.start() - win_.i + 1)][static_cast<std::size_t>(h.front())];
  for (std::size_t t = 0; t + 1 < h.size(); ++t) lp += log_m(h[t], h[t + 1]);
  lp += bwd_[static_cast<std::size_t>(win_.j + 1 - sigma.end())][static_cast<std::size_t>(h.back())];
  return lp - log_z_;
}

double FiniteVolumeMeasure::probability(const TrajectoryBlock& sigma) const {
  return std::exp(log_probability(sigma));
}

std::vector<double> FiniteVolumeMeasure::site_marginal(std::int64_t t) const {
  if (t < win_.i || t > win_.j) throw Error(ErrorCode::IndexOutOfWindow, "site outside window");
  const auto& f = fwd_[static_cast<std::size_t>(t - win_.i + 1)];
  const auto& g = bwd_[static_cast<std::size_t>(win_.j + 1 - t)];
  std::vector<double> p(f.size());
  for (std::size_t x = 0; x < p.size(); ++x) p[x] = std::exp(f[x] + g[x] - log_z_);
  return p;
}

BlockDistribution FiniteVolumeMeasure::block_distribution(std::int64_t k, std::int64_t l) const {
  check_block(k, l);
  BlockDistribution out;
  const auto len = static_cast<std::size_t>(l - k + 1);
  const auto& f = fwd_[static_cast<std::size_t>(k - win_.i + 1)];
  const auto& g = bwd_[static_cast<std::size_t>(win_.j + 1 - l)];
  std::vector<int> sigma(len);
  std::function<void(std::size_t, double)> dfs = [&](std::size_t t, double lp) {
    if (t + 1 == len) {
      const double total = lp + g[static_cast<std::size_t>(sigma[t])];
      if (total != kNegInf) out.emplace(sigma, std::exp(total - log_z_));
      return;
    }
    for (int d : {-1, 1}) {
      const int y = sigma[t] + d;
      const double w = log_m(sigma[t], y);
      if (w == kNegInf) continue;
      sigma[t + 1] = y;
      dfs(t + 1, lp + w);
    }
  };
  for (int x = 0; x <= cap_; ++x) {
    if (f[static_cast<std::size_t>(x)] == kNegInf) continue;
    sigma[0] = x;
    dfs(0, f[static_cast<std::size_t>(x)]);
  }
  return out;
}

double finite_volume_prob(const HamiltonianSpec& H, const Window& win, const TrajectoryBlock& sigma) {
  return FiniteVolumeMeasure(H, win).probability(sigma);
}

std::vector<int> EnumeratedMeasure::interior(std::size_t n) const {
  const std::uint32_t mask = up_mask_.at(n);
  std::vector<int> h(win_.width());
  int cur = win_.left;
  for (std::size_t t = 0; t < h.size(); ++t) {
    cur += (mask >> t) & 1u ? 1 : -1;
    h[t] = cur;
  }
  return h;
}

BlockDistribution EnumeratedMeasure::block_distribution(std::int64_t k, std::int64_t l) const {
  if (!(win_.i <= k && k <= l && l <= win_.j)) {
    throw Error(ErrorCode::IndexOutOfWindow, "block outside window");
  }
  BlockDistribution out;
  const auto first = static_cast<std::ptrdiff_t>(k - win_.i);
  const auto last = static_cast<std::ptrdiff_t>(l - win_.i) + 1;
  for (std::size_t n = 0; n < size(); ++n) {
    const std::vector<int> h = interior(n);
    out[std::vector<int>(h.begin() + first, h.begin() + last)] += prob_[n];
  }
  return out;
}

EnumeratedMeasure enumerate_measure(const HamiltonianSpec& H, const Window& win) {
  if (win.j >= win.i && win.steps() > kMaxEnumerationSteps) {
    throw Error(ErrorCode::WindowTooLarge,
                "enumeration limited to " + std::to_string(kMaxEnumerationSteps) + " steps");
  }
  check_window(win);
  EnumeratedMeasure out;
  out.win_ = win;
  std::vector<double> logw;
  for_each_path(win, [&](const std::vector<int>& path, std::uint32_t mask) {
    out.up_mask_.push_back(mask);
    logw.push_back(hamiltonian(H, path));
  });
  const double top = *std::max_element(logw.begin(), logw.end());
  double total = 0.0;
  for (double w : logw) total += std::exp(w - top);
  out.prob_.resize(logw.size());
  for (std::size_t n = 0; n < logw.size(); ++n) out.prob_[n] = std::exp(logw[n] - top) / total;
  return out;
}

double verify_site_edge_equivalence(const RealSequence& alpha, const RealSequence& b,
                                    const RealSequence& c, const Window& win, std::int64_t k,
                                    std::int64_t l) {
  check_window(win);
  const int top = reach(win);
  for (int x = 0; x < top; ++x) {
    const auto ux = static_cast<std::size_t>(x);
    const double diff = alpha.value_at(ux) + alpha.value_at(ux + 1) - b.value_at(ux) - c.value_at(ux);
    if (std::abs(diff) > 1e-12) {
      throw Error(ErrorCode::RelationViolated, "alpha_x + alpha_{x+1} != b_x + c_x", ux);
    }
  }
  const FiniteVolumeMeasure site(SiteRewards{alpha}, win);
  const FiniteVolumeMeasure edge(EdgeRewards{b, c}, win);
  const BlockDistribution ps = site.block_distribution(k, l);
  const BlockDistribution pe = edge.block_distribution(k, l);
  double worst = 0.0;
  for (const auto& [sigma, p] : ps) {
    auto it = pe.find(sigma);
    worst = std::max(worst, std::abs(p - (it == pe.end() ? 0.0 : it->second)));
  }
  for (const auto& [sigma, p] : pe) {
    if (!ps.contains(sigma)) worst = std::max(worst, p);
  }
  return worst;
}

double boundary_offset_spread(const RealSequence& alpha, const RealSequence& b,
                              const RealSequence& c, const Window& win) {
  if (win.j >= win.i && win.steps() > kMaxEnumerationSteps) {
    throw Error(ErrorCode::WindowTooLarge,
                "enumeration limited to " + std::to_string(kMaxEnumerationSteps) + " steps");
  }
  check_window(win);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for_each_path(win, [&](const std::vector<int>& path, std::uint32_t) {
    const std::span<const int> w(path);
    const double offset = hamiltonian_edges(b, c, w) - hamiltonian_sites(alpha, w.subspan(1));
    lo = std::min(lo, offset);
    hi = std::max(hi, offset);
  });
  return hi - lo;
}

void write_distribution_csv(std::ostream& os, const BlockDistribution& dist) {
  const auto old_precision = os.precision(17);
  os << "block,probability\n";
  for (const auto& [sigma, p] : dist) {
    os << '"';
    for (std::size_t t = 0; t < sigma.size(); ++t) os << (t ? "," : "") << sigma[t];
    os << "\"," << p << '\n';
  }
  os.precision(old_precision);
}

}  // namespace rpos
