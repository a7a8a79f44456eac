#include "rpos/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <thread>
#include <json.hpp>

#include "rpos/chain.hpp"
#include "rpos/error.hpp"
#include "rpos/gibbs.hpp"
#include "rpos/model_io.hpp"
#include "rpos/radius.hpp"
#include "rpos/verify.hpp"

namespace rpos {

namespace {

using nlohmann::json;
using ordered = nlohmann::ordered_json;

constexpr const char* kCommands[] = {"analyze", "radius", "chain", "gibbs", "verify"};

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonPositiveEntry:
    case ErrorCode::OutOfDomain:
    case ErrorCode::ShiftBeyondDomain:
    case ErrorCode::EmptyEnsemble:
    case ErrorCode::IndexOutOfWindow:
    case ErrorCode::WindowTooLarge:
    case ErrorCode::RelationViolated:
    case ErrorCode::InvalidArgument:
    case ErrorCode::Validation:
      return kExitValidation;
    default:
      return kExitNumeric;
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Validation, "cannot open model file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Model parse_model_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::Validation, std::string("malformed JSON: ") + e.what());
  }
  return parse_model(j);
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Validation, "cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw Error(ErrorCode::Validation, "write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorCode::Validation, "cannot move report into " + path.string());
  }
}

std::filesystem::path side_file(const std::string& output_path, const char* suffix) {
  std::filesystem::path p(output_path);
  p.replace_extension(suffix);
  return p;
}

double finite_or_nan(double v) { return std::isfinite(v) ? v : std::nan(""); }

ordered h_json(const HLimit& h) {
  ordered j;
  j["value"] = finite_or_nan(h.value);
  j["exceeded"] = h.exceeded;
  j["converged"] = h.converged;
  j["truncation_depth"] = h.truncation_depth;
  return j;
}

ordered ladder_json(const GapReport& rep) {
  ordered arr = ordered::array();
  for (const SStar& s : rep.ladder) {
    arr.push_back({{"m", s.m}, {"s_star", s.value}, {"certificate", to_string(s.certificate)}});
  }
  return arr;
}

ordered classification_json(const Classification& c) {
  ordered j;
  j["verdict"] = to_string(c.verdict);
  if (c.verdict == Verdict::Undetermined) j["reason"] = c.reason;
  j["gap_index"] = c.gap_index ? ordered(*c.gap_index) : ordered(nullptr);
  j["xi"] = c.xi ? ordered(*c.xi) : ordered(nullptr);
  j["gibbs_label"] = to_string(c.gibbs_label);
  j["h_at_critical"] = c.h_at_critical ? h_json(*c.h_at_critical) : ordered(nullptr);
  if (c.report) {
    j["ladder"] = ladder_json(*c.report);
    if (c.report->theta_bounds) {
      j["theta_bounds"] = {{"inverse_xi", c.report->theta_bounds->first},
                           {"inverse_sqrt_xi", c.report->theta_bounds->second}};
    }
  }
  return j;
}

struct Outcome {
  ordered body;
  int code = kExitOk;
};

Outcome cmd_analyze(const RunConfig& cfg, const Model& model) {
  const Classification c = classify(model.matrix, cfg.m_max, cfg.tol, cfg.depth);
  return {classification_json(c), c.verdict == Verdict::Undetermined ? kExitUndetermined : kExitOk};
}

Outcome cmd_radius(const RunConfig& cfg, const Model& model) {
  const NearestNeighborMatrix& mat = model.matrix;
  const PositiveSequence a = mat.products();
  const GapReport rep = gap_scan(a, cfg.m_max, cfg.tol, cfg.depth);
  ordered j;
  j["ladder"] = ladder_json(rep);
  const double s0 = rep.ladder.front().value;
  j["inverse_radius"] = 1.0 / std::sqrt(s0);

  std::size_t limit = 1600;
  if (auto n = a.domain_size()) limit = std::min(limit, *n - 1);
  ordered oracle = ordered::array();
  for (std::size_t L : {100, 400, 1600}) {
    if (L > limit) break;
    const OracleResult o = truncated_radius_oracle(mat, L);
    oracle.push_back({{"L", o.L}, {"lambda", o.lambda}, {"iterations", o.iterations}});
  }
  j["truncated_perron"] = oracle;

  const std::size_t n_max = std::min<std::size_t>(500, std::max<std::size_t>(limit / 2, 1));
  const std::vector<double> roots = diagonal_power_series(mat, n_max);
  bool monotone = true;
  for (std::size_t i = 1; i < roots.size(); ++i) monotone = monotone && roots[i] >= roots[i - 1];
  j["diagonal_series"] = {{"n_max", n_max}, {"final", roots.back()}, {"monotone", monotone}};
  return {j, kExitOk};
}

Outcome cmd_chain(const RunConfig& cfg, const Model& model) {
  const NearestNeighborMatrix& mat = model.matrix;
  const Classification c = classify(mat, cfg.m_max, cfg.tol, cfg.depth);
  if (c.verdict == Verdict::Undetermined) {
    return {classification_json(c), kExitUndetermined};
  }
  const std::size_t m = c.gap_index.value_or(0);
  const std::size_t x = m + 1;
  const BirthDeathChain chain = build_critical_chain(mat, m, cfg.depth, cfg.tol);
  const ReturnTimeDistribution pmf = return_time_pmf(chain, x, cfg.k_max);

  ordered j;
  j["verdict"] = to_string(c.verdict);
  j["base"] = m;
  j["r"] = chain.r();
  j["minimal_orbit"] = chain.minimal_orbit();
  j["state"] = x;
  j["k_max"] = cfg.k_max;
  j["mass_accounted"] = pmf.mass_accounted;

  const TailFit fit = fit_tail(pmf);
  j["tail_fit"] = {{"rate", fit.rate},
                   {"log_slope_stderr", fit.log_slope_stderr},
                   {"points", fit.points},
                   {"critical_theta", 1.0 / std::sqrt(fit.rate)}};
  ordered moments = ordered::array();
  for (double theta : SimulationOptions{}.theta_grid) {
    const MomentEstimate e = exp_moment(pmf, theta);
    moments.push_back({{"theta", theta},
                       {"truncated_sum", finite_or_nan(e.truncated_sum)},
                       {"verdict", to_string(e.verdict)}});
  }
  j["moments"] = moments;

  const ReturnTimeDistribution base_pmf = return_time_pmf(chain, m, cfg.k_max);
  const MeanReturnTime mrt = mean_return_time(base_pmf);
  j["mean_return_time_base"] = {{"mean", mrt.mean},
                                {"remainder_bound", finite_or_nan(mrt.remainder_bound)}};
  try {
    const StationaryDistribution pi = stationary_distribution(chain, cfg.tol);
    j["stationary"] = {{"pi_base", pi.at(m)}, {"tail_ratio", pi.tail_ratio}};
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NotPositiveRecurrent) throw;
    j["stationary"] = nullptr;
  }

  if (c.gap_index) {
    const BirthDeathChain chain1 = build_critical_chain(mat, m + 1, cfg.depth, cfg.tol);
    const ReturnTimeDistribution pmf1 = return_time_pmf(chain1, x, cfg.k_max);
    const auto res = verify_scaling(pmf, pmf1, *c.xi, 1, cfg.k_max);
    double worst = 0.0;
    for (const auto& r : res) worst = std::max(worst, r.residual);
    j["scaling"] = {{"xi", *c.xi},
                    {"k1_residual", res.front().residual},
                    {"max_residual", worst}};
    const std::size_t x_max = std::min<std::size_t>(m + 1000, m + chain.depth() - 1);
    j["excursion_identity_max"] = verify_excursion_identity(chain, chain1, x_max);
  }

  if (cfg.mc_returns > 0) {
    SimulationOptions so;
    so.replicas = 8;
    so.threads = cfg.threads;
    const SimulationReport sim = simulate(chain, m, ReturnsTo{m, cfg.mc_returns, 1'000'000},
                                          cfg.seed, so);
    ordered tm = ordered::array();
    for (const auto& [theta, v] : sim.theta_moments) tm.push_back({{"theta", theta}, {"mean", v}});
    j["monte_carlo"] = {{"seed", sim.seed},     {"replicas", sim.replicas},
                        {"returns", sim.returns}, {"censored", sim.censored},
                        {"mean", sim.mean},       {"std_error", sim.std_error},
                        {"theta_moments", tm}};
  }

  if (!cfg.output_path.empty()) {
    std::ostringstream csv;
    csv << std::setprecision(17) << "tau,p,log_p\n";
    for (std::size_t k = 1; k <= pmf.k_max(); ++k) {
      csv << 2 * k << ',' << pmf.p(k) << ',' << pmf.log_pmf[k - 1] << '\n';
    }
    const auto path = side_file(cfg.output_path, ".pmf.csv");
    write_atomic(path, csv.str());
    j["pmf_csv"] = path.filename().string();
  }
  return {j, kExitOk};
}

// b_x = alpha_x + alpha_{x+1}, c = 0 satisfies the site/edge relation.
EdgeRewards edges_from_alpha(const RealSequence& alpha) {
  std::vector<double> b;
  const auto& p = alpha.prefix();
  for (std::size_t x = 0; x + 1 < p.size(); ++x) b.push_back(p[x] + p[x + 1]);
  Tail tail = NoTail{};
  if (auto t = alpha.tail_value()) {
    if (!p.empty()) b.push_back(p.back() + *t);
    tail = ConstantTail{2.0 * *t};
  }
  return {RealSequence(std::move(b), tail), RealSequence::constant(0.0)};
}

Outcome cmd_gibbs(const RunConfig& cfg, const Model& model) {
  const HamiltonianSpec H =
      model.hamiltonian ? *model.hamiltonian
                        : HamiltonianSpec(EdgeRewards{model.matrix.log_up_sequence(),
                                                      model.matrix.log_down_sequence()});
  const Window win{cfg.window_i, cfg.window_j, cfg.left, cfg.right};
  const std::int64_t centre = win.i + (win.j - win.i) / 2;
  const std::int64_t k = cfg.block_k.value_or(centre);
  const std::int64_t l = cfg.block_l.value_or(k);

  const FiniteVolumeMeasure mu(H, win);
  const BlockDistribution dist = mu.block_distribution(k, l);
  double total = 0.0;
  for (const auto& [sigma, p] : dist) total += p;

  ordered j;
  j["hamiltonian"] = std::holds_alternative<SiteRewards>(H) ? "site" : "edge";
  j["window"] = {{"i", win.i}, {"j", win.j}, {"left", win.left}, {"right", win.right}};
  j["block"] = {{"k", k}, {"l", l}};
  j["log_partition"] = mu.log_partition();
  j["blocks"] = dist.size();
  j["normalization_error"] = std::abs(total - 1.0);
  const std::vector<double> marg = mu.site_marginal(centre);
  j["centre_marginal"] = marg;

  const bool small = win.steps() <= kMaxEnumerationSteps;
  if (small) {
    const EnumeratedMeasure en = enumerate_measure(H, win);
    const BlockDistribution other = en.block_distribution(k, l);
    double worst = 0.0;
    for (const auto& [sigma, p] : dist) {
      auto it = other.find(sigma);
      worst = std::max(worst, std::abs(p - (it == other.end() ? 0.0 : it->second)));
    }
    j["enumeration_max_diff"] = worst;
  }

  const int reach = (win.left + win.right + static_cast<int>(win.steps())) / 2;
  RealSequence alpha;
  EdgeRewards edges;
  if (const auto* s = std::get_if<SiteRewards>(&H)) {
    alpha = s->alpha;
    edges = edges_from_alpha(alpha);
  } else {
    edges = std::get<EdgeRewards>(H);
    alpha = alpha_from_bc(edges.b, edges.c, 0.0, static_cast<std::size_t>(std::max(reach, 1)));
  }
  j["site_edge_max_diff"] = verify_site_edge_equivalence(alpha, edges.b, edges.c, win, k, l);
  if (small) j["boundary_offset_spread"] = boundary_offset_spread(alpha, edges.b, edges.c, win);

  if (!cfg.output_path.empty()) {
    std::ostringstream csv;
    write_distribution_csv(csv, dist);
    const auto path = side_file(cfg.output_path, ".dist.csv");
    write_atomic(path, csv.str());
    j["distribution_csv"] = path.filename().string();
  }
  return {j, kExitOk};
}

Outcome cmd_verify(const RunConfig& cfg, const Model& model) {
  VerifyOptions o;
  o.tol = cfg.tol;
  o.m_max = cfg.m_max;
  o.depth = cfg.depth;
  o.k_max = cfg.k_max;
  o.seed = cfg.seed;
  o.threads = cfg.threads;
  o.gibbs_instances = cfg.gibbs_instances;
  o.mc_returns = cfg.verify_mc_returns;
  const VerifyReport rep = run_property_suite(model, o);
  ordered checks = ordered::array();
  for (const CheckResult& c : rep.checks) {
    ordered e{{"name", c.name},
              {"pass", c.pass},
              {"value", finite_or_nan(c.value)},
              {"tolerance", c.tolerance}};
    if (!c.detail.empty()) e["detail"] = c.detail;
    checks.push_back(e);
  }
  ordered j;
  j["all_passed"] = rep.all_passed();
  j["checks"] = checks;
  return {j, rep.all_passed() ? kExitOk : kExitNumeric};
}

ordered config_json(const RunConfig& cfg) {
  ordered j;
  j["command"] = cfg.command;
  j["model"] = std::filesystem::path(cfg.model_path).filename().string();
  j["tol"] = cfg.tol;
  j["m_max"] = cfg.m_max;
  j["depth"] = cfg.depth;
  j["k_max"] = cfg.k_max;
  j["seed"] = cfg.seed;
  return j;
}

}  // namespace

void validate(const RunConfig& c) {
  if (std::find(std::begin(kCommands), std::end(kCommands), c.command) == std::end(kCommands)) {
    throw Error(ErrorCode::Validation, "unknown command \"" + c.command + "\"");
  }
  if (c.model_path.empty()) throw Error(ErrorCode::Validation, "--model is required");
  if (!(c.tol > 0.0) || !std::isfinite(c.tol)) {
    throw Error(ErrorCode::Validation, "--tol must be positive");
  }
  if (c.m_max < 1 || c.depth < 1 || c.k_max < 1) {
    throw Error(ErrorCode::Validation, "--m-max, --depth and --k-max must be positive");
  }
  if (c.command == "chain" && c.k_max < 9) {
    throw Error(ErrorCode::Validation, "chain needs --k-max >= 9 for the tail fit");
  }
  if (c.window_j < c.window_i || c.left < 0 || c.right < 0) {
    throw Error(ErrorCode::Validation, "window needs j >= i and nonnegative boundaries");
  }
}

std::string config_hash(const RunConfig& c, const std::string& model_bytes) {
  std::ostringstream key;
  key << std::setprecision(17) << c.command << '\n'
      << c.tol << '\n'
      << c.m_max << '\n'
      << c.depth << '\n'
      << c.k_max << '\n'
      << c.seed << '\n'
      << c.window_i << ' ' << c.window_j << ' ' << c.left << ' ' << c.right << '\n'
      << (c.block_k ? std::to_string(*c.block_k) : "-") << ' '
      << (c.block_l ? std::to_string(*c.block_l) : "-") << '\n'
      << c.mc_returns << ' ' << c.gibbs_instances << ' ' << c.verify_mc_returns << '\n'
      << model_bytes;
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : key.str()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream hex;
  hex << std::hex << std::setw(16) << std::setfill('0') << h;
  return hex.str();
}

int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    validate(cfg);
    const std::string bytes = read_file(cfg.model_path);
    const Model model = parse_model_text(bytes);

    Outcome o;
    if (cfg.command == "analyze") {
      o = cmd_analyze(cfg, model);
    } else if (cfg.command == "radius") {
      o = cmd_radius(cfg, model);
    } else if (cfg.command == "chain") {
      o = cmd_chain(cfg, model);
    } else if (cfg.command == "gibbs") {
      o = cmd_gibbs(cfg, model);
    } else {
      o = cmd_verify(cfg, model);
    }

    ordered report;
    report["tool"] = kToolName;
    report["version"] = kToolVersion;
    report["config_hash"] = config_hash(cfg, bytes);
    report["config"] = config_json(cfg);
    report["result"] = std::move(o.body);
    const std::string text = report.dump(2) + "\n";
    if (cfg.output_path.empty()) {
      out << text;
    } else {
      write_atomic(cfg.output_path, text);
    }
    return o.code;
  } catch (const Error& e) {
    err << "rpos: " << to_string(e.code()) << ": " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "rpos: internal error: " << e.what() << '\n';
    return kExitNumeric;
  }
}

int cli_main(int argc, char** argv) {
  RunConfig cfg;
  CLI::App app{"R-positivity, h-transformed chains and transfer-matrix Gibbs measures"};
  app.set_version_flag("--version", kToolVersion);
  app.add_option("command", cfg.command, "analyze | radius | chain | gibbs | verify")
      ->required()
      ->check(CLI::IsMember({"analyze", "radius", "chain", "gibbs", "verify"}));
  app.add_option("--model", cfg.model_path, "model JSON file")->required();
  app.add_option("--tol", cfg.tol, "absolute tolerance for s*");
  app.add_option("--m-max", cfg.m_max, "largest shift in the gap ladder");
  app.add_option("--depth", cfg.depth, "orbit depth for allowedness and chains");
  app.add_option("--k-max", cfg.k_max, "return-time law computed up to tau = 2 k_max");
  app.add_option("--seed", cfg.seed, "random seed");
  app.add_option("--out", cfg.output_path, "report path (stdout when omitted)");
  app.add_option("--window-i", cfg.window_i, "gibbs: first interior index");
  app.add_option("--window-j", cfg.window_j, "gibbs: last interior index");
  app.add_option("--left", cfg.left, "gibbs: boundary height w_{i-1}");
  app.add_option("--right", cfg.right, "gibbs: boundary height w_{j+1}");
  app.add_option("--block-k", cfg.block_k, "gibbs: first index of the queried block");
  app.add_option("--block-l", cfg.block_l, "gibbs: last index of the queried block");
  app.add_option("--mc-returns", cfg.mc_returns, "chain: Monte Carlo returns to the base");
  app.add_option("--gibbs-instances", cfg.gibbs_instances, "verify: random Gibbs instances");
  app.add_option("--verify-mc-returns", cfg.verify_mc_returns, "verify: Monte Carlo returns");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  cfg.threads = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("RPOS_THREADS")) {
    char* end = nullptr;
    const unsigned long v = std::strtoul(env, &end, 10);
    if (end == env || *end != '\0' || v == 0) {
      std::cerr << "rpos: RPOS_THREADS must be a positive integer\n";
      return kExitValidation;
    }
    cfg.threads = v;
  }
  return run(cfg, std::cout, std::cerr);
}

}  // namespace rpos
