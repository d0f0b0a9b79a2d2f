#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <exception>
#include <fstream>
#include <iterator>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "CLI11.hpp"

#include "condense/adversaries.hpp"
#include "condense/condensers.hpp"
#include "condense/covering.hpp"
#include "condense/dist.hpp"
#include "condense/sources.hpp"

namespace condense::cli {

namespace {

using nlohmann::json;

std::uint64_t need_seed(const ExperimentConfig& cfg, const char* what) {
  if (!cfg.rng_seed) throw std::invalid_argument(std::string(what) + " is randomized and needs --rng-seed");
  return *cfg.rng_seed;
}

std::vector<std::uint8_t> read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

/// Functions from --fn-file (one or more concatenated tables) or --random.
std::vector<BlockFunctionTable> load_functions(const ExperimentConfig& cfg, unsigned n, unsigned ell, unsigned t) {
  std::vector<BlockFunctionTable> fs;
  if (!cfg.fn_file.empty()) {
    auto raw = read_bytes(cfg.fn_file);
    std::uint64_t one = bits::checked_pow2(n * ell, kMaxEnumBits, "function file") * ((t + 7) / 8);
    if (raw.empty() || raw.size() % one != 0)
      throw std::invalid_argument(cfg.fn_file + " holds " + std::to_string(raw.size()) +
                                  " bytes, not a positive multiple of " + std::to_string(one));
    for (std::size_t off = 0; off < raw.size(); off += one)
      fs.push_back(function_from_bytes(n, ell, t, std::span<const std::uint8_t>(raw.data() + off, one)));
  }
  if (cfg.random > 0) {
    std::mt19937_64 rng(need_seed(cfg, "--random"));
    for (unsigned i = 0; i < cfg.random; ++i) fs.push_back(BlockFunctionTable::random(n, ell, t, rng));
  }
  if (fs.empty()) throw std::invalid_argument("no functions: pass --fn-file or --random");
  return fs;
}

/// Runs job(i) for i < count on up to `workers` threads; results stay in index order.
template <class Job>
auto parallel_map(std::size_t count, unsigned workers, Job job) {
  using Out = decltype(job(std::size_t{0}));
  std::vector<std::optional<Out>> out(count);
  std::vector<std::exception_ptr> errors(count);
  auto body = [&](unsigned w, unsigned stride) {
    for (std::size_t i = w; i < count; i += stride) {
      try {
        out[i].emplace(job(i));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  unsigned threads = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(count)));
  if (threads == 1) {
    body(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w) pool.emplace_back(body, w, threads);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  std::vector<Out> done;
  done.reserve(count);
  for (auto& o : out) done.push_back(std::move(*o));
  return done;
}

json failing_names(const std::vector<Check>& checks) {
  json arr = json::array();
  for (auto& c : checks)
    if (!c.pass) arr.push_back(c.name);
  return arr;
}

std::string num(double v) {
  std::ostringstream s;
  s.precision(12);
  s << v;
  return s.str();
}

int exit_for(const std::vector<Check>& checks) { return all_pass(checks) ? kPass : kViolation; }

}  // namespace

json config_json(const ExperimentConfig& cfg) {
  json j = {{"command", cfg.command}, {"n", cfg.n},         {"ell", cfg.ell},   {"t", cfg.t},
            {"eps", cfg.eps},         {"profile", cfg.profile}, {"trials", cfg.trials},
            {"rng_seed", cfg.rng_seed ? json(*cfg.rng_seed) : json(nullptr)},
            {"fn_file", cfg.fn_file}, {"in", cfg.in_file},  {"random", cfg.random}, {"workers", cfg.workers}};
  if (cfg.command == "audit-condense") {
    j["construction"] = cfg.construction;
    j["good"] = cfg.good;
    j["scale"] = cfg.scale;
  } else if (cfg.command == "condense") {
    j["extractor"] = cfg.extractor;
    j["k"] = cfg.k;
    j["m_bits"] = cfg.m_bits;
    j["p"] = cfg.p;
    j["gamma"] = cfg.gamma;
    j["R"] = cfg.R;
    j["d"] = cfg.d;
    j["inner_key"] = cfg.inner_key;
  } else if (cfg.command == "cover") {
    j["c0"] = cfg.c0;
    j["c1"] = cfg.c1;
    j["c2"] = cfg.c2;
    j["delta"] = cfg.delta;
  } else if (cfg.command == "entropy") {
    j["k"] = cfg.entropy_k ? json(*cfg.entropy_k) : json(nullptr);
  }
  return j;
}

// ---------------------------------------------------------------------------

RunResult cmd_audit_extract23(const ExperimentConfig& cfg) {
  auto fs = load_functions(cfg, cfg.n, 3, 1);
  auto results = parallel_map(fs.size(), cfg.workers, [&](std::size_t i) {
    return build_shela23_extraction_adversary(fs[i]);
  });

  RunResult r;
  r.csv_header = {"index", "case", "bias", "bias_value", "verified"};
  json items = json::array();
  Rational min_bias = 1;
  std::map<std::string, unsigned> cases;
  unsigned unverified = 0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    auto& res = results[i];
    min_bias = std::min(min_bias, res.bias);
    ++cases[res.case_name];
    if (!res.verified()) ++unverified;
    json item = {{"index", i},
                 {"case", res.case_name},
                 {"bias", fraction_string(res.bias)},
                 {"bias_value", to_double(res.bias)},
                 {"verified", res.verified()},
                 {"failed_checks", failing_names(res.checks)}};
    if (cfg.detail) item["certificate"] = to_json(res);
    items.push_back(item);
    r.csv_rows.push_back({std::to_string(i), res.case_name, fraction_string(res.bias), num(to_double(res.bias)),
                          res.verified() ? "true" : "false"});
  }
  Rational floor = ExtractionConstants{}.floor_bias();
  std::vector<Check> checks = {
      {"extract23.certificates", "every emitted source recomputes to the claimed bias", unverified == 0,
       {{"unverified", unverified}, {"functions", results.size()}}},
      {"extract23.bias_floor", "|Pr[f(X) = 0] - 1/2| >= 2/25 for every f", min_bias >= floor,
       {{"min_bias", fraction_string(min_bias)}, {"floor", fraction_string(floor)}}}};
  r.report = {{"checks", to_json(checks)},
              {"summary", {{"functions", results.size()},
                           {"min_bias", fraction_string(min_bias)},
                           {"min_bias_value", to_double(min_bias)},
                           {"cases", cases}}},
              {"items", items}};
  r.exit_code = exit_for(checks);
  return r;
}

RunResult cmd_audit_condense(const ExperimentConfig& cfg) {
  const std::string& kind = cfg.construction;
  unsigned ell = cfg.ell;
  if (kind == "nosf23") {
    ell = 3;
  } else if (kind == "nosf-scaled") {
    ell = 3 * cfg.scale;
  } else if (kind != "one-ell" && kind != "shela-rate") {
    throw std::invalid_argument("unknown construction " + kind);
  }
  if (cfg.n * ell > kMaxEnumBits)
    throw std::length_error("refused: f has 2^" + std::to_string(cfg.n * ell) +
                            " inputs and every builder evaluates all of them; the limit is 2^" +
                            std::to_string(kMaxEnumBits));
  auto fs = load_functions(cfg, cfg.n, ell, cfg.t);
  auto certs = parallel_map(fs.size(), cfg.workers, [&](std::size_t i) {
    if (kind == "one-ell") return build_1l_adversary(fs[i], cfg.eps);
    if (kind == "nosf23") return build_nosf23_adversary(fs[i], cfg.eps);
    if (kind == "shela-rate") return build_shela_rate_adversary(fs[i], cfg.good, cfg.eps);
    return build_nosf_scaled_adversary(fs[i], cfg.scale, cfg.eps);
  });

  RunResult r;
  r.csv_header = {"index", "case", "smooth_bits", "claimed_bits", "delta", "hit_prob", "heavy_set_size", "verified"};
  json items = json::array();
  std::map<std::string, unsigned> cases;
  unsigned unverified = 0, over = 0;
  double worst_gap = -1e300;
  for (std::size_t i = 0; i < certs.size(); ++i) {
    auto& c = certs[i];
    ++cases[c.case_name];
    if (!c.verified()) ++unverified;
    if (c.smooth_bits > c.claimed_bits + kBoundSlack) ++over;
    worst_gap = std::max(worst_gap, c.smooth_bits - c.claimed_bits);
    json item = {{"index", i},
                 {"case", c.case_name},
                 {"smooth_bits", c.smooth_bits},
                 {"claimed_bits", c.claimed_bits},
                 {"delta", c.delta},
                 {"hit_prob", fraction_string(c.hit_prob)},
                 {"heavy_set_size", c.heavy_set.size()},
                 {"nosf_only", c.nosf_only},
                 {"verified", c.verified()},
                 {"failed_checks", failing_names(c.checks)}};
    if (cfg.detail) item["certificate"] = to_json(c);
    items.push_back(item);
    r.csv_rows.push_back({std::to_string(i), c.case_name, num(c.smooth_bits), num(c.claimed_bits), num(c.delta),
                          fraction_string(c.hit_prob), std::to_string(c.heavy_set.size()),
                          c.verified() ? "true" : "false"});
  }
  std::vector<Check> checks = {
      {"condense.certificates", "every certificate's checks hold on the recomputed output", unverified == 0,
       {{"unverified", unverified}, {"functions", certs.size()}}},
      {"condense.rate_bound", "smooth min-entropy of f(X) <= claimed rate + delta for every f", over == 0,
       {{"over", over}, {"worst_gap_bits", worst_gap}}}};
  r.report = {{"checks", to_json(checks)},
              {"summary", {{"functions", certs.size()}, {"construction", kind}, {"cases", cases},
                           {"worst_gap_bits", worst_gap}}},
              {"items", items}};
  r.exit_code = exit_for(checks);
  return r;
}

// ---------------------------------------------------------------------------

namespace {

RunResult condense_sampled(const ExperimentConfig& cfg) {
  RunResult r;
  r.csv_header = {"check", "pass"};
  std::vector<Check> checks;
  json results;
  if (cfg.profile == "paper") {
    RandomProcessParams params;
    try {
      params = derive_params(cfg.n, cfg.k, cfg.eps);
    } catch (const InfeasibleParams& e) {
      throw std::domain_error(std::string(e.what()) + " (smallest feasible k = " + num(e.min_k()) + ")");
    }
    auto cons = validate_constraints(params);
    checks = cons.rows;
    results["params"] = to_json(params);
    results["constraints"] = to_json(cons);
    unsigned m = params.m_bits();
    if (params.n + m > kMaxSampledDrawBits)
      results["sampling"] = {{"refused", true},
                             {"cost_draws_log2", params.n + m},
                             {"limit_log2", kMaxSampledDrawBits}};
  } else if (cfg.profile == "scaled") {
    double N = std::ldexp(1.0, static_cast<int>(cfg.n));
    double R = cfg.R > 0 ? cfg.R : 4 * cfg.p * N;
    auto params = scaled_params(cfg.n, cfg.k, cfg.eps, cfg.m_bits, cfg.p, cfg.gamma, R);
    std::mt19937_64 master(need_seed(cfg, "condense"));
    std::uint64_t sample_seed = master(), audit_seed = master();
    auto cond = sample_output_light(params, sample_seed);
    auto audit = audit_sampled(cond, params, cfg.trials, audit_seed);
    checks = audit.checks;
    results["params"] = to_json(params);
    results["constraints"] = to_json(validate_constraints(params));
    results["audit"] = to_json(audit);
    results["seeds"] = {{"sampling", sample_seed}, {"audit", audit_seed}};
    if (cfg.detail) results["condenser"] = to_json(cond);
  } else {
    throw std::invalid_argument("profile must be paper or scaled");
  }
  for (auto& c : checks) r.csv_rows.push_back({c.name, c.pass ? "true" : "false"});
  r.report = {{"checks", to_json(checks)}, {"results", results}};
  r.exit_code = exit_for(checks);
  return r;
}

RunResult condense_explicit(const ExperimentConfig& cfg) {
  ExplicitCfg ec;
  ec.n = cfg.n;
  ec.d = cfg.d;
  ec.eps = cfg.eps;
  ec.inner_key = cfg.inner_key;
  ExplicitExt ext(ec);
  const unsigned n = ec.n;
  const std::uint64_t outs = std::uint64_t{1} << ec.out_bits();
  const std::uint64_t expect = std::uint64_t{1} << (3 * n / 16);
  std::mt19937_64 rng(need_seed(cfg, "condense"));
  std::vector<Check> checks;
  json results = {{"config", to_json(ec)}};

  // every (s, y2) lands on an admissible R2', so sweeping those is exhaustive
  std::uint64_t bad = 0, swept = 0;
  for (std::uint64_t r2 = 1; r2 < (std::uint64_t{1} << ec.n1()); r2 += 2)
    for (std::uint64_t z = 0; z < outs; ++z, ++swept)
      if (fiber_count_r2(ext, r2, z) != expect) ++bad;
  for (unsigned i = 0; i < cfg.trials; ++i, ++swept) {
    std::uint64_t y2 = rng() & bits::mask(ec.n2()), s = rng() & bits::mask(ec.d), z = rng() % outs;
    if (fiber_count(ext, s, y2, z) != expect) ++bad;
  }
  checks.push_back({"explicit.fiber_count", "|{Y1 : <R2', Y1> = z}| = 2^(3n/16)", bad == 0,
                    {{"expected", expect}, {"evaluated", swept}, {"mismatches", bad}}});

  if (ec.n2() + ec.d <= kMaxProfileBits) {
    auto prof = explicit_reach_profile(ext);
    const unsigned bound_bits = 2 * n - n / 16 + ec.d;
    auto light = audit_explicit_output_light(ext, prof, (std::uint64_t{1} << bound_bits) + 1);
    checks.push_back({"explicit.output_light", "max_z |{x : exists s, Ext(x, s) = z}| <= 2^(2n - n/16 + d)",
                      light.max_preimages <= (std::uint64_t{1} << bound_bits),
                      {{"max_preimages", light.max_preimages}, {"bound_log2", bound_bits}}});
    auto pos3 = position3_greedy(ext, prof, cfg.eps);
    std::vector<Rational> tvs;
    json tv_json = json::array();
    for (unsigned i = 0; i < cfg.trials; ++i) {
      std::vector<std::uint64_t> table(std::size_t{1} << n);
      for (auto& v : table) v = rng() & bits::mask(n);
      tvs.push_back(somewhere_random_tv(ext, n, i % 2, table));
      tv_json.push_back(fraction_string(tvs.back()));
    }
    auto g = wrap_condenser(ext, n);
    auto cert = certify_wrap("explicit", n, ec.d, ec.out_bits(), cfg.eps, light, pos3, tvs,
                             wrap_reads_prefix_only(g, 2000, rng()));
    for (auto& c : cert.checks) checks.push_back(c);
    results["output_light"] = to_json(light);
    results["position3_smooth_bits"] = pos3.smooth_bits;
    results["position12_tv"] = tv_json;
    results["wrap"] = to_json(cert);
  } else {
    results["whole_domain_audits"] = {{"refused", true},
                                      {"cost_log2", ec.n2() + ec.d},
                                      {"limit_log2", kMaxProfileBits}};
  }
  RunResult r;
  r.csv_header = {"check", "pass"};
  for (auto& c : checks) r.csv_rows.push_back({c.name, c.pass ? "true" : "false"});
  r.report = {{"checks", to_json(checks)}, {"results", results}};
  r.exit_code = exit_for(checks);
  return r;
}

}  // namespace

RunResult cmd_condense(const ExperimentConfig& cfg) {
  if (cfg.extractor == "sampled") return condense_sampled(cfg);
  if (cfg.extractor == "explicit") return condense_explicit(cfg);
  throw std::invalid_argument("extractor must be sampled or explicit");
}

// ---------------------------------------------------------------------------

RunResult cmd_cover(const ExperimentConfig& cfg) {
  if (cfg.in_file.empty()) throw std::invalid_argument("cover needs --in");
  json in = read_json(cfg.in_file);
  RunResult r;
  std::vector<Check> checks;
  json results;
  if (in.contains("graph")) {
    auto g = bipartite_from_json(in.at("graph"));
    auto res = greedy_cover(g, cfg.c0, cfg.delta, cfg.c1);
    std::vector<char> picked(g.n_right(), 0);
    for (auto v : res.chosen) picked[v] = 1;
    std::uint64_t covered = 0;
    for (std::uint64_t u = 0; u < g.n_left(); ++u)
      for (auto v : g.neighbors(u))
        if (picked[v]) {
          ++covered;
          break;
        }
    checks = res.checks;
    checks.push_back({"cover.recount", "left vertices adjacent to D, recounted", covered == res.covered,
                      {{"recount", covered}, {"reported", res.covered}}});
    results = to_json(res);
    results.erase("checks");
  } else if (in.contains("colored")) {
    auto h = colored_from_json(in.at("colored"));
    auto res = greedy_color_cover(h, cfg.c0, cfg.c1, cfg.c2, cfg.delta);
    std::vector<char> picked(h.n_colors(), 0);
    for (auto c : res.chosen) picked[c] = 1;
    std::uint64_t covered = 0;
    for (auto c : h.colors()) covered += picked[c];
    checks = res.checks;
    checks.push_back({"color_cover.recount", "edges colored by D, recounted", covered == res.covered,
                      {{"recount", covered}, {"reported", res.covered}}});
    results = to_json(res);
    results.erase("checks");
  } else {
    throw std::invalid_argument(cfg.in_file + " has neither \"graph\" nor \"colored\"");
  }
  r.csv_header = {"check", "pass"};
  for (auto& c : checks) r.csv_rows.push_back({c.name, c.pass ? "true" : "false"});
  r.report = {{"checks", to_json(checks)}, {"results", results}};
  r.exit_code = exit_for(checks);
  return r;
}

RunResult cmd_entropy(const ExperimentConfig& cfg) {
  if (cfg.in_file.empty()) throw std::invalid_argument("entropy needs --in");
  json in = read_json(cfg.in_file);
  Dist d = dist_from_json<Rational>(in.contains("dist") ? in.at("dist") : in);
  Rational eps = rational_from_double(cfg.eps);
  auto sm = smooth_min_entropy(d, eps);
  std::vector<Check> checks = {{"entropy.removed_mass", "mass cut above the cap is at most eps",
                                sm.removed_mass <= eps,
                                {{"removed", fraction_string(sm.removed_mass)}, {"eps", fraction_string(eps)}}}};
  json results = {{"smooth_bits", sm.entropy_bits},
                  {"cap", fraction_string(sm.cap)},
                  {"removed_mass", fraction_string(sm.removed_mass)},
                  {"min_entropy_bits", min_entropy(d)},
                  {"support", d.mass().size()}};
  if (cfg.entropy_k) {
    double k = *cfg.entropy_k;
    auto D = heavy_set(d, k, cfg.eps);
    bool below = sm.entropy_bits < k;
    json hs = nullptr;
    bool consistent = D.has_value() == below;
    if (D) {
      hs = *D;
      Rational hit = d.prob_of(std::set<std::uint64_t>(D->begin(), D->end()));
      consistent = consistent && hit >= eps && static_cast<double>(D->size()) < std::exp2(k);
      results["heavy_set_mass"] = fraction_string(hit);
    }
    results["heavy_set"] = hs;
    checks.push_back({"entropy.heavy_set", "heavy set present iff smooth entropy < k, with mass >= eps and size < 2^k",
                      consistent, {{"k", k}, {"present", D.has_value()}}});
  }
  RunResult r;
  r.csv_header = {"check", "pass"};
  for (auto& c : checks) r.csv_rows.push_back({c.name, c.pass ? "true" : "false"});
  r.report = {{"checks", to_json(checks)}, {"results", results}};
  r.exit_code = exit_for(checks);
  return r;
}

// ---------------------------------------------------------------------------

RunResult run(const ExperimentConfig& cfg) {
  auto start = std::chrono::steady_clock::now();
  std::time_t now = std::time(nullptr);
  RunResult r;
  if (cfg.command == "audit-extract23") {
    r = cmd_audit_extract23(cfg);
  } else if (cfg.command == "audit-condense") {
    r = cmd_audit_condense(cfg);
  } else if (cfg.command == "condense") {
    r = cmd_condense(cfg);
  } else if (cfg.command == "cover") {
    r = cmd_cover(cfg);
  } else if (cfg.command == "entropy") {
    r = cmd_entropy(cfg);
  } else {
    throw std::invalid_argument("unknown command " + cfg.command);
  }
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  json head = {{"schema_version", kSchemaVersion},
               {"command", cfg.command},
               {"version", CONDENSE_VERSION},
               {"config", config_json(cfg)},
               {"pass", r.exit_code == kPass}};
  head.update(r.report);
  head["timing"] = {{"started_utc", stamp}, {"wall_clock_s", secs}};
  r.report = std::move(head);
  return r;
}

json strip_timing(json report) {
  report.erase("timing");
  return report;
}

std::string csv_text(const RunResult& r) {
  auto field = [](const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
  };
  std::string out;
  auto line = [&](const std::vector<std::string>& row) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + field(row[i]);
    out += "\n";
  };
  line(r.csv_header);
  for (auto& row : r.csv_rows) line(row);
  return out;
}

// ---------------------------------------------------------------------------

int main_with_args(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Exact audits for seedless condensers and the constructions around them", "condense"};
  app.require_subcommand(1);
  app.set_version_flag("--version", CONDENSE_VERSION);

  ExperimentConfig cfg;
  std::uint64_t seed = 0;
  double entropy_k = 0;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--n", cfg.n, "block length in bits (input bits for condense)");
    sub->add_option("--eps", cfg.eps, "smoothing / error parameter");
    sub->add_option("--rng-seed", seed, "seed for every randomized step");
    sub->add_option("--out", cfg.out, "write the JSON report here instead of stdout");
    sub->add_option("--csv", cfg.csv, "also write a CSV summary here");
    sub->add_flag("--detail", cfg.detail, "embed full certificates in the report");
  };
  auto batch = [&](CLI::App* sub) {
    sub->add_option("--fn-file", cfg.fn_file, "raw little-endian function tables, concatenated");
    sub->add_option("--random", cfg.random, "number of uniformly random functions to audit");
    sub->add_option("--workers", cfg.workers, "threads for per-function audits")->check(CLI::PositiveNumber);
  };

  auto* ex = app.add_subcommand("audit-extract23", "anti-extraction adversary for one-bit f over 3 blocks");
  common(ex);
  batch(ex);

  auto* ac = app.add_subcommand("audit-condense", "condensing adversaries for f over ell blocks");
  common(ac);
  batch(ac);
  ac->add_option("--ell", cfg.ell, "number of blocks");
  ac->add_option("--t", cfg.t, "output bits");
  ac->add_option("--construction", cfg.construction, "one-ell | nosf23 | shela-rate | nosf-scaled")
      ->check(CLI::IsMember({"one-ell", "nosf23", "shela-rate", "nosf-scaled"}));
  ac->add_option("--good", cfg.good, "good blocks (shela-rate)");
  ac->add_option("--scale", cfg.scale, "scale-up factor (nosf-scaled)");

  auto* co = app.add_subcommand("condense", "build and audit an output-light extractor");
  common(co);
  co->add_option("--extractor", cfg.extractor, "sampled | explicit")->check(CLI::IsMember({"sampled", "explicit"}));
  co->add_option("--profile", cfg.profile, "paper | scaled")->check(CLI::IsMember({"paper", "scaled"}));
  co->add_option("--trials", cfg.trials, "random subsets, tables or fiber samples");
  co->add_option("--k", cfg.k, "log2 K");
  co->add_option("--m-bits", cfg.m_bits, "log2 M (scaled profile)");
  co->add_option("--p", cfg.p, "inclusion probability (scaled profile)");
  co->add_option("--gamma", cfg.gamma, "set-size slack (scaled profile)");
  co->add_option("--R", cfg.R, "multiplicity threshold (scaled profile, default 4pN)");
  co->add_option("--d", cfg.d, "seed bits (explicit)");
  co->add_option("--inner-key", cfg.inner_key, "key of the inner extractor (explicit)");

  auto* cv = app.add_subcommand("cover", "greedy covering on a graph or colored instance");
  common(cv);
  cv->add_option("--in", cfg.in_file, "instance JSON with \"graph\" or \"colored\"")->required();
  cv->add_option("--c0", cfg.c0);
  cv->add_option("--c1", cfg.c1);
  cv->add_option("--c2", cfg.c2);
  cv->add_option("--delta", cfg.delta);

  auto* en = app.add_subcommand("entropy", "smooth min-entropy and heavy set of a distribution");
  common(en);
  en->add_option("--in", cfg.in_file, "distribution JSON {\"t\", \"mass\"}")->required();
  auto* k_opt = en->add_option("--k", entropy_k, "threshold for the heavy set");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kPass : kOperational;
  }

  for (auto* sub : {ex, ac, co, cv, en})
    if (sub->parsed()) {
      cfg.command = sub->get_name();
      if (sub->count("--rng-seed")) cfg.rng_seed = seed;
    }
  if (k_opt->count()) cfg.entropy_k = entropy_k;

  RunResult r;
  try {
    r = run(cfg);
  } catch (const std::exception& e) {
    err << "condense " << cfg.command << ": " << e.what() << "\n";
    return kOperational;
  }
  std::string text = r.report.dump(2) + "\n";
  if (cfg.out.empty()) {
    out << text;
  } else {
    std::ofstream f(cfg.out);
    if (!(f << text)) {
      err << "cannot write " << cfg.out << "\n";
      return kOperational;
    }
  }
  if (!cfg.csv.empty()) {
    std::ofstream f(cfg.csv);
    if (!(f << csv_text(r))) {
      err << "cannot write " << cfg.csv << "\n";
      return kOperational;
    }
  }
  return r.exit_code;
}

}  // namespace condense::cli
