#include "condense/condensers.hpp"

#include <bit>
#include <numbers>

namespace condense {

namespace {

constexpr long double kE = std::numbers::e_v<long double>;

unsigned ceil_log2_slack(long double v) {
  if (v <= 1) return 0;
  return static_cast<unsigned>(std::ceil(std::log2(v) - 1e-9L));
}

nlohmann::json ld(long double v) { return static_cast<double>(v); }

Check relation_row(std::string name, std::string formula, long double lhs, long double rhs, bool upper) {
  bool pass = upper ? lhs <= rhs : lhs >= rhs;
  return {std::move(name), "constraint table: " + formula, pass,
          {{"lhs", ld(lhs)}, {"rhs", ld(rhs)}, {"relation", upper ? "<=" : ">="}}};
}

nlohmann::json rational_json(const Rational& r) {
  return {{"fraction", fraction_string(r)}, {"value", to_double(r)}};
}

}  // namespace

unsigned RandomProcessParams::m_bits() const {
  std::uint64_t mc = M_count();
  return mc <= 1 ? 0 : static_cast<unsigned>(64 - std::countl_zero(mc - 1));
}

RandomProcessParams derive_params_K(unsigned n, long double K, double eps) {
  if (!(eps > 0 && eps < 1)) throw std::invalid_argument("eps must lie in (0,1)");
  if (n == 0 || n > 512) throw std::invalid_argument("n must lie in [1, 512]");
  if (!(K >= 1)) throw std::invalid_argument("K must be at least 1");
  RandomProcessParams p;
  p.profile = "paper";
  p.n = n;
  p.k = static_cast<double>(std::log2(K));
  p.eps = eps;
  p.N = std::ldexp(1.0L, static_cast<int>(n));
  p.K = K;
  long double e = p.eps, lnN = n * std::numbers::ln2_v<long double>;
  long double inner = std::log(e * K * lnN);
  if (!(inner > 0)) throw std::domain_error("log(eps K log N) must be positive for the R formula");
  p.D_seed = 1e4L * lnN / (e * e * e);
  p.M = e * K * lnN;
  p.R = 1e6L * p.N / (e * e * e * e * K) + 500 * std::sqrt(p.N * inner) / (e * e * std::sqrt(K));
  p.p = 6000 / (e * e * e * e * K);
  p.gamma = e / 10;
  p.L_big = e * p.M / (4 * kE * kE);
  p.min_feasible_k = static_cast<double>(std::log2(6000 / (e * e * e * e)));
  p.feasible = p.p <= 1 + 1e-12L;
  if (!p.feasible)
    throw InfeasibleParams("p = " + std::to_string(static_cast<double>(p.p)) + " > 1; need k >= " +
                               std::to_string(p.min_feasible_k),
                           p.min_feasible_k);
  p.d = ceil_log2_slack((1 + p.gamma) * p.p * p.M);
  return p;
}

RandomProcessParams derive_params(unsigned n, double k, double eps) {
  return derive_params_K(n, std::exp2(static_cast<long double>(k)), eps);
}

RandomProcessParams scaled_params(unsigned n, double k, double eps, unsigned m_bits, double p, double gamma,
                                  double R) {
  if (!(eps > 0 && eps < 1)) throw std::invalid_argument("eps must lie in (0,1)");
  if (!(p > 0 && p <= 1)) throw std::invalid_argument("p must lie in (0,1]");
  if (!(gamma >= 0 && gamma < 1)) throw std::invalid_argument("gamma must lie in [0,1)");
  if (n == 0 || n > 40 || m_bits > 40) throw std::invalid_argument("scaled profile widths out of range");
  if (k < 0 || k > n) throw std::invalid_argument("k must lie in [0, n]");
  RandomProcessParams q;
  q.profile = "scaled";
  q.n = n;
  q.k = k;
  q.eps = eps;
  q.N = std::ldexp(1.0L, static_cast<int>(n));
  q.K = std::exp2(static_cast<long double>(k));
  q.M = std::ldexp(1.0L, static_cast<int>(m_bits));
  q.p = p;
  q.gamma = gamma;
  q.R = R;
  q.L_big = q.eps * q.M / (4 * kE * kE);
  q.d = std::max(1u, ceil_log2_slack((1 + q.gamma) * q.p * q.M));
  q.D_seed = std::ldexp(1.0L, static_cast<int>(q.d));
  q.feasible = true;
  q.min_feasible_k = static_cast<double>(std::log2(6000 / (q.eps * q.eps * q.eps * q.eps)));
  return q;
}

std::vector<std::string> ConstraintReport::failing() const {
  std::vector<std::string> out;
  for (auto& r : rows)
    if (!r.pass) out.push_back(r.name);
  return out;
}

ConstraintReport validate_constraints(const RandomProcessParams& q) {
  ConstraintReport rep;
  rep.profile = q.profile;
  long double e = q.eps, N = q.N, K = q.K, M = q.M, R = q.R, L = q.L_big, g = q.gamma, p = q.p;
  long double lnN = std::log(N), lnM = std::log(M);
  long double big_log = std::log(e * M / (4 * kE * L));
  long double tail = std::log(2 * kE * N / (e * K));
  rep.rows.push_back(relation_row("p_le_R_over_100N", "p <= R/(100N)", p, R / (100 * N), true));
  rep.rows.push_back(relation_row("p_ge_union_light", "p >= log(2eN/(eps K)) / (eps M log(eps M/(4e L_big)))", p,
                                  tail / (e * M * big_log), false));
  rep.rows.push_back(relation_row("p_ge_size_chernoff", "p >= 6 log N / (gamma^2 M)", p, 6 * lnN / (g * g * M), false));
  rep.rows.push_back(relation_row("p_ge_light_exp_M", "p >= 16 / (K eps^2 log(eps M/(4e L_big)))", p,
                                  16 / (K * e * e * big_log), false));
  rep.rows.push_back(relation_row("p_le_R2_over_24NlogM", "p <= R^2 / (24 N log M)", p, R * R / (24 * N * lnM), true));
  rep.rows.push_back(
      relation_row("p_ge_heavy_exp_M", "p >= 192 M / (eps^3 K L_big)", p, 192 * M / (e * e * e * K * L), false));
  rep.rows.push_back(relation_row("p_ge_union_heavy", "p >= 96 log(2eN/(eps K)) / (eps^2 L_big)", p,
                                  96 * tail / (e * e * L), false));
  rep.rows.push_back(relation_row("gamma_le_eps_over_5", "gamma <= eps/5", g, e / 5, true));
  rep.certifying = q.profile == "paper" && rep.all_pass();
  return rep;
}

// ---------------------------------------------------------------------------

SampledCondenser::SampledCondenser(unsigned n, unsigned m, unsigned d, std::uint64_t M,
                                   std::vector<std::vector<std::uint32_t>> sets, std::uint64_t rng_seed)
    : n_(n), m_(m), d_(d), M_(M), rng_seed_(rng_seed), sets_(std::move(sets)) {
  spec().validate();
  if (M == 0 || M > (std::uint64_t{1} << m)) throw std::invalid_argument("M must lie in [1, 2^m]");
  if (sets_.size() != (std::uint64_t{1} << n)) throw std::invalid_argument("need one set per input");
  for (std::size_t i = 0; i < sets_.size(); ++i) {
    auto& s = sets_[i];
    if (s.empty()) throw std::invalid_argument("set " + std::to_string(i) + " is empty");
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (s[j] >= M) throw std::invalid_argument("set element outside [M]");
      if (j && s[j] <= s[j - 1]) throw std::invalid_argument("set " + std::to_string(i) + " not strictly ascending");
    }
  }
}

SampledCondenser sample_output_light(const RandomProcessParams& params, std::uint64_t rng_seed) {
  if (!(params.p > 0 && params.p <= 1)) throw std::invalid_argument("inclusion probability outside (0,1]");
  std::uint64_t N = bits::checked_pow2(params.n, 24, "number of sets");
  std::uint64_t M = params.M_count();
  unsigned m = params.m_bits();
  if (M > (std::uint64_t{1} << 24)) throw std::length_error("M above 2^24");
  bits::checked_pow2(params.n + m, kMaxSampledDrawBits, "random-process draws N*M");
  bool all = params.p >= 1;
  std::uint64_t thr = all ? 0 : static_cast<std::uint64_t>(std::ldexp(params.p, 64));
  std::mt19937_64 rng(rng_seed);
  std::vector<std::vector<std::uint32_t>> sets(N);
  std::uint64_t inserted = 0;
  std::vector<std::uint64_t> redrawn;
  auto draw = [&](std::vector<std::uint32_t>& s) {
    s.clear();
    for (std::uint64_t z = 0; z < M; ++z)
      if (all || rng() < thr) s.push_back(static_cast<std::uint32_t>(z));
  };
  for (std::uint64_t i = 0; i < N; ++i) {
    draw(sets[i]);
    if (sets[i].empty()) {
      redrawn.push_back(i);
      draw(sets[i]);
      if (sets[i].empty()) throw std::runtime_error("S_" + std::to_string(i) + " empty after one redraw");
    }
    inserted += sets[i].size();
  }
  SampledCondenser c(params.n, m, std::max(1u, params.d), M, std::move(sets), rng_seed);
  c.insertions = inserted;
  c.resampled = std::move(redrawn);
  return c;
}

Rational subset_tv(const SampledCondenser& cond, const std::vector<std::uint64_t>& inputs) {
  if (inputs.empty()) throw std::invalid_argument("empty input subset");
  std::uint64_t M = cond.M(), seeds = std::uint64_t{1} << cond.d();
  std::vector<std::uint64_t> counts(M, 0);
  for (auto i : inputs) {
    auto& s = cond.set(i);
    for (std::uint64_t sd = 0; sd < seeds; ++sd) ++counts[s[sd % s.size()]];
  }
  BigInt total = BigInt(inputs.size()) * seeds, num = 0;
  for (auto c : counts) {
    BigInt diff = BigInt(c) * M - total;
    num += diff < 0 ? BigInt(-diff) : diff;
  }
  return Rational(num, 2 * total * M);
}

std::pair<std::uint64_t, std::uint64_t> max_multiplicity(const SampledCondenser& cond) {
  std::vector<std::uint64_t> mult(cond.M(), 0);
  for (auto& s : cond.sets())
    for (auto z : s) ++mult[z];
  auto it = std::max_element(mult.begin(), mult.end());
  return {*it, static_cast<std::uint64_t>(it - mult.begin())};
}

SampledAudit audit_sampled(const SampledCondenser& cond, const RandomProcessParams& params, unsigned trials,
                           std::uint64_t rng_seed) {
  if (cond.n() != params.n) throw std::invalid_argument("condenser and parameters disagree on n");
  SampledAudit a;
  a.profile = params.profile;
  a.certifying = false;
  const auto& sets = cond.sets();
  std::uint64_t N = sets.size(), M = cond.M(), seeds = std::uint64_t{1} << cond.d();
  long double pM = params.p * params.M;

  // (a)
  a.min_size = ~std::uint64_t{0};
  for (auto& s : sets) {
    a.min_size = std::min<std::uint64_t>(a.min_size, s.size());
    a.max_size = std::max<std::uint64_t>(a.max_size, s.size());
    a.total_size += s.size();
  }
  long double lo = (1 - params.gamma) * pM, hi = (1 + params.gamma) * pM;
  a.checks.push_back({"seed.set_sizes", "all |S_i| within (1 +- gamma) p M", a.min_size >= lo && a.max_size <= hi,
                      {{"min", a.min_size}, {"max", a.max_size}, {"lower", ld(lo)}, {"upper", ld(hi)},
                       {"gamma", ld(params.gamma)}}});
  a.checks.push_back({"seed.length", "(1 + gamma) p M <= 2^d", hi <= static_cast<long double>(seeds),
                      {{"upper", ld(hi)}, {"d", cond.d()}}});
  a.checks.push_back({"seed.insertions", "sum_i |S_i| equals the insertions made while sampling",
                      a.total_size == cond.insertions, {{"sum", a.total_size}, {"insertions", cond.insertions}}});

  // (b)
  std::tie(a.max_multiplicity, a.witness) = max_multiplicity(cond);
  a.checks.push_back({"light.max_multiplicity", "max_z |{i : z in S_i}| < R",
                      static_cast<long double>(a.max_multiplicity) < params.R,
                      {{"max", a.max_multiplicity}, {"witness", a.witness}, {"R", ld(params.R)},
                       {"pN", ld(params.p * params.N)}}});

  // (c)
  auto K = static_cast<std::uint64_t>(std::llround(params.K));
  if (K == 0 || K > N) throw std::invalid_argument("K must lie in [1, N]");
  Rational eps_r = rational_from_double(static_cast<double>(params.eps));
  std::mt19937_64 rng(rng_seed);
  std::vector<std::uint64_t> perm(N);
  std::vector<Rational> mass(M);
  std::uint64_t over = 0;
  for (unsigned t = 0; t < trials; ++t) {
    for (std::uint64_t i = 0; i < N; ++i) perm[i] = i;
    for (std::uint64_t j = 0; j < K; ++j) std::swap(perm[j], perm[j + rng() % (N - j)]);
    std::fill(mass.begin(), mass.end(), Rational(0));
    for (std::uint64_t j = 0; j < K; ++j) {
      auto& s = sets[perm[j]];
      Rational each = make_rational(BigInt(1), BigInt(K) * s.size());
      for (auto z : s) mass[z] += each;
    }
    Rational uni = 0, unit = make_rational(BigInt(1), BigInt(M));
    for (std::uint64_t z = 0; z < M; ++z) {
      Rational dz = mass[z] - unit;
      uni += dz < 0 ? Rational(-dz) : dz;
    }
    uni /= 2;
    Rational tv = subset_tv(cond, std::vector<std::uint64_t>(perm.begin(), perm.begin() + K));
    if (tv > eps_r) ++over;
    a.max_tv = std::max(a.max_tv, tv);
    a.max_tv_uniform_element = std::max(a.max_tv_uniform_element, uni);
    a.subset_tv.push_back(std::move(tv));
  }
  double mean = 0;
  for (auto& v : a.subset_tv) mean += to_double(v);
  if (trials) mean /= trials;
  a.checks.push_back({"extract.subset_tv", "TV(f(X, U_d), U_M) <= eps for X uniform on a K-subset", over == 0,
                      {{"trials", trials}, {"K", K}, {"eps", static_cast<double>(params.eps)},
                       {"max_tv", rational_json(a.max_tv)}, {"mean_tv", mean}, {"over_eps", over},
                       {"max_tv_uniform_element", rational_json(a.max_tv_uniform_element)}}});

  // (d)
  std::vector<std::uint64_t> reach(M, 0);
  for (auto& s : sets)
    for (std::uint64_t j = 0; j < std::min<std::uint64_t>(s.size(), seeds); ++j) ++reach[s[j]];
  std::uint64_t R_light = *std::max_element(reach.begin(), reach.end()) + 1;
  long double e = params.eps;
  a.wrap_k = static_cast<double>(std::log2(e) + params.n - 1 - std::log2(static_cast<long double>(R_light)));
  long double kprime = std::exp2(static_cast<long double>(a.wrap_k));
  a.adversary_set_size = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::floor(kprime)));
  auto order = detail::reach_order(reach);
  auto success_for = [&](std::uint64_t size) {
    std::vector<char> in_d(M, 0);
    for (std::uint64_t j = 0; j < std::min<std::uint64_t>(size, M); ++j) in_d[order[j]] = 1;
    std::uint64_t hit = 0;
    for (auto& s : sets)
      for (std::uint64_t j = 0; j < std::min<std::uint64_t>(s.size(), seeds); ++j)
        if (in_d[s[j]]) {
          ++hit;
          break;
        }
    return make_rational(BigInt(hit), BigInt(N));
  };
  a.adversary_success = success_for(a.adversary_set_size);
  Rational at_K = success_for(K);
  a.checks.push_back({"adversary.position3", "greedy heavy set of size 2^k' hits with probability < eps",
                      a.adversary_success < eps_r,
                      {{"R_light", R_light}, {"k_prime", a.wrap_k}, {"set_size", a.adversary_set_size},
                       {"success", rational_json(a.adversary_success)},
                       {"success_at_extractor_K", rational_json(at_K)}}});
  return a;
}

// ---------------------------------------------------------------------------

int ExplicitCfg::inner_out() const {
  auto loss = static_cast<int>(std::ceil(std::log2(1.0 / eps0()) - 1e-12));
  return static_cast<int>(n / 2) - loss;
}

void ExplicitCfg::validate() const {
  if (n == 0 || n % 16 != 0) throw std::invalid_argument("n must be a positive multiple of 16");
  if (n2() > 64) throw std::invalid_argument("7n/4 must fit in 64 bits (n <= 32)");
  if (!(eps > 0 && eps < 1)) throw std::invalid_argument("eps must lie in (0,1)");
  if (d < 1 || d > 63) throw std::invalid_argument("seed length must lie in [1, 63]");
  if (inner_out() < static_cast<int>(n / 4))
    throw std::invalid_argument("inner output n/2 - ceil(log2(1/eps0)) = " + std::to_string(inner_out()) +
                                " is shorter than the n/4-bit prefix");
}

namespace {
KeyedExt make_inner(const ExplicitCfg& c) {
  c.validate();
  return KeyedExt({c.n2(), c.d, static_cast<unsigned>(c.inner_out())}, c.inner_key);
}
}  // namespace

ExplicitExt::ExplicitExt(ExplicitCfg cfg)
    : cfg_(cfg), inner_(make_inner(cfg)), field_(FieldParams::standard(cfg.limb_bits())) {}

std::pair<std::uint64_t, std::uint64_t> ExplicitExt::split(std::uint64_t x1, std::uint64_t x2) const {
  unsigned n = cfg_.n, h = cfg_.n1() / 2, rest = n - h;
  std::uint64_t y1 = (bits::prefix(x1, n, h) << h) | bits::prefix(x2, n, h);
  std::uint64_t y2 = (bits::slice(x1, n, h + 1, n) << rest) | bits::slice(x2, n, h + 1, n);
  return {y1, y2};
}

std::uint64_t ExplicitExt::r2_prime(std::uint64_t y2, std::uint64_t s) const {
  return bits::prefix(inner_.eval(y2, s), inner_.spec().m, cfg_.n1()) | 1;
}

std::uint64_t ExplicitExt::r2_prime_from_hash(std::uint64_t h, std::uint64_t s) const {
  return bits::prefix(inner_.squeeze(h, s), inner_.spec().m, cfg_.n1()) | 1;
}

std::uint64_t ExplicitExt::combine(std::uint64_t r2p, std::uint64_t y1) const {
  unsigned mb = cfg_.limb_bits();
  std::uint64_t mk = bits::mask(mb), acc = 0;
  for (unsigned j = 0; j < ExplicitCfg::limbs; ++j)
    acc ^= field_.mul((r2p >> (j * mb)) & mk, (y1 >> (j * mb)) & mk);
  return acc;
}

std::uint64_t ExplicitExt::eval3(std::uint64_t x1, std::uint64_t x2, std::uint64_t s) const {
  if (x1 > bits::mask(cfg_.n) || x2 > bits::mask(cfg_.n)) throw std::invalid_argument("block wider than n bits");
  if (s > bits::mask(cfg_.d)) throw std::invalid_argument("seed wider than d bits");
  auto [y1, y2] = split(x1, x2);
  return combine(r2_prime(y2, s), y1);
}

std::uint64_t explicit_ext(std::uint64_t x1, std::uint64_t x2, std::uint64_t s, const ExplicitCfg& cfg) {
  return ExplicitExt(cfg).eval3(x1, x2, s);
}

std::uint64_t fiber_count_r2(const ExplicitExt& ext, std::uint64_t r2p, std::uint64_t z) {
  std::uint64_t count = 0, y1s = std::uint64_t{1} << ext.cfg().n1();
  for (std::uint64_t y1 = 0; y1 < y1s; ++y1) count += ext.combine(r2p, y1) == z;
  return count;
}

std::uint64_t fiber_count(const ExplicitExt& ext, std::uint64_t s, std::uint64_t y2, std::uint64_t z) {
  return fiber_count_r2(ext, ext.r2_prime(y2, s), z);
}

ExplicitReachProfile explicit_reach_profile(const ExplicitExt& ext) {
  const auto& c = ext.cfg();
  unsigned free_bits = c.n1() - 1;
  if (free_bits > 4) throw std::length_error("reach profile needs n/4 - 1 <= 4");
  std::uint64_t y2s = bits::checked_pow2(c.n2(), kMaxProfileBits, "Y2 enumeration");
  bits::checked_pow2(c.n2() + c.d, kMaxProfileBits + 4, "Y2 x seed enumeration");
  std::uint64_t seeds = std::uint64_t{1} << c.d;
  std::vector<std::uint64_t> hist(std::size_t{1} << (std::size_t{1} << free_bits), 0);
  for (std::uint64_t y2 = 0; y2 < y2s; ++y2) {
    std::uint64_t h = ext.inner().absorb(y2), mask = 0;
    for (std::uint64_t s = 0; s < seeds; ++s) mask |= std::uint64_t{1} << (ext.r2_prime_from_hash(h, s) >> 1);
    ++hist[mask];
  }
  ExplicitReachProfile prof;
  prof.y2_total = y2s;
  for (std::uint64_t mk = 0; mk < hist.size(); ++mk)
    if (hist[mk]) prof.mask_count[mk] = hist[mk];
  return prof;
}

namespace {
/// Calls fn(y1, reachable outputs) for every Y1 under one reach mask.
template <class Fn>
void for_each_reach(const ExplicitExt& ext, std::uint64_t mask, Fn&& fn) {
  std::uint64_t y1s = std::uint64_t{1} << ext.cfg().n1();
  std::vector<std::uint64_t> zs;
  for (std::uint64_t y1 = 0; y1 < y1s; ++y1) {
    zs.clear();
    for (std::uint64_t m = mask, idx = 0; m; m >>= 1, ++idx)
      if (m & 1) zs.push_back(ext.combine((idx << 1) | 1, y1));
    std::sort(zs.begin(), zs.end());
    zs.erase(std::unique(zs.begin(), zs.end()), zs.end());
    fn(y1, zs);
  }
}

std::vector<std::uint64_t> explicit_reach_counts(const ExplicitExt& ext, const ExplicitReachProfile& prof) {
  std::vector<std::uint64_t> reach(std::size_t{1} << ext.cfg().out_bits(), 0);
  for (auto& [mask, cnt] : prof.mask_count)
    for_each_reach(ext, mask, [&](std::uint64_t, const std::vector<std::uint64_t>& zs) {
      for (auto z : zs) reach[z] += cnt;
    });
  return reach;
}
}  // namespace

OutputLightReport audit_explicit_output_light(const ExplicitExt& ext, const ExplicitReachProfile& prof,
                                              std::uint64_t R) {
  const auto& c = ext.cfg();
  OutputLightReport rep;
  rep.R = R;
  rep.exhaustive = true;
  rep.certifying = true;
  rep.samples = prof.y2_total << c.n1();
  rep.pair_total = rep.samples << c.d;
  auto reach = explicit_reach_counts(ext, prof);
  for (std::uint64_t z = 0; z < reach.size(); ++z) {
    rep.distinct_total += reach[z];
    if (reach[z] > rep.max_preimages) {
      rep.max_preimages = reach[z];
      rep.witness_output = z;
    }
    if (reach[z]) rep.counts[z] = reach[z];
  }
  rep.pass = rep.max_preimages < R;
  return rep;
}

Position3Result position3_greedy(const ExplicitExt& ext, const ExplicitReachProfile& prof, double eps) {
  auto reach = explicit_reach_counts(ext, prof);
  Position3Result out;
  out.order = detail::reach_order(reach);
  std::vector<std::uint64_t> rank(reach.size()), counts(reach.size(), 0);
  for (std::uint64_t i = 0; i < out.order.size(); ++i) rank[out.order[i]] = i;
  for (auto& [mask, cnt] : prof.mask_count)
    for_each_reach(ext, mask, [&](std::uint64_t, const std::vector<std::uint64_t>& zs) {
      auto best = *std::min_element(zs.begin(), zs.end(), [&](auto a, auto b) { return rank[a] < rank[b]; });
      counts[best] += cnt;
    });
  out.output = detail::counts_to_dist(ext.cfg().out_bits(), counts);
  out.smooth_bits = smooth_min_entropy(out.output, eps).entropy_bits;
  return out;
}

WrapCertificate certify_wrap(const std::string& extractor, unsigned n, unsigned d, unsigned m, double eps,
                             const OutputLightReport& light, const Position3Result& pos3,
                             const std::vector<Rational>& position12_tvs, Check prefix_only) {
  WrapCertificate c;
  c.extractor = extractor;
  c.n = n;
  c.d = d;
  c.m = m;
  c.eps = eps;
  c.R = light.max_preimages + 1;
  c.k = wrap_entropy_k(n, eps, static_cast<double>(c.R));
  c.position3_smooth_bits = pos3.smooth_bits;
  c.position12_tables = position12_tvs.size();
  Rational eps_r = rational_from_double(eps);
  std::uint64_t over = 0;
  for (auto& tv : position12_tvs) {
    c.worst_position12_tv = std::max(c.worst_position12_tv, tv);
    if (tv > eps_r) ++over;
  }
  c.checks.push_back(std::move(prefix_only));
  c.checks.push_back({"wrap.seed_fits", "seed length d <= n", d <= n, {{"d", d}, {"n", n}}});
  c.checks.push_back({"wrap.light_certified", "output-lightness counted exhaustively", light.certifying,
                      {{"max_preimages", light.max_preimages}, {"R", c.R}}});
  long double direct = std::log2(static_cast<long double>(eps) * std::ldexp(1.0L, static_cast<int>(2 * n)) /
                                 (2.0L * static_cast<long double>(c.R)));
  c.checks.push_back({"wrap.k_formula", "k = log2(eps N^2 / (2 R_observed))",
                      std::abs(static_cast<long double>(c.k) - direct) <= 1e-9L,
                      {{"k", c.k}, {"recomputed", ld(direct)}}});
  c.checks.push_back({"wrap.position3", "smooth min-entropy of the greedy position-3 adversary >= k",
                      pos3.smooth_bits >= c.k - kBoundSlack,
                      {{"smooth_bits", pos3.smooth_bits}, {"k", c.k}}});
  c.checks.push_back({"wrap.position12", "TV(g(X), U_m) <= eps with a bad block in position 1 or 2", over == 0,
                      {{"tables", position12_tvs.size()}, {"worst_tv", rational_json(c.worst_position12_tv)},
                       {"over_eps", over}}});
  return c;
}

// ---------------------------------------------------------------------------

nlohmann::json to_json(const RandomProcessParams& p) {
  return {{"profile", p.profile}, {"n", p.n},         {"k", p.k},
          {"eps", ld(p.eps)},     {"N", ld(p.N)},     {"K", ld(p.K)},
          {"D_seed", ld(p.D_seed)}, {"M", ld(p.M)},   {"R", ld(p.R)},
          {"p", ld(p.p)},         {"gamma", ld(p.gamma)}, {"L_big", ld(p.L_big)},
          {"d", p.d},             {"feasible", p.feasible}, {"min_feasible_k", p.min_feasible_k}};
}

nlohmann::json to_json(const ConstraintReport& r) {
  return {{"profile", r.profile}, {"certifying", r.certifying}, {"all_pass", r.all_pass()},
          {"failing", r.failing()}, {"rows", to_json(r.rows)}};
}

nlohmann::json to_json(const SampledCondenser& c) {
  return {{"n", c.n()}, {"m", c.m()}, {"d", c.d()}, {"M", c.M()}, {"rng_seed", c.rng_seed()}, {"sets", c.sets()}};
}

SampledCondenser sampled_condenser_from_json(const nlohmann::json& j) {
  auto sets = j.at("sets").get<std::vector<std::vector<std::uint32_t>>>();
  unsigned m = j.at("m").get<unsigned>();
  std::uint64_t M = j.value("M", std::uint64_t{1} << m);
  SampledCondenser c(j.at("n").get<unsigned>(), m, j.value("d", 1u), M, std::move(sets),
                     j.at("rng_seed").get<std::uint64_t>());
  for (auto& s : c.sets()) c.insertions += s.size();
  return c;
}

nlohmann::json to_json(const SampledAudit& a) {
  nlohmann::json tvs = nlohmann::json::array();
  for (auto& t : a.subset_tv) tvs.push_back(fraction_string(t));
  return {{"profile", a.profile},
          {"certifying", a.certifying},
          {"pass", a.pass()},
          {"set_size", {{"min", a.min_size}, {"max", a.max_size}, {"total", a.total_size}}},
          {"max_multiplicity", a.max_multiplicity},
          {"witness", a.witness},
          {"max_tv", rational_json(a.max_tv)},
          {"subset_tv", tvs},
          {"adversary", {{"set_size", a.adversary_set_size}, {"success", rational_json(a.adversary_success)}}},
          {"wrap_k", a.wrap_k},
          {"checks", to_json(a.checks)}};
}

nlohmann::json to_json(const ExplicitCfg& c) {
  return {{"n", c.n},   {"d", c.d},         {"eps", c.eps},       {"inner_key", bits::to_hex(c.inner_key)},
          {"n1", c.n1()}, {"n2", c.n2()},   {"limb_bits", c.limb_bits()}, {"limbs", ExplicitCfg::limbs},
          {"eps0", c.eps0()}, {"inner_out", c.inner_out()}, {"inner", "keyed"}};
}

ExplicitCfg explicit_cfg_from_json(const nlohmann::json& j) {
  ExplicitCfg c;
  c.n = j.at("n").get<unsigned>();
  c.d = j.at("d").get<unsigned>();
  c.eps = j.at("eps").get<double>();
  c.inner_key = bits::from_hex(j.at("inner_key").get<std::string>());
  c.validate();
  return c;
}

nlohmann::json to_json(const WrapCertificate& c) {
  return {{"extractor", c.extractor},
          {"n", c.n},
          {"d", c.d},
          {"m", c.m},
          {"eps", c.eps},
          {"R", c.R},
          {"k", c.k},
          {"position3_smooth_bits", c.position3_smooth_bits},
          {"worst_position12_tv", rational_json(c.worst_position12_tv)},
          {"position12_tables", c.position12_tables},
          {"verified", c.verified()},
          {"checks", to_json(c.checks)}};
}

}  // namespace condense
