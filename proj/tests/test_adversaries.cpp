#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "condense/adversaries.hpp"
#include "oracles.hpp"

using namespace condense;

namespace {

BlockFunctionTable constant_fn(unsigned n, unsigned ell, unsigned t, std::uint32_t v) {
  return BlockFunctionTable::dense(n, ell, t, std::vector<std::uint32_t>(std::size_t{1} << (n * ell), v));
}

BlockFunctionTable from_blocks(unsigned n, unsigned t, std::function<std::uint64_t(std::uint64_t, std::uint64_t, std::uint64_t)> g) {
  return BlockFunctionTable::callback(n, 3, t, [=](std::uint64_t x) {
    return g(bits::block_at(x, n, 3, 0), bits::block_at(x, n, 3, 1), bits::block_at(x, n, 3, 2));
  }).to_dense();
}

Dist brute_output(const BlockFunctionTable& f, const CertSource& src) {
  if (auto* d = std::get_if<FiShelaDesc>(&src)) return oracle::fishela_output_bruteforce(f, *d);
  if (auto* d = std::get_if<NosfDesc>(&src)) return oracle::nosf_output_bruteforce(f, *d);
  std::vector<std::pair<Rational, Dist>> parts;
  for (auto& [w, d] : std::get<FiShelaMixture>(src).components)
    parts.emplace_back(w, oracle::fishela_output_bruteforce(f, d));
  return mixture(parts);
}

// Re-derives everything the certificate states from the brute-force output.
void expect_certificate_holds(const BlockFunctionTable& f, const CondenseCertificate& c, double eps) {
  auto out = brute_output(f, c.source);
  EXPECT_EQ(out, c.output);
  EXPECT_EQ(out.prob_of(c.heavy_set), c.hit_prob);
  double oracle_bits = oracle::smooth_entropy_bisect(out, eps);
  EXPECT_NEAR(oracle_bits, c.smooth_bits, 1e-6);
  EXPECT_LE(oracle_bits, c.claimed_bits + 1e-9);
  EXPECT_LE(oracle_bits, c.bound_bits + 1e-6);
  EXPECT_TRUE(c.verified()) << to_json(c)["checks"].dump();
}

const double kDelta1l = std::log2(2 * 1.1 / (0.9 * 0.9));

}  // namespace

TEST(OneEllTest, BaseCaseIsUniformSource) {
  std::mt19937_64 rng(70);
  auto f = BlockFunctionTable::random(4, 1, 3, rng);
  auto c = build_1l_adversary(f, 0.1);
  auto& src = std::get<FiShelaDesc>(c.source);
  EXPECT_EQ(src.good, std::vector<unsigned>{0});
  EXPECT_TRUE(src.bad.empty());
  EXPECT_EQ(c.case_name, "base");
  EXPECT_EQ(c.hit_prob, Rational(1));
  EXPECT_LE(c.smooth_bits, 3.0 + 1e-9);
  expect_certificate_holds(f, c, 0.1);
}

TEST(OneEllTest, ConstantFunctionFixesEverything) {
  auto f = constant_fn(2, 3, 4, 9);
  auto c = build_1l_adversary(f, 0.1);
  EXPECT_EQ(c.heavy_set, std::vector<std::uint64_t>{9});
  EXPECT_EQ(c.hit_prob, Rational(1));
  EXPECT_EQ(c.case_name, "fixed_then_base");
  EXPECT_EQ(c.detail["recursion_depth"], 2);
  expect_certificate_holds(f, c, 0.1);
}

TEST(OneEllTest, DeltaMatchesClosedForm) {
  std::mt19937_64 rng(71);
  auto c = build_1l_adversary(BlockFunctionTable::random(3, 2, 6, rng), 0.1);
  EXPECT_NEAR(c.delta, kDelta1l, 1e-12);
  EXPECT_NEAR(c.claimed_bits, 3.0 + kDelta1l, 1e-12);
  EXPECT_NEAR(c.delta_terms["cover_term"].get<double>(), kDelta1l, 1e-12);
  EXPECT_THROW(build_1l_adversary(BlockFunctionTable::random(3, 2, 6, rng), 1.0), std::invalid_argument);
}

TEST(OneEllTest, RandomFunctionsTwoBlocks) {
  std::mt19937_64 rng(72);
  for (int i = 0; i < 30; ++i) {
    auto f = BlockFunctionTable::random(3, 2, 6, rng);
    auto c = build_1l_adversary(f, 0.1);
    expect_certificate_holds(f, c, 0.1);
    EXPECT_LE(c.smooth_bits, 6.0 / 2 + kDelta1l + 1e-9);
  }
}

TEST(OneEllTest, RandomFunctionsThreeBlocks) {
  std::mt19937_64 rng(73);
  std::map<std::string, int> cases;
  for (int i = 0; i < 30; ++i) {
    auto f = BlockFunctionTable::random(3, 3, 6, rng);
    auto c = build_1l_adversary(f, 0.1);
    ++cases[c.case_name];
    expect_certificate_holds(f, c, 0.1);
    EXPECT_LE(c.smooth_bits, 6.0 / 3 + kDelta1l + 1e-9);
    EXPECT_LE(c.detail["recursion_depth"].get<unsigned>(), 2u);
  }
  EXPECT_GT(cases["cover"], 0);
}

TEST(SplitTest, LayoutIsEven) {
  EXPECT_EQ(split_layout(4, 2), (std::vector<unsigned>{2, 2}));
  EXPECT_EQ(split_layout(5, 2), (std::vector<unsigned>{3, 2}));
  EXPECT_EQ(split_layout(7, 3), (std::vector<unsigned>{3, 2, 2}));
  EXPECT_THROW(split_layout(1, 2), std::invalid_argument);
}

TEST(SplitTest, EachInnerBlockSplitsInTwo) {
  std::mt19937_64 rng(74);
  auto inner = random_fishela(4, 2, {1}, rng);
  auto mix = split_blocks_reduction(inner, 2, 4, 2);
  ASSERT_EQ(mix.components.size(), 1u);
  EXPECT_EQ(mix.components[0].second.good, (std::vector<unsigned>{2, 3}));
  EXPECT_EQ(mix.components[0].second.g(), 2u);
}

TEST(SplitTest, UniformInnerGivesAllGood) {
  FiShelaDesc inner{4, 1, {0}, {}};
  auto mix = split_blocks_reduction(inner, 2, 2, 2);
  ASSERT_EQ(mix.components.size(), 1u);
  EXPECT_EQ(mix.components[0].second.good, (std::vector<unsigned>{0, 1}));
  EXPECT_TRUE(mix.components[0].second.bad.empty());
}

TEST(SplitTest, PreconditionsAreChecked) {
  FiShelaDesc inner{3, 2, {0}, {{1, BadBlock::fixed(0)}}};
  EXPECT_THROW(split_blocks_reduction(inner, 2, 4, 2), std::invalid_argument);  // 2*2 > 3
  EXPECT_THROW(split_blocks_reduction(inner, 3, 4, 1), std::invalid_argument);  // 3/4 > 1/2
}

TEST(SplitTest, DistributionsAgreeExactly) {
  std::mt19937_64 rng(75);
  for (int i = 0; i < 20; ++i) {
    auto h = BlockFunctionTable::random(2, 4, 4, rng);
    auto inner = random_fishela(4, 2, {static_cast<unsigned>(i % 2)}, rng);
    auto mix = split_blocks_reduction(inner, 2, 4, 2);
    EXPECT_EQ(exact_output_dist(h, mix), exact_output_dist(split_function(h, 2, 4), inner));
  }
}

TEST(SplitTest, DiscardedBitsBecomeAMixture) {
  std::mt19937_64 rng(76);
  for (int i = 0; i < 10; ++i) {
    auto h = BlockFunctionTable::random(1, 5, 3, rng);
    auto inner = random_fishela(4, 2, {0}, rng);
    auto mix = split_blocks_reduction(inner, 2, 5, 1);
    EXPECT_EQ(mix.components.size(), 2u);  // block 0 keeps 3 of 4 bits
    EXPECT_EQ(exact_output_dist(h, mix), exact_output_dist(split_function(h, 2, 4), inner));
  }
}

TEST(SplitTest, RateAdversaryCertifies) {
  std::mt19937_64 rng(77);
  for (int i = 0; i < 10; ++i) {
    auto h = BlockFunctionTable::random(2, 4, 4, rng);
    auto c = build_shela_rate_adversary(h, 2, 0.1);
    EXPECT_NEAR(c.claimed_bits, 4.0 / 2 + kDelta1l, 1e-12);
    expect_certificate_holds(h, c, 0.1);
  }
}

TEST(ScaleUpTest, FactorOneIsIdentity) {
  std::mt19937_64 rng(78);
  auto f = BlockFunctionTable::random(2, 3, 4, rng);
  auto h = scale_up_reduction(f, 1);
  EXPECT_EQ(h.n(), 2u);
  EXPECT_EQ(h.table(), f.table());
}

TEST(ScaleUpTest, ParityIgnoresBlockBoundaries) {
  auto parity = BlockFunctionTable::callback(2, 6, 1, [](std::uint64_t x) { return std::popcount(x) & 1; });
  auto h = scale_up_reduction(parity, 3);
  EXPECT_EQ(h.n(), 6u);
  EXPECT_EQ(h.ell(), 2u);
  for (std::uint64_t x = 0; x < 4096; x += 7) EXPECT_EQ(h(x), static_cast<std::uint64_t>(std::popcount(x) & 1));
}

TEST(ScaleUpTest, ReplayMatchesBitForBit) {
  std::mt19937_64 rng(79);
  auto f = BlockFunctionTable::random(2, 6, 5, rng);
  auto h = scale_up_reduction(f, 2);
  for (int i = 0; i < 10000; ++i) {
    std::vector<std::uint64_t> big(3), small;
    for (auto& b : big) b = rng() & 15;
    for (auto b : big) {
      small.push_back(b >> 2);
      small.push_back(b & 3);
    }
    ASSERT_EQ(h.eval(big), f.eval(small));
  }
}

TEST(ScaleUpTest, PartitionPreservesOutputs) {
  std::mt19937_64 rng(80);
  for (int i = 0; i < 10; ++i) {
    auto f = BlockFunctionTable::random(2, 6, 4, rng);
    auto src = random_fishela(4, 3, {0, 2}, rng);
    auto part = partition_source(src, 2);
    EXPECT_EQ(part.g(), 4u);
    EXPECT_EQ(part.good, (std::vector<unsigned>{0, 1, 4, 5}));
    EXPECT_EQ(exact_output_dist(f, part), exact_output_dist(scale_up_reduction(f, 2), src));
    auto nsrc = random_nosf(4, 3, {1, 2}, rng);
    EXPECT_EQ(exact_output_dist(f, partition_source(nsrc, 2)), exact_output_dist(scale_up_reduction(f, 2), nsrc));
  }
}

TEST(Nosf23Test, ConstantsAtZeroEps) {
  auto k = nosf23_constants(0.0);
  EXPECT_DOUBLE_EQ(k.alpha, 0.25);
  EXPECT_DOUBLE_EQ(k.c0, 1.0 / 8);
  EXPECT_DOUBLE_EQ(k.c2, 9.0 / 32);
  EXPECT_DOUBLE_EQ(k.c4, 15.0 / 16);
  EXPECT_DOUBLE_EQ(k.c3, k.c6);
  EXPECT_DOUBLE_EQ(k.c3, 1 - k.c5);
  EXPECT_TRUE(all_pass(k.inequalities));
}

TEST(Nosf23Test, ConstantInequalitiesAcrossEps) {
  for (double eps = 0.005; eps < 0.25; eps += 0.005) {
    auto k = nosf23_constants(eps);
    EXPECT_TRUE(all_pass(k.inequalities)) << eps << " " << to_json(k).dump();
  }
  EXPECT_THROW(nosf23_constants(0.25), std::invalid_argument);
}

TEST(Nosf23Test, ConstantFunction) {
  auto f = constant_fn(3, 3, 6, 5);
  auto c = build_nosf23_adversary(f, 0.1);
  EXPECT_EQ(c.heavy_set, std::vector<std::uint64_t>{5});
  EXPECT_EQ(c.hit_prob, Rational(1));
  expect_certificate_holds(f, c, 0.1);
}

TEST(Nosf23Test, RandomFunctions) {
  std::mt19937_64 rng(81);
  for (int i = 0; i < 30; ++i) {
    auto f = BlockFunctionTable::random(4, 3, 6, rng);
    auto c = build_nosf23_adversary(f, 0.1);
    expect_certificate_holds(f, c, 0.1);
    EXPECT_LE(c.smooth_bits, 4.0 + c.delta + 1e-9);
  }
}

TEST(Nosf23Test, CaseThreeSteersTheMiddleBlock) {
  // pairs (x1, x2) see two outputs while pairs (x1, x3) see 16, and the
  // steering value for block 2 has to undo the low bit of x3
  auto f = from_blocks(4, 15, [](auto a, auto b, auto c) { return (a << 4) | (b ^ (c & 1)); });
  auto c = build_nosf23_adversary(f, 0.1);
  EXPECT_EQ(c.case_name, "case3");
  EXPECT_TRUE(c.nosf_only);
  ASSERT_TRUE(std::holds_alternative<NosfDesc>(c.source));
  EXPECT_FALSE(as_fishela(std::get<NosfDesc>(c.source)).has_value());
  expect_certificate_holds(f, c, 0.1);
}

TEST(Nosf23Test, CaseFourFixesTheFirstBlock) {
  auto f = from_blocks(4, 15, [](auto a, auto, auto) { return a * 977; });
  auto c = build_nosf23_adversary(f, 0.1);
  EXPECT_EQ(c.case_name, "case4_to_1");
  auto& src = std::get<FiShelaDesc>(c.source);
  EXPECT_EQ(src.good, (std::vector<unsigned>{1, 2}));
  EXPECT_EQ(c.heavy_set.size(), 1u);
  expect_certificate_holds(f, c, 0.1);
}

TEST(Nosf23Test, RejectsBadArguments) {
  std::mt19937_64 rng(82);
  auto f = BlockFunctionTable::random(2, 3, 3, rng);
  EXPECT_THROW(build_nosf23_adversary(f, 0.0), std::invalid_argument);
  EXPECT_THROW(build_nosf23_adversary(f, 0.3), std::invalid_argument);
  EXPECT_THROW(build_nosf23_adversary(BlockFunctionTable::random(2, 2, 3, rng), 0.1), std::invalid_argument);
}

TEST(Nosf23Test, ScaledRecipeCertifies) {
  std::mt19937_64 rng(83);
  for (int i = 0; i < 5; ++i) {
    auto h = BlockFunctionTable::random(2, 6, 6, rng);
    auto c = build_nosf_scaled_adversary(h, 2, 0.1);
    expect_certificate_holds(h, c, 0.1);
  }
}

TEST(ExtractionTest, ConstantsGiveEightHundredths) {
  ExtractionConstants k;
  EXPECT_EQ(k.c2(), make_rational(3, 5));
  EXPECT_EQ(k.floor_bias(), make_rational(2, 25));
}

TEST(ExtractionTest, ConstantFunction) {
  auto r = build_shela23_extraction_adversary(constant_fn(3, 3, 1, 0));
  EXPECT_EQ(r.bias, make_rational(1, 2));
  EXPECT_TRUE(r.verified());
}

TEST(ExtractionTest, RandomFunctions) {
  std::mt19937_64 rng(84);
  for (int i = 0; i < 100; ++i) {
    auto f = BlockFunctionTable::random(4, 3, 1, rng);
    auto r = build_shela23_extraction_adversary(f);
    EXPECT_GE(r.bias, make_rational(2, 25));
    EXPECT_TRUE(r.verified());
    auto out = oracle::fishela_output_bruteforce(f, r.source);
    EXPECT_EQ(abs(out.prob(0) - make_rational(1, 2)), r.bias);
  }
}

TEST(ExtractionTest, CaseThreeOneSteersBlockTwo) {
  auto f = from_blocks(3, 1, [](auto, auto b, auto) { return b & 1; });
  auto r = build_shela23_extraction_adversary(f);
  EXPECT_EQ(r.case_name, "case3.1");
  EXPECT_EQ(r.bias, make_rational(1, 2));
  EXPECT_TRUE(r.verified());
}

TEST(ExtractionTest, CaseThreeTwoFixesBlockOne) {
  auto f = from_blocks(3, 1, [](auto a, auto, auto) { return a & 1; });
  auto r = build_shela23_extraction_adversary(f);
  EXPECT_EQ(r.case_name, "case3.2");
  EXPECT_EQ(r.source.bad.at(0).value & 1, 0u);  // label 0 preferred
  EXPECT_EQ(r.bias, make_rational(1, 2));
}

TEST(ExtractionTest, RejectsWideOutputs) {
  std::mt19937_64 rng(85);
  EXPECT_THROW(build_shela23_extraction_adversary(BlockFunctionTable::random(2, 3, 2, rng)), std::invalid_argument);
}

TEST(CertificateTest, JsonCarriesTheEvidence) {
  std::mt19937_64 rng(86);
  auto c = build_1l_adversary(BlockFunctionTable::random(2, 2, 4, rng), 0.1);
  auto j = to_json(c);
  for (auto key : {"source", "heavy_set", "hit_prob", "bound_bits", "claimed_bits", "checks", "output"})
    EXPECT_TRUE(j.contains(key)) << key;
  EXPECT_EQ(parse_rational(j["hit_prob"].get<std::string>()), c.hit_prob);
  EXPECT_TRUE(std::holds_alternative<FiShelaDesc>(source_from_json(j["source"])));
}
