#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "condense/sources.hpp"
#include "oracles.hpp"

using namespace condense;

namespace {

BlockFunctionTable projection(unsigned n, unsigned ell, unsigned block) {
  return BlockFunctionTable::callback(n, ell, n, [=](std::uint64_t x) { return bits::block_at(x, n, ell, block); });
}

std::vector<std::vector<unsigned>> all_good_sets(unsigned ell) {
  std::vector<std::vector<unsigned>> out;
  for (unsigned m = 1; m < (1u << ell); ++m) {
    std::vector<unsigned> s;
    for (unsigned i = 0; i < ell; ++i)
      if (m >> i & 1) s.push_back(i);
    out.push_back(s);
  }
  return out;
}

}  // namespace

TEST(SourcesTest, FunctionTableBasics) {
  std::mt19937_64 rng(50);
  auto f = BlockFunctionTable::random(3, 2, 5, rng);
  EXPECT_TRUE(f.is_dense());
  std::vector<std::uint64_t> blocks{5, 2};
  EXPECT_EQ(f.eval(blocks), f.table()[(5 << 3) | 2]);
  EXPECT_THROW(f.eval(std::vector<std::uint64_t>{8, 0}), std::invalid_argument);
  EXPECT_THROW(BlockFunctionTable::dense(2, 2, 1, std::vector<std::uint32_t>(16, 2)), std::invalid_argument);
  EXPECT_THROW(BlockFunctionTable::random(9, 3, 1, rng), std::length_error);
  auto g = BlockFunctionTable::callback(2, 2, 1, [](std::uint64_t) { return 3; });
  EXPECT_THROW(g(0), std::logic_error);
}

TEST(SourcesTest, BytesRoundTrip) {
  std::mt19937_64 rng(51);
  auto f = BlockFunctionTable::random(2, 3, 12, rng);
  auto raw = function_to_bytes(f);
  EXPECT_EQ(raw.size(), 64u * 2);
  EXPECT_EQ(raw[0] | (raw[1] << 8), static_cast<int>(f.table()[0]));
  EXPECT_EQ(function_from_bytes(2, 3, 12, raw).table(), f.table());
  raw.pop_back();
  EXPECT_THROW(function_from_bytes(2, 3, 12, raw), std::invalid_argument);
}

TEST(SourcesTest, ValidationRejectsMalformedDescriptions) {
  FiShelaDesc d{2, 3, {0, 2}, {{1, BadBlock::adaptive(std::vector<std::uint64_t>(16, 0))}}};
  EXPECT_THROW(d.validate(), std::invalid_argument);  // block 1 may only read 2 bits
  d.bad[1] = BadBlock::adaptive(std::vector<std::uint64_t>(4, 0));
  EXPECT_NO_THROW(d.validate());
  d.bad[2] = BadBlock::fixed(0);
  EXPECT_THROW(d.validate(), std::invalid_argument);
  FiShelaDesc unsorted{2, 2, {1, 0}, {}};
  EXPECT_THROW(unsorted.validate(), std::invalid_argument);
  NosfDesc nd{2, 2, {1}, {{0, std::vector<std::uint64_t>(4, 7)}}};
  EXPECT_THROW(nd.validate(), std::invalid_argument);
}

TEST(SourcesTest, AllGoodProjectionIsUniform) {
  FiShelaDesc d{3, 2, {0, 1}, {}};
  EXPECT_EQ(exact_output_dist(projection(3, 2, 0), d), Dist::uniform(3));
}

TEST(SourcesTest, FixedBlockProjectionIsPoint) {
  FiShelaDesc d{3, 2, {0}, {{1, BadBlock::fixed(6)}}};
  EXPECT_EQ(exact_output_dist(projection(3, 2, 1), d), Dist::point(3, 6));
}

TEST(SourcesTest, ExactAgreesWithSampling) {
  std::mt19937_64 rng(52);
  auto f = BlockFunctionTable::random(2, 3, 3, rng);
  auto src = random_fishela(2, 3, {0, 2}, rng);
  auto exact = exact_output_dist(f, src);
  const int samples = 100000;
  std::vector<int> hits(8, 0);
  for (int i = 0; i < samples; ++i) ++hits[f.eval(sample(src, rng))];
  for (std::uint64_t z = 0; z < 8; ++z) {
    double p = to_double(exact.prob(z));
    double sigma = std::sqrt(samples * p * (1 - p));
    EXPECT_LE(std::abs(hits[z] - samples * p), 3 * sigma + 1e-9) << "z=" << z;
  }
}

TEST(SourcesTest, DenseAndCallbackAgree) {
  std::mt19937_64 rng(53);
  for (int trial = 0; trial < 20; ++trial) {
    auto f = BlockFunctionTable::random(2, 3, 4, rng);
    auto cb = BlockFunctionTable::callback(2, 3, 4, [&f](std::uint64_t x) { return f(x); });
    auto src = random_fishela(2, 3, {1}, rng);
    EXPECT_EQ(exact_output_dist(f, src), exact_output_dist(cb, src));
    EXPECT_EQ(cb.to_dense().table(), f.table());
  }
}

TEST(SourcesTest, NosfOutputMatchesFishelaForm) {
  std::mt19937_64 rng(54);
  for (int trial = 0; trial < 20; ++trial) {
    auto f = BlockFunctionTable::random(2, 3, 3, rng);
    auto src = random_fishela(2, 3, {0, 2}, rng);
    auto nosf = to_nosf(src);
    EXPECT_EQ(exact_output_dist(f, src), exact_output_dist(f, nosf));
    auto back = as_fishela(nosf);
    ASSERT_TRUE(back.has_value());
    EXPECT_EQ(joint_dist(*back), joint_dist(src));
  }
}

TEST(SourcesTest, DeterministicIndexGivesOneComponent) {
  std::mt19937_64 rng(55);
  ShelaDesc s{2, 3, 1, {{{1}, Rational(1)}}, {{{1}, random_fishela(2, 3, {1}, rng)}}};
  auto mix = decompose_shela(s);
  ASSERT_EQ(mix.components.size(), 1u);
  EXPECT_EQ(mix.components[0].first, Rational(1));
  EXPECT_EQ(mix.components[0].second, s.per_tuple.at({1}));
}

TEST(SourcesTest, TwoTupleMixtureIsExact) {
  std::mt19937_64 rng(56);
  ShelaDesc s{2, 3, 2, {}, {}};
  for (std::vector<unsigned> t : {std::vector<unsigned>{0, 1}, std::vector<unsigned>{1, 2}}) {
    s.index_dist[t] = make_rational(1, 2);
    s.per_tuple[t] = random_fishela(2, 3, t, rng);
  }
  auto f = BlockFunctionTable::random(2, 3, 4, rng);
  auto mix = decompose_shela(s);
  EXPECT_EQ(mix.components.size(), 2u);
  EXPECT_EQ(exact_output_dist(f, mix), oracle::shela_output_bruteforce(f, s));
}

TEST(SourcesTest, RandomShelaMixtureIdentity) {
  std::mt19937_64 rng(57);
  for (int trial = 0; trial < 30; ++trial) {
    auto s = random_shela(2, 3, 1 + trial % 3, 1 + rng() % 3, rng);
    auto f = BlockFunctionTable::random(2, 3, 5, rng);
    EXPECT_EQ(exact_output_dist(f, decompose_shela(s)), oracle::shela_output_bruteforce(f, s));
  }
}

TEST(SourcesTest, ShelaValidation) {
  std::mt19937_64 rng(58);
  auto s = random_shela(2, 3, 2, 2, rng);
  auto bad = s;
  bad.index_dist.begin()->second += 1;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  auto mismatched = s;
  mismatched.per_tuple.begin()->second.good = {0};
  EXPECT_THROW(mismatched.validate(), std::invalid_argument);
}

TEST(SourcesTest, UniformFishelaIsAlmostCgExhaustively) {
  std::mt19937_64 rng(59);
  for (unsigned n = 1; n <= 3; ++n)
    for (unsigned ell = 1; ell <= 3; ++ell)
      for (auto& good : all_good_sets(ell))
        for (int rep = 0; rep < 3; ++rep) {
          auto src = random_fishela(n, ell, good, rng);
          EXPECT_TRUE(check_almost_cg(src, n));
        }
}

TEST(SourcesTest, CopiedBlockIsNotAlmostCg) {
  // block 1 is labelled good but copies block 0
  std::map<std::uint64_t, Rational> mass;
  for (std::uint64_t a = 0; a < 4; ++a) mass[(a << 2) | a] = make_rational(1, 4);
  Dist joint(4, mass);
  EXPECT_FALSE(check_almost_cg(joint, 2, 2, {0, 1}, 0.5));
  EXPECT_TRUE(check_almost_cg(joint, 2, 2, {0}, 2.0));
  EXPECT_DOUBLE_EQ(min_conditional_entropy(joint, 2, 2, {0, 1}), 0.0);
}

TEST(SourcesTest, AlmostCgMatchesConditionalBruteForce) {
  std::mt19937_64 rng(60);
  for (int trial = 0; trial < 60; ++trial) {
    unsigned ell = 2 + trial % 2;
    auto sets = all_good_sets(ell);
    auto good = sets[rng() % sets.size()];
    Dist joint = trial % 2 ? joint_dist(random_fishela(2, ell, good, rng)) : joint_dist(random_nosf(2, ell, good, rng));
    EXPECT_NEAR(min_conditional_entropy(joint, 2, ell, good),
                oracle::conditional_entropy_bruteforce(joint, 2, ell, good), 1e-12);
  }
}

TEST(SourcesTest, AlmostCgIffFishelaExhaustively) {
  // uniform almost-CG with k = n coincides with uniform fiSHELA
  std::mt19937_64 rng(61);
  for (unsigned n = 1; n <= 3; ++n)
    for (unsigned ell = 2; ell <= 3; ++ell)
      for (auto& good : all_good_sets(ell))
        for (int rep = 0; rep < 4; ++rep) {
          NosfDesc src = rep % 2 ? to_nosf(random_fishela(n, ell, good, rng)) : random_nosf(n, ell, good, rng);
          EXPECT_EQ(check_almost_cg(src, n), as_fishela(src).has_value());
        }
}

TEST(SourcesTest, NosfReadingLaterBlockIsNotFishela) {
  NosfDesc src{2, 3, {0, 2}, {}};
  src.bad[1].resize(16);
  for (std::uint64_t gp = 0; gp < 16; ++gp) src.bad[1][gp] = gp & 3;  // copies block 2
  EXPECT_FALSE(as_fishela(src).has_value());
  EXPECT_FALSE(check_almost_cg(src, 2));
}

TEST(SourcesTest, SamplingIsReproducible) {
  std::mt19937_64 rng(62);
  auto src = random_fishela(3, 3, {0, 2}, rng);
  std::mt19937_64 a(7), b(7);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(sample(src, a), sample(src, b));
}

TEST(SourcesTest, SampledGoodMarginalsAreUniform) {
  FiShelaDesc src{2, 3, {0, 2}, {{1, BadBlock::fixed(3)}}};
  std::mt19937_64 rng(63);
  const int samples = 100000;
  std::vector<std::vector<int>> hits(3, std::vector<int>(4, 0));
  for (int i = 0; i < samples; ++i) {
    auto x = sample(src, rng);
    for (int j = 0; j < 3; ++j) ++hits[j][x[j]];
  }
  double mean = samples / 4.0, sigma = std::sqrt(samples * 0.25 * 0.75);
  for (int j : {0, 2})
    for (int v = 0; v < 4; ++v) EXPECT_LE(std::abs(hits[j][v] - mean), 4 * sigma);
  EXPECT_EQ(hits[1][3], samples);
}

TEST(SourcesTest, JsonRoundTrip) {
  std::mt19937_64 rng(64);
  auto f = BlockFunctionTable::random(2, 2, 3, rng);
  EXPECT_EQ(function_from_json(to_json(f)).table(), f.table());
  auto d = random_fishela(2, 3, {1}, rng);
  EXPECT_EQ(fishela_from_json(to_json(d)), d);
  auto nd = random_nosf(2, 3, {0, 1}, rng);
  EXPECT_EQ(nosf_from_json(to_json(nd)), nd);
  EXPECT_TRUE(std::holds_alternative<NosfDesc>(source_from_json(to_json(AnySource(nd)))));
  auto s = random_shela(2, 3, 2, 3, rng);
  auto back = shela_from_json(to_json(s));
  EXPECT_EQ(back.index_dist, s.index_dist);
  EXPECT_EQ(back.per_tuple, s.per_tuple);
  auto mix = decompose_shela(s);
  EXPECT_EQ(mixture_from_json(to_json(mix)).components, mix.components);
}
