// Small tour of the library: one adversary of each kind against a fixed
// function, then a sampled output-light extractor and its audit.

#include <cstdio>
#include <random>

#include "condense/condense.hpp"

using namespace condense;

int main() {
  // f(x1, x2, x3) = majority of the low bits, a natural one-bit candidate
  auto maj = BlockFunctionTable::callback(3, 3, 1, [](std::uint64_t x) {
    unsigned votes = (x & 1) + (x >> 3 & 1) + (x >> 6 & 1);
    return std::uint64_t{votes >= 2};
  });
  auto ex = build_shela23_extraction_adversary(maj.to_dense());
  std::printf("extraction: %-10s bias %s (floor 2/25)\n", ex.case_name.c_str(), fraction_string(ex.bias).c_str());

  // sum of blocks mod 64 over two 3-bit blocks, one good
  auto sum = BlockFunctionTable::callback(3, 2, 6, [](std::uint64_t x) { return ((x >> 3) + (x & 7) * 9) & 63; });
  auto c = build_1l_adversary(sum.to_dense(), 0.1);
  std::printf("(1,2):      %-10s smooth entropy %.3f <= claimed %.3f  verified=%d\n", c.case_name.c_str(),
              c.smooth_bits, c.claimed_bits, c.verified());

  std::mt19937_64 rng(1);
  auto f = BlockFunctionTable::random(4, 3, 6, rng);
  auto n23 = build_nosf23_adversary(f, 0.1);
  std::printf("(2,3)-NOSF: %-10s smooth entropy %.3f <= claimed %.3f  verified=%d\n", n23.case_name.c_str(),
              n23.smooth_bits, n23.claimed_bits, n23.verified());

  auto q = scaled_params(10, 8, 0.25, 10, 1.0 / 16, 0.5, 4.0 / 16 * 1024);
  auto cond = sample_output_light(q, 9);
  auto audit = audit_sampled(cond, q, 10, 3);
  std::printf("sampled:    N=2^10 M=2^10 d=%u, max multiplicity %llu, max subset TV %.4f\n", cond.d(),
              static_cast<unsigned long long>(audit.max_multiplicity), to_double(audit.max_tv));
  for (auto& ch : audit.checks) std::printf("  %-24s %s\n", ch.name.c_str(), ch.pass ? "pass" : "FAIL");
  return 0;
}
