#pragma once

#include <array>
#include <cstdint>

#include <Eigen/Core>

namespace logz {

/// Philox4x32-10 block function (Salmon et al., counter-based RNG).
using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

inline PhiloxCounter philox4x32(PhiloxCounter c, PhiloxKey k) {
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = std::uint64_t{0xD2511F53u} * c[0];
    const std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * c[2];
    c = {static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ k[0], static_cast<std::uint32_t>(p1),
         static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ k[1], static_cast<std::uint32_t>(p0)};
    k[0] += 0x9E3779B9u;
    k[1] += 0xBB67AE85u;
  }
  return c;
}

/// Stateless Gaussian noise source for one (master_seed, phase, replicate)
/// triple. The key is a bijective mix of (master_seed, replicate) and the
/// counter is (step_lo, step_hi, phase, block), so two streams share a
/// (key, counter) pair only if their triples coincide. The normals for one
/// step come from a ziggurat sampler reading the 32-bit words of blocks
/// 0, 1, 2, ... of that step in order.
class GaussianStream {
 public:
  GaussianStream(std::uint64_t master_seed, std::uint32_t phase, std::uint32_t replicate);

  /// Standard normal vector for chain step `step`; the same step always
  /// gives the same vector.
  void fill(std::uint64_t step, Eigen::Ref<Eigen::VectorXd> out) const;

  /// Uniform in (0, 1) drawn from a block no call to fill() uses.
  double uniform(std::uint64_t step) const;

  const PhiloxKey& key() const { return key_; }
  PhiloxCounter counter(std::uint64_t step, std::uint32_t block) const;

  std::uint64_t master_seed() const { return master_seed_; }
  std::uint32_t phase() const { return phase_; }
  std::uint32_t replicate() const { return replicate_; }

 private:
  std::uint64_t master_seed_;
  std::uint32_t phase_;
  std::uint32_t replicate_;
  PhiloxKey key_;
};

}  // namespace logz
