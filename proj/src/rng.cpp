#include "logz/rng.hpp"

#include <cmath>

#include <boost/random/normal_distribution.hpp>

namespace logz {

namespace {

constexpr std::uint32_t kUniformBlock = 0xFFFFFFFFu;

// splitmix64 finalizer; a bijection on 64-bit words.
std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

inline double to_unit(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits = ((static_cast<std::uint64_t>(hi) << 32) | lo) >> 11;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;  // strictly inside (0, 1)
}

// Uniform random bit generator over the words of consecutive blocks of one
// step; ziggurat rejections only push further along the block index. Blocks
// are produced four at a time so the independent Philox rounds overlap.
class StepWords {
 public:
  using result_type = std::uint32_t;
  // `expected_blocks` only decides how many blocks each refill computes.
  StepWords(PhiloxCounter start, PhiloxKey key, std::int64_t expected_blocks)
      : ctr_(start), key_(key), pending_(expected_blocks) {}
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return 0xFFFFFFFFu; }
  result_type operator()() {
    if (pos_ == filled_) {
      if (pending_ >= kBatch) {
        refill<kBatch>();
      } else {
        refill<1>();
      }
    }
    return words_[pos_++];
  }

 private:
  static constexpr int kBatch = 2;

  template <int B>
  void refill() {
    std::uint32_t c[B][4];
    for (int b = 0; b < B; ++b) {
      c[b][0] = ctr_[0];
      c[b][1] = ctr_[1];
      c[b][2] = ctr_[2];
      c[b][3] = ctr_[3] + static_cast<std::uint32_t>(b);
    }
    std::uint32_t k0 = key_[0], k1 = key_[1];
    for (int round = 0; round < 10; ++round) {
      for (int b = 0; b < B; ++b) {
        const std::uint64_t p0 = std::uint64_t{0xD2511F53u} * c[b][0];
        const std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * c[b][2];
        const std::uint32_t x1 = c[b][1], x3 = c[b][3];
        c[b][0] = static_cast<std::uint32_t>(p1 >> 32) ^ x1 ^ k0;
        c[b][1] = static_cast<std::uint32_t>(p1);
        c[b][2] = static_cast<std::uint32_t>(p0 >> 32) ^ x3 ^ k1;
        c[b][3] = static_cast<std::uint32_t>(p0);
      }
      k0 += 0x9E3779B9u;
      k1 += 0xBB67AE85u;
    }
    for (int b = 0; b < B; ++b)
      for (int w = 0; w < 4; ++w) words_[b * 4 + w] = c[b][w];
    ctr_[3] += B;
    pending_ -= B;
    filled_ = B * 4;
    pos_ = 0;
  }

  PhiloxCounter ctr_;
  PhiloxKey key_;
  std::int64_t pending_;
  std::uint32_t words_[kBatch * 4]{};
  int filled_ = 0;
  int pos_ = 0;
};

}  // namespace

GaussianStream::GaussianStream(std::uint64_t master_seed, std::uint32_t phase,
                               std::uint32_t replicate)
    : master_seed_(master_seed), phase_(phase), replicate_(replicate) {
  // The replicate goes through an odd multiplier (a bijection) and the sum
  // through mix64 (another bijection): distinct replicates under one seed
  // never share a key.
  const std::uint64_t z = mix64(master_seed + 0x9E3779B97F4A7C15ull * (static_cast<std::uint64_t>(replicate) + 1));
  key_ = {static_cast<std::uint32_t>(z), static_cast<std::uint32_t>(z >> 32)};
}

PhiloxCounter GaussianStream::counter(std::uint64_t step, std::uint32_t block) const {
  return {static_cast<std::uint32_t>(step), static_cast<std::uint32_t>(step >> 32), phase_, block};
}

void GaussianStream::fill(std::uint64_t step, Eigen::Ref<Eigen::VectorXd> out) const {
  StepWords words(counter(step, 0), key_, (out.size() + 1) / 2);
  boost::random::normal_distribution<double> normal;
  for (Eigen::Index j = 0; j < out.size(); ++j) out[j] = normal(words);
}

double GaussianStream::uniform(std::uint64_t step) const {
  const auto r = philox4x32(counter(step, kUniformBlock), key_);
  return to_unit(r[0], r[1]);
}

}  // namespace logz
