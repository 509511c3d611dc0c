#include "twl/rng.hpp"

namespace twl::rng {

namespace {

constexpr std::uint32_t kMulA = 0xD2511F53;
constexpr std::uint32_t kMulB = 0xCD9E8D57;
constexpr std::uint32_t kWeylA = 0x9E3779B9;
constexpr std::uint32_t kWeylB = 0xBB67AE85;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi,
                    std::uint32_t& lo) noexcept {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

}  // namespace

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, Domain domain,
                          std::uint64_t id) noexcept {
  return splitmix64(splitmix64(seed ^ (static_cast<std::uint64_t>(domain) << 56)) ^
                    splitmix64(id + 0x632BE59BD9B4E019ULL));
}

Philox4x32::Block Philox4x32::generate(Block ctr, Key key) noexcept {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMulA, ctr[0], hi0, lo0);
    mulhilo(kMulB, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kWeylA;
    key[1] += kWeylB;
  }
  return ctr;
}

Stream::Stream(std::uint64_t seed, Domain domain, std::uint64_t id) noexcept
    : id_(id) {
  const std::uint64_t k =
      splitmix64(seed ^ (static_cast<std::uint64_t>(domain) << 56));
  key_ = {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
}

Stream::result_type Stream::operator()() noexcept {
  if (used_ == 2) {
    buffer_ = Philox4x32::generate(
        {static_cast<std::uint32_t>(block_),
         static_cast<std::uint32_t>(block_ >> 32),
         static_cast<std::uint32_t>(id_), static_cast<std::uint32_t>(id_ >> 32)},
        key_);
    ++block_;
    used_ = 0;
  }
  const std::uint64_t lo = buffer_[2 * used_];
  const std::uint64_t hi = buffer_[2 * used_ + 1];
  ++used_;
  return (hi << 32) | lo;
}

double Stream::uniform() noexcept {
  return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
}

void Stream::seek(std::uint64_t block) noexcept {
  block_ = block;
  used_ = 2;
}

}  // namespace twl::rng
