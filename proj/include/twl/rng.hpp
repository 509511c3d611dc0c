#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace twl::rng {

// Independent stream families. Each family keys its streams by up to two
// 64-bit identifiers (path index, site index, ...).
enum class Domain : std::uint32_t {
  kWalkIncrements = 1,
  kBrownianIncrements = 2,
  kEnvironmentSites = 3,
  kEnvironmentSeed = 4,
  kRwreSteps = 5,
  kPotentialCells = 6,
  kPotentialSeed = 7,
  kDiffusionSteps = 8,
  kTestData = 9,
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

// Derives a child seed from (seed, domain, id). Used to give every
// annealed replica its own environment.
std::uint64_t derive_seed(std::uint64_t seed, Domain domain,
                          std::uint64_t id) noexcept;

// Philox4x32-10 counter-based generator. The state is (key, counter); every
// 128-bit block is a pure function of both, so stream position can be set
// directly instead of advanced.
class Philox4x32 {
 public:
  using Block = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Block generate(Block counter, Key key) noexcept;
};

// A UniformRandomBitGenerator over one Philox stream. The stream is
// identified by (seed, domain, id); the low 64 counter bits enumerate blocks.
class Stream {
 public:
  using result_type = std::uint64_t;

  Stream(std::uint64_t seed, Domain domain, std::uint64_t id) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept;

  // Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept;

  // Repositions the stream at the start of block `block`.
  void seek(std::uint64_t block) noexcept;

 private:
  Philox4x32::Key key_{};
  std::uint64_t id_ = 0;
  std::uint64_t block_ = 0;
  Philox4x32::Block buffer_{};
  int used_ = 2;  // 64-bit words consumed from buffer_
};

}  // namespace twl::rng
