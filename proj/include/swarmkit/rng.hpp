#pragma once

#include <array>
#include <concepts>
#include <cstdint>
#include <string_view>

namespace swarmkit {

/// Identifier recorded in run metadata. Changing the generator changes every
/// frozen trace, so bump this string together with the algorithm.
inline constexpr std::string_view kRngAlgorithm = "xoshiro256**/splitmix64-v1";

namespace detail {

constexpr std::uint64_t splitmix64(std::uint64_t& state) noexcept {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
  return (x << k) | (x >> (64 - k));
}

}  // namespace detail

/**
 * Deterministic random stream owned by one agent (particle, ant or run).
 *
 * The 256-bit xoshiro256** state is filled by a splitmix64 sequence whose
 * starting point mixes the seed and the stream id, so every (seed, stream_id)
 * pair names one reproducible sequence and no two streams share state.
 */
class RngStream {
 public:
  using result_type = std::uint64_t;

  constexpr RngStream(std::uint64_t seed, std::uint64_t stream_id) noexcept
      : seed_(seed), stream_id_(stream_id) {
    std::uint64_t mix = seed;
    const std::uint64_t seed_hash = detail::splitmix64(mix);
    std::uint64_t sm = seed_hash ^ (stream_id * 0xD1B54A32D192ED03ULL + 0x8BB84B93962EACC9ULL);
    // Discard one output so that stream_id differences are fully diffused.
    detail::splitmix64(sm);
    for (auto& word : state_) word = detail::splitmix64(sm);
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return ~result_type{0}; }

  constexpr result_type operator()() noexcept {
    const std::uint64_t result = detail::rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = detail::rotl(state_[3], 45);
    return result;
  }

  /// Uniform real in [0, 1) built from the top 53 bits.
  constexpr double next_uniform() noexcept {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
  }

  [[nodiscard]] constexpr std::uint64_t seed() const noexcept { return seed_; }
  [[nodiscard]] constexpr std::uint64_t stream_id() const noexcept { return stream_id_; }

  friend constexpr bool operator==(const RngStream&, const RngStream&) = default;

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::array<std::uint64_t, 4> state_{};
};

constexpr RngStream derive_stream(std::uint64_t seed, std::uint64_t stream_id) noexcept {
  return RngStream(seed, stream_id);
}

constexpr double next_uniform(RngStream& stream) noexcept { return stream.next_uniform(); }

/// Anything that hands out uniform draws in [0, 1). Tests plug in scripted
/// sources to force specific values of rand().
template <typename S>
concept UniformSource = requires(S& s) {
  { s.next_uniform() } -> std::convertible_to<double>;
};

}  // namespace swarmkit
