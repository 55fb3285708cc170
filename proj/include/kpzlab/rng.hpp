#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace kpzlab {

// Splittable stream handle. Identical (seed, stream_id) pairs reproduce the
// same draw sequence bit-for-bit on one platform; distinct stream_ids give
// independent streams for the same seed. All replica parallelism derives its
// randomness from stream ids, never from scheduling.
struct RngStream {
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;

  RngStream with_stream(std::uint64_t id) const { return RngStream{seed, id}; }
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace detail

inline std::mt19937_64 make_engine(const RngStream& s) {
  std::uint64_t state = s.seed;
  std::uint64_t a = detail::splitmix64(state);
  state ^= 0xff51afd7ed558ccdULL * (s.stream_id + 1);
  std::uint64_t b = detail::splitmix64(state);
  std::uint64_t c = detail::splitmix64(state);
  std::uint64_t d = detail::splitmix64(state);
  std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32),
                    static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(c >> 32),
                    static_cast<std::uint32_t>(d), static_cast<std::uint32_t>(d >> 32)};
  return std::mt19937_64(seq);
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char ch : s) {
    h ^= static_cast<unsigned char>(ch);
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Stream id for (purpose, replica); keeps independent uses of one root seed
// from colliding when replicas are farmed out to workers.
inline std::uint64_t purpose_stream(std::string_view purpose, std::uint64_t replica) {
  return fnv1a64(purpose) + replica;
}

}  // namespace kpzlab
