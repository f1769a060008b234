#pragma once

#include <cstdint>
#include <random>

namespace netrisk {

// splitmix64; used to derive independent per-replication streams from one
// root seed so replication k is reproducible regardless of scheduling.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_stream_seed(std::uint64_t root_seed,
                                        std::uint64_t stream_index) {
  return splitmix64(splitmix64(root_seed) ^ splitmix64(stream_index * 2 + 1));
}

// Uniform[0,1) stream with an explicit 53-bit mantissa construction; the
// bit-stream is stable for a given (root seed, stream index) pair.
class UniformStream {
 public:
  UniformStream(std::uint64_t root_seed, std::uint64_t stream_index)
      : gen_(derive_stream_seed(root_seed, stream_index)) {}

  double next() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  std::uint64_t next_u64() { return gen_(); }

 private:
  std::mt19937_64 gen_;
};

}  // namespace netrisk
