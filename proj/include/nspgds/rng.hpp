#pragma once

#include <cstdint>

namespace nspgds {

// Variable tags for counter-based stream derivation. Every random draw in
// the sampler owns a stream keyed on (seed, tag, flat index, sweep), so the
// sequence of uniforms consumed by one draw never depends on how loop
// iterations are scheduled across threads. Single- and multi-threaded runs
// are bit-identical.
enum class Var : uint32_t {
  Init = 1,
  DataGen,
  Impute,
  Alloc,
  Phi,
  Delta,
  LRow,
  LT1,
  Q,
  H,
  G,
  GSplit,
  Alpha,
  CRate,
  Psi,
  GammaIK,
  Pi,
  Eta,
  Xi,
  Nu,
  Beta,
  Theta,
  Mask,
  Test,
};

inline uint64_t mix64(uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Counter-based stream: a SplitMix64 sequence whose starting state is a hash
// of (seed, stream id). Identical keys replay identical sequences; distinct
// keys give statistically independent sequences.
class RngStream {
 public:
  RngStream(uint64_t seed, uint64_t stream_id)
      : state_(mix64(mix64(seed) ^ mix64(stream_id ^ 0xA5A5A5A5DEADBEEFull))) {}

  RngStream(uint64_t seed, Var tag, uint64_t index, uint64_t sweep)
      : RngStream(seed, derive_stream_id(tag, index, sweep)) {}

  static uint64_t derive_stream_id(Var tag, uint64_t index, uint64_t sweep) {
    uint64_t k = static_cast<uint64_t>(tag);
    k = mix64(k ^ (index * 0xD6E8FEB86659FD93ull));
    k = mix64(k ^ (sweep * 0xCA5A826395121157ull));
    return k;
  }

  uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ull;
    uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // Uniform on the open interval (0,1): (k + 0.5) * 2^-53 with k in [0, 2^53).
  double next_double() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

 private:
  uint64_t state_;
};

}  // namespace nspgds
