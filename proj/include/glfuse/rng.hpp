#pragma once

#include <array>
#include <cstdint>

namespace glfuse {

/// Philox4x32-10 block function (Salmon et al., SC'11). Exposed for
/// known-answer testing.
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                           std::array<std::uint32_t, 2> key);

/// Counter-based random stream. The key is the run seed and the high half of
/// the 128-bit counter is the stream id, so streams with different ids never
/// overlap and a stream's output does not depend on any other stream.
///
/// Satisfies UniformRandomBitGenerator. Not thread-safe: one owner per stream.
class RngStream {
 public:
  using result_type = std::uint64_t;

  /// Complete serializable position of a stream.
  struct State {
    std::uint64_t seed = 0;
    std::uint64_t stream_id = 0;
    std::uint64_t block = 0;  // number of Philox blocks consumed
    std::uint32_t offset = 2; // next unused 64-bit word in the current block
    bool operator==(const State&) const = default;
  };

  RngStream(std::uint64_t seed, std::uint64_t stream_id);
  explicit RngStream(const State& state);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }

  result_type operator()();

  /// Uniform on the open interval (0, 1), 53 bits of resolution.
  double uniform();

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }
  State state() const { return {seed_, stream_id_, block_, offset_}; }

 private:
  void generate_block(std::uint64_t block_index);

  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t block_ = 0;
  std::uint32_t offset_ = 2;
  std::array<std::uint64_t, 2> buffer_{};
};

/// Top byte of a stream id: which part of the program owns the stream.
enum StreamDomain : std::uint32_t {
  kDomainFit = 1,      // chains of a `fit` run
  kDomainSimData = 2,  // synthetic panel generation
  kDomainSimFit = 3,   // chains fitted inside the simulation study
  kDomainPool = 4,     // synthetic sampling-variance pool
  kDomainOracle = 5,   // Metropolis oracle runs
};

/// Packs simulation coordinates into a collision-free stream id.
/// Field widths: domain 8, case 8, row 12, replicate 20, model 8, chain 8 bits.
std::uint64_t stream_key(std::uint32_t domain, std::uint32_t case_id, std::uint32_t row,
                         std::uint32_t replicate, std::uint32_t model, std::uint32_t chain);

}  // namespace glfuse
