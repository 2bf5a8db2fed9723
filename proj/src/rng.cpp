#include "glfuse/rng.hpp"

#include "glfuse/errors.hpp"

namespace glfuse {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& lo, std::uint32_t& hi) {
  const std::uint64_t product = static_cast<std::uint64_t>(a) * b;
  lo = static_cast<std::uint32_t>(product);
  hi = static_cast<std::uint32_t>(product >> 32);
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                           std::array<std::uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kPhiloxW0;
      key[1] += kPhiloxW1;
    }
    std::uint32_t lo0, hi0, lo1, hi1;
    mulhilo(kPhiloxM0, ctr[0], lo0, hi0);
    mulhilo(kPhiloxM1, ctr[2], lo1, hi1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id) {}

RngStream::RngStream(const State& state)
    : seed_(state.seed), stream_id_(state.stream_id), block_(state.block), offset_(state.offset) {
  if (offset_ > 2) throw ParameterError("RngStream: corrupt state offset");
  if (offset_ < 2) {
    if (block_ == 0) throw ParameterError("RngStream: corrupt state (offset without block)");
    generate_block(block_ - 1);
  }
}

void RngStream::generate_block(std::uint64_t block_index) {
  const std::array<std::uint32_t, 4> ctr = {
      static_cast<std::uint32_t>(block_index), static_cast<std::uint32_t>(block_index >> 32),
      static_cast<std::uint32_t>(stream_id_), static_cast<std::uint32_t>(stream_id_ >> 32)};
  const std::array<std::uint32_t, 2> key = {static_cast<std::uint32_t>(seed_),
                                            static_cast<std::uint32_t>(seed_ >> 32)};
  const auto out = philox4x32_10(ctr, key);
  buffer_[0] = (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
  buffer_[1] = (static_cast<std::uint64_t>(out[3]) << 32) | out[2];
}

RngStream::result_type RngStream::operator()() {
  if (offset_ == 2) {
    generate_block(block_);
    ++block_;
    offset_ = 0;
  }
  return buffer_[offset_++];
}

double RngStream::uniform() {
  constexpr double kScale = 0x1.0p-53;
  return (static_cast<double>((*this)() >> 11) + 0.5) * kScale;
}

std::uint64_t stream_key(std::uint32_t domain, std::uint32_t case_id, std::uint32_t row,
                         std::uint32_t replicate, std::uint32_t model, std::uint32_t chain) {
  if (domain >= (1u << 8) || case_id >= (1u << 8) || row >= (1u << 12) ||
      replicate >= (1u << 20) || model >= (1u << 8) || chain >= (1u << 8)) {
    throw ParameterError("stream_key: field out of range");
  }
  return (static_cast<std::uint64_t>(domain) << 56) | (static_cast<std::uint64_t>(case_id) << 48) |
         (static_cast<std::uint64_t>(row) << 36) | (static_cast<std::uint64_t>(replicate) << 16) |
         (static_cast<std::uint64_t>(model) << 8) | chain;
}

}  // namespace glfuse
