#include "gumbelcf/rng.hpp"

#include <string>

#include "gumbelcf/digest.hpp"

namespace gumbelcf::rng {

namespace {

constexpr uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void mulhilo(uint32_t a, uint32_t b, uint32_t& hi, uint32_t& lo) {
  uint64_t p = static_cast<uint64_t>(a) * b;
  hi = static_cast<uint32_t>(p >> 32);
  lo = static_cast<uint32_t>(p);
}

inline std::array<uint32_t, 4> philox_round(const std::array<uint32_t, 4>& c,
                                            const std::array<uint32_t, 2>& k) {
  uint32_t hi0, lo0, hi1, lo1;
  mulhilo(kPhiloxM0, c[0], hi0, lo0);
  mulhilo(kPhiloxM1, c[2], hi1, lo1);
  return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
}

void append_le64(std::string& s, uint64_t v) {
  for (int i = 0; i < 8; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

}  // namespace

std::array<uint32_t, 4> philox4x32(const std::array<uint32_t, 4>& counter,
                                   const std::array<uint32_t, 2>& key) {
  std::array<uint32_t, 4> c = counter;
  std::array<uint32_t, 2> k = key;
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      k[0] += kPhiloxW0;
      k[1] += kPhiloxW1;
    }
    c = philox_round(c, k);
  }
  return c;
}

uint64_t UniformStream::next_u64() {
  uint64_t block = position_ >> 1;
  unsigned lane = static_cast<unsigned>(position_ & 1);
  ++position_;

  std::array<uint32_t, 4> counter = {
      static_cast<uint32_t>(block), static_cast<uint32_t>(block >> 32),
      static_cast<uint32_t>(nonce_), static_cast<uint32_t>(nonce_ >> 32)};
  std::array<uint32_t, 2> key = {static_cast<uint32_t>(key_),
                                 static_cast<uint32_t>(key_ >> 32)};
  std::array<uint32_t, 4> out = philox4x32(counter, key);
  if (lane == 0) {
    return static_cast<uint64_t>(out[0]) | (static_cast<uint64_t>(out[1]) << 32);
  }
  return static_cast<uint64_t>(out[2]) | (static_cast<uint64_t>(out[3]) << 32);
}

double UniformStream::next() {
  // (w + 0.5) * 2^-53 lies in [2^-54, 1 - 2^-54]: the open interval (0,1).
  uint64_t w = next_u64() >> 11;
  return (static_cast<double>(w) + 0.5) * 0x1p-53;
}

UniformStream derive_stream(uint64_t global_seed, std::string_view record_id,
                            std::string_view stage, uint64_t step) {
  std::string material;
  material.reserve(32 + record_id.size() + stage.size());
  append_le64(material, global_seed);
  append_le64(material, record_id.size());
  material.append(record_id);
  append_le64(material, stage.size());
  material.append(stage);
  append_le64(material, step);

  Digest d = sha256(material);
  auto le64_at = [&d](size_t off) {
    uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | d[off + static_cast<size_t>(i)];
    return v;
  };
  return UniformStream(le64_at(0), le64_at(8));
}

}  // namespace gumbelcf::rng
