#include "gumbelcf/digest.hpp"

#include <openssl/evp.h>

#include <cstdio>

#include "gumbelcf/errors.hpp"

namespace gumbelcf {

Digest sha256(std::string_view data) {
  Digest out{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), out.data(), &len, EVP_sha256(), nullptr) != 1 ||
      len != out.size()) {
    throw Error("sha256: digest computation failed");
  }
  return out;
}

std::string to_hex(const Digest& d) {
  static const char* alphabet = "0123456789abcdef";
  std::string s;
  s.reserve(64);
  for (unsigned char b : d) {
    s.push_back(alphabet[b >> 4]);
    s.push_back(alphabet[b & 0x0F]);
  }
  return s;
}

static int nibble(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

Digest digest_from_hex(std::string_view hex) {
  if (hex.size() != 64) {
    throw FormatError("digest_from_hex: expected 64 hex characters, got " +
                      std::to_string(hex.size()));
  }
  Digest d{};
  for (size_t i = 0; i < 32; ++i) {
    int hi = nibble(hex[2 * i]);
    int lo = nibble(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) {
      throw FormatError("digest_from_hex: non-hex character at position " + std::to_string(2 * i));
    }
    d[i] = static_cast<unsigned char>((hi << 4) | lo);
  }
  return d;
}

}  // namespace gumbelcf
