#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

namespace gumbelcf {

/// 32-byte content digest. Equal digests imply bitwise-identical logits for
/// every context, so traces carry one and replay compares it.
using Digest = std::array<unsigned char, 32>;

/// SHA-256 of a byte string.
Digest sha256(std::string_view data);

std::string to_hex(const Digest& d);
Digest digest_from_hex(std::string_view hex);  // throws FormatError on bad input

}  // namespace gumbelcf
