#pragma once

/**
 * Noise trace persistence.
 *
 * Fixed binary layout, integers little-endian:
 *   offset 0   magic "GUMT"
 *   offset 4   version     u32 (currently 1; anything else is rejected)
 *   offset 8   vocab_size  u32
 *   offset 12  num_steps   u32
 *   offset 16  flags       u32 (must be 0 in version 1)
 *   offset 20  fingerprint 32 bytes
 *   offset 52  reference   num_steps x u32
 *   then       noise       num_steps x vocab_size x IEEE-754 f64, row-major
 *
 * The layout carries no provenance; NoiseTrace::provenance is in-memory only.
 * Round trips are bit-exact. Format violations raise FormatError naming the
 * offending byte offset.
 */

#include <string>

#include "gumbelcf/hindsight.hpp"

namespace gumbelcf::harness {

void write_trace(const hindsight::NoiseTrace& trace, const std::string& path);
hindsight::NoiseTrace read_trace(const std::string& path);

}  // namespace gumbelcf::harness
