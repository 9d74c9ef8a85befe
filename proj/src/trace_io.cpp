#include "gumbelcf/trace_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <vector>

#include "gumbelcf/errors.hpp"

namespace gumbelcf::harness {

namespace {

constexpr char kMagic[4] = {'G', 'U', 'M', 'T'};
constexpr uint32_t kVersion = 1;

void put_u32(std::string& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_f64(std::string& out, double x) {
  uint64_t bits = std::bit_cast<uint64_t>(x);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
}

class Reader {
 public:
  explicit Reader(std::string data) : data_(std::move(data)) {}

  size_t offset() const { return offset_; }

  const char* take(size_t n, const char* what) {
    if (offset_ + n > data_.size()) {
      throw FormatError("trace file truncated at offset " + std::to_string(data_.size()) +
                        " while reading " + what + " (needs " + std::to_string(offset_ + n) +
                        " bytes)");
    }
    const char* p = data_.data() + offset_;
    offset_ += n;
    return p;
  }

  uint32_t u32(const char* what) {
    const char* p = take(4, what);
    uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(p[i]);
    return v;
  }

  double f64(const char* what) {
    const char* p = take(8, what);
    uint64_t bits = 0;
    for (int i = 7; i >= 0; --i) bits = (bits << 8) | static_cast<unsigned char>(p[i]);
    return std::bit_cast<double>(bits);
  }

 private:
  std::string data_;
  size_t offset_ = 0;
};

}  // namespace

void write_trace(const hindsight::NoiseTrace& trace, const std::string& path) {
  std::string out;
  out.reserve(52 + trace.reference.size() * 4 + trace.noise.size() * 8);
  out.append(kMagic, 4);
  put_u32(out, kVersion);
  put_u32(out, trace.vocab_size);
  put_u32(out, static_cast<uint32_t>(trace.reference.size()));
  put_u32(out, 0);  // flags
  out.append(reinterpret_cast<const char*>(trace.model_fingerprint.data()),
             trace.model_fingerprint.size());
  for (Token t : trace.reference) put_u32(out, static_cast<uint32_t>(t));
  for (double g : trace.noise) put_f64(out, g);

  std::ofstream file(path, std::ios::binary);
  if (!file) throw InputError("cannot open for writing: " + path);
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!file) throw InputError("write failed: " + path);
}

hindsight::NoiseTrace read_trace(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw InputError("cannot open trace file: " + path);
  std::string data((std::istreambuf_iterator<char>(file)), std::istreambuf_iterator<char>());
  Reader r(std::move(data));

  const char* magic = r.take(4, "magic");
  if (std::memcmp(magic, kMagic, 4) != 0) {
    throw FormatError("trace file: bad magic at offset 0 (expected \"GUMT\")");
  }
  uint32_t version = r.u32("version");
  if (version != kVersion) {
    throw FormatError("trace file: unsupported version " + std::to_string(version) +
                      " at offset 4 (this reader handles version 1)");
  }
  hindsight::NoiseTrace trace;
  trace.vocab_size = r.u32("vocab_size");
  uint32_t num_steps = r.u32("num_steps");
  uint32_t flags = r.u32("flags");
  if (flags != 0) {
    throw FormatError("trace file: unknown flags at offset 16: " + std::to_string(flags));
  }
  const char* fp = r.take(trace.model_fingerprint.size(), "fingerprint");
  std::memcpy(trace.model_fingerprint.data(), fp, trace.model_fingerprint.size());

  trace.reference.reserve(num_steps);
  for (uint32_t i = 0; i < num_steps; ++i) {
    trace.reference.push_back(static_cast<Token>(r.u32("reference tokens")));
  }
  trace.noise.reserve(static_cast<size_t>(num_steps) * trace.vocab_size);
  for (size_t i = 0; i < static_cast<size_t>(num_steps) * trace.vocab_size; ++i) {
    trace.noise.push_back(r.f64("noise values"));
  }
  return trace;
}

}  // namespace gumbelcf::harness
