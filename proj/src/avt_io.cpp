#include "avalign/avt_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <vector>

#include "avalign/errors.hpp"

namespace avalign {

namespace {

constexpr std::uint8_t kMagic[4] = {0x41, 0x56, 0x54, 0x31};  // "AVT1"
constexpr std::uint32_t kVersion = 1;

void put_u32(std::ostream& out, std::uint32_t v) {
  const std::uint8_t b[4] = {static_cast<std::uint8_t>(v), static_cast<std::uint8_t>(v >> 8),
                             static_cast<std::uint8_t>(v >> 16),
                             static_cast<std::uint8_t>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& in) {
  std::uint8_t b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw DataError("AVT1: truncated header");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

static_assert(sizeof(float) == 4, "AVT1 requires 32-bit floats");

}  // namespace

void write_avt(const AlignmentTensor& t, std::ostream& out) {
  validate_tensor(t);
  out.write(reinterpret_cast<const char*>(kMagic), 4);
  put_u32(out, kVersion);
  put_u32(out, static_cast<std::uint32_t>(t.width));
  put_u32(out, static_cast<std::uint32_t>(t.height));
  put_u32(out, static_cast<std::uint32_t>(t.frames));
  put_u32(out, std::bit_cast<std::uint32_t>(t.frame_ms));
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(t.values.data()),
              static_cast<std::streamsize>(t.values.size() * 4));
  } else {
    for (float v : t.values) put_u32(out, std::bit_cast<std::uint32_t>(v));
  }
  if (!out) throw DataError("AVT1: write failed");
}

void write_avt(const AlignmentTensor& t, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("AVT1: cannot open for writing: " + path.string());
  write_avt(t, out);
}

AlignmentTensor read_avt(std::istream& in) {
  std::uint8_t magic[4];
  in.read(reinterpret_cast<char*>(magic), 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) {
    throw DataError("AVT1: bad magic bytes");
  }
  const std::uint32_t version = get_u32(in);
  if (version != kVersion) {
    throw DataError("AVT1: unsupported version " + std::to_string(version));
  }
  const std::uint32_t w = get_u32(in);
  const std::uint32_t h = get_u32(in);
  const std::uint32_t f = get_u32(in);
  const float frame_ms = std::bit_cast<float>(get_u32(in));
  if (w < 1 || h < 1 || f < 1 || w > (1u << 20) || h > (1u << 20) || f > (1u << 24)) {
    throw DataError("AVT1: bad dims");
  }
  const std::uint64_t count = static_cast<std::uint64_t>(w) * h * f;
  if (count > (1ull << 31)) throw DataError("AVT1: payload too large");

  AlignmentTensor t(static_cast<int>(w), static_cast<int>(h), static_cast<int>(f), frame_ms);
  if constexpr (std::endian::native == std::endian::little) {
    in.read(reinterpret_cast<char*>(t.values.data()), static_cast<std::streamsize>(count * 4));
    if (static_cast<std::uint64_t>(in.gcount()) != count * 4) {
      throw DataError("AVT1: truncated payload");
    }
  } else {
    for (std::uint64_t i = 0; i < count; ++i) t.values[i] = std::bit_cast<float>(get_u32(in));
  }
  in.peek();
  if (!in.eof()) throw DataError("AVT1: trailing bytes after payload");
  validate_tensor(t);
  return t;
}

AlignmentTensor read_avt(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("AVT1: cannot open: " + path.string());
  try {
    return read_avt(in);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

}  // namespace avalign
