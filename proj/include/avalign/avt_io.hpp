#pragma once

#include <filesystem>
#include <istream>
#include <ostream>

#include "avalign/tensor.hpp"

namespace avalign {

// AVT1 container: magic "AVT1" (0x41 0x56 0x54 0x31), little-endian u32
// version (= 1), u32 width, u32 height, u32 frames, f32 frame_ms, then
// width*height*frames little-endian f32 values in frame-major layout.
// The reader rejects wrong magic/version, truncated or oversized payloads,
// bad dims and non-finite values with DataError.

void write_avt(const AlignmentTensor& t, std::ostream& out);
void write_avt(const AlignmentTensor& t, const std::filesystem::path& path);

AlignmentTensor read_avt(std::istream& in);
AlignmentTensor read_avt(const std::filesystem::path& path);

}  // namespace avalign
