#pragma once

#include <cstdint>
#include <vector>

#include "ctvol/volume.hpp"

namespace ctvol {

// Parse a NIfTI-1 single-file payload (.nii), optionally gzip-compressed
// (detected by the 0x1f 0x8b magic). Supported datatypes: uint8, int16,
// int32, float32, float64. Voxels are rescaled by scl_slope/scl_inter when
// scl_slope != 0. Both endiannesses are accepted; dim[0] decides.
Volume3D parse_nifti(const std::vector<std::uint8_t>& bytes);

// Serialize as an uncompressed NIfTI-1 single file, float32 datatype,
// little-endian. parse_nifti(write_nifti(v)) == v voxelwise.
std::vector<std::uint8_t> write_nifti(const Volume3D& v);

// write_nifti followed by gzip compression (.nii.gz payload).
std::vector<std::uint8_t> write_nifti_gz(const Volume3D& v);

// gzip helpers (shared with the PNG/zlib plumbing)
bool looks_gzipped(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> gzip_compress(const std::vector<std::uint8_t>& raw);
std::vector<std::uint8_t> gzip_decompress(const std::vector<std::uint8_t>& gz);

}  // namespace ctvol
