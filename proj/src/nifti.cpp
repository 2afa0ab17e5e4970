#include "ctvol/nifti.hpp"

#include <zlib.h>

#include <cmath>
#include <cstring>
#include <limits>

namespace ctvol {

namespace {

// NIfTI-1 datatype codes
constexpr std::int16_t DT_UINT8 = 2;
constexpr std::int16_t DT_INT16 = 4;
constexpr std::int16_t DT_INT32 = 8;
constexpr std::int16_t DT_FLOAT32 = 16;
constexpr std::int16_t DT_FLOAT64 = 64;

constexpr std::size_t kHeaderSize = 348;
constexpr std::size_t kVoxOffset = 352;  // header + 4-byte extension flag

template <typename T>
T read_le(const std::uint8_t* p, bool swap) {
    T v;
    std::memcpy(&v, p, sizeof(T));
    if (swap) {
        std::uint8_t b[sizeof(T)];
        std::memcpy(b, &v, sizeof(T));
        for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
        std::memcpy(&v, b, sizeof(T));
    }
    return v;
}

template <typename T>
void write_raw(std::vector<std::uint8_t>& out, std::size_t off, T v) {
    std::memcpy(out.data() + off, &v, sizeof(T));
}

int bitpix_of(std::int16_t datatype) {
    switch (datatype) {
        case DT_UINT8: return 8;
        case DT_INT16: return 16;
        case DT_INT32: return 32;
        case DT_FLOAT32: return 32;
        case DT_FLOAT64: return 64;
        default: return 0;
    }
}

}  // namespace

bool looks_gzipped(const std::vector<std::uint8_t>& bytes) {
    return bytes.size() >= 2 && bytes[0] == 0x1f && bytes[1] == 0x8b;
}

std::vector<std::uint8_t> gzip_compress(const std::vector<std::uint8_t>& raw) {
    z_stream zs{};
    if (deflateInit2(&zs, Z_DEFAULT_COMPRESSION, Z_DEFLATED, 16 + MAX_WBITS, 8,
                     Z_DEFAULT_STRATEGY) != Z_OK)
        throw DataError("gzip: deflateInit2 failed");
    std::vector<std::uint8_t> out;
    out.resize(deflateBound(&zs, static_cast<uLong>(raw.size())) + 32);
    zs.next_in = const_cast<Bytef*>(raw.data());
    zs.avail_in = static_cast<uInt>(raw.size());
    zs.next_out = out.data();
    zs.avail_out = static_cast<uInt>(out.size());
    int rc = deflate(&zs, Z_FINISH);
    deflateEnd(&zs);
    if (rc != Z_STREAM_END) throw DataError("gzip: deflate failed");
    out.resize(zs.total_out);
    return out;
}

std::vector<std::uint8_t> gzip_decompress(const std::vector<std::uint8_t>& gz) {
    z_stream zs{};
    if (inflateInit2(&zs, 16 + MAX_WBITS) != Z_OK)
        throw DataError("gzip: inflateInit2 failed");
    std::vector<std::uint8_t> out;
    out.resize(gz.size() * 4 + 1024);
    zs.next_in = const_cast<Bytef*>(gz.data());
    zs.avail_in = static_cast<uInt>(gz.size());
    std::size_t written = 0;
    int rc = Z_OK;
    while (true) {
        zs.next_out = out.data() + written;
        zs.avail_out = static_cast<uInt>(out.size() - written);
        rc = inflate(&zs, Z_NO_FLUSH);
        written = zs.total_out;
        if (rc == Z_STREAM_END) break;
        if (rc == Z_OK || rc == Z_BUF_ERROR) {
            if (zs.avail_out == 0) {
                out.resize(out.size() * 2);
                continue;
            }
            if (rc == Z_BUF_ERROR) {
                inflateEnd(&zs);
                throw TruncatedPayload("gzip: truncated stream");
            }
            continue;
        }
        inflateEnd(&zs);
        throw DataError("gzip: inflate failed");
    }
    inflateEnd(&zs);
    out.resize(written);
    return out;
}

Volume3D parse_nifti(const std::vector<std::uint8_t>& bytes_in) {
    const std::vector<std::uint8_t>* src = &bytes_in;
    std::vector<std::uint8_t> inflated;
    if (looks_gzipped(bytes_in)) {
        inflated = gzip_decompress(bytes_in);
        src = &inflated;
    }
    const std::vector<std::uint8_t>& bytes = *src;
    if (bytes.size() < kHeaderSize) throw TruncatedPayload("nifti: header shorter than 348 bytes");

    const std::uint8_t* h = bytes.data();
    if (!(h[344] == 'n' && h[345] == '+' && h[346] == '1' && h[347] == '\0'))
        throw BadMagic("nifti: magic is not \"n+1\"");

    // dim[0] must lie in 1..7; if it does not, the header is byte-swapped.
    bool swap = false;
    std::int16_t ndim = read_le<std::int16_t>(h + 40, false);
    if (ndim < 1 || ndim > 7) {
        swap = true;
        ndim = read_le<std::int16_t>(h + 40, true);
        if (ndim < 1 || ndim > 7) throw BadMagic("nifti: dim[0] invalid in both byte orders");
    }

    std::int16_t dim[8];
    float pixdim[8];
    for (int i = 0; i < 8; ++i) {
        dim[i] = read_le<std::int16_t>(h + 40 + 2 * i, swap);
        pixdim[i] = read_le<float>(h + 76 + 4 * i, swap);
    }
    const std::int16_t datatype = read_le<std::int16_t>(h + 70, swap);
    const float vox_offset_f = read_le<float>(h + 108, swap);
    const float scl_slope = read_le<float>(h + 112, swap);
    const float scl_inter = read_le<float>(h + 116, swap);

    const int bp = bitpix_of(datatype);
    if (bp == 0) throw UnsupportedDatatype("nifti: datatype code " + std::to_string(datatype));

    Volume3D v;
    v.nx = dim[1];
    v.ny = ndim >= 2 ? dim[2] : 1;
    v.nz = ndim >= 3 ? dim[3] : 1;
    if (v.nx <= 0 || v.ny <= 0 || v.nz <= 0)
        throw TruncatedPayload("nifti: non-positive dimension");
    // higher dims (time, ...) must be degenerate for a plain volume
    for (int i = 4; i <= ndim && i < 8; ++i)
        if (dim[i] > 1) throw UnsupportedDatatype("nifti: 4-D and higher volumes unsupported");

    v.dx = pixdim[1];
    v.dy = ndim >= 2 ? pixdim[2] : 1.0f;
    v.dz = ndim >= 3 ? pixdim[3] : 1.0f;
    if (!(v.dx > 0.0) || !(v.dy > 0.0) || !(v.dz > 0.0) || !std::isfinite(v.dx) ||
        !std::isfinite(v.dy) || !std::isfinite(v.dz))
        throw NonPositiveSpacing("nifti: pixdim spacing must be positive");

    std::size_t offset = kHeaderSize;
    if (std::isfinite(vox_offset_f) && vox_offset_f > static_cast<float>(kHeaderSize))
        offset = static_cast<std::size_t>(vox_offset_f);

    const std::size_t count = v.voxel_count();
    const std::size_t need = offset + count * (bp / 8);
    if (bytes.size() < need) throw TruncatedPayload("nifti: voxel payload shorter than dim product");

    const std::uint8_t* d = bytes.data() + offset;
    v.voxels.resize(count);
    const bool rescale = scl_slope != 0.0f && !(scl_slope == 1.0f && scl_inter == 0.0f);
    for (std::size_t i = 0; i < count; ++i) {
        double raw;
        switch (datatype) {
            case DT_UINT8: raw = d[i]; break;
            case DT_INT16: raw = read_le<std::int16_t>(d + 2 * i, swap); break;
            case DT_INT32: raw = read_le<std::int32_t>(d + 4 * i, swap); break;
            case DT_FLOAT32: raw = read_le<float>(d + 4 * i, swap); break;
            default: raw = read_le<double>(d + 8 * i, swap); break;
        }
        v.voxels[i] = static_cast<float>(rescale ? raw * scl_slope + scl_inter : raw);
    }
    return v;
}

std::vector<std::uint8_t> write_nifti(const Volume3D& v) {
    v.validate();
    std::vector<std::uint8_t> out(kVoxOffset + v.voxel_count() * 4, 0);

    write_raw<std::int32_t>(out, 0, 348);                       // sizeof_hdr
    out[38] = 'r';                                              // regular (ANALYZE relic)
    write_raw<std::int16_t>(out, 40, 3);                        // dim[0]
    write_raw<std::int16_t>(out, 42, static_cast<std::int16_t>(v.nx));
    write_raw<std::int16_t>(out, 44, static_cast<std::int16_t>(v.ny));
    write_raw<std::int16_t>(out, 46, static_cast<std::int16_t>(v.nz));
    for (int i = 4; i < 8; ++i) write_raw<std::int16_t>(out, 40 + 2 * i, 1);
    write_raw<std::int16_t>(out, 70, DT_FLOAT32);               // datatype
    write_raw<std::int16_t>(out, 72, 32);                       // bitpix
    write_raw<float>(out, 76, 1.0f);                            // pixdim[0] = qfac
    write_raw<float>(out, 80, static_cast<float>(v.dx));
    write_raw<float>(out, 84, static_cast<float>(v.dy));
    write_raw<float>(out, 88, static_cast<float>(v.dz));
    write_raw<float>(out, 108, static_cast<float>(kVoxOffset)); // vox_offset
    write_raw<float>(out, 112, 1.0f);                           // scl_slope
    write_raw<float>(out, 116, 0.0f);                           // scl_inter
    write_raw<std::int16_t>(out, 252, 0);                       // qform_code
    write_raw<std::int16_t>(out, 254, 0);                       // sform_code
    out[344] = 'n';
    out[345] = '+';
    out[346] = '1';
    out[347] = '\0';
    // bytes 348..351 stay zero: no header extensions

    std::memcpy(out.data() + kVoxOffset, v.voxels.data(), v.voxel_count() * 4);
    return out;
}

std::vector<std::uint8_t> write_nifti_gz(const Volume3D& v) {
    return gzip_compress(write_nifti(v));
}

}  // namespace ctvol
