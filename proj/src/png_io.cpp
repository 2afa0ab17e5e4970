#include "ctvol/png_io.hpp"

#include <zlib.h>

#include <cmath>
#include <cstring>

namespace ctvol {

namespace {

const std::uint8_t kSignature[8] = {0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 24));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

std::uint32_t get_u32(const std::uint8_t* p) {
    return (static_cast<std::uint32_t>(p[0]) << 24) | (static_cast<std::uint32_t>(p[1]) << 16) |
           (static_cast<std::uint32_t>(p[2]) << 8) | static_cast<std::uint32_t>(p[3]);
}

void append_chunk(std::vector<std::uint8_t>& out, const char type[4],
                  const std::vector<std::uint8_t>& payload) {
    put_u32(out, static_cast<std::uint32_t>(payload.size()));
    std::size_t start = out.size();
    out.insert(out.end(), type, type + 4);
    out.insert(out.end(), payload.begin(), payload.end());
    std::uint32_t crc = crc32(0L, out.data() + start, static_cast<uInt>(4 + payload.size()));
    put_u32(out, crc);
}

std::vector<std::uint8_t> zlib_deflate(const std::vector<std::uint8_t>& raw) {
    uLongf bound = compressBound(static_cast<uLong>(raw.size()));
    std::vector<std::uint8_t> out(bound);
    if (compress2(out.data(), &bound, raw.data(), static_cast<uLong>(raw.size()),
                  Z_DEFAULT_COMPRESSION) != Z_OK)
        throw DataError("png: compress failed");
    out.resize(bound);
    return out;
}

std::vector<std::uint8_t> zlib_inflate(const std::vector<std::uint8_t>& z,
                                       std::size_t expected) {
    std::vector<std::uint8_t> out(expected);
    uLongf len = static_cast<uLongf>(expected);
    if (uncompress(out.data(), &len, z.data(), static_cast<uLong>(z.size())) != Z_OK ||
        len != expected)
        throw BadPng("png: IDAT inflate failed");
    return out;
}

int paeth(int a, int b, int c) {
    int p = a + b - c;
    int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
    if (pa <= pb && pa <= pc) return a;
    if (pb <= pc) return b;
    return c;
}

}  // namespace

std::vector<std::uint8_t> encode_png(const Image& img) {
    if (img.h <= 0 || img.w <= 0) throw ShapeMismatch("png: empty image");

    // scanlines: filter byte 0 + quantized row
    std::vector<std::uint8_t> raw;
    raw.reserve(static_cast<std::size_t>(img.h) * (img.w + 1));
    for (int r = 0; r < img.h; ++r) {
        raw.push_back(0);
        for (int c = 0; c < img.w; ++c) {
            float v = img.at(r, c);
            v = v < 0.0f ? 0.0f : (v > 1.0f ? 1.0f : v);
            raw.push_back(static_cast<std::uint8_t>(std::lround(v * 255.0f)));
        }
    }

    std::vector<std::uint8_t> out(kSignature, kSignature + 8);
    std::vector<std::uint8_t> ihdr;
    put_u32(ihdr, static_cast<std::uint32_t>(img.w));
    put_u32(ihdr, static_cast<std::uint32_t>(img.h));
    ihdr.push_back(8);  // bit depth
    ihdr.push_back(0);  // color type: grayscale
    ihdr.push_back(0);  // compression
    ihdr.push_back(0);  // filter method
    ihdr.push_back(0);  // no interlace
    append_chunk(out, "IHDR", ihdr);
    append_chunk(out, "IDAT", zlib_deflate(raw));
    append_chunk(out, "IEND", {});
    return out;
}

Image decode_png(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 8 || std::memcmp(bytes.data(), kSignature, 8) != 0)
        throw BadPng("png: bad signature");

    std::uint32_t w = 0, h = 0;
    int bit_depth = 0, color_type = -1, interlace = 0;
    std::vector<std::uint8_t> idat;
    std::size_t pos = 8;
    bool seen_iend = false;
    while (pos + 8 <= bytes.size() && !seen_iend) {
        std::uint32_t len = get_u32(bytes.data() + pos);
        if (pos + 12 + len > bytes.size()) throw BadPng("png: truncated chunk");
        const char* type = reinterpret_cast<const char*>(bytes.data() + pos + 4);
        const std::uint8_t* payload = bytes.data() + pos + 8;
        if (std::memcmp(type, "IHDR", 4) == 0) {
            if (len != 13) throw BadPng("png: bad IHDR");
            w = get_u32(payload);
            h = get_u32(payload + 4);
            bit_depth = payload[8];
            color_type = payload[9];
            interlace = payload[12];
        } else if (std::memcmp(type, "IDAT", 4) == 0) {
            idat.insert(idat.end(), payload, payload + len);
        } else if (std::memcmp(type, "IEND", 4) == 0) {
            seen_iend = true;
        }
        pos += 12 + len;
    }
    if (w == 0 || h == 0) throw BadPng("png: missing IHDR");
    if (bit_depth != 8 || color_type != 0 || interlace != 0)
        throw BadPng("png: only 8-bit grayscale non-interlaced supported");
    if (idat.empty()) throw BadPng("png: missing IDAT");

    const std::size_t stride = w + 1;
    std::vector<std::uint8_t> raw = zlib_inflate(idat, stride * h);

    Image img(static_cast<int>(h), static_cast<int>(w));
    std::vector<std::uint8_t> prev(w, 0), cur(w, 0);
    for (std::uint32_t r = 0; r < h; ++r) {
        const std::uint8_t filter = raw[r * stride];
        const std::uint8_t* line = raw.data() + r * stride + 1;
        for (std::uint32_t c = 0; c < w; ++c) {
            int a = c > 0 ? cur[c - 1] : 0;   // left
            int b = prev[c];                  // up
            int cc = c > 0 ? prev[c - 1] : 0; // up-left
            int x = line[c];
            switch (filter) {
                case 0: break;
                case 1: x += a; break;
                case 2: x += b; break;
                case 3: x += (a + b) / 2; break;
                case 4: x += paeth(a, b, cc); break;
                default: throw BadPng("png: unknown filter type");
            }
            cur[c] = static_cast<std::uint8_t>(x & 0xff);
            img.at(static_cast<int>(r), static_cast<int>(c)) = cur[c] / 255.0f;
        }
        std::swap(prev, cur);
    }
    return img;
}

}  // namespace ctvol
