#include <doctest.h>

#include <cstring>
#include <random>

#include "ctvol/nifti.hpp"

using namespace ctvol;

namespace {

Volume3D random_volume(std::mt19937_64& rng, bool mask = false) {
    std::uniform_int_distribution<int> dim(1, 9);
    Volume3D v;
    v.nx = dim(rng);
    v.ny = dim(rng);
    v.nz = dim(rng);
    std::uniform_real_distribution<double> sp(0.3, 5.0);
    v.dx = sp(rng);
    v.dy = sp(rng);
    v.dz = sp(rng);
    v.voxels.resize(v.voxel_count());
    if (mask) {
        std::bernoulli_distribution bit(0.4);
        for (auto& x : v.voxels) x = bit(rng) ? 1.0f : 0.0f;
        v.intent = VolumeIntent::binary_mask;
    } else {
        std::uniform_real_distribution<float> val(-1200.0f, 600.0f);
        for (auto& x : v.voxels) x = val(rng);
    }
    return v;
}

// hand-assembled minimal header for parser tests
std::vector<std::uint8_t> raw_nifti(std::int16_t datatype, int bitpix,
                                    const std::vector<std::uint8_t>& payload,
                                    float slope = 0.0f, float inter = 0.0f) {
    std::vector<std::uint8_t> b(352 + payload.size(), 0);
    auto put16 = [&](std::size_t off, std::int16_t v) { std::memcpy(b.data() + off, &v, 2); };
    auto put32f = [&](std::size_t off, float v) { std::memcpy(b.data() + off, &v, 4); };
    std::int32_t hdr_size = 348;
    std::memcpy(b.data(), &hdr_size, 4);
    put16(40, 3);
    put16(42, 4);
    put16(44, 4);
    put16(46, 2);
    put16(48, 1);
    put16(50, 1);
    put16(52, 1);
    put16(54, 1);
    put16(70, datatype);
    put16(72, static_cast<std::int16_t>(bitpix));
    put32f(80, 1.0f);
    put32f(84, 1.5f);
    put32f(88, 2.0f);
    put32f(108, 352.0f);
    put32f(112, slope);
    put32f(116, inter);
    b[344] = 'n';
    b[345] = '+';
    b[346] = '1';
    std::memcpy(b.data() + 352, payload.data(), payload.size());
    return b;
}

}  // namespace

TEST_CASE("parse_nifti maps header dims to shape") {
    std::vector<std::uint8_t> payload(32 * 4, 0);
    for (int i = 0; i < 32; ++i) {
        float f = static_cast<float>(i);
        std::memcpy(payload.data() + 4 * i, &f, 4);
    }
    Volume3D v = parse_nifti(raw_nifti(16, 32, payload));
    CHECK(v.nx == 4);
    CHECK(v.ny == 4);
    CHECK(v.nz == 2);
    CHECK(v.dx == doctest::Approx(1.0));
    CHECK(v.dy == doctest::Approx(1.5));
    CHECK(v.dz == doctest::Approx(2.0));
    CHECK(v.voxels[7] == doctest::Approx(7.0f));
}

TEST_CASE("parse_nifti applies scl_slope and scl_inter") {
    std::vector<std::uint8_t> payload(32 * 2, 0);
    std::int16_t raw = 3;
    std::memcpy(payload.data(), &raw, 2);
    Volume3D v = parse_nifti(raw_nifti(4, 16, payload, 2.0f, -1.0f));
    CHECK(v.voxels[0] == doctest::Approx(5.0f));   // 3*2 - 1
    CHECK(v.voxels[1] == doctest::Approx(-1.0f));  // 0*2 - 1
}

TEST_CASE("parse_nifti rejects bad input") {
    std::vector<std::uint8_t> payload(32 * 4, 0);
    auto good = raw_nifti(16, 32, payload);

    auto bad_magic = good;
    bad_magic[344] = 'x';
    CHECK_THROWS_AS(parse_nifti(bad_magic), BadMagic);

    auto bad_dt = raw_nifti(128, 24, payload);  // DT_RGB24 unsupported
    CHECK_THROWS_AS(parse_nifti(bad_dt), UnsupportedDatatype);

    auto truncated = good;
    truncated.resize(352 + 31 * 4);
    CHECK_THROWS_AS(parse_nifti(truncated), TruncatedPayload);

    auto bad_spacing = good;
    float neg = -1.0f;
    std::memcpy(bad_spacing.data() + 84, &neg, 4);
    CHECK_THROWS_AS(parse_nifti(bad_spacing), NonPositiveSpacing);

    CHECK_THROWS_AS(parse_nifti(std::vector<std::uint8_t>(100, 0)), TruncatedPayload);
}

TEST_CASE("parse_nifti handles byte-swapped headers") {
    std::vector<std::uint8_t> payload(32 * 4, 0);
    float f = 42.0f;
    std::uint8_t fb[4];
    std::memcpy(fb, &f, 4);
    std::swap(fb[0], fb[3]);
    std::swap(fb[1], fb[2]);
    std::memcpy(payload.data(), fb, 4);

    auto le = raw_nifti(16, 32, payload);
    auto swap16 = [&](std::size_t off) { std::swap(le[off], le[off + 1]); };
    auto swap32 = [&](std::size_t off) {
        std::swap(le[off], le[off + 3]);
        std::swap(le[off + 1], le[off + 2]);
    };
    swap32(0);
    for (std::size_t off = 40; off < 56; off += 2) swap16(off);
    swap16(70);
    swap16(72);
    for (std::size_t off = 76; off < 108; off += 4) swap32(off);
    swap32(108);
    swap32(112);
    swap32(116);

    Volume3D v = parse_nifti(le);
    CHECK(v.nx == 4);
    CHECK(v.dy == doctest::Approx(1.5));
    CHECK(v.voxels[0] == doctest::Approx(42.0f));
}

TEST_CASE("write then parse is the identity, including gzip") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        Volume3D v = random_volume(rng, trial % 3 == 0);
        auto bytes = trial % 2 == 0 ? write_nifti(v) : write_nifti_gz(v);
        if (trial % 2 == 1) CHECK(looks_gzipped(bytes));
        Volume3D w = parse_nifti(bytes);
        REQUIRE(w.nx == v.nx);
        REQUIRE(w.ny == v.ny);
        REQUIRE(w.nz == v.nz);
        CHECK(std::abs(w.dx - v.dx) <= 1e-6 * v.dx);
        CHECK(std::abs(w.dy - v.dy) <= 1e-6 * v.dy);
        CHECK(std::abs(w.dz - v.dz) <= 1e-6 * v.dz);
        bool voxels_equal = true;
        for (std::size_t i = 0; i < v.voxels.size(); ++i)
            if (v.voxels[i] != w.voxels[i]) voxels_equal = false;
        CHECK(voxels_equal);
    }
}

TEST_CASE("1x1x1 volume round-trips") {
    Volume3D v;
    v.nx = v.ny = v.nz = 1;
    v.voxels = {0.0f};
    Volume3D w = parse_nifti(write_nifti(v));
    CHECK(w.nx == 1);
    CHECK(w.ny == 1);
    CHECK(w.nz == 1);
    CHECK(w.voxels[0] == 0.0f);
}

TEST_CASE("binary mask round-trip preserves {0,1} exactly") {
    std::mt19937_64 rng(3);
    Volume3D v = random_volume(rng, true);
    Volume3D w = parse_nifti(write_nifti_gz(v));
    for (std::size_t i = 0; i < v.voxels.size(); ++i) {
        CHECK((w.voxels[i] == 0.0f || w.voxels[i] == 1.0f));
        CHECK(w.voxels[i] == v.voxels[i]);
    }
}

TEST_CASE("binarize_mask thresholds positive labels") {
    Volume3D v;
    v.nx = 3;
    v.ny = v.nz = 1;
    v.voxels = {0.0f, 2.0f, 0.5f};
    Volume3D m = binarize_mask(v);
    CHECK(m.voxels == std::vector<float>{0.0f, 1.0f, 1.0f});
    CHECK(m.intent == VolumeIntent::binary_mask);
}
