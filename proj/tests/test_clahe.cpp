#include <doctest.h>

#include <array>
#include <cmath>
#include <random>

#include "ctvol/augment.hpp"

using namespace ctvol;

TEST_CASE("clahe maps a constant image to itself") {
    for (float v : {0.0f, 0.3f, 0.5f, 1.0f}) {
        Image img(16, 16, v);
        Image out = clahe(img, 8, 8, 4.0);
        CHECK(out.px == img.px);
    }
}

TEST_CASE("clahe equalizes a two-valued image to the CDF midpoints") {
    // half the pixels at 0.25, half at 0.75, single tile, clip limit too
    // large to bite
    Image img(16, 16);
    for (int r = 0; r < 16; ++r)
        for (int c = 0; c < 16; ++c) img.at(r, c) = (c < 8) ? 0.25f : 0.75f;

    // independent 256-bin CDF oracle
    std::array<double, 256> hist{};
    for (float v : img.px) hist[static_cast<int>(std::lround(v * 255.0))] += 1.0;
    std::array<double, 256> cdf{};
    double acc = 0.0;
    for (int b = 0; b < 256; ++b) {
        acc += hist[b];
        cdf[b] = acc / img.px.size();
    }
    const int lo_bin = static_cast<int>(std::lround(0.25 * 255.0));
    const int hi_bin = static_cast<int>(std::lround(0.75 * 255.0));
    CHECK(cdf[lo_bin] == doctest::Approx(0.5));
    CHECK(cdf[hi_bin] == doctest::Approx(1.0));

    Image out = clahe(img, 1, 1, 1e9);
    for (int r = 0; r < 16; ++r)
        for (int c = 0; c < 16; ++c) {
            double expect = (c < 8) ? cdf[lo_bin] : cdf[hi_bin];
            CHECK(out.at(r, c) == doctest::Approx(expect).epsilon(1e-6));
        }
}

TEST_CASE("clahe output always stays inside [0,1]") {
    std::mt19937_64 rng(19);
    std::uniform_real_distribution<float> u(0.0f, 1.0f);
    for (int trial = 0; trial < 10; ++trial) {
        Image img(21, 17);
        for (auto& p : img.px) p = u(rng);
        Image out = clahe(img, 1 + trial % 4, 1 + trial % 3, 0.5 + trial);
        for (float p : out.px) {
            CHECK(p >= 0.0f);
            CHECK(p <= 1.0f);
        }
    }
}

TEST_CASE("clahe with a tight clip limit flattens less than plain equalization") {
    // one dominant gray level plus a sprinkle of dark pixels; clipping the
    // histogram must keep the dominant level closer to its input value
    Image img(32, 32, 0.6f);
    for (int i = 0; i < 32; ++i) img.px[i * 33] = 0.1f;

    Image clipped = clahe(img, 1, 1, 1.5);
    Image unclipped = clahe(img, 1, 1, 1e9);
    // the unclipped CDF jumps to ~1 at the dominant bin; clipping pulls it
    // back toward the identity
    float v_clip = 0.0f, v_free = 0.0f;
    for (int i = 0; i < 1024; ++i)
        if (img.px[i] == 0.6f) {
            v_clip = clipped.px[i];
            v_free = unclipped.px[i];
            break;
        }
    CHECK(std::abs(v_clip - 0.6f) < std::abs(v_free - 0.6f));
}

TEST_CASE("clahe rejects bad tile grids and clip limits") {
    Image img(8, 8, 0.5f);
    CHECK_THROWS_AS(clahe(img, 0, 4, 2.0), ConfigInvalid);
    CHECK_THROWS_AS(clahe(img, 4, 4, 0.0), ConfigInvalid);
}
