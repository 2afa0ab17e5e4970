#include <doctest.h>

#include <cmath>
#include <random>

#include "ctvol/gradcheck.hpp"
#include "ctvol/loss.hpp"
#include "ctvol/rng.hpp"

using namespace ctvol;

TEST_CASE("zero logits with half-ones targets give BCE = ln 2") {
    // isolate the BCE term: with z = 0 the dice term is identical for both
    // channels, so subtract it analytically
    const int n = 1, h = 4, w = 4;
    Tensor logits(n, 2, h, w);
    Tensor lung(n, 1, h, w), infection(n, 1, h, w);
    for (int i = 0; i < 8; ++i) lung.data[i] = 1.0;       // half ones
    for (int i = 0; i < 8; ++i) infection.data[i] = 1.0;

    // all-zero logits: p = 0.5 everywhere
    // dice = (2*0.5*8 + 1)/(0.5*16 + 8 + 1) = 9/17 per channel
    const double dice = 9.0 / 17.0;
    const double expect = std::log(2.0) + (1.0 - dice);
    CHECK(seg_loss(logits, lung, infection) == doctest::Approx(expect).epsilon(1e-12));

    // BCE component alone is ln 2
    CHECK(seg_loss(logits, lung, infection) - (1.0 - dice) ==
          doctest::Approx(std::log(2.0)).epsilon(1e-9));
}

TEST_CASE("perfect prediction drives the loss to zero") {
    const int n = 1, h = 4, w = 4;
    Tensor lung(n, 1, h, w), infection(n, 1, h, w);
    std::mt19937_64 rng(3);
    for (auto& v : lung.data) v = uniform01(rng) < 0.5 ? 1.0 : 0.0;
    for (auto& v : infection.data) v = uniform01(rng) < 0.3 ? 1.0 : 0.0;

    Tensor logits(n, 2, h, w);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            logits.at(0, 0, y, x) = lung.at(0, 0, y, x) > 0 ? 40.0 : -40.0;
            logits.at(0, 1, y, x) = infection.at(0, 0, y, x) > 0 ? 40.0 : -40.0;
        }
    CHECK(seg_loss(logits, lung, infection) == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("loss decreases as predictions sharpen toward the target") {
    const int n = 1, h = 8, w = 8;
    Tensor lung(n, 1, h, w), infection(n, 1, h, w);
    std::mt19937_64 rng(5);
    for (auto& v : lung.data) v = uniform01(rng) < 0.6 ? 1.0 : 0.0;
    for (auto& v : infection.data) v = uniform01(rng) < 0.2 ? 1.0 : 0.0;

    double prev = 1e18;
    for (double sharp : {0.0, 0.5, 1.0, 2.0, 4.0}) {
        Tensor logits(n, 2, h, w);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                logits.at(0, 0, y, x) = sharp * (lung.at(0, 0, y, x) > 0 ? 1.0 : -1.0);
                logits.at(0, 1, y, x) = sharp * (infection.at(0, 0, y, x) > 0 ? 1.0 : -1.0);
            }
        const double value = seg_loss(logits, lung, infection);
        CHECK(value < prev);
        prev = value;
    }
}

TEST_CASE("loss rejects malformed shapes and non-binary targets") {
    Tensor logits(1, 2, 4, 4), lung(1, 1, 4, 4), infection(1, 1, 4, 4);
    Tensor bad_c(1, 3, 4, 4);
    CHECK_THROWS_AS(seg_loss(bad_c, lung, infection), ShapeMismatch);
    Tensor bad_hw(1, 1, 3, 4);
    CHECK_THROWS_AS(seg_loss(logits, bad_hw, infection), ShapeMismatch);
    Tensor soft = lung;
    soft.data[0] = 0.5;
    CHECK_THROWS_AS(seg_loss(logits, soft, infection), NonBinaryMask);
}

TEST_CASE("loss gradient matches finite differences") {
    CHECK(grad_check_loss(401) < 1e-5);
}
