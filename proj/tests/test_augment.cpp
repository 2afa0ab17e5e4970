#include <doctest.h>

#include <cmath>
#include <random>

#include "ctvol/augment.hpp"

using namespace ctvol;

namespace {

Image random_image(std::mt19937_64& rng, int h, int w) {
    std::uniform_real_distribution<float> u(0.0f, 1.0f);
    Image img(h, w);
    for (auto& p : img.px) p = u(rng);
    return img;
}

Image random_mask(std::mt19937_64& rng, int h, int w, double p = 0.4) {
    std::bernoulli_distribution bit(p);
    Image m(h, w);
    for (auto& v : m.px) v = bit(rng) ? 1.0f : 0.0f;
    return m;
}

SliceSample random_sample(std::mt19937_64& rng, int h, int w) {
    SliceSample s;
    s.image = random_image(rng, h, w);
    s.lung_mask = random_mask(rng, h, w);
    s.infection_mask = random_mask(rng, h, w, 0.15);
    s.source_id = "t";
    return s;
}

ResolvedTransform resolved(ResolvedParams p) {
    ResolvedTransform t;
    t.params = std::move(p);
    return t;
}

}  // namespace

TEST_CASE("hflip applied twice restores image and masks bit-exactly") {
    std::mt19937_64 rng(1);
    Image img = random_image(rng, 13, 9);
    Image mask = random_mask(rng, 13, 9);
    auto t = resolved(ResolvedHFlip{});
    auto [img1, masks1] = geometric_transform(img, {mask}, t);
    auto [img2, masks2] = geometric_transform(img1, {masks1[0]}, t);
    CHECK(img2.px == img.px);
    CHECK(masks2[0].px == mask.px);
    CHECK(img1.px != img.px);  // it did flip something
}

TEST_CASE("shift-scale-rotate with identity parameters is the identity") {
    std::mt19937_64 rng(2);
    Image img = random_image(rng, 8, 11);
    Image mask = random_mask(rng, 8, 11);
    auto t = resolved(ResolvedShiftScaleRotate{0.0, 0.0, 1.0, 0.0});
    auto [out_img, out_masks] = geometric_transform(img, {mask}, t);
    CHECK(out_img.px == img.px);
    CHECK(out_masks[0].px == mask.px);
}

TEST_CASE("rotation by 90 degrees maps a single mask pixel to the enumerated coordinate") {
    // integer oracle: with the inverse map src(r,c) = (N-1-c, r), an input
    // pixel (ri, ci) lands at output (ci, N-1-ri)
    for (int n : {7, 8, 16}) {
        std::mt19937_64 rng(100 + n);
        for (int trial = 0; trial < 10; ++trial) {
            const int ri = static_cast<int>(rng() % n);
            const int ci = static_cast<int>(rng() % n);
            Image mask(n, n, 0.0f);
            mask.at(ri, ci) = 1.0f;
            auto t = resolved(ResolvedShiftScaleRotate{0.0, 0.0, 1.0, 90.0});
            auto [out_img, out_masks] = geometric_transform(mask, {mask}, t);
            double sum = 0.0;
            for (float v : out_masks[0].px) sum += v;
            CHECK(sum == 1.0);
            CHECK(out_masks[0].at(ci, n - 1 - ri) == 1.0f);
        }
    }
}

TEST_CASE("crop returns the exact sub-window") {
    std::mt19937_64 rng(3);
    Image img = random_image(rng, 10, 12);
    Image mask = random_mask(rng, 10, 12);
    auto t = resolved(ResolvedCrop{6, 5, 0.999, 0.0});  // u_y ~ bottom, u_x = left
    auto [out_img, out_masks] = geometric_transform(img, {mask}, t);
    REQUIRE(out_img.h == 6);
    REQUIRE(out_img.w == 5);
    for (int r = 0; r < 6; ++r)
        for (int c = 0; c < 5; ++c) {
            CHECK(out_img.at(r, c) == img.at(r + 4, c));
            CHECK(out_masks[0].at(r, c) == mask.at(r + 4, c));
        }
}

TEST_CASE("crop larger than the image is rejected") {
    Image img(4, 4, 0.0f);
    auto t = resolved(ResolvedCrop{5, 4, 0.0, 0.0});
    CHECK_THROWS_AS(geometric_transform(img, {}, t), CropLargerThanImage);
}

TEST_CASE("geometric lockstep: output mask pixels match coordinate enumeration") {
    std::mt19937_64 rng(4);
    std::vector<ResolvedTransform> transforms = {
        resolved(ResolvedHFlip{}),
        resolved(ResolvedShiftScaleRotate{0.03, -0.05, 1.08, 23.0}),
        resolved(ResolvedShiftScaleRotate{-0.0625, 0.0625, 0.9, -15.0}),
        resolved(ResolvedCrop{11, 13, 0.37, 0.82}),
        resolved(ResolvedPerspective{{0.04, -0.03, 0.05, -0.02}, {-0.05, 0.02, 0.03, -0.04}}),
    };
    for (const auto& t : transforms) {
        Image mask = random_mask(rng, 16, 16);
        auto map = coord_map_for(t, 16, 16);
        auto [out_img, out_masks] = geometric_transform(mask, {mask}, t);
        for (int r = 0; r < map.out_h; ++r)
            for (int c = 0; c < map.out_w; ++c) {
                auto [sr, sc] = map.src(r, c);
                const int nr = static_cast<int>(std::floor(sr + 0.5));
                const int nc = static_cast<int>(std::floor(sc + 0.5));
                float expect = 0.0f;
                if (nr >= 0 && nr < 16 && nc >= 0 && nc < 16) expect = mask.at(nr, nc);
                CHECK(out_masks[0].at(r, c) == expect);
            }
    }
}

TEST_CASE("masks stay binary through any geometric transform") {
    std::mt19937_64 rng(5);
    AugSpec spec = AugSpec::defaults(9);
    for (std::uint64_t i = 0; i < 50; ++i) {
        SliceSample s = random_sample(rng, 16, 16);
        SliceSample out = apply_pipeline(spec, i, s);
        CHECK(is_binary(out.lung_mask));
        CHECK(is_binary(out.infection_mask));
        for (float v : out.image.px) {
            CHECK(v >= 0.0f);
            CHECK(v <= 1.0f);
        }
    }
}

TEST_CASE("gaussian noise with zero sigma leaves the image untouched") {
    std::mt19937_64 rng(6);
    Image img = random_image(rng, 9, 9);
    Image out = photometric_transform(img, resolved(ResolvedGaussianNoise{0.0, 1234}));
    CHECK(out.px == img.px);
}

TEST_CASE("brightness +1 saturates everything") {
    std::mt19937_64 rng(7);
    Image img = random_image(rng, 5, 5);
    Image out = photometric_transform(img, resolved(ResolvedBrightness{1.0}));
    for (float p : out.px) CHECK(p == 1.0f);
}

TEST_CASE("contrast leaves a constant image unchanged") {
    Image img(6, 6, 0.3f);
    Image out = photometric_transform(img, resolved(ResolvedContrast{0.7}));
    CHECK(out.px == img.px);
}

TEST_CASE("hue-saturation output stays in range and zero deltas preserve gray") {
    std::mt19937_64 rng(8);
    Image img = random_image(rng, 7, 7);
    Image same = photometric_transform(img, resolved(ResolvedHueSaturation{0.0, 0.0, 0.0}));
    for (std::size_t i = 0; i < img.px.size(); ++i)
        CHECK(same.px[i] == doctest::Approx(img.px[i]).epsilon(1e-6));
    Image shifted = photometric_transform(img, resolved(ResolvedHueSaturation{0.07, 0.1, -0.05}));
    for (float p : shifted.px) {
        CHECK(p >= 0.0f);
        CHECK(p <= 1.0f);
    }
}

TEST_CASE("blur keeps a constant image exactly constant") {
    Image img(9, 9, 0.37f);
    for (int k : {3, 5}) {
        Image out = kernel_filter(img, TransformKind::blur, k);
        for (float p : out.px) CHECK(p == 0.37f);
    }
}

TEST_CASE("motion blur impulse response is a 1/k row segment") {
    Image img(5, 5, 0.0f);
    img.at(2, 2) = 1.0f;
    Image out = kernel_filter(img, TransformKind::motion_blur, 3);
    for (int r = 0; r < 5; ++r)
        for (int c = 0; c < 5; ++c) {
            float expect = (r == 2 && c >= 1 && c <= 3) ? 1.0f / 3.0f : 0.0f;
            CHECK(out.at(r, c) == doctest::Approx(expect));
        }
}

TEST_CASE("sharpen with alpha 0 is the identity") {
    std::mt19937_64 rng(9);
    Image img = random_image(rng, 8, 8);
    Image out = kernel_filter(img, TransformKind::sharpen, 3, 0.0);
    CHECK(out.px == img.px);
}

TEST_CASE("even kernels are rejected") {
    Image img(4, 4, 0.0f);
    CHECK_THROWS_AS(kernel_filter(img, TransformKind::blur, 4), EvenKernel);
    CHECK_THROWS_AS(kernel_filter(img, TransformKind::blur, 1), EvenKernel);
}

TEST_CASE("sample_pipeline honors probability 0 and 1") {
    AugSpec spec = AugSpec::defaults(77);
    for (auto& t : spec.transforms) t.probability = 0.0;
    CHECK(sample_pipeline(spec, 0).empty());

    for (auto& t : spec.transforms) t.probability = 1.0;
    auto resolved_list = sample_pipeline(spec, 0);
    REQUIRE(resolved_list.size() == spec.transforms.size());
    for (std::size_t i = 0; i < resolved_list.size(); ++i)
        CHECK(resolved_list[i].kind() == spec.transforms[i].kind());
}

TEST_CASE("sample_pipeline is deterministic in (seed, sample_index)") {
    AugSpec spec = AugSpec::defaults(13);
    auto a = sample_pipeline(spec, 5);
    auto b = sample_pipeline(spec, 5);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].params == b[i].params);

    // different index draws a different pipeline at least once over 20 tries
    bool differs = false;
    for (std::uint64_t idx = 6; idx < 26 && !differs; ++idx)
        differs = sample_pipeline(spec, idx).size() != a.size();
    CHECK(differs);
}

TEST_CASE("empty pipeline returns the sample unchanged") {
    std::mt19937_64 rng(10);
    SliceSample s = random_sample(rng, 12, 12);
    AugSpec spec;
    spec.seed = 1;
    SliceSample out = apply_pipeline(spec, 0, s);
    CHECK(out.image.px == s.image.px);
    CHECK(out.lung_mask.px == s.lung_mask.px);
    CHECK(out.infection_mask.px == s.infection_mask.px);
}

TEST_CASE("photometric-only pipelines never alter masks") {
    std::mt19937_64 rng(11);
    AugSpec spec = AugSpec::defaults(3);
    // drop the geometric transforms, force the rest on
    std::erase_if(spec.transforms, [](const TransformSpec& t) { return is_geometric(t.kind()); });
    for (auto& t : spec.transforms) t.probability = 1.0;

    for (std::uint64_t i = 0; i < 25; ++i) {
        SliceSample s = random_sample(rng, 16, 16);
        SliceSample out = apply_pipeline(spec, i, s);
        CHECK(out.lung_mask.px == s.lung_mask.px);
        CHECK(out.infection_mask.px == s.infection_mask.px);
    }
}

TEST_CASE("apply_pipeline is byte-identical across repeated runs") {
    std::mt19937_64 rng(12);
    SliceSample s = random_sample(rng, 16, 16);
    AugSpec spec = AugSpec::defaults(21);
    SliceSample first = apply_pipeline(spec, 3, s);
    for (int run = 0; run < 99; ++run) {
        SliceSample again = apply_pipeline(spec, 3, s);
        REQUIRE(again.image.px == first.image.px);
        REQUIRE(again.lung_mask.px == first.lung_mask.px);
        REQUIRE(again.infection_mask.px == first.infection_mask.px);
    }
}

TEST_CASE("augspec json round-trip") {
    AugSpec spec = AugSpec::defaults(42);
    AugSpec back = augspec_from_json(augspec_to_json(spec));
    CHECK(back.seed == spec.seed);
    REQUIRE(back.transforms.size() == spec.transforms.size());
    for (std::size_t i = 0; i < spec.transforms.size(); ++i) {
        CHECK(back.transforms[i].kind() == spec.transforms[i].kind());
        CHECK(back.transforms[i].probability == spec.transforms[i].probability);
        CHECK(back.transforms[i].params == spec.transforms[i].params);
    }
}

TEST_CASE("augspec json rejects malformed input") {
    CHECK_THROWS_AS(augspec_from_json("not json"), ConfigInvalid);
    CHECK_THROWS_AS(augspec_from_json(R"({"seed":1})"), ConfigInvalid);
    CHECK_THROWS_AS(augspec_from_json(R"({"seed":1,"transforms":[{"kind":"wat"}]})"),
                    ConfigInvalid);
    // missing required params for the kind
    CHECK_THROWS_AS(augspec_from_json(R"({"seed":1,"transforms":[{"kind":"gaussian_noise"}]})"),
                    ConfigInvalid);
    // inverted range
    CHECK_THROWS_AS(
        augspec_from_json(
            R"({"seed":1,"transforms":[{"kind":"brightness","delta":[0.5,-0.5]}]})"),
        ConfigInvalid);
    // bad probability
    CHECK_THROWS_AS(
        augspec_from_json(
            R"({"seed":1,"transforms":[{"kind":"hflip","probability":1.5}]})"),
        ConfigInvalid);
}
