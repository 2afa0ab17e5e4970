#include <doctest.h>

#include <random>

#include "ctvol/metrics.hpp"

using namespace ctvol;

namespace {

Image random_mask(std::mt19937_64& rng, int h, int w, double p = 0.5) {
    std::bernoulli_distribution bit(p);
    Image m(h, w);
    for (auto& v : m.px) v = bit(rng) ? 1.0f : 0.0f;
    return m;
}

// independent per-pixel loop, kept deliberately naive
ConfusionCounts oracle_counts(const Image& pred, const Image& gt) {
    ConfusionCounts c;
    for (int r = 0; r < pred.h; ++r)
        for (int col = 0; col < pred.w; ++col) {
            int p = pred.at(r, col) != 0.0f ? 1 : 0;
            int g = gt.at(r, col) != 0.0f ? 1 : 0;
            c.tp += p == 1 && g == 1;
            c.fp += p == 1 && g == 0;
            c.fn += p == 0 && g == 1;
            c.tn += p == 0 && g == 0;
        }
    return c;
}

}  // namespace

TEST_CASE("confusion counts on tiny hand cases") {
    Image ones(2, 2, 1.0f), zeros(2, 2, 0.0f);
    auto a = confusion_counts(ones, ones);
    CHECK(a.tp == 4);
    CHECK(a.fp == 0);
    CHECK(a.fn == 0);
    CHECK(a.tn == 0);
    auto b = confusion_counts(ones, zeros);
    CHECK(b.tp == 0);
    CHECK(b.fp == 4);
    CHECK(b.fn == 0);
    CHECK(b.tn == 0);
}

TEST_CASE("confusion counts match the pixel-loop oracle on 100 random 64x64 pairs") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 100; ++trial) {
        Image pred = random_mask(rng, 64, 64, 0.2 + 0.6 * (trial / 99.0));
        Image gt = random_mask(rng, 64, 64, 0.5);
        auto got = confusion_counts(pred, gt);
        auto want = oracle_counts(pred, gt);
        CHECK(got.tp == want.tp);
        CHECK(got.fp == want.fp);
        CHECK(got.fn == want.fn);
        CHECK(got.tn == want.tn);
        CHECK(got.total() == 64u * 64u);
    }
}

TEST_CASE("confusion counts reject bad input") {
    Image a(2, 2, 1.0f), b(2, 3, 1.0f), c(2, 2, 0.5f);
    CHECK_THROWS_AS(confusion_counts(a, b), ShapeMismatch);
    CHECK_THROWS_AS(confusion_counts(a, c), NonBinaryInput);
}

TEST_CASE("iou basics") {
    CHECK(iou({4, 0, 0, 0}) == 1.0);
    CHECK(iou({0, 2, 2, 0}) == 0.0);
    CHECK(iou({1, 1, 2, 0}) == doctest::Approx(0.25));
    CHECK(iou({1, 1, 1, 1}) == doctest::Approx(1.0 / 3.0));  // 2 pred, 2 gt, overlap 1
    CHECK(iou({0, 0, 0, 9}) == 1.0);                         // both empty
}

TEST_CASE("iou is symmetric in pred and gt") {
    std::mt19937_64 rng(37);
    for (int trial = 0; trial < 50; ++trial) {
        Image a = random_mask(rng, 16, 16), b = random_mask(rng, 16, 16);
        CHECK(iou(confusion_counts(a, b)) == iou(confusion_counts(b, a)));
    }
}

TEST_CASE("iou stays in [0,1] and is 1 iff masks identical (nonempty union)") {
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 100; ++trial) {
        Image a = random_mask(rng, 8, 8), b = random_mask(rng, 8, 8);
        double v = iou(confusion_counts(a, b));
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
        if (v == 1.0) CHECK(a.px == b.px);
        if (a.px == b.px) CHECK(v == 1.0);
    }
}

TEST_CASE("turning a missed pixel into a hit never decreases iou") {
    std::mt19937_64 rng(43);
    for (int trial = 0; trial < 50; ++trial) {
        Image gt = random_mask(rng, 8, 8, 0.6);
        Image pred = random_mask(rng, 8, 8, 0.4);
        double before = iou(confusion_counts(pred, gt));
        // flip one fn -> tp if any exists
        Image fixed = pred;
        bool flipped = false;
        for (std::size_t i = 0; i < gt.px.size() && !flipped; ++i)
            if (gt.px[i] == 1.0f && pred.px[i] == 0.0f) {
                fixed.px[i] = 1.0f;
                flipped = true;
            }
        if (!flipped) continue;
        double after = iou(confusion_counts(fixed, gt));
        CHECK(after >= before);
    }
}

TEST_CASE("dataset_iou pools counts before dividing") {
    // two slices with pooled counts tp=3, fp=1, fn=2 -> 0.5
    Image p1(1, 3), g1(1, 3), p2(1, 3), g2(1, 3);
    p1.px = {1, 1, 0};
    g1.px = {1, 1, 1};  // tp=2, fn=1
    p2.px = {1, 1, 0};
    g2.px = {1, 0, 1};  // tp=1, fp=1, fn=1
    SlicePair a{p1, g1, Image(1, 3, 0.0f), Image(1, 3, 0.0f)};
    SlicePair b{p2, g2, Image(1, 3, 0.0f), Image(1, 3, 0.0f)};
    auto result = dataset_iou({a, b});
    CHECK(result.lung == doctest::Approx(0.5));
    CHECK(result.infection == 1.0);  // all-empty infection masks agree
}

TEST_CASE("dataset_iou equals the pooled pixel-loop oracle on 20 random slices") {
    std::mt19937_64 rng(47);
    std::vector<SlicePair> pairs;
    ConfusionCounts lung, inf;
    for (int i = 0; i < 20; ++i) {
        SlicePair sp{random_mask(rng, 32, 32), random_mask(rng, 32, 32),
                     random_mask(rng, 32, 32, 0.15), random_mask(rng, 32, 32, 0.15)};
        lung += oracle_counts(sp.pred_lung, sp.gt_lung);
        inf += oracle_counts(sp.pred_infection, sp.gt_infection);
        pairs.push_back(std::move(sp));
    }
    auto result = dataset_iou(pairs);
    CHECK(result.lung == iou(lung));
    CHECK(result.infection == iou(inf));
}

TEST_CASE("dataset_iou on perfect predictions is (1,1)") {
    std::mt19937_64 rng(53);
    std::vector<SlicePair> pairs;
    for (int i = 0; i < 5; ++i) {
        Image lungm = random_mask(rng, 8, 8);
        Image infm = random_mask(rng, 8, 8, 0.2);
        pairs.push_back({lungm, lungm, infm, infm});
    }
    auto result = dataset_iou(pairs);
    CHECK(result.lung == 1.0);
    CHECK(result.infection == 1.0);
}

TEST_CASE("dataset_iou rejects an empty sequence") {
    CHECK_THROWS_AS(dataset_iou({}), EmptyDataset);
}
