#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "ctvol/dataset.hpp"

using namespace ctvol;

namespace {

std::vector<std::string> make_ids(int n) {
    std::vector<std::string> ids;
    ids.reserve(n);
    for (int i = 0; i < n; ++i) ids.push_back("s" + std::to_string(i));
    return ids;
}

}  // namespace

TEST_CASE("split of 2172 ids reproduces the 1789/207/176 counts") {
    auto ids = make_ids(2172);
    auto split = split_dataset(ids, {1789.0 / 2172.0, 207.0 / 2172.0, 176.0 / 2172.0}, 42);
    CHECK(split.train_ids.size() == 1789);
    CHECK(split.val_ids.size() == 207);
    CHECK(split.test_ids.size() == 176);
}

TEST_CASE("ten ids at 0.8/0.1/0.1 split 8/1/1") {
    auto split = split_dataset(make_ids(10), {0.8, 0.1, 0.1}, 0);
    CHECK(split.train_ids.size() == 8);
    CHECK(split.val_ids.size() == 1);
    CHECK(split.test_ids.size() == 1);
}

TEST_CASE("same seed reproduces the identical split") {
    auto ids = make_ids(97);
    auto a = split_dataset(ids, {0.7, 0.2, 0.1}, 1234);
    auto b = split_dataset(ids, {0.7, 0.2, 0.1}, 1234);
    CHECK(a.train_ids == b.train_ids);
    CHECK(a.val_ids == b.val_ids);
    CHECK(a.test_ids == b.test_ids);

    auto c = split_dataset(ids, {0.7, 0.2, 0.1}, 1235);
    CHECK(a.train_ids != c.train_ids);
}

TEST_CASE("splits partition the input and counts are within one of N*f") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 40; ++trial) {
        int n = 1 + static_cast<int>(rng() % 500);
        double f1 = 0.5 + (rng() % 40) / 100.0;  // 0.5 .. 0.89
        double f2 = (1.0 - f1) * 0.5;
        auto ids = make_ids(n);
        auto split = split_dataset(ids, {f1, f2, 1.0 - f1 - f2}, rng());

        std::set<std::string> all(ids.begin(), ids.end());
        std::set<std::string> seen;
        for (const auto& v : {split.train_ids, split.val_ids, split.test_ids})
            for (const auto& id : v) {
                CHECK(seen.insert(id).second);  // pairwise disjoint
                CHECK(all.count(id) == 1);
            }
        CHECK(seen.size() == all.size());  // union covers everything

        CHECK(std::abs(static_cast<double>(split.train_ids.size()) - n * f1) <= 1.0);
        CHECK(std::abs(static_cast<double>(split.val_ids.size()) - n * f2) <= 1.0);
        CHECK(std::abs(static_cast<double>(split.test_ids.size()) - n * (1.0 - f1 - f2)) <= 1.0);
    }
}

TEST_CASE("bad inputs are rejected") {
    CHECK_THROWS_AS(split_dataset({}, {0.8, 0.1, 0.1}, 0), EmptyInput);
    CHECK_THROWS_AS(split_dataset(make_ids(5), {0.8, 0.1, 0.2}, 0), BadFractions);
    CHECK_THROWS_AS(split_dataset(make_ids(5), {1.2, -0.1, -0.1}, 0), BadFractions);
}
