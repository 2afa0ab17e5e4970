#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "ctvol/errors.hpp"

namespace ctvol {

struct DatasetSplit {
    std::vector<std::string> train_ids;
    std::vector<std::string> val_ids;
    std::vector<std::string> test_ids;
    std::uint64_t seed = 0;
};

// Seeded shuffle, then train = round(N*f_train) ids, val = round(N*f_val),
// test takes the remainder. Deterministic for fixed (ids, fractions, seed).
DatasetSplit split_dataset(const std::vector<std::string>& ids,
                           const std::array<double, 3>& fractions, std::uint64_t seed);

}  // namespace ctvol
