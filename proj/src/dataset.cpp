#include "ctvol/dataset.hpp"

#include <cmath>
#include <random>

namespace ctvol {

DatasetSplit split_dataset(const std::vector<std::string>& ids,
                           const std::array<double, 3>& fractions, std::uint64_t seed) {
    if (ids.empty()) throw EmptyInput("split_dataset: empty id list");
    const double sum = fractions[0] + fractions[1] + fractions[2];
    if (std::abs(sum - 1.0) > 1e-9 || fractions[0] < 0 || fractions[1] < 0 || fractions[2] < 0)
        throw BadFractions("split_dataset: fractions must be non-negative and sum to 1");

    // Explicit Fisher-Yates so the shuffle is identical across standard
    // library implementations.
    std::vector<std::string> shuffled = ids;
    std::mt19937_64 rng(seed);
    for (std::size_t i = shuffled.size() - 1; i > 0; --i) {
        std::size_t j = static_cast<std::size_t>(rng() % (i + 1));
        std::swap(shuffled[i], shuffled[j]);
    }

    const std::size_t n = shuffled.size();
    std::size_t n_train = static_cast<std::size_t>(std::llround(n * fractions[0]));
    std::size_t n_val = static_cast<std::size_t>(std::llround(n * fractions[1]));
    if (n_train > n) n_train = n;
    if (n_train + n_val > n) n_val = n - n_train;

    DatasetSplit split;
    split.seed = seed;
    split.train_ids.assign(shuffled.begin(), shuffled.begin() + n_train);
    split.val_ids.assign(shuffled.begin() + n_train, shuffled.begin() + n_train + n_val);
    split.test_ids.assign(shuffled.begin() + n_train + n_val, shuffled.end());
    return split;
}

}  // namespace ctvol
