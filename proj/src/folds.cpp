#include "swag/folds.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "swag/random.hpp"

namespace swag {

std::vector<FoldSplit> stratified_folds(const Dataset& ds, int k, std::uint64_t seed) {
    return stratified_folds(ds.labels(), ds.num_classes, k, seed);
}

std::vector<FoldSplit> stratified_folds(const std::vector<int>& labels, int num_classes, int k, std::uint64_t seed) {
    if (k < 2) throw ConfigError("stratified_folds: k must be at least 2");
    std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(num_classes));
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || labels[i] >= num_classes) throw ConfigError("stratified_folds: unlabeled or out-of-range graph");
        by_class[static_cast<std::size_t>(labels[i])].push_back(i);
    }
    for (int c = 0; c < num_classes; ++c)
        if (!by_class[c].empty() && static_cast<int>(by_class[c].size()) < k)
            throw ConfigError("stratified_folds: class " + std::to_string(c) + " has fewer members than folds");

    Rng rng(derive_seed(seed, {0xf01d}));
    std::vector<std::vector<std::size_t>> fold_members(static_cast<std::size_t>(k));
    std::size_t cursor = 0;
    for (auto& members : by_class) {
        std::shuffle(members.begin(), members.end(), rng);
        for (std::size_t idx : members) fold_members[cursor++ % k].push_back(idx);
    }

    std::vector<FoldSplit> splits(static_cast<std::size_t>(k));
    for (int f = 0; f < k; ++f) {
        FoldSplit& split = splits[f];
        split.test_idx = fold_members[f];
        std::sort(split.test_idx.begin(), split.test_idx.end());

        std::vector<std::vector<std::size_t>> rest(static_cast<std::size_t>(num_classes));
        std::size_t rest_total = 0;
        for (int g = 0; g < k; ++g) {
            if (g == f) continue;
            for (std::size_t idx : fold_members[g]) {
                rest[static_cast<std::size_t>(labels[idx])].push_back(idx);
                ++rest_total;
            }
        }
        for (auto& members : rest) {
            std::sort(members.begin(), members.end());
            std::shuffle(members.begin(), members.end(), rng);
        }

        const auto target = static_cast<std::size_t>(std::ceil(0.1 * static_cast<double>(rest_total)));
        std::vector<std::size_t> quota(rest.size(), 0);
        std::vector<std::pair<double, std::size_t>> remainders;
        std::size_t assigned = 0;
        for (std::size_t c = 0; c < rest.size(); ++c) {
            const double exact = static_cast<double>(target) * static_cast<double>(rest[c].size()) / static_cast<double>(rest_total);
            quota[c] = static_cast<std::size_t>(std::floor(exact));
            if (quota[c] == 0 && rest[c].size() >= 2)
                quota[c] = 1;
            else
                remainders.emplace_back(exact - std::floor(exact), c);
            assigned += quota[c];
        }
        std::stable_sort(remainders.begin(), remainders.end(),
                         [](const auto& a, const auto& b) { return a.first > b.first; });
        for (const auto& [frac, c] : remainders) {
            if (assigned >= target) break;
            if (quota[c] + 1 < rest[c].size()) {
                ++quota[c];
                ++assigned;
            }
        }

        for (std::size_t c = 0; c < rest.size(); ++c) {
            for (std::size_t i = 0; i < rest[c].size(); ++i)
                (i < quota[c] ? split.val_idx : split.train_idx).push_back(rest[c][i]);
        }
        std::sort(split.train_idx.begin(), split.train_idx.end());
        std::sort(split.val_idx.begin(), split.val_idx.end());
    }
    return splits;
}

} // namespace swag
