#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "swag/graph.hpp"

namespace swag {

struct FoldSplit {
    std::vector<std::size_t> train_idx;
    std::vector<std::size_t> val_idx;
    std::vector<std::size_t> test_idx;
};

/// Stratified k-fold splits. Each class is shuffled and dealt round-robin over
/// the folds. Inside each split, ceil(10%) of the non-test part is carved out
/// as validation, allocated over classes by largest remainder with at least one
/// graph per class that has two or more non-test members.
std::vector<FoldSplit> stratified_folds(const Dataset& ds, int k, std::uint64_t seed);

/// Same, over an explicit label vector.
std::vector<FoldSplit> stratified_folds(const std::vector<int>& labels, int num_classes, int k, std::uint64_t seed);

} // namespace swag
