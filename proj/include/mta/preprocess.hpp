#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mta/model.hpp"

namespace mta {

struct PreprocessConfig {
  std::size_t max_touches = 5;
  double target_positive_ratio = 0.7;
  std::uint64_t subsample_seed = 1;
  std::optional<std::size_t> max_customers;
};

void validate_preprocess_config(const PreprocessConfig& config);

/// Drops journeys with more than max_touches touches, then keeps every
/// converting journey (outcome > 0) and a seeded uniform subset of the others
/// so that positives / total >= target_positive_ratio, then optionally caps the
/// result at max_customers. Surviving journeys keep their input order.
/// Throws EmptyDataset if nothing survives.
std::vector<Journey> preprocess(std::span<const Journey> journeys, const PreprocessConfig& config);

/// Number of negatives kept next to `positives` at the target ratio:
/// floor(positives * (1 - ratio) / ratio).
std::size_t negatives_to_keep(std::size_t positives, double ratio);

}  // namespace mta
