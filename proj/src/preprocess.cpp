#include "mta/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mta/errors.hpp"
#include "mta/rng.hpp"

namespace mta {

void validate_preprocess_config(const PreprocessConfig& config) {
  if (config.max_touches < 1) throw InvalidInput("max_touches must be >= 1");
  if (!(config.target_positive_ratio > 0.0 && config.target_positive_ratio < 1.0)) {
    throw InvalidInput("target_positive_ratio must lie in (0, 1)");
  }
  if (config.max_customers && *config.max_customers == 0) {
    throw InvalidInput("max_customers must be >= 1");
  }
}

std::size_t negatives_to_keep(std::size_t positives, double ratio) {
  // The small slack absorbs rounding when the quotient is an exact integer.
  const double exact = static_cast<double>(positives) * (1.0 - ratio) / ratio;
  return static_cast<std::size_t>(std::floor(exact + 1e-9));
}

namespace {

// Seeded uniform choice of `count` positions out of `n`, returned sorted.
std::vector<std::size_t> choose_sorted(std::size_t n, std::size_t count, Rng& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  // Partial Fisher-Yates.
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(count);
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace

std::vector<Journey> preprocess(std::span<const Journey> journeys,
                                const PreprocessConfig& config) {
  validate_preprocess_config(config);
  std::vector<Journey> kept;
  for (const Journey& j : journeys) {
    if (j.touches.size() <= config.max_touches) kept.push_back(j);
  }

  std::vector<std::size_t> positives;
  std::vector<std::size_t> negatives;
  for (std::size_t i = 0; i < kept.size(); ++i) {
    (kept[i].outcome > 0.0 ? positives : negatives).push_back(i);
  }

  const double ratio = kept.empty() ? 0.0
                                    : static_cast<double>(positives.size()) /
                                          static_cast<double>(kept.size());
  if (!negatives.empty() && ratio < config.target_positive_ratio) {
    Rng rng(config.subsample_seed, 0);
    const std::size_t n_keep =
        std::min(negatives.size(), negatives_to_keep(positives.size(), config.target_positive_ratio));
    std::vector<bool> keep(kept.size(), false);
    for (std::size_t p : positives) keep[p] = true;
    for (std::size_t k : choose_sorted(negatives.size(), n_keep, rng)) keep[negatives[k]] = true;
    std::vector<Journey> balanced;
    for (std::size_t i = 0; i < kept.size(); ++i) {
      if (keep[i]) balanced.push_back(std::move(kept[i]));
    }
    kept = std::move(balanced);
  }

  if (config.max_customers && kept.size() > *config.max_customers) {
    Rng rng(config.subsample_seed, 1);
    std::vector<Journey> capped;
    for (std::size_t i : choose_sorted(kept.size(), *config.max_customers, rng)) {
      capped.push_back(std::move(kept[i]));
    }
    kept = std::move(capped);
  }

  if (kept.empty()) throw EmptyDataset("no journeys left after preprocessing");
  return kept;
}

}  // namespace mta
