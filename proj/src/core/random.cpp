// Copyright 2026 The Spectra Authors
// SPDX-License-Identifier: Apache-2.0

#include "spectra/random.hpp"

#include <algorithm>
#include <unordered_set>

#include "spectra/error.hpp"

namespace spectra {

std::uint64_t Rng::below(std::uint64_t bound) {
  if (bound == 0) fail(ErrorCode::kInvalid, "rng: empty range");
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
  std::uint64_t r = engine_();
  while (r >= limit) r = engine_();
  return r % bound;
}

std::vector<std::uint64_t> sampleWithoutReplacement(Rng& rng, std::uint64_t population,
                                                    std::uint64_t count) {
  if (count > population) fail(ErrorCode::kInvalid, "sample larger than population");
  // Floyd's algorithm: count draws, no O(population) storage.
  std::unordered_set<std::uint64_t> chosen;
  std::vector<std::uint64_t> out;
  out.reserve(count);
  for (std::uint64_t j = population - count; j < population; ++j) {
    const std::uint64_t t = rng.below(j + 1);
    const std::uint64_t pick = chosen.insert(t).second ? t : j;
    if (pick == j) chosen.insert(j);
    out.push_back(pick);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace spectra
