// Copyright 2026 The Spectra Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "spectra/raster.hpp"

namespace spectra {

struct PixelCoord {
  int x = 0;
  int y = 0;
  friend bool operator==(const PixelCoord&, const PixelCoord&) = default;
};

/// One matched (spectral signature, color) pair, with optional pixel
/// coordinates in the source cube and reference image.
struct ControlPair {
  std::vector<double> u;
  Rgb v{};
  std::optional<PixelCoord> hsi;
  std::optional<PixelCoord> rgb;

  friend bool operator==(const ControlPair&, const ControlPair&) = default;
};

/// Checks a single pair against a declared band count. Throws
/// Error(kFormat) on length mismatch or non-finite entries, Error(kInvalid)
/// on an all-zero signature.
void validatePair(const ControlPair& pair, int bands);

/// A non-empty set of control pairs sharing one band count.
class ControlPointSet {
 public:
  ControlPointSet(int bands, std::vector<ControlPair> pairs,
                  std::string sensorTag = {});

  int bands() const noexcept { return bands_; }
  std::size_t size() const noexcept { return pairs_.size(); }
  const std::vector<ControlPair>& pairs() const noexcept { return pairs_; }
  const ControlPair& operator[](std::size_t i) const { return pairs_[i]; }
  const std::string& sensorTag() const noexcept { return sensorTag_; }

  friend bool operator==(const ControlPointSet&,
                         const ControlPointSet&) = default;

 private:
  int bands_;
  std::vector<ControlPair> pairs_;
  std::string sensorTag_;
};

}  // namespace spectra
