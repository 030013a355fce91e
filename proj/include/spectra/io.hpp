// Copyright 2026 The Spectra Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spectra/control_points.hpp"
#include "spectra/raster.hpp"

namespace spectra {

enum class Interleave { kBsq, kBil, kBip };
enum class DataType { kUInt8 = 1, kUInt16 = 2, kFloat32 = 4 };
enum class ByteOrder { kLittle = 0, kBig = 1 };

/// Parsed `key = value` cube header.
struct CubeHeader {
  int samples = 0;
  int lines = 0;
  int bands = 0;
  Interleave interleave = Interleave::kBsq;
  DataType dataType = DataType::kFloat32;
  ByteOrder byteOrder = ByteOrder::kLittle;
  std::vector<double> wavelengths;
  std::string dataFile;  // optional explicit sibling name
  std::size_t headerOffset = 0;  // bytes to skip at the start of the data file

  std::size_t elementSize() const noexcept {
    return static_cast<std::size_t>(dataType);
  }
  std::size_t expectedBytes() const noexcept {
    return static_cast<std::size_t>(samples) * lines * bands * elementSize();
  }
};

CubeHeader parseCubeHeader(std::string_view text);
std::string formatCubeHeader(const CubeHeader& header);

/// Decodes raw sample bytes laid out per `header`.
SpectralCube decodeCube(const CubeHeader& header,
                        std::span<const std::uint8_t> raw);

/// Reads a header file and its sibling raw file. The raw file is the
/// `data file` key when present, else the header path without its `.hdr`
/// extension, else that stem with `.raw`, `.img`, `.dat` or `.bsq`.
SpectralCube readCube(const std::filesystem::path& headerPath);

/// Writes `<stem>.hdr` + `<stem>.raw` as band-sequential data. Float32
/// unless `type` is an integer type, in which case values must already be
/// integral and in range.
void writeCube(const SpectralCube& cube, const std::filesystem::path& headerPath,
               DataType type = DataType::kFloat32,
               ByteOrder order = ByteOrder::kLittle);

struct RgbReadResult {
  RgbImage image;
  std::vector<std::string> warnings;  // e.g. alpha channel dropped
};

RgbReadResult decodePng(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encodePng(const RgbImage& image);
RgbReadResult readRgb(const std::filesystem::path& path);
void writeRgb(const RgbImage& image, const std::filesystem::path& path);

/// Control-point document: version, bands, sensor, pairs, in that order.
std::string formatControlPoints(const ControlPointSet& set);
/// Same layout, allowing an empty pair list (used for live listings).
std::string formatControlPairs(int bands, const std::string& sensor,
                               const std::vector<ControlPair>& pairs);
ControlPointSet parseControlPoints(std::string_view text);
ControlPointSet readControlPoints(const std::filesystem::path& path);
void writeControlPoints(const ControlPointSet& set,
                        const std::filesystem::path& path);

std::vector<std::uint8_t> readFileBytes(const std::filesystem::path& path);
void writeFileBytes(const std::filesystem::path& path,
                    std::span<const std::uint8_t> bytes);

}  // namespace spectra
