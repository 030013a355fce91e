// Copyright 2026 The Spectra Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <random>
#include <string>

#include <Eigen/Core>

#include "oracles.hpp"
#include "spectra/mls.hpp"

namespace spectra::test {

inline ControlMatrices toMatrices(const oracle::Instance& inst) {
  const auto p = static_cast<Eigen::Index>(inst.u.front().size());
  const auto n = static_cast<Eigen::Index>(inst.u.size());
  Eigen::MatrixXd u(p, n);
  Eigen::Matrix3Xd v(3, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    for (Eigen::Index i = 0; i < p; ++i) u(i, k) = inst.u[k][i];
    for (int c = 0; c < 3; ++c) v(c, k) = inst.v[k][c];
  }
  return ControlMatrices(std::move(u), std::move(v));
}

inline Eigen::VectorXd toEigen(const oracle::Vec& x) {
  return Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
}

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratchDir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("spectra_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace spectra::test
