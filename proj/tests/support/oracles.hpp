// Copyright 2026 The Spectra Authors
// SPDX-License-Identifier: Apache-2.0

// Reference computations used only by tests. Nothing here calls into the
// library's solver; weights, normal equations and objective sums are built
// term by term from plain vectors.

#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

namespace spectra::oracle {

using Vec = std::vector<double>;
using Columns = std::vector<Vec>;  // one vector per control point

inline double angle(const Vec& a, const Vec& b) {
  long double dot = 0, aa = 0, bb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += static_cast<long double>(a[i]) * b[i];
    aa += static_cast<long double>(a[i]) * a[i];
    bb += static_cast<long double>(b[i]) * b[i];
  }
  long double c = dot / std::sqrt(aa * bb);
  if (c > 1) c = 1;
  if (c < -1) c = -1;
  return static_cast<double>(std::acos(c));
}

inline Vec inverseAngleWeights(const Vec& x, const Columns& u, double epsilon, double exponent) {
  Vec w;
  for (const auto& uk : u) w.push_back(std::pow(std::max(angle(x, uk), epsilon), -exponent));
  return w;
}

/// Gaussian elimination with partial pivoting in extended precision.
inline std::vector<long double> gaussSolve(std::vector<std::vector<long double>> a,
                                           std::vector<long double> rhs) {
  const std::size_t n = rhs.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::fabs(a[r][col]) > std::fabs(a[pivot][col])) pivot = r;
    }
    if (a[pivot][col] == 0) throw std::runtime_error("oracle: singular system");
    std::swap(a[col], a[pivot]);
    std::swap(rhs[col], rhs[pivot]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const long double f = a[r][col] / a[col][col];
      for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      rhs[r] -= f * rhs[col];
    }
  }
  std::vector<long double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    long double s = rhs[i];
    for (std::size_t c = i + 1; c < n; ++c) s -= a[i][c] * x[c];
    x[i] = s / a[i][i];
  }
  return x;
}

struct AffineSolution {
  std::vector<std::array<double, 3>> linear;  // p rows, 3 columns
  std::array<double, 3> offset{};
};

/// Minimizes sum_k w_k |F^T u_k + b - v_k|^2 channel by channel, with the
/// unknowns (F[:,c], b_c) stacked into one (p+1)-vector and the normal
/// equations sum_k w_k a_k a_k^T theta = sum_k w_k a_k v_kc, a_k = [u_k; 1].
inline AffineSolution summationSolve(const Columns& u, const std::vector<std::array<double, 3>>& v,
                                     const Vec& w) {
  const std::size_t p = u.front().size();
  AffineSolution out;
  out.linear.assign(p, {0, 0, 0});
  for (int c = 0; c < 3; ++c) {
    std::vector<std::vector<long double>> normal(p + 1, std::vector<long double>(p + 1, 0));
    std::vector<long double> rhs(p + 1, 0);
    for (std::size_t k = 0; k < u.size(); ++k) {
      for (std::size_t i = 0; i <= p; ++i) {
        const long double ai = i < p ? u[k][i] : 1.0L;
        for (std::size_t j = 0; j <= p; ++j) {
          const long double aj = j < p ? u[k][j] : 1.0L;
          normal[i][j] += w[k] * ai * aj;
        }
        rhs[i] += w[k] * ai * v[k][c];
      }
    }
    const auto theta = gaussSolve(normal, rhs);
    for (std::size_t i = 0; i < p; ++i) out.linear[i][c] = static_cast<double>(theta[i]);
    out.offset[c] = static_cast<double>(theta[p]);
  }
  return out;
}

inline double summationObjective(const AffineSolution& m, const Columns& u,
                                 const std::vector<std::array<double, 3>>& v, const Vec& w) {
  long double total = 0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    for (int c = 0; c < 3; ++c) {
      long double y = m.offset[c];
      for (std::size_t i = 0; i < u[k].size(); ++i) y += m.linear[i][c] * u[k][i];
      const long double r = y - v[k][c];
      total += w[k] * r * r;
    }
  }
  return static_cast<double>(total);
}

/// Random control instance with strictly positive signatures.
struct Instance {
  Columns u;
  std::vector<std::array<double, 3>> v;
  Vec x;
};

inline Instance randomInstance(std::mt19937_64& rng, std::size_t p, std::size_t n) {
  std::uniform_real_distribution<double> band(0.05, 1.0);
  std::uniform_real_distribution<double> color(0.0, 255.0);
  Instance inst;
  for (std::size_t k = 0; k < n; ++k) {
    Vec uk(p);
    for (auto& e : uk) e = band(rng);
    inst.u.push_back(uk);
    inst.v.push_back({color(rng), color(rng), color(rng)});
  }
  inst.x.resize(p);
  for (auto& e : inst.x) e = band(rng);
  return inst;
}

}  // namespace spectra::oracle
