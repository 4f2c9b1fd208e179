// Copyright 2026 The GINTRIP Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef GINTRIP_TESTS_SUPPORT_HPP
#define GINTRIP_TESTS_SUPPORT_HPP

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <random>
#include <string>

#include "gintrip/autodiff.hpp"
#include "gintrip/rng.hpp"

namespace gintrip::testing {

inline std::filesystem::path fixture(const std::string& name) {
  return std::filesystem::path(GINTRIP_FIXTURES) / name;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("gintrip_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline ad::Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed, double scale = 1.0) {
  Rng rng = make_stream(seed, {0x7e57});
  std::normal_distribution<double> normal(0.0, scale);
  ad::Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
  return m;
}

using ScalarFn = std::function<ad::Var(const ad::Var&)>;

/// Largest relative error between the tape gradient of f at x0 and
/// central finite differences.
inline double max_grad_error(const ad::Matrix& x0, const ScalarFn& f, double step = 1e-5, double floor = 1e-6) {
  ad::Tape tape;
  const ad::Var x = tape.variable(x0);
  tape.backward(f(x));
  const ad::Matrix analytic = x.grad();
  double worst = 0.0;
  for (Eigen::Index i = 0; i < x0.size(); ++i) {
    ad::Matrix plus = x0, minus = x0;
    plus.data()[i] += step;
    minus.data()[i] -= step;
    ad::Tape tp, tm;
    const double fp = f(tp.variable(plus)).scalar();
    const double fm = f(tm.variable(minus)).scalar();
    const double numeric = (fp - fm) / (2.0 * step);
    const double a = analytic.data()[i];
    const double err = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), floor});
    worst = std::max(worst, err);
  }
  return worst;
}

}  // namespace gintrip::testing

#endif  // GINTRIP_TESTS_SUPPORT_HPP
