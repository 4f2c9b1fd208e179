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

#ifndef GINTRIP_RNG_HPP
#define GINTRIP_RNG_HPP

#include <cstdint>
#include <initializer_list>
#include <random>

namespace gintrip {

using Rng = std::mt19937_64;

// splitmix64 finalizer.
inline std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Derives an independent stream from a base seed and a list of stream
/// coordinates (e.g. epoch, window_start), so per-sample noise does not
/// depend on iteration order.
inline Rng make_stream(std::uint64_t seed,
                       std::initializer_list<std::uint64_t> coords) {
  std::uint64_t s = mix_seed(seed);
  for (std::uint64_t c : coords) s = mix_seed(s ^ mix_seed(c + 0x632be59bd9b4e019ULL));
  return Rng(s);
}

}  // namespace gintrip

#endif  // GINTRIP_RNG_HPP
