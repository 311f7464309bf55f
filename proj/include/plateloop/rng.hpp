// Copyright 2026 plateloop authors.
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

#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace plateloop {

/// Stateless seed mixing (splitmix64 finalizer). Used to derive independent
/// stream seeds from a root seed plus a stable text label, so the draw
/// sequence of one stream never depends on how other streams are consumed.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// FNV-1a over the label bytes.
inline std::uint64_t hash_label(std::string_view label) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : label) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t derive_seed(std::uint64_t root, std::string_view label) {
  return mix64(root ^ mix64(hash_label(label)));
}

inline std::uint64_t derive_run_seed(std::uint64_t master_seed,
                                     std::string_view scenario_id,
                                     int run_index) {
  return mix64(derive_seed(master_seed, scenario_id) ^
               static_cast<std::uint64_t>(run_index));
}

/// Seeded random stream with portable draws. std::mt19937_64 output is fixed
/// by the standard; the double conversion below avoids
/// std::uniform_real_distribution, whose output is implementation-defined.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : eng_(seed) {}
  RngStream(std::uint64_t root_seed, std::string_view label)
      : eng_(derive_seed(root_seed, label)) {}

  /// Uniform in [0, 1) with 53-bit resolution.
  double uniform01() {
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  bool bernoulli(double p) { return uniform01() < p; }

 private:
  std::mt19937_64 eng_;
};

}  // namespace plateloop
