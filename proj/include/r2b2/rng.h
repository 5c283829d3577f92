// Copyright 2026 The R2B2 Authors. All rights reserved.
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

#ifndef R2B2_RNG_H_
#define R2B2_RNG_H_

#include <cstdint>
#include <random>
#include <string_view>

namespace r2b2 {

using Rng = std::mt19937_64;

// SplitMix64 finalizer. Used for counter-based seed derivation so that every
// stream (game draw, replication, agent, iteration) can be reconstructed
// independently from the master seed.
constexpr std::uint64_t Mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t HashTag(std::string_view tag) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Child seed for stream `tag` at position `index` below `parent`.
constexpr std::uint64_t DeriveSeed(std::uint64_t parent, std::string_view tag,
                                   std::uint64_t index = 0) {
  return Mix64(Mix64(parent ^ HashTag(tag)) + index);
}

inline Rng MakeRng(std::uint64_t seed) { return Rng(seed); }

}  // namespace r2b2

#endif  // R2B2_RNG_H_
