// Copyright 2026 The RideGym Authors
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

// Error types, seed derivation and small numeric helpers shared by every
// module.

#ifndef RIDEGYM_COMMON_H_
#define RIDEGYM_COMMON_H_

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <iostream>
#include <random>
#include <stdexcept>
#include <string>

namespace ridegym {

// Invalid or inconsistent configuration (scenario files, cluster counts).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A caller violated an operation's precondition.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Non-finite values where finite ones are required.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Exhaustive enumeration requested on an instance that is too large.
class SizeError : public std::length_error {
 public:
  using std::length_error::length_error;
};

// A metric whose denominator (or label mix) makes it undefined.
class UndefinedMetricError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

using Rng = std::mt19937_64;

// SplitMix64 finalizer; good avalanche, used to derive independent streams.
constexpr uint64_t Mix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Derives a stream seed from a base seed and a path of stream identifiers,
// e.g. DeriveSeed(seed, {kStreamOrders, split, slot}).
inline uint64_t DeriveSeed(uint64_t seed, std::initializer_list<uint64_t> path) {
  uint64_t h = Mix64(seed);
  for (uint64_t p : path) h = Mix64(h ^ Mix64(p + 0x632be59bd9b4e019ULL));
  return h;
}

inline Rng MakeRng(uint64_t seed, std::initializer_list<uint64_t> path) {
  return Rng(DeriveSeed(seed, path));
}

inline double Sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

inline double Softplus(double x) {
  return x > 30 ? x : std::log1p(std::exp(x));
}

inline double NormalCdf(double x) {
  return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

inline void LogWarning(const std::string& message) {
  std::clog << "[ridegym] warning: " << message << '\n';
}

inline void LogInfo(const std::string& message) {
  std::clog << "[ridegym] " << message << '\n';
}

}  // namespace ridegym

#endif  // RIDEGYM_COMMON_H_
