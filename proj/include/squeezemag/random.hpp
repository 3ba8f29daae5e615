// Copyright 2026 The squeezemag Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>

namespace squeezemag {

/// What a random stream is used for. Part of the substream key so that, e.g.,
/// the measurement draws of a shot never share bits with its noise draws.
enum class StreamPurpose : std::uint64_t {
    Lattice = 1,
    ShotNoise = 2,
    LongTermDrift = 3,
    Loss = 4,
    Measurement = 5,
    Bootstrap = 6,
    Combinations = 7,
    Trajectory = 8,
    Test = 99,
};

/// xoshiro256** generator. Satisfies UniformRandomBitGenerator, so it plugs
/// into <random> distributions. Owned by exactly one consumer.
class Stream {
   public:
    using result_type = std::uint64_t;

    explicit Stream(std::uint64_t seed);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()();

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform();
    /// Standard normal deviate (Box-Muller, no cached second value).
    double normal();
    /// Exponential deviate with the given rate.
    double exponential(double rate);
    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n);

   private:
    std::uint64_t s_[4];
};

/// Counter-based substream: the stream is a pure function of
/// (master seed, purpose, ids...), independent of evaluation order.
Stream substream(std::uint64_t master_seed, StreamPurpose purpose, std::initializer_list<std::uint64_t> ids = {});

/// SplitMix64 finaliser, exposed for hashing ids.
std::uint64_t mix64(std::uint64_t x);

}  // namespace squeezemag
