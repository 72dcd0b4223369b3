// Copyright 2026 The bdrlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <boost/rational.hpp>

namespace bdr {

/// Raised for malformed or non-finite data (as opposed to bad parameters,
/// which use std::invalid_argument).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class ScaleKind {
    PowerOfTwo,  // hardware-managed shared exponent
    Software,    // high-precision (FP32) software scale
    Integer,
};

enum class SubScaleKind {
    None,
    PowerOfTwo,          // shared microexponent / sub-block shift
    Integer,             // VSQ-style integer sub-scale
    PerElementExponent,  // scalar floating point (k2 = 1)
};

using Rational = boost::rational<std::int64_t>;

/// Two-level block format descriptor.
///
/// A block of `k1` elements shares a first-level scale of `d1` bits; each
/// `k2`-element sub-block carries a `d2`-bit second-level scale. Elements are
/// sign-magnitude with `m` explicit mantissa bits in the fixed-point form
/// b0.b1...b(m-1) (no implicit leading one).
struct BdrConfig {
    int m = 7;
    int d1 = 8;
    int d2 = 1;
    std::size_t k1 = 16;
    std::size_t k2 = 2;
    ScaleKind scale_kind = ScaleKind::PowerOfTwo;
    SubScaleKind sub_scale_kind = SubScaleKind::PowerOfTwo;

    /// Largest sub-block shift, 2^d2 - 1.
    [[nodiscard]] std::uint32_t beta() const noexcept { return (std::uint32_t{1} << d2) - 1; }
    [[nodiscard]] std::size_t subblocks() const noexcept { return k1 / k2; }
    /// Largest mantissa code, 2^m - 1.
    [[nodiscard]] std::uint32_t max_code() const noexcept { return (std::uint32_t{1} << m) - 1; }
    /// Exponent range encodable in d1 bits with bias 2^(d1-1) - 1.
    [[nodiscard]] int min_exponent() const noexcept;
    [[nodiscard]] int max_exponent() const noexcept;

    bool operator==(const BdrConfig&) const = default;
};

constexpr int kMaxMantissaBits = 24;
constexpr int kMaxSubScaleBits = 16;

/// Throws std::invalid_argument describing the first violated invariant.
void validate(const BdrConfig& cfg);

/// Same as validate(), and additionally requires power-of-two scales at both
/// levels (the shape the block codec and the dot engine understand).
void validate_codec(const BdrConfig& cfg);

[[nodiscard]] bool is_valid(const BdrConfig& cfg) noexcept;

/// (m + 1) + d1/k1 + d2/k2, exactly.
[[nodiscard]] Rational bits_per_element(const BdrConfig& cfg);

[[nodiscard]] std::string to_string(ScaleKind kind);
[[nodiscard]] std::string to_string(SubScaleKind kind);
[[nodiscard]] std::string describe(const BdrConfig& cfg);

}  // namespace bdr
