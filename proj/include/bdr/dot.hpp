// Copyright 2026 The bdrlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>

#include <boost/multiprecision/cpp_int.hpp>

#include "bdr/block.hpp"
#include "bdr/config.hpp"

namespace bdr {

using BigInt = boost::multiprecision::cpp_int;

/// Bits needed for the largest exact block partial:
/// 2m + ceil(log2 k1) + 2 beta + 1.
[[nodiscard]] int partial_width(const BdrConfig& cfg);

/// min(25, partial_width(cfg) + guard): wide enough for the exact sum of
/// 2^guard partials, capped at 25 bits.
[[nodiscard]] int default_accumulator_width(const BdrConfig& cfg, int guard = 0);

struct DotConfig {
    BdrConfig cfg;
    std::size_t r = 16;  // reduction length, a multiple of cfg.k1
    int f = 0;           // accumulator width; 0 selects default_accumulator_width(cfg, guard_bits())
    int guard = -1;      // headroom bits above the largest partial; -1 selects ceil(log2(r / k1))

    [[nodiscard]] int accumulator_width() const { return f > 0 ? f : default_accumulator_width(cfg, guard_bits()); }
    [[nodiscard]] int guard_bits() const;
};

/// Raw accumulator state after a dot product; value = acc * 2^lsb_exponent.
struct FixedPointAcc {
    BigInt value = 0;
    int lsb_exponent = 0;
    int width = 0;
    bool overflow = false;
};

struct DotResult {
    double value = 0.0;
    bool overflow = false;
    FixedPointAcc acc;
};

/// Dot product of two block-quantized rows through the modeled pipeline.
///
/// Per k1-block: integer mantissa products summed per sub-block, each
/// sub-block sum aligned by the sum of the two operands' shifts (exact: the
/// partial keeps 2 beta fraction bits), giving a partial with exponent
/// E_A + E_B. Blocks where either operand is zero-flagged contribute nothing.
/// Partials are aligned to the largest exponent among the rest with
/// truncating right shifts and added in block order into an f-bit
/// two's-complement accumulator that saturates and sets a sticky overflow
/// flag. The accumulator MSB sits guard_bits() above the widest possible
/// partial, so its LSB weight is 2^(E_max - 2(m-1) - 2 beta + W + g - f).
/// The result is the accumulator rounded once to double.
[[nodiscard]] DotResult mx_dot(std::span<const QuantizedBlock> a, std::span<const QuantizedBlock> b,
                               const DotConfig& dc);

/// Quantizes both vectors (length dc.r) with dc.cfg and runs mx_dot.
[[nodiscard]] DotResult mx_dot(std::span<const double> a, std::span<const double> b, const DotConfig& dc);

/// v * 2^exponent rounded to nearest double, ties to even.
[[nodiscard]] double scaled_to_double(const BigInt& v, int exponent);

/// Exact dot product rounded once: error-free products followed by an exact
/// (Shewchuk partials) summation.
[[nodiscard]] double reference_dot(std::span<const double> a, std::span<const double> b);

}  // namespace bdr
