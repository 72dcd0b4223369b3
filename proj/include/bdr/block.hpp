// Copyright 2026 The bdrlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "bdr/config.hpp"

namespace bdr {

/// Sign and m-bit mantissa magnitude of one element. The magnitude is the
/// integer b0b1...b(m-1), i.e. the fixed-point value times 2^(m-1).
struct ElementCode {
    bool negative = false;
    std::uint32_t magnitude = 0;

    bool operator==(const ElementCode&) const = default;
};

struct SharedExponent {
    int exponent = 0;
    bool zero = false;  // every input was zero; exponent is the minimum encodable value

    bool operator==(const SharedExponent&) const = default;
};

/// One k1-element block: shared exponent E, per-sub-block shifts and
/// per-element codes. Element i decodes to
///   (-1)^negative * magnitude * 2^(E - shift[i / k2] - m + 1).
struct QuantizedBlock {
    int shared_exp = 0;
    bool zero = false;
    std::vector<std::uint32_t> shifts;
    std::vector<ElementCode> codes;

    bool operator==(const QuantizedBlock&) const = default;
};

/// floor(log2 a), plus one when a rounds up to 2^(e+1) on the m-bit grid at
/// exponent e. Requires a > 0 and finite.
[[nodiscard]] int carry_adjusted_exponent(double a, int m);

/// Shared exponent of a block, anchored to its largest magnitude and clamped to
/// the d1-bit range. Throws DataError naming the index of any non-finite input.
[[nodiscard]] SharedExponent compute_shared_exponent(std::span<const double> x, const BdrConfig& cfg);

/// tau_i = min(E - E_i, beta) per sub-block, with E_i the carry-adjusted
/// exponent of the sub-block maximum. All-zero sub-blocks get beta.
[[nodiscard]] std::vector<std::uint32_t> compute_subblock_shifts(std::span<const double> x, int shared_exp,
                                                                 const BdrConfig& cfg);

/// Round-to-nearest-even, saturating encode of one element at a given scale
/// exponent (E - tau).
[[nodiscard]] ElementCode encode_element(double x, int scale_exp, const BdrConfig& cfg) noexcept;
[[nodiscard]] double decode_element(ElementCode code, int scale_exp, const BdrConfig& cfg) noexcept;

/// Requires x.size() == cfg.k1 (callers zero-pad tails).
[[nodiscard]] QuantizedBlock quantize_block(std::span<const double> x, const BdrConfig& cfg);
[[nodiscard]] std::vector<double> dequantize_block(const QuantizedBlock& block, const BdrConfig& cfg);

/// quantize_block followed by dequantize_block without intermediate storage.
/// Writes x.size() == cfg.k1 values to out.
void fake_quantize_block(std::span<const double> x, const BdrConfig& cfg, std::span<double> out);

/// Quantize-dequantize a vector of any length through consecutive k1-blocks,
/// zero-padding the final partial block.
void fake_quantize(std::span<const double> x, const BdrConfig& cfg, std::span<double> out);

}  // namespace bdr
