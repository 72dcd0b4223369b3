// Copyright 2026 The bdrlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

namespace bdr {

enum class Fp8Variant { E4M3, E5M2 };

/// Bit layout of an 8-bit float. E4M3 has no infinities and a single NaN
/// mantissa pattern per sign; E5M2 follows binary interchange rules.
struct Fp8Layout {
    int exp_bits;
    int man_bits;
    int bias;
    double max_finite;
    bool has_infinity;
};

[[nodiscard]] constexpr Fp8Layout fp8_layout(Fp8Variant v) noexcept {
    return v == Fp8Variant::E4M3 ? Fp8Layout{4, 3, 7, 448.0, false} : Fp8Layout{5, 2, 15, 57344.0, true};
}

struct Fp8Code {
    std::uint8_t bits = 0;
    Fp8Variant variant = Fp8Variant::E4M3;

    bool operator==(const Fp8Code&) const = default;
};

/// Encodes x / s with round-to-nearest-even. Magnitudes past the largest
/// finite value (including infinities) saturate to it; NaN maps to 0x7F with
/// the input sign. Throws std::invalid_argument unless s > 0.
[[nodiscard]] Fp8Code fp8_encode(double x, Fp8Variant variant, double s = 1.0);

/// Exact decode (without the scale).
[[nodiscard]] double fp8_decode(Fp8Code code) noexcept;

[[nodiscard]] bool fp8_is_nan(Fp8Code code) noexcept;

}  // namespace bdr
