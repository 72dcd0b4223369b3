// Copyright 2026 The bdrlab Authors
// SPDX-License-Identifier: Apache-2.0

#include "bdr/fp8.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace bdr {

namespace {

constexpr std::uint8_t kNanBits = 0x7F;

std::uint8_t max_finite_bits(const Fp8Layout& l) {
    // E4M3: exponent all ones, mantissa 110. E5M2: exponent 11110, mantissa 11.
    const int man_mask = (1 << l.man_bits) - 1;
    if (l.has_infinity) {
        return static_cast<std::uint8_t>(((((1 << l.exp_bits) - 2) << l.man_bits)) | man_mask);
    }
    return static_cast<std::uint8_t>((((1 << l.exp_bits) - 1) << l.man_bits) | (man_mask - 1));
}

}  // namespace

Fp8Code fp8_encode(double x, Fp8Variant variant, double s) {
    if (!(s > 0.0) || !std::isfinite(s)) {
        throw std::invalid_argument("FP8 scale must be finite and positive");
    }
    const Fp8Layout l = fp8_layout(variant);
    const std::uint8_t sign = std::signbit(x) ? 0x80 : 0x00;
    if (std::isnan(x)) {
        return {static_cast<std::uint8_t>(sign | kNanBits), variant};
    }
    const double a = std::fabs(x / s);
    if (a == 0.0) {
        return {sign, variant};
    }
    if (a >= l.max_finite) {
        return {static_cast<std::uint8_t>(sign | max_finite_bits(l)), variant};
    }
    const int min_normal_exp = 1 - l.bias;
    int e = std::max(std::ilogb(a), min_normal_exp);
    double q = std::nearbyint(std::ldexp(a, l.man_bits - e));
    const double hidden = std::ldexp(1.0, l.man_bits);
    if (q >= 2.0 * hidden) {
        ++e;
        q = hidden;
    }
    if (std::ldexp(q, e - l.man_bits) > l.max_finite) {
        return {static_cast<std::uint8_t>(sign | max_finite_bits(l)), variant};
    }
    std::uint8_t body = 0;
    if (q < hidden) {
        body = static_cast<std::uint8_t>(q);  // subnormal, exponent field 0
    } else {
        body = static_cast<std::uint8_t>(((e + l.bias) << l.man_bits) | static_cast<int>(q - hidden));
    }
    return {static_cast<std::uint8_t>(sign | body), variant};
}

double fp8_decode(Fp8Code code) noexcept {
    const Fp8Layout l = fp8_layout(code.variant);
    const bool negative = (code.bits & 0x80) != 0;
    const int exp_field = (code.bits & 0x7F) >> l.man_bits;
    const int man = code.bits & ((1 << l.man_bits) - 1);
    const int exp_max = (1 << l.exp_bits) - 1;
    double v = 0.0;
    if (fp8_is_nan(code)) {
        v = std::numeric_limits<double>::quiet_NaN();
    } else if (l.has_infinity && exp_field == exp_max) {
        v = std::numeric_limits<double>::infinity();
    } else if (exp_field == 0) {
        v = std::ldexp(static_cast<double>(man), 1 - l.bias - l.man_bits);
    } else {
        v = std::ldexp(static_cast<double>(man + (1 << l.man_bits)), exp_field - l.bias - l.man_bits);
    }
    return negative ? -v : v;
}

bool fp8_is_nan(Fp8Code code) noexcept {
    const Fp8Layout l = fp8_layout(code.variant);
    const int exp_field = (code.bits & 0x7F) >> l.man_bits;
    const int man = code.bits & ((1 << l.man_bits) - 1);
    const int exp_max = (1 << l.exp_bits) - 1;
    if (l.has_infinity) {
        return exp_field == exp_max && man != 0;
    }
    return exp_field == exp_max && man == (1 << l.man_bits) - 1;
}

}  // namespace bdr
