// Copyright 2026 The bdrlab Authors
// SPDX-License-Identifier: Apache-2.0

#include "bdr/block.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace bdr {

namespace {

double checked_max_abs(std::span<const double> x, std::size_t offset = 0) {
    double amax = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double a = std::fabs(x[i]);
        if (!std::isfinite(a)) {
            throw DataError("non-finite input at index " + std::to_string(offset + i));
        }
        amax = std::max(amax, a);
    }
    return amax;
}

double max_abs(std::span<const double> x) noexcept {
    double amax = 0.0;
    for (double v : x) {
        amax = std::max(amax, std::fabs(v));
    }
    return amax;
}

SharedExponent shared_exponent_of(double amax, const BdrConfig& cfg) noexcept {
    if (amax == 0.0) {
        return {cfg.min_exponent(), true};
    }
    const int e = carry_adjusted_exponent(amax, cfg.m);
    return {std::clamp(e, cfg.min_exponent(), cfg.max_exponent()), false};
}

std::uint32_t shift_of(double sub_amax, int shared_exp, const BdrConfig& cfg) noexcept {
    const auto beta = static_cast<long>(cfg.beta());
    if (sub_amax == 0.0) {
        return static_cast<std::uint32_t>(beta);
    }
    const long gap = static_cast<long>(shared_exp) - carry_adjusted_exponent(sub_amax, cfg.m);
    return static_cast<std::uint32_t>(std::clamp(gap, 0L, beta));
}

void check_block_size(std::size_t n, const BdrConfig& cfg) {
    if (n != cfg.k1) {
        throw std::invalid_argument("block holds " + std::to_string(n) + " values, expected k1 = " +
                                    std::to_string(cfg.k1));
    }
}

}  // namespace

int carry_adjusted_exponent(double a, int m) {
    int e = std::ilogb(a);
    // a * 2^(m-1-e) lies in [2^(m-1), 2^m); rounding it to 2^m is a carry.
    if (std::nearbyint(std::ldexp(a, m - 1 - e)) >= std::ldexp(1.0, m)) {
        ++e;
    }
    return e;
}

SharedExponent compute_shared_exponent(std::span<const double> x, const BdrConfig& cfg) {
    validate(cfg);
    if (x.empty()) {
        throw std::invalid_argument("shared exponent of an empty block");
    }
    return shared_exponent_of(checked_max_abs(x), cfg);
}

std::vector<std::uint32_t> compute_subblock_shifts(std::span<const double> x, int shared_exp,
                                                   const BdrConfig& cfg) {
    validate(cfg);
    check_block_size(x.size(), cfg);
    checked_max_abs(x);
    std::vector<std::uint32_t> shifts(cfg.subblocks());
    for (std::size_t i = 0; i < shifts.size(); ++i) {
        shifts[i] = shift_of(max_abs(x.subspan(i * cfg.k2, cfg.k2)), shared_exp, cfg);
    }
    return shifts;
}

ElementCode encode_element(double x, int scale_exp, const BdrConfig& cfg) noexcept {
    const double scaled = std::ldexp(std::fabs(x), cfg.m - 1 - scale_exp);
    const double rounded = std::nearbyint(scaled);
    const std::uint32_t top = cfg.max_code();
    const std::uint32_t magnitude = rounded >= static_cast<double>(top) ? top : static_cast<std::uint32_t>(rounded);
    return {magnitude != 0 && x < 0.0, magnitude};
}

double decode_element(ElementCode code, int scale_exp, const BdrConfig& cfg) noexcept {
    const double v = std::ldexp(static_cast<double>(code.magnitude), scale_exp - cfg.m + 1);
    return code.negative ? -v : v;
}

QuantizedBlock quantize_block(std::span<const double> x, const BdrConfig& cfg) {
    validate_codec(cfg);
    check_block_size(x.size(), cfg);
    const SharedExponent se = shared_exponent_of(checked_max_abs(x), cfg);

    QuantizedBlock block;
    block.shared_exp = se.exponent;
    block.zero = se.zero;
    block.shifts.resize(cfg.subblocks());
    block.codes.resize(cfg.k1);
    for (std::size_t s = 0; s < block.shifts.size(); ++s) {
        const auto sub = x.subspan(s * cfg.k2, cfg.k2);
        const std::uint32_t tau = shift_of(max_abs(sub), se.exponent, cfg);
        block.shifts[s] = tau;
        const int scale_exp = se.exponent - static_cast<int>(tau);
        for (std::size_t j = 0; j < cfg.k2; ++j) {
            block.codes[s * cfg.k2 + j] = encode_element(sub[j], scale_exp, cfg);
        }
    }
    return block;
}

std::vector<double> dequantize_block(const QuantizedBlock& block, const BdrConfig& cfg) {
    validate_codec(cfg);
    if (block.codes.size() != cfg.k1 || block.shifts.size() != cfg.subblocks()) {
        throw std::invalid_argument("quantized block does not match config " + describe(cfg));
    }
    std::vector<double> out(cfg.k1);
    for (std::size_t i = 0; i < cfg.k1; ++i) {
        const int scale_exp = block.shared_exp - static_cast<int>(block.shifts[i / cfg.k2]);
        out[i] = decode_element(block.codes[i], scale_exp, cfg);
    }
    return out;
}

namespace {

void fake_block_unchecked(std::span<const double> x, const BdrConfig& cfg, std::span<double> out,
                          std::size_t offset = 0) {
    const SharedExponent se = shared_exponent_of(checked_max_abs(x, offset), cfg);
    if (se.zero) {
        std::fill(out.begin(), out.end(), 0.0);
        return;
    }
    for (std::size_t s = 0; s < cfg.subblocks(); ++s) {
        const auto sub = x.subspan(s * cfg.k2, cfg.k2);
        const int scale_exp = se.exponent - static_cast<int>(shift_of(max_abs(sub), se.exponent, cfg));
        for (std::size_t j = 0; j < cfg.k2; ++j) {
            out[s * cfg.k2 + j] = decode_element(encode_element(sub[j], scale_exp, cfg), scale_exp, cfg);
        }
    }
}

}  // namespace

void fake_quantize_block(std::span<const double> x, const BdrConfig& cfg, std::span<double> out) {
    validate_codec(cfg);
    check_block_size(x.size(), cfg);
    check_block_size(out.size(), cfg);
    fake_block_unchecked(x, cfg, out);
}

void fake_quantize(std::span<const double> x, const BdrConfig& cfg, std::span<double> out) {
    validate_codec(cfg);
    if (out.size() != x.size()) {
        throw std::invalid_argument("fake_quantize: output size mismatch");
    }
    const std::size_t full = x.size() / cfg.k1 * cfg.k1;
    for (std::size_t i = 0; i < full; i += cfg.k1) {
        fake_block_unchecked(x.subspan(i, cfg.k1), cfg, out.subspan(i, cfg.k1), i);
    }
    if (full < x.size()) {
        std::vector<double> padded(cfg.k1, 0.0);
        std::vector<double> result(cfg.k1);
        std::copy(x.begin() + static_cast<std::ptrdiff_t>(full), x.end(), padded.begin());
        fake_block_unchecked(padded, cfg, result, full);
        std::copy_n(result.begin(), x.size() - full, out.begin() + static_cast<std::ptrdiff_t>(full));
    }
}

}  // namespace bdr
