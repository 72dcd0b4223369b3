// Copyright 2026 The bdrlab Authors
// SPDX-License-Identifier: Apache-2.0

#include "bdr/config.hpp"

#include <sstream>

namespace bdr {

int BdrConfig::min_exponent() const noexcept {
    if (d1 == 0) {
        return 0;
    }
    return -((1 << (d1 - 1)) - 1);
}

int BdrConfig::max_exponent() const noexcept {
    if (d1 == 0) {
        return 0;
    }
    return (1 << d1) - 1 + min_exponent();
}

namespace {

const char* first_violation(const BdrConfig& cfg) {
    if (cfg.k1 < 1 || cfg.k2 < 1) {
        return "k1 and k2 must be at least 1";
    }
    if (cfg.k1 % cfg.k2 != 0) {
        return "k2 must divide k1";
    }
    if (cfg.m < 1 || cfg.m > kMaxMantissaBits) {
        return "m must lie in [1, 24]";
    }
    if (cfg.d1 < 0 || cfg.d1 > 8) {
        return "d1 must lie in [0, 8]";
    }
    if (cfg.d2 < 0 || cfg.d2 > kMaxSubScaleBits) {
        return "d2 must lie in [0, 16]";
    }
    if ((cfg.d2 == 0) != (cfg.sub_scale_kind == SubScaleKind::None)) {
        return "d2 = 0 if and only if there is no sub-scale";
    }
    return nullptr;
}

}  // namespace

void validate(const BdrConfig& cfg) {
    if (const char* why = first_violation(cfg)) {
        throw std::invalid_argument("invalid BDR config " + describe(cfg) + ": " + why);
    }
}

void validate_codec(const BdrConfig& cfg) {
    validate(cfg);
    if (cfg.scale_kind != ScaleKind::PowerOfTwo) {
        throw std::invalid_argument("block codec needs a power-of-two first-level scale, got " +
                                    to_string(cfg.scale_kind));
    }
    if (cfg.sub_scale_kind != SubScaleKind::None && cfg.sub_scale_kind != SubScaleKind::PowerOfTwo) {
        throw std::invalid_argument("block codec needs power-of-two sub-scales, got " +
                                    to_string(cfg.sub_scale_kind));
    }
}

bool is_valid(const BdrConfig& cfg) noexcept { return first_violation(cfg) == nullptr; }

Rational bits_per_element(const BdrConfig& cfg) {
    validate(cfg);
    const auto k1 = static_cast<std::int64_t>(cfg.k1);
    const auto k2 = static_cast<std::int64_t>(cfg.k2);
    return Rational(cfg.m + 1) + Rational(cfg.d1, k1) + Rational(cfg.d2, k2);
}

std::string to_string(ScaleKind kind) {
    switch (kind) {
    case ScaleKind::PowerOfTwo: return "power-of-two";
    case ScaleKind::Software: return "high-precision-software";
    case ScaleKind::Integer: return "integer";
    }
    return "?";
}

std::string to_string(SubScaleKind kind) {
    switch (kind) {
    case SubScaleKind::None: return "none";
    case SubScaleKind::PowerOfTwo: return "power-of-two";
    case SubScaleKind::Integer: return "integer";
    case SubScaleKind::PerElementExponent: return "per-element-exponent";
    }
    return "?";
}

std::string describe(const BdrConfig& cfg) {
    std::ostringstream os;
    os << "{m=" << cfg.m << ", d1=" << cfg.d1 << ", d2=" << cfg.d2 << ", k1=" << cfg.k1
       << ", k2=" << cfg.k2 << ", scale=" << to_string(cfg.scale_kind)
       << ", sub_scale=" << to_string(cfg.sub_scale_kind) << "}";
    return os.str();
}

}  // namespace bdr
