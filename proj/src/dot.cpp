// Copyright 2026 The bdrlab Authors
// SPDX-License-Identifier: Apache-2.0

#include "bdr/dot.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace bdr {

namespace {

int ceil_log2(std::size_t n) { return n <= 1 ? 0 : static_cast<int>(std::bit_width(n - 1)); }

void check_rows(std::span<const QuantizedBlock> a, std::span<const QuantizedBlock> b, const DotConfig& dc) {
    validate_codec(dc.cfg);
    if (dc.r == 0 || dc.r % dc.cfg.k1 != 0) {
        throw std::invalid_argument("reduction length " + std::to_string(dc.r) + " is not a positive multiple of k1 = " +
                                    std::to_string(dc.cfg.k1));
    }
    const std::size_t blocks = dc.r / dc.cfg.k1;
    if (a.size() != blocks || b.size() != blocks) {
        throw std::invalid_argument("operands must hold r / k1 = " + std::to_string(blocks) + " blocks");
    }
    if (dc.accumulator_width() < 2) {
        throw std::invalid_argument("accumulator width must be at least 2");
    }
    if (dc.guard > 64) {
        throw std::invalid_argument("guard bits must be at most 64");
    }
    for (const auto* row : {&a, &b}) {
        for (const QuantizedBlock& blk : *row) {
            if (blk.codes.size() != dc.cfg.k1 || blk.shifts.size() != dc.cfg.subblocks()) {
                throw std::invalid_argument("quantized block does not match config " + describe(dc.cfg));
            }
        }
    }
}

// Sum of the block's products in units of 2^(E_A + E_B - 2(m-1) - 2 beta).
BigInt block_partial(const QuantizedBlock& a, const QuantizedBlock& b, const BdrConfig& cfg) {
    const auto two_beta = 2 * cfg.beta();
    BigInt partial = 0;
    for (std::size_t s = 0; s < cfg.subblocks(); ++s) {
        BigInt sub = 0;
        for (std::size_t j = s * cfg.k2; j < (s + 1) * cfg.k2; ++j) {
            const ElementCode x = a.codes[j];
            const ElementCode y = b.codes[j];
            const auto p = static_cast<std::int64_t>(x.magnitude) * static_cast<std::int64_t>(y.magnitude);
            sub += (x.negative != y.negative) ? -p : p;
        }
        // Lossless: the partial carries 2 beta fraction bits.
        partial += sub << static_cast<unsigned>(two_beta - a.shifts[s] - b.shifts[s]);
    }
    return partial;
}

BigInt floor_shift(const BigInt& v, int shift) {
    if (shift >= 0) {
        return v << static_cast<unsigned>(shift);
    }
    const auto n = static_cast<unsigned>(-shift);
    if (v >= 0) {
        return v >> n;
    }
    // Floor for negatives: -((-v - 1) >> n) - 1
    BigInt t = -v - 1;
    t >>= n;
    return -t - 1;
}

// Shewchuk/Python fsum: exact sum of doubles rounded once.
double exact_sum(const std::vector<double>& terms) {
    std::vector<double> partials;
    for (double x : terms) {
        std::size_t i = 0;
        for (double y : partials) {
            if (std::fabs(x) < std::fabs(y)) {
                std::swap(x, y);
            }
            const double hi = x + y;
            const double lo = y - (hi - x);
            if (lo != 0.0) {
                partials[i++] = lo;
            }
            x = hi;
        }
        partials.resize(i);
        partials.push_back(x);
    }
    std::size_t n = partials.size();
    double hi = 0.0;
    if (n > 0) {
        double lo = 0.0;
        hi = partials[--n];
        while (n > 0) {
            const double x = hi;
            const double y = partials[--n];
            hi = x + y;
            const double yr = hi - x;
            lo = y - yr;
            if (lo != 0.0) {
                break;
            }
        }
        if (n > 0 && ((lo < 0.0 && partials[n - 1] < 0.0) || (lo > 0.0 && partials[n - 1] > 0.0))) {
            const double y = lo * 2.0;
            const double x = hi + y;
            const double yr = x - hi;
            if (y == yr) {
                hi = x;
            }
        }
    }
    return hi;
}

}  // namespace

int partial_width(const BdrConfig& cfg) {
    validate(cfg);
    return 2 * cfg.m + ceil_log2(cfg.k1) + 2 * static_cast<int>(cfg.beta()) + 1;
}

int default_accumulator_width(const BdrConfig& cfg, int guard) { return std::min(25, partial_width(cfg) + guard); }

int DotConfig::guard_bits() const {
    if (guard >= 0) {
        return guard;
    }
    return cfg.k1 == 0 ? 0 : ceil_log2(r / cfg.k1);
}

DotResult mx_dot(std::span<const QuantizedBlock> a, std::span<const QuantizedBlock> b, const DotConfig& dc) {
    check_rows(a, b, dc);
    const BdrConfig& cfg = dc.cfg;
    const int f = dc.accumulator_width();
    const int w = partial_width(cfg) + dc.guard_bits();

    std::optional<int> e_max;
    for (std::size_t j = 0; j < a.size(); ++j) {
        if (!a[j].zero && !b[j].zero) {
            const int e = a[j].shared_exp + b[j].shared_exp;
            e_max = e_max ? std::max(*e_max, e) : e;
        }
    }
    DotResult res;
    res.acc.width = f;
    if (!e_max) {
        return res;
    }
    const int lsb_offset = -2 * (cfg.m - 1) - 2 * static_cast<int>(cfg.beta());
    res.acc.lsb_exponent = *e_max + lsb_offset + (w - f);

    const BigInt hi = (BigInt(1) << static_cast<unsigned>(f - 1)) - 1;
    const BigInt lo = -(BigInt(1) << static_cast<unsigned>(f - 1));
    BigInt acc = 0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        if (a[j].zero || b[j].zero) {
            continue;
        }
        const int e = a[j].shared_exp + b[j].shared_exp;
        acc += floor_shift(block_partial(a[j], b[j], cfg), (e - *e_max) - (w - f));
        if (acc > hi) {
            acc = hi;
            res.acc.overflow = true;
        } else if (acc < lo) {
            acc = lo;
            res.acc.overflow = true;
        }
    }
    res.acc.value = acc;
    res.overflow = res.acc.overflow;
    res.value = scaled_to_double(acc, res.acc.lsb_exponent);
    return res;
}

DotResult mx_dot(std::span<const double> a, std::span<const double> b, const DotConfig& dc) {
    validate_codec(dc.cfg);
    if (a.size() != dc.r || b.size() != dc.r) {
        throw std::invalid_argument("operands must have length r = " + std::to_string(dc.r));
    }
    if (dc.r == 0 || dc.r % dc.cfg.k1 != 0) {
        throw std::invalid_argument("reduction length must be a positive multiple of k1");
    }
    std::vector<QuantizedBlock> qa;
    std::vector<QuantizedBlock> qb;
    for (std::size_t i = 0; i < dc.r; i += dc.cfg.k1) {
        qa.push_back(quantize_block(a.subspan(i, dc.cfg.k1), dc.cfg));
        qb.push_back(quantize_block(b.subspan(i, dc.cfg.k1), dc.cfg));
    }
    return mx_dot(qa, qb, dc);
}

double scaled_to_double(const BigInt& v, int exponent) {
    if (v == 0) {
        return 0.0;
    }
    const bool negative = v < 0;
    BigInt mag = negative ? BigInt(-v) : v;
    const auto bits = static_cast<int>(boost::multiprecision::msb(mag)) + 1;
    double out = 0.0;
    if (bits <= 53) {
        out = std::ldexp(mag.convert_to<double>(), exponent);
    } else {
        const int drop = bits - 53;
        const BigInt q_big = mag >> static_cast<unsigned>(drop);
        const BigInt rem = mag - (q_big << static_cast<unsigned>(drop));
        const BigInt half = BigInt(1) << static_cast<unsigned>(drop - 1);
        auto q = q_big.convert_to<std::uint64_t>();
        if (rem > half || (rem == half && (q & 1U) != 0)) {
            ++q;
        }
        out = std::ldexp(static_cast<double>(q), exponent + drop);
    }
    return negative ? -out : out;
}

double reference_dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw std::invalid_argument("reference_dot: length mismatch");
    }
    std::vector<double> terms;
    terms.reserve(2 * a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double p = a[i] * b[i];
        terms.push_back(p);
        terms.push_back(std::fma(a[i], b[i], -p));
    }
    return exact_sum(terms);
}

}  // namespace bdr
