// Copyright 2026 The bdrlab Authors
// SPDX-License-Identifier: Apache-2.0

#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "bdr/block.hpp"
#include "bdr/config.hpp"
#include "bdr/random.hpp"
#include "bdr/scale_state.hpp"
#include "bdr/tensor.hpp"
#include "oracles.hpp"

using namespace bdr;

namespace {

BdrConfig pow2(int m, int d2, std::size_t k1, std::size_t k2, int d1 = 8) {
    return {m, d1, d2, k1, k2, ScaleKind::PowerOfTwo, d2 == 0 ? SubScaleKind::None : SubScaleKind::PowerOfTwo};
}

const BdrConfig kMx9 = pow2(7, 1, 16, 2);

// Random block whose elements span a few binades, with occasional zeros and
// zero sub-blocks.
std::vector<double> random_block(Xoshiro256pp& rng, std::size_t n, std::size_t k2) {
    std::vector<double> x(n);
    const int base = static_cast<int>(rng() % 40) - 20;
    for (std::size_t i = 0; i < n; ++i) {
        const double mag = std::ldexp(1.0 + rng.uniform(), base - static_cast<int>(rng() % 6));
        x[i] = rng.uniform() < 0.5 ? -mag : mag;
        if (rng() % 9 == 0) x[i] = 0.0;
    }
    if (n / k2 > 1 && rng() % 4 == 0) {
        const std::size_t s = rng() % (n / k2);
        std::fill_n(x.begin() + static_cast<std::ptrdiff_t>(s * k2), k2, 0.0);
    }
    return x;
}

BdrConfig random_config(Xoshiro256pp& rng) {
    const int m = 1 + static_cast<int>(rng() % 9);
    const int d2 = static_cast<int>(rng() % 4);
    const std::size_t k1 = std::size_t{1} << (rng() % 6);
    std::size_t k2 = k1;
    while (k2 > 1 && rng() % 2 == 0) k2 /= 2;
    return pow2(m, d2, k1, k2);
}

}  // namespace

TEST_CASE("config validation") {
    CHECK(is_valid(kMx9));
    CHECK_FALSE(is_valid(pow2(7, 1, 16, 3)));
    CHECK_FALSE(is_valid(pow2(0, 1, 16, 2)));
    CHECK_FALSE(is_valid(pow2(7, 1, 16, 2, 9)));
    BdrConfig bad = pow2(7, 0, 16, 2);
    bad.sub_scale_kind = SubScaleKind::PowerOfTwo;
    CHECK_FALSE(is_valid(bad));
    CHECK_THROWS_AS(validate(pow2(7, 1, 0, 1)), std::invalid_argument);
    CHECK(kMx9.beta() == 1);
    CHECK(pow2(3, 3, 8, 1).beta() == 7);
    CHECK(kMx9.min_exponent() == -127);
    CHECK(kMx9.max_exponent() == 128);
}

TEST_CASE("bits per element") {
    CHECK(bits_per_element(kMx9) == Rational(9));
    CHECK(bits_per_element(pow2(4, 1, 16, 2)) == Rational(6));
    CHECK(bits_per_element(pow2(2, 1, 16, 2)) == Rational(4));
    CHECK(bits_per_element(pow2(7, 0, 16, 16)) == Rational(17, 2));
    CHECK(bits_per_element(pow2(3, 0, 16, 16)) == Rational(9, 2));
}

TEST_CASE("shared exponent examples") {
    const std::vector<double> a{1.0, 0.5, 0.25};
    const auto e = compute_shared_exponent(a, kMx9);
    CHECK(e.exponent == 0);
    CHECK_FALSE(e.zero);

    const std::vector<double> z{0.0, 0.0, 0.0};
    const auto ez = compute_shared_exponent(z, kMx9);
    CHECK(ez.zero);
    CHECK(ez.exponent == -127);

    const std::vector<double> carry{1.984375, 0.5};
    CHECK(compute_shared_exponent(carry, pow2(3, 1, 2, 1)).exponent == 1);
    CHECK(carry_adjusted_exponent(1.984375, 3) == 1);
    CHECK(carry_adjusted_exponent(1.75, 3) == 0);
    CHECK(carry_adjusted_exponent(1.875, 3) == 1);  // tie between 1.75 and 2 goes to the even code
}

TEST_CASE("shared exponent rejects non-finite input with its index") {
    const std::vector<double> x{1.0, 2.0, NAN, 0.0};
    try {
        (void)compute_shared_exponent(x, pow2(7, 1, 4, 2));
        FAIL("expected DataError");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("index 2") != std::string::npos);
    }
    std::vector<double> big(40, 1.0);
    big[37] = INFINITY;
    std::vector<double> out(40);
    try {
        fake_quantize(big, kMx9, out);
        FAIL("expected DataError");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("index 37") != std::string::npos);
    }
}

TEST_CASE("sub-block shift examples") {
    const std::vector<double> x{1.5, 0.5, 0.375, 0.25};
    CHECK(compute_subblock_shifts(x, 0, pow2(3, 1, 4, 2)) == std::vector<std::uint32_t>{0, 1});
    CHECK(compute_subblock_shifts(x, 0, pow2(3, 0, 4, 2)) == std::vector<std::uint32_t>{0, 0});

    const std::vector<double> y{8.0, 1.0, 0.125, 4.0};
    CHECK(compute_subblock_shifts(y, 3, pow2(7, 3, 4, 1)) == std::vector<std::uint32_t>{0, 3, 6, 1});

    const std::vector<double> z{1.0, 1.0, 0.0, 0.0};
    CHECK(compute_subblock_shifts(z, 0, pow2(3, 2, 4, 2)) == std::vector<std::uint32_t>{0, 3});
}

TEST_CASE("quantize block examples") {
    const BdrConfig cfg = pow2(3, 1, 4, 2);
    const std::vector<double> x{1.5, 0.5, 0.375, 0.25};
    const QuantizedBlock b = quantize_block(x, cfg);
    CHECK(b.shared_exp == 0);
    CHECK(b.shifts == std::vector<std::uint32_t>{0, 1});
    CHECK(dequantize_block(b, cfg) == x);

    const std::vector<double> z(4, 0.0);
    const QuantizedBlock bz = quantize_block(z, cfg);
    CHECK(bz.zero);
    CHECK(bz.shared_exp == cfg.min_exponent());
    for (const auto& c : bz.codes) CHECK(c.magnitude == 0);
    CHECK(dequantize_block(bz, cfg) == z);

    CHECK_THROWS_AS(quantize_block(std::vector<double>(3, 1.0), cfg), std::invalid_argument);
}

TEST_CASE("codec matches the enumeration oracle") {
    Xoshiro256pp rng(11);
    for (int trial = 0; trial < 3000; ++trial) {
        const BdrConfig cfg = random_config(rng);
        const auto x = random_block(rng, cfg.k1, cfg.k2);
        const auto expected = oracle::quantize_block(x, cfg);
        const auto got = dequantize_block(quantize_block(x, cfg), cfg);
        INFO(describe(cfg));
        for (std::size_t i = 0; i < x.size(); ++i) {
            REQUIRE(got[i] == expected[i]);
        }
        const auto c = oracle::choose(x, cfg);
        const QuantizedBlock b = quantize_block(x, cfg);
        if (!c.zero) {
            REQUIRE(b.shared_exp == c.e);
            for (std::size_t s = 0; s < c.tau.size(); ++s) REQUIRE(static_cast<int>(b.shifts[s]) == c.tau[s]);
        }
    }
}

TEST_CASE("random block error bound, MX9 geometry") {
    Xoshiro256pp rng(5);
    for (int trial = 0; trial < 2000; ++trial) {
        std::vector<double> x(16);
        for (auto& v : x) v = 2.0 * rng.uniform() - 1.0;
        const QuantizedBlock b = quantize_block(x, kMx9);
        const auto q = dequantize_block(b, kMx9);
        for (std::size_t i = 0; i < 16; ++i) {
            const int scale = b.shared_exp - static_cast<int>(b.shifts[i / 2]);
            REQUIRE(std::fabs(q[i] - x[i]) <= std::ldexp(1.0, scale - 7));
        }
    }
}

TEST_CASE("block invariants over random configurations") {
    Xoshiro256pp rng(99);
    for (int trial = 0; trial < 3000; ++trial) {
        const BdrConfig cfg = random_config(rng);
        const auto x = random_block(rng, cfg.k1, cfg.k2);
        const QuantizedBlock b = quantize_block(x, cfg);
        const auto q = dequantize_block(b, cfg);
        INFO(describe(cfg));

        // Shifts bounded, magnitudes on the m-bit grid.
        for (auto t : b.shifts) REQUIRE(t <= cfg.beta());
        for (const auto& c : b.codes) REQUIRE(c.magnitude <= cfg.max_code());

        // Per-element error bound.
        for (std::size_t i = 0; i < x.size(); ++i) {
            const int scale = b.shared_exp - static_cast<int>(b.shifts[i / cfg.k2]);
            const double top = static_cast<double>(cfg.max_code()) * std::ldexp(1.0, scale - cfg.m + 1);
            const bool saturated = std::fabs(x[i]) > top;
            REQUIRE(std::fabs(q[i] - x[i]) <= std::ldexp(1.0, scale - cfg.m + (saturated ? 1 : 0)));
        }

        // Anchoring.
        if (!b.zero) {
            bool anchored = false;
            for (std::size_t s = 0; s < b.shifts.size(); ++s) {
                if (b.shifts[s] != 0) continue;
                double sub = 0.0;
                for (std::size_t j = 0; j < cfg.k2; ++j) sub = std::max(sub, std::fabs(x[s * cfg.k2 + j]));
                if (carry_adjusted_exponent(sub, cfg.m) == b.shared_exp) anchored = true;
            }
            REQUIRE(anchored);
        }

        // Idempotence.
        REQUIRE(quantize_block(q, cfg).codes == b.codes);

        // Power-of-two equivariance.
        const int j = static_cast<int>(rng() % 21) - 10;
        if (!b.zero) {
            std::vector<double> scaled(x.size());
            for (std::size_t i = 0; i < x.size(); ++i) scaled[i] = std::ldexp(x[i], j);
            const QuantizedBlock bs = quantize_block(scaled, cfg);
            REQUIRE(bs.codes == b.codes);
            REQUIRE(bs.shifts == b.shifts);
            REQUIRE(bs.shared_exp == b.shared_exp + j);
        }
    }
}

TEST_CASE("d2 = 0 reduces to single-level BFP") {
    Xoshiro256pp rng(3);
    for (int trial = 0; trial < 2000; ++trial) {
        const int m = 1 + static_cast<int>(rng() % 8);
        const std::size_t k1 = 1 + rng() % 12;
        const std::size_t k2 = k1 % 2 == 0 ? k1 / 2 : k1;
        const BdrConfig cfg = pow2(m, 0, k1, k2);
        const auto x = random_block(rng, k1, k2);
        const QuantizedBlock b = quantize_block(x, cfg);
        for (auto t : b.shifts) REQUIRE(t == 0);
        REQUIRE(dequantize_block(b, cfg) == oracle::bfp_quantize(x, m, 8));
    }
}

TEST_CASE("exponent clamping at the ends of the d1 range") {
    const std::vector<double> tiny{0x1p-140, 0x1p-141};
    const QuantizedBlock b = quantize_block(tiny, pow2(7, 0, 2, 2));
    CHECK(b.shared_exp == -127);
    const std::vector<double> huge{0x1p+200, 1.0};
    const auto q = dequantize_block(quantize_block(huge, pow2(7, 0, 2, 2)), pow2(7, 0, 2, 2));
    CHECK(q[0] == 127.0 * 0x1p+122);  // saturated top code at E = 128
    const BdrConfig no_scale = pow2(3, 0, 2, 2, 0);
    const std::vector<double> x{5.0, 0.3};
    const auto qs = dequantize_block(quantize_block(x, no_scale), no_scale);
    CHECK(qs[0] == 1.75);
}

TEST_CASE("sign of zero codes") {
    const std::vector<double> x{-1e-30, 1.0};
    const QuantizedBlock b = quantize_block(x, pow2(3, 0, 2, 2));
    CHECK(b.codes[0].magnitude == 0);
    CHECK_FALSE(b.codes[0].negative);
}

TEST_CASE("fake_quantize pads tails without disturbing the prefix") {
    Xoshiro256pp rng(8);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + rng() % 70;
        std::vector<double> x(n);
        for (auto& v : x) v = rng.normal();
        std::vector<double> out(n);
        fake_quantize(x, kMx9, out);
        std::vector<double> padded = x;
        padded.resize((n + 15) / 16 * 16, 0.0);
        std::vector<double> out_padded(padded.size());
        fake_quantize(padded, kMx9, out_padded);
        for (std::size_t i = 0; i < n; ++i) REQUIRE(out[i] == out_padded[i]);
        for (std::size_t i = 0; i + 16 <= padded.size(); i += 16) {
            const auto blk = dequantize_block(quantize_block(std::span<const double>(padded).subspan(i, 16), kMx9), kMx9);
            for (std::size_t j = 0; j < 16; ++j) REQUIRE(blk[j] == out_padded[i + j]);
        }
    }
}

TEST_CASE("tensor quantization geometry") {
    std::vector<double> data(3 * 20);
    for (std::size_t i = 0; i < data.size(); ++i) data[i] = std::sin(static_cast<double>(i));
    const Tensor t({3, 20}, data);
    const QuantizedTensor q = quantize_tensor_along_axis(t, 1, kMx9);
    CHECK(q.blocks_per_fiber() == 2);
    CHECK(q.tail_len == 12);
    CHECK(q.blocks.size() == 3 * 2);
    const Tensor back = dequantize(q);
    CHECK(back.shape == t.shape);
    // Padding lanes decode to zero.
    for (std::size_t f = 0; f < q.fiber_count(); ++f) {
        const auto last = dequantize_block(q.fiber(f)[1], kMx9);
        for (std::size_t j = 4; j < 16; ++j) CHECK(last[j] == 0.0);
    }

    const Tensor t3({2, 5, 3}, std::vector<double>(30, 1.5));
    const QuantizedTensor q3 = quantize_tensor_along_axis(t3, 1, pow2(4, 1, 4, 2));
    CHECK(q3.blocks.size() == 2 * 3 * 2);
    CHECK(dequantize(q3) == t3);

    CHECK_THROWS_AS(quantize_tensor_along_axis(Tensor({0}, {}), 0, kMx9), std::invalid_argument);
    CHECK_THROWS_AS(quantize_tensor_along_axis(t, 2, kMx9), std::invalid_argument);
}

TEST_CASE("transpose relabeling symmetry") {
    Xoshiro256pp rng(21);
    std::vector<double> d(16);
    for (auto& v : d) v = rng.normal();
    const Tensor t({4, 4}, d);
    const BdrConfig cfg = pow2(3, 1, 4, 2);
    const Tensor a = dequantize(quantize_tensor_along_axis(t, 0, cfg));
    const Tensor b = transposed(dequantize(quantize_tensor_along_axis(transposed(t), 1, cfg)));
    CHECK(a == b);
}

TEST_CASE("quantization does not commute with transpose") {
    Xoshiro256pp rng(4);
    bool witness = false;
    for (int trial = 0; trial < 20 && !witness; ++trial) {
        std::vector<double> d(256);
        for (auto& v : d) v = rng.normal();
        const Tensor t({16, 16}, d);
        const Tensor a = dequantize(quantize_tensor_along_axis(t, 0, kMx9));
        const Tensor b = transposed(dequantize(quantize_tensor_along_axis(transposed(t), 0, kMx9)));
        witness = !(a == b);
    }
    CHECK(witness);
}

TEST_CASE("scale state window") {
    ScaleState s(3);
    CHECK(s.scale(448.0) == 1.0);
    s.observe(448.0);
    s.observe(300.0);
    s.observe(200.0);
    CHECK(s.scale(448.0) == 1.0);
    s.observe(100.0);
    CHECK(s.size() == 3);
    CHECK(s.scale(448.0) == 300.0 / 448.0);
    ScaleState t;
    CHECK(delayed_scale(t, 896.0, 448.0) == 2.0);
    ScaleState zeros;
    CHECK(delayed_scale(zeros, 0.0, 448.0) == 1.0);
    CHECK_THROWS_AS(s.observe(-1.0), std::invalid_argument);
    CHECK_THROWS_AS(ScaleState(0), std::invalid_argument);
}

TEST_CASE("delayed scale sequence matches a scale state") {
    Xoshiro256pp rng(17);
    for (std::size_t window : {1U, 2U, 5U, 64U}) {
        std::vector<double> amax(300);
        for (auto& a : amax) a = rng() % 7 == 0 ? 0.0 : std::fabs(rng.normal()) * 100.0;
        const auto seq = delayed_scale_sequence(amax, window, 448.0);
        ScaleState st(window);
        for (std::size_t i = 0; i < amax.size(); ++i) {
            const double expected =
                st.empty() ? (amax[i] > 0.0 ? amax[i] / 448.0 : 1.0) : st.scale(448.0);
            REQUIRE(seq[i] == expected);
            st.observe(amax[i]);
        }
    }
}
