// Copyright 2026 The bdrlab Authors
// SPDX-License-Identifier: Apache-2.0

#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include "bdr/fidelity.hpp"
#include "bdr/random.hpp"
#include "oracles.hpp"

using namespace bdr;

namespace {

BdrConfig pow2(int m, int d2, std::size_t k1, std::size_t k2) {
    return {m, 8, d2, k1, k2, ScaleKind::PowerOfTwo, d2 == 0 ? SubScaleKind::None : SubScaleKind::PowerOfTwo};
}

double bound_direct(int m, std::size_t n, std::size_t k1, std::size_t k2, int d2) {
    const double beta = std::pow(2.0, d2) - 1.0;
    const double p = std::pow(2.0, 2.0 * beta);
    const double nk = static_cast<double>(std::min(n, k1));
    return 20.0 * std::log10(2.0) * m + 10.0 * std::log10(p / (nk + (p - 1.0) * static_cast<double>(k2)));
}

}  // namespace

TEST_CASE("reference streams") {
    // SplitMix64 and xoshiro256++ reference outputs for seed 0 / state from SplitMix64(0).
    SplitMix64 sm(0);
    CHECK(sm.next() == 0xE220A8397B1DCDAFULL);
    CHECK(sm.next() == 0x6E789E6AA1B965F4ULL);
    Xoshiro256pp a(42);
    Xoshiro256pp b(42);
    for (int i = 0; i < 100; ++i) REQUIRE(a() == b());
    Xoshiro256pp u(1);
    for (int i = 0; i < 10000; ++i) {
        const double v = u.uniform();
        REQUIRE(v >= 0.0);
        REQUIRE(v < 1.0);
    }
}

TEST_CASE("normal generator moments") {
    Xoshiro256pp rng(3);
    double s = 0.0;
    double s2 = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double v = rng.normal();
        s += v;
        s2 += v * v;
    }
    CHECK(std::fabs(s / n) < 0.01);
    CHECK(std::fabs(s2 / n - 1.0) < 0.01);
}

TEST_CASE("qsnr examples") {
    CHECK(qsnr(std::vector<double>{3, 4}, std::vector<double>{3, 4.5}) == Catch::Approx(20.0).margin(1e-12));
    CHECK(std::isinf(qsnr(std::vector<double>{3, 4}, std::vector<double>{3, 4})));
    CHECK(qsnr(std::vector<double>{3, 4}, std::vector<double>{0, 0}) == Catch::Approx(0.0).margin(1e-12));
    CHECK_THROWS_AS(qsnr(std::vector<double>{0, 0}, std::vector<double>{1, 0}), DataError);
    CHECK_THROWS_AS(qsnr(std::vector<double>{1}, std::vector<double>{1, 0}), std::invalid_argument);
}

TEST_CASE("lower bound examples") {
    CHECK(theorem1_bound({1024, 7, 16, 2, 1}) == Catch::Approx(34.74).margin(0.01));
    CHECK(theorem1_bound({16, 2, 16, 2, 1}) == Catch::Approx(4.64).margin(0.01));
    CHECK(theorem1_bound({1024, 7, 16, 16, 0}) == Catch::Approx(42.14 - 12.04).margin(0.01));
    CHECK(theorem1_bound(bound_params(pow2(7, 0, 16, 16), 1024)) ==
          Catch::Approx(20.0 * std::log10(2.0) * 7 - 10.0 * std::log10(16.0)).epsilon(1e-14));
    Xoshiro256pp rng(4);
    for (int i = 0; i < 500; ++i) {
        const int m = 1 + static_cast<int>(rng() % 16);
        const int d2 = static_cast<int>(rng() % 5);
        const std::size_t k1 = std::size_t{1} << (rng() % 8);
        const std::size_t k2 = std::max<std::size_t>(1, k1 >> (rng() % 4));
        const std::size_t n = 1 + rng() % 2048;
        const auto p = bound_params(pow2(m, d2, k1, k2), n);
        REQUIRE(theorem1_bound(p) == Catch::Approx(bound_direct(m, n, k1, k2, d2)).margin(1e-9));
    }
}

TEST_CASE("bound mantissa slope") {
    std::vector<double> ms;
    std::vector<double> bs;
    for (int m = 2; m <= 8; ++m) {
        ms.push_back(m);
        bs.push_back(theorem1_bound(bound_params(pow2(m, 1, 16, 2), 1024)));
    }
    CHECK(linear_slope(ms, bs) == Catch::Approx(6.0206).margin(1e-3));
    CHECK_THROWS_AS(linear_slope(std::vector<double>{1.0}, std::vector<double>{1.0}), std::invalid_argument);
}

TEST_CASE("distribution parsing") {
    for (auto k : all_distribution_kinds()) CHECK(parse_distribution_kind(to_string(k)) == k);
    CHECK_THROWS_AS(parse_distribution_kind("cauchy"), std::invalid_argument);
}

TEST_CASE("sampling is deterministic and FP32-valued") {
    DistributionSpec d;
    d.seed = 77;
    const auto a = sample_vector(d, 64, 5);
    const auto b = sample_vector(d, 64, 5);
    CHECK(a == b);
    CHECK(a != sample_vector(d, 64, 6));
    for (double v : a) CHECK(static_cast<double>(static_cast<float>(v)) == v);

    DistributionSpec g;
    g.kind = DistributionKind::GaussianFixed;
    g.seed = 1;
    CHECK(sample_vector(g, 1)[0] == sample_vector(g, 1)[0]);

    const Dataset ds = make_dataset(d, 10, 64, 3);
    for (std::size_t i = 0; i < 10; ++i) {
        const auto row = ds.row(i);
        const auto ref = sample_vector(d, 64, i);
        for (std::size_t j = 0; j < 64; ++j) REQUIRE(row[j] == static_cast<float>(ref[j]));
    }
}

TEST_CASE("adversarial pattern") {
    DistributionSpec d;
    d.kind = DistributionKind::TwoMagnitudeAdversarial;
    d.big = 1.0;
    d.small = 0x1p-20;
    d.ratio = 0.5;
    const auto v = sample_vector(d, 32);
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double a = std::fabs(v[i]);
        if (i % 2 == 1) {
            CHECK(a >= 1.0);
            CHECK(a < 2.0);
        } else {
            CHECK(a >= 0x1p-20);
            CHECK(a < 0x1p-19);
        }
    }
    d.ratio = 0.25;
    const auto w = sample_vector(d, 16);
    for (std::size_t i = 0; i < w.size(); ++i) CHECK((std::fabs(w[i]) >= 1.0) == (i % 4 == 3));
}

TEST_CASE("uniform and lognormal ranges") {
    DistributionSpec u;
    u.kind = DistributionKind::Uniform;
    u.low = 2.0;
    u.high = 3.0;
    for (double v : sample_vector(u, 1000)) {
        REQUIRE(v >= 2.0);
        REQUIRE(v <= 3.0);
    }
    DistributionSpec l;
    l.kind = DistributionKind::Lognormal;
    int neg = 0;
    for (double v : sample_vector(l, 1000)) {
        REQUIRE(v != 0.0);
        neg += v < 0.0;
    }
    CHECK(neg > 400);
    CHECK(neg < 600);
}

TEST_CASE("variable-variance vectors have half-normal scales") {
    DistributionSpec d;
    d.seed = 2024;
    const std::size_t n = 10000;
    std::vector<double> sd(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto v = sample_vector(d, 1024, i);
        double s2 = 0.0;
        for (double x : v) s2 += x * x;
        sd[i] = std::sqrt(s2 / 1024.0);
    }
    std::sort(sd.begin(), sd.end());
    double ks = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double cdf = std::erf(sd[i] / std::sqrt(2.0));
        ks = std::max({ks, std::fabs(cdf - static_cast<double>(i) / n), std::fabs(cdf - static_cast<double>(i + 1) / n)});
    }
    CHECK(ks < 1.63 / std::sqrt(static_cast<double>(n)));  // 1% critical value
}

TEST_CASE("estimate is deterministic and schedule independent") {
    DistributionSpec d;
    d.seed = 5;
    const FormatPreset mx = preset("MX6");
    const auto a = estimate_qsnr(mx, d, 300, 256, {false, 1});
    const auto b = estimate_qsnr(mx, d, 300, 256, {false, 4});
    CHECK(a.mean_db == b.mean_db);
    CHECK(a.std_db == b.std_db);
    const FormatPreset e4 = preset("FP8-E4M3");
    CHECK(estimate_qsnr(e4, d, 300, 256, {true, 1}).mean_db == estimate_qsnr(e4, d, 300, 256, {true, 3}).mean_db);
    CHECK(a.n_vectors == 300);
    CHECK(a.vec_len == 256);
}

TEST_CASE("wide mantissas give high fidelity") {
    DistributionSpec d;
    const FormatPreset wide = bdr_preset(pow2(20, 1, 16, 2), ScalingPolicy::PerBlockHw);
    for (auto k : all_distribution_kinds()) {
        d.kind = k;
        CHECK(estimate_qsnr(wide, d, 50, 256).mean_db > 60.0);
    }
}

TEST_CASE("exact vectors give an infinite mean") {
    Dataset ds{2, 4, {1.0F, 0.5F, 0.25F, 0.125F, 2.0F, -1.0F, 0.0F, 0.5F}};
    const auto r = estimate_qsnr(preset("MX9"), ds);
    CHECK(std::isinf(r.mean_db));
    CHECK(r.n_exact == 2);
    Dataset zero{1, 4, {0.0F, 0.0F, 0.0F, 0.0F}};
    CHECK_THROWS_AS(estimate_qsnr(preset("MX9"), zero), DataError);
}

TEST_CASE("power-of-two scaling leaves QSNR unchanged") {
    DistributionSpec d;
    d.seed = 9;
    const Dataset base = make_dataset(d, 100, 256);
    for (int j : {-7, 3, 12}) {
        Dataset scaled = base;
        for (auto& v : scaled.values) v = std::ldexp(v, j);
        for (const char* name : {"MX9", "MX4", "MSFP12", "BDR(3,2,32,4,hw)"}) {
            INFO(name << " j=" << j);
            CHECK(per_vector_qsnr(preset(name), scaled) == per_vector_qsnr(preset(name), base));
        }
    }
}

TEST_CASE("QSNR is monotone in block sizes") {
    DistributionSpec d;
    d.seed = 10;
    const Dataset ds = make_dataset(d, 1000, 1024);
    for (int m : {2, 4, 7}) {
        double prev = INFINITY;
        double prev_se = 0.0;
        for (std::size_t k1 : {8U, 16U, 32U, 64U}) {
            const auto r = estimate_qsnr(bdr_preset(pow2(m, 1, k1, 2), ScalingPolicy::PerBlockHw), ds);
            const double se = r.std_db / std::sqrt(static_cast<double>(r.n_vectors));
            CHECK(r.mean_db <= prev + std::max(se, prev_se));
            prev = r.mean_db;
            prev_se = se;
        }
        prev = INFINITY;
        for (std::size_t k2 : {1U, 2U, 4U, 8U}) {
            const auto r = estimate_qsnr(bdr_preset(pow2(m, 1, 16, k2), ScalingPolicy::PerBlockHw), ds);
            const double se = r.std_db / std::sqrt(static_cast<double>(r.n_vectors));
            CHECK(r.mean_db <= prev + std::max(se, prev_se));
            prev = r.mean_db;
            prev_se = se;
        }
    }
}

TEST_CASE("measured mantissa slope") {
    DistributionSpec d;
    d.seed = 12;
    const Dataset ds = make_dataset(d, 1000, 1024);
    std::vector<double> ms;
    std::vector<double> q;
    for (int m = 2; m <= 8; ++m) {
        ms.push_back(m);
        q.push_back(estimate_qsnr(bdr_preset(pow2(m, 1, 16, 2), ScalingPolicy::PerBlockHw), ds).mean_db);
    }
    CHECK(std::fabs(linear_slope(ms, q) - 6.02) <= 0.5);
}

TEST_CASE("measured QSNR never falls below the bound") {
    DominanceOptions opts;
    opts.n_configs = 30;
    opts.n_vectors = 16;
    opts.slope_vectors = 200;
    opts.seed = 3;
    const DominanceReport r = verify_bound_dominance(opts);
    CHECK(r.configs == 30);
    CHECK(r.distributions == 5);
    CHECK(r.measurements == 30 * 5 * 16);
    CHECK(r.violations == 0);
    CHECK(r.worst_margin_db >= 0.0);
}

TEST_CASE("pooled and averaged summaries") {
    const std::vector<double> db{10.0, 20.0, INFINITY};
    const auto r = summarize_qsnr(db, 8);
    CHECK(r.mean_db == 15.0);
    CHECK(r.n_exact == 1);
    CHECK(r.std_db == Catch::Approx(std::sqrt(50.0)));
}

TEST_CASE("error chain on random blocks") {
    Xoshiro256pp rng(31);
    for (int trial = 0; trial < 5000; ++trial) {
        const int m = 1 + static_cast<int>(rng() % 8);
        const int d2 = static_cast<int>(rng() % 3);
        const std::size_t k1 = std::size_t{1} << (rng() % 6);
        const std::size_t k2 = std::max<std::size_t>(1, k1 >> (rng() % 3));
        const BdrConfig cfg = pow2(m, d2, k1, k2);
        std::vector<double> x(k1);
        for (auto& v : x) v = std::ldexp(rng.normal(), static_cast<int>(rng() % 8) - 4);
        const auto c = oracle::choose(x, cfg);
        if (c.zero) continue;
        const auto q = oracle::quantize_with(x, cfg, c.e, c.tau);
        const auto r = oracle::error_chain(x, q, cfg, c.e, c.tau);
        INFO(describe(cfg));
        REQUIRE(r.ok());
    }
}
