// Copyright 2026 The bdrlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "bdr/cost.hpp"
#include "bdr/fidelity.hpp"
#include "bdr/formats.hpp"

namespace bdr {

struct SweepSpec {
    std::vector<int> m = {2, 3, 4, 5, 6, 7};
    std::vector<int> d2 = {0, 1, 2};
    std::vector<std::size_t> k1 = {8, 16, 32, 64};
    std::vector<std::size_t> k2 = {1, 2, 4, 8};
    std::vector<ScalingPolicy> policies = {ScalingPolicy::PerBlockHw, ScalingPolicy::PerCoarseBlockSw,
                                           ScalingPolicy::PerTensorSwDelayed};
    bool baselines = true;  // INT, FP8, MSFP and VSQ reference rows
    DistributionSpec dist;
    std::size_t n_vectors = 10000;
    std::size_t vec_len = 1024;
    std::size_t r = kDefaultReduction;
    bool pooled = false;
    unsigned threads = 0;
};

/// Presets named by the baseline rows, in output order.
[[nodiscard]] const std::vector<std::string>& baseline_preset_names();

struct SweepPlan {
    std::vector<FormatPreset> presets;  // canonical order: m, d2, k1, k2, policy, then baselines
    std::vector<std::string> warnings;  // one per skipped grid entry
};

/// Expands the grid. Invalid combinations are skipped with a warning. BDR
/// points matching MX9/MX6/MX4 under per-block hardware scaling take those names.
[[nodiscard]] SweepPlan plan_sweep(const SweepSpec& spec);

/// Stable description of everything that determines the sweep's output.
[[nodiscard]] std::string sweep_fingerprint(const SweepSpec& spec);

struct SweepResult {
    std::vector<CostPoint> rows;  // canonical order
    std::vector<std::string> warnings;
    std::size_t planned = 0;
    std::size_t skipped = 0;  // invalid grid entries and rows without area data
    std::size_t resumed = 0;  // rows taken from a checkpoint
};

struct SweepIo {
    /// When set, completed rows are appended here and reused by a later run
    /// with the same fingerprint; removed once the sweep finishes.
    std::string checkpoint_path;
    const AreaTable* area_table = nullptr;
    std::ostream* progress = nullptr;
};

[[nodiscard]] SweepResult run_sweep(const SweepSpec& spec, const SweepIo& io = {});

}  // namespace bdr
