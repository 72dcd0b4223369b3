// Copyright 2026 The bdrlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <deque>
#include <span>
#include <vector>

namespace bdr {

/// Bounded history of absolute-maximum observations backing delayed scaling.
/// Single writer; not synchronized.
class ScaleState {
public:
    explicit ScaleState(std::size_t capacity = 1024);

    /// Appends an observation, evicting the oldest past capacity.
    void observe(double amax);

    [[nodiscard]] bool empty() const noexcept { return window_.empty(); }
    [[nodiscard]] std::size_t size() const noexcept { return window_.size(); }
    [[nodiscard]] std::size_t capacity() const noexcept { return capacity_; }
    [[nodiscard]] double window_max() const noexcept;

    /// max(window) / format_max, or 1 when the window is empty or all zero.
    [[nodiscard]] double scale(double format_max) const;

private:
    std::deque<double> window_;
    std::size_t capacity_;
};

/// Pushes new_amax and returns the resulting window scale.
double delayed_scale(ScaleState& state, double new_amax, double format_max);

/// Scales for a stream of vectors under delayed scaling: vector i uses the
/// maximum of amax[i - window .. i - 1]; vector 0 has no history and uses its
/// own maximum. Zero maxima fall back to 1. Matches feeding a ScaleState of
/// the same capacity through next_delayed_scale().
[[nodiscard]] std::vector<double> delayed_scale_sequence(std::span<const double> amax, std::size_t window,
                                                         double format_max);

}  // namespace bdr
