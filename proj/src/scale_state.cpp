// Copyright 2026 The bdrlab Authors
// SPDX-License-Identifier: Apache-2.0

#include "bdr/scale_state.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bdr {

ScaleState::ScaleState(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) {
        throw std::invalid_argument("scale window capacity must be positive");
    }
}

void ScaleState::observe(double amax) {
    if (!(amax >= 0.0) || !std::isfinite(amax)) {
        throw std::invalid_argument("absolute maximum must be finite and non-negative");
    }
    window_.push_back(amax);
    if (window_.size() > capacity_) {
        window_.pop_front();
    }
}

double ScaleState::window_max() const noexcept {
    double m = 0.0;
    for (double v : window_) {
        m = std::max(m, v);
    }
    return m;
}

double ScaleState::scale(double format_max) const {
    if (!(format_max > 0.0)) {
        throw std::invalid_argument("format maximum must be positive");
    }
    const double m = window_max();
    return m > 0.0 ? m / format_max : 1.0;
}

double delayed_scale(ScaleState& state, double new_amax, double format_max) {
    state.observe(new_amax);
    return state.scale(format_max);
}

std::vector<double> delayed_scale_sequence(std::span<const double> amax, std::size_t window,
                                           double format_max) {
    if (window == 0) {
        throw std::invalid_argument("scale window capacity must be positive");
    }
    if (!(format_max > 0.0)) {
        throw std::invalid_argument("format maximum must be positive");
    }
    auto to_scale = [format_max](double m) { return m > 0.0 ? m / format_max : 1.0; };
    std::vector<double> scales(amax.size());
    std::deque<std::size_t> candidates;  // indices with decreasing amax
    for (std::size_t i = 0; i < amax.size(); ++i) {
        if (!(amax[i] >= 0.0) || !std::isfinite(amax[i])) {
            throw std::invalid_argument("absolute maximum must be finite and non-negative");
        }
        while (!candidates.empty() && candidates.front() + window < i) {
            candidates.pop_front();
        }
        scales[i] = to_scale(candidates.empty() ? amax[i] : amax[candidates.front()]);
        while (!candidates.empty() && amax[candidates.back()] <= amax[i]) {
            candidates.pop_back();
        }
        candidates.push_back(i);
    }
    return scales;
}

}  // namespace bdr
