// Copyright 2026 The bdrlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>

namespace bdr {

template <typename Fn>
void for_each_fiber(Tensor& t, std::size_t axis, Fn&& fn) {
    if (axis >= t.rank()) {
        throw std::invalid_argument("axis out of range");
    }
    std::size_t outer = 1;
    for (std::size_t d = 0; d < axis; ++d) {
        outer *= t.shape[d];
    }
    std::size_t inner = 1;
    for (std::size_t d = axis + 1; d < t.rank(); ++d) {
        inner *= t.shape[d];
    }
    const std::size_t len = t.shape[axis];
    std::vector<double> fiber(len);
    for (std::size_t o = 0; o < outer; ++o) {
        for (std::size_t in = 0; in < inner; ++in) {
            const std::size_t base = o * len * inner + in;
            for (std::size_t j = 0; j < len; ++j) {
                fiber[j] = t.data[base + j * inner];
            }
            fn(std::span<double>(fiber));
            for (std::size_t j = 0; j < len; ++j) {
                t.data[base + j * inner] = fiber[j];
            }
        }
    }
}

}  // namespace bdr
