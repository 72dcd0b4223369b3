// Copyright 2026 The bdrlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "bdr/block.hpp"
#include "bdr/config.hpp"

namespace bdr {

/// Dense row-major tensor of wide reals.
struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<double> data;

    Tensor() = default;
    Tensor(std::vector<std::size_t> shape_, std::vector<double> data_);

    [[nodiscard]] std::size_t rank() const noexcept { return shape.size(); }
    [[nodiscard]] std::size_t size() const noexcept { return data.size(); }

    bool operator==(const Tensor&) const = default;
};

[[nodiscard]] std::size_t element_count(std::span<const std::size_t> shape) noexcept;

/// Rank-2 transpose.
[[nodiscard]] Tensor transposed(const Tensor& t);

/// Blocks laid out fiber by fiber. A fiber is one line of the tensor along
/// `axis`; fibers are ordered row-major over the remaining dimensions, and
/// each holds ceil(shape[axis] / k1) blocks, the last one zero-padded by
/// `tail_len` elements.
struct QuantizedTensor {
    std::vector<std::size_t> shape;
    std::size_t axis = 0;
    BdrConfig cfg;
    std::vector<QuantizedBlock> blocks;
    std::size_t tail_len = 0;

    [[nodiscard]] std::size_t fiber_length() const noexcept { return shape[axis]; }
    [[nodiscard]] std::size_t blocks_per_fiber() const noexcept;
    [[nodiscard]] std::size_t fiber_count() const noexcept;
    [[nodiscard]] std::span<const QuantizedBlock> fiber(std::size_t index) const;
};

[[nodiscard]] QuantizedTensor quantize_tensor_along_axis(const Tensor& t, std::size_t axis, const BdrConfig& cfg);
[[nodiscard]] Tensor dequantize(const QuantizedTensor& q);

/// Applies `fn(fiber_values)` to every fiber along `axis`, writing the
/// returned values back in place. Used for non-block formats that still need
/// directional processing.
template <typename Fn>
void for_each_fiber(Tensor& t, std::size_t axis, Fn&& fn);

}  // namespace bdr

#include "bdr/tensor_impl.hpp"
