// Copyright 2026 The bdrlab Authors
// SPDX-License-Identifier: Apache-2.0

#include "bdr/tensor.hpp"

#include <algorithm>
#include <string>

namespace bdr {

Tensor::Tensor(std::vector<std::size_t> shape_, std::vector<double> data_)
    : shape(std::move(shape_)), data(std::move(data_)) {
    if (element_count(shape) != data.size()) {
        throw std::invalid_argument("tensor data holds " + std::to_string(data.size()) +
                                    " values but the shape needs " + std::to_string(element_count(shape)));
    }
}

std::size_t element_count(std::span<const std::size_t> shape) noexcept {
    std::size_t n = 1;
    for (std::size_t d : shape) {
        n *= d;
    }
    return n;
}

Tensor transposed(const Tensor& t) {
    if (t.rank() != 2) {
        throw std::invalid_argument("transposed() needs a rank-2 tensor");
    }
    const std::size_t rows = t.shape[0];
    const std::size_t cols = t.shape[1];
    std::vector<double> out(t.size());
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            out[c * rows + r] = t.data[r * cols + c];
        }
    }
    return Tensor({cols, rows}, std::move(out));
}

std::size_t QuantizedTensor::blocks_per_fiber() const noexcept {
    return (fiber_length() + cfg.k1 - 1) / cfg.k1;
}

std::size_t QuantizedTensor::fiber_count() const noexcept {
    return element_count(shape) / fiber_length();
}

std::span<const QuantizedBlock> QuantizedTensor::fiber(std::size_t index) const {
    if (index >= fiber_count()) {
        throw std::out_of_range("fiber index " + std::to_string(index) + " out of range");
    }
    const std::size_t per = blocks_per_fiber();
    return std::span<const QuantizedBlock>(blocks).subspan(index * per, per);
}

QuantizedTensor quantize_tensor_along_axis(const Tensor& t, std::size_t axis, const BdrConfig& cfg) {
    validate_codec(cfg);
    if (t.rank() == 0 || t.size() == 0) {
        throw std::invalid_argument("cannot quantize an empty tensor");
    }
    if (axis >= t.rank()) {
        throw std::invalid_argument("axis " + std::to_string(axis) + " out of range for rank " +
                                    std::to_string(t.rank()));
    }
    QuantizedTensor q;
    q.shape = t.shape;
    q.axis = axis;
    q.cfg = cfg;
    const std::size_t per = q.blocks_per_fiber();
    q.tail_len = per * cfg.k1 - q.fiber_length();
    q.blocks.reserve(q.fiber_count() * per);

    Tensor scratch = t;
    std::vector<double> padded(per * cfg.k1, 0.0);
    for_each_fiber(scratch, axis, [&](std::span<double> fiber) {
        std::copy(fiber.begin(), fiber.end(), padded.begin());
        std::fill(padded.begin() + static_cast<std::ptrdiff_t>(fiber.size()), padded.end(), 0.0);
        for (std::size_t b = 0; b < per; ++b) {
            q.blocks.push_back(quantize_block(std::span<const double>(padded).subspan(b * cfg.k1, cfg.k1), cfg));
        }
    });
    return q;
}

Tensor dequantize(const QuantizedTensor& q) {
    Tensor out(q.shape, std::vector<double>(element_count(q.shape), 0.0));
    const std::size_t per = q.blocks_per_fiber();
    if (q.blocks.size() != q.fiber_count() * per) {
        throw std::invalid_argument("quantized tensor has an inconsistent block count");
    }
    std::size_t fiber_index = 0;
    std::vector<double> values(per * q.cfg.k1);
    for_each_fiber(out, q.axis, [&](std::span<double> fiber) {
        const auto blocks = q.fiber(fiber_index++);
        for (std::size_t b = 0; b < per; ++b) {
            const auto decoded = dequantize_block(blocks[b], q.cfg);
            std::copy(decoded.begin(), decoded.end(), values.begin() + static_cast<std::ptrdiff_t>(b * q.cfg.k1));
        }
        std::copy_n(values.begin(), fiber.size(), fiber.begin());
    });
    return out;
}

}  // namespace bdr
