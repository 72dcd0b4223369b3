// Copyright 2026 The bdrlab Authors
// SPDX-License-Identifier: Apache-2.0

#include "bdr/tensor_file.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>

#include "bdr/config.hpp"

namespace bdr {

namespace {

constexpr std::array<char, 4> kMagic = {'B', 'D', 'R', 'T'};
constexpr std::uint64_t kMaxElements = std::uint64_t{1} << 40;

template <typename U>
void put_le(std::ostream& out, U v) {
    std::array<char, sizeof(U)> bytes{};
    for (std::size_t i = 0; i < sizeof(U); ++i) {
        bytes[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
    }
    out.write(bytes.data(), bytes.size());
}

template <typename U>
U get_le(std::istream& in, const char* what) {
    std::array<unsigned char, sizeof(U)> bytes{};
    if (!in.read(reinterpret_cast<char*>(bytes.data()), bytes.size())) {
        throw DataError(std::string("tensor file truncated in ") + what);
    }
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) {
        v |= static_cast<U>(static_cast<U>(bytes[i]) << (8 * i));
    }
    return v;
}

}  // namespace

void write_tensor(std::ostream& out, const Tensor& t) {
    if (t.shape.size() > std::numeric_limits<std::uint16_t>::max()) {
        throw std::invalid_argument("tensor rank too large for the file format");
    }
    out.write(kMagic.data(), kMagic.size());
    put_le<std::uint16_t>(out, kTensorFileVersion);
    put_le<std::uint16_t>(out, static_cast<std::uint16_t>(t.shape.size()));
    for (std::size_t d : t.shape) {
        put_le<std::uint64_t>(out, d);
    }
    for (double v : t.data) {
        const auto f = static_cast<float>(v);
        if (std::isfinite(v) && !std::isfinite(f)) {
            throw DataError("value " + std::to_string(v) + " overflows f32");
        }
        put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(f));
    }
    if (!out) {
        throw DataError("failed writing tensor");
    }
}

void write_tensor_file(const std::string& path, const Tensor& t) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw DataError("cannot open '" + path + "' for writing");
    }
    write_tensor(out, t);
}

Tensor read_tensor(std::istream& in) {
    std::array<char, 4> magic{};
    if (!in.read(magic.data(), magic.size()) || magic != kMagic) {
        throw DataError("not a tensor file (bad magic)");
    }
    const auto version = get_le<std::uint16_t>(in, "header");
    if (version != kTensorFileVersion) {
        throw DataError("unsupported tensor file version " + std::to_string(version));
    }
    const auto rank = get_le<std::uint16_t>(in, "header");
    std::vector<std::size_t> shape(rank);
    std::uint64_t count = 1;
    for (auto& d : shape) {
        const auto dim = get_le<std::uint64_t>(in, "dims");
        if (dim != 0 && count > kMaxElements / dim) {
            throw DataError("tensor file declares too many elements");
        }
        count *= dim;
        d = static_cast<std::size_t>(dim);
    }
    std::vector<double> data(static_cast<std::size_t>(count));
    for (auto& v : data) {
        v = std::bit_cast<float>(get_le<std::uint32_t>(in, "payload"));
    }
    if (in.peek() != std::char_traits<char>::eof()) {
        throw DataError("tensor file has trailing bytes after the payload");
    }
    return Tensor(std::move(shape), std::move(data));
}

Tensor read_tensor_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open '" + path + "'");
    }
    return read_tensor(in);
}

}  // namespace bdr
