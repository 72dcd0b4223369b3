// Copyright 2026 The bdrlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <string>

#include "bdr/tensor.hpp"

namespace bdr {

/// Binary tensor layout, all integers little-endian:
///   "BDRT" | u16 version = 1 | u16 rank | rank x u64 dims | f32 payload (row-major)
constexpr std::uint16_t kTensorFileVersion = 1;

/// Values are narrowed to f32 on write. Throws DataError for non-finite
/// values that do not survive narrowing.
void write_tensor(std::ostream& out, const Tensor& t);
void write_tensor_file(const std::string& path, const Tensor& t);

/// Throws DataError on bad magic, version, truncation or trailing bytes.
[[nodiscard]] Tensor read_tensor(std::istream& in);
[[nodiscard]] Tensor read_tensor_file(const std::string& path);

}  // namespace bdr
