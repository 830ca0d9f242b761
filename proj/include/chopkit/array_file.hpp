// Copyright 2026 The chopkit Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Array containers read and written by the command-line tool.
//
// Binary container: one ASCII header line, then little-endian raw values.
//
//   CHOPKIT-ARRAY 1 f64 3x4\n<96 bytes>
//
// The header fields are magic, version, element type (f32|f64) and the shape
// as 'x'-separated extents ("-" for a scalar). The payload length must equal
// the shape product times the element size.
//
// CSV: one row per line, comma separated, no header. Rows must have equal
// length; the shape is rows x columns.

#pragma once

#include <bit>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <functional>
#include <iterator>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace chopkit {

class ArrayFileError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ElementType { kF32, kF64 };
enum class Container { kBinary, kCsv };

struct ArrayData {
  Container container = Container::kBinary;
  ElementType type = ElementType::kF64;
  std::vector<std::size_t> shape;
  std::vector<double> values;  // f32 payloads are widened exactly
};

inline constexpr std::string_view kArrayMagic = "CHOPKIT-ARRAY";

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

inline double parse_double(std::string_view tok) {
  tok = trim(tok);
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  double v = 0.0;
  auto r = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (r.ec != std::errc{} || r.ptr != tok.data() + tok.size() || tok.empty()) {
    throw ArrayFileError("malformed number '" + std::string(tok) + "'");
  }
  return v;
}

inline std::size_t shape_product(const std::vector<std::size_t>& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

template <typename U>
U to_little_endian(U v) {
  if constexpr (std::endian::native == std::endian::big) {
    U out = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      out = (out << 8) | ((v >> (8 * i)) & 0xFF);
    }
    return out;
  }
  return v;
}

}  // namespace detail

inline ArrayData parse_csv(std::string_view text) {
  ArrayData d;
  d.container = Container::kCsv;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = detail::trim(text.substr(pos, end - pos));
    pos = end + 1;
    if (line.empty()) continue;
    std::size_t count = 0;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      d.values.push_back(detail::parse_double(
          line.substr(start, comma == std::string_view::npos
                                 ? std::string_view::npos
                                 : comma - start)));
      ++count;
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (rows > 0 && count != cols) {
      throw ArrayFileError("CSV row " + std::to_string(rows + 1) + " has " +
                           std::to_string(count) + " values, expected " +
                           std::to_string(cols));
    }
    cols = count;
    ++rows;
  }
  d.shape = {rows, cols};
  return d;
}

inline ArrayData parse_binary(std::string_view bytes) {
  const std::size_t nl = bytes.find('\n');
  if (nl == std::string_view::npos) throw ArrayFileError("missing header line");
  std::istringstream header{std::string(bytes.substr(0, nl))};
  std::string magic, version, type, shape;
  if (!(header >> magic >> version >> type >> shape) || magic != kArrayMagic) {
    throw ArrayFileError("malformed array header");
  }
  if (version != "1") throw ArrayFileError("unsupported version " + version);
  ArrayData d;
  d.container = Container::kBinary;
  if (type == "f32") {
    d.type = ElementType::kF32;
  } else if (type == "f64") {
    d.type = ElementType::kF64;
  } else {
    throw ArrayFileError("unsupported element type '" + type + "'");
  }
  if (shape != "-") {
    std::size_t start = 0;
    while (true) {
      const std::size_t x = shape.find('x', start);
      const std::string part = shape.substr(start, x == std::string::npos ? std::string::npos : x - start);
      std::size_t extent = 0;
      auto r = std::from_chars(part.data(), part.data() + part.size(), extent);
      if (part.empty() || r.ec != std::errc{} || r.ptr != part.data() + part.size()) {
        throw ArrayFileError("malformed shape '" + shape + "'");
      }
      d.shape.push_back(extent);
      if (x == std::string::npos) break;
      start = x + 1;
    }
  }
  const std::size_t count = detail::shape_product(d.shape);
  const std::size_t width = d.type == ElementType::kF32 ? 4 : 8;
  const std::string_view payload = bytes.substr(nl + 1);
  if (payload.size() != count * width) {
    throw ArrayFileError("payload holds " + std::to_string(payload.size()) +
                         " bytes, header declares " +
                         std::to_string(count * width));
  }
  d.values.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    if (width == 4) {
      std::uint32_t u = 0;
      std::memcpy(&u, payload.data() + 4 * i, 4);
      d.values[i] = std::bit_cast<float>(detail::to_little_endian(u));
    } else {
      std::uint64_t u = 0;
      std::memcpy(&u, payload.data() + 8 * i, 8);
      d.values[i] = std::bit_cast<double>(detail::to_little_endian(u));
    }
  }
  return d;
}

/// Binary if the content starts with the magic, CSV otherwise.
inline ArrayData parse_array(std::string_view content) {
  if (content.substr(0, kArrayMagic.size()) == kArrayMagic) {
    return parse_binary(content);
  }
  return parse_csv(content);
}

inline std::string serialize_array(const ArrayData& d) {
  if (detail::shape_product(d.shape) != d.values.size()) {
    throw ArrayFileError("shape does not match value count");
  }
  std::string out;
  if (d.container == Container::kCsv) {
    const std::size_t cols = d.shape.size() >= 2 ? d.shape.back() : 1;
    for (std::size_t i = 0; i < d.values.size(); ++i) {
      double v = d.values[i];
      if (d.type == ElementType::kF32) v = static_cast<float>(v);
      if (std::isnan(v)) {
        out += "nan";
      } else if (std::isinf(v)) {
        out += v > 0 ? "inf" : "-inf";
      } else {
        char buf[64];
        auto r = std::to_chars(buf, buf + sizeof(buf), v);
        out.append(buf, r.ptr);
      }
      out += ((i + 1) % cols == 0) ? '\n' : ',';
    }
    return out;
  }
  out += kArrayMagic;
  out += " 1 ";
  out += d.type == ElementType::kF32 ? "f32 " : "f64 ";
  if (d.shape.empty()) {
    out += '-';
  } else {
    for (std::size_t i = 0; i < d.shape.size(); ++i) {
      if (i) out += 'x';
      out += std::to_string(d.shape[i]);
    }
  }
  out += '\n';
  for (double v : d.values) {
    if (d.type == ElementType::kF32) {
      const auto u = detail::to_little_endian(
          std::bit_cast<std::uint32_t>(static_cast<float>(v)));
      out.append(reinterpret_cast<const char*>(&u), 4);
    } else {
      const auto u = detail::to_little_endian(std::bit_cast<std::uint64_t>(v));
      out.append(reinterpret_cast<const char*>(&u), 8);
    }
  }
  return out;
}

inline ArrayData read_array_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::ios_base::failure("cannot open '" + path + "'");
  std::string content((std::istreambuf_iterator<char>(in)),
                      std::istreambuf_iterator<char>());
  if (in.bad()) throw std::ios_base::failure("error reading '" + path + "'");
  return parse_array(content);
}

inline void write_array_file(const std::string& path, const ArrayData& d) {
  const std::string bytes = serialize_array(d);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::ios_base::failure("cannot open '" + path + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::ios_base::failure("error writing '" + path + "'");
}

}  // namespace chopkit
