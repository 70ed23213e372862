// Copyright 2026 The facecut-pipeline Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Writes regression-tree shape models in the binary layout used by published
// 68-point predictor files, so tests can build tiny models with known output.
#pragma once

#include <cmath>
#include <cstdint>
#include <ostream>
#include <vector>

namespace dlibfmt {

inline void put_int(std::ostream& out, std::int64_t value) {
  const bool negative = value < 0;
  std::uint64_t magnitude = negative ? static_cast<std::uint64_t>(-value) : static_cast<std::uint64_t>(value);
  unsigned char bytes[8];
  unsigned char size = 0;
  while (magnitude != 0) {
    bytes[size++] = static_cast<unsigned char>(magnitude & 0xFF);
    magnitude >>= 8;
  }
  out.put(static_cast<char>(size | (negative ? 0x80 : 0)));
  out.write(reinterpret_cast<const char*>(bytes), size);
}

inline void put_float(std::ostream& out, float value) {
  int exponent = 0;
  const float fraction = std::frexp(value, &exponent);
  const auto mantissa = static_cast<std::int64_t>(std::ldexp(fraction, 24));
  put_int(out, mantissa);
  put_int(out, exponent - 24);
}

struct Split {
  std::uint64_t idx1;
  std::uint64_t idx2;
  float thresh;
};

struct Tree {
  std::vector<Split> splits;
  std::vector<std::vector<float>> leaves;  ///< each 2 * landmarks long
};

struct Model {
  std::vector<float> initial_shape;  ///< x0, y0, x1, y1, ... in box units
  std::vector<std::vector<Tree>> forests;
  std::vector<std::vector<std::uint64_t>> anchors;
  std::vector<std::vector<std::pair<float, float>>> deltas;
};

inline void put_column(std::ostream& out, const std::vector<float>& values) {
  put_int(out, -static_cast<std::int64_t>(values.size()));
  put_int(out, -1);
  for (float v : values) put_float(out, v);
}

inline void write(std::ostream& out, const Model& m) {
  put_int(out, 1);
  put_column(out, m.initial_shape);
  put_int(out, static_cast<std::int64_t>(m.forests.size()));
  for (const auto& forest : m.forests) {
    put_int(out, static_cast<std::int64_t>(forest.size()));
    for (const auto& tree : forest) {
      put_int(out, static_cast<std::int64_t>(tree.splits.size()));
      for (const auto& s : tree.splits) {
        put_int(out, static_cast<std::int64_t>(s.idx1));
        put_int(out, static_cast<std::int64_t>(s.idx2));
        put_float(out, s.thresh);
      }
      put_int(out, static_cast<std::int64_t>(tree.leaves.size()));
      for (const auto& leaf : tree.leaves) put_column(out, leaf);
    }
  }
  put_int(out, static_cast<std::int64_t>(m.anchors.size()));
  for (const auto& level : m.anchors) {
    put_int(out, static_cast<std::int64_t>(level.size()));
    for (auto a : level) put_int(out, static_cast<std::int64_t>(a));
  }
  put_int(out, static_cast<std::int64_t>(m.deltas.size()));
  for (const auto& level : m.deltas) {
    put_int(out, static_cast<std::int64_t>(level.size()));
    for (const auto& [x, y] : level) {
      put_float(out, x);
      put_float(out, y);
    }
  }
}

}  // namespace dlibfmt
