/*
 * Copyright (C) 2026 The dexpix Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "dexpix/image.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

namespace dexpix {

namespace {

void write_u32_le(std::ostream& out, uint32_t v) {
    uint8_t b[4] = {static_cast<uint8_t>(v), static_cast<uint8_t>(v >> 8),
                    static_cast<uint8_t>(v >> 16), static_cast<uint8_t>(v >> 24)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

uint32_t read_u32_le(std::istream& in) {
    uint8_t b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    return static_cast<uint32_t>(b[0]) | static_cast<uint32_t>(b[1]) << 8 |
           static_cast<uint32_t>(b[2]) << 16 | static_cast<uint32_t>(b[3]) << 24;
}

void expect_magic(std::istream& in, const char* magic, const std::filesystem::path& path) {
    char buf[4];
    in.read(buf, 4);
    if (!in || std::memcmp(buf, magic, 4) != 0)
        throw std::runtime_error("bad magic in cache file " + path.string());
}

// 1-D bilinear resample of `src` (any arithmetic source accessor) onto
// `n_out` samples with half-pixel-centered mapping.
template <typename Src>
void resample_line(const Src& src, size_t n_in, double* out, size_t n_out) {
    const double scale = static_cast<double>(n_in) / static_cast<double>(n_out);
    for (size_t j = 0; j < n_out; ++j) {
        double coord = (static_cast<double>(j) + 0.5) * scale - 0.5;
        if (coord < 0.0) coord = 0.0;
        const double hi_bound = static_cast<double>(n_in - 1);
        if (coord > hi_bound) coord = hi_bound;
        const size_t lo = static_cast<size_t>(coord);
        const size_t hi = lo + 1 < n_in ? lo + 1 : lo;
        const double frac = coord - static_cast<double>(lo);
        out[j] = src(lo) * (1.0 - frac) + src(hi) * frac;
    }
}

}  // namespace

VectorImage to_vector_image(const ByteStream& stream) {
    if (stream.bytes.empty()) throw EmptyStream();
    return VectorImage{stream.bytes};
}

SquareImage to_square_image(const ByteStream& stream) {
    if (stream.bytes.empty()) throw EmptyStream();
    const double root = std::sqrt(static_cast<double>(stream.bytes.size()));
    size_t side = static_cast<size_t>(std::ceil(root));
    // Guard against floating-point ceil landing one short on perfect squares.
    while (side * side < stream.bytes.size()) ++side;
    SquareImage image;
    image.side = side;
    image.pixels = stream.bytes;
    image.pixels.resize(side * side, 0);
    return image;
}

ResizedImage resize_vector(const VectorImage& image, size_t target_width) {
    if (image.pixels.empty() || target_width == 0)
        throw std::invalid_argument("resize_vector requires nonempty image and target");
    ResizedImage out;
    out.values.resize(target_width);
    resample_line([&](size_t i) { return static_cast<double>(image.pixels[i]); },
                  image.width(), out.values.data(), target_width);
    return out;
}

ResizedSquare resize_square(const SquareImage& image, size_t target_side) {
    if (image.side == 0 || target_side == 0)
        throw std::invalid_argument("resize_square requires nonempty image and target");
    const size_t in_side = image.side;
    // Separable: rows first, then columns.
    std::vector<double> rows(in_side * target_side);
    for (size_t r = 0; r < in_side; ++r) {
        const uint8_t* src_row = image.pixels.data() + r * in_side;
        resample_line([&](size_t i) { return static_cast<double>(src_row[i]); }, in_side,
                      rows.data() + r * target_side, target_side);
    }
    ResizedSquare out;
    out.side = target_side;
    out.values.resize(target_side * target_side);
    std::vector<double> column(target_side);
    for (size_t c = 0; c < target_side; ++c) {
        resample_line([&](size_t i) { return rows[i * target_side + c]; }, in_side,
                      column.data(), target_side);
        for (size_t r = 0; r < target_side; ++r) out.values[r * target_side + c] = column[r];
    }
    return out;
}

Tensor normalize(const ResizedImage& image) {
    Tensor t({image.width()});
    for (size_t i = 0; i < image.width(); ++i) t[i] = image.values[i] / 255.0;
    return t;
}

void write_vector_image(const std::filesystem::path& path, const VectorImage& image) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out.write("DXR1", 4);
    write_u32_le(out, static_cast<uint32_t>(image.width()));
    out.write(reinterpret_cast<const char*>(image.pixels.data()),
              static_cast<std::streamsize>(image.pixels.size()));
    if (!out) throw std::runtime_error("write failed on " + path.string());
}

VectorImage read_vector_image(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    expect_magic(in, "DXR1", path);
    uint32_t width = read_u32_le(in);
    VectorImage image;
    image.pixels.resize(width);
    in.read(reinterpret_cast<char*>(image.pixels.data()), width);
    if (!in) throw std::runtime_error("truncated cache file " + path.string());
    return image;
}

void write_resized_image(const std::filesystem::path& path, const ResizedImage& image) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out.write("DXRF", 4);
    write_u32_le(out, static_cast<uint32_t>(image.width()));
    static_assert(sizeof(double) == 8);
    out.write(reinterpret_cast<const char*>(image.values.data()),
              static_cast<std::streamsize>(image.values.size() * 8));
    if (!out) throw std::runtime_error("write failed on " + path.string());
}

ResizedImage read_resized_image(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    expect_magic(in, "DXRF", path);
    uint32_t width = read_u32_le(in);
    ResizedImage image;
    image.values.resize(width);
    in.read(reinterpret_cast<char*>(image.values.data()),
            static_cast<std::streamsize>(width * 8ull));
    if (!in) throw std::runtime_error("truncated cache file " + path.string());
    return image;
}

size_t read_resized_width(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    expect_magic(in, "DXRF", path);
    return read_u32_le(in);
}

void write_pgm(const std::filesystem::path& path, const VectorImage& image) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "P5\n" << image.width() << " 1\n255\n";
    out.write(reinterpret_cast<const char*>(image.pixels.data()),
              static_cast<std::streamsize>(image.pixels.size()));
}

}  // namespace dexpix
