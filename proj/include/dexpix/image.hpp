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

#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <vector>

#include "dexpix/apk.hpp"
#include "dexpix/tensor.hpp"

namespace dexpix {

class EmptyStream : public std::runtime_error {
public:
    EmptyStream() : std::runtime_error("byte stream is empty") {}
};

// 1-pixel-high grey-scale image: pixel i is byte i of the stream.
struct VectorImage {
    std::vector<uint8_t> pixels;

    size_t width() const { return pixels.size(); }
};

// ceil(sqrt(l)) x ceil(sqrt(l)) grid, zero-padded, row-major. The
// comparison representation only; the pipeline trains on vector images.
struct SquareImage {
    size_t side = 0;
    std::vector<uint8_t> pixels;
};

// Real-valued 1-D image after bilinear resampling. Not re-quantized.
struct ResizedImage {
    std::vector<double> values;

    size_t width() const { return values.size(); }
};

struct ResizedSquare {
    size_t side = 0;
    std::vector<double> values;  // row-major side x side
};

VectorImage to_vector_image(const ByteStream& stream);
SquareImage to_square_image(const ByteStream& stream);

// Bilinear, no antialiasing, half-pixel-centered: output pixel j samples
// source coordinate (j + 0.5) * (w_in / w_out) - 0.5, clamped to
// [0, w_in - 1].
ResizedImage resize_vector(const VectorImage& image, size_t target_width);
ResizedSquare resize_square(const SquareImage& image, size_t target_side);

// Intensities scaled by 1/255 into [0, 1].
Tensor normalize(const ResizedImage& image);

// Cache file formats. "DXR1": u32-LE width then width raw bytes.
// "DXRF": u32-LE width then width f64-LE values.
void write_vector_image(const std::filesystem::path& path, const VectorImage& image);
VectorImage read_vector_image(const std::filesystem::path& path);
void write_resized_image(const std::filesystem::path& path, const ResizedImage& image);
ResizedImage read_resized_image(const std::filesystem::path& path);

// Width recorded in a DXRF header, without loading the pixels.
size_t read_resized_width(const std::filesystem::path& path);

// Binary PGM (P5), height 1, for eyeballing.
void write_pgm(const std::filesystem::path& path, const VectorImage& image);

}  // namespace dexpix
