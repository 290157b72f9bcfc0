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

#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace dexpix {

// Dense row-major tensor of 64-bit reals.
class Tensor {
public:
    Tensor() = default;

    explicit Tensor(std::vector<size_t> shape)
        : shape_(std::move(shape)), data_(count_of(shape_), 0.0) {}

    Tensor(std::initializer_list<size_t> shape)
        : Tensor(std::vector<size_t>(shape)) {}

    const std::vector<size_t>& shape() const { return shape_; }
    size_t size() const { return data_.size(); }
    size_t dim(size_t i) const { return shape_.at(i); }
    size_t rank() const { return shape_.size(); }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    double& operator[](size_t i) { return data_[i]; }
    double operator[](size_t i) const { return data_[i]; }

    // 2-D access: row-major (rows × cols).
    double& at(size_t r, size_t c) { return data_[r * shape_[1] + c]; }
    double at(size_t r, size_t c) const { return data_[r * shape_[1] + c]; }

    void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

    bool all_finite() const;

    bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }

private:
    static size_t count_of(const std::vector<size_t>& s) {
        size_t n = 1;
        for (size_t d : s) n *= d;
        return n;
    }

    std::vector<size_t> shape_;
    std::vector<double> data_;
};

// C[M][N] += A[M][K] * B[K][N], all row-major. The accumulation order per
// output element is fixed (ascending k), so results are bit-reproducible.
void gemm_acc(const double* a, const double* b, double* c, size_t m, size_t n, size_t k);

// out[i] = dot(mat row i, vec), mat is rows × cols.
void matvec(const double* mat, const double* vec, double* out, size_t rows, size_t cols);

// out[j] += sum_i mat[i][j] * vec[i]  (transposed mat-vec, accumulating).
void matvec_t_acc(const double* mat, const double* vec, double* out, size_t rows, size_t cols);

// dst [cols][rows] = transpose of src [rows][cols].
void transpose(const double* src, double* dst, size_t rows, size_t cols);

}  // namespace dexpix
