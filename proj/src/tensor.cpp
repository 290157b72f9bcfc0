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

#include "dexpix/tensor.hpp"

#include <cmath>

namespace dexpix {

bool Tensor::all_finite() const {
    for (double v : data_) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

void gemm_acc(const double* a, const double* b, double* c, size_t m, size_t n, size_t k) {
    // Four A-rows per pass keeps B[k] row traffic shared; inner loop over n
    // vectorizes.
    size_t i = 0;
    for (; i + 4 <= m; i += 4) {
        for (size_t p = 0; p < k; ++p) {
            const double a0 = a[(i + 0) * k + p];
            const double a1 = a[(i + 1) * k + p];
            const double a2 = a[(i + 2) * k + p];
            const double a3 = a[(i + 3) * k + p];
            const double* br = b + p * n;
            double* c0 = c + (i + 0) * n;
            double* c1 = c + (i + 1) * n;
            double* c2 = c + (i + 2) * n;
            double* c3 = c + (i + 3) * n;
            for (size_t j = 0; j < n; ++j) {
                const double bv = br[j];
                c0[j] += a0 * bv;
                c1[j] += a1 * bv;
                c2[j] += a2 * bv;
                c3[j] += a3 * bv;
            }
        }
    }
    for (; i < m; ++i) {
        for (size_t p = 0; p < k; ++p) {
            const double av = a[i * k + p];
            const double* br = b + p * n;
            double* cr = c + i * n;
            for (size_t j = 0; j < n; ++j) cr[j] += av * br[j];
        }
    }
}

void matvec(const double* mat, const double* vec, double* out, size_t rows, size_t cols) {
    for (size_t r = 0; r < rows; ++r) {
        const double* row = mat + r * cols;
        double acc = 0.0;
        for (size_t c = 0; c < cols; ++c) acc += row[c] * vec[c];
        out[r] = acc;
    }
}

void matvec_t_acc(const double* mat, const double* vec, double* out, size_t rows, size_t cols) {
    for (size_t r = 0; r < rows; ++r) {
        const double* row = mat + r * cols;
        const double v = vec[r];
        for (size_t c = 0; c < cols; ++c) out[c] += v * row[c];
    }
}

void transpose(const double* src, double* dst, size_t rows, size_t cols) {
    for (size_t r = 0; r < rows; ++r)
        for (size_t c = 0; c < cols; ++c) dst[c * rows + r] = src[r * cols + c];
}

}  // namespace dexpix
