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

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <vector>

#include "dexpix/tensor.hpp"

namespace dexpix {

enum class NetErrorKind {
    InputTooShort,
    ShapeMismatch,
    NonFiniteGradient,
};

class NetError : public std::runtime_error {
public:
    NetError(NetErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}
    NetErrorKind kind() const { return kind_; }

private:
    NetErrorKind kind_;
};

// Architecture knobs. The defaults are the production configuration:
// two conv(kernel 12, ReLU) + maxpool(12) units with 64 and 128 filters,
// then dense 64 (sigmoid) and dense 1 (sigmoid). Smaller values exist for
// tests (e.g. finite-difference checks on tiny networks).
struct NetConfig {
    size_t kernel = 12;
    size_t pool = 12;  // stride == pool size, non-overlapping
    size_t conv1_filters = 64;
    size_t conv2_filters = 128;
    size_t hidden = 64;
};

// Valid cross-correlation, stride 1. Throws InputTooShort below kernel.
size_t conv_out_len(size_t len, size_t kernel);
// Non-overlapping windows, remainder dropped. A tail shorter than the
// pool emits one partial window only when there is no full window, so
// narrow ablation widths still flow through both units.
size_t pool_out_len(size_t len, size_t pool);

// conv1/pool1/conv2/pool2 output lengths plus the flattened count.
struct ShapeTrace {
    size_t conv1_len, pool1_len, conv2_len, pool2_len, flat;
};
ShapeTrace shape_trace(size_t input_width, const NetConfig& config = {});

// The learnable tensors, in checkpoint order.
struct ParamSet {
    Tensor conv1_w;   // 64 x 1 x 12
    Tensor conv1_b;   // 64
    Tensor conv2_w;   // 128 x 64 x 12
    Tensor conv2_b;   // 128
    Tensor dense1_w;  // 64 x flat
    Tensor dense1_b;  // 64
    Tensor dense2_w;  // 1 x 64
    Tensor dense2_b;  // 1

    std::array<Tensor*, 8> tensors();
    std::array<const Tensor*, 8> tensors() const;
    bool all_finite() const;
};

struct NetworkParams {
    size_t input_width = 0;
    uint64_t rng_seed = 0;
    NetConfig config;
    ParamSet set;

    // Zero-shaped tensors for the configured width (gradients, moments).
    ParamSet zeros_like() const;
};

// Glorot-uniform weights, zero biases, deterministic from seed.
NetworkParams init_params(uint64_t seed, size_t input_width, const NetConfig& config = {});

// Intermediate activations kept for the backward pass.
struct ForwardTrace {
    Tensor input;               // copy of the image, 1 x W
    Tensor conv1_out;           // post-ReLU, 64 x L1
    Tensor pool1_out;           // 64 x P1
    std::vector<uint32_t> pool1_argmax;
    Tensor conv2_out;           // post-ReLU, 128 x L2
    Tensor pool2_out;           // 128 x P2 (the flattened features)
    std::vector<uint32_t> pool2_argmax;
    Tensor dense1_out;          // 64, post-sigmoid
    double output = 0.0;        // probability
};

// Standalone layer ops (also the building blocks of forward()).
// input: channels x length; weights: out_ch x in_ch x kernel.
Tensor conv1d_forward(const Tensor& input, const Tensor& weights, const Tensor& bias);
Tensor maxpool1d_forward(const Tensor& input, size_t pool = 12,
                         std::vector<uint32_t>* argmax = nullptr);

double forward(const NetworkParams& params, const Tensor& image, ForwardTrace* trace = nullptr);

double bce_loss(double prediction, double label);

// Gradients of bce_loss(forward(image), label) w.r.t. every learnable
// tensor, accumulated into `grads` (callers zero it for one sample).
// Max-pool routes to the argmax (lowest index on tie); ReLU gates zero
// at non-positive preactivations.
void backward(const NetworkParams& params, const ForwardTrace& trace, double label,
              ParamSet& grads);

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct AdamState {
    ParamSet m;
    ParamSet v;
    uint64_t step = 0;

    static AdamState for_params(const NetworkParams& params);
};

void adam_step(NetworkParams& params, const ParamSet& grads, AdamState& state,
               const AdamConfig& config = {});

// Checkpoint: magic "DXRM", u32 version, u32 input width, u64 seed, the
// eight tensors (u32 rank, u32 dims, f64-LE data), then optimizer state
// when present. Little-endian throughout.
void save_checkpoint(const std::filesystem::path& path, const NetworkParams& params,
                     const AdamState* state = nullptr);
NetworkParams load_checkpoint(const std::filesystem::path& path,
                              AdamState* state_out = nullptr);

}  // namespace dexpix
