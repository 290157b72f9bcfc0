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

#include "dexpix/network.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "dexpix/rng.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint and cache formats assume a little-endian host");

namespace dexpix {

namespace {

constexpr double kBceEps = 1e-7;

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// im2col, patches as rows: P[t][c*K + kk] = x[c][t + kk].
void patches_rows(const Tensor& x, size_t l_out, size_t k, std::vector<double>& p) {
    const size_t channels = x.dim(0);
    const size_t len = x.dim(1);
    p.resize(l_out * channels * k);
    for (size_t t = 0; t < l_out; ++t) {
        double* row = p.data() + t * channels * k;
        for (size_t c = 0; c < channels; ++c)
            std::memcpy(row + c * k, x.data() + c * len + t, k * sizeof(double));
    }
    (void)len;
}

// im2col, patches as columns: Pt[c*K + kk][t] = x[c][t + kk]. Each row is
// a shifted copy of a source row, so this is K memcpys per channel.
void patches_cols(const Tensor& x, size_t l_out, size_t k, std::vector<double>& pt) {
    const size_t channels = x.dim(0);
    const size_t len = x.dim(1);
    pt.resize(channels * k * l_out);
    for (size_t c = 0; c < channels; ++c)
        for (size_t kk = 0; kk < k; ++kk)
            std::memcpy(pt.data() + (c * k + kk) * l_out, x.data() + c * len + kk,
                        l_out * sizeof(double));
}

// dX[c][t + kk] += dPt[c*K + kk][t], the adjoint of patches_cols.
void scatter_patches(const std::vector<double>& dpt, size_t l_out, size_t k, Tensor& dx) {
    const size_t channels = dx.dim(0);
    const size_t len = dx.dim(1);
    for (size_t c = 0; c < channels; ++c)
        for (size_t kk = 0; kk < k; ++kk) {
            const double* src = dpt.data() + (c * k + kk) * l_out;
            double* dst = dx.data() + c * len + kk;
            for (size_t t = 0; t < l_out; ++t) dst[t] += src[t];
        }
}

// Gradient pieces shared by both conv layers. dY is out_ch x l_out
// (already ReLU-gated); dX may be null for the input layer.
void conv1d_backward(const Tensor& x, const Tensor& weights, const Tensor& dy,
                     Tensor& grad_w, Tensor& grad_b, Tensor* dx) {
    const size_t out_ch = weights.dim(0);
    const size_t kernel = weights.dim(2);
    const size_t patch = weights.dim(1) * kernel;
    const size_t l_out = dy.dim(1);

    std::vector<double> p;
    patches_rows(x, l_out, kernel, p);
    gemm_acc(dy.data(), p.data(), grad_w.data(), out_ch, patch, l_out);

    for (size_t o = 0; o < out_ch; ++o) {
        const double* row = dy.data() + o * l_out;
        double acc = 0.0;
        for (size_t t = 0; t < l_out; ++t) acc += row[t];
        grad_b[o] += acc;
    }

    if (dx) {
        std::vector<double> wt(patch * out_ch);
        transpose(weights.data(), wt.data(), out_ch, patch);
        std::vector<double> dpt(patch * l_out, 0.0);
        gemm_acc(wt.data(), dy.data(), dpt.data(), patch, l_out, out_ch);
        scatter_patches(dpt, l_out, kernel, *dx);
    }
}

void glorot_fill(Tensor& w, size_t fan_in, size_t fan_out, Rng& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (size_t i = 0; i < w.size(); ++i) w[i] = rng.uniform(-limit, limit);
}

void write_u32(std::ostream& out, uint32_t v) {
    out.write(reinterpret_cast<const char*>(&v), 4);
}

void write_u64(std::ostream& out, uint64_t v) {
    out.write(reinterpret_cast<const char*>(&v), 8);
}

uint32_t read_u32(std::istream& in) {
    uint32_t v = 0;
    in.read(reinterpret_cast<char*>(&v), 4);
    return v;
}

uint64_t read_u64(std::istream& in) {
    uint64_t v = 0;
    in.read(reinterpret_cast<char*>(&v), 8);
    return v;
}

void write_tensor(std::ostream& out, const Tensor& t) {
    write_u32(out, static_cast<uint32_t>(t.rank()));
    for (size_t d : t.shape()) write_u32(out, static_cast<uint32_t>(d));
    out.write(reinterpret_cast<const char*>(t.data()),
              static_cast<std::streamsize>(t.size() * 8));
}

Tensor read_tensor(std::istream& in) {
    uint32_t rank = read_u32(in);
    std::vector<size_t> shape(rank);
    for (auto& d : shape) d = read_u32(in);
    Tensor t(shape);
    in.read(reinterpret_cast<char*>(t.data()), static_cast<std::streamsize>(t.size() * 8));
    return t;
}

}  // namespace

size_t conv_out_len(size_t len, size_t kernel) {
    if (len < kernel)
        throw NetError(NetErrorKind::InputTooShort,
                       "convolution input length " + std::to_string(len) + " < kernel size " +
                           std::to_string(kernel));
    return len - kernel + 1;
}

size_t pool_out_len(size_t len, size_t pool) {
    if (len == 0) throw NetError(NetErrorKind::InputTooShort, "pool input is empty");
    size_t full = len / pool;
    return full == 0 ? 1 : full;
}

ShapeTrace shape_trace(size_t input_width, const NetConfig& config) {
    ShapeTrace t{};
    t.conv1_len = conv_out_len(input_width, config.kernel);
    t.pool1_len = pool_out_len(t.conv1_len, config.pool);
    t.conv2_len = conv_out_len(t.pool1_len, config.kernel);
    t.pool2_len = pool_out_len(t.conv2_len, config.pool);
    t.flat = config.conv2_filters * t.pool2_len;
    return t;
}

std::array<Tensor*, 8> ParamSet::tensors() {
    return {&conv1_w, &conv1_b, &conv2_w, &conv2_b, &dense1_w, &dense1_b, &dense2_w, &dense2_b};
}

std::array<const Tensor*, 8> ParamSet::tensors() const {
    return {&conv1_w, &conv1_b, &conv2_w, &conv2_b, &dense1_w, &dense1_b, &dense2_w, &dense2_b};
}

bool ParamSet::all_finite() const {
    for (const Tensor* t : tensors())
        if (!t->all_finite()) return false;
    return true;
}

ParamSet NetworkParams::zeros_like() const {
    ParamSet z;
    auto dst = z.tensors();
    auto src = set.tensors();
    for (size_t i = 0; i < dst.size(); ++i) *dst[i] = Tensor(src[i]->shape());
    return z;
}

NetworkParams init_params(uint64_t seed, size_t input_width, const NetConfig& config) {
    auto t = shape_trace(input_width, config);  // validates the width

    NetworkParams p;
    p.input_width = input_width;
    p.rng_seed = seed;
    p.config = config;
    p.set.conv1_w = Tensor({config.conv1_filters, 1, config.kernel});
    p.set.conv1_b = Tensor({config.conv1_filters});
    p.set.conv2_w = Tensor({config.conv2_filters, config.conv1_filters, config.kernel});
    p.set.conv2_b = Tensor({config.conv2_filters});
    p.set.dense1_w = Tensor({config.hidden, t.flat});
    p.set.dense1_b = Tensor({config.hidden});
    p.set.dense2_w = Tensor({1, config.hidden});
    p.set.dense2_b = Tensor({1});

    Rng rng(seed);
    glorot_fill(p.set.conv1_w, 1 * config.kernel, config.conv1_filters * config.kernel, rng);
    glorot_fill(p.set.conv2_w, config.conv1_filters * config.kernel,
                config.conv2_filters * config.kernel, rng);
    glorot_fill(p.set.dense1_w, t.flat, config.hidden, rng);
    glorot_fill(p.set.dense2_w, config.hidden, 1, rng);
    return p;
}

Tensor conv1d_forward(const Tensor& input, const Tensor& weights, const Tensor& bias) {
    if (input.rank() != 2 || weights.rank() != 3 || input.dim(0) != weights.dim(1))
        throw NetError(NetErrorKind::ShapeMismatch, "conv1d_forward shape mismatch");
    const size_t out_ch = weights.dim(0);
    const size_t kernel = weights.dim(2);
    const size_t patch = weights.dim(1) * kernel;
    const size_t l_out = conv_out_len(input.dim(1), kernel);

    std::vector<double> pt;
    patches_cols(input, l_out, kernel, pt);
    Tensor out({out_ch, l_out});
    gemm_acc(weights.data(), pt.data(), out.data(), out_ch, l_out, patch);
    for (size_t o = 0; o < out_ch; ++o) {
        double* row = out.data() + o * l_out;
        const double b = bias[o];
        for (size_t t = 0; t < l_out; ++t) {
            const double v = row[t] + b;
            row[t] = v > 0.0 ? v : 0.0;  // ReLU
        }
    }
    return out;
}

Tensor maxpool1d_forward(const Tensor& input, size_t pool, std::vector<uint32_t>* argmax) {
    if (input.rank() != 2) throw NetError(NetErrorKind::ShapeMismatch, "maxpool expects 2-D");
    const size_t channels = input.dim(0);
    const size_t len = input.dim(1);
    const size_t l_out = pool_out_len(len, pool);
    Tensor out({channels, l_out});
    if (argmax) argmax->assign(channels * l_out, 0);
    for (size_t c = 0; c < channels; ++c) {
        const double* row = input.data() + c * len;
        for (size_t j = 0; j < l_out; ++j) {
            const size_t begin = j * pool;
            const size_t end = std::min(begin + pool, len);
            size_t best = begin;
            double best_v = row[begin];
            for (size_t i = begin + 1; i < end; ++i)
                if (row[i] > best_v) {  // strict: ties keep the lowest index
                    best_v = row[i];
                    best = i;
                }
            out.at(c, j) = best_v;
            if (argmax) (*argmax)[c * l_out + j] = static_cast<uint32_t>(best);
        }
    }
    return out;
}

double forward(const NetworkParams& params, const Tensor& image, ForwardTrace* trace) {
    if (image.size() != params.input_width)
        throw NetError(NetErrorKind::ShapeMismatch,
                       "image width " + std::to_string(image.size()) +
                           " != network input width " + std::to_string(params.input_width));

    Tensor x({1, params.input_width});
    std::memcpy(x.data(), image.data(), image.size() * sizeof(double));

    ForwardTrace local;
    ForwardTrace& tr = trace ? *trace : local;
    tr.input = std::move(x);

    tr.conv1_out = conv1d_forward(tr.input, params.set.conv1_w, params.set.conv1_b);
    tr.pool1_out = maxpool1d_forward(tr.conv1_out, params.config.pool, &tr.pool1_argmax);
    tr.conv2_out = conv1d_forward(tr.pool1_out, params.set.conv2_w, params.set.conv2_b);
    tr.pool2_out = maxpool1d_forward(tr.conv2_out, params.config.pool, &tr.pool2_argmax);

    const size_t flat = tr.pool2_out.size();
    if (flat != params.set.dense1_w.dim(1))
        throw NetError(NetErrorKind::ShapeMismatch, "flattened width does not match dense1");

    const size_t hidden = params.config.hidden;
    tr.dense1_out = Tensor({hidden});
    matvec(params.set.dense1_w.data(), tr.pool2_out.data(), tr.dense1_out.data(), hidden, flat);
    for (size_t i = 0; i < hidden; ++i)
        tr.dense1_out[i] = sigmoid(tr.dense1_out[i] + params.set.dense1_b[i]);

    double z = params.set.dense2_b[0];
    for (size_t i = 0; i < hidden; ++i) z += params.set.dense2_w[i] * tr.dense1_out[i];
    tr.output = sigmoid(z);
    return tr.output;
}

double bce_loss(double prediction, double label) {
    double p = prediction;
    if (p < kBceEps) p = kBceEps;
    if (p > 1.0 - kBceEps) p = 1.0 - kBceEps;
    return -(label * std::log(p) + (1.0 - label) * std::log(1.0 - p));
}

void backward(const NetworkParams& params, const ForwardTrace& trace, double label,
              ParamSet& grads) {
    const double p = trace.output;
    // d(loss)/d(output logit). The clamp in bce_loss has zero derivative
    // outside [eps, 1-eps]; inside, sigmoid + BCE collapse to p - y.
    const double dz2 = (p <= kBceEps || p >= 1.0 - kBceEps) ? 0.0 : p - label;

    // dense2
    const size_t hidden = params.config.hidden;
    grads.dense2_b[0] += dz2;
    Tensor dd1({hidden});
    for (size_t i = 0; i < hidden; ++i) {
        grads.dense2_w[i] += dz2 * trace.dense1_out[i];
        dd1[i] = dz2 * params.set.dense2_w[i];
    }

    // dense1 (sigmoid)
    const size_t flat = trace.pool2_out.size();
    Tensor dflat({flat});
    for (size_t i = 0; i < hidden; ++i) {
        const double s = trace.dense1_out[i];
        const double dz1 = dd1[i] * s * (1.0 - s);
        grads.dense1_b[i] += dz1;
        double* wrow = grads.dense1_w.data() + i * flat;
        const double* feat = trace.pool2_out.data();
        for (size_t j = 0; j < flat; ++j) wrow[j] += dz1 * feat[j];
        const double* prow = params.set.dense1_w.data() + i * flat;
        for (size_t j = 0; j < flat; ++j) dflat[j] += dz1 * prow[j];
    }

    // pool2 routing + conv2 ReLU gate
    Tensor dconv2(trace.conv2_out.shape());
    {
        const size_t channels = trace.pool2_out.dim(0);
        const size_t l_out = trace.pool2_out.dim(1);
        const size_t conv_len = trace.conv2_out.dim(1);
        for (size_t c = 0; c < channels; ++c)
            for (size_t j = 0; j < l_out; ++j) {
                const size_t src = trace.pool2_argmax[c * l_out + j];
                if (trace.conv2_out[c * conv_len + src] > 0.0)
                    dconv2[c * conv_len + src] += dflat[c * l_out + j];
            }
    }

    Tensor dpool1(trace.pool1_out.shape());
    conv1d_backward(trace.pool1_out, params.set.conv2_w, dconv2, grads.conv2_w, grads.conv2_b,
                    &dpool1);

    // pool1 routing + conv1 ReLU gate
    Tensor dconv1(trace.conv1_out.shape());
    {
        const size_t channels = trace.pool1_out.dim(0);
        const size_t l_out = trace.pool1_out.dim(1);
        const size_t conv_len = trace.conv1_out.dim(1);
        for (size_t c = 0; c < channels; ++c)
            for (size_t j = 0; j < l_out; ++j) {
                const size_t src = trace.pool1_argmax[c * l_out + j];
                if (trace.conv1_out[c * conv_len + src] > 0.0)
                    dconv1[c * conv_len + src] += dpool1[c * l_out + j];
            }
    }

    conv1d_backward(trace.input, params.set.conv1_w, dconv1, grads.conv1_w, grads.conv1_b,
                    nullptr);

    if (!grads.all_finite())
        throw NetError(NetErrorKind::NonFiniteGradient, "non-finite gradient");
}

AdamState AdamState::for_params(const NetworkParams& params) {
    AdamState s;
    s.m = params.zeros_like();
    s.v = params.zeros_like();
    s.step = 0;
    return s;
}

void adam_step(NetworkParams& params, const ParamSet& grads, AdamState& state,
               const AdamConfig& config) {
    state.step += 1;
    const double t = static_cast<double>(state.step);
    const double bc1 = 1.0 - std::pow(config.beta1, t);
    const double bc2 = 1.0 - std::pow(config.beta2, t);

    auto ps = params.set.tensors();
    auto gs = grads.tensors();
    auto ms = state.m.tensors();
    auto vs = state.v.tensors();
    for (size_t i = 0; i < ps.size(); ++i) {
        Tensor& w = *ps[i];
        const Tensor& g = *gs[i];
        Tensor& m = *ms[i];
        Tensor& v = *vs[i];
        if (!w.same_shape(g))
            throw NetError(NetErrorKind::ShapeMismatch, "gradient shape mismatch in adam_step");
        for (size_t j = 0; j < w.size(); ++j) {
            m[j] = config.beta1 * m[j] + (1.0 - config.beta1) * g[j];
            v[j] = config.beta2 * v[j] + (1.0 - config.beta2) * g[j] * g[j];
            const double mhat = m[j] / bc1;
            const double vhat = v[j] / bc2;
            w[j] -= config.lr * mhat / (std::sqrt(vhat) + config.eps);
        }
    }
}

void save_checkpoint(const std::filesystem::path& path, const NetworkParams& params,
                     const AdamState* state) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write checkpoint " + path.string());
    out.write("DXRM", 4);
    write_u32(out, 1);  // format version
    write_u32(out, static_cast<uint32_t>(params.input_width));
    write_u64(out, params.rng_seed);
    for (const Tensor* t : params.set.tensors()) write_tensor(out, *t);
    out.put(state ? 1 : 0);
    if (state) {
        write_u64(out, state->step);
        for (const Tensor* t : state->m.tensors()) write_tensor(out, *t);
        for (const Tensor* t : state->v.tensors()) write_tensor(out, *t);
    }
    if (!out) throw std::runtime_error("write failed on checkpoint " + path.string());
}

NetworkParams load_checkpoint(const std::filesystem::path& path, AdamState* state_out) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read checkpoint " + path.string());
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "DXRM", 4) != 0)
        throw std::runtime_error("bad checkpoint magic in " + path.string());
    uint32_t version = read_u32(in);
    if (version != 1)
        throw std::runtime_error("unsupported checkpoint version " + std::to_string(version));
    NetworkParams params;
    params.input_width = read_u32(in);
    params.rng_seed = read_u64(in);
    for (Tensor* t : params.set.tensors()) *t = read_tensor(in);
    // The architecture is implied by the stored shapes; the pool size is
    // not, but every checkpointed network uses the production value.
    params.config.kernel = params.set.conv1_w.dim(2);
    params.config.conv1_filters = params.set.conv1_w.dim(0);
    params.config.conv2_filters = params.set.conv2_w.dim(0);
    params.config.hidden = params.set.dense1_w.dim(0);
    int has_state = in.get();
    if (has_state == 1 && state_out) {
        state_out->step = read_u64(in);
        for (Tensor* t : state_out->m.tensors()) *t = read_tensor(in);
        for (Tensor* t : state_out->v.tensors()) *t = read_tensor(in);
    }
    if (!in) throw std::runtime_error("truncated checkpoint " + path.string());
    return params;
}

}  // namespace dexpix
