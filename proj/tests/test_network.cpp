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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "dexpix/network.hpp"
#include "dexpix/rng.hpp"
#include "gradcheck.hpp"
#include "zip_builder.hpp"

using namespace dexpix;
using namespace dexpix::testfix;

namespace {

// Small configuration for exhaustive finite-difference checks.
NetConfig tiny_config() {
    NetConfig c;
    c.kernel = 4;
    c.pool = 3;
    c.conv1_filters = 2;
    c.conv2_filters = 3;
    c.hidden = 3;
    return c;
}

Tensor random_image(size_t width, uint64_t seed) {
    Tensor t({width});
    Rng rng(seed);
    for (size_t i = 0; i < width; ++i) t[i] = rng.next_double();
    return t;
}

// Direct triple-loop cross-correlation, the oracle for the gemm path.
Tensor conv_oracle(const Tensor& input, const Tensor& weights, const Tensor& bias) {
    const size_t out_ch = weights.dim(0);
    const size_t in_ch = weights.dim(1);
    const size_t kernel = weights.dim(2);
    const size_t l_out = input.dim(1) - kernel + 1;
    Tensor out({out_ch, l_out});
    for (size_t o = 0; o < out_ch; ++o)
        for (size_t t = 0; t < l_out; ++t) {
            double acc = bias[o];
            for (size_t c = 0; c < in_ch; ++c)
                for (size_t k = 0; k < kernel; ++k)
                    acc += weights[(o * in_ch + c) * kernel + k] * input.at(c, t + k);
            out.at(o, t) = acc > 0.0 ? acc : 0.0;
        }
    return out;
}

}  // namespace

TEST_CASE("conv1d zero input stays zero") {
    Tensor input({1, 40});
    Tensor weights({3, 1, 12});
    Rng rng(1);
    for (size_t i = 0; i < weights.size(); ++i) weights[i] = rng.uniform(-1, 1);
    Tensor bias({3});
    auto out = conv1d_forward(input, weights, bias);
    REQUIRE(out.shape() == std::vector<size_t>{3, 29});
    for (size_t i = 0; i < out.size(); ++i) REQUIRE(out[i] == 0.0);
}

TEST_CASE("conv1d delta kernel shifts and crops a ramp") {
    Tensor input({1, 100});
    for (size_t i = 0; i < 100; ++i) input[i] = static_cast<double>(i);
    Tensor weights({1, 1, 12});
    weights[0] = 1.0;  // delta at tap 0
    Tensor bias({1});
    auto out = conv1d_forward(input, weights, bias);
    REQUIRE(out.dim(1) == 89);
    for (size_t t = 0; t < 89; ++t) REQUIRE(out[t] == static_cast<double>(t));
}

TEST_CASE("conv1d matches the triple-loop oracle") {
    Rng rng(17);
    Tensor input({1, 40});
    for (size_t i = 0; i < input.size(); ++i) input[i] = rng.uniform(-2, 2);
    Tensor weights({3, 1, 12});
    for (size_t i = 0; i < weights.size(); ++i) weights[i] = rng.uniform(-1, 1);
    Tensor bias({3});
    for (size_t i = 0; i < 3; ++i) bias[i] = rng.uniform(-1, 1);
    auto fast = conv1d_forward(input, weights, bias);
    auto slow = conv_oracle(input, weights, bias);
    REQUIRE(fast.shape() == slow.shape());
    for (size_t i = 0; i < fast.size(); ++i)
        REQUIRE(fast[i] == doctest::Approx(slow[i]).epsilon(1e-12));
}

TEST_CASE("conv1d multi-channel matches the oracle") {
    Rng rng(18);
    Tensor input({5, 60});
    for (size_t i = 0; i < input.size(); ++i) input[i] = rng.uniform(-1, 1);
    Tensor weights({4, 5, 12});
    for (size_t i = 0; i < weights.size(); ++i) weights[i] = rng.uniform(-1, 1);
    Tensor bias({4});
    for (size_t i = 0; i < 4; ++i) bias[i] = rng.uniform(-1, 1);
    auto fast = conv1d_forward(input, weights, bias);
    auto slow = conv_oracle(input, weights, bias);
    for (size_t i = 0; i < fast.size(); ++i)
        REQUIRE(fast[i] == doctest::Approx(slow[i]).epsilon(1e-12));
}

TEST_CASE("conv1d rejects inputs shorter than the kernel") {
    Tensor input({1, 11});
    Tensor weights({1, 1, 12});
    Tensor bias({1});
    try {
        conv1d_forward(input, weights, bias);
        FAIL("expected InputTooShort");
    } catch (const NetError& e) {
        CHECK(e.kind() == NetErrorKind::InputTooShort);
    }
}

TEST_CASE("maxpool blocks of 12") {
    Tensor input({1, 24});
    for (size_t i = 0; i < 24; ++i) input[i] = static_cast<double>(i);
    auto out = maxpool1d_forward(input);
    REQUIRE(out.shape() == std::vector<size_t>{1, 2});
    CHECK(out[0] == 11.0);
    CHECK(out[1] == 23.0);
}

TEST_CASE("maxpool constant input and remainder dropping") {
    Tensor c({2, 30});
    c.fill(4.5);
    auto out = maxpool1d_forward(c);
    REQUIRE(out.shape() == std::vector<size_t>{2, 2});
    for (size_t i = 0; i < out.size(); ++i) REQUIRE(out[i] == 4.5);

    Tensor input({1, 30});
    Rng rng(2);
    for (size_t i = 0; i < 30; ++i) input[i] = rng.uniform(-5, 5);
    input[27] = 100.0;  // in the dropped remainder
    auto pooled = maxpool1d_forward(input);
    REQUIRE(pooled.dim(1) == 2);
    for (size_t j = 0; j < 2; ++j) {
        double expected = -1e300;
        for (size_t i = j * 12; i < j * 12 + 12; ++i) expected = std::max(expected, input[i]);
        REQUIRE(pooled[j] == expected);
    }
}

TEST_CASE("maxpool emits one partial window for inputs shorter than the pool") {
    Tensor input({1, 5});
    for (size_t i = 0; i < 5; ++i) input[i] = static_cast<double>(i);
    auto out = maxpool1d_forward(input);
    REQUIRE(out.shape() == std::vector<size_t>{1, 1});
    CHECK(out[0] == 4.0);
}

TEST_CASE("shape trace at width 16384") {
    auto t = shape_trace(16384);
    CHECK(t.conv1_len == 16373);
    CHECK(t.pool1_len == 1364);
    CHECK(t.conv2_len == 1353);
    CHECK(t.pool2_len == 112);
    CHECK(t.flat == 14336);
}

TEST_CASE("forward with zero weights outputs 0.5") {
    NetConfig config = tiny_config();
    NetworkParams params = init_params(3, 60, config);
    for (Tensor* t : params.set.tensors()) t->fill(0.0);
    auto image = random_image(60, 4);
    CHECK(forward(params, image) == 0.5);
}

TEST_CASE("forward is deterministic and in (0,1)") {
    NetworkParams params = init_params(11, 300, tiny_config());
    auto image = random_image(300, 12);
    const double a = forward(params, image);
    const double b = forward(params, image);
    CHECK(a == b);
    CHECK(a > 0.0);
    CHECK(a < 1.0);
}

TEST_CASE("forward rejects a mismatched image width") {
    NetworkParams params = init_params(1, 300, tiny_config());
    try {
        forward(params, random_image(200, 1));
        FAIL("expected ShapeMismatch");
    } catch (const NetError& e) {
        CHECK(e.kind() == NetErrorKind::ShapeMismatch);
    }
}

TEST_CASE("bce_loss reference values") {
    CHECK(bce_loss(0.5, 1.0) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK(bce_loss(1.0 - 1e-7, 1.0) == doctest::Approx(1e-7).epsilon(1e-3));
    CHECK(bce_loss(1.0, 1.0) == doctest::Approx(1e-7).epsilon(1e-3));  // clamped
    Rng rng(5);
    for (int i = 0; i < 200; ++i) {
        const double p = rng.next_double();
        const double y = rng.next_double() < 0.5 ? 0.0 : 1.0;
        const double pc = std::min(std::max(p, 1e-7), 1.0 - 1e-7);
        const double expected = -(y * std::log(pc) + (1.0 - y) * std::log(1.0 - pc));
        REQUIRE(bce_loss(p, y) == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("backward: zero network touches only the output layer") {
    NetworkParams params = init_params(3, 60, tiny_config());
    for (Tensor* t : params.set.tensors()) t->fill(0.0);
    Tensor image({60});
    ForwardTrace trace;
    forward(params, image, &trace);
    ParamSet grads = params.zeros_like();
    backward(params, trace, 1.0, grads);
    // p = 0.5, so dz = p - y = -0.5; the hidden sigmoids sit at 0.5.
    CHECK(grads.dense2_b[0] == doctest::Approx(-0.5).epsilon(1e-12));
    for (size_t j = 0; j < grads.dense2_w.size(); ++j)
        REQUIRE(grads.dense2_w[j] == doctest::Approx(-0.25).epsilon(1e-12));
    // Everything upstream is blocked by the zero output weights.
    auto ts = grads.tensors();
    for (size_t i = 0; i + 2 < ts.size(); ++i)
        for (size_t j = 0; j < ts[i]->size(); ++j) REQUIRE((*ts[i])[j] == 0.0);
}

TEST_CASE("backward matches central finite differences on every tiny-net parameter") {
    NetworkParams params = init_params(123, 30, tiny_config());
    auto image = random_image(30, 124);
    const double label = 1.0;

    ForwardTrace trace;
    forward(params, image, &trace);
    ParamSet grads = params.zeros_like();
    backward(params, trace, label, grads);

    auto gs = grads.tensors();
    for (size_t ti = 0; ti < gs.size(); ++ti)
        for (size_t j = 0; j < gs[ti]->size(); ++j) {
            const double fd = fd_gradient(params, ti, j, image, label);
            const double analytic = (*gs[ti])[j];
            REQUIRE(rel_error(analytic, fd) < 1e-6);
        }
}

TEST_CASE("backward finite differences with label 0 and another seed") {
    NetworkParams params = init_params(77, 45, tiny_config());
    auto image = random_image(45, 78);
    ForwardTrace trace;
    forward(params, image, &trace);
    ParamSet grads = params.zeros_like();
    backward(params, trace, 0.0, grads);
    auto gs = grads.tensors();
    for (size_t ti = 0; ti < gs.size(); ++ti)
        for (size_t j = 0; j < gs[ti]->size(); ++j)
            REQUIRE(rel_error((*gs[ti])[j], fd_gradient(params, ti, j, image, 0.0)) < 1e-6);
}

TEST_CASE("pool backward conserves gradient mass") {
    // Sum of gradients into the pooled tensor equals the sum leaving it.
    // Checked through the dense1 path with ReLU gates forced open by
    // positive conv biases.
    NetConfig config = tiny_config();
    NetworkParams params = init_params(9, 60, config);
    for (size_t i = 0; i < params.set.conv1_b.size(); ++i) params.set.conv1_b[i] = 2.0;
    for (size_t i = 0; i < params.set.conv2_b.size(); ++i) params.set.conv2_b[i] = 2.0;
    auto image = random_image(60, 10);
    ForwardTrace trace;
    forward(params, image, &trace);

    // All conv2 activations must be positive so pooling is the only
    // routing in play.
    for (size_t i = 0; i < trace.conv2_out.size(); ++i) REQUIRE(trace.conv2_out[i] > 0.0);

    ParamSet grads = params.zeros_like();
    backward(params, trace, 1.0, grads);
    // conv2 bias gradient is the column sum of the gradient entering
    // conv2's output; pool routing must preserve the per-channel total
    // that left dense1. Reconstruct the dense1-side total per channel.
    const size_t hidden = config.hidden;
    const size_t flat = trace.pool2_out.size();
    const double p = trace.output;
    const double dz2 = p - 1.0;
    std::vector<double> dflat(flat, 0.0);
    for (size_t i = 0; i < hidden; ++i) {
        const double s = trace.dense1_out[i];
        const double dz1 = dz2 * params.set.dense2_w[i] * s * (1.0 - s);
        for (size_t j = 0; j < flat; ++j) dflat[j] += dz1 * params.set.dense1_w[i * flat + j];
    }
    const size_t p2 = trace.pool2_out.dim(1);
    for (size_t c = 0; c < config.conv2_filters; ++c) {
        double leaving = 0.0;
        for (size_t j = 0; j < p2; ++j) leaving += dflat[c * p2 + j];
        REQUIRE(grads.conv2_b[c] == doctest::Approx(leaving).epsilon(1e-9));
    }
}

TEST_CASE("adam: zero gradients leave parameters unchanged") {
    NetworkParams params = init_params(1, 60, tiny_config());
    NetworkParams before = params;
    AdamState state = AdamState::for_params(params);
    ParamSet grads = params.zeros_like();
    adam_step(params, grads, state);
    auto a = params.set.tensors();
    auto b = before.set.tensors();
    for (size_t i = 0; i < a.size(); ++i)
        for (size_t j = 0; j < a[i]->size(); ++j) REQUIRE((*a[i])[j] == (*b[i])[j]);
}

TEST_CASE("adam: first step moves by ~lr in the gradient's sign") {
    NetworkParams params = init_params(2, 60, tiny_config());
    NetworkParams before = params;
    AdamState state = AdamState::for_params(params);
    ParamSet grads = params.zeros_like();
    Rng rng(3);
    for (Tensor* t : grads.tensors())
        for (size_t j = 0; j < t->size(); ++j) (*t)[j] = rng.uniform(-1, 1);
    adam_step(params, grads, state, {.lr = 1e-3});
    auto a = params.set.tensors();
    auto b = before.set.tensors();
    auto g = grads.tensors();
    for (size_t i = 0; i < a.size(); ++i)
        for (size_t j = 0; j < a[i]->size(); ++j) {
            const double step = (*b[i])[j] - (*a[i])[j];
            if (std::fabs((*g[i])[j]) > 1e-3)
                REQUIRE(step == doctest::Approx(1e-3 * (((*g[i])[j] > 0) ? 1.0 : -1.0))
                                    .epsilon(1e-2));
        }
}

TEST_CASE("adam drives a scalar quadratic toward zero") {
    // f(w) = w^2 from w = 5 via the same update rule, through a 1-element
    // tensor set shim.
    double w = 5.0;
    double m = 0.0, v = 0.0;
    const double lr = 0.1, b1 = 0.9, b2 = 0.999, eps = 1e-8;
    for (int t = 1; t <= 100; ++t) {
        const double g = 2.0 * w;
        m = b1 * m + (1 - b1) * g;
        v = b2 * v + (1 - b2) * g * g;
        w -= lr * (m / (1 - std::pow(b1, t))) / (std::sqrt(v / (1 - std::pow(b2, t))) + eps);
    }
    CHECK(std::fabs(w) < 0.5);
}

TEST_CASE("init_params is deterministic and seed-sensitive") {
    auto a = init_params(42, 16384);
    auto b = init_params(42, 16384);
    auto c = init_params(43, 16384);
    auto at = a.set.tensors();
    auto bt = b.set.tensors();
    auto ct = c.set.tensors();
    bool any_diff = false;
    for (size_t i = 0; i < at.size(); ++i)
        for (size_t j = 0; j < at[i]->size(); ++j) {
            REQUIRE((*at[i])[j] == (*bt[i])[j]);
            if ((*at[i])[j] != (*ct[i])[j]) any_diff = true;
        }
    CHECK(any_diff);
}

TEST_CASE("init_params respects the Glorot bound for conv1") {
    auto params = init_params(7, 16384);
    const double limit = std::sqrt(6.0 / (1.0 * 12 + 64.0 * 12));
    for (size_t i = 0; i < params.set.conv1_w.size(); ++i) {
        REQUIRE(params.set.conv1_w[i] <= limit);
        REQUIRE(params.set.conv1_w[i] >= -limit);
    }
    for (size_t i = 0; i < params.set.conv1_b.size(); ++i)
        REQUIRE(params.set.conv1_b[i] == 0.0);
}

TEST_CASE("init_params rejects widths too narrow for the chain") {
    CHECK_THROWS_AS(init_params(1, 100), NetError);   // conv2 cannot fit
    CHECK_NOTHROW(init_params(1, 155));               // minimal two-unit width
}

TEST_CASE("checkpoint round-trips parameters and optimizer state") {
    auto dir = testfix::temp_dir("ckpt");
    NetworkParams params = init_params(5, 300, tiny_config());
    AdamState state = AdamState::for_params(params);
    ParamSet grads = params.zeros_like();
    grads.conv1_w[0] = 1.0;
    adam_step(params, grads, state);

    save_checkpoint(dir / "model.dxrm", params, &state);
    AdamState restored_state;
    auto restored = load_checkpoint(dir / "model.dxrm", &restored_state);
    CHECK(restored.input_width == 300);
    CHECK(restored.rng_seed == 5);
    CHECK(restored.config.conv1_filters == 2);
    auto a = params.set.tensors();
    auto b = restored.set.tensors();
    for (size_t i = 0; i < a.size(); ++i)
        for (size_t j = 0; j < a[i]->size(); ++j) REQUIRE((*a[i])[j] == (*b[i])[j]);
    CHECK(restored_state.step == 1);
    CHECK(restored_state.m.conv1_w[0] == doctest::Approx(0.1).epsilon(1e-12));

    // Checkpoint header layout is pinned.
    std::ifstream in(dir / "model.dxrm", std::ios::binary);
    char head[4];
    in.read(head, 4);
    CHECK(std::string(head, 4) == "DXRM");
}
