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
#include <string>
#include <unordered_map>
#include <vector>

#include "dexpix/manifest.hpp"
#include "dexpix/metrics.hpp"
#include "dexpix/network.hpp"
#include "dexpix/splits.hpp"
#include "dexpix/tensor.hpp"

namespace dexpix {

struct RunConfig {
    size_t input_width = 16384;  // 128*128
    size_t batch_size = 32;
    double lr = 1e-3;
    size_t max_epochs = 200;
    size_t patience = 50;
    uint64_t seed = 0;
    size_t repetitions = 10;
    double threshold = 0.5;
    // When <= 1.0, stop once training-set accuracy reaches this value
    // (evaluated after each epoch). Disabled by default.
    double stop_train_accuracy = 2.0;
};

// All images of a manifest, normalized to [0,1], resident in memory.
// Resized cache files (<cache>/w<width>/<id>.dxrf) are produced from the
// unresized vector images on demand, so one extract pass serves every
// ablation width.
class Dataset {
public:
    static Dataset load(const Manifest& manifest, size_t width);

    const Tensor& image(const std::string& id) const;
    double label(const std::string& id) const;
    size_t width() const { return width_; }
    size_t size() const { return images_.size(); }

private:
    size_t width_ = 0;
    std::unordered_map<std::string, size_t> index_;
    std::vector<Tensor> images_;
    std::vector<double> labels_;
};

struct EpochStats {
    size_t epoch = 0;
    double train_loss = 0.0;
    double valid_accuracy = 0.0;
    double train_accuracy = -1.0;  // only filled when stop_train_accuracy is active
};

struct TrainResult {
    NetworkParams params;  // best-validation weights
    std::vector<EpochStats> history;
    size_t best_epoch = 0;
    double best_valid_accuracy = 0.0;
};

class TrainError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

TrainResult train(const Dataset& data, const SplitPlan& plan, const RunConfig& config);

std::vector<double> score_ids(const NetworkParams& params, const Dataset& data,
                              const std::vector<std::string>& ids);

MetricsReport evaluate(const NetworkParams& params, const Dataset& data,
                       const std::vector<std::string>& ids, double threshold = 0.5);

RocCurve roc(const NetworkParams& params, const Dataset& data,
             const std::vector<std::string>& ids);

// One repetition of the hold-out protocol: train on the plan, report on
// its test ids.
struct RepetitionResult {
    TrainResult trained;
    MetricsReport test_metrics;
};

// The repeated hold-out protocol; one result per repetition.
std::vector<RepetitionResult> run_holdout_protocol(const Dataset& data, const Manifest& manifest,
                                                   const RunConfig& config);

struct MetricSummary {
    double mean = 0.0;
    double stddev = 0.0;
    size_t defined = 0;  // repetitions where the metric had a value
};

MetricSummary summarize_metric(const std::vector<RepetitionResult>& reps,
                               std::optional<double> MetricsReport::*metric);

struct AblationRow {
    size_t width = 0;
    MetricSummary accuracy, precision, recall, f1;
};

// Re-runs the hold-out protocol at each width; the per-width dataset is
// resized from the cached vector images.
std::vector<AblationRow> resize_ablation(const Manifest& manifest,
                                         const std::vector<size_t>& widths,
                                         const RunConfig& config);

}  // namespace dexpix
