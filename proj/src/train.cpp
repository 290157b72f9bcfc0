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

#include "dexpix/train.hpp"

#include <algorithm>
#include <cmath>

#include "dexpix/image.hpp"
#include "dexpix/rng.hpp"

namespace dexpix {

namespace {

// <cache>/w<width>/<id>.dxrf next to the unresized image.
std::filesystem::path resized_path(const SampleRecord& rec, size_t width) {
    std::filesystem::path base(rec.image_path);
    return base.parent_path() / ("w" + std::to_string(width)) / (rec.id + ".dxrf");
}

}  // namespace

Dataset Dataset::load(const Manifest& manifest, size_t width) {
    Dataset data;
    data.width_ = width;
    data.images_.reserve(manifest.records.size());
    data.labels_.reserve(manifest.records.size());
    for (const auto& rec : manifest.records) {
        auto path = resized_path(rec, width);
        ResizedImage resized;
        if (std::filesystem::exists(path)) {
            resized = read_resized_image(path);
            if (resized.width() != width)
                throw TrainError("cache file " + path.string() + " has width " +
                                 std::to_string(resized.width()) + ", expected " +
                                 std::to_string(width));
        } else {
            if (!std::filesystem::exists(rec.image_path))
                throw TrainError("missing cached image for id " + rec.id + ": " +
                                 rec.image_path);
            auto vec = read_vector_image(rec.image_path);
            resized = resize_vector(vec, width);
            std::filesystem::create_directories(path.parent_path());
            write_resized_image(path, resized);
        }
        data.index_.emplace(rec.id, data.images_.size());
        data.images_.push_back(normalize(resized));
        data.labels_.push_back(static_cast<double>(rec.label));
    }
    return data;
}

const Tensor& Dataset::image(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw TrainError("id not in dataset: " + id);
    return images_[it->second];
}

double Dataset::label(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw TrainError("id not in dataset: " + id);
    return labels_[it->second];
}

TrainResult train(const Dataset& data, const SplitPlan& plan, const RunConfig& config) {
    if (plan.train_ids.empty() || plan.valid_ids.empty())
        throw TrainError("training requires nonempty train and validation sets");

    NetworkParams params = init_params(plan.seed, config.input_width);
    AdamState state = AdamState::for_params(params);
    AdamConfig adam{.lr = config.lr};
    ParamSet grads = params.zeros_like();

    TrainResult result;
    result.params = params;
    double best_acc = -1.0;
    size_t epochs_without_improvement = 0;

    std::vector<std::string> order = plan.train_ids;
    Rng shuffle_rng(Rng::mix(plan.seed, 0x5bf));

    for (size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
        shuffle_rng.shuffle(order);
        double loss_sum = 0.0;
        size_t cursor = 0;
        while (cursor < order.size()) {
            const size_t batch_end = std::min(cursor + config.batch_size, order.size());
            const size_t batch_n = batch_end - cursor;
            for (Tensor* t : grads.tensors()) t->fill(0.0);
            for (size_t i = cursor; i < batch_end; ++i) {
                const std::string& id = order[i];
                ForwardTrace trace;
                const double p = forward(params, data.image(id), &trace);
                loss_sum += bce_loss(p, data.label(id));
                try {
                    backward(params, trace, data.label(id), grads);
                } catch (const NetError& e) {
                    if (e.kind() == NetErrorKind::NonFiniteGradient)
                        throw TrainError("non-finite gradient at epoch " +
                                         std::to_string(epoch));
                    throw;
                }
            }
            // Mean gradient over the minibatch.
            const double inv = 1.0 / static_cast<double>(batch_n);
            for (Tensor* t : grads.tensors())
                for (size_t j = 0; j < t->size(); ++j) (*t)[j] *= inv;
            adam_step(params, grads, state, adam);
            cursor = batch_end;
        }

        EpochStats stats;
        stats.epoch = epoch;
        stats.train_loss = loss_sum / static_cast<double>(order.size());

        size_t correct = 0;
        for (const auto& id : plan.valid_ids) {
            const double p = forward(params, data.image(id));
            const int pred = p >= config.threshold ? 1 : 0;
            if (pred == static_cast<int>(data.label(id))) ++correct;
        }
        stats.valid_accuracy =
            static_cast<double>(correct) / static_cast<double>(plan.valid_ids.size());

        if (config.stop_train_accuracy <= 1.0) {
            size_t train_correct = 0;
            for (const auto& id : plan.train_ids) {
                const double p = forward(params, data.image(id));
                const int pred = p >= config.threshold ? 1 : 0;
                if (pred == static_cast<int>(data.label(id))) ++train_correct;
            }
            stats.train_accuracy =
                static_cast<double>(train_correct) / static_cast<double>(plan.train_ids.size());
        }

        result.history.push_back(stats);

        // Strict improvement resets the patience counter; ties do not.
        if (stats.valid_accuracy > best_acc) {
            best_acc = stats.valid_accuracy;
            result.params = params;
            result.best_epoch = epoch;
            epochs_without_improvement = 0;
        } else {
            ++epochs_without_improvement;
        }
        if (epochs_without_improvement >= config.patience) break;
        if (config.stop_train_accuracy <= 1.0 &&
            stats.train_accuracy >= config.stop_train_accuracy)
            break;
    }
    result.best_valid_accuracy = best_acc;
    return result;
}

std::vector<double> score_ids(const NetworkParams& params, const Dataset& data,
                              const std::vector<std::string>& ids) {
    std::vector<double> scores;
    scores.reserve(ids.size());
    for (const auto& id : ids) scores.push_back(forward(params, data.image(id)));
    return scores;
}

MetricsReport evaluate(const NetworkParams& params, const Dataset& data,
                       const std::vector<std::string>& ids, double threshold) {
    if (ids.empty()) throw TrainError("evaluate requires a nonempty id list");
    auto scores = score_ids(params, data, ids);
    std::vector<int> labels;
    labels.reserve(ids.size());
    for (const auto& id : ids) labels.push_back(static_cast<int>(data.label(id)));
    return evaluate_scores(scores, labels, threshold);
}

RocCurve roc(const NetworkParams& params, const Dataset& data,
             const std::vector<std::string>& ids) {
    auto scores = score_ids(params, data, ids);
    std::vector<int> labels;
    labels.reserve(ids.size());
    for (const auto& id : ids) labels.push_back(static_cast<int>(data.label(id)));
    return roc_from_scores(scores, labels);
}

std::vector<RepetitionResult> run_holdout_protocol(const Dataset& data, const Manifest& manifest,
                                                   const RunConfig& config) {
    auto plans = make_holdout_splits(manifest, config.seed, config.repetitions);
    std::vector<RepetitionResult> results;
    results.reserve(plans.size());
    for (const auto& plan : plans) {
        RepetitionResult rep;
        rep.trained = train(data, plan, config);
        rep.test_metrics = evaluate(rep.trained.params, data, plan.test_ids, config.threshold);
        results.push_back(std::move(rep));
    }
    return results;
}

MetricSummary summarize_metric(const std::vector<RepetitionResult>& reps,
                               std::optional<double> MetricsReport::*metric) {
    MetricSummary s;
    double sum = 0.0;
    for (const auto& rep : reps) {
        const auto& v = rep.test_metrics.*metric;
        if (!v) continue;
        sum += *v;
        ++s.defined;
    }
    if (s.defined == 0) return s;
    s.mean = sum / static_cast<double>(s.defined);
    double sq = 0.0;
    for (const auto& rep : reps) {
        const auto& v = rep.test_metrics.*metric;
        if (!v) continue;
        sq += (*v - s.mean) * (*v - s.mean);
    }
    s.stddev = std::sqrt(sq / static_cast<double>(s.defined));
    return s;
}

std::vector<AblationRow> resize_ablation(const Manifest& manifest,
                                         const std::vector<size_t>& widths,
                                         const RunConfig& config) {
    std::vector<AblationRow> rows;
    for (size_t width : widths) {
        RunConfig cfg = config;
        cfg.input_width = width;
        Dataset data = Dataset::load(manifest, width);
        auto reps = run_holdout_protocol(data, manifest, cfg);
        AblationRow row;
        row.width = width;
        row.accuracy = summarize_metric(reps, &MetricsReport::accuracy);
        row.precision = summarize_metric(reps, &MetricsReport::precision);
        row.recall = summarize_metric(reps, &MetricsReport::recall);
        row.f1 = summarize_metric(reps, &MetricsReport::f1);
        rows.push_back(row);
    }
    return rows;
}

}  // namespace dexpix
