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

#include "dexpix/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>

namespace dexpix {

MetricsReport metrics_from_confusion(size_t tp, size_t fp, size_t tn, size_t fn,
                                     double threshold) {
    MetricsReport r;
    r.tp = tp;
    r.fp = fp;
    r.tn = tn;
    r.fn = fn;
    r.threshold = threshold;
    const size_t total = r.total();
    if (total > 0)
        r.accuracy = static_cast<double>(tp + tn) / static_cast<double>(total);
    if (tp + fp > 0)
        r.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    if (tp + fn > 0)
        r.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
    if (r.precision && r.recall && (*r.precision + *r.recall) > 0.0)
        r.f1 = 2.0 * *r.precision * *r.recall / (*r.precision + *r.recall);
    return r;
}

MetricsReport evaluate_scores(const std::vector<double>& scores, const std::vector<int>& labels,
                              double threshold) {
    if (scores.size() != labels.size())
        throw std::invalid_argument("scores and labels differ in length");
    size_t tp = 0, fp = 0, tn = 0, fn = 0;
    for (size_t i = 0; i < scores.size(); ++i) {
        const bool positive = scores[i] >= threshold;
        if (labels[i] == 1)
            positive ? ++tp : ++fn;
        else
            positive ? ++fp : ++tn;
    }
    return metrics_from_confusion(tp, fp, tn, fn, threshold);
}

std::string MetricsReport::to_line() const {
    auto fmt = [](const std::optional<double>& v) {
        if (!v) return std::string("undefined");
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.4f", *v);
        return std::string(buf);
    };
    return "tp=" + std::to_string(tp) + " fp=" + std::to_string(fp) + " tn=" +
           std::to_string(tn) + " fn=" + std::to_string(fn) + " accuracy=" + fmt(accuracy) +
           " precision=" + fmt(precision) + " recall=" + fmt(recall) + " f1=" + fmt(f1);
}

RocCurve roc_from_scores(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size())
        throw std::invalid_argument("scores and labels differ in length");
    const size_t pos = static_cast<size_t>(std::count(labels.begin(), labels.end(), 1));
    const size_t neg = labels.size() - pos;
    if (pos == 0 || neg == 0) throw OneClassOnly();

    std::vector<size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](size_t a, size_t b) { return scores[a] > scores[b]; });

    RocCurve curve;
    curve.points.emplace_back(0.0, 0.0);
    size_t tp = 0, fp = 0;
    size_t i = 0;
    while (i < order.size()) {
        // Consume a whole block of tied scores before emitting a point;
        // this makes the trapezoid handle ties as half-credit.
        const double s = scores[order[i]];
        while (i < order.size() && scores[order[i]] == s) {
            if (labels[order[i]] == 1)
                ++tp;
            else
                ++fp;
            ++i;
        }
        curve.points.emplace_back(static_cast<double>(fp) / static_cast<double>(neg),
                                  static_cast<double>(tp) / static_cast<double>(pos));
    }

    double auc = 0.0;
    for (size_t j = 1; j < curve.points.size(); ++j) {
        const auto& [x0, y0] = curve.points[j - 1];
        const auto& [x1, y1] = curve.points[j];
        auc += (x1 - x0) * (y0 + y1) * 0.5;
    }
    curve.auc = auc;
    return curve;
}

}  // namespace dexpix
