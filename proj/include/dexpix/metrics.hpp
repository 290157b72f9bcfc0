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

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace dexpix {

class OneClassOnly : public std::runtime_error {
public:
    OneClassOnly() : std::runtime_error("ROC needs both classes present") {}
};

// Confusion counts plus the four derived measures. A metric whose
// denominator is zero stays unset rather than being silently zeroed.
struct MetricsReport {
    size_t tp = 0, fp = 0, tn = 0, fn = 0;
    double threshold = 0.5;
    std::optional<double> accuracy, precision, recall, f1;

    size_t total() const { return tp + fp + tn + fn; }
    std::string to_line() const;
};

MetricsReport metrics_from_confusion(size_t tp, size_t fp, size_t tn, size_t fn,
                                     double threshold = 0.5);

// Thresholds scores at `threshold` (score >= threshold predicts positive).
MetricsReport evaluate_scores(const std::vector<double>& scores, const std::vector<int>& labels,
                              double threshold = 0.5);

struct RocCurve {
    // (fpr, tpr) by descending threshold, from (0,0) to (1,1).
    std::vector<std::pair<double, double>> points;
    double auc = 0.0;
};

RocCurve roc_from_scores(const std::vector<double>& scores, const std::vector<int>& labels);

}  // namespace dexpix
