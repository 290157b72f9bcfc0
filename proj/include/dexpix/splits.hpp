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
#include <stdexcept>
#include <string>
#include <vector>

#include "dexpix/manifest.hpp"

namespace dexpix {

enum class SplitMode { RandomHoldout, Temporal, Augmented };

enum class SplitErrorKind { TooFewSamples, EmptySide, MissingLinkage };

class SplitError : public std::runtime_error {
public:
    SplitError(SplitErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}
    SplitErrorKind kind() const { return kind_; }

private:
    SplitErrorKind kind_;
};

struct SplitPlan {
    std::vector<std::string> train_ids;
    std::vector<std::string> valid_ids;
    std::vector<std::string> test_ids;
    uint64_t seed = 0;
    SplitMode mode = SplitMode::RandomHoldout;
};

// Seeded shuffle + 80/10/10 cut, one plan per repetition.
std::vector<SplitPlan> make_holdout_splits(const Manifest& manifest, uint64_t seed,
                                           size_t repetitions = 10);

// Records dated before `cutoff_date` are shuffled into 80/20 train/valid;
// everything at or after the cutoff becomes the test set.
SplitPlan make_temporal_split(const Manifest& manifest, const std::string& cutoff_date,
                              uint64_t seed);

struct AugmentOptions {
    unsigned fraction_percent = 100;  // X in {25, 50, 75, 100}
    bool test_obfuscated = false;     // false: base test images; true: their variants
    bool train90_valid10 = false;     // 90/10 base split, test = all variants
    uint64_t seed = 0;
};

// Base population split as in plain hold-out, then the training and
// validation partitions gain X% of their obfuscated variants. A variant
// only ever follows its base's partition.
SplitPlan make_augmented_split(const Manifest& base, const Manifest& obf,
                               const AugmentOptions& options);

}  // namespace dexpix
