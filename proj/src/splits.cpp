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

#include "dexpix/splits.hpp"

#include <algorithm>
#include <unordered_map>
#include <unordered_set>

#include "dexpix/rng.hpp"

namespace dexpix {

namespace {

std::vector<std::string> all_ids(const Manifest& manifest) {
    std::vector<std::string> ids;
    ids.reserve(manifest.records.size());
    for (const auto& rec : manifest.records) ids.push_back(rec.id);
    return ids;
}

// X% of the bases in `partition` (seeded choice) contribute their
// obfuscated variants.
void append_variants(
    const std::vector<std::string>& partition, unsigned fraction_percent, Rng& rng,
    const std::unordered_map<std::string, std::vector<std::string>>& variants,
    std::vector<std::string>& out) {
    std::vector<std::string> eligible;
    for (const auto& id : partition)
        if (variants.count(id)) eligible.push_back(id);
    rng.shuffle(eligible);
    const size_t take = eligible.size() * fraction_percent / 100;
    for (size_t i = 0; i < take; ++i)
        for (const auto& vid : variants.at(eligible[i])) out.push_back(vid);
}

}  // namespace

std::vector<SplitPlan> make_holdout_splits(const Manifest& manifest, uint64_t seed,
                                           size_t repetitions) {
    const size_t n = manifest.records.size();
    if (n < 10)
        throw SplitError(SplitErrorKind::TooFewSamples,
                         "hold-out needs at least 10 records, got " + std::to_string(n));
    std::vector<SplitPlan> plans;
    plans.reserve(repetitions);
    for (size_t rep = 0; rep < repetitions; ++rep) {
        SplitPlan plan;
        plan.mode = SplitMode::RandomHoldout;
        plan.seed = Rng::mix(seed, rep);
        auto ids = all_ids(manifest);
        Rng rng(plan.seed);
        rng.shuffle(ids);
        const size_t n_train = n * 8 / 10;
        const size_t n_valid = (n - n_train) / 2;
        plan.train_ids.assign(ids.begin(), ids.begin() + static_cast<long>(n_train));
        plan.valid_ids.assign(ids.begin() + static_cast<long>(n_train),
                              ids.begin() + static_cast<long>(n_train + n_valid));
        plan.test_ids.assign(ids.begin() + static_cast<long>(n_train + n_valid), ids.end());
        plans.push_back(std::move(plan));
    }
    return plans;
}

SplitPlan make_temporal_split(const Manifest& manifest, const std::string& cutoff_date,
                              uint64_t seed) {
    std::vector<std::string> pre, post;
    for (const auto& rec : manifest.records)
        (rec.dex_date < cutoff_date ? pre : post).push_back(rec.id);
    if (pre.empty() || post.empty())
        throw SplitError(SplitErrorKind::EmptySide,
                         "temporal split needs records on both sides of " + cutoff_date);

    SplitPlan plan;
    plan.mode = SplitMode::Temporal;
    plan.seed = seed;
    Rng rng(Rng::mix(seed, 0x7e3));
    rng.shuffle(pre);
    const size_t n_train = pre.size() * 8 / 10;
    plan.train_ids.assign(pre.begin(), pre.begin() + static_cast<long>(n_train));
    plan.valid_ids.assign(pre.begin() + static_cast<long>(n_train), pre.end());
    plan.test_ids = std::move(post);
    return plan;
}

SplitPlan make_augmented_split(const Manifest& base, const Manifest& obf,
                               const AugmentOptions& options) {
    auto variants = obf.variant_index();
    std::unordered_set<std::string> base_ids;
    for (const auto& rec : base.records) base_ids.insert(rec.id);
    for (const auto& rec : obf.records) {
        if (!rec.obfuscated_of || !base_ids.count(*rec.obfuscated_of))
            throw SplitError(SplitErrorKind::MissingLinkage,
                             "obfuscated record " + rec.id + " lacks a base in the manifest");
    }

    SplitPlan plan;
    plan.mode = SplitMode::Augmented;
    plan.seed = options.seed;
    auto ids = all_ids(base);
    Rng rng(Rng::mix(options.seed, 0xa06));
    rng.shuffle(ids);
    const size_t n = ids.size();

    std::vector<std::string> base_test;
    if (options.train90_valid10) {
        const size_t n_train = n * 9 / 10;
        plan.train_ids.assign(ids.begin(), ids.begin() + static_cast<long>(n_train));
        plan.valid_ids.assign(ids.begin() + static_cast<long>(n_train), ids.end());
    } else {
        const size_t n_train = n * 8 / 10;
        const size_t n_valid = (n - n_train) / 2;
        plan.train_ids.assign(ids.begin(), ids.begin() + static_cast<long>(n_train));
        plan.valid_ids.assign(ids.begin() + static_cast<long>(n_train),
                              ids.begin() + static_cast<long>(n_train + n_valid));
        base_test.assign(ids.begin() + static_cast<long>(n_train + n_valid), ids.end());
    }

    append_variants(plan.train_ids, options.fraction_percent, rng, variants, plan.train_ids);
    append_variants(plan.valid_ids, options.fraction_percent, rng, variants, plan.valid_ids);

    if (options.train90_valid10) {
        // Test1 style: every obfuscated app is a test sample.
        for (const auto& rec : obf.records) plan.test_ids.push_back(rec.id);
    } else if (options.test_obfuscated) {
        // Test2 style: variants of held-out bases only.
        for (const auto& id : base_test) {
            auto it = variants.find(id);
            if (it == variants.end()) continue;
            for (const auto& vid : it->second) plan.test_ids.push_back(vid);
        }
        if (plan.test_ids.empty())
            throw SplitError(SplitErrorKind::MissingLinkage,
                             "no obfuscated variants exist for any held-out base");
    } else {
        plan.test_ids = std::move(base_test);
    }
    return plan;
}

}  // namespace dexpix
