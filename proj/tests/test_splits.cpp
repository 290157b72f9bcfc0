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

#include <algorithm>
#include <set>

#include "dexpix/rng.hpp"
#include "dexpix/splits.hpp"

using namespace dexpix;

namespace {

Manifest fake_manifest(size_t n, const std::string& prefix = "app") {
    Manifest m;
    for (size_t i = 0; i < n; ++i) {
        SampleRecord rec;
        rec.id = prefix + std::to_string(i);
        rec.image_path = "cache/" + rec.id + ".dxr";
        rec.label = static_cast<int>(i % 2);
        rec.dex_date = i % 2 ? "2019-06-01" : "2017-03-15";
        m.records.push_back(std::move(rec));
    }
    return m;
}

// Obfuscated companions for the first `n_variants` bases, `per_base` each.
Manifest fake_obfuscated(const Manifest& base, size_t n_variants, size_t per_base = 1) {
    Manifest m;
    for (size_t i = 0; i < n_variants && i < base.records.size(); ++i) {
        for (size_t v = 0; v < per_base; ++v) {
            SampleRecord rec = base.records[i];
            rec.id = base.records[i].id + "-obf" + std::to_string(v);
            rec.obfuscated_of = base.records[i].id;
            m.records.push_back(std::move(rec));
        }
    }
    return m;
}

void check_partition(const SplitPlan& plan, size_t expected_total) {
    std::set<std::string> seen;
    for (const auto* part : {&plan.train_ids, &plan.valid_ids, &plan.test_ids})
        for (const auto& id : *part) {
            REQUIRE(seen.insert(id).second);
        }
    REQUIRE(seen.size() == expected_total);
}

}  // namespace

TEST_CASE("hold-out 100 records cut 80/10/10") {
    auto m = fake_manifest(100);
    auto plans = make_holdout_splits(m, 7, 10);
    REQUIRE(plans.size() == 10);
    for (const auto& plan : plans) {
        CHECK(plan.train_ids.size() == 80);
        CHECK(plan.valid_ids.size() == 10);
        CHECK(plan.test_ids.size() == 10);
        check_partition(plan, 100);
    }
}

TEST_CASE("hold-out repetitions differ but the seed pins them") {
    auto m = fake_manifest(50);
    auto a = make_holdout_splits(m, 99, 10);
    auto b = make_holdout_splits(m, 99, 10);
    for (size_t i = 0; i < 10; ++i) {
        CHECK(a[i].train_ids == b[i].train_ids);
        CHECK(a[i].valid_ids == b[i].valid_ids);
        CHECK(a[i].test_ids == b[i].test_ids);
    }
    CHECK(a[0].test_ids != a[1].test_ids);
}

TEST_CASE("hold-out property: disjoint cover at awkward sizes") {
    Rng rng(4242);
    for (int iter = 0; iter < 20; ++iter) {
        const size_t n = 10 + rng.bounded(190);
        auto m = fake_manifest(n);
        auto plans = make_holdout_splits(m, rng.next_u64(), 3);
        for (const auto& plan : plans) {
            check_partition(plan, n);
            CHECK(plan.train_ids.size() == n * 8 / 10);
            CHECK_FALSE(plan.valid_ids.empty());
            CHECK_FALSE(plan.test_ids.empty());
        }
    }
}

TEST_CASE("hold-out rejects tiny corpora") {
    auto m = fake_manifest(9);
    CHECK_THROWS_AS(make_holdout_splits(m, 1, 10), SplitError);
    try {
        make_holdout_splits(m, 1, 10);
    } catch (const SplitError& e) {
        CHECK(e.kind() == SplitErrorKind::TooFewSamples);
    }
}

TEST_CASE("temporal split: 100 old + 20 new gives 80/20/20") {
    Manifest m;
    for (size_t i = 0; i < 120; ++i) {
        SampleRecord rec;
        rec.id = "t" + std::to_string(i);
        rec.label = static_cast<int>(i % 2);
        rec.dex_date = i < 100 ? "2016-05-0" + std::to_string(1 + i % 9) : "2020-01-15";
        m.records.push_back(std::move(rec));
    }
    auto plan = make_temporal_split(m, "2018-01-01", 3);
    CHECK(plan.train_ids.size() == 80);
    CHECK(plan.valid_ids.size() == 20);
    CHECK(plan.test_ids.size() == 20);
    check_partition(plan, 120);
}

TEST_CASE("temporal split: every test date follows every train and valid date") {
    Rng rng(808);
    const char* dates[] = {"2015-02-01", "2016-07-09", "2017-11-30", "2019-04-04", "2021-08-22"};
    for (int iter = 0; iter < 20; ++iter) {
        Manifest m;
        const size_t n = 20 + rng.bounded(100);
        for (size_t i = 0; i < n; ++i) {
            SampleRecord rec;
            rec.id = "d" + std::to_string(i);
            rec.dex_date = dates[rng.bounded(5)];
            m.records.push_back(std::move(rec));
        }
        SplitPlan plan;
        try {
            plan = make_temporal_split(m, "2018-01-01", rng.next_u64());
        } catch (const SplitError&) {
            continue;  // all records fell on one side, legitimately rejected
        }
        std::string max_pre = "0000-00-00", min_post = "9999-99-99";
        for (const auto* part : {&plan.train_ids, &plan.valid_ids})
            for (const auto& id : *part) max_pre = std::max(max_pre, m.find(id)->dex_date);
        for (const auto& id : plan.test_ids) min_post = std::min(min_post, m.find(id)->dex_date);
        REQUIRE(max_pre < min_post);
        check_partition(plan, n);
    }
}

TEST_CASE("temporal split rejects one-sided data") {
    auto m = fake_manifest(30);
    try {
        make_temporal_split(m, "1999-01-01", 1);
        FAIL("expected SplitError");
    } catch (const SplitError& e) {
        CHECK(e.kind() == SplitErrorKind::EmptySide);
    }
}

TEST_CASE("augmentation at 100 percent doubles train and valid") {
    auto base = fake_manifest(100);
    auto obf = fake_obfuscated(base, 100);
    AugmentOptions opt;
    opt.fraction_percent = 100;
    opt.seed = 5;
    auto plan = make_augmented_split(base, obf, opt);
    CHECK(plan.train_ids.size() == 160);
    CHECK(plan.valid_ids.size() == 20);
    CHECK(plan.test_ids.size() == 10);
    check_partition(plan, 190);
}

TEST_CASE("augmentation at 0 percent adds nothing") {
    auto base = fake_manifest(100);
    auto obf = fake_obfuscated(base, 100);
    AugmentOptions opt;
    opt.fraction_percent = 0;
    auto plan = make_augmented_split(base, obf, opt);
    CHECK(plan.train_ids.size() == 80);
    CHECK(plan.valid_ids.size() == 10);
}

TEST_CASE("augmentation at 50 percent on 1000 bases adds 400 train variants") {
    auto base = fake_manifest(1000);
    auto obf = fake_obfuscated(base, 1000);
    AugmentOptions opt;
    opt.fraction_percent = 50;
    opt.seed = 11;
    auto plan = make_augmented_split(base, obf, opt);
    CHECK(plan.train_ids.size() == 800 + 400);
    CHECK(plan.valid_ids.size() == 100 + 50);
}

TEST_CASE("a variant never lands in a different partition than its base") {
    auto base = fake_manifest(200);
    auto obf = fake_obfuscated(base, 200, 2);
    AugmentOptions opt;
    opt.fraction_percent = 75;
    opt.seed = 21;
    auto plan = make_augmented_split(base, obf, opt);
    std::set<std::string> train(plan.train_ids.begin(), plan.train_ids.end());
    std::set<std::string> valid(plan.valid_ids.begin(), plan.valid_ids.end());
    for (const auto& id : plan.train_ids) {
        const auto* rec = obf.find(id);
        if (rec && rec->obfuscated_of) REQUIRE(train.count(*rec->obfuscated_of));
    }
    for (const auto& id : plan.valid_ids) {
        const auto* rec = obf.find(id);
        if (rec && rec->obfuscated_of) REQUIRE(valid.count(*rec->obfuscated_of));
    }
}

TEST_CASE("obfuscated test mode holds out variants of unseen bases only") {
    auto base = fake_manifest(100);
    auto obf = fake_obfuscated(base, 100, 3);
    AugmentOptions opt;
    opt.fraction_percent = 25;
    opt.test_obfuscated = true;
    opt.seed = 9;
    auto plan = make_augmented_split(base, obf, opt);
    std::set<std::string> held_out;
    std::set<std::string> trained(plan.train_ids.begin(), plan.train_ids.end());
    for (const auto& id : plan.valid_ids) trained.insert(id);
    for (const auto& rec : base.records)
        if (!trained.count(rec.id)) held_out.insert(rec.id);
    CHECK(plan.test_ids.size() == held_out.size() * 3);
    for (const auto& id : plan.test_ids) {
        const auto* rec = obf.find(id);
        REQUIRE(rec);
        REQUIRE(rec->obfuscated_of);
        REQUIRE(held_out.count(*rec->obfuscated_of));
    }
}

TEST_CASE("90/10 mode tests on every variant") {
    auto base = fake_manifest(100);
    auto obf = fake_obfuscated(base, 60, 2);
    AugmentOptions opt;
    opt.fraction_percent = 50;
    opt.train90_valid10 = true;
    opt.seed = 17;
    auto plan = make_augmented_split(base, obf, opt);
    CHECK(plan.test_ids.size() == 120);
    std::set<std::string> tv(plan.train_ids.begin(), plan.train_ids.end());
    for (const auto& id : plan.valid_ids) tv.insert(id);
    size_t base_count = 0;
    for (const auto& rec : base.records) base_count += tv.count(rec.id);
    CHECK(base_count == 100);
}

TEST_CASE("dangling variant linkage is rejected") {
    auto base = fake_manifest(50);
    auto obf = fake_obfuscated(base, 50);
    obf.records[3].obfuscated_of = "nonexistent";
    AugmentOptions opt;
    try {
        make_augmented_split(base, obf, opt);
        FAIL("expected SplitError");
    } catch (const SplitError& e) {
        CHECK(e.kind() == SplitErrorKind::MissingLinkage);
    }
}

TEST_CASE("obfuscated test mode with no held-out variants is an error") {
    auto base = fake_manifest(100);
    Manifest obf;  // nothing to test on
    AugmentOptions opt;
    opt.test_obfuscated = true;
    try {
        make_augmented_split(base, obf, opt);
        FAIL("expected SplitError");
    } catch (const SplitError& e) {
        CHECK(e.kind() == SplitErrorKind::MissingLinkage);
    }
}
