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

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace dexpix {

// One labeled app. Dates are ISO "YYYY-MM-DD", which compares correctly
// as a string.
struct SampleRecord {
    std::string id;          // content hash, hex
    std::string image_path;  // unresized vector image in the cache
    int label = 0;           // 1 = malware, 0 = goodware
    std::string dex_date;
    std::optional<std::string> obfuscated_of;
};

// An app that failed extraction; kept for attrition accounting.
struct FailureRecord {
    std::string path;
    std::string reason;
};

class ManifestError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Line-delimited JSON catalog: a header object followed by one object
// per record. Written atomically (temp file + rename).
struct Manifest {
    static constexpr int kFormatVersion = 1;

    std::vector<SampleRecord> records;
    std::vector<FailureRecord> failures;

    static Manifest load(const std::filesystem::path& path);
    void save(const std::filesystem::path& path) const;

    const SampleRecord* find(const std::string& id) const;

    // Unique ids; obfuscated_of targets exist and carry the same label.
    void validate() const;

    // base id -> ids of its obfuscated variants.
    std::unordered_map<std::string, std::vector<std::string>> variant_index() const;
};

}  // namespace dexpix
