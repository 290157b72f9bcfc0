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
#include <string>
#include <vector>

#include "dexpix/manifest.hpp"

namespace dexpix {

// One APK queued for extraction. Label and date come from the caller
// (a listing file, in practice); the tool never guesses them.
struct ExtractInput {
    std::filesystem::path apk_path;
    int label = 0;
    std::string dex_date = "1970-01-01";
    std::optional<std::string> obfuscated_of;
};

struct ExtractOptions {
    std::filesystem::path cache_dir;
    size_t width = 16384;
    bool write_pgm = false;    // debug vector-image dump
    bool write_bytes = false;  // raw .bytes dump of the stream
};

// Per-app pipeline: open archive, concatenate DEX bytes, write the
// unresized vector image and the resized cache entry. A failing app
// becomes a failure record; the batch continues.
Manifest extract_batch(const std::vector<ExtractInput>& inputs, const ExtractOptions& options);

// Lines "path,label[,date[,obfuscated_of]]"; '#' starts a comment.
std::vector<ExtractInput> parse_extract_list(const std::filesystem::path& list_path);

std::string sha256_file(const std::filesystem::path& path);

}  // namespace dexpix
