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
#include <stdexcept>
#include <string>
#include <vector>

namespace dexpix {

enum class ApkErrorKind {
    NotAZip,
    IoFailure,
    TruncatedArchive,
    NoDexFound,
    DecompressionFailure,
};

class ApkError : public std::runtime_error {
public:
    ApkError(ApkErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}
    ApkErrorKind kind() const { return kind_; }

private:
    ApkErrorKind kind_;
};

const char* apk_error_name(ApkErrorKind kind);

struct ZipEntry {
    std::string name;
    uint16_t method = 0;  // 0 = stored, 8 = deflate
    uint32_t compressed_size = 0;
    uint32_t uncompressed_size = 0;
    uint32_t crc32 = 0;
    uint32_t local_header_offset = 0;
};

// Read-only view of one APK. The whole container is held in memory;
// entry bodies are decompressed on demand. Immutable after open, so
// concurrent reads are safe.
class ApkArchive {
public:
    static ApkArchive open(const std::filesystem::path& path);

    const std::filesystem::path& path() const { return path_; }
    const std::vector<ZipEntry>& entries() const { return entries_; }

    // Decompressed body of one entry. Verifies size and CRC.
    std::vector<uint8_t> read_entry(const ZipEntry& entry) const;

private:
    std::filesystem::path path_;
    std::vector<uint8_t> raw_;
    std::vector<ZipEntry> entries_;
};

// Concatenated raw DEX bytes of one app, in canonical multidex order.
struct ByteStream {
    std::vector<uint8_t> bytes;
    size_t source_count = 0;

    size_t length() const { return bytes.size(); }
};

// Archive-root classes.dex / classesN.dex entries in canonical multidex
// order: classes.dex first, then numeric ascending. Throws NoDexFound
// when nothing matches.
std::vector<std::string> list_dex_entries(const ApkArchive& archive);

// Concatenation of the DEX entry bodies in canonical order. A malformed
// DEX magic is reported through `warnings` (when given) but never fails
// extraction; the bytes are taken as they are.
ByteStream extract_bytestream(const ApkArchive& archive,
                              std::vector<std::string>* warnings = nullptr);

}  // namespace dexpix
