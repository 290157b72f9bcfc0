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

#include "dexpix/apk.hpp"

#include <zlib.h>

#include <algorithm>
#include <cstring>
#include <fstream>
#include <optional>

namespace dexpix {

namespace {

constexpr uint32_t kEocdSignature = 0x06054b50;
constexpr uint32_t kCentralDirSignature = 0x02014b50;
constexpr uint32_t kLocalHeaderSignature = 0x04034b50;
constexpr size_t kEocdMinSize = 22;
constexpr size_t kMaxCommentSize = 65535;

uint16_t read_u16(const uint8_t* p) {
    return static_cast<uint16_t>(p[0]) | static_cast<uint16_t>(p[1]) << 8;
}

uint32_t read_u32(const uint8_t* p) {
    return static_cast<uint32_t>(p[0]) | static_cast<uint32_t>(p[1]) << 8 |
           static_cast<uint32_t>(p[2]) << 16 | static_cast<uint32_t>(p[3]) << 24;
}

std::vector<uint8_t> inflate_raw(const uint8_t* data, size_t size, size_t expected) {
    std::vector<uint8_t> out(expected);
    z_stream zs{};
    // Negative window bits: raw deflate, as zip stores it.
    if (inflateInit2(&zs, -15) != Z_OK)
        throw ApkError(ApkErrorKind::DecompressionFailure, "inflateInit failed");
    zs.next_in = const_cast<uint8_t*>(data);
    zs.avail_in = static_cast<uInt>(size);
    zs.next_out = out.data();
    zs.avail_out = static_cast<uInt>(out.size());
    int rc = inflate(&zs, Z_FINISH);
    size_t produced = zs.total_out;
    inflateEnd(&zs);
    if (rc != Z_STREAM_END || produced != expected)
        throw ApkError(ApkErrorKind::DecompressionFailure, "corrupt deflate stream");
    return out;
}

// classes.dex -> 1, classesN.dex (N >= 2) -> N, anything else -> nullopt.
std::optional<uint32_t> multidex_index(const std::string& name) {
    if (name == "classes.dex") return 1;
    constexpr std::string_view prefix = "classes";
    constexpr std::string_view suffix = ".dex";
    if (name.size() <= prefix.size() + suffix.size()) return std::nullopt;
    if (name.compare(0, prefix.size(), prefix) != 0) return std::nullopt;
    if (name.compare(name.size() - suffix.size(), suffix.size(), suffix) != 0)
        return std::nullopt;
    std::string digits = name.substr(prefix.size(), name.size() - prefix.size() - suffix.size());
    if (digits.empty() || digits[0] == '0') return std::nullopt;
    uint64_t n = 0;
    for (char c : digits) {
        if (c < '0' || c > '9') return std::nullopt;
        n = n * 10 + static_cast<uint64_t>(c - '0');
        if (n > 0xffffffffULL) return std::nullopt;
    }
    if (n < 2) return std::nullopt;
    return static_cast<uint32_t>(n);
}

}  // namespace

const char* apk_error_name(ApkErrorKind kind) {
    switch (kind) {
        case ApkErrorKind::NotAZip: return "NotAZip";
        case ApkErrorKind::IoFailure: return "IoFailure";
        case ApkErrorKind::TruncatedArchive: return "TruncatedArchive";
        case ApkErrorKind::NoDexFound: return "NoDexFound";
        case ApkErrorKind::DecompressionFailure: return "DecompressionFailure";
    }
    return "UnknownError";
}

ApkArchive ApkArchive::open(const std::filesystem::path& path) {
    ApkArchive archive;
    archive.path_ = path;

    std::ifstream in(path, std::ios::binary);
    if (!in) throw ApkError(ApkErrorKind::IoFailure, "cannot open " + path.string());
    in.seekg(0, std::ios::end);
    auto file_size = static_cast<size_t>(in.tellg());
    in.seekg(0);
    archive.raw_.resize(file_size);
    if (file_size > 0 &&
        !in.read(reinterpret_cast<char*>(archive.raw_.data()), static_cast<std::streamsize>(file_size)))
        throw ApkError(ApkErrorKind::IoFailure, "read failed on " + path.string());

    const uint8_t* raw = archive.raw_.data();
    if (file_size < kEocdMinSize)
        throw ApkError(ApkErrorKind::NotAZip, "no end-of-central-directory in " + path.string());

    // EOCD: scan back over a possible trailing comment.
    size_t scan_floor = file_size > kEocdMinSize + kMaxCommentSize
                            ? file_size - kEocdMinSize - kMaxCommentSize
                            : 0;
    std::optional<size_t> eocd_pos;
    for (size_t pos = file_size - kEocdMinSize;; --pos) {
        if (read_u32(raw + pos) == kEocdSignature) {
            eocd_pos = pos;
            break;
        }
        if (pos == scan_floor) break;
    }
    if (!eocd_pos)
        throw ApkError(ApkErrorKind::NotAZip, "no end-of-central-directory in " + path.string());

    const uint8_t* eocd = raw + *eocd_pos;
    uint16_t entry_count = read_u16(eocd + 10);
    uint32_t cd_size = read_u32(eocd + 12);
    uint32_t cd_offset = read_u32(eocd + 16);
    if (static_cast<uint64_t>(cd_offset) + cd_size > file_size)
        throw ApkError(ApkErrorKind::TruncatedArchive,
                       "central directory extends past end of " + path.string());

    size_t pos = cd_offset;
    const size_t cd_end = cd_offset + cd_size;
    for (uint16_t i = 0; i < entry_count; ++i) {
        if (pos + 46 > cd_end || read_u32(raw + pos) != kCentralDirSignature)
            throw ApkError(ApkErrorKind::TruncatedArchive, "bad central directory record");
        ZipEntry entry;
        entry.method = read_u16(raw + pos + 10);
        entry.crc32 = read_u32(raw + pos + 16);
        entry.compressed_size = read_u32(raw + pos + 20);
        entry.uncompressed_size = read_u32(raw + pos + 24);
        uint16_t name_len = read_u16(raw + pos + 28);
        uint16_t extra_len = read_u16(raw + pos + 30);
        uint16_t comment_len = read_u16(raw + pos + 32);
        entry.local_header_offset = read_u32(raw + pos + 42);
        if (pos + 46 + name_len > cd_end)
            throw ApkError(ApkErrorKind::TruncatedArchive, "entry name past central directory end");
        entry.name.assign(reinterpret_cast<const char*>(raw + pos + 46), name_len);
        archive.entries_.push_back(std::move(entry));
        pos += 46 + static_cast<size_t>(name_len) + extra_len + comment_len;
    }
    return archive;
}

std::vector<uint8_t> ApkArchive::read_entry(const ZipEntry& entry) const {
    const uint8_t* raw = raw_.data();
    size_t file_size = raw_.size();
    size_t lh = entry.local_header_offset;
    if (lh + 30 > file_size || read_u32(raw + lh) != kLocalHeaderSignature)
        throw ApkError(ApkErrorKind::TruncatedArchive, "bad local header for " + entry.name);
    // Name/extra lengths in the local header may differ from the central
    // directory copy; the local ones position the data.
    uint16_t name_len = read_u16(raw + lh + 26);
    uint16_t extra_len = read_u16(raw + lh + 28);
    size_t data_start = lh + 30 + name_len + extra_len;
    if (data_start + entry.compressed_size > file_size)
        throw ApkError(ApkErrorKind::TruncatedArchive, "entry body past end of file: " + entry.name);

    std::vector<uint8_t> body;
    switch (entry.method) {
        case 0:
            if (entry.compressed_size != entry.uncompressed_size)
                throw ApkError(ApkErrorKind::DecompressionFailure,
                               "stored entry size mismatch: " + entry.name);
            body.assign(raw + data_start, raw + data_start + entry.uncompressed_size);
            break;
        case 8:
            body = inflate_raw(raw + data_start, entry.compressed_size, entry.uncompressed_size);
            break;
        default:
            throw ApkError(ApkErrorKind::DecompressionFailure,
                           "unsupported compression method " + std::to_string(entry.method) +
                               " for " + entry.name);
    }
    uint32_t crc = static_cast<uint32_t>(
        ::crc32(0L, body.empty() ? Z_NULL : body.data(), static_cast<uInt>(body.size())));
    if (crc != entry.crc32)
        throw ApkError(ApkErrorKind::DecompressionFailure, "CRC mismatch in " + entry.name);
    return body;
}

std::vector<std::string> list_dex_entries(const ApkArchive& archive) {
    std::vector<std::pair<uint32_t, std::string>> found;
    for (const auto& entry : archive.entries()) {
        if (auto idx = multidex_index(entry.name)) found.emplace_back(*idx, entry.name);
    }
    if (found.empty())
        throw ApkError(ApkErrorKind::NoDexFound,
                       "no classes.dex entries in " + archive.path().string());
    std::sort(found.begin(), found.end());
    std::vector<std::string> names;
    names.reserve(found.size());
    for (auto& [idx, name] : found) names.push_back(std::move(name));
    return names;
}

ByteStream extract_bytestream(const ApkArchive& archive, std::vector<std::string>* warnings) {
    auto names = list_dex_entries(archive);
    ByteStream stream;
    for (const auto& name : names) {
        auto it = std::find_if(archive.entries().begin(), archive.entries().end(),
                               [&](const ZipEntry& e) { return e.name == name; });
        auto body = archive.read_entry(*it);
        if (warnings && (body.size() < 4 || std::memcmp(body.data(), "dex\n", 4) != 0))
            warnings->push_back(name + ": missing DEX magic, bytes used as-is");
        stream.bytes.insert(stream.bytes.end(), body.begin(), body.end());
        ++stream.source_count;
    }
    return stream;
}

}  // namespace dexpix
