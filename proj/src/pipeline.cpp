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

#include "dexpix/pipeline.hpp"

#include <openssl/evp.h>

#include <fstream>
#include <iostream>
#include <sstream>

#include "dexpix/apk.hpp"
#include "dexpix/image.hpp"

namespace dexpix {

std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());

    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
        EVP_MD_CTX_free(ctx);
        throw std::runtime_error("sha256 init failed");
    }
    char buf[1 << 16];
    while (in) {
        in.read(buf, sizeof(buf));
        if (in.gcount() > 0)
            EVP_DigestUpdate(ctx, buf, static_cast<size_t>(in.gcount()));
    }
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx, digest, &len);
    EVP_MD_CTX_free(ctx);

    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xf]);
    }
    return out;
}

std::vector<ExtractInput> parse_extract_list(const std::filesystem::path& list_path) {
    std::ifstream in(list_path);
    if (!in) throw std::runtime_error("cannot open list file " + list_path.string());
    std::vector<ExtractInput> inputs;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        std::stringstream ss(line);
        std::string field;
        ExtractInput input;
        if (!std::getline(ss, field, ','))
            throw std::runtime_error(list_path.string() + ":" + std::to_string(line_no) +
                                     ": missing path");
        input.apk_path = field;
        if (!std::getline(ss, field, ','))
            throw std::runtime_error(list_path.string() + ":" + std::to_string(line_no) +
                                     ": missing label");
        input.label = std::stoi(field);
        if (std::getline(ss, field, ',') && !field.empty()) input.dex_date = field;
        if (std::getline(ss, field, ',') && !field.empty()) input.obfuscated_of = field;
        inputs.push_back(std::move(input));
    }
    return inputs;
}

Manifest extract_batch(const std::vector<ExtractInput>& inputs, const ExtractOptions& options) {
    std::filesystem::create_directories(options.cache_dir);
    const auto resized_dir = options.cache_dir / ("w" + std::to_string(options.width));
    std::filesystem::create_directories(resized_dir);

    Manifest manifest;
    for (const auto& input : inputs) {
        try {
            const std::string id = sha256_file(input.apk_path);
            auto archive = ApkArchive::open(input.apk_path);
            std::vector<std::string> warnings;
            auto stream = extract_bytestream(archive, &warnings);
            for (const auto& w : warnings)
                std::cerr << "warning: " << input.apk_path.string() << ": " << w << "\n";

            auto vector_image = to_vector_image(stream);
            const auto image_path = options.cache_dir / (id + ".dxr");
            write_vector_image(image_path, vector_image);
            write_resized_image(resized_dir / (id + ".dxrf"),
                                resize_vector(vector_image, options.width));
            if (options.write_pgm)
                write_pgm(options.cache_dir / (id + ".pgm"), vector_image);
            if (options.write_bytes) {
                std::ofstream raw(options.cache_dir / (id + ".bytes"), std::ios::binary);
                raw.write(reinterpret_cast<const char*>(stream.bytes.data()),
                          static_cast<std::streamsize>(stream.bytes.size()));
            }

            SampleRecord rec;
            rec.id = id;
            rec.image_path = image_path.string();
            rec.label = input.label;
            rec.dex_date = input.dex_date;
            rec.obfuscated_of = input.obfuscated_of;
            manifest.records.push_back(std::move(rec));
        } catch (const ApkError& e) {
            manifest.failures.push_back(
                {input.apk_path.string(),
                 std::string(apk_error_name(e.kind())) + ": " + e.what()});
        } catch (const std::exception& e) {
            manifest.failures.push_back({input.apk_path.string(), e.what()});
        }
    }
    return manifest;
}

}  // namespace dexpix
