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

#include "dexpix/manifest.hpp"

#include <fstream>
#include <unordered_set>

#include <json.hpp>

namespace dexpix {

using nlohmann::json;

Manifest Manifest::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ManifestError("cannot open manifest " + path.string());
    Manifest manifest;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::exception& e) {
            throw ManifestError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
        const std::string type = obj.value("type", "record");
        if (type == "header") {
            int version = obj.value("format_version", 0);
            if (version != kFormatVersion)
                throw ManifestError("unsupported manifest format version " +
                                    std::to_string(version));
        } else if (type == "record") {
            SampleRecord rec;
            rec.id = obj.at("id").get<std::string>();
            rec.image_path = obj.at("image_path").get<std::string>();
            rec.label = obj.at("label").get<int>();
            rec.dex_date = obj.value("dex_date", "1970-01-01");
            if (obj.contains("obfuscated_of") && !obj["obfuscated_of"].is_null())
                rec.obfuscated_of = obj["obfuscated_of"].get<std::string>();
            if (rec.label != 0 && rec.label != 1)
                throw ManifestError("label must be 0 or 1 for id " + rec.id);
            manifest.records.push_back(std::move(rec));
        } else if (type == "failure") {
            manifest.failures.push_back(
                {obj.at("path").get<std::string>(), obj.at("reason").get<std::string>()});
        } else {
            throw ManifestError("unknown manifest line type '" + type + "'");
        }
    }
    return manifest;
}

void Manifest::save(const std::filesystem::path& path) const {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) throw ManifestError("cannot write manifest " + tmp.string());
        out << json{{"type", "header"}, {"format_version", kFormatVersion}}.dump() << "\n";
        for (const auto& rec : records) {
            json obj{{"type", "record"},
                     {"id", rec.id},
                     {"image_path", rec.image_path},
                     {"label", rec.label},
                     {"dex_date", rec.dex_date}};
            if (rec.obfuscated_of) obj["obfuscated_of"] = *rec.obfuscated_of;
            out << obj.dump() << "\n";
        }
        for (const auto& f : failures)
            out << json{{"type", "failure"}, {"path", f.path}, {"reason", f.reason}}.dump()
                << "\n";
        if (!out) throw ManifestError("write failed on " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

const SampleRecord* Manifest::find(const std::string& id) const {
    for (const auto& rec : records)
        if (rec.id == id) return &rec;
    return nullptr;
}

void Manifest::validate() const {
    std::unordered_map<std::string, const SampleRecord*> by_id;
    for (const auto& rec : records) {
        if (!by_id.emplace(rec.id, &rec).second)
            throw ManifestError("duplicate id " + rec.id);
    }
    for (const auto& rec : records) {
        if (!rec.obfuscated_of) continue;
        auto it = by_id.find(*rec.obfuscated_of);
        if (it == by_id.end())
            throw ManifestError("obfuscated_of of " + rec.id + " references missing id " +
                                *rec.obfuscated_of);
        if (it->second->label != rec.label)
            throw ManifestError("obfuscated variant " + rec.id + " disagrees on label with " +
                                *rec.obfuscated_of);
    }
}

std::unordered_map<std::string, std::vector<std::string>> Manifest::variant_index() const {
    std::unordered_map<std::string, std::vector<std::string>> index;
    for (const auto& rec : records)
        if (rec.obfuscated_of) index[*rec.obfuscated_of].push_back(rec.id);
    return index;
}

}  // namespace dexpix
