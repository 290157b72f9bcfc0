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

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <map>

#include "dexpix/image.hpp"
#include "dexpix/manifest.hpp"
#include "dexpix/pipeline.hpp"
#include "dexpix/train.hpp"

namespace {

using namespace dexpix;
using nlohmann::json;

// key=value lines overriding RunConfig defaults; '#' starts a comment.
void apply_config_file(const std::string& path, RunConfig& config) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file " + path);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("bad config line (want key=value): " + line);
        const std::string key = line.substr(0, eq);
        const std::string value = line.substr(eq + 1);
        if (key == "input_width")
            config.input_width = std::stoul(value);
        else if (key == "batch_size")
            config.batch_size = std::stoul(value);
        else if (key == "lr")
            config.lr = std::stod(value);
        else if (key == "max_epochs")
            config.max_epochs = std::stoul(value);
        else if (key == "patience")
            config.patience = std::stoul(value);
        else if (key == "seed")
            config.seed = std::stoull(value);
        else if (key == "repetitions")
            config.repetitions = std::stoul(value);
        else if (key == "threshold")
            config.threshold = std::stod(value);
        else
            throw std::runtime_error("unknown config key: " + key);
    }
}

void write_history(const std::filesystem::path& path, const std::vector<EpochStats>& history) {
    std::ofstream out(path);
    for (const auto& e : history) {
        json obj{{"epoch", e.epoch},
                 {"train_loss", e.train_loss},
                 {"valid_accuracy", e.valid_accuracy}};
        out << obj.dump() << "\n";
    }
}

std::string summary_cell(const MetricSummary& s) {
    char buf[64];
    if (s.defined == 0) return "undefined";
    std::snprintf(buf, sizeof(buf), "%.4f +/- %.4f", s.mean, s.stddev);
    return buf;
}

int cmd_extract(const std::string& list_path, const std::vector<std::string>& apks,
                const std::string& manifest_out, const std::string& cache_dir, size_t width,
                int label, const std::string& date, bool pgm, bool bytes) {
    std::vector<ExtractInput> inputs;
    if (!list_path.empty()) inputs = parse_extract_list(list_path);
    for (const auto& apk : apks) inputs.push_back({apk, label, date, std::nullopt});
    if (inputs.empty()) throw std::runtime_error("nothing to extract: give --list or APK paths");

    ExtractOptions options;
    options.cache_dir = cache_dir;
    options.width = width;
    options.write_pgm = pgm;
    options.write_bytes = bytes;
    Manifest manifest = extract_batch(inputs, options);
    manifest.validate();
    manifest.save(manifest_out);
    std::cout << "extracted " << manifest.records.size() << " apps, "
              << manifest.failures.size() << " failures -> " << manifest_out << "\n";
    return 0;
}

int cmd_train(const std::string& manifest_path, const RunConfig& config,
              const std::string& mode, const std::string& cutoff,
              const std::string& obf_manifest_path, unsigned fraction, bool test_obfuscated,
              bool train90, const std::string& out_dir) {
    Manifest manifest = Manifest::load(manifest_path);
    manifest.validate();
    std::filesystem::create_directories(out_dir);
    Dataset data = Dataset::load(manifest, config.input_width);

    std::vector<SplitPlan> plans;
    if (mode == "holdout") {
        plans = make_holdout_splits(manifest, config.seed, config.repetitions);
    } else if (mode == "temporal") {
        if (cutoff.empty()) throw std::runtime_error("temporal mode needs --cutoff");
        plans.push_back(make_temporal_split(manifest, cutoff, config.seed));
    } else if (mode == "augmented") {
        if (obf_manifest_path.empty())
            throw std::runtime_error("augmented mode needs --obf-manifest");
        Manifest obf = Manifest::load(obf_manifest_path);
        AugmentOptions options;
        options.fraction_percent = fraction;
        options.test_obfuscated = test_obfuscated;
        options.train90_valid10 = train90;
        options.seed = config.seed;
        plans.push_back(make_augmented_split(manifest, obf, options));
        // Augmented plans reference variant ids from the obfuscated
        // manifest; fold those records into the dataset's population.
        Manifest merged = manifest;
        merged.records.insert(merged.records.end(), obf.records.begin(), obf.records.end());
        data = Dataset::load(merged, config.input_width);
    } else {
        throw std::runtime_error("unknown mode " + mode);
    }

    for (size_t rep = 0; rep < plans.size(); ++rep) {
        const auto& plan = plans[rep];
        std::cout << "rep " << rep << ": train=" << plan.train_ids.size()
                  << " valid=" << plan.valid_ids.size() << " test=" << plan.test_ids.size()
                  << "\n";
        auto result = train(data, plan, config);
        const std::string stem = plans.size() > 1 ? "rep" + std::to_string(rep) : "model";
        save_checkpoint(std::filesystem::path(out_dir) / (stem + ".dxrm"), result.params);
        write_history(std::filesystem::path(out_dir) / (stem + "_history.jsonl"),
                      result.history);
        if (!plan.test_ids.empty()) {
            auto report = evaluate(result.params, data, plan.test_ids, config.threshold);
            std::cout << "rep " << rep << " test: " << report.to_line() << "\n";
        }
    }
    return 0;
}

int cmd_eval(const std::string& checkpoint_path, const std::string& manifest_path,
             size_t size_flag, double threshold) {
    NetworkParams params = load_checkpoint(checkpoint_path);
    if (size_flag != 0 && size_flag != params.input_width)
        throw std::runtime_error("WidthMismatch: checkpoint width " +
                                 std::to_string(params.input_width) + " != requested size " +
                                 std::to_string(size_flag));
    Manifest manifest = Manifest::load(manifest_path);
    Dataset data = Dataset::load(manifest, params.input_width);
    std::vector<std::string> ids;
    for (const auto& rec : manifest.records) ids.push_back(rec.id);
    auto report = evaluate(params, data, ids, threshold);
    std::cout << report.to_line() << "\n";
    return 0;
}

int cmd_roc(const std::string& checkpoint_path, const std::string& manifest_path,
            const std::string& out_path) {
    NetworkParams params = load_checkpoint(checkpoint_path);
    Manifest manifest = Manifest::load(manifest_path);
    Dataset data = Dataset::load(manifest, params.input_width);
    std::vector<std::string> ids;
    for (const auto& rec : manifest.records) ids.push_back(rec.id);
    auto curve = roc(params, data, ids);
    std::ofstream out(out_path);
    for (const auto& [fpr, tpr] : curve.points) out << fpr << " " << tpr << "\n";
    std::cout << "auc=" << curve.auc << " points=" << curve.points.size() << " -> " << out_path
              << "\n";
    return 0;
}

int cmd_ablate(const std::string& manifest_path, const std::vector<size_t>& sizes,
               const RunConfig& config) {
    Manifest manifest = Manifest::load(manifest_path);
    manifest.validate();
    auto rows = resize_ablation(manifest, sizes, config);
    std::cout << "width | accuracy | precision | recall | f1\n";
    for (const auto& row : rows)
        std::cout << row.width << " | " << summary_cell(row.accuracy) << " | "
                  << summary_cell(row.precision) << " | " << summary_cell(row.recall) << " | "
                  << summary_cell(row.f1) << "\n";
    return 0;
}

int cmd_summary(const std::string& manifest_path) {
    Manifest manifest = Manifest::load(manifest_path);
    size_t malware = 0, goodware = 0, obfuscated = 0;
    for (const auto& rec : manifest.records) {
        (rec.label == 1 ? malware : goodware)++;
        if (rec.obfuscated_of) ++obfuscated;
    }
    std::cout << "records: " << manifest.records.size() << " (malware " << malware
              << ", goodware " << goodware << ", obfuscated variants " << obfuscated << ")\n";
    std::map<std::string, size_t> reasons;
    for (const auto& f : manifest.failures)
        ++reasons[f.reason.substr(0, f.reason.find(':'))];
    std::cout << "failures: " << manifest.failures.size() << "\n";
    for (const auto& [reason, count] : reasons)
        std::cout << "  " << reason << ": " << count << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"DEX byte-stream imaging and 1-D CNN malware classification"};
    app.require_subcommand(1);

    RunConfig config;
    std::string config_file;
    app.add_option("--config", config_file, "key=value file overriding run defaults");

    // extract
    auto* extract = app.add_subcommand("extract", "convert APKs into cached images");
    std::string list_path, manifest_out = "manifest.jsonl", cache_dir = "cache", date =
                                                                                    "1970-01-01";
    std::vector<std::string> apks;
    size_t size = 16384;
    int label = 0;
    bool pgm = false, bytes = false;
    extract->add_option("--list", list_path, "csv: path,label[,date[,obfuscated_of]]");
    extract->add_option("apks", apks, "APK files (labeled via --label/--date)");
    extract->add_option("--manifest-out", manifest_out);
    extract->add_option("--cache-dir", cache_dir);
    extract->add_option("--size", size, "resize target width");
    extract->add_option("--label", label);
    extract->add_option("--date", date);
    extract->add_flag("--pgm", pgm, "also write PGM debug images");
    extract->add_flag("--bytes", bytes, "also dump raw byte streams");

    // train
    auto* train_cmd = app.add_subcommand("train", "train the network on a manifest");
    std::string manifest_path, mode = "holdout", cutoff, obf_manifest, out_dir = "run";
    unsigned fraction = 100;
    bool test_obfuscated = false, train90 = false;
    bool seed_given = false, size_given = false;
    uint64_t seed_flag = 0;
    size_t size_flag = 0;
    train_cmd->add_option("--manifest", manifest_path)->required();
    train_cmd->add_option("--mode", mode, "holdout | temporal | augmented");
    train_cmd->add_option("--cutoff", cutoff, "temporal cutoff date YYYY-MM-DD");
    train_cmd->add_option("--obf-manifest", obf_manifest);
    train_cmd->add_option("--fraction", fraction, "augmentation percentage");
    train_cmd->add_flag("--test-obfuscated", test_obfuscated);
    train_cmd->add_flag("--train90", train90, "90/10 base split, test on all variants");
    train_cmd->add_option("--out", out_dir);
    train_cmd->add_option("--seed", seed_flag)->each([&](const std::string&) {
        seed_given = true;
    });
    train_cmd->add_option("--size", size_flag)->each([&](const std::string&) {
        size_given = true;
    });

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "metrics of a checkpoint on a manifest");
    std::string checkpoint_path;
    size_t eval_size = 0;
    eval_cmd->add_option("--checkpoint", checkpoint_path)->required();
    eval_cmd->add_option("--manifest", manifest_path)->required();
    eval_cmd->add_option("--size", eval_size, "expected cache width (checked)");

    // roc
    auto* roc_cmd = app.add_subcommand("roc", "ROC curve of a checkpoint on a manifest");
    std::string roc_out = "roc.txt";
    roc_cmd->add_option("--checkpoint", checkpoint_path)->required();
    roc_cmd->add_option("--manifest", manifest_path)->required();
    roc_cmd->add_option("--out", roc_out);

    // ablate
    auto* ablate_cmd = app.add_subcommand("ablate", "hold-out protocol across image sizes");
    std::vector<size_t> sizes{256, 1024, 4096, 16384, 65536};
    ablate_cmd->add_option("--manifest", manifest_path)->required();
    ablate_cmd->add_option("--sizes", sizes)->delimiter(',');
    ablate_cmd->add_option("--seed", seed_flag)->each([&](const std::string&) {
        seed_given = true;
    });

    // summary
    auto* summary_cmd = app.add_subcommand("summary", "dataset and attrition accounting");
    summary_cmd->add_option("--manifest", manifest_path)->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (!config_file.empty()) apply_config_file(config_file, config);
        if (seed_given) config.seed = seed_flag;
        if (size_given) config.input_width = size_flag;

        if (extract->parsed())
            return cmd_extract(list_path, apks, manifest_out, cache_dir, size, label, date, pgm,
                               bytes);
        if (train_cmd->parsed())
            return cmd_train(manifest_path, config, mode, cutoff, obf_manifest, fraction,
                             test_obfuscated, train90, out_dir);
        if (eval_cmd->parsed())
            return cmd_eval(checkpoint_path, manifest_path, eval_size, config.threshold);
        if (roc_cmd->parsed()) return cmd_roc(checkpoint_path, manifest_path, roc_out);
        if (ablate_cmd->parsed()) return cmd_ablate(manifest_path, sizes, config);
        if (summary_cmd->parsed()) return cmd_summary(manifest_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
