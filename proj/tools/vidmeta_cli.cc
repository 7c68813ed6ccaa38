// vidmeta: container metadata extraction and source attribution.

#include "vidmeta/bmff.h"
#include "vidmeta/corpus.h"
#include "vidmeta/error.h"
#include "vidmeta/manifest.h"
#include "vidmeta/pipeline.h"
#include "vidmeta/scenario.h"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>

#include "CLI11.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace vidmeta;

namespace {

void write_text(const fs::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error(ErrorCode::kIo, "cannot write " + path.string());
    }
    out << text;
    if (!out) {
        throw Error(ErrorCode::kIo, "write failed for " + path.string());
    }
}

std::string json_text(const nlohmann::json& j)
{
    return j.dump(2) + "\n";
}

void print_warnings(const std::vector<Warning>& warnings)
{
    for (const Warning& w : warnings) {
        std::cerr << "warning @" << w.offset << "+" << w.length << ": " << w.message << '\n';
    }
}

std::vector<CorpusRecord> corpus_for(const ScenarioConfig& config, unsigned threads)
{
    if (!config.corpus.empty()) {
        return load_corpus(config.corpus);
    }
    if (config.manifest.empty()) {
        throw Error(ErrorCode::kInvalidArgument, "either --corpus or --manifest is required");
    }
    const fs::path root = config.root.empty() ? fs::path(config.manifest).parent_path()
                                              : fs::path(config.root);
    IngestReport ingested = ingest(load_manifest(config.manifest), root, threads);
    for (const SkippedFile& s : ingested.skipped) {
        std::cerr << "skipped " << s.file << ": " << s.reason << '\n';
    }
    return std::move(ingested.records);
}

int run_command(const ScenarioConfig& config, unsigned threads)
{
    const std::vector<CorpusRecord> corpus = corpus_for(config, threads);
    const fs::path out_dir(config.out_dir);
    fs::create_directories(out_dir);

    if (config.scenario == Scenario::kBlindDevice) {
        if (config.holdout.empty()) {
            throw Error(ErrorCode::kInvalidArgument, "blind-device needs --holdout");
        }
        const BlindReport report = run_blind_device(config, corpus, config.holdout);
        write_text(out_dir / "metrics.json", json_text(report.to_json()));
        write_text(out_dir / "model.json", json_text(report.model.to_json()));
        write_text(out_dir / "blind.svg", report.svg);
        std::cout << format_report(report);
        return 0;
    }

    SplitKind split = config.split;
    if (split == SplitKind::kAuto) {
        split = config.scenario == Scenario::kManipLocal ? SplitKind::kLeaveOneModelOut
                                                         : SplitKind::kStratifiedHalf;
    }
    if (split == SplitKind::kLeaveOneModelOut) {
        const LomoReport report = run_leave_one_model_out(config, corpus);
        write_text(out_dir / "metrics.json", json_text(report.to_json()));
        std::cout << format_report(report);
        return 0;
    }

    const ScenarioReport report = run_scenario(config, corpus);
    write_text(out_dir / "metrics.json", json_text(report.to_json()));
    write_text(out_dir / "model.json", json_text(report.model.to_json()));
    if (report.svg) {
        write_text(out_dir / (report.scenario + ".svg"), *report.svg);
    }
    std::cout << format_report(report);
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Forensic metadata extraction and source attribution for MP4/MOV files"};
    app.require_subcommand(1);

    std::string file;
    auto* dump = app.add_subcommand("dump-tree", "Print the box tree of a file");
    dump->add_option("file", file, "MP4/MOV file")->required();

    std::vector<std::string> files;
    auto* extract = app.add_subcommand("extract", "Print the metadata strings of files");
    extract->add_option("files", files, "MP4/MOV files")->required();

    std::string manifest;
    std::string root;
    std::string corpus_out = "corpus.jsonl";
    unsigned threads = 0;
    auto* ingest_cmd = app.add_subcommand("ingest", "Extract every manifest file into a corpus");
    ingest_cmd->add_option("--manifest", manifest, "Manifest CSV")->required();
    ingest_cmd->add_option("--root", root, "Directory relative paths resolve against");
    ingest_cmd->add_option("-o,--out", corpus_out, "Corpus JSON Lines output");
    ingest_cmd->add_option("--threads", threads, "Worker threads (0: all cores)");

    std::string config_path;
    std::map<std::string, std::string> overrides;
    auto* run = app.add_subcommand("run", "Train and evaluate one scenario");
    run->add_option("--config", config_path, "key = value configuration file");
    for (const char* key : {"scenario", "alpha", "beta", "lambda", "seed", "classifier", "split",
                            "manifest", "corpus", "root", "out-dir", "holdout", "grid",
                            "small-clusters", "ridge-scale", "knn-weighting", "knn-metric"}) {
        run->add_option_function<std::string>(
            std::string("--") + key,
            [&overrides, key](const std::string& v) { overrides[key] = v; },
            std::string("Overrides '") + key + "' from the config file");
    }
    run->add_option("--threads", threads, "Ingestion worker threads (0: all cores)");

    std::string model_path;
    auto* predict = app.add_subcommand("predict", "Classify files with a saved model");
    predict->add_option("--model", model_path, "model.json written by 'run'")->required();
    predict->add_option("files", files, "MP4/MOV files")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*dump) {
            const std::vector<std::uint8_t> bytes = read_file(file);
            const ParseReport report = parse_tree(bytes);
            std::cout << format_tree(report);
        } else if (*extract) {
            for (const std::string& f : files) {
                std::vector<Warning> warnings;
                for (const MetadataString& s : extract_file(f, ExclusionList::defaults(), &warnings)) {
                    std::cout << (files.size() > 1 ? f + "\t" : std::string()) << s.text << '\n';
                }
                print_warnings(warnings);
            }
        } else if (*ingest_cmd) {
            const fs::path base = root.empty() ? fs::path(manifest).parent_path() : fs::path(root);
            const IngestReport report = ingest(load_manifest(manifest), base, threads);
            std::ofstream out(corpus_out, std::ios::binary);
            if (!out) {
                throw Error(ErrorCode::kIo, "cannot write " + corpus_out);
            }
            write_corpus(out, report.records);
            for (const SkippedFile& s : report.skipped) {
                std::cerr << "skipped " << s.file << ": " << s.reason << '\n';
            }
            std::cout << report.records.size() << " records written, " << report.skipped.size()
                      << " skipped\n";
        } else if (*run) {
            ScenarioConfig config;
            if (!config_path.empty()) {
                config = load_config(config_path);
            }
            for (const auto& [key, value] : overrides) {
                config.set(key, value);
            }
            return run_command(config, threads);
        } else if (*predict) {
            std::ifstream in(model_path);
            if (!in) {
                throw Error(ErrorCode::kIo, "cannot open " + model_path);
            }
            nlohmann::json j;
            try {
                j = nlohmann::json::parse(in);
            } catch (const nlohmann::json::exception& e) {
                throw Error(ErrorCode::kInvalidArgument, std::string("model JSON: ") + e.what());
            }
            const PipelineModel model = PipelineModel::from_json(j);
            for (const std::string& f : files) {
                const std::vector<StringSet> one{extract_file(f)};
                std::cout << f << '\t' << pipeline_predict(model, one).front() << '\n';
            }
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
