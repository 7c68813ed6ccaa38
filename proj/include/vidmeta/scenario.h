#pragma once

// Train/evaluate protocols over an ingested corpus.

#include "vidmeta/corpus.h"
#include "vidmeta/metrics.h"
#include "vidmeta/pipeline.h"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace vidmeta {

enum class Scenario { kBrand, kTool, kSocial, kManipSocial, kManipLocal, kBlindDevice };
enum class SplitKind { kAuto, kStratifiedHalf, kLeaveOneModelOut };

std::string scenario_name(Scenario s);
Scenario parse_scenario(const std::string& name);
std::string split_name(SplitKind s);
SplitKind parse_split(const std::string& name);

struct ScenarioConfig {
    Scenario scenario = Scenario::kBrand;
    SplitKind split = SplitKind::kAuto;  // leave-one-model-out for manip-local
    PipelineOptions pipeline;
    int grid_resolution = 80;
    std::string manifest;
    std::string corpus;
    std::string root;
    std::string out_dir = "out";
    std::string holdout;

    // Applies one key=value setting; unknown keys throw InvalidArgument.
    void set(const std::string& key, const std::string& value);
    nlohmann::json to_json() const;
};

// Flat text file: `key = value` per line, `#` starts a comment.
ScenarioConfig load_config(const std::filesystem::path& path,
                           ScenarioConfig base = ScenarioConfig{});

// Label a manifest row carries under `s`, or nothing when the row does not
// take part (empty brand, or social rows outside the matching manipulation
// scenario).
std::optional<std::string> scenario_label(Scenario s, const ManifestRow& row);

struct Split {
    std::vector<std::size_t> train;
    std::vector<std::size_t> validation;
};

// Per class, floor(n/2) samples go to validation after a seeded shuffle.
// Throws ClassTooSmall when a class has fewer than two samples.
Split stratified_split(const std::vector<std::string>& labels, std::uint64_t seed);

struct ClassCounts {
    std::int64_t train = 0;
    std::int64_t validation = 0;
};

struct ScenarioReport {
    std::string scenario;
    Metrics metrics;
    std::map<std::string, ClassCounts> counts;
    std::size_t excluded = 0;  // corpus rows without a label for this scenario
    std::size_t vocabulary_size = 0;
    std::size_t selected_features = 0;
    std::string classifier;
    PipelineModel model;
    std::optional<std::string> svg;

    nlohmann::json to_json() const;
};

ScenarioReport run_scenario(const ScenarioConfig& config,
                            const std::vector<CorpusRecord>& corpus);

struct BlindReport {
    std::string holdout;
    std::string true_brand;
    std::size_t holdout_samples = 0;
    double fraction_in_true_region = 0.0;
    std::map<std::string, std::int64_t> predicted;
    std::map<std::string, std::int64_t> train_counts;
    PipelineModel model;
    std::string svg;

    nlohmann::json to_json() const;
};

// Trains LDA + kNN on every brand-labelled row except those of `holdout`
// and classifies the held-out rows. Throws UnknownDeviceId.
BlindReport run_blind_device(const ScenarioConfig& config,
                             const std::vector<CorpusRecord>& corpus,
                             const std::string& holdout);

struct FoldResult {
    std::string model_id;
    std::size_t test_samples = 0;
    double balanced_accuracy = 0.0;
};

struct SkippedFold {
    std::string model_id;
    std::string reason;
};

struct LomoReport {
    std::string scenario;
    std::vector<FoldResult> folds;
    std::vector<SkippedFold> skipped;
    std::vector<std::string> discarded;  // sole model of their brand
    double mean_balanced_accuracy = 0.0;

    nlohmann::json to_json() const;
};

// One fold per device model with edited/pristine labels.
LomoReport run_leave_one_model_out(const ScenarioConfig& config,
                                   const std::vector<CorpusRecord>& corpus);

// Human-readable tables for standard output.
std::string format_report(const ScenarioReport& report);
std::string format_report(const BlindReport& report);
std::string format_report(const LomoReport& report);

}  // namespace vidmeta
