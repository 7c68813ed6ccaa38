#include "synthetic_corpus.h"
#include "vidmeta/corpus.h"
#include "vidmeta/error.h"
#include "vidmeta/manifest.h"
#include "vidmeta/random.h"
#include "vidmeta/scenario.h"
#include "vidmeta/svg.h"

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

using namespace vidmeta;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name)
{
    const fs::path dir = fs::temp_directory_path() / ("vidmeta_" + name + "_" + std::to_string(::getpid()));
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

CorpusRecord record(const std::string& file, const std::string& brand, const std::string& model,
                    std::vector<std::string> strings, bool edited = false)
{
    CorpusRecord r;
    r.file = file;
    r.labels.path = file;
    r.labels.brand = brand;
    r.labels.model_id = model;
    r.labels.edited = edited;
    r.strings = std::move(strings);
    return r;
}

// Each class leaves its own vendor box; everything else is shared noise.
std::vector<CorpusRecord> marker_corpus(int classes, int per_class, std::uint64_t seed)
{
    Rng rng(seed);
    std::vector<CorpusRecord> out;
    for (int k = 0; k < classes; ++k) {
        const std::string brand(1, static_cast<char>('A' + k));
        for (int i = 0; i < per_class; ++i) {
            const std::string model = brand + std::to_string(i % 2 + 1);
            out.push_back(record(brand + std::to_string(i), brand, model,
                                 {"moov", "moov/mvhd", "moov/mvhd/@duration=" + std::to_string(1000 + rng.index(500)),
                                  "moov/vendor_" + brand, "moov/udta/@model=" + model}));
        }
    }
    return out;
}

int run_cli(const std::string& args)
{
    const std::string cmd = std::string(VIDMETA_CLI) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::size_t count_of(const std::string& hay, const std::string& needle)
{
    std::size_t n = 0;
    for (std::size_t pos = hay.find(needle); pos != std::string::npos; pos = hay.find(needle, pos + 1)) {
        ++n;
    }
    return n;
}

}  // namespace

TEST(Manifest, HeaderOrderQuotingAndFlags)
{
    std::istringstream in("Edited,MODEL_ID,path,brand,extra,tool,social\n"
                          "yes,m1,\"dir,with comma/a.mp4\",Apple,x,ffmpeg,\n"
                          "\n"
                          "0,m2,b.mp4,Samsung,,,youtube\n"
                          ",m3,,Huawei,,,\n");
    const std::vector<ManifestRow> rows = read_manifest(in);
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[0].path, "dir,with comma/a.mp4");
    EXPECT_TRUE(rows[0].edited);
    EXPECT_EQ(rows[0].tool, "ffmpeg");
    EXPECT_EQ(rows[1].social, "youtube");
    EXPECT_FALSE(rows[1].edited);
}

TEST(Manifest, RejectsBadInput)
{
    std::istringstream no_path("brand,model_id\nApple,m1\n");
    EXPECT_THROW(read_manifest(no_path), Error);
    std::istringstream bad_flag("path,edited\na.mp4,maybe\n");
    EXPECT_THROW(read_manifest(bad_flag), Error);
    EXPECT_TRUE(parse_edited_flag("edited"));
    EXPECT_FALSE(parse_edited_flag("pristine"));
    EXPECT_EQ(split_csv_line("a,\"b\"\"c\",,d"), (std::vector<std::string>{"a", "b\"c", "", "d"}));
}

TEST(Ingest, SkipsCorruptFilesAndKeepsOrder)
{
    const fs::path dir = scratch_dir("ingest");
    fixture::write_synthetic_corpus(dir);
    std::vector<ManifestRow> rows = load_manifest(dir / "manifest.csv");
    rows.resize(2);
    {
        std::ofstream bad(dir / "bad.mp4", std::ios::binary);
        bad << "plain text, not a movie";
    }
    ManifestRow bad_row;
    bad_row.path = "bad.mp4";
    rows.insert(rows.begin() + 1, bad_row);
    const IngestReport report = ingest(rows, dir, 2);
    ASSERT_EQ(report.records.size(), 2u);
    EXPECT_EQ(report.records[0].file, rows[0].path);
    EXPECT_EQ(report.records[1].file, rows[2].path);
    ASSERT_EQ(report.skipped.size(), 1u);
    EXPECT_EQ(report.skipped[0].file, "bad.mp4");

    std::vector<ManifestRow> only_bad = {bad_row};
    try {
        ingest(only_bad, dir, 1);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::kEmptyCorpus);
    }
    fs::remove_all(dir);
}

TEST(Ingest, OutputIndependentOfThreadCount)
{
    const fs::path dir = scratch_dir("threads");
    fixture::write_synthetic_corpus(dir);
    const std::vector<ManifestRow> rows = load_manifest(dir / "manifest.csv");
    std::ostringstream one;
    std::ostringstream many;
    write_corpus(one, ingest(rows, dir, 1).records);
    write_corpus(many, ingest(rows, dir, 8).records);
    EXPECT_EQ(one.str(), many.str());

    std::istringstream back(one.str());
    std::ostringstream again;
    write_corpus(again, read_corpus(back));
    EXPECT_EQ(again.str(), one.str());
    fs::remove_all(dir);
}

TEST(Ingest, BundledCorpusMatchesGenerator)
{
    const fs::path dir = fs::path(VIDMETA_TEST_DATA) / "synthetic";
    const auto files = fixture::synthetic_corpus();
    ASSERT_EQ(files.size(), 30u);
    for (const auto& f : files) {
        const std::string on_disk = slurp(dir / f.name);
        EXPECT_EQ(on_disk, std::string(f.bytes.begin(), f.bytes.end())) << f.name;
    }
    EXPECT_EQ(slurp(dir / "manifest.csv"), fixture::synthetic_manifest(files));
}

TEST(Split, StratifiedHalves)
{
    std::vector<std::string> labels;
    for (int i = 0; i < 7; ++i) labels.push_back("a");
    for (int i = 0; i < 4; ++i) labels.push_back("b");
    for (int i = 0; i < 2; ++i) labels.push_back("c");
    const Split s = stratified_split(labels, 3);
    std::map<std::string, std::pair<int, int>> tv;
    for (std::size_t i : s.train) ++tv[labels[i]].first;
    for (std::size_t i : s.validation) ++tv[labels[i]].second;
    EXPECT_EQ(tv["a"], std::make_pair(4, 3));
    EXPECT_EQ(tv["b"], std::make_pair(2, 2));
    EXPECT_EQ(tv["c"], std::make_pair(1, 1));
    std::set<std::size_t> all(s.train.begin(), s.train.end());
    all.insert(s.validation.begin(), s.validation.end());
    EXPECT_EQ(all.size(), labels.size());
    EXPECT_TRUE(std::is_sorted(s.train.begin(), s.train.end()));
    const Split again = stratified_split(labels, 3);
    EXPECT_EQ(again.validation, s.validation);

    labels.push_back("lonely");
    try {
        stratified_split(labels, 3);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::kClassTooSmall);
    }
}

TEST(Scenario, LabelRules)
{
    ManifestRow r;
    r.brand = "Apple";
    EXPECT_EQ(scenario_label(Scenario::kBrand, r), "Apple");
    EXPECT_EQ(scenario_label(Scenario::kTool, r), "native");
    EXPECT_EQ(scenario_label(Scenario::kSocial, r), "other");
    EXPECT_EQ(scenario_label(Scenario::kManipLocal, r), "pristine");
    EXPECT_EQ(scenario_label(Scenario::kManipSocial, r), std::nullopt);
    r.social = "youtube";
    r.edited = true;
    EXPECT_EQ(scenario_label(Scenario::kManipSocial, r), "edited");
    EXPECT_EQ(scenario_label(Scenario::kManipLocal, r), std::nullopt);
    r.brand.clear();
    EXPECT_EQ(scenario_label(Scenario::kBrand, r), std::nullopt);
}

TEST(Scenario, ConfigKeys)
{
    ScenarioConfig c;
    c.set("knn-weighting", "uniform");
    c.set("alpha", "12");
    c.set("scenario", "manip-social");
    EXPECT_EQ(c.pipeline.alpha, 12);
    EXPECT_EQ(c.scenario, Scenario::kManipSocial);
    EXPECT_EQ(c.pipeline.knn_weighting, KnnWeighting::kUniform);
    EXPECT_THROW(c.set("no_such_key", "1"), Error);
    EXPECT_THROW(c.set("alpha", "many"), Error);

    const fs::path dir = scratch_dir("config");
    {
        std::ofstream f(dir / "run.conf");
        f << "# comment\nscenario = tool\nbeta = 7  # trailing\n\nlambda=3\n";
    }
    const ScenarioConfig loaded = load_config(dir / "run.conf");
    EXPECT_EQ(loaded.scenario, Scenario::kTool);
    EXPECT_EQ(loaded.pipeline.beta, 7);
    EXPECT_EQ(loaded.pipeline.lambda, 3);
    fs::remove_all(dir);
}

TEST(Scenario, MarkerCorpusIsSeparated)
{
    ScenarioConfig config;
    config.scenario = Scenario::kBrand;
    const ScenarioReport r = run_scenario(config, marker_corpus(4, 8, 11));
    EXPECT_EQ(r.classifier, "lda-knn");
    ASSERT_EQ(r.metrics.labels.size(), 4u);
    for (double f : r.metrics.f1) {
        EXPECT_EQ(f, 1.0);
    }
    EXPECT_EQ(r.counts.at("A").train, 4);
    EXPECT_EQ(r.counts.at("A").validation, 4);
    ASSERT_TRUE(r.svg.has_value());
    EXPECT_EQ(count_of(*r.svg, "class=\"legend-entry\""), 4u);

    const PipelineModel back = PipelineModel::from_json(r.model.to_json());
    std::vector<StringSet> samples;
    for (const CorpusRecord& c : marker_corpus(4, 8, 12)) {
        samples.push_back(c.parsed());
    }
    EXPECT_EQ(pipeline_predict(back, samples), pipeline_predict(r.model, samples));
}

TEST(Scenario, NothingLeaksFromValidation)
{
    std::vector<CorpusRecord> corpus = marker_corpus(3, 6, 13);
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        corpus[i].strings.push_back("moov/leak_" + std::to_string(i));
    }
    ScenarioConfig config;
    const ScenarioReport first = run_scenario(config, corpus);
    std::int64_t train_total = 0;
    for (const auto& [label, c] : first.counts) {
        train_total += c.train;
    }
    const auto& cat1 = first.model.vocabulary.cat1();
    std::set<std::string> vocab(cat1.begin(), cat1.end());
    std::int64_t leaks = 0;
    for (const std::string& s : cat1) {
        leaks += s.rfind("moov/leak_", 0) == 0 ? 1 : 0;
    }
    EXPECT_EQ(leaks, train_total);

    // Strings only validation files carry must not influence anything.
    for (CorpusRecord& r : corpus) {
        r.strings.erase(std::remove_if(r.strings.begin(), r.strings.end(),
                                       [&](const std::string& s) {
                                           return s.rfind("moov/leak_", 0) == 0 && vocab.count(s) == 0;
                                       }),
                        r.strings.end());
    }
    const ScenarioReport second = run_scenario(config, corpus);
    EXPECT_EQ(second.model.vocabulary.hash(), first.model.vocabulary.hash());
    EXPECT_EQ(second.model.mask.retained, first.model.mask.retained);
    EXPECT_EQ(second.metrics.to_json(), first.metrics.to_json());
}

TEST(Scenario, LeaveOneModelOut)
{
    std::vector<CorpusRecord> corpus;
    for (const std::string model : {"m1", "m2", "m3"}) {
        for (int i = 0; i < 6; ++i) {
            const bool edited = i >= 3;
            std::vector<std::string> s = {"moov", "moov/mvhd", "moov/udta/@model=" + model};
            if (edited) {
                s.push_back("moov/udta/@tool=Lavf");
            }
            corpus.push_back(record(model + std::to_string(i), "X", model, s, edited));
        }
    }
    ScenarioConfig config;
    config.scenario = Scenario::kManipLocal;
    const LomoReport r = run_leave_one_model_out(config, corpus);
    EXPECT_EQ(r.folds.size(), 3u);
    EXPECT_EQ(r.mean_balanced_accuracy, 1.0);

    corpus.resize(6);
    EXPECT_THROW(run_leave_one_model_out(config, corpus), Error);
    config.scenario = Scenario::kBrand;
    EXPECT_THROW(run_leave_one_model_out(config, corpus), Error);
}

TEST(Scenario, BlindDevice)
{
    const std::vector<CorpusRecord> corpus = marker_corpus(3, 8, 14);
    ScenarioConfig config;
    const BlindReport r = run_blind_device(config, corpus, "A2");
    EXPECT_EQ(r.true_brand, "A");
    EXPECT_EQ(r.holdout_samples, 4u);
    EXPECT_EQ(r.fraction_in_true_region, 1.0);
    EXPECT_EQ(count_of(r.svg, "marker holdout"), 4u);

    // A holdout wearing another vendor's boxes lands in that vendor's region.
    std::vector<CorpusRecord> adversarial = corpus;
    for (CorpusRecord& c : adversarial) {
        if (c.labels.model_id == "A2") {
            std::replace(c.strings.begin(), c.strings.end(), std::string("moov/vendor_A"),
                         std::string("moov/vendor_B"));
        }
    }
    const BlindReport a = run_blind_device(config, adversarial, "A2");
    EXPECT_EQ(a.fraction_in_true_region, 0.0);
    EXPECT_EQ(a.predicted.at("B"), 4);

    try {
        run_blind_device(config, corpus, "Z9");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::kUnknownDeviceId);
    }
}

TEST(Svg, SinglePointAndDeterminism)
{
    PlotInput in;
    in.points = Eigen::MatrixXd::Zero(1, 2);
    in.labels = {"only"};
    const std::string svg = emit_svg(in);
    EXPECT_EQ(svg.rfind("<?xml", 0), 0u);
    EXPECT_NE(svg.find("<svg "), std::string::npos);
    EXPECT_NE(svg.find("</svg>"), std::string::npos);
    EXPECT_EQ(count_of(svg, "class=\"marker train\""), 1u);
    EXPECT_EQ(svg.find("nan"), std::string::npos);
    EXPECT_EQ(emit_svg(in), svg);
}

TEST(Svg, ClassesMarkersAndRegions)
{
    PlotInput in;
    in.points.resize(6, 2);
    in.points << 0, 0, 1, 1, 2, 0, 3, 1, 4, 0, 5, 1;
    in.labels = {"a", "b", "c", "a", "b", "c<&>"};
    in.markers = {MarkerKind::kTrain, MarkerKind::kTrain, MarkerKind::kTrain,
                  MarkerKind::kValidation, MarkerKind::kValidation, MarkerKind::kHoldout};
    in.grid = decision_grid([](const Eigen::RowVectorXd& q) { return q(0) < 2.5 ? std::string("a") : std::string("b"); },
                            Bounds2d::around(in.points), 4, 3);
    const std::string svg = emit_svg(in);
    EXPECT_EQ(count_of(svg, "class=\"legend-entry\""), 4u);
    EXPECT_EQ(count_of(svg, "class=\"marker train\""), 3u);
    EXPECT_EQ(count_of(svg, "class=\"marker validation\""), 2u);
    EXPECT_EQ(count_of(svg, "class=\"marker holdout\""), 1u);
    EXPECT_NE(svg.find("c&lt;&amp;&gt;"), std::string::npos);
    in.labels.pop_back();
    EXPECT_THROW(emit_svg(in), Error);
}

TEST(Cli, ExitCodes)
{
    const fs::path dir = scratch_dir("cli");
    {
        std::ofstream f(dir / "text.mp4");
        f << "not a movie at all";
    }
    const std::string data = std::string(VIDMETA_TEST_DATA) + "/synthetic";
    EXPECT_EQ(run_cli("--help"), 0);
    EXPECT_EQ(run_cli("no-such-command"), 2);
    EXPECT_EQ(run_cli("dump-tree " + (dir / "missing.mp4").string()), 2);
    EXPECT_EQ(run_cli("dump-tree " + (dir / "text.mp4").string()), 2);
    EXPECT_EQ(run_cli("dump-tree " + data + "/apple-1_0.mov"), 0);
    EXPECT_EQ(run_cli("extract " + data + "/samsung-1_0.mp4"), 0);
    EXPECT_EQ(run_cli("ingest --manifest " + data + "/manifest.csv -o " + (dir / "c.jsonl").string()), 0);
    EXPECT_EQ(run_cli("run --corpus " + (dir / "c.jsonl").string() + " --scenario tool --out-dir " +
                      (dir / "out").string()),
              0);
    EXPECT_TRUE(fs::exists(dir / "out" / "metrics.json"));
    EXPECT_TRUE(fs::exists(dir / "out" / "model.json"));
    EXPECT_EQ(run_cli("predict --model " + (dir / "out" / "model.json").string() + " " + data +
                      "/huawei-2_3.mp4"),
              0);
    EXPECT_EQ(run_cli("run --corpus " + (dir / "c.jsonl").string() + " --scenario blind-device --holdout nope"),
              2);
    EXPECT_EQ(run_cli("run --corpus " + (dir / "c.jsonl").string() + " --alpha zero"), 2);
    fs::remove_all(dir);
}
