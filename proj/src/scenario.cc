#include "vidmeta/scenario.h"

#include "vidmeta/decision_grid.h"
#include "vidmeta/error.h"
#include "vidmeta/json_matrix.h"
#include "vidmeta/random.h"
#include "vidmeta/svg.h"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace vidmeta {
namespace {

    const std::string kEdited = "edited";
    const std::string kPristine = "pristine";

    std::string trim(const std::string& s)
    {
        const auto first = s.find_first_not_of(" \t\r\n");
        if (first == std::string::npos) {
            return {};
        }
        return s.substr(first, s.find_last_not_of(" \t\r\n") - first + 1);
    }

    template <typename T>
    T parse_integer(const std::string& key, const std::string& value)
    {
        try {
            std::size_t used = 0;
            const long long v = std::stoll(value, &used);
            if (used != value.size() || v < 0) {
                throw std::invalid_argument(value);
            }
            return static_cast<T>(v);
        } catch (const std::logic_error&) {
            throw Error(ErrorCode::kInvalidArgument, key + ": expected a non-negative integer, got '"
                                                         + value + "'");
        }
    }

    struct Labelled {
        std::vector<std::size_t> rows;  // corpus indices
        std::vector<std::string> labels;
        std::size_t excluded = 0;
    };

    Labelled collect(Scenario s, const std::vector<CorpusRecord>& corpus)
    {
        Labelled out;
        for (std::size_t i = 0; i < corpus.size(); ++i) {
            if (auto label = scenario_label(s, corpus[i].labels)) {
                out.rows.push_back(i);
                out.labels.push_back(std::move(*label));
            } else {
                ++out.excluded;
            }
        }
        return out;
    }

    std::vector<StringSet> strings_of(const std::vector<CorpusRecord>& corpus,
                                      const std::vector<std::size_t>& rows)
    {
        std::vector<StringSet> out;
        out.reserve(rows.size());
        for (std::size_t r : rows) {
            out.push_back(corpus[r].parsed());
        }
        return out;
    }

    template <typename T>
    std::vector<T> pick(const std::vector<T>& v, const std::vector<std::size_t>& idx)
    {
        std::vector<T> out;
        out.reserve(idx.size());
        for (std::size_t i : idx) {
            out.push_back(v[i]);
        }
        return out;
    }

    std::optional<std::string> positive_for(Scenario s)
    {
        if (s == Scenario::kManipSocial || s == Scenario::kManipLocal) {
            return kEdited;
        }
        return std::nullopt;
    }

    Eigen::MatrixXd stack_rows(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b)
    {
        Eigen::MatrixXd out(a.rows() + b.rows(), std::max(a.cols(), b.cols()));
        if (a.rows() > 0) {
            out.topRows(a.rows()) = a;
        }
        if (b.rows() > 0) {
            out.bottomRows(b.rows()) = b;
        }
        return out;
    }

    std::string fixed(double v)
    {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.4f", v);
        return buf;
    }

    nlohmann::json hyperparameters(const PipelineModel& m)
    {
        return {{"alpha", m.mask.alpha},
                {"beta", m.mask.beta},
                {"lambda", m.lambda},
                {"seed", m.mask.seed}};
    }

}  // namespace

std::string scenario_name(Scenario s)
{
    switch (s) {
    case Scenario::kBrand: return "brand";
    case Scenario::kTool: return "tool";
    case Scenario::kSocial: return "social";
    case Scenario::kManipSocial: return "manip-social";
    case Scenario::kManipLocal: return "manip-local";
    case Scenario::kBlindDevice: return "blind-device";
    }
    return "brand";
}

Scenario parse_scenario(const std::string& name)
{
    for (Scenario s : {Scenario::kBrand, Scenario::kTool, Scenario::kSocial,
                       Scenario::kManipSocial, Scenario::kManipLocal, Scenario::kBlindDevice}) {
        if (scenario_name(s) == name) {
            return s;
        }
    }
    throw Error(ErrorCode::kInvalidArgument, "unknown scenario: " + name);
}

std::string split_name(SplitKind s)
{
    switch (s) {
    case SplitKind::kAuto: return "auto";
    case SplitKind::kStratifiedHalf: return "stratified-half";
    case SplitKind::kLeaveOneModelOut: return "leave-one-model-out";
    }
    return "auto";
}

SplitKind parse_split(const std::string& name)
{
    if (name == "auto") return SplitKind::kAuto;
    if (name == "stratified-half") return SplitKind::kStratifiedHalf;
    if (name == "leave-one-model-out") return SplitKind::kLeaveOneModelOut;
    throw Error(ErrorCode::kInvalidArgument, "unknown split: " + name);
}

void ScenarioConfig::set(const std::string& raw_key, const std::string& raw_value)
{
    std::string key = trim(raw_key);
    std::replace(key.begin(), key.end(), '-', '_');
    const std::string value = trim(raw_value);
    if (key == "scenario") {
        scenario = parse_scenario(value);
    } else if (key == "split") {
        split = parse_split(value);
    } else if (key == "alpha") {
        pipeline.alpha = parse_integer<int>(key, value);
    } else if (key == "beta") {
        pipeline.beta = parse_integer<int>(key, value);
    } else if (key == "lambda") {
        pipeline.lambda = parse_integer<int>(key, value);
    } else if (key == "seed") {
        pipeline.seed = parse_integer<std::uint64_t>(key, value);
    } else if (key == "classifier") {
        pipeline.classifier = parse_classifier(value);
    } else if (key == "small_clusters") {
        if (value != "keep" && value != "drop") {
            throw Error(ErrorCode::kInvalidArgument, "small_clusters: expected keep or drop");
        }
        pipeline.small_clusters
            = value == "drop" ? SmallClusterPolicy::kDrop : SmallClusterPolicy::kKeepAll;
    } else if (key == "ridge_scale") {
        pipeline.ridge_scale = parse_double(value);
    } else if (key == "knn_weighting") {
        if (value == "inverse") {
            pipeline.knn_weighting = KnnWeighting::kInverse;
        } else if (value == "inverse-square") {
            pipeline.knn_weighting = KnnWeighting::kInverseSquare;
        } else if (value == "uniform") {
            pipeline.knn_weighting = KnnWeighting::kUniform;
        } else {
            throw Error(ErrorCode::kInvalidArgument, "knn_weighting: unknown value " + value);
        }
    } else if (key == "knn_metric") {
        if (value != "euclidean" && value != "manhattan") {
            throw Error(ErrorCode::kInvalidArgument, "knn_metric: unknown value " + value);
        }
        pipeline.knn_metric = value == "manhattan" ? KnnMetric::kManhattan : KnnMetric::kEuclidean;
    } else if (key == "continuous_keys") {
        pipeline.continuous.keys.clear();
        std::stringstream ss(value);
        std::string k;
        while (std::getline(ss, k, ',')) {
            if (!trim(k).empty()) {
                pipeline.continuous.keys.push_back(trim(k));
            }
        }
    } else if (key == "grid" || key == "grid_resolution") {
        grid_resolution = parse_integer<int>(key, value);
    } else if (key == "manifest") {
        manifest = value;
    } else if (key == "corpus") {
        corpus = value;
    } else if (key == "root") {
        root = value;
    } else if (key == "out_dir") {
        out_dir = value;
    } else if (key == "holdout") {
        holdout = value;
    } else {
        throw Error(ErrorCode::kInvalidArgument, "unknown config key: " + raw_key);
    }
}

nlohmann::json ScenarioConfig::to_json() const
{
    return {{"scenario", scenario_name(scenario)},
            {"split", split_name(split)},
            {"alpha", pipeline.alpha},
            {"beta", pipeline.beta},
            {"lambda", pipeline.lambda},
            {"seed", pipeline.seed},
            {"classifier", classifier_name(pipeline.classifier)},
            {"small_clusters",
             pipeline.small_clusters == SmallClusterPolicy::kDrop ? "drop" : "keep"},
            {"grid_resolution", grid_resolution}};
}

ScenarioConfig load_config(const std::filesystem::path& path, ScenarioConfig base)
{
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::kIo, "cannot open config " + path.string());
    }
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) {
            line.erase(hash);
        }
        if (trim(line).empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw Error(ErrorCode::kInvalidArgument,
                        path.string() + ":" + std::to_string(line_no) + ": expected key = value");
        }
        base.set(line.substr(0, eq), line.substr(eq + 1));
    }
    return base;
}

std::optional<std::string> scenario_label(Scenario s, const ManifestRow& row)
{
    switch (s) {
    case Scenario::kBrand:
    case Scenario::kBlindDevice:
        if (row.brand.empty()) {
            return std::nullopt;
        }
        return row.brand;
    case Scenario::kTool:
        return row.tool.empty() ? std::string("native") : row.tool;
    case Scenario::kSocial:
        return row.social.empty() ? std::string("other") : row.social;
    case Scenario::kManipSocial:
        if (row.social.empty()) {
            return std::nullopt;
        }
        return row.edited ? kEdited : kPristine;
    case Scenario::kManipLocal:
        if (!row.social.empty()) {
            return std::nullopt;
        }
        return row.edited ? kEdited : kPristine;
    }
    return std::nullopt;
}

Split stratified_split(const std::vector<std::string>& labels, std::uint64_t seed)
{
    std::map<std::string, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        by_class[labels[i]].push_back(i);
    }
    Split split;
    Rng rng(seed);
    for (auto& [label, idx] : by_class) {
        if (idx.size() < 2) {
            throw Error(ErrorCode::kClassTooSmall,
                        "class '" + label + "' has " + std::to_string(idx.size())
                            + " sample; a 50/50 split needs at least 2");
        }
        rng.shuffle(idx.begin(), idx.end());
        const std::size_t half = idx.size() / 2;
        split.validation.insert(split.validation.end(), idx.begin(),
                                idx.begin() + static_cast<std::ptrdiff_t>(half));
        split.train.insert(split.train.end(), idx.begin() + static_cast<std::ptrdiff_t>(half),
                           idx.end());
    }
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.validation.begin(), split.validation.end());
    return split;
}

ScenarioReport run_scenario(const ScenarioConfig& config, const std::vector<CorpusRecord>& corpus)
{
    if (config.scenario == Scenario::kBlindDevice) {
        throw Error(ErrorCode::kInvalidArgument, "blind-device runs through run_blind_device");
    }
    const Labelled data = collect(config.scenario, corpus);
    if (data.rows.empty()) {
        throw Error(ErrorCode::kEmptyCorpus,
                    "no corpus row carries a " + scenario_name(config.scenario) + " label");
    }
    const Split split = stratified_split(data.labels, config.pipeline.seed);
    const std::vector<std::size_t> train_rows = pick(data.rows, split.train);
    const std::vector<std::size_t> valid_rows = pick(data.rows, split.validation);
    const std::vector<std::string> train_labels = pick(data.labels, split.train);
    const std::vector<std::string> valid_labels = pick(data.labels, split.validation);
    const std::vector<StringSet> train = strings_of(corpus, train_rows);
    const std::vector<StringSet> valid = strings_of(corpus, valid_rows);

    ScenarioReport report;
    report.scenario = scenario_name(config.scenario);
    report.excluded = data.excluded;
    report.model = fit_pipeline(train, train_labels, config.pipeline);
    report.classifier = classifier_name(report.model.classifier);
    report.vocabulary_size = report.model.vocabulary.dim();
    report.selected_features = report.model.mask.retained.size();

    const std::set<std::string> label_set(data.labels.begin(), data.labels.end());
    const std::vector<std::string> label_order(label_set.begin(), label_set.end());
    const std::vector<std::string> predicted = pipeline_predict(report.model, valid);
    report.metrics = evaluate(valid_labels, predicted, positive_for(config.scenario), label_order);
    for (const std::string& l : train_labels) {
        ++report.counts[l].train;
    }
    for (const std::string& l : valid_labels) {
        ++report.counts[l].validation;
    }

    if (report.model.has_projection()) {
        PlotInput plot;
        const Eigen::MatrixXd pt = pipeline_project(report.model, train);
        const Eigen::MatrixXd pv = pipeline_project(report.model, valid);
        plot.points = stack_rows(pt, pv);
        plot.labels = train_labels;
        plot.labels.insert(plot.labels.end(), valid_labels.begin(), valid_labels.end());
        plot.markers.assign(train_labels.size(), MarkerKind::kTrain);
        plot.markers.resize(plot.labels.size(), MarkerKind::kValidation);
        const KnnModel& knn = *report.model.knn;
        plot.grid = decision_grid(
            [&knn](const Eigen::RowVectorXd& p) { return knn_predict(knn, p); },
            Bounds2d::around(plot.points), config.grid_resolution, config.grid_resolution);
        plot.legend = label_order;
        plot.title = report.scenario + " (circles: training, squares: validation)";
        report.svg = emit_svg(plot);
    }
    return report;
}

nlohmann::json ScenarioReport::to_json() const
{
    nlohmann::json counts_json = nlohmann::json::object();
    for (const auto& [label, c] : counts) {
        counts_json[label] = {{"train", c.train}, {"validation", c.validation}};
    }
    return {{"scenario", scenario},
            {"classifier", classifier},
            {"hyperparameters", hyperparameters(model)},
            {"counts", counts_json},
            {"excluded_rows", excluded},
            {"vocabulary_size", vocabulary_size},
            {"selected_features", selected_features},
            {"metrics", metrics.to_json()}};
}

BlindReport run_blind_device(const ScenarioConfig& config, const std::vector<CorpusRecord>& corpus,
                             const std::string& holdout)
{
    const Labelled data = collect(Scenario::kBrand, corpus);
    std::vector<std::size_t> train_rows;
    std::vector<std::size_t> hold_rows;
    std::vector<std::string> train_labels;
    BlindReport report;
    report.holdout = holdout;
    for (std::size_t i = 0; i < data.rows.size(); ++i) {
        const ManifestRow& row = corpus[data.rows[i]].labels;
        if (row.model_id == holdout) {
            hold_rows.push_back(data.rows[i]);
            report.true_brand = data.labels[i];
        } else {
            train_rows.push_back(data.rows[i]);
            train_labels.push_back(data.labels[i]);
        }
    }
    if (hold_rows.empty()) {
        throw Error(ErrorCode::kUnknownDeviceId, "no brand-labelled rows for device '" + holdout + "'");
    }
    for (const std::string& l : train_labels) {
        ++report.train_counts[l];
    }

    PipelineOptions options = config.pipeline;
    options.classifier = ClassifierKind::kLdaKnn;
    const std::vector<StringSet> train = strings_of(corpus, train_rows);
    const std::vector<StringSet> held = strings_of(corpus, hold_rows);
    report.model = fit_pipeline(train, train_labels, options);
    report.holdout_samples = hold_rows.size();

    const Eigen::MatrixXd pt = pipeline_project(report.model, train);
    const Eigen::MatrixXd ph = pipeline_project(report.model, held);
    const std::vector<std::string> predicted = knn_predict(*report.model.knn, ph);
    std::size_t hits = 0;
    for (const std::string& p : predicted) {
        ++report.predicted[p];
        hits += p == report.true_brand ? 1 : 0;
    }
    report.fraction_in_true_region
        = static_cast<double>(hits) / static_cast<double>(predicted.size());

    PlotInput plot;
    plot.points = stack_rows(pt, ph);
    plot.labels = train_labels;
    plot.labels.insert(plot.labels.end(), hold_rows.size(), report.true_brand);
    plot.markers.assign(train_labels.size(), MarkerKind::kTrain);
    plot.markers.resize(plot.labels.size(), MarkerKind::kHoldout);
    const KnnModel& knn = *report.model.knn;
    plot.grid = decision_grid([&knn](const Eigen::RowVectorXd& p) { return knn_predict(knn, p); },
                              Bounds2d::around(plot.points), config.grid_resolution,
                              config.grid_resolution);
    const std::set<std::string> brands(train_labels.begin(), train_labels.end());
    plot.legend.assign(brands.begin(), brands.end());
    plot.title = "blind device " + holdout + " (hollow markers)";
    report.svg = emit_svg(plot);
    return report;
}

nlohmann::json BlindReport::to_json() const
{
    return {{"scenario", "blind-device"},
            {"holdout", holdout},
            {"true_brand", true_brand},
            {"hyperparameters", hyperparameters(model)},
            {"holdout_samples", holdout_samples},
            {"fraction_in_true_region", fraction_in_true_region},
            {"predicted", predicted},
            {"train_counts", train_counts}};
}

LomoReport run_leave_one_model_out(const ScenarioConfig& config,
                                   const std::vector<CorpusRecord>& corpus)
{
    if (config.scenario != Scenario::kManipLocal && config.scenario != Scenario::kManipSocial) {
        throw Error(ErrorCode::kInvalidArgument,
                    "leave-one-model-out needs edited/pristine labels (manip-local or manip-social)");
    }
    const Labelled data = collect(config.scenario, corpus);
    std::map<std::string, std::set<std::string>> models_of_brand;
    for (std::size_t r : data.rows) {
        const ManifestRow& row = corpus[r].labels;
        if (!row.model_id.empty()) {
            models_of_brand[row.brand].insert(row.model_id);
        }
    }
    LomoReport report;
    report.scenario = scenario_name(config.scenario);
    std::set<std::string> models;
    std::set<std::string> discarded;
    for (const auto& [brand, ms] : models_of_brand) {
        if (ms.size() == 1 && models_of_brand.size() > 1) {
            discarded.insert(*ms.begin());
        } else {
            models.insert(ms.begin(), ms.end());
        }
    }
    report.discarded.assign(discarded.begin(), discarded.end());
    if (models.size() < 2) {
        throw Error(ErrorCode::kInvalidArgument,
                    "leave-one-model-out needs at least two device models, found "
                        + std::to_string(models.size()));
    }

    std::vector<std::size_t> usable;
    std::vector<std::string> usable_labels;
    for (std::size_t i = 0; i < data.rows.size(); ++i) {
        if (discarded.count(corpus[data.rows[i]].labels.model_id) == 0) {
            usable.push_back(data.rows[i]);
            usable_labels.push_back(data.labels[i]);
        }
    }
    const std::vector<StringSet> all = strings_of(corpus, usable);
    double sum = 0.0;
    for (const std::string& model_id : models) {
        std::vector<std::size_t> tr;
        std::vector<std::size_t> te;
        for (std::size_t i = 0; i < usable.size(); ++i) {
            (corpus[usable[i]].labels.model_id == model_id ? te : tr).push_back(i);
        }
        const std::vector<std::string> tr_labels = pick(usable_labels, tr);
        const std::set<std::string> present(tr_labels.begin(), tr_labels.end());
        if (present.size() < 2) {
            report.skipped.push_back(
                {model_id, "ClassMissing: training folds lack "
                               + std::string(present.count(kEdited) ? kPristine : kEdited)
                               + " samples"});
            continue;
        }
        const PipelineModel m = fit_pipeline(pick(all, tr), tr_labels, config.pipeline);
        const std::vector<std::string> te_labels = pick(usable_labels, te);
        const Metrics metrics = evaluate(te_labels, pipeline_predict(m, pick(all, te)), kEdited,
                                         std::vector<std::string>{kEdited, kPristine});
        report.folds.push_back({model_id, te.size(), metrics.balanced_accuracy});
        sum += metrics.balanced_accuracy;
    }
    if (report.folds.empty()) {
        throw Error(ErrorCode::kClassMissing, "every leave-one-model-out fold was skipped");
    }
    report.mean_balanced_accuracy = sum / static_cast<double>(report.folds.size());
    return report;
}

nlohmann::json LomoReport::to_json() const
{
    nlohmann::json folds_json = nlohmann::json::array();
    for (const FoldResult& f : folds) {
        folds_json.push_back({{"model_id", f.model_id},
                              {"test_samples", f.test_samples},
                              {"balanced_accuracy", f.balanced_accuracy}});
    }
    nlohmann::json skipped_json = nlohmann::json::array();
    for (const SkippedFold& s : skipped) {
        skipped_json.push_back({{"model_id", s.model_id}, {"reason", s.reason}});
    }
    return {{"scenario", scenario},
            {"split", "leave-one-model-out"},
            {"folds", folds_json},
            {"skipped_folds", skipped_json},
            {"discarded_models", discarded},
            {"mean_balanced_accuracy", mean_balanced_accuracy}};
}

std::string format_report(const ScenarioReport& r)
{
    std::ostringstream o;
    o << "scenario: " << r.scenario << "  classifier: " << r.classifier
      << "  features: " << r.selected_features << "/" << r.vocabulary_size << '\n';
    char line[256];
    std::snprintf(line, sizeof(line), "%-24s %6s %6s %9s %9s %9s\n", "class", "train", "valid",
                  "precision", "recall", "f1");
    o << line;
    for (std::size_t i = 0; i < r.metrics.labels.size(); ++i) {
        const std::string& l = r.metrics.labels[i];
        const auto it = r.counts.find(l);
        const ClassCounts c = it == r.counts.end() ? ClassCounts{} : it->second;
        std::snprintf(line, sizeof(line), "%-24s %6lld %6lld %9s %9s %9s\n", l.c_str(),
                      static_cast<long long>(c.train), static_cast<long long>(c.validation),
                      fixed(r.metrics.precision[i]).c_str(), fixed(r.metrics.recall[i]).c_str(),
                      fixed(r.metrics.f1[i]).c_str());
        o << line;
    }
    o << "accuracy " << fixed(r.metrics.accuracy) << "  balanced accuracy "
      << fixed(r.metrics.balanced_accuracy) << "  mean f1 " << fixed(r.metrics.mean_f1());
    if (r.metrics.tpr && r.metrics.tnr) {
        o << "  TPR " << fixed(*r.metrics.tpr) << "  TNR " << fixed(*r.metrics.tnr) << " (positive: "
          << *r.metrics.positive_label << ")";
    }
    o << '\n';
    if (r.excluded > 0) {
        o << r.excluded << " corpus rows carry no label for this scenario\n";
    }
    return o.str();
}

std::string format_report(const BlindReport& r)
{
    std::ostringstream o;
    o << "blind device " << r.holdout << " (brand " << r.true_brand << "): "
      << r.holdout_samples << " samples, " << fixed(r.fraction_in_true_region)
      << " inside the true brand's region\n";
    for (const auto& [label, n] : r.predicted) {
        o << "  predicted " << label << ": " << n << '\n';
    }
    return o.str();
}

std::string format_report(const LomoReport& r)
{
    std::ostringstream o;
    o << "leave-one-model-out (" << r.scenario << "): " << r.folds.size() << " folds\n";
    for (const FoldResult& f : r.folds) {
        o << "  " << f.model_id << "  n=" << f.test_samples << "  balanced accuracy "
          << fixed(f.balanced_accuracy) << '\n';
    }
    for (const SkippedFold& s : r.skipped) {
        o << "  skipped " << s.model_id << ": " << s.reason << '\n';
    }
    for (const std::string& d : r.discarded) {
        o << "  discarded " << d << " (only model of its brand)\n";
    }
    o << "mean balanced accuracy " << fixed(r.mean_balanced_accuracy) << '\n';
    return o.str();
}

}  // namespace vidmeta
