#include "vidmeta/corpus.h"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <thread>

#include "json.hpp"

namespace vidmeta {

std::vector<std::uint8_t> read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::kIo, "cannot open " + path.string());
    }
    std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in),
                                    std::istreambuf_iterator<char>()};
    if (in.bad()) {
        throw Error(ErrorCode::kIo, "read failed for " + path.string());
    }
    return bytes;
}

std::vector<MetadataString> extract_strings(ByteSpan bytes, const ExclusionList& exclusions,
                                            std::vector<Warning>* warnings)
{
    ParseReport report = parse_tree(bytes);
    if (warnings) {
        warnings->insert(warnings->end(), report.warnings.begin(), report.warnings.end());
    }
    return serialize(refine(report, exclusions, warnings));
}

std::vector<MetadataString> extract_file(const std::filesystem::path& path,
                                         const ExclusionList& exclusions,
                                         std::vector<Warning>* warnings)
{
    const std::vector<std::uint8_t> bytes = read_file(path);
    return extract_strings(bytes, exclusions, warnings);
}

std::vector<MetadataString> CorpusRecord::parsed() const
{
    std::vector<MetadataString> out;
    out.reserve(strings.size());
    for (const std::string& s : strings) {
        out.push_back(parse_string(s));
    }
    return out;
}

IngestReport ingest(const std::vector<ManifestRow>& manifest, const std::filesystem::path& root,
                    unsigned threads, const ExclusionList& exclusions)
{
    struct Outcome {
        std::optional<CorpusRecord> record;
        std::string error;
    };
    std::vector<Outcome> outcomes(manifest.size());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < manifest.size(); i = next++) {
            const ManifestRow& row = manifest[i];
            std::filesystem::path p(row.path);
            if (p.is_relative()) {
                p = root / p;
            }
            try {
                CorpusRecord rec;
                rec.file = row.path;
                rec.labels = row;
                for (const MetadataString& s : extract_file(p, exclusions)) {
                    rec.strings.push_back(s.text);
                }
                outcomes[i].record = std::move(rec);
            } catch (const std::exception& e) {
                outcomes[i].error = e.what();
            }
        }
    };

    if (threads == 0) {
        threads = std::max(1u, std::thread::hardware_concurrency());
    }
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(1, manifest.size())));
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < threads; ++t) {
        pool.emplace_back(work);
    }
    work();
    for (std::thread& t : pool) {
        t.join();
    }

    IngestReport report;
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        if (outcomes[i].record) {
            report.records.push_back(std::move(*outcomes[i].record));
        } else {
            report.skipped.push_back({manifest[i].path, outcomes[i].error});
        }
    }
    if (report.records.empty()) {
        throw Error(ErrorCode::kEmptyCorpus,
                    "no file could be ingested (" + std::to_string(report.skipped.size())
                        + " skipped)");
    }
    return report;
}

void write_corpus(std::ostream& out, const std::vector<CorpusRecord>& records)
{
    for (const CorpusRecord& r : records) {
        const nlohmann::ordered_json j = {
            {"file", r.file},
            {"labels",
             {{"brand", r.labels.brand},
              {"model_id", r.labels.model_id},
              {"tool", r.labels.tool},
              {"social", r.labels.social},
              {"edited", r.labels.edited}}},
            {"strings", r.strings},
        };
        out << j.dump() << '\n';
    }
}

std::vector<CorpusRecord> read_corpus(std::istream& in)
{
    std::vector<CorpusRecord> records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        try {
            const auto j = nlohmann::json::parse(line);
            CorpusRecord r;
            r.file = j.at("file").get<std::string>();
            const auto& l = j.at("labels");
            r.labels.path = r.file;
            r.labels.brand = l.value("brand", std::string());
            r.labels.model_id = l.value("model_id", std::string());
            r.labels.tool = l.value("tool", std::string());
            r.labels.social = l.value("social", std::string());
            r.labels.edited = l.value("edited", false);
            r.strings = j.at("strings").get<std::vector<std::string>>();
            records.push_back(std::move(r));
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorCode::kInvalidArgument,
                        "corpus line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    if (records.empty()) {
        throw Error(ErrorCode::kEmptyCorpus, "corpus has no records");
    }
    return records;
}

std::vector<CorpusRecord> load_corpus(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::kIo, "cannot open corpus " + path.string());
    }
    return read_corpus(in);
}

}  // namespace vidmeta
