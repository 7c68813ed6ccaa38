#pragma once

// Per-file extraction and the JSON Lines corpus built from a manifest.

#include "vidmeta/bmff.h"
#include "vidmeta/error.h"
#include "vidmeta/manifest.h"
#include "vidmeta/refine.h"
#include "vidmeta/string_codec.h"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace vidmeta {

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);

// parse_tree -> refine -> serialize.
std::vector<MetadataString> extract_strings(ByteSpan bytes,
                                            const ExclusionList& exclusions
                                            = ExclusionList::defaults(),
                                            std::vector<Warning>* warnings = nullptr);
std::vector<MetadataString> extract_file(const std::filesystem::path& path,
                                         const ExclusionList& exclusions
                                         = ExclusionList::defaults(),
                                         std::vector<Warning>* warnings = nullptr);

struct CorpusRecord {
    std::string file;  // path as written in the manifest
    ManifestRow labels;
    std::vector<std::string> strings;

    std::vector<MetadataString> parsed() const;
};

struct SkippedFile {
    std::string file;
    std::string reason;
};

struct IngestReport {
    std::vector<CorpusRecord> records;  // manifest order
    std::vector<SkippedFile> skipped;
};

// Relative manifest paths resolve against `root`. Files are processed on
// `threads` workers (0 = hardware concurrency); failures are skipped and
// reported. Throws EmptyCorpus when nothing could be extracted.
IngestReport ingest(const std::vector<ManifestRow>& manifest, const std::filesystem::path& root,
                    unsigned threads = 0,
                    const ExclusionList& exclusions = ExclusionList::defaults());

void write_corpus(std::ostream& out, const std::vector<CorpusRecord>& records);
std::vector<CorpusRecord> read_corpus(std::istream& in);
std::vector<CorpusRecord> load_corpus(const std::filesystem::path& path);

}  // namespace vidmeta
