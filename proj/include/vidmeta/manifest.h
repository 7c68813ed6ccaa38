#pragma once

// Dataset manifest: CSV with a header naming the columns
// path,brand,model_id,tool,social,edited (any order, extra columns ignored).

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace vidmeta {

struct ManifestRow {
    std::string path;
    std::string brand;
    std::string model_id;
    std::string tool;
    std::string social;
    bool edited = false;
};

// One CSV record with RFC 4180 quoting.
std::vector<std::string> split_csv_line(const std::string& line);

// Accepts 1/0, true/false, yes/no, edited/pristine and empty (pristine).
bool parse_edited_flag(const std::string& text);

std::vector<ManifestRow> read_manifest(std::istream& in);
std::vector<ManifestRow> load_manifest(const std::filesystem::path& path);

}  // namespace vidmeta
