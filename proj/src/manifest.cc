#include "vidmeta/manifest.h"

#include "vidmeta/error.h"

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <istream>
#include <iterator>

namespace vidmeta {
namespace {

    std::vector<std::vector<std::string>> parse_csv(const std::string& text)
    {
        std::vector<std::vector<std::string>> records;
        std::vector<std::string> fields;
        std::string field;
        bool quoted = false;
        bool any = false;
        for (std::size_t i = 0; i < text.size(); ++i) {
            const char c = text[i];
            if (quoted) {
                if (c == '"' && i + 1 < text.size() && text[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else if (c == '"') {
                    quoted = false;
                } else {
                    field.push_back(c);
                }
                continue;
            }
            if (c == '"') {
                quoted = true;
                any = true;
            } else if (c == ',') {
                fields.push_back(std::move(field));
                field.clear();
                any = true;
            } else if (c == '\n' || c == '\r') {
                if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') {
                    ++i;
                }
                if (any || !field.empty()) {
                    fields.push_back(std::move(field));
                    records.push_back(std::move(fields));
                }
                fields.clear();
                field.clear();
                any = false;
            } else {
                field.push_back(c);
                any = true;
            }
        }
        if (quoted) {
            throw Error(ErrorCode::kInvalidArgument, "manifest: unterminated quoted field");
        }
        if (any || !field.empty()) {
            fields.push_back(std::move(field));
            records.push_back(std::move(fields));
        }
        return records;
    }

    std::string trim(std::string s)
    {
        const auto not_space = [](unsigned char c) { return !std::isspace(c); };
        s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
        s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
        return s;
    }

    std::string lower(std::string s)
    {
        std::transform(s.begin(), s.end(), s.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        return s;
    }

}  // namespace

std::vector<std::string> split_csv_line(const std::string& line)
{
    auto records = parse_csv(line);
    if (records.empty()) {
        return {};
    }
    return records.front();
}

bool parse_edited_flag(const std::string& text)
{
    const std::string t = lower(trim(text));
    if (t == "1" || t == "true" || t == "yes" || t == "edited") {
        return true;
    }
    if (t.empty() || t == "0" || t == "false" || t == "no" || t == "pristine") {
        return false;
    }
    throw Error(ErrorCode::kInvalidArgument, "manifest: bad edited flag '" + text + "'");
}

std::vector<ManifestRow> read_manifest(std::istream& in)
{
    const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    const auto records = parse_csv(text);
    if (records.empty()) {
        throw Error(ErrorCode::kInvalidArgument, "manifest: missing header");
    }
    static constexpr std::array<const char*, 6> kColumns
        = {"path", "brand", "model_id", "tool", "social", "edited"};
    std::array<int, kColumns.size()> pos{};
    pos.fill(-1);
    for (std::size_t c = 0; c < records[0].size(); ++c) {
        const std::string name = lower(trim(records[0][c]));
        for (std::size_t k = 0; k < kColumns.size(); ++k) {
            if (name == kColumns[k]) {
                pos[k] = static_cast<int>(c);
            }
        }
    }
    if (pos[0] < 0) {
        throw Error(ErrorCode::kInvalidArgument, "manifest: no 'path' column");
    }

    std::vector<ManifestRow> rows;
    for (std::size_t r = 1; r < records.size(); ++r) {
        const auto& rec = records[r];
        auto get = [&](std::size_t k) -> std::string {
            if (pos[k] < 0 || static_cast<std::size_t>(pos[k]) >= rec.size()) {
                return {};
            }
            return trim(rec[static_cast<std::size_t>(pos[k])]);
        };
        ManifestRow row;
        row.path = get(0);
        if (row.path.empty()) {
            continue;
        }
        row.brand = get(1);
        row.model_id = get(2);
        row.tool = get(3);
        row.social = get(4);
        row.edited = parse_edited_flag(get(5));
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<ManifestRow> load_manifest(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::kIo, "cannot open manifest " + path.string());
    }
    return read_manifest(in);
}

}  // namespace vidmeta
