#include "vidmeta/vocabulary.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <optional>
#include <ostream>
#include <set>

namespace vidmeta {
namespace {

    std::optional<double> parse_number(const std::string& escaped)
    {
        const std::string text = unescape(escaped);
        if (text.empty()) {
            return std::nullopt;
        }
        double v = 0.0;
        const char* first = text.data();
        const char* last = text.data() + text.size();
        if (*first == '+') {
            ++first;
        }
        auto [ptr, ec] = std::from_chars(first, last, v);
        if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
            return std::nullopt;
        }
        return v;
    }

    std::string csv_field(const std::string& s)
    {
        if (s.find_first_of(",\"\n\r") == std::string::npos) {
            return s;
        }
        std::string out = "\"";
        for (char c : s) {
            if (c == '"') {
                out.push_back('"');
            }
            out.push_back(c);
        }
        out.push_back('"');
        return out;
    }

    std::string format_number(double v)
    {
        char buf[64];
        auto res = std::to_chars(buf, buf + sizeof(buf), v);
        return std::string(buf, res.ptr);
    }

}  // namespace

ContinuousKeyList ContinuousKeyList::defaults()
{
    return {{"duration", "timescale", "width", "height", "avgBitrate", "maxBitrate",
             "creation_time", "modification_time", "entry_count"}};
}

bool ContinuousKeyList::matches(const MetadataString& s) const
{
    if (s.category != StringCategory::kKeyValue || !s.key) {
        return false;
    }
    for (const std::string& k : keys) {
        if (k.find("/@") != std::string::npos) {
            if (k == s.path_key()) {
                return true;
            }
        } else if (k == *s.key) {
            return true;
        }
    }
    return false;
}

std::int64_t Vocabulary::index_of_cat1(const std::string& text) const
{
    auto it = cat1_index_.find(text);
    return it == cat1_index_.end() ? -1 : it->second;
}

std::int64_t Vocabulary::index_of_cat2d(const std::string& text) const
{
    auto it = cat2d_index_.find(text);
    return it == cat2d_index_.end() ? -1 : it->second;
}

std::int64_t Vocabulary::index_of_cat2c(const std::string& path_key) const
{
    auto it = cat2c_index_.find(path_key);
    return it == cat2c_index_.end() ? -1 : it->second;
}

std::vector<std::string> Vocabulary::entry_texts() const
{
    std::vector<std::string> out;
    out.reserve(dim());
    out.insert(out.end(), cat1_.begin(), cat1_.end());
    out.insert(out.end(), cat2d_.begin(), cat2d_.end());
    out.insert(out.end(), cat2c_.begin(), cat2c_.end());
    return out;
}

std::uint64_t Vocabulary::hash() const
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](std::string_view s) {
        for (char c : s) {
            h ^= static_cast<unsigned char>(c);
            h *= 0x100000001b3ULL;
        }
        h ^= 0xFF;  // entry separator; 0xFF never occurs in escaped text
        h *= 0x100000001b3ULL;
    };
    for (const auto* list : {&cat1_, &cat2d_, &cat2c_}) {
        for (const std::string& s : *list) {
            mix(s);
        }
        mix("\x1E");
    }
    return h;
}

void Vocabulary::rebuild_index()
{
    cat1_index_.clear();
    cat2d_index_.clear();
    cat2c_index_.clear();
    std::int64_t pos = 0;
    for (const std::string& s : cat1_) {
        cat1_index_.emplace(s, pos++);
    }
    for (const std::string& s : cat2d_) {
        cat2d_index_.emplace(s, pos++);
    }
    for (const std::string& s : cat2c_) {
        cat2c_index_.emplace(s, pos++);
    }
}

nlohmann::json Vocabulary::to_json() const
{
    return {
        {"cat1", cat1_},
        {"cat2d", cat2d_},
        {"cat2c_keys", cat2c_},
        {"continuous_keys", continuous_.keys},
        {"dim", dim()},
        {"hash", hash()},
    };
}

Vocabulary Vocabulary::from_json(const nlohmann::json& j)
{
    Vocabulary v;
    try {
        v.cat1_ = j.at("cat1").get<std::vector<std::string>>();
        v.cat2d_ = j.at("cat2d").get<std::vector<std::string>>();
        v.cat2c_ = j.at("cat2c_keys").get<std::vector<std::string>>();
        v.continuous_.keys = j.at("continuous_keys").get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::kInvalidArgument, std::string("vocabulary JSON: ") + e.what());
    }
    v.rebuild_index();
    if (j.contains("hash") && j.at("hash").get<std::uint64_t>() != v.hash()) {
        throw Error(ErrorCode::kInvalidArgument, "vocabulary hash mismatch");
    }
    return v;
}

Vocabulary build_vocabulary(std::span<const std::vector<MetadataString>> corpus,
                            const ContinuousKeyList& continuous)
{
    std::set<std::string> cat1;
    std::set<std::string> cat2d;
    std::set<std::string> cat2c;
    for (const auto& strings : corpus) {
        for (const MetadataString& s : strings) {
            if (s.category == StringCategory::kNodePresence) {
                cat1.insert(s.text);
            } else if (continuous.matches(s)) {
                cat2c.insert(s.path_key());
            } else {
                cat2d.insert(s.text);
            }
        }
    }
    Vocabulary v;
    v.cat1_.assign(cat1.begin(), cat1.end());
    v.cat2d_.assign(cat2d.begin(), cat2d.end());
    v.cat2c_.assign(cat2c.begin(), cat2c.end());
    v.continuous_ = continuous;
    v.rebuild_index();
    return v;
}

FeatureVector vectorize(std::span<const MetadataString> strings, const Vocabulary& vocab,
                        std::vector<std::string>* warnings)
{
    FeatureVector v;
    v.values.assign(vocab.dim(), 0.0);
    for (const MetadataString& s : strings) {
        if (s.category == StringCategory::kNodePresence) {
            const std::int64_t i = vocab.index_of_cat1(s.text);
            if (i >= 0) {
                v.values[static_cast<std::size_t>(i)] += 1.0;
            }
            continue;
        }
        const std::int64_t c = vocab.index_of_cat2c(s.path_key());
        if (c >= 0) {
            const auto value = parse_number(s.value_text.value_or(""));
            if (value) {
                v.values[static_cast<std::size_t>(c)] = *value;
            } else if (warnings) {
                warnings->push_back("NonNumericContinuousValue: " + s.text);
            }
            continue;
        }
        const std::int64_t d = vocab.index_of_cat2d(s.text);
        if (d >= 0) {
            v.values[static_cast<std::size_t>(d)] += 1.0;
        }
    }
    return v;
}

void write_feature_csv(std::ostream& out, const Vocabulary& vocab,
                       std::span<const std::string> ids,
                       std::span<const FeatureVector> vectors)
{
    out << "id";
    for (const std::string& e : vocab.entry_texts()) {
        out << ',' << csv_field(e);
    }
    out << '\n';
    for (std::size_t r = 0; r < vectors.size(); ++r) {
        out << csv_field(r < ids.size() ? ids[r] : std::to_string(r));
        for (double x : vectors[r].values) {
            out << ',' << format_number(x);
        }
        out << '\n';
    }
}

}  // namespace vidmeta
