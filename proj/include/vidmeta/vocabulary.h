#pragma once

// Maps collections of metadata strings to fixed-length numeric vectors.
//
// Positions are laid out as three consecutive ranges:
//   [0, |cat1|)                     node-presence occurrence counts
//   [|cat1|, |cat1|+|cat2d|)        discrete key/value occurrence counts
//   [|cat1|+|cat2d|, dim)           values of continuous keys (0 if absent)
// Each range is sorted lexicographically.

#include "vidmeta/error.h"
#include "vidmeta/string_codec.h"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"

namespace vidmeta {

// Keys whose values are injected into the vector directly. A pattern
// without `/` matches the key anywhere; a pattern containing `/@` must equal
// the string's "path/@key".
struct ContinuousKeyList {
    std::vector<std::string> keys;

    static ContinuousKeyList defaults();
    bool matches(const MetadataString& s) const;
};

struct FeatureVector {
    std::vector<double> values;
};

class Vocabulary {
public:
    Vocabulary() = default;

    const std::vector<std::string>& cat1() const { return cat1_; }
    const std::vector<std::string>& cat2d() const { return cat2d_; }
    const std::vector<std::string>& cat2c_keys() const { return cat2c_; }
    const ContinuousKeyList& continuous() const { return continuous_; }

    std::size_t dim() const { return cat1_.size() + cat2d_.size() + cat2c_.size(); }

    // Vector position of an entry, or -1 when the entry is unknown.
    std::int64_t index_of_cat1(const std::string& text) const;
    std::int64_t index_of_cat2d(const std::string& text) const;
    std::int64_t index_of_cat2c(const std::string& path_key) const;

    // Entry text for every position, in position order.
    std::vector<std::string> entry_texts() const;

    // FNV-1a over the entry texts; identifies the vector layout.
    std::uint64_t hash() const;

    nlohmann::json to_json() const;
    static Vocabulary from_json(const nlohmann::json& j);

    friend Vocabulary build_vocabulary(std::span<const std::vector<MetadataString>> corpus,
                                       const ContinuousKeyList& continuous);

private:
    void rebuild_index();

    std::vector<std::string> cat1_;
    std::vector<std::string> cat2d_;
    std::vector<std::string> cat2c_;
    ContinuousKeyList continuous_;
    std::unordered_map<std::string, std::int64_t> cat1_index_;
    std::unordered_map<std::string, std::int64_t> cat2d_index_;
    std::unordered_map<std::string, std::int64_t> cat2c_index_;
};

Vocabulary build_vocabulary(std::span<const std::vector<MetadataString>> corpus,
                            const ContinuousKeyList& continuous
                            = ContinuousKeyList::defaults());

// Strings outside the vocabulary are ignored. A continuous key seen more
// than once keeps its last value; a non-numeric value counts as absent and
// adds a warning.
FeatureVector vectorize(std::span<const MetadataString> strings, const Vocabulary& vocab,
                        std::vector<std::string>* warnings = nullptr);

// CSV with a leading `id` column; the header carries the escaped entry texts.
void write_feature_csv(std::ostream& out, const Vocabulary& vocab,
                       std::span<const std::string> ids,
                       std::span<const FeatureVector> vectors);

}  // namespace vidmeta
