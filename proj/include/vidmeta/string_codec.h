#pragma once

// Canonical string form of a metadata tree. Every node contributes a
// node-presence string (`moov/mvhd`) and every field a key/value string
// (`moov/mvhd/@duration=1546737`).

#include "vidmeta/metadata.h"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace vidmeta {

enum class StringCategory { kNodePresence, kKeyValue };

struct MetadataString {
    std::string text;
    StringCategory category = StringCategory::kNodePresence;
    // Components, key and value in their escaped textual form.
    std::vector<std::string> path;
    std::optional<std::string> key;
    std::optional<std::string> value_text;

    // "path/@key" with the value stripped; empty for node-presence strings.
    std::string path_key() const;

    bool operator==(const MetadataString&) const = default;
};

// Printable ASCII other than `\` passes; `\` becomes `\\` and every other
// byte becomes `\xNN` (uppercase hex).
std::string escape(std::string_view bytes);

// escape() that additionally hex-escapes `/`, `@` and `=` so path
// components, keys and values cannot break the string grammar.
std::string escape_component(std::string_view bytes);

// Inverse of escape() and escape_component(). Throws
// Error(kMalformedMetadataString) on a dangling or malformed escape.
std::string unescape(std::string_view text);

// Depth-first, node string first, then its fields, then its children.
// `trak` components are numbered per parent in file order (trak1, trak2...).
std::vector<MetadataString> serialize(const MetadataNode& root);

MetadataString parse_string(std::string_view text);

}  // namespace vidmeta
