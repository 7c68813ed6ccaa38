#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace vidmeta {

// One decoded metadata value. `raw` always holds the bytes the value was
// decoded from.
struct FieldValue {
    enum class Kind { kInteger, kDecimal, kText, kRawBytes };

    Kind kind = Kind::kRawBytes;
    std::int64_t integer = 0;
    double decimal = 0.0;
    std::string text;
    std::string raw;

    static FieldValue make_integer(std::int64_t v, std::string raw = {});
    // Non-finite inputs degrade to a raw-bytes value.
    static FieldValue make_decimal(double v, std::string raw = {});
    static FieldValue make_text(std::string v);
    static FieldValue make_raw(std::string bytes);

    // Canonical value text before escaping: decimal integers, shortest
    // round-trip decimals with at least one fractional digit, text and raw
    // bytes verbatim.
    std::string render() const;

    bool operator==(const FieldValue&) const = default;
};

using Field = std::pair<std::string, FieldValue>;

// Inserts or overwrites `key`. An existing key keeps its position and takes
// the new value.
void set_field(std::vector<Field>& fields, std::string key, FieldValue value);

struct MetadataNode {
    std::string name;               // raw box name bytes; empty for the root
    std::vector<std::string> path;  // names from the root down to this node
    std::vector<Field> fields;
    std::vector<MetadataNode> children;
};

}  // namespace vidmeta
