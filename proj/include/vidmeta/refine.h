#pragma once

// Turns a parsed box tree into a metadata tree: standard leaves are decoded
// field by field, vendor boxes (udta, uuid, meta, ilst) get dedicated
// handling and embedded XML is flattened into key/value pairs.

#include "vidmeta/bmff.h"
#include "vidmeta/metadata.h"

#include <string>
#include <vector>

namespace vidmeta {

// Path patterns are `/`-separated component lists matched against the
// trailing components of a node path; `*` matches any single component and a
// leading `/` anchors the pattern at the root. Components use the printable
// box-name rendering (non-ASCII bytes as \xNN).
struct ExclusionList {
    std::vector<std::string> node_paths;     // node and subtree dropped
    std::vector<std::string> payload_paths;  // node kept, fields dropped
    std::vector<std::string> field_keys;     // keys dropped everywhere

    // mdat dropped; free/skip/wide payloads dropped. Sample tables are
    // reduced to their count fields by the decoders themselves.
    static ExclusionList defaults();

    bool excludes_node(const std::vector<std::string>& path) const;
    bool excludes_payload(const std::vector<std::string>& path) const;
    bool excludes_key(const std::string& key) const;
};

enum class IlstPlacement { kStandard, kDirectInUdta, kInMeta };

// Decodes key/value items. For kStandard and kInMeta `node` is an `ilst`
// whose children each carry a `data` atom; `key_table` (from a sibling
// `keys` box) renames integer-indexed items. For kDirectInUdta `node` is a
// `udta` and every 0xA9-prefixed leaf child yields its payload verbatim.
std::vector<Field> parse_ilst(const BoxNode& node, IlstPlacement placement,
                              std::vector<Warning>* warnings = nullptr,
                              const std::vector<std::string>* key_table = nullptr);

// `uuid` leaf: 16-byte user type as hex plus flattened XML or raw remainder.
MetadataNode refine_uuid(const BoxNode& node,
                         std::vector<Warning>* warnings = nullptr);

// Fields for one leaf box. `handler_type` is the enclosing track's media
// handler (e.g. "vide"), used to interpret sample descriptions.
std::vector<Field> decode_leaf(const BoxNode& node,
                               const std::string& handler_type = {},
                               std::vector<Warning>* warnings = nullptr);

MetadataNode refine(const ParseReport& tree,
                    const ExclusionList& exclusions = ExclusionList::defaults(),
                    std::vector<Warning>* warnings = nullptr);

}  // namespace vidmeta
