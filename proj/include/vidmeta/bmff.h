#pragma once

// ISO base media file format (MP4 / QuickTime MOV) box tree parser.

#include "vidmeta/error.h"

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace vidmeta {

using ByteSpan = std::span<const std::uint8_t>;

// Four byte box identifier. Bytes are kept verbatim; many vendor boxes use
// 0xA9 or control bytes in their names.
struct FourCC {
    std::array<std::uint8_t, 4> bytes {};

    FourCC() = default;
    constexpr explicit FourCC(std::array<std::uint8_t, 4> b) : bytes(b) {}
    // `s` must be exactly four bytes; "\xA9mod" style literals work.
    explicit FourCC(std::string_view s);

    // Raw four bytes as a std::string.
    std::string str() const;
    // Printable rendering: ASCII passes, everything else becomes \xNN.
    std::string display() const;

    bool operator==(const FourCC&) const = default;
    auto operator<=>(const FourCC&) const = default;
    bool operator==(std::string_view s) const;
};

struct BoxHeader {
    std::uint64_t size = 0;  // whole box including header
    FourCC name;
    std::uint8_t header_len = 8;  // 8, or 16 for 64-bit sizes
    bool to_end = false;          // size field was 0
};

struct BoxNode {
    BoxHeader header;
    std::uint64_t offset = 0;   // file offset of the header
    std::vector<FourCC> path;   // ancestor names, root first
    bool is_container = false;
    std::vector<BoxNode> children;
    // Leaf payload; views into the buffer handed to parse_tree, which must
    // outlive the report.
    ByteSpan payload;
    // Container bytes not covered by children: preambles and padding.
    std::uint64_t skipped = 0;

    std::uint64_t body_offset() const { return offset + header.header_len; }
};

struct SkipRegion {
    std::uint64_t offset = 0;
    std::uint64_t length = 0;
};

struct ParseReport {
    std::vector<BoxNode> tree;
    std::vector<Warning> warnings;
    // Top-level byte ranges not covered by any root box.
    std::vector<SkipRegion> skipped;
    std::uint64_t file_size = 0;
};

enum class ContainerKind { kContainer, kLeaf, kMetaVariant };

inline constexpr int kMaxBoxDepth = 64;

// Reads the box header at `offset`. A size field of 0 resolves to the end of
// `scope_end` (defaults to the end of `bytes`).
BoxHeader parse_header(ByteSpan bytes, std::uint64_t offset);
BoxHeader parse_header(ByteSpan bytes, std::uint64_t offset,
                       std::uint64_t scope_end);

ContainerKind is_container(const FourCC& name,
                           std::span<const FourCC> parent_path);

// Bytes between a container's header and its first child, for containers
// that are full boxes (`dref`: version/flags + entry count).
std::uint64_t container_preamble(const FourCC& name);

bool is_top_level_name(const FourCC& name);

ParseReport parse_tree(ByteSpan bytes);

// Indented rendering of the tree with offsets and sizes, one box per line.
std::string format_tree(const ParseReport& report);

}  // namespace vidmeta
