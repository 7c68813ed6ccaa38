#include "vidmeta/bmff.h"

#include <algorithm>
#include <cstdio>
#include <cstring>

namespace vidmeta {

std::string_view error_code_name(ErrorCode code) noexcept
{
    switch (code) {
    case ErrorCode::kTruncatedHeader: return "TruncatedHeader";
    case ErrorCode::kTruncatedBox: return "TruncatedBox";
    case ErrorCode::kNotIsoBmff: return "NotIsoBmff";
    case ErrorCode::kMalformedIlstEntry: return "MalformedIlstEntry";
    case ErrorCode::kXmlNotWellFormed: return "XmlNotWellFormed";
    case ErrorCode::kMalformedMetadataString: return "MalformedMetadataString";
    case ErrorCode::kNonNumericContinuousValue:
        return "NonNumericContinuousValue";
    case ErrorCode::kDegenerateAffinity: return "DegenerateAffinity";
    case ErrorCode::kDegenerateLabels: return "DegenerateLabels";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kEmptyModel: return "EmptyModel";
    case ErrorCode::kUnknownLabel: return "UnknownLabel";
    case ErrorCode::kEmptyCorpus: return "EmptyCorpus";
    case ErrorCode::kClassTooSmall: return "ClassTooSmall";
    case ErrorCode::kClassMissing: return "ClassMissing";
    case ErrorCode::kUnknownDeviceId: return "UnknownDeviceId";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kIo: return "Io";
    }
    return "Unknown";
}

FourCC::FourCC(std::string_view s)
{
    if (s.size() != 4) {
        throw Error(ErrorCode::kInvalidArgument,
                    "box name must be 4 bytes: '" + std::string(s) + "'");
    }
    std::memcpy(bytes.data(), s.data(), 4);
}

std::string FourCC::str() const
{
    return std::string(reinterpret_cast<const char*>(bytes.data()), 4);
}

std::string FourCC::display() const
{
    std::string out;
    for (std::uint8_t b : bytes) {
        if (b >= 0x20 && b < 0x7F && b != '\\') {
            out.push_back(static_cast<char>(b));
        } else {
            char buf[5];
            std::snprintf(buf, sizeof(buf), "\\x%02X", b);
            out += buf;
        }
    }
    return out;
}

bool FourCC::operator==(std::string_view s) const
{
    return s.size() == 4 && std::memcmp(bytes.data(), s.data(), 4) == 0;
}

namespace {

    std::uint32_t load_u32be(ByteSpan b, std::uint64_t off)
    {
        return (std::uint32_t(b[off]) << 24) | (std::uint32_t(b[off + 1]) << 16)
               | (std::uint32_t(b[off + 2]) << 8) | std::uint32_t(b[off + 3]);
    }

    std::uint64_t load_u64be(ByteSpan b, std::uint64_t off)
    {
        return (std::uint64_t(load_u32be(b, off)) << 32) | load_u32be(b, off + 4);
    }

    bool plausible_name_byte(std::uint8_t c)
    {
        return (c >= 0x20 && c < 0x7F) || c == 0xA9;
    }

    bool plausible_name(const FourCC& n)
    {
        return std::all_of(n.bytes.begin(), n.bytes.end(), plausible_name_byte);
    }

    // True when a well-formed child header starts at `pos` and fits in
    // [pos, end). Used to decide whether a `meta` box carries the 4-byte
    // version/flags preamble.
    bool valid_child_at(ByteSpan bytes, std::uint64_t pos, std::uint64_t end)
    {
        if (pos == end) {
            return true;
        }
        if (end - pos < 8) {
            return false;
        }
        FourCC name;
        std::memcpy(name.bytes.data(), bytes.data() + pos + 4, 4);
        if (!plausible_name(name)) {
            return false;
        }
        std::uint64_t size = load_u32be(bytes, pos);
        if (size == 0) {
            return true;
        }
        if (size == 1) {
            if (end - pos < 16) {
                return false;
            }
            size = load_u64be(bytes, pos + 8);
            return size >= 16 && size <= end - pos;
        }
        return size >= 8 && size <= end - pos;
    }

    class TreeParser {
    public:
        TreeParser(ByteSpan bytes, ParseReport& report)
            : bytes_(bytes), report_(report)
        {
        }

        // Parses consecutive boxes in [begin, end). Returns the number of
        // bytes in the range that did not end up inside a child box.
        std::uint64_t parse_range(std::uint64_t begin, std::uint64_t end,
                                  const std::vector<FourCC>& path,
                                  std::vector<BoxNode>& out, bool top_level)
        {
            std::uint64_t skipped = 0;
            std::uint64_t pos = begin;
            while (pos < end) {
                const std::uint64_t remaining = end - pos;
                if (remaining < 8) {
                    warn(pos, remaining,
                         std::to_string(remaining) + " trailing bytes in scope");
                    skip_top(top_level, pos, remaining);
                    skipped += remaining;
                    break;
                }
                BoxHeader h;
                try {
                    h = parse_header(bytes_, pos, end);
                } catch (const Error& e) {
                    warn(pos, remaining, e.what());
                    skip_top(top_level, pos, remaining);
                    skipped += remaining;
                    break;
                }
                if (top_level && !plausible_name(h.name)) {
                    if (out.empty()) {
                        throw Error(ErrorCode::kNotIsoBmff,
                                    "first box name '" + h.name.display()
                                        + "' is not a top-level box");
                    }
                    warn(pos, remaining,
                         "non-box trailing data (" + std::to_string(remaining)
                             + " bytes)");
                    skip_top(top_level, pos, remaining);
                    skipped += remaining;
                    break;
                }
                if (top_level && out.empty() && !is_top_level_name(h.name)) {
                    throw Error(ErrorCode::kNotIsoBmff,
                                "first box name '" + h.name.display()
                                    + "' is not a top-level box");
                }
                if (h.size < h.header_len) {
                    warn(pos, remaining,
                         "box '" + h.name.display() + "' declares size "
                             + std::to_string(h.size) + " below header length");
                    skip_top(top_level, pos, remaining);
                    skipped += remaining;
                    break;
                }
                if (h.size > remaining) {
                    warn(pos, 0,
                         "TruncatedBox: '" + h.name.display() + "' declares "
                             + std::to_string(h.size) + " bytes, "
                             + std::to_string(remaining) + " available");
                    h.size = remaining;
                }
                out.push_back(parse_box(h, pos, path));
                pos += h.size;
            }
            return skipped;
        }

    private:
        BoxNode parse_box(const BoxHeader& h, std::uint64_t pos,
                          const std::vector<FourCC>& path)
        {
            BoxNode node;
            node.header = h;
            node.offset = pos;
            node.path = path;
            const std::uint64_t body = pos + h.header_len;
            const std::uint64_t end = pos + h.size;

            ContainerKind kind = is_container(h.name, path);
            if (kind != ContainerKind::kLeaf
                && static_cast<int>(path.size()) + 1 >= kMaxBoxDepth) {
                warn(pos, 0,
                     "nesting deeper than " + std::to_string(kMaxBoxDepth)
                         + ", '" + h.name.display() + "' kept as leaf");
                kind = ContainerKind::kLeaf;
            }
            if (kind == ContainerKind::kLeaf) {
                node.payload = bytes_.subspan(body, end - body);
                return node;
            }

            std::uint64_t preamble = container_preamble(h.name);
            if (h.name == "meta") {
                const std::uint64_t primary
                    = kind == ContainerKind::kMetaVariant ? 4 : 0;
                const std::uint64_t alternate = primary == 4 ? 0 : 4;
                preamble = primary;
                if (body + primary > end
                    || !valid_child_at(bytes_, body + primary, end)) {
                    if (body + alternate <= end
                        && valid_child_at(bytes_, body + alternate, end)) {
                        preamble = alternate;
                    }
                }
            }
            preamble = std::min(preamble, end - body);

            node.is_container = true;
            std::vector<FourCC> child_path = path;
            child_path.push_back(h.name);
            node.skipped = preamble
                           + parse_range(body + preamble, end, child_path,
                                         node.children, false);
            return node;
        }

        void warn(std::uint64_t offset, std::uint64_t length, std::string msg)
        {
            report_.warnings.push_back({offset, length, std::move(msg)});
        }

        void skip_top(bool top_level, std::uint64_t offset, std::uint64_t length)
        {
            if (top_level) {
                report_.skipped.push_back({offset, length});
            }
        }

        ByteSpan bytes_;
        ParseReport& report_;
    };

}  // namespace

BoxHeader parse_header(ByteSpan bytes, std::uint64_t offset)
{
    return parse_header(bytes, offset, bytes.size());
}

BoxHeader parse_header(ByteSpan bytes, std::uint64_t offset,
                       std::uint64_t scope_end)
{
    scope_end = std::min<std::uint64_t>(scope_end, bytes.size());
    if (offset > scope_end || scope_end - offset < 8) {
        throw Error(ErrorCode::kTruncatedHeader,
                    "fewer than 8 bytes at offset " + std::to_string(offset));
    }
    BoxHeader h;
    std::memcpy(h.name.bytes.data(), bytes.data() + offset + 4, 4);
    const std::uint32_t size32 = load_u32be(bytes, offset);
    if (size32 == 1) {
        if (scope_end - offset < 16) {
            throw Error(ErrorCode::kTruncatedHeader,
                        "extended size header truncated at offset "
                            + std::to_string(offset));
        }
        h.size = load_u64be(bytes, offset + 8);
        h.header_len = 16;
    } else if (size32 == 0) {
        h.size = scope_end - offset;
        h.to_end = true;
    } else {
        h.size = size32;
    }
    return h;
}

ContainerKind is_container(const FourCC& name, std::span<const FourCC> parent_path)
{
    static const std::array<std::string_view, 13> kContainers = {
        "moov", "trak", "mdia", "minf", "stbl", "dinf", "edts",
        "udta", "mvex", "moof", "traf", "ilst", "dref",
    };
    if (name == "meta") {
        if (!parent_path.empty()
            && (parent_path.back() == "udta" || parent_path.back() == "trak")) {
            return ContainerKind::kMetaVariant;
        }
        return ContainerKind::kContainer;
    }
    for (std::string_view c : kContainers) {
        if (name == c) {
            return ContainerKind::kContainer;
        }
    }
    return ContainerKind::kLeaf;
}

std::uint64_t container_preamble(const FourCC& name)
{
    return name == "dref" ? 8 : 0;
}

bool is_top_level_name(const FourCC& name)
{
    static const std::array<std::string_view, 15> kTopLevel = {
        "ftyp", "moov", "mdat", "free", "skip", "wide", "pnot", "uuid",
        "styp", "sidx", "moof", "meta", "pdin", "junk", "PICT",
    };
    return std::any_of(kTopLevel.begin(), kTopLevel.end(),
                       [&](std::string_view n) { return name == n; });
}

ParseReport parse_tree(ByteSpan bytes)
{
    if (bytes.size() < 8) {
        throw Error(ErrorCode::kNotIsoBmff,
                    "input of " + std::to_string(bytes.size())
                        + " bytes holds no box");
    }
    ParseReport report;
    report.file_size = bytes.size();
    TreeParser parser(bytes, report);
    parser.parse_range(0, bytes.size(), {}, report.tree, true);
    return report;
}

namespace {

    void format_node(const BoxNode& node, int depth, std::string& out)
    {
        char buf[96];
        std::snprintf(buf, sizeof(buf), "%10llu %10llu ",
                      static_cast<unsigned long long>(node.offset),
                      static_cast<unsigned long long>(node.header.size));
        out += buf;
        out.append(static_cast<std::size_t>(depth) * 2, ' ');
        out += node.header.name.display();
        if (node.header.header_len == 16) {
            out += " [64-bit]";
        }
        if (node.header.to_end) {
            out += " [to-end]";
        }
        if (node.is_container && node.skipped > 0) {
            out += " [skipped " + std::to_string(node.skipped) + "]";
        }
        out += '\n';
        for (const BoxNode& child : node.children) {
            format_node(child, depth + 1, out);
        }
    }

}  // namespace

std::string format_tree(const ParseReport& report)
{
    std::string out = "    offset       size name\n";
    for (const BoxNode& root : report.tree) {
        format_node(root, 0, out);
    }
    for (const SkipRegion& s : report.skipped) {
        out += "skipped " + std::to_string(s.length) + " bytes at offset "
               + std::to_string(s.offset) + "\n";
    }
    for (const Warning& w : report.warnings) {
        out += "warning @" + std::to_string(w.offset) + ": " + w.message + "\n";
    }
    return out;
}

}  // namespace vidmeta
