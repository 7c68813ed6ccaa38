#include "vidmeta/string_codec.h"

#include "vidmeta/error.h"

namespace vidmeta {
namespace {

    constexpr char kHex[] = "0123456789ABCDEF";

    std::string escape_impl(std::string_view bytes, bool grammar_chars)
    {
        std::string out;
        out.reserve(bytes.size());
        for (char ch : bytes) {
            const auto b = static_cast<unsigned char>(ch);
            if (b == '\\') {
                out += "\\\\";
            } else if (b >= 0x20 && b < 0x7F
                       && !(grammar_chars && (b == '/' || b == '@' || b == '='))) {
                out.push_back(ch);
            } else {
                out += "\\x";
                out.push_back(kHex[b >> 4]);
                out.push_back(kHex[b & 0xF]);
            }
        }
        return out;
    }

    int hex_value(char c)
    {
        if (c >= '0' && c <= '9') {
            return c - '0';
        }
        if (c >= 'A' && c <= 'F') {
            return c - 'A' + 10;
        }
        return -1;
    }

    [[noreturn]] void malformed(std::string_view text, const char* why)
    {
        throw Error(ErrorCode::kMalformedMetadataString,
                    std::string(why) + " in '" + std::string(text) + "'");
    }

    // Checks escapes and character range without building the bytes.
    void validate(std::string_view whole, std::string_view part)
    {
        for (std::size_t i = 0; i < part.size(); ++i) {
            const auto b = static_cast<unsigned char>(part[i]);
            if (b < 0x20 || b >= 0x7F) {
                malformed(whole, "unescaped byte");
            }
            if (b == '\\') {
                if (i + 1 < part.size() && part[i + 1] == '\\') {
                    ++i;
                } else if (i + 3 < part.size() && part[i + 1] == 'x'
                           && hex_value(part[i + 2]) >= 0
                           && hex_value(part[i + 3]) >= 0) {
                    i += 3;
                } else {
                    malformed(whole, "bad escape");
                }
            }
        }
    }

    std::vector<std::string> split_path(std::string_view whole, std::string_view p)
    {
        std::vector<std::string> parts;
        std::size_t start = 0;
        for (;;) {
            const std::size_t slash = p.find('/', start);
            const std::string_view part = p.substr(start, slash - start);
            if (part.empty()) {
                malformed(whole, "empty path component");
            }
            validate(whole, part);
            parts.emplace_back(part);
            if (slash == std::string_view::npos) {
                break;
            }
            start = slash + 1;
        }
        return parts;
    }

    std::string join(const std::vector<std::string>& parts)
    {
        std::string out;
        for (const std::string& p : parts) {
            if (!out.empty()) {
                out.push_back('/');
            }
            out += p;
        }
        return out;
    }

    void emit(const MetadataNode& node, std::vector<std::string>& path,
              std::vector<MetadataString>& out)
    {
        const std::string joined = join(path);
        MetadataString presence;
        presence.text = joined;
        presence.category = StringCategory::kNodePresence;
        presence.path = path;
        out.push_back(std::move(presence));

        for (const Field& f : node.fields) {
            MetadataString kv;
            kv.category = StringCategory::kKeyValue;
            kv.path = path;
            kv.key = escape_component(f.first);
            kv.value_text = escape_component(f.second.render());
            kv.text = joined + "/@" + *kv.key + "=" + *kv.value_text;
            out.push_back(std::move(kv));
        }

        int tracks = 0;
        for (const MetadataNode& child : node.children) {
            std::string component = escape_component(child.name);
            if (child.name == "trak") {
                component += std::to_string(++tracks);
            }
            path.push_back(std::move(component));
            emit(child, path, out);
            path.pop_back();
        }
    }

}  // namespace

std::string MetadataString::path_key() const
{
    if (category != StringCategory::kKeyValue || !key) {
        return {};
    }
    return join(path) + "/@" + *key;
}

std::string escape(std::string_view bytes)
{
    return escape_impl(bytes, false);
}

std::string escape_component(std::string_view bytes)
{
    return escape_impl(bytes, true);
}

std::string unescape(std::string_view text)
{
    std::string out;
    out.reserve(text.size());
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] != '\\') {
            out.push_back(text[i]);
            continue;
        }
        if (i + 1 < text.size() && text[i + 1] == '\\') {
            out.push_back('\\');
            ++i;
            continue;
        }
        if (i + 3 < text.size() && text[i + 1] == 'x') {
            const int hi = hex_value(text[i + 2]);
            const int lo = hex_value(text[i + 3]);
            if (hi >= 0 && lo >= 0) {
                out.push_back(static_cast<char>((hi << 4) | lo));
                i += 3;
                continue;
            }
        }
        malformed(text, "bad escape");
    }
    return out;
}

std::vector<MetadataString> serialize(const MetadataNode& root)
{
    std::vector<MetadataString> out;
    std::vector<std::string> path;
    int tracks = 0;
    for (const MetadataNode& child : root.children) {
        std::string component = escape_component(child.name);
        if (child.name == "trak") {
            component += std::to_string(++tracks);
        }
        path.push_back(std::move(component));
        emit(child, path, out);
        path.pop_back();
    }
    return out;
}

MetadataString parse_string(std::string_view text)
{
    if (text.empty()) {
        malformed(text, "empty string");
    }
    MetadataString s;
    s.text = std::string(text);
    const std::size_t at = text.find('@');
    if (at == std::string_view::npos) {
        s.category = StringCategory::kNodePresence;
        s.path = split_path(text, text);
        return s;
    }
    if (at < 2 || text[at - 1] != '/') {
        malformed(text, "'@' not preceded by a path");
    }
    s.category = StringCategory::kKeyValue;
    s.path = split_path(text, text.substr(0, at - 1));
    const std::string_view rest = text.substr(at + 1);
    const std::size_t eq = rest.find('=');
    if (eq == std::string_view::npos) {
        malformed(text, "missing '='");
    }
    const std::string_view key = rest.substr(0, eq);
    const std::string_view value = rest.substr(eq + 1);
    if (key.empty()) {
        malformed(text, "empty key");
    }
    if (key.find('@') != std::string_view::npos || value.find('@') != std::string_view::npos
        || value.find('=') != std::string_view::npos
        || value.find('/') != std::string_view::npos) {
        malformed(text, "unescaped grammar character");
    }
    validate(text, key);
    validate(text, value);
    s.key = std::string(key);
    s.value_text = std::string(value);
    return s;
}

}  // namespace vidmeta
