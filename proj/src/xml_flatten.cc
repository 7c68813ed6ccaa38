#include "vidmeta/xml_flatten.h"

#include "vidmeta/error.h"

#include <cstdint>
#include <string>

namespace vidmeta {
namespace {

    bool is_space(char c)
    {
        return c == ' ' || c == '\t' || c == '\r' || c == '\n';
    }

    bool is_name_char(char c)
    {
        return !is_space(c) && c != '>' && c != '<' && c != '=' && c != '/'
               && c != '"' && c != '\'' && c != '&' && c != '\0';
    }

    std::string_view local_name(std::string_view qname)
    {
        const std::size_t colon = qname.rfind(':');
        return colon == std::string_view::npos ? qname : qname.substr(colon + 1);
    }

    std::string_view trim(std::string_view s)
    {
        while (!s.empty() && is_space(s.front())) {
            s.remove_prefix(1);
        }
        while (!s.empty() && is_space(s.back())) {
            s.remove_suffix(1);
        }
        return s;
    }

    void append_utf8(std::string& out, std::uint32_t cp)
    {
        if (cp < 0x80) {
            out.push_back(static_cast<char>(cp));
        } else if (cp < 0x800) {
            out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        } else if (cp < 0x10000) {
            out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        } else {
            out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        }
    }

    struct Frame {
        std::string qname;
        std::string text;
        bool has_children = false;
    };

    class XmlFlattener {
    public:
        explicit XmlFlattener(std::string_view doc) : doc_(doc) {}

        std::vector<Field> run()
        {
            skip_misc();
            if (!starts_with("<")) {
                fail("no root element");
            }
            parse_root();
            skip_misc();
            while (pos_ < doc_.size() && doc_[pos_] == '\0') {
                ++pos_;
                skip_misc();
            }
            if (pos_ != doc_.size()) {
                fail("content after root element");
            }
            return std::move(fields_);
        }

    private:
        [[noreturn]] void fail(const std::string& what) const
        {
            throw Error(ErrorCode::kXmlNotWellFormed,
                        what + " at offset " + std::to_string(pos_));
        }

        bool starts_with(std::string_view s) const
        {
            return doc_.substr(pos_, s.size()) == s;
        }

        void skip_until(std::string_view terminator)
        {
            const std::size_t end = doc_.find(terminator, pos_);
            if (end == std::string_view::npos) {
                fail("unterminated construct");
            }
            pos_ = end + terminator.size();
        }

        void skip_spaces()
        {
            while (pos_ < doc_.size() && is_space(doc_[pos_])) {
                ++pos_;
            }
        }

        // Whitespace, comments, processing instructions and DOCTYPE.
        void skip_misc()
        {
            for (;;) {
                skip_spaces();
                if (starts_with("\xEF\xBB\xBF")) {
                    pos_ += 3;
                } else if (starts_with("<?")) {
                    skip_until("?>");
                } else if (starts_with("<!--")) {
                    skip_until("-->");
                } else if (starts_with("<!DOCTYPE")) {
                    skip_doctype();
                } else {
                    return;
                }
            }
        }

        void skip_doctype()
        {
            int bracket = 0;
            for (; pos_ < doc_.size(); ++pos_) {
                const char c = doc_[pos_];
                if (c == '[') {
                    ++bracket;
                } else if (c == ']') {
                    --bracket;
                } else if (c == '>' && bracket <= 0) {
                    ++pos_;
                    return;
                }
            }
            fail("unterminated DOCTYPE");
        }

        std::string read_name()
        {
            const std::size_t start = pos_;
            while (pos_ < doc_.size() && is_name_char(doc_[pos_])) {
                ++pos_;
            }
            if (pos_ == start) {
                fail("expected a name");
            }
            return std::string(doc_.substr(start, pos_ - start));
        }

        void read_entity(std::string& out)
        {
            const std::size_t semi = doc_.find(';', pos_);
            if (semi == std::string_view::npos || semi - pos_ > 12) {
                fail("bad entity reference");
            }
            const std::string_view ent = doc_.substr(pos_ + 1, semi - pos_ - 1);
            if (ent == "lt") {
                out.push_back('<');
            } else if (ent == "gt") {
                out.push_back('>');
            } else if (ent == "amp") {
                out.push_back('&');
            } else if (ent == "quot") {
                out.push_back('"');
            } else if (ent == "apos") {
                out.push_back('\'');
            } else if (ent.size() > 1 && ent[0] == '#') {
                std::uint32_t cp = 0;
                const bool hex = ent[1] == 'x' || ent[1] == 'X';
                const std::string_view digits = ent.substr(hex ? 2 : 1);
                if (digits.empty()) {
                    fail("empty character reference");
                }
                for (char c : digits) {
                    int d;
                    if (c >= '0' && c <= '9') {
                        d = c - '0';
                    } else if (hex && c >= 'a' && c <= 'f') {
                        d = c - 'a' + 10;
                    } else if (hex && c >= 'A' && c <= 'F') {
                        d = c - 'A' + 10;
                    } else {
                        fail("bad character reference");
                    }
                    cp = cp * (hex ? 16 : 10) + static_cast<std::uint32_t>(d);
                    if (cp > 0x10FFFF) {
                        fail("character reference out of range");
                    }
                }
                append_utf8(out, cp);
            } else {
                fail("unknown entity '" + std::string(ent) + "'");
            }
            pos_ = semi + 1;
        }

        void emit(std::string_view qname, std::string value)
        {
            std::string key(local_name(qname));
            set_field(fields_, std::move(key),
                      FieldValue::make_text(std::move(value)));
        }

        // Reads attributes up to `>` or `/>`. Returns true for `/>`.
        bool read_attributes(std::vector<std::pair<std::string, std::string>>& attrs)
        {
            for (;;) {
                skip_spaces();
                if (pos_ >= doc_.size()) {
                    fail("unterminated start tag");
                }
                if (starts_with("/>")) {
                    pos_ += 2;
                    return true;
                }
                if (doc_[pos_] == '>') {
                    ++pos_;
                    return false;
                }
                std::string name = read_name();
                skip_spaces();
                if (pos_ >= doc_.size() || doc_[pos_] != '=') {
                    fail("attribute without value");
                }
                ++pos_;
                skip_spaces();
                if (pos_ >= doc_.size() || (doc_[pos_] != '"' && doc_[pos_] != '\'')) {
                    fail("unquoted attribute value");
                }
                const char quote = doc_[pos_++];
                std::string value;
                while (pos_ < doc_.size() && doc_[pos_] != quote) {
                    if (doc_[pos_] == '<') {
                        fail("'<' in attribute value");
                    }
                    if (doc_[pos_] == '&') {
                        read_entity(value);
                    } else {
                        value.push_back(doc_[pos_++]);
                    }
                }
                if (pos_ >= doc_.size()) {
                    fail("unterminated attribute value");
                }
                ++pos_;
                attrs.emplace_back(std::move(name), std::move(value));
            }
        }

        // Consumes `<name attrs...>` with pos_ on '<'. Returns false when the
        // element was self-closing.
        bool open_element()
        {
            ++pos_;
            Frame frame;
            frame.qname = read_name();
            std::vector<std::pair<std::string, std::string>> attrs;
            const bool self_closing = read_attributes(attrs);
            if (!stack_.empty()) {
                stack_.back().has_children = true;
            }
            for (auto& [name, value] : attrs) {
                if (name == "xmlns" || name.starts_with("xmlns:")) {
                    continue;
                }
                emit(name, std::move(value));
            }
            if (self_closing) {
                emit(frame.qname, {});
                return false;
            }
            stack_.push_back(std::move(frame));
            return true;
        }

        void close_element()
        {
            pos_ += 2;
            const std::string name = read_name();
            skip_spaces();
            if (pos_ >= doc_.size() || doc_[pos_] != '>') {
                fail("malformed end tag");
            }
            ++pos_;
            if (stack_.empty() || stack_.back().qname != name) {
                fail("mismatched end tag </" + name + ">");
            }
            Frame frame = std::move(stack_.back());
            stack_.pop_back();
            const std::string_view text = trim(frame.text);
            if (!text.empty() || !frame.has_children) {
                emit(frame.qname, std::string(text));
            }
        }

        void parse_root()
        {
            if (!open_element()) {
                return;
            }
            while (!stack_.empty()) {
                if (pos_ >= doc_.size()) {
                    fail("unexpected end of document");
                }
                if (starts_with("</")) {
                    close_element();
                } else if (starts_with("<!--")) {
                    skip_until("-->");
                } else if (starts_with("<![CDATA[")) {
                    pos_ += 9;
                    const std::size_t end = doc_.find("]]>", pos_);
                    if (end == std::string_view::npos) {
                        fail("unterminated CDATA");
                    }
                    stack_.back().text.append(doc_.substr(pos_, end - pos_));
                    pos_ = end + 3;
                } else if (starts_with("<?")) {
                    skip_until("?>");
                } else if (doc_[pos_] == '<') {
                    open_element();
                } else if (doc_[pos_] == '&') {
                    read_entity(stack_.back().text);
                } else {
                    stack_.back().text.push_back(doc_[pos_++]);
                }
            }
        }

        std::string_view doc_;
        std::size_t pos_ = 0;
        std::vector<Frame> stack_;
        std::vector<Field> fields_;
    };

}  // namespace

std::size_t find_xml_start(std::string_view payload)
{
    for (std::size_t i = 0; i < payload.size(); ++i) {
        const char c = payload[i];
        if (c == '<') {
            return i;
        }
        if (!is_space(c) && c != '\0') {
            // UTF-8 byte order mark
            if (payload.substr(i, 3) == "\xEF\xBB\xBF") {
                i += 2;
                continue;
            }
            return std::string_view::npos;
        }
    }
    return std::string_view::npos;
}

std::vector<Field> flatten_xml(std::string_view document)
{
    return XmlFlattener(document).run();
}

}  // namespace vidmeta
