#include "vidmeta/metadata.h"

#include <charconv>
#include <cmath>
#include <string_view>

namespace vidmeta {

FieldValue FieldValue::make_integer(std::int64_t v, std::string raw)
{
    FieldValue f;
    f.kind = Kind::kInteger;
    f.integer = v;
    f.raw = std::move(raw);
    return f;
}

FieldValue FieldValue::make_decimal(double v, std::string raw)
{
    if (!std::isfinite(v)) {
        return make_raw(std::move(raw));
    }
    FieldValue f;
    f.kind = Kind::kDecimal;
    f.decimal = v;
    f.raw = std::move(raw);
    return f;
}

FieldValue FieldValue::make_text(std::string v)
{
    FieldValue f;
    f.kind = Kind::kText;
    f.raw = v;
    f.text = std::move(v);
    return f;
}

FieldValue FieldValue::make_raw(std::string bytes)
{
    FieldValue f;
    f.kind = Kind::kRawBytes;
    f.raw = std::move(bytes);
    return f;
}

std::string FieldValue::render() const
{
    switch (kind) {
    case Kind::kInteger:
        return std::to_string(integer);
    case Kind::kDecimal: {
        char buf[64];
        auto res = std::to_chars(buf, buf + sizeof(buf), decimal);
        std::string out(buf, res.ptr);
        if (out.find_first_of(".e") == std::string::npos) {
            out += ".0";
        }
        return out;
    }
    case Kind::kText:
        return text;
    case Kind::kRawBytes:
        return raw;
    }
    return raw;
}

void set_field(std::vector<Field>& fields, std::string key, FieldValue value)
{
    for (Field& f : fields) {
        if (f.first == key) {
            f.second = std::move(value);
            return;
        }
    }
    fields.emplace_back(std::move(key), std::move(value));
}

}  // namespace vidmeta
