#include "vidmeta/refine.h"

#include "vidmeta/xml_flatten.h"

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <limits>
#include <optional>
#include <string_view>

namespace vidmeta {
namespace {

    struct DecodeError {
        std::string what;
    };

    // Big-endian cursor over a payload. Running past the end throws
    // DecodeError; callers turn that into a raw-bytes fallback.
    class Reader {
    public:
        explicit Reader(ByteSpan bytes) : bytes_(bytes) {}

        std::size_t pos() const { return pos_; }
        std::size_t remaining() const { return bytes_.size() - pos_; }
        bool empty() const { return pos_ >= bytes_.size(); }

        std::string take(std::size_t n)
        {
            need(n);
            std::string out(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
            pos_ += n;
            return out;
        }
        std::string rest() { return take(remaining()); }
        void skip(std::size_t n)
        {
            need(n);
            pos_ += n;
        }
        ByteSpan span(std::size_t n)
        {
            need(n);
            ByteSpan s = bytes_.subspan(pos_, n);
            pos_ += n;
            return s;
        }

        std::uint64_t uint(std::size_t n)
        {
            need(n);
            std::uint64_t v = 0;
            for (std::size_t i = 0; i < n; ++i) {
                v = (v << 8) | bytes_[pos_ + i];
            }
            last_ = std::string(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
            pos_ += n;
            return v;
        }
        std::uint8_t u8() { return static_cast<std::uint8_t>(uint(1)); }
        std::uint16_t u16() { return static_cast<std::uint16_t>(uint(2)); }
        std::uint32_t u32() { return static_cast<std::uint32_t>(uint(4)); }
        std::uint64_t u64() { return uint(8); }
        std::int16_t s16() { return static_cast<std::int16_t>(u16()); }
        std::int32_t s32() { return static_cast<std::int32_t>(u32()); }

        // Bytes consumed by the most recent integer read.
        const std::string& last() const { return last_; }

    private:
        void need(std::size_t n) const
        {
            if (n > remaining()) {
                throw DecodeError{"payload truncated"};
            }
        }

        ByteSpan bytes_;
        std::size_t pos_ = 0;
        std::string last_;
    };

    class FieldSink {
    public:
        explicit FieldSink(std::vector<Field>& out) : out_(out) {}

        void integer(std::string key, std::uint64_t v, const std::string& raw)
        {
            if (v > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max())) {
                set_field(out_, std::move(key), FieldValue::make_text(std::to_string(v)));
            } else {
                set_field(out_, std::move(key),
                          FieldValue::make_integer(static_cast<std::int64_t>(v), raw));
            }
        }
        void signed_integer(std::string key, std::int64_t v, const std::string& raw)
        {
            set_field(out_, std::move(key), FieldValue::make_integer(v, raw));
        }
        void decimal(std::string key, double v, const std::string& raw)
        {
            set_field(out_, std::move(key), FieldValue::make_decimal(v, raw));
        }
        void text(std::string key, std::string v)
        {
            set_field(out_, std::move(key), FieldValue::make_text(std::move(v)));
        }
        void raw(std::string key, std::string v)
        {
            set_field(out_, std::move(key), FieldValue::make_raw(std::move(v)));
        }
        void text_or_raw(std::string key, std::string bytes);

        // Unsigned big-endian integer of `n` bytes.
        void u(Reader& r, std::string key, std::size_t n)
        {
            const std::uint64_t v = r.uint(n);
            integer(std::move(key), v, r.last());
        }
        void fixed_16_16(Reader& r, std::string key)
        {
            const std::uint32_t v = r.u32();
            decimal(std::move(key), v / 65536.0, r.last());
        }
        void fixed_8_8(Reader& r, std::string key)
        {
            const std::int16_t v = r.s16();
            decimal(std::move(key), v / 256.0, r.last());
        }
        void fourcc(Reader& r, std::string key) { text(std::move(key), r.take(4)); }

    private:
        std::vector<Field>& out_;
    };

    bool valid_utf8(std::string_view s)
    {
        std::size_t i = 0;
        while (i < s.size()) {
            const auto c = static_cast<unsigned char>(s[i]);
            std::size_t extra;
            if (c < 0x80) {
                extra = 0;
            } else if ((c & 0xE0) == 0xC0 && c >= 0xC2) {
                extra = 1;
            } else if ((c & 0xF0) == 0xE0) {
                extra = 2;
            } else if ((c & 0xF8) == 0xF0 && c <= 0xF4) {
                extra = 3;
            } else {
                return false;
            }
            if (extra >= s.size() - i) {
                return false;
            }
            for (std::size_t k = 1; k <= extra; ++k) {
                if ((static_cast<unsigned char>(s[i + k]) & 0xC0) != 0x80) {
                    return false;
                }
            }
            i += extra + 1;
        }
        return true;
    }

    FieldValue text_or_raw_value(std::string bytes)
    {
        if (valid_utf8(bytes)) {
            return FieldValue::make_text(std::move(bytes));
        }
        return FieldValue::make_raw(std::move(bytes));
    }

    void FieldSink::text_or_raw(std::string key, std::string bytes)
    {
        set_field(out_, std::move(key), vidmeta::text_or_raw_value(std::move(bytes)));
    }

    std::string strip_trailing_nuls(std::string s)
    {
        while (!s.empty() && s.back() == '\0') {
            s.pop_back();
        }
        return s;
    }

    std::string to_hex(std::string_view bytes)
    {
        static const char kDigits[] = "0123456789abcdef";
        std::string out;
        out.reserve(bytes.size() * 2);
        for (char c : bytes) {
            const auto b = static_cast<unsigned char>(c);
            out.push_back(kDigits[b >> 4]);
            out.push_back(kDigits[b & 0xF]);
        }
        return out;
    }

    std::string as_string(ByteSpan s)
    {
        return std::string(reinterpret_cast<const char*>(s.data()), s.size());
    }

    void full_box(Reader& r, FieldSink& out)
    {
        out.u(r, "version", 1);
        out.u(r, "flags", 3);
    }

    std::uint8_t peek_version(const BoxNode& node)
    {
        if (node.payload.empty()) {
            throw DecodeError{"empty full box"};
        }
        return node.payload[0];
    }

    std::string matrix_text(Reader& r)
    {
        std::string m;
        for (int i = 0; i < 9; ++i) {
            if (i) {
                m.push_back(' ');
            }
            m += std::to_string(r.s32());
        }
        return m;
    }

    void decode_times(Reader& r, FieldSink& out, std::uint8_t version)
    {
        const std::size_t w = version == 1 ? 8 : 4;
        out.u(r, "creation_time", w);
        out.u(r, "modification_time", w);
    }

    void decode_ftyp(Reader& r, FieldSink& out)
    {
        out.fourcc(r, "major_brand");
        out.u(r, "minor_version", 4);
        out.text("compatible_brands", r.rest());
    }

    void decode_mvhd(Reader& r, FieldSink& out, std::uint8_t v)
    {
        full_box(r, out);
        decode_times(r, out, v);
        out.u(r, "timescale", 4);
        out.u(r, "duration", v == 1 ? 8 : 4);
        out.fixed_16_16(r, "rate");
        out.fixed_8_8(r, "volume");
        r.skip(10);
        out.text("matrix", matrix_text(r));
        r.skip(24);
        out.u(r, "next_track_ID", 4);
    }

    void decode_tkhd(Reader& r, FieldSink& out, std::uint8_t v)
    {
        full_box(r, out);
        decode_times(r, out, v);
        out.u(r, "track_ID", 4);
        r.skip(4);
        out.u(r, "duration", v == 1 ? 8 : 4);
        r.skip(8);
        out.signed_integer("layer", r.s16(), r.last());
        out.signed_integer("alternate_group", r.s16(), r.last());
        out.fixed_8_8(r, "volume");
        r.skip(2);
        out.text("matrix", matrix_text(r));
        out.fixed_16_16(r, "width");
        out.fixed_16_16(r, "height");
    }

    void decode_mdhd(Reader& r, FieldSink& out, std::uint8_t v)
    {
        full_box(r, out);
        decode_times(r, out, v);
        out.u(r, "timescale", 4);
        out.u(r, "duration", v == 1 ? 8 : 4);
        const std::uint16_t lang = r.u16();
        if (lang < 0x400 || lang == 0x7FFF) {
            out.integer("language", lang, r.last());
        } else {
            std::string code;
            for (int shift = 10; shift >= 0; shift -= 5) {
                code.push_back(static_cast<char>(((lang >> shift) & 0x1F) + 0x60));
            }
            out.text("language", code);
        }
        out.u(r, "quality", 2);
    }

    void decode_hdlr(Reader& r, FieldSink& out)
    {
        full_box(r, out);
        out.fourcc(r, "component_type");
        out.fourcc(r, "handler_type");
        out.raw("reserved", r.take(12));
        std::string name = strip_trailing_nuls(r.rest());
        if (!name.empty()) {
            out.text_or_raw("name", std::move(name));
        }
    }

    void decode_elst(Reader& r, FieldSink& out, std::uint8_t v)
    {
        full_box(r, out);
        const std::uint32_t n = r.u32();
        out.integer("entry_count", n, r.last());
        std::string entries;
        for (std::uint32_t i = 0; i < n; ++i) {
            const std::uint64_t dur = r.uint(v == 1 ? 8 : 4);
            const std::uint64_t t = r.uint(v == 1 ? 8 : 4);
            const std::int64_t media_time = v == 1 ? static_cast<std::int64_t>(t)
                                                   : static_cast<std::int32_t>(t);
            const std::int16_t rate_int = r.s16();
            const std::int16_t rate_frac = r.s16();
            if (i) {
                entries.push_back(';');
            }
            entries += std::to_string(dur) + ":" + std::to_string(media_time) + ":"
                       + std::to_string(rate_int) + "." + std::to_string(rate_frac);
        }
        out.text("entries", entries);
    }

    // Counted sample tables keep their counts only.
    void decode_count_table(Reader& r, FieldSink& out)
    {
        full_box(r, out);
        out.u(r, "entry_count", 4);
    }

    void decode_stsz(Reader& r, FieldSink& out)
    {
        full_box(r, out);
        out.u(r, "sample_size", 4);
        out.u(r, "sample_count", 4);
    }

    void decode_stz2(Reader& r, FieldSink& out)
    {
        full_box(r, out);
        r.skip(3);
        out.u(r, "field_size", 1);
        out.u(r, "sample_count", 4);
    }

    std::uint32_t read_descriptor_length(Reader& r)
    {
        std::uint32_t len = 0;
        for (int i = 0; i < 4; ++i) {
            const std::uint8_t b = r.u8();
            len = (len << 7) | (b & 0x7F);
            if (!(b & 0x80)) {
                break;
            }
        }
        return len;
    }

    void decode_esds(Reader& r, FieldSink& out)
    {
        r.skip(4);
        if (r.u8() != 0x03) {
            throw DecodeError{"esds without ES_Descriptor"};
        }
        read_descriptor_length(r);
        r.skip(2);
        const std::uint8_t flags = r.u8();
        if (flags & 0x80) {
            r.skip(2);
        }
        if (flags & 0x40) {
            r.skip(r.u8());
        }
        if (flags & 0x20) {
            r.skip(2);
        }
        if (r.u8() != 0x04) {
            throw DecodeError{"esds without DecoderConfigDescriptor"};
        }
        read_descriptor_length(r);
        out.u(r, "objectTypeIndication", 1);
        out.integer("streamType", r.u8() >> 2, r.last());
        out.u(r, "bufferSizeDB", 3);
        out.u(r, "maxBitrate", 4);
        out.u(r, "avgBitrate", 4);
    }

    // Boxes nested inside a sample entry are flattened into the `stsd`
    // node's fields.
    void decode_sample_entry_child(const FourCC& name, ByteSpan body, FieldSink& out)
    {
        Reader r(body);
        try {
            if (name == "avcC") {
                out.u(r, "configurationVersion", 1);
                out.u(r, "AVCProfileIndication", 1);
                out.u(r, "profile_compatibility", 1);
                out.u(r, "AVCLevelIndication", 1);
                out.integer("lengthSizeMinusOne", r.u8() & 0x3, r.last());
            } else if (name == "hvcC") {
                out.u(r, "configurationVersion", 1);
                out.integer("general_profile_idc", r.u8() & 0x1F, r.last());
                out.u(r, "general_profile_compatibility_flags", 4);
                r.skip(6);
                out.u(r, "general_level_idc", 1);
            } else if (name == "btrt") {
                out.u(r, "bufferSizeDB", 4);
                out.u(r, "maxBitrate", 4);
                out.u(r, "avgBitrate", 4);
            } else if (name == "pasp") {
                out.u(r, "hSpacing", 4);
                out.u(r, "vSpacing", 4);
            } else if (name == "colr") {
                const std::string type = r.take(4);
                out.text("colour_type", type);
                if (type == "nclx" || type == "nclc") {
                    out.u(r, "colour_primaries", 2);
                    out.u(r, "transfer_characteristics", 2);
                    out.u(r, "matrix_coefficients", 2);
                    if (type == "nclx") {
                        out.integer("full_range_flag", r.u8() >> 7, r.last());
                    }
                }
            } else if (name == "fiel") {
                out.u(r, "fields", 1);
                out.u(r, "field_detail", 1);
            } else if (name == "gama") {
                out.fixed_16_16(r, "gamma");
            } else if (name == "esds") {
                decode_esds(r, out);
            } else {
                out.raw(name.str(), as_string(body));
            }
        } catch (const DecodeError&) {
            out.raw(name.str(), as_string(body));
        }
    }

    void decode_entry_children(ByteSpan body, FieldSink& out)
    {
        std::size_t pos = 0;
        while (body.size() - pos >= 8) {
            std::uint64_t size = (std::uint32_t(body[pos]) << 24)
                                 | (std::uint32_t(body[pos + 1]) << 16)
                                 | (std::uint32_t(body[pos + 2]) << 8)
                                 | std::uint32_t(body[pos + 3]);
            FourCC name;
            std::memcpy(name.bytes.data(), body.data() + pos + 4, 4);
            if (size == 0) {
                size = body.size() - pos;
            }
            if (size < 8 || size > body.size() - pos) {
                break;
            }
            decode_sample_entry_child(name, body.subspan(pos + 8, size - 8), out);
            pos += size;
        }
    }

    bool is_video_format(std::string_view f)
    {
        static const std::array<std::string_view, 14> kVideo = {
            "avc1", "avc3", "hvc1", "hev1", "mp4v", "jpeg", "mjpa", "apcn",
            "apch", "apcs", "apco", "ap4h", "vp09", "av01",
        };
        return std::find(kVideo.begin(), kVideo.end(), f) != kVideo.end();
    }

    bool is_audio_format(std::string_view f)
    {
        static const std::array<std::string_view, 10> kAudio = {
            "mp4a", "lpcm", "sowt", "twos", "ac-3", "ec-3", "samr", "sawb", "alac", "Opus",
        };
        return std::find(kAudio.begin(), kAudio.end(), f) != kAudio.end();
    }

    void decode_stsd(Reader& r, FieldSink& out, const std::string& handler)
    {
        full_box(r, out);
        const std::uint32_t count = r.u32();
        out.integer("entry_count", count, r.last());
        for (std::uint32_t i = 0; i < count && !r.empty(); ++i) {
            const std::uint32_t size = r.u32();
            if (size < 16 || size - 4 > r.remaining()) {
                throw DecodeError{"sample entry size out of range"};
            }
            Reader e(r.span(size - 4));
            const std::string format = e.take(4);
            out.text("format", format);
            e.skip(6);
            out.u(e, "data_reference_index", 2);

            const bool video = handler == "vide" || (handler.empty() && is_video_format(format));
            const bool audio = handler == "soun" || (handler.empty() && is_audio_format(format));
            if (video) {
                out.u(e, "entry_version", 2);
                out.u(e, "revision", 2);
                out.raw("vendor", e.take(4));
                out.u(e, "temporal_quality", 4);
                out.u(e, "spatial_quality", 4);
                out.u(e, "width", 2);
                out.u(e, "height", 2);
                out.fixed_16_16(e, "horizresolution");
                out.fixed_16_16(e, "vertresolution");
                out.u(e, "data_size", 4);
                out.u(e, "frame_count", 2);
                const std::string compressor = e.take(32);
                const std::size_t len = std::min<std::size_t>(
                    static_cast<unsigned char>(compressor[0]), 31);
                out.text_or_raw("compressorname", compressor.substr(1, len));
                out.u(e, "depth", 2);
                out.signed_integer("color_table_id", e.s16(), e.last());
                decode_entry_children(e.span(e.remaining()), out);
            } else if (audio) {
                const std::uint16_t version = e.u16();
                out.integer("entry_version", version, e.last());
                out.u(e, "revision", 2);
                out.raw("vendor", e.take(4));
                out.u(e, "channelcount", 2);
                out.u(e, "samplesize", 2);
                out.signed_integer("compression_id", e.s16(), e.last());
                out.u(e, "packet_size", 2);
                out.fixed_16_16(e, "samplerate");
                if (version == 1) {
                    out.u(e, "samples_per_packet", 4);
                    out.u(e, "bytes_per_packet", 4);
                    out.u(e, "bytes_per_frame", 4);
                    out.u(e, "bytes_per_sample", 4);
                } else if (version == 2) {
                    e.skip(4);
                    const std::uint64_t bits = e.u64();
                    double rate;
                    std::memcpy(&rate, &bits, sizeof(rate));
                    out.decimal("samplerate", rate, e.last());
                    out.u(e, "channelcount", 4);
                    e.skip(4);
                    out.u(e, "bits_per_channel", 4);
                    out.u(e, "format_flags", 4);
                    out.u(e, "bytes_per_packet", 4);
                    out.u(e, "frames_per_packet", 4);
                }
                decode_entry_children(e.span(e.remaining()), out);
            } else if (!e.empty()) {
                out.raw("entry_data", e.rest());
            }
        }
    }

    void decode_url(Reader& r, FieldSink& out)
    {
        full_box(r, out);
        if (!r.empty()) {
            out.text_or_raw("location", strip_trailing_nuls(r.rest()));
        }
    }

    void decode_keys(Reader& r, FieldSink& out)
    {
        full_box(r, out);
        out.u(r, "entry_count", 4);
    }

    std::vector<std::string> read_key_table(const BoxNode& keys)
    {
        std::vector<std::string> table;
        try {
            Reader r(keys.payload);
            r.skip(4);
            const std::uint32_t n = r.u32();
            for (std::uint32_t i = 0; i < n; ++i) {
                const std::uint32_t size = r.u32();
                if (size < 8) {
                    break;
                }
                r.skip(4);  // namespace, usually 'mdta'
                table.push_back(r.take(size - 8));
            }
        } catch (const DecodeError&) {
        }
        return table;
    }

    // Flattened XML, or a single raw field when the text is not XML.
    void decode_xml_or_raw(std::string body, const std::string& raw_key,
                           std::vector<Field>& fields, std::uint64_t offset,
                           std::vector<Warning>* warnings)
    {
        const std::size_t start = find_xml_start(body);
        if (start != std::string::npos) {
            try {
                for (Field& f : flatten_xml(std::string_view(body).substr(start))) {
                    set_field(fields, std::move(f.first), std::move(f.second));
                }
                return;
            } catch (const Error& e) {
                if (warnings) {
                    warnings->push_back({offset, 0, e.what()});
                }
            }
        }
        if (!body.empty()) {
            set_field(fields, raw_key, FieldValue::make_raw(std::move(body)));
        }
    }

    std::optional<FieldValue> decode_data_atom(ByteSpan payload)
    {
        // Walk the item's child atoms and take the first `data`.
        std::size_t pos = 0;
        while (payload.size() - pos >= 16) {
            Reader r(payload.subspan(pos));
            const std::uint32_t size = r.u32();
            const std::string name = r.take(4);
            if (size < 8 || size > payload.size() - pos) {
                return std::nullopt;
            }
            if (name == "data" && size >= 16) {
                const std::uint32_t type = r.u32() & 0x00FFFFFF;
                r.skip(4);  // locale
                std::string value = r.take(size - 16);
                switch (type) {
                case 1:
                    return text_or_raw_value(std::move(value));
                case 21:
                case 22:
                    if (value.size() >= 1 && value.size() <= 8 && value.size() != 5
                        && value.size() != 6 && value.size() != 7) {
                        std::uint64_t v = 0;
                        for (char c : value) {
                            v = (v << 8) | static_cast<unsigned char>(c);
                        }
                        std::int64_t s = static_cast<std::int64_t>(v);
                        if (type == 21 && value.size() < 8) {
                            const int bits = static_cast<int>(value.size() * 8);
                            if (v >> (bits - 1)) {
                                s = static_cast<std::int64_t>(v) - (std::int64_t(1) << bits);
                            }
                        }
                        return FieldValue::make_integer(s, value);
                    }
                    return FieldValue::make_raw(std::move(value));
                case 23:
                    if (value.size() == 4) {
                        std::uint32_t bits = 0;
                        for (char c : value) {
                            bits = (bits << 8) | static_cast<unsigned char>(c);
                        }
                        float f;
                        std::memcpy(&f, &bits, sizeof(f));
                        return FieldValue::make_decimal(f, value);
                    }
                    return FieldValue::make_raw(std::move(value));
                case 24:
                    if (value.size() == 8) {
                        std::uint64_t bits = 0;
                        for (char c : value) {
                            bits = (bits << 8) | static_cast<unsigned char>(c);
                        }
                        double d;
                        std::memcpy(&d, &bits, sizeof(d));
                        return FieldValue::make_decimal(d, value);
                    }
                    return FieldValue::make_raw(std::move(value));
                default:
                    return FieldValue::make_raw(std::move(value));
                }
            }
            pos += size;
        }
        return std::nullopt;
    }

    // Freeform `----` items name themselves with `mean` and `name` atoms.
    std::string freeform_key(ByteSpan payload)
    {
        std::string mean;
        std::string name;
        std::size_t pos = 0;
        while (payload.size() - pos >= 12) {
            Reader r(payload.subspan(pos));
            const std::uint32_t size = r.u32();
            const std::string atom = r.take(4);
            if (size < 12 || size > payload.size() - pos) {
                break;
            }
            r.skip(4);
            if (atom == "mean") {
                mean = r.take(size - 12);
            } else if (atom == "name") {
                name = r.take(size - 12);
            }
            pos += size;
        }
        return "----:" + mean + ":" + name;
    }

    void warn(std::vector<Warning>* warnings, std::uint64_t offset, std::string msg)
    {
        if (warnings) {
            warnings->push_back({offset, 0, std::move(msg)});
        }
    }

    // Matches `pattern` against the tail of `path`.
    bool path_matches(const std::string& pattern, const std::vector<std::string>& path)
    {
        std::vector<std::string_view> parts;
        std::string_view p = pattern;
        const bool anchored = !p.empty() && p.front() == '/';
        if (anchored) {
            p.remove_prefix(1);
        }
        while (!p.empty()) {
            const std::size_t slash = p.find('/');
            parts.push_back(p.substr(0, slash));
            if (slash == std::string_view::npos) {
                break;
            }
            p.remove_prefix(slash + 1);
        }
        if (parts.empty() || parts.size() > path.size()) {
            return false;
        }
        if (anchored && parts.size() != path.size()) {
            return false;
        }
        const std::size_t base = path.size() - parts.size();
        for (std::size_t i = 0; i < parts.size(); ++i) {
            if (parts[i] != "*" && parts[i] != path[base + i]) {
                return false;
            }
        }
        return true;
    }

    struct Context {
        std::string handler;
        std::vector<std::string> key_table;
    };

    std::string find_handler(const BoxNode& trak)
    {
        for (const BoxNode& c : trak.children) {
            if (c.header.name != "mdia") {
                continue;
            }
            for (const BoxNode& h : c.children) {
                if (h.header.name == "hdlr" && h.payload.size() >= 12) {
                    return as_string(h.payload.subspan(8, 4));
                }
            }
        }
        return {};
    }

    class Refiner {
    public:
        Refiner(const ExclusionList& exclusions, std::vector<Warning>* warnings)
            : exclusions_(exclusions), warnings_(warnings)
        {
        }

        std::optional<MetadataNode> node(const BoxNode& box,
                                         const std::vector<std::string>& parent_path,
                                         const std::vector<std::string>& parent_display,
                                         const Context& ctx)
        {
            std::vector<std::string> display = parent_display;
            display.push_back(box.header.name.display());
            if (exclusions_.excludes_node(display)) {
                return std::nullopt;
            }
            MetadataNode out;
            out.name = box.header.name.str();
            out.path = parent_path;
            out.path.push_back(out.name);

            if (box.is_container) {
                container(box, out, display, ctx);
            } else if (box.header.name == "uuid") {
                out.fields = refine_uuid(box, warnings_).fields;
            } else {
                out.fields = decode_leaf(box, ctx.handler, warnings_);
            }

            if (exclusions_.excludes_payload(display)) {
                out.fields.clear();
            }
            std::erase_if(out.fields, [&](const Field& f) {
                return exclusions_.excludes_key(f.first);
            });
            return out;
        }

    private:
        void container(const BoxNode& box, MetadataNode& out,
                       const std::vector<std::string>& display, const Context& ctx)
        {
            const FourCC& name = box.header.name;
            Context child_ctx = ctx;
            if (name == "trak") {
                child_ctx.handler = find_handler(box);
            }
            if (name == "meta") {
                child_ctx.key_table.clear();
                for (const BoxNode& c : box.children) {
                    if (c.header.name == "keys" && !c.is_container) {
                        child_ctx.key_table = read_key_table(c);
                    }
                }
            }
            if (name == "ilst") {
                const bool in_meta_variant
                    = box.path.size() >= 2 && box.path.back() == "meta"
                      && (box.path[box.path.size() - 2] == "udta"
                          || box.path[box.path.size() - 2] == "trak");
                out.fields = parse_ilst(box,
                                        in_meta_variant ? IlstPlacement::kInMeta
                                                        : IlstPlacement::kStandard,
                                        warnings_, &ctx.key_table);
                return;
            }
            if (name == "udta") {
                out.fields = parse_ilst(box, IlstPlacement::kDirectInUdta, warnings_);
            }
            for (const BoxNode& c : box.children) {
                if (name == "udta" && !c.is_container && c.header.name.bytes[0] == 0xA9) {
                    continue;
                }
                if (auto child = node(c, out.path, display, child_ctx)) {
                    out.children.push_back(std::move(*child));
                }
            }
        }

        const ExclusionList& exclusions_;
        std::vector<Warning>* warnings_;
    };

}  // namespace


ExclusionList ExclusionList::defaults()
{
    ExclusionList list;
    list.node_paths = {"mdat"};
    list.payload_paths = {"free", "skip", "wide", "mdat"};
    return list;
}

bool ExclusionList::excludes_node(const std::vector<std::string>& path) const
{
    return std::any_of(node_paths.begin(), node_paths.end(),
                       [&](const std::string& p) { return path_matches(p, path); });
}

bool ExclusionList::excludes_payload(const std::vector<std::string>& path) const
{
    return std::any_of(payload_paths.begin(), payload_paths.end(),
                       [&](const std::string& p) { return path_matches(p, path); });
}

bool ExclusionList::excludes_key(const std::string& key) const
{
    return std::find(field_keys.begin(), field_keys.end(), key) != field_keys.end();
}

std::vector<Field> parse_ilst(const BoxNode& node, IlstPlacement placement,
                              std::vector<Warning>* warnings,
                              const std::vector<std::string>* key_table)
{
    std::vector<Field> fields;
    for (const BoxNode& item : node.children) {
        const FourCC& name = item.header.name;
        if (placement == IlstPlacement::kDirectInUdta) {
            if (item.is_container || name.bytes[0] != 0xA9) {
                continue;
            }
            const ByteSpan p = item.payload;
            if (auto v = decode_data_atom(p)) {
                set_field(fields, name.str(), std::move(*v));
                continue;
            }
            if (p.size() >= 4) {
                const std::size_t len = (std::size_t(p[0]) << 8) | p[1];
                if (len + 4 <= p.size()) {
                    set_field(fields, name.str(), FieldValue::make_raw(as_string(p)));
                    continue;
                }
            }
            warn(warnings, item.offset,
                 "MalformedIlstEntry: '" + name.display() + "' in udta");
            continue;
        }

        if (item.is_container) {
            warn(warnings, item.offset,
                 "MalformedIlstEntry: container '" + name.display() + "' in ilst");
            continue;
        }
        std::string key = name.str();
        if (name == "----") {
            key = freeform_key(item.payload);
        } else if (key_table && !key_table->empty()) {
            const std::uint32_t index = (std::uint32_t(name.bytes[0]) << 24)
                                        | (std::uint32_t(name.bytes[1]) << 16)
                                        | (std::uint32_t(name.bytes[2]) << 8)
                                        | std::uint32_t(name.bytes[3]);
            if (index >= 1 && index <= key_table->size()) {
                key = (*key_table)[index - 1];
            }
        }
        if (auto v = decode_data_atom(item.payload)) {
            set_field(fields, std::move(key), std::move(*v));
        } else {
            warn(warnings, item.offset,
                 "MalformedIlstEntry: '" + name.display() + "' has no data atom");
        }
    }
    return fields;
}

MetadataNode refine_uuid(const BoxNode& node, std::vector<Warning>* warnings)
{
    MetadataNode out;
    out.name = node.header.name.str();
    for (const FourCC& p : node.path) {
        out.path.push_back(p.str());
    }
    out.path.push_back(out.name);

    const std::string payload = as_string(node.payload);
    const std::size_t id_len = std::min<std::size_t>(16, payload.size());
    set_field(out.fields, "uuid",
              FieldValue::make_text(to_hex(std::string_view(payload).substr(0, id_len))));
    decode_xml_or_raw(payload.substr(id_len), "raw", out.fields,
                      node.offset, warnings);
    return out;
}

std::vector<Field> decode_leaf(const BoxNode& node, const std::string& handler_type,
                               std::vector<Warning>* warnings)
{
    std::vector<Field> fields;
    FieldSink out(fields);
    Reader r(node.payload);
    const FourCC& name = node.header.name;
    try {
        if (name == "ftyp" || name == "styp") {
            decode_ftyp(r, out);
        } else if (name == "mvhd") {
            decode_mvhd(r, out, peek_version(node));
        } else if (name == "tkhd") {
            decode_tkhd(r, out, peek_version(node));
        } else if (name == "mdhd") {
            decode_mdhd(r, out, peek_version(node));
        } else if (name == "hdlr") {
            decode_hdlr(r, out);
        } else if (name == "vmhd") {
            full_box(r, out);
            out.u(r, "graphicsmode", 2);
            std::string color;
            for (int i = 0; i < 3; ++i) {
                color += (i ? " " : "") + std::to_string(r.u16());
            }
            out.text("opcolor", color);
        } else if (name == "smhd") {
            full_box(r, out);
            out.fixed_8_8(r, "balance");
        } else if (name == "nmhd" || name == "sthd" || name == "sdtp") {
            full_box(r, out);
        } else if (name == "stsd") {
            decode_stsd(r, out, handler_type);
        } else if (name == "stts" || name == "ctts" || name == "stss"
                   || name == "stsc" || name == "stco" || name == "co64"
                   || name == "stps") {
            decode_count_table(r, out);
        } else if (name == "stsz") {
            decode_stsz(r, out);
        } else if (name == "stz2") {
            decode_stz2(r, out);
        } else if (name == "sbgp") {
            const std::uint8_t v = peek_version(node);
            full_box(r, out);
            out.fourcc(r, "grouping_type");
            if (v == 1) {
                out.u(r, "grouping_type_parameter", 4);
            }
            out.u(r, "entry_count", 4);
        } else if (name == "sgpd") {
            full_box(r, out);
            out.fourcc(r, "grouping_type");
        } else if (name == "elst") {
            decode_elst(r, out, peek_version(node));
        } else if (name == "url " || name == "urn " || name == "alis"
                   || name == "rsrc") {
            decode_url(r, out);
        } else if (name == "keys") {
            decode_keys(r, out);
        } else if (name == "mehd") {
            const std::uint8_t v = peek_version(node);
            full_box(r, out);
            out.u(r, "fragment_duration", v == 1 ? 8 : 4);
        } else if (name == "trex") {
            full_box(r, out);
            out.u(r, "track_ID", 4);
            out.u(r, "default_sample_description_index", 4);
            out.u(r, "default_sample_duration", 4);
            out.u(r, "default_sample_size", 4);
            out.u(r, "default_sample_flags", 4);
        } else if (name == "mfhd") {
            full_box(r, out);
            out.u(r, "sequence_number", 4);
        } else if (name == "tfhd") {
            full_box(r, out);
            out.u(r, "track_ID", 4);
        } else if (name == "tfdt") {
            const std::uint8_t v = peek_version(node);
            full_box(r, out);
            out.u(r, "baseMediaDecodeTime", v == 1 ? 8 : 4);
        } else if (name == "trun") {
            full_box(r, out);
            out.u(r, "sample_count", 4);
        } else if (name == "xml ") {
            full_box(r, out);
            decode_xml_or_raw(r.rest(), "raw", fields, node.offset, warnings);
        } else if (name == "uuid") {
            return refine_uuid(node, warnings).fields;
        } else {
            decode_xml_or_raw(as_string(node.payload), "raw", fields, node.offset,
                              warnings);
        }
    } catch (const DecodeError& e) {
        warn(warnings, node.offset,
             "could not decode '" + name.display() + "': " + e.what
                 + "; kept as raw bytes");
        fields.clear();
        if (!node.payload.empty()) {
            fields.emplace_back("raw", FieldValue::make_raw(as_string(node.payload)));
        }
    }
    return fields;
}

MetadataNode refine(const ParseReport& tree, const ExclusionList& exclusions,
                    std::vector<Warning>* warnings)
{
    MetadataNode root;
    Refiner refiner(exclusions, warnings);
    for (const BoxNode& box : tree.tree) {
        if (auto n = refiner.node(box, {}, {}, Context {})) {
            root.children.push_back(std::move(*n));
        }
    }
    return root;
}

}  // namespace vidmeta
