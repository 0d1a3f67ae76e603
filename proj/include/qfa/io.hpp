#pragma once

// Output helpers: round-trip number formatting, content hashing and the
// CSV layout used by every command (# metadata lines, header row, rows).

#include <charconv>
#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace qfa {

inline constexpr const char* tool_name = "qfa";
inline constexpr const char* tool_version = "1.0.0";

/// Shortest-safe round-trip form with 17 significant digits.
inline std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return ec == std::errc{} ? std::string(buf, end) : std::string("nan");
}

inline std::string format_optional(const std::optional<double>& v) { return v ? format_number(*v) : "NA"; }

inline std::string format_bool(bool b) { return b ? "true" : "false"; }

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i, v >>= 4) s[static_cast<std::size_t>(i)] = digits[v & 0xf];
    return s;
}

/// Quotes a field when it contains a delimiter, quote or line break.
inline std::string csv_field(std::string_view f) {
    if (f.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(f);
    std::string out = "\"";
    for (char c : f) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

class csv_writer {
public:
    explicit csv_writer(std::ostream& os) : os_(os) {}

    /// Written before the header as "# key: value".
    void meta(std::string_view key, std::string_view value) { os_ << "# " << key << ": " << value << '\n'; }

    void row(const std::vector<std::string>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) os_ << ',';
            os_ << csv_field(fields[i]);
        }
        os_ << '\n';
    }

    /// Standard provenance block every command emits.
    void provenance(std::string_view command, std::string_view config_hash, std::string_view seed,
                    std::string_view generator) {
        meta("tool", std::string(tool_name) + " " + tool_version);
        meta("command", command);
        meta("config_hash", config_hash);
        meta("seed", seed);
        meta("generator", generator);
    }

private:
    std::ostream& os_;
};

}  // namespace qfa
