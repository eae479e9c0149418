#pragma once

// Line and token helpers shared by the text-format parsers.

#include <cstddef>
#include <string_view>
#include <vector>

namespace pmtbn::text {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        auto pos = s.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(s.substr(start));
            return out;
        }
        out.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
}

struct Line {
    std::size_t number;  // 1-based
    std::string_view text;
};

/// Physical lines with '#' comments removed and whitespace trimmed; blank
/// lines dropped.
inline std::vector<Line> content_lines(std::string_view text) {
    std::vector<Line> out;
    std::size_t number = 0;
    for (auto raw : split(text, '\n')) {
        ++number;
        auto hash = raw.find('#');
        if (hash != std::string_view::npos) raw = raw.substr(0, hash);
        raw = trim(raw);
        if (!raw.empty()) out.push_back({number, raw});
    }
    return out;
}

}  // namespace pmtbn::text
