#pragma once

// Lossless unified-diff model. Every input line lands in exactly one of:
// a file header line, a hunk header, or a hunk body line, and render()
// reproduces the original bytes.

#include <charconv>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tangle/error.hpp"
#include "tangle/util.hpp"

namespace tangle {

struct LineRange {
    std::uint64_t start = 0;
    std::uint64_t count = 1;

    friend bool operator==(const LineRange&, const LineRange&) = default;
};

struct Hunk {
    std::string header; // "@@ -a,b +c,d @@ section"
    std::vector<std::string> body_lines;
    LineRange old_range;
    LineRange new_range;

    friend bool operator==(const Hunk&, const Hunk&) = default;
};

struct DiffFile {
    std::vector<std::string> header_lines;
    std::vector<Hunk> hunks;

    // Best-effort path from "diff --git a/x b/x" or "+++ b/x".
    std::string path() const
    {
        for (const auto& h : header_lines) {
            std::string_view v = h;
            if (v.starts_with("+++ ")) {
                v.remove_prefix(4);
                if (v.starts_with("b/"))
                    v.remove_prefix(2);
                if (v != "/dev/null")
                    return std::string(v);
            }
        }
        for (const auto& h : header_lines) {
            std::string_view v = h;
            if (v.starts_with("diff --git ")) {
                if (auto b = v.rfind(" b/"); b != std::string_view::npos)
                    return std::string(v.substr(b + 3));
            }
        }
        return {};
    }

    friend bool operator==(const DiffFile&, const DiffFile&) = default;
};

struct DiffDocument {
    std::vector<DiffFile> files;
    bool trailing_newline = false;

    std::size_t line_count() const
    {
        std::size_t n = 0;
        for (const auto& f : files) {
            n += f.header_lines.size();
            for (const auto& h : f.hunks)
                n += 1 + h.body_lines.size();
        }
        return n;
    }

    std::string render() const
    {
        std::string out;
        bool first = true;
        auto emit = [&](const std::string& line) {
            if (!first)
                out += '\n';
            out += line;
            first = false;
        };
        for (const auto& f : files) {
            for (const auto& h : f.header_lines)
                emit(h);
            for (const auto& hunk : f.hunks) {
                emit(hunk.header);
                for (const auto& b : hunk.body_lines)
                    emit(b);
            }
        }
        if (trailing_newline && !first)
            out += '\n';
        return out;
    }

    friend bool operator==(const DiffDocument&, const DiffDocument&) = default;
};

namespace detail {

inline bool consume_number(std::string_view& s, std::uint64_t& out)
{
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    if (ec != std::errc{} || ptr == s.data())
        return false;
    s.remove_prefix(static_cast<std::size_t>(ptr - s.data()));
    return true;
}

inline bool consume_range(std::string_view& s, char sign, LineRange& r)
{
    if (s.empty() || s.front() != sign)
        return false;
    s.remove_prefix(1);
    if (!consume_number(s, r.start))
        return false;
    r.count = 1;
    if (!s.empty() && s.front() == ',') {
        s.remove_prefix(1);
        if (!consume_number(s, r.count))
            return false;
    }
    return true;
}

} // namespace detail

// Parses "@@ -a[,b] +c[,d] @@[ section]". Returns nullopt on a bad shape.
inline std::optional<std::pair<LineRange, LineRange>> parse_hunk_header(std::string_view line)
{
    if (!line.starts_with("@@ "))
        return std::nullopt;
    line.remove_prefix(3);
    LineRange old_r, new_r;
    if (!detail::consume_range(line, '-', old_r))
        return std::nullopt;
    if (!line.starts_with(' '))
        return std::nullopt;
    line.remove_prefix(1);
    if (!detail::consume_range(line, '+', new_r))
        return std::nullopt;
    if (!line.starts_with(" @@"))
        return std::nullopt;
    return std::pair{old_r, new_r};
}

inline DiffDocument parse_unified_diff(std::string_view text)
{
    enum class State { None, Header, Body };

    DiffDocument doc;
    doc.trailing_newline = !text.empty() && text.back() == '\n';
    State state = State::None;
    std::uint64_t old_left = 0, new_left = 0;
    std::size_t lineno = 0;

    auto start_hunk = [&](std::string_view line) {
        auto ranges = parse_hunk_header(line);
        if (!ranges)
            throw MalformedHunkHeader("line " + std::to_string(lineno) + ": '" + std::string(line) + "'");
        Hunk h;
        h.header = std::string(line);
        h.old_range = ranges->first;
        h.new_range = ranges->second;
        old_left = h.old_range.count;
        new_left = h.new_range.count;
        doc.files.back().hunks.push_back(std::move(h));
        state = State::Body;
    };
    auto start_file = [&](std::string_view line) {
        doc.files.emplace_back();
        doc.files.back().header_lines.emplace_back(line);
        state = State::Header;
    };

    for (auto line : split_lines(text)) {
        ++lineno;
        const char lead = line.empty() ? '\0' : line.front();
        switch (state) {
        case State::None:
            if (line.starts_with("@@") || lead == '+' || lead == ' ' || lead == '\\'
                || (lead == '-' && !line.starts_with("--- ")))
                throw BodyOutsideHunk("line " + std::to_string(lineno) + " precedes any file header");
            start_file(line);
            break;
        case State::Header:
            if (line.starts_with("@@"))
                start_hunk(line);
            else if (line.starts_with("diff ") && !doc.files.back().header_lines.empty()
                     && doc.files.back().header_lines.front().starts_with("diff "))
                start_file(line);
            else
                doc.files.back().header_lines.emplace_back(line);
            break;
        case State::Body: {
            // Hunk line counts decide where the body ends; a hunk cut short
            // (fewer lines than announced) ends at the first non-body line.
            bool body = false;
            if (lead == '\\') {
                body = true;
            } else if ((lead == ' ' || line.empty()) && (old_left > 0 || new_left > 0)) {
                body = true;
                if (old_left)
                    --old_left;
                if (new_left)
                    --new_left;
            } else if (lead == '-' && old_left > 0) {
                body = true;
                --old_left;
            } else if (lead == '+' && new_left > 0) {
                body = true;
                --new_left;
            }
            if (body)
                doc.files.back().hunks.back().body_lines.emplace_back(line);
            else if (line.starts_with("@@"))
                start_hunk(line);
            else
                start_file(line);
            break;
        }
        }
    }
    return doc;
}

} // namespace tangle
