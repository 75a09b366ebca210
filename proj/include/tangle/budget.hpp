#pragma once

// Header-preserving truncation of tangled commits under a token budget L.
//
// The preserved prefix p of a segment is every file header line plus the
// first hunk header of each file. With |m| the message tokens (0 when the
// message is excluded), the diff bodies share
//
//     L' = max(L - |m| - |p|, 0)
//
// split evenly across the n segments; the first L' mod n segments get one
// extra token. Each body is cut from the tail at a whole-line boundary.
// Nothing is cut when the whole commit already fits in L.

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "tangle/diffmodel.hpp"
#include "tangle/tangler.hpp"
#include "tangle/token_counter.hpp"

namespace tangle {

inline constexpr std::array<std::size_t, 5> kDefaultBudgetGrid = {1024, 2048, 4096, 8192, 12288};

struct TokenBudget {
    std::size_t tokens = 0;
};

constexpr std::size_t remaining_budget(std::size_t budget, std::size_t message_tokens, std::size_t prefix_tokens) noexcept
{
    const auto used = message_tokens + prefix_tokens;
    return used >= budget ? 0 : budget - used;
}

// Even split of `remaining` over `n` segments, remainder to the front.
inline std::vector<std::size_t> segment_shares(std::size_t remaining, std::size_t n)
{
    std::vector<std::size_t> shares(n, n ? remaining / n : 0);
    for (std::size_t i = 0; n && i < remaining % n; ++i)
        ++shares[i];
    return shares;
}

// One diff segment flattened into document-order lines, each tagged as
// preserved prefix or truncatable body.
struct SegmentLayout {
    struct Line {
        std::string text;
        bool prefix = false;
    };
    std::vector<Line> lines;
    bool trailing_newline = false;

    static SegmentLayout of(const std::string& diff)
    {
        SegmentLayout lay;
        try {
            const auto doc = parse_unified_diff(diff);
            const bool has_hunks = std::any_of(doc.files.begin(), doc.files.end(), [](const DiffFile& f) { return !f.hunks.empty(); });
            if (!has_hunks)
                throw MalformedHunkHeader("no hunks");
            lay.trailing_newline = doc.trailing_newline;
            for (const auto& f : doc.files) {
                for (const auto& h : f.header_lines)
                    lay.lines.push_back({h, true});
                for (std::size_t k = 0; k < f.hunks.size(); ++k) {
                    lay.lines.push_back({f.hunks[k].header, k == 0});
                    for (const auto& b : f.hunks[k].body_lines)
                        lay.lines.push_back({b, false});
                }
            }
        } catch (const Error&) {
            // Not a unified diff (or no hunks): no prefix, every line is body.
            lay = {};
            lay.trailing_newline = !diff.empty() && diff.back() == '\n';
            for (auto l : split_lines(diff))
                lay.lines.push_back({std::string(l), false});
        }
        return lay;
    }

    std::string render(std::size_t keep_body) const
    {
        std::string out;
        bool first = true;
        std::size_t body_seen = 0;
        for (const auto& l : lines) {
            if (!l.prefix && body_seen++ >= keep_body)
                continue;
            if (!first)
                out += '\n';
            out += l.text;
            first = false;
        }
        if (trailing_newline && !first)
            out += '\n';
        return out;
    }

    std::string prefix_text() const
    {
        std::string out;
        for (const auto& l : lines)
            if (l.prefix) {
                out += l.text;
                out += '\n';
            }
        return out;
    }

    std::string body_text(std::size_t keep_body) const
    {
        std::string out;
        std::size_t seen = 0;
        for (const auto& l : lines)
            if (!l.prefix && seen++ < keep_body) {
                out += l.text;
                out += '\n';
            }
        return out;
    }

    std::size_t body_line_count() const
    {
        return static_cast<std::size_t>(std::count_if(lines.begin(), lines.end(), [](const Line& l) { return !l.prefix; }));
    }
};

struct TruncatedInput {
    std::string message; // empty when excluded
    std::vector<std::string> preserved_prefixes;
    std::vector<std::string> segment_bodies; // retained body lines
    std::vector<std::string> segments;       // rendered, well-formed up to the cut
    std::vector<std::string> source_ids;
    std::vector<bool> truncated_flags;
    std::vector<std::size_t> shares; // empty when nothing had to be cut
    std::size_t budget = 0;
    std::size_t message_tokens = 0;
    std::size_t prefix_tokens = 0;
    std::size_t remaining = 0; // L'
    std::size_t tokens_used = 0;
    bool over_budget = false; // |m| + |p| > L

    bool any_truncated() const { return std::find(truncated_flags.begin(), truncated_flags.end(), true) != truncated_flags.end(); }

    std::string rendered_diffs() const
    {
        std::string out;
        for (std::size_t i = 0; i < segments.size(); ++i) {
            if (i > 0) {
                if (!out.empty() && out.back() != '\n')
                    out += '\n';
                out += '\n';
            }
            out += segments[i];
        }
        return out;
    }

    // Message and diffs as one text, the unit the budget is measured on.
    std::string rendered() const { return message.empty() ? rendered_diffs() : message + "\n" + rendered_diffs(); }

    // Rebuilds a commit from the truncated payload (labels are not carried).
    TangledCommit as_commit() const
    {
        TangledCommit t;
        t.merged_message = message;
        for (std::size_t i = 0; i < segments.size(); ++i)
            t.diff_segments.push_back({i < source_ids.size() ? source_ids[i] : std::string{}, segments[i]});
        t.concern_count = segments.size();
        return t;
    }
};

inline TruncatedInput truncate(const TangledCommit& commit, bool include_message, TokenBudget budget,
                               const TokenCounter& counter)
{
    TruncatedInput out;
    out.budget = budget.tokens;
    if (include_message) {
        out.message = commit.merged_message;
        out.message_tokens = counter.count(out.message);
    }
    const auto n = commit.diff_segments.size();
    std::vector<SegmentLayout> layouts;
    std::vector<std::vector<std::size_t>> body_tokens(n);
    std::size_t body_total = 0;
    for (std::size_t i = 0; i < n; ++i) {
        layouts.push_back(SegmentLayout::of(commit.diff_segments[i].diff));
        for (const auto& l : layouts[i].lines) {
            const auto t = counter.count(l.text);
            if (l.prefix)
                out.prefix_tokens += t;
            else {
                body_tokens[i].push_back(t);
                body_total += t;
            }
        }
        out.source_ids.push_back(commit.diff_segments[i].source_id);
    }
    out.over_budget = out.message_tokens + out.prefix_tokens > out.budget;
    out.remaining = remaining_budget(out.budget, out.message_tokens, out.prefix_tokens);

    const bool fits = !out.over_budget && body_total <= out.remaining;
    if (!fits)
        out.shares = segment_shares(out.remaining, n);

    out.tokens_used = out.message_tokens + out.prefix_tokens;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& lay = layouts[i];
        std::size_t keep = body_tokens[i].size();
        std::size_t used = 0;
        if (!fits) {
            // A zero share keeps no body at all, not even token-free lines.
            keep = 0;
            while (out.shares[i] > 0 && keep < body_tokens[i].size() && used + body_tokens[i][keep] <= out.shares[i])
                used += body_tokens[i][keep++];
        } else {
            for (auto t : body_tokens[i])
                used += t;
        }
        out.tokens_used += used;
        out.truncated_flags.push_back(keep < body_tokens[i].size());
        out.preserved_prefixes.push_back(lay.prefix_text());
        out.segment_bodies.push_back(lay.body_text(keep));
        out.segments.push_back(fits ? commit.diff_segments[i].diff : lay.render(keep));
    }
    return out;
}

} // namespace tangle
