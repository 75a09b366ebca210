#pragma once

#include <array>
#include <bit>
#include <cctype>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tangle/error.hpp"
#include "tangle/util.hpp"

namespace tangle {

// The refined Conventional Commits type set. Declaration order is the
// canonical order used for every serialization.
enum class ConcernLabel : std::uint8_t { feat, fix, refactor, docs, test, build, ci };

inline constexpr std::size_t kLabelCount = 7;

inline constexpr std::array<ConcernLabel, kLabelCount> kAllLabels = {
    ConcernLabel::feat, ConcernLabel::fix,   ConcernLabel::refactor, ConcernLabel::docs,
    ConcernLabel::test, ConcernLabel::build, ConcernLabel::ci,
};

inline constexpr std::array<std::string_view, kLabelCount> kLabelNames = {
    "feat", "fix", "refactor", "docs", "test", "build", "ci",
};

// Types removed by the refinement; they parse to ExcludedType, never to a label.
inline constexpr std::array<std::string_view, 3> kExcludedTypes = {"perf", "style", "chore"};

enum class Dimension : std::uint8_t { Purpose, Object };

constexpr std::string_view render(ConcernLabel l) noexcept { return kLabelNames[static_cast<std::size_t>(l)]; }

constexpr std::string_view render(Dimension d) noexcept { return d == Dimension::Purpose ? "purpose" : "object"; }

constexpr Dimension dimension_of(ConcernLabel l) noexcept
{
    switch (l) {
    case ConcernLabel::feat:
    case ConcernLabel::fix:
    case ConcernLabel::refactor:
        return Dimension::Purpose;
    case ConcernLabel::docs:
    case ConcernLabel::test:
    case ConcernLabel::build:
    case ConcernLabel::ci:
        return Dimension::Object;
    }
    return Dimension::Object;
}

namespace detail {

inline std::string normalize_label_text(std::string_view text)
{
    auto t = trim(text);
    // "feat(parser)!" -> "feat"
    if (auto paren = t.find('('); paren != std::string_view::npos)
        t = t.substr(0, paren);
    while (!t.empty() && (t.back() == '!' || t.back() == ':'))
        t.remove_suffix(1);
    t = trim(t);
    std::string out(t);
    for (auto& c : out)
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

} // namespace detail

// Non-throwing lookup on already-normalized text.
inline std::optional<ConcernLabel> find_label(std::string_view normalized) noexcept
{
    for (std::size_t i = 0; i < kLabelCount; ++i)
        if (kLabelNames[i] == normalized)
            return kAllLabels[i];
    return std::nullopt;
}

inline bool is_excluded_type(std::string_view normalized) noexcept
{
    for (auto e : kExcludedTypes)
        if (e == normalized)
            return true;
    return false;
}

inline ConcernLabel parse_label(std::string_view text)
{
    const auto norm = detail::normalize_label_text(text);
    if (auto l = find_label(norm))
        return *l;
    if (is_excluded_type(norm))
        throw ExcludedType("'" + norm + "' was removed from the label set");
    throw UnknownLabel("'" + std::string(text) + "'");
}

// Set of labels stored as a 7-bit mask; iteration is always canonical order.
class LabelSet {
public:
    constexpr LabelSet() = default;
    constexpr LabelSet(std::initializer_list<ConcernLabel> labels)
    {
        for (auto l : labels)
            insert(l);
    }

    static constexpr LabelSet from_mask(std::uint8_t mask) noexcept
    {
        LabelSet s;
        s.bits_ = mask & 0x7F;
        return s;
    }

    constexpr bool insert(ConcernLabel l) noexcept
    {
        const auto bit = mask_of(l);
        const bool fresh = (bits_ & bit) == 0;
        bits_ |= bit;
        return fresh;
    }
    constexpr void erase(ConcernLabel l) noexcept { bits_ &= static_cast<std::uint8_t>(~mask_of(l)); }
    constexpr bool contains(ConcernLabel l) const noexcept { return (bits_ & mask_of(l)) != 0; }
    constexpr std::size_t size() const noexcept { return static_cast<std::size_t>(std::popcount(bits_)); }
    constexpr bool empty() const noexcept { return bits_ == 0; }
    constexpr std::uint8_t mask() const noexcept { return bits_; }

    std::vector<ConcernLabel> labels() const
    {
        std::vector<ConcernLabel> out;
        for (auto l : kAllLabels)
            if (contains(l))
                out.push_back(l);
        return out;
    }

    std::vector<std::string> names() const
    {
        std::vector<std::string> out;
        for (auto l : labels())
            out.emplace_back(render(l));
        return out;
    }

    // Canonical comma-separated form, e.g. "feat,docs".
    std::string to_string(std::string_view sep = ",") const
    {
        std::string out;
        for (auto l : labels()) {
            if (!out.empty())
                out += sep;
            out += render(l);
        }
        return out;
    }

    constexpr LabelSet symmetric_difference(LabelSet other) const noexcept
    {
        return from_mask(static_cast<std::uint8_t>(bits_ ^ other.bits_));
    }

    friend constexpr bool operator==(LabelSet, LabelSet) = default;

private:
    static constexpr std::uint8_t mask_of(ConcernLabel l) noexcept
    {
        return static_cast<std::uint8_t>(1u << static_cast<unsigned>(l));
    }

    std::uint8_t bits_ = 0;
};

// Parses a comma/whitespace separated list of canonical labels; throws on
// the first bad entry.
inline LabelSet parse_label_list(std::string_view text)
{
    LabelSet out;
    std::string cur;
    auto flush = [&] {
        if (!cur.empty())
            out.insert(parse_label(cur));
        cur.clear();
    };
    for (char c : text) {
        if (c == ',' || std::isspace(static_cast<unsigned char>(c)))
            flush();
        else
            cur += c;
    }
    flush();
    return out;
}

} // namespace tangle
