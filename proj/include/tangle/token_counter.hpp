#pragma once

// Token counting backends. Every budget and length limit in the toolchain
// goes through TokenCounter::count.
//
// Both schemes treat whitespace as a separator only, so the count of a
// newline-joined text is the sum of the counts of its lines.

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tangle/error.hpp"
#include "tangle/util.hpp"

namespace tangle {

namespace detail {

constexpr bool is_space_byte(unsigned char c) noexcept
{
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

constexpr bool is_word_byte(unsigned char c) noexcept
{
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' || c >= 0x80;
}

inline bool decode_hex(std::string_view hex, std::string& out)
{
    if (hex.empty() || hex.size() % 2 != 0)
        return false;
    out.clear();
    auto nibble = [](char c) -> int {
        if (c >= '0' && c <= '9')
            return c - '0';
        if (c >= 'a' && c <= 'f')
            return c - 'a' + 10;
        if (c >= 'A' && c <= 'F')
            return c - 'A' + 10;
        return -1;
    };
    for (std::size_t i = 0; i < hex.size(); i += 2) {
        int hi = nibble(hex[i]), lo = nibble(hex[i + 1]);
        if (hi < 0 || lo < 0)
            return false;
        out += static_cast<char>(hi * 16 + lo);
    }
    return true;
}

} // namespace detail

// Rank table for byte-pair merges.
//
// File format: first line "#tangle-bpe-merges v1", then one merge per line
// as two hex-encoded byte strings separated by a single space, highest
// priority first. Text is pre-split into chunks: runs of [A-Za-z0-9_] and
// bytes >= 0x80, or any other single non-whitespace byte.
class BpeVocab {
public:
    static constexpr std::string_view kMagic = "#tangle-bpe-merges v1";

    static BpeVocab parse(std::string_view content, const std::string& origin = "<memory>")
    {
        BpeVocab v;
        auto lines = split_lines(content);
        if (lines.empty() || trim(lines.front()) != kMagic)
            throw VocabFileInvalid(origin + ": missing '" + std::string(kMagic) + "' header");
        std::string left, right;
        for (std::size_t i = 1; i < lines.size(); ++i) {
            auto line = trim(lines[i]);
            if (line.empty())
                continue;
            auto sp = line.find(' ');
            if (sp == std::string_view::npos || !detail::decode_hex(line.substr(0, sp), left)
                || !detail::decode_hex(trim(line.substr(sp + 1)), right))
                throw VocabFileInvalid(origin + ":" + std::to_string(i + 1) + ": bad merge line");
            v.ranks_.emplace(key(left, right), static_cast<std::uint32_t>(v.ranks_.size()));
        }
        v.digest_ = fnv1a64(content);
        return v;
    }

    static BpeVocab load(const std::string& path)
    {
        std::string content;
        try {
            content = read_file(path);
        } catch (const FileUnreadable&) {
            throw VocabFileInvalid("cannot read " + path);
        }
        return parse(content, path);
    }

    std::size_t merge_count() const noexcept { return ranks_.size(); }
    std::uint64_t digest() const noexcept { return digest_; }

    std::size_t count_chunk(std::string_view chunk) const
    {
        if (chunk.size() <= 1)
            return chunk.size();
        std::vector<std::string> syms;
        syms.reserve(chunk.size());
        for (char c : chunk)
            syms.emplace_back(1, c);
        std::string k;
        while (syms.size() > 1) {
            std::uint32_t best = UINT32_MAX;
            std::size_t best_at = 0;
            for (std::size_t i = 0; i + 1 < syms.size(); ++i) {
                k = key(syms[i], syms[i + 1]);
                if (auto it = ranks_.find(k); it != ranks_.end() && it->second < best) {
                    best = it->second;
                    best_at = i;
                }
            }
            if (best == UINT32_MAX)
                break;
            // Rewrite every non-overlapping occurrence of the winning pair.
            const std::string a = syms[best_at], b = syms[best_at + 1];
            std::vector<std::string> next;
            next.reserve(syms.size());
            for (std::size_t i = 0; i < syms.size();) {
                if (i + 1 < syms.size() && syms[i] == a && syms[i + 1] == b) {
                    next.push_back(a + b);
                    i += 2;
                } else {
                    next.push_back(std::move(syms[i]));
                    ++i;
                }
            }
            syms = std::move(next);
        }
        return syms.size();
    }

private:
    static std::string key(std::string_view a, std::string_view b)
    {
        std::string k;
        k.reserve(a.size() + b.size() + 4);
        const auto n = static_cast<std::uint32_t>(a.size());
        k.append(reinterpret_cast<const char*>(&n), sizeof n);
        k.append(a);
        k.append(b);
        return k;
    }

    std::unordered_map<std::string, std::uint32_t> ranks_;
    std::uint64_t digest_ = 0;
};

class TokenCounter {
public:
    enum class Scheme { Whitespace, BytePair };

    // Default: whitespace-separated words.
    TokenCounter() = default;

    static TokenCounter whitespace() { return TokenCounter{}; }

    static TokenCounter byte_pair(std::shared_ptr<const BpeVocab> vocab)
    {
        TokenCounter c;
        c.scheme_ = Scheme::BytePair;
        c.vocab_ = std::move(vocab);
        return c;
    }

    static TokenCounter byte_pair_from_file(const std::string& path)
    {
        return byte_pair(std::make_shared<const BpeVocab>(BpeVocab::load(path)));
    }

    Scheme scheme() const noexcept { return scheme_; }

    // Stable identity for manifests, e.g. "whitespace" or "bpe:<hash>".
    std::string identity() const
    {
        if (scheme_ == Scheme::Whitespace)
            return "whitespace";
        return "bpe:" + hex64(vocab_->digest());
    }

    std::size_t count(std::string_view text) const
    {
        std::size_t total = 0;
        std::size_t i = 0;
        const auto n = text.size();
        auto at = [&](std::size_t k) { return static_cast<unsigned char>(text[k]); };
        while (i < n) {
            if (detail::is_space_byte(at(i))) {
                ++i;
                continue;
            }
            if (scheme_ == Scheme::Whitespace) {
                while (i < n && !detail::is_space_byte(at(i)))
                    ++i;
                ++total;
                continue;
            }
            if (detail::is_word_byte(at(i))) {
                const auto start = i;
                while (i < n && detail::is_word_byte(at(i)))
                    ++i;
                total += vocab_->count_chunk(text.substr(start, i - start));
            } else {
                ++total;
                ++i;
            }
        }
        return total;
    }

private:
    Scheme scheme_ = Scheme::Whitespace;
    std::shared_ptr<const BpeVocab> vocab_;
};

inline std::size_t count_tokens(const TokenCounter& counter, std::string_view text) { return counter.count(text); }

} // namespace tangle
