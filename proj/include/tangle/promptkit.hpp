#pragma once

// Classification prompt assembly and model-answer parsing.

#include <array>
#include <cctype>
#include <string>
#include <string_view>
#include <vector>

#include "tangle/budget.hpp"
#include "tangle/error.hpp"
#include "tangle/taxonomy.hpp"
#include "tangle/util.hpp"

namespace tangle {

// Same bytes as assets/prompt_template_v1.txt.
inline constexpr std::string_view kDefaultTemplateText =
    "You are a software engineer reviewing a commit. Classify every semantic concern the commit contains using "
    "the Conventional Commits types listed below. A commit may bundle several concerns; report each type that is "
    "present exactly once.\n"
    "\n"
    "<ccs_types>\n"
    "{{ccs_types}}\n"
    "</ccs_types>\n"
    "\n"
    "<labeling_instructions>\n"
    "{{instructions}}\n"
    "</labeling_instructions>\n"
    "\n"
    "<commit_message>\n"
    "{{message}}\n"
    "</commit_message>\n"
    "\n"
    "<tangled_code_diffs>\n"
    "{{diffs}}\n"
    "</tangled_code_diffs>\n"
    "\n"
    "You may reason briefly first. Finish with a single final line in exactly this form:\n"
    "Labels: <comma-separated types>\n";

inline constexpr std::string_view kTemplateVersion = "v1";

struct PromptTemplate {
    std::string text = std::string(kDefaultTemplateText);
    std::string version = std::string(kTemplateVersion);

    std::array<std::string, kLabelCount> definitions = {
        "a new feature or capability visible to users of the code",
        "a correction of faulty behaviour",
        "a restructuring of code that keeps its external behaviour unchanged",
        "documentation only, including comments inside source files",
        "adding or correcting tests",
        "the build system, packaging or external dependencies",
        "continuous integration configuration and scripts",
    };

    std::vector<std::string> instructions = {
        "Purpose types are feat, fix and refactor. Object types are docs, test, build and ci.",
        "Purpose-Purpose: when several purpose types could describe the same change, choose the one that best "
        "states why the change was made.",
        "Object-Object: when several object types could describe the same change, choose the one matching the "
        "functional role of the modified artefact.",
        "Purpose-Object: use a purpose type only when the change affects application behaviour or structure; "
        "otherwise use the object type. For example, editing comments in code is docs, not refactor or fix.",
    };

    static PromptTemplate from_file(const std::string& path)
    {
        PromptTemplate t;
        t.text = read_file(path);
        const auto problems = t.validate();
        if (!problems.empty())
            throw ConfigError(path + ": " + problems);
        return t;
    }

    std::string ccs_types_block() const
    {
        std::string out;
        for (std::size_t i = 0; i < kLabelCount; ++i) {
            if (i)
                out += '\n';
            out += "- ";
            out += kLabelNames[i];
            out += " (";
            out += render(dimension_of(kAllLabels[i]));
            out += "): ";
            out += definitions[i];
        }
        return out;
    }

    std::string instructions_block() const
    {
        std::string out;
        for (std::size_t i = 0; i < instructions.size(); ++i) {
            if (i)
                out += '\n';
            out += std::to_string(i + 1) + ". " + instructions[i];
        }
        return out;
    }

    // Empty when the template is usable; otherwise a description of what is wrong.
    std::string validate() const
    {
        std::size_t pos = 0;
        for (std::string_view section : {"<ccs_types>", "<labeling_instructions>", "<commit_message>", "<tangled_code_diffs>"}) {
            auto at = text.find(section, pos);
            if (at == std::string::npos)
                return "section " + std::string(section) + " missing or out of order";
            pos = at;
        }
        for (std::string_view ph : {"{{ccs_types}}", "{{instructions}}", "{{message}}", "{{diffs}}"})
            if (text.find(ph) == std::string::npos)
                return "placeholder " + std::string(ph) + " missing";
        const auto instr = instructions_block();
        for (std::string_view rule : {"Purpose-Purpose", "Object-Object", "Purpose-Object"})
            if (instr.find(rule) == std::string::npos)
                return "labeling rule " + std::string(rule) + " missing";
        return {};
    }

    // Identity of everything that shapes the prompt, for manifests.
    std::uint64_t digest() const { return fnv1a64(instructions_block(), fnv1a64(ccs_types_block(), fnv1a64(text))); }
};

namespace detail {

inline void replace_all(std::string& s, std::string_view from, std::string_view to)
{
    std::size_t pos = 0;
    while ((pos = s.find(from, pos)) != std::string::npos) {
        s.replace(pos, from.size(), to);
        pos += to.size();
    }
}

} // namespace detail

inline std::string build_prompt(const PromptTemplate& tpl, const TruncatedInput& input, bool include_message)
{
    // One left-to-right pass, so placeholders inside user content stay literal.
    const std::string& out = tpl.text;
    const std::string ccs = tpl.ccs_types_block();
    const std::string instr = tpl.instructions_block();
    const std::string message = include_message ? input.message : std::string{};
    const std::string diffs = input.rendered_diffs();
    struct Slot {
        std::string_view placeholder;
        const std::string* value;
    };
    const Slot slots[] = {{"{{ccs_types}}", &ccs}, {"{{instructions}}", &instr}, {"{{message}}", &message}, {"{{diffs}}", &diffs}};
    std::string result;
    std::size_t pos = 0;
    while (pos < out.size()) {
        const Slot* hit = nullptr;
        std::size_t hit_at = std::string::npos;
        for (const auto& s : slots) {
            auto at = out.find(s.placeholder, pos);
            if (at < hit_at) {
                hit_at = at;
                hit = &s;
            }
        }
        if (!hit) {
            result.append(out, pos, std::string::npos);
            break;
        }
        result.append(out, pos, hit_at - pos);
        result += *hit->value;
        pos = hit_at + hit->placeholder.size();
    }
    return result;
}

// --- answer parsing -------------------------------------------------------

enum class ParseStatus { ok, empty, unparseable, unknown_labels_dropped };

inline constexpr std::string_view render(ParseStatus s) noexcept
{
    switch (s) {
    case ParseStatus::ok:
        return "ok";
    case ParseStatus::empty:
        return "empty";
    case ParseStatus::unparseable:
        return "unparseable";
    case ParseStatus::unknown_labels_dropped:
        return "unknown_labels_dropped";
    }
    return "?";
}

inline ParseStatus parse_status_from(std::string_view s)
{
    for (auto st : {ParseStatus::ok, ParseStatus::empty, ParseStatus::unparseable, ParseStatus::unknown_labels_dropped})
        if (render(st) == s)
            return st;
    throw SchemaViolation("unknown parse status '" + std::string(s) + "'");
}

struct ParsedPrediction {
    LabelSet labels;
    ParseStatus status = ParseStatus::empty;
    std::string raw_text;
    std::vector<std::string> dropped_tokens;
};

// Canonical answer line the output instruction asks for.
inline std::string render_answer(LabelSet labels) { return "Labels: " + labels.to_string(", "); }

namespace detail {

inline std::vector<std::string> words_lower(std::string_view line)
{
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        const auto u = static_cast<unsigned char>(c);
        if (std::isalnum(u) || c == '_')
            cur += static_cast<char>(std::tolower(u));
        else if (!cur.empty())
            out.push_back(std::move(cur)), cur.clear();
    }
    if (!cur.empty())
        out.push_back(std::move(cur));
    return out;
}

inline bool mentions_label(std::string_view line)
{
    for (const auto& w : words_lower(line))
        if (find_label(w))
            return true;
    return false;
}

} // namespace detail

// Picks the last line mentioning a canonical type and reads the labels off
// it. Never throws.
inline ParsedPrediction parse_prediction(std::string_view raw)
{
    ParsedPrediction out;
    out.raw_text = std::string(raw);
    const auto lines = split_lines(raw);
    std::string_view answer;
    bool found = false;
    for (auto it = lines.rbegin(); it != lines.rend(); ++it) {
        if (detail::mentions_label(*it)) {
            answer = *it;
            found = true;
            break;
        }
    }
    if (!found) {
        out.status = ParseStatus::empty;
        return out;
    }
    // Drop a lead-in such as "Answer:" or "Final labels:".
    if (auto colon = answer.find(':'); colon != std::string_view::npos && !detail::mentions_label(answer.substr(0, colon)))
        answer = answer.substr(colon + 1);

    std::string token;
    auto flush = [&] {
        std::string_view t = token;
        while (!t.empty() && std::string_view("*`'\"[](){}.<>").find(t.front()) != std::string_view::npos)
            t.remove_prefix(1);
        while (!t.empty() && std::string_view("*`'\"[](){}.<>:!").find(t.back()) != std::string_view::npos)
            t.remove_suffix(1);
        if (!t.empty()) {
            const auto norm = detail::normalize_label_text(t);
            if (auto l = find_label(norm))
                out.labels.insert(*l);
            else
                out.dropped_tokens.emplace_back(t);
        }
        token.clear();
    };
    for (char c : answer) {
        if (c == ',' || c == ';' || c == '/' || c == '|' || std::isspace(static_cast<unsigned char>(c)))
            flush();
        else
            token += c;
    }
    flush();

    if (out.labels.empty())
        out.status = ParseStatus::unparseable;
    else if (!out.dropped_tokens.empty())
        out.status = ParseStatus::unknown_labels_dropped;
    else
        out.status = ParseStatus::ok;
    return out;
}

} // namespace tangle
