#pragma once

// Experiment orchestration: config documents, grid execution into a raw
// JSON Lines outcome log (resumable), and report/comparison generation
// from that log alone.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "tangle/analytics.hpp"
#include "tangle/budget.hpp"
#include "tangle/corpus.hpp"
#include "tangle/inference.hpp"
#include "tangle/mock_backend.hpp"
#include "tangle/promptkit.hpp"
#include "tangle/tangler.hpp"
#include "tangle/token_counter.hpp"
#include "tangle/util.hpp"

namespace tangle {

// --- small parsing helpers ------------------------------------------------

// "1..5", "1,3,5", "[1, 2]" -> sorted unique values.
inline std::vector<std::size_t> parse_count_list(std::string_view text)
{
    std::string s(trim(text));
    if (!s.empty() && s.front() == '[' && s.back() == ']')
        s = s.substr(1, s.size() - 2);
    std::vector<std::size_t> out;
    auto to_num = [&](std::string_view v) -> std::size_t {
        v = trim(v);
        std::size_t n = 0;
        auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), n);
        if (ec != std::errc{} || p != v.data() + v.size())
            throw ConfigError("not a number: '" + std::string(v) + "'");
        return n;
    };
    std::string_view rest = s;
    while (!rest.empty()) {
        auto comma = rest.find(',');
        auto item = trim(rest.substr(0, comma));
        rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
        if (item.empty())
            continue;
        if (auto dots = item.find(".."); dots != std::string_view::npos) {
            const auto a = to_num(item.substr(0, dots)), b = to_num(item.substr(dots + 2));
            if (a > b)
                throw ConfigError("empty range '" + std::string(item) + "'");
            for (auto v = a; v <= b; ++v)
                out.push_back(v);
        } else {
            out.push_back(to_num(item));
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

// --- grid -------------------------------------------------------------------

struct GridCell {
    bool include_message = true;
    std::optional<std::size_t> budget; // nullopt: full diff, no truncation

    std::string tag() const
    {
        return std::string("msg=") + (include_message ? "on" : "off") + ";L=" + (budget ? std::to_string(*budget) : "full");
    }

    friend auto operator<=>(const GridCell&, const GridCell&) = default;
};

struct CounterSpec {
    std::string scheme = "whitespace";
    std::string vocab_path;

    TokenCounter make() const
    {
        if (scheme == "whitespace")
            return TokenCounter::whitespace();
        if (scheme == "bpe")
            return TokenCounter::byte_pair_from_file(vocab_path);
        throw ConfigError("unknown token counter scheme '" + scheme + "'");
    }
};

struct ExperimentConfig {
    std::string dataset_path;
    std::string log_path = "outcomes.jsonl";
    EndpointConfig endpoint;
    DecodingConfig decoding;
    std::vector<std::size_t> counts = {1, 2, 3, 4, 5};
    std::vector<bool> include_message = {true};
    std::vector<std::optional<std::size_t>> budgets = {std::nullopt};
    std::size_t runs = 3;
    std::uint64_t seed = 0;
    CounterSpec counter;
    std::string template_path; // empty: built-in template
    bool truth_hint = false;    // send ground truth to the backend (mock runs only)
    bool check_manifest = true;
    std::size_t sample_limit = 0; // 0: every sample
    std::size_t batch_size = 64;  // outcomes flushed to the log per batch
    std::optional<MockOptions> mock;

    std::vector<GridCell> cells() const
    {
        std::vector<GridCell> out;
        for (bool m : include_message)
            for (const auto& b : budgets)
                out.push_back({m, b});
        return out;
    }

    void validate() const
    {
        if (counts.empty() || include_message.empty() || budgets.empty())
            throw ConfigError("grid axes must be non-empty");
        for (auto n : counts)
            if (n < 1 || n > kLabelCount)
                throw ConfigError("concern count " + std::to_string(n) + " out of range");
        for (const auto& b : budgets)
            if (b && *b == 0)
                throw ConfigError("budget must be positive");
        if (runs < 1)
            throw ConfigError("runs must be >= 1");
        if (batch_size < 1)
            throw ConfigError("batch_size must be >= 1");
        endpoint.validate();
    }
};

namespace detail {

inline std::string unquote(std::string_view v)
{
    v = trim(v);
    if (v.size() >= 2 && (v.front() == '"' || v.front() == '\'') && v.back() == v.front())
        v = v.substr(1, v.size() - 2);
    return std::string(v);
}

inline bool parse_bool(const std::string& key, std::string_view v)
{
    if (v == "true" || v == "on" || v == "yes" || v == "1")
        return true;
    if (v == "false" || v == "off" || v == "no" || v == "0")
        return false;
    throw ConfigError(key + ": expected a boolean, got '" + std::string(v) + "'");
}

template <typename T>
T parse_number(const std::string& key, std::string_view v)
{
    T out{};
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || p != v.data() + v.size())
        throw ConfigError(key + ": expected a number, got '" + std::string(v) + "'");
    return out;
}

inline std::vector<std::string> split_list(std::string_view v)
{
    std::string s(trim(v));
    if (!s.empty() && s.front() == '[' && s.back() == ']')
        s = s.substr(1, s.size() - 2);
    std::vector<std::string> out;
    std::string_view rest = s;
    while (!rest.empty()) {
        auto comma = rest.find(',');
        auto item = unquote(rest.substr(0, comma));
        if (!item.empty())
            out.push_back(item);
        rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    }
    return out;
}

inline std::string resolve(const std::filesystem::path& base, const std::string& p)
{
    if (p.empty())
        return p;
    std::filesystem::path path(p);
    return path.is_absolute() ? p : (base / path).lexically_normal().string();
}

} // namespace detail

// Applies one "section.key = value" setting. Shared by the config reader
// and command-line overrides. Relative paths resolve against `base`.
inline void apply_setting(ExperimentConfig& c, const std::string& key, std::string_view raw, const std::filesystem::path& base)
{
    using namespace detail;
    const std::string v = unquote(raw);
    if (key == "dataset")
        c.dataset_path = resolve(base, v);
    else if (key == "log")
        c.log_path = resolve(base, v);
    else if (key == "seed" || key == "grid.seed")
        c.seed = parse_number<std::uint64_t>(key, v);
    else if (key == "endpoint.base_url")
        c.endpoint.base_url = v;
    else if (key == "endpoint.model")
        c.endpoint.model_name = v;
    else if (key == "endpoint.api_key_env")
        c.endpoint.api_key_env = v;
    else if (key == "endpoint.timeout")
        c.endpoint.timeout_seconds = std::stod(v);
    else if (key == "endpoint.max_in_flight")
        c.endpoint.max_in_flight = parse_number<std::size_t>(key, v);
    else if (key == "endpoint.retries")
        c.endpoint.max_retries = parse_number<std::size_t>(key, v);
    else if (key == "endpoint.retry_backoff")
        c.endpoint.retry_backoff_seconds = std::stod(v);
    else if (key == "decoding.temperature")
        c.decoding.temperature = std::stod(v);
    else if (key == "decoding.seed")
        c.decoding.seed = parse_number<std::int64_t>(key, v);
    else if (key == "decoding.max_tokens")
        c.decoding.max_output_tokens = parse_number<std::size_t>(key, v);
    else if (key == "grid.counts")
        c.counts = parse_count_list(v);
    else if (key == "grid.include_message") {
        c.include_message.clear();
        for (const auto& item : split_list(v))
            c.include_message.push_back(parse_bool(key, item));
    } else if (key == "grid.budgets") {
        c.budgets.clear();
        for (const auto& item : split_list(v)) {
            if (item == "full" || item == "none")
                c.budgets.emplace_back(std::nullopt);
            else
                c.budgets.emplace_back(parse_number<std::size_t>(key, item));
        }
    } else if (key == "grid.runs")
        c.runs = parse_number<std::size_t>(key, v);
    else if (key == "grid.sample_limit")
        c.sample_limit = parse_number<std::size_t>(key, v);
    else if (key == "counter.scheme")
        c.counter.scheme = v;
    else if (key == "counter.vocab")
        c.counter.vocab_path = resolve(base, v);
    else if (key == "prompt.template")
        c.template_path = resolve(base, v);
    else if (key == "run.truth_hint")
        c.truth_hint = parse_bool(key, v);
    else if (key == "run.check_manifest")
        c.check_manifest = parse_bool(key, v);
    else if (key == "run.batch_size")
        c.batch_size = parse_number<std::size_t>(key, v);
    else if (key.starts_with("mock.")) {
        if (!c.mock)
            c.mock = MockOptions{};
        auto& m = *c.mock;
        if (key == "mock.mode")
            m.mode = parse_mock_mode(v);
        else if (key == "mock.labels")
            m.fixed_labels = parse_label_list(v);
        else if (key == "mock.delay_ms")
            m.delay_seconds = std::stod(v) / 1000.0;
        else if (key == "mock.outlier_every")
            m.outlier_every = parse_number<std::size_t>(key, v);
        else if (key == "mock.outlier_delay_ms")
            m.outlier_delay_seconds = std::stod(v) / 1000.0;
        else if (key == "mock.noise_rate")
            m.noise_rate = std::stod(v);
        else if (key == "mock.seed")
            m.seed = parse_number<std::uint64_t>(key, v);
        else
            throw ConfigError("unknown key '" + key + "'");
        c.truth_hint = true;
    } else
        throw ConfigError("unknown key '" + key + "'");
}

// Plain key = value document with optional [section] headers and '#'
// comments. Paths are relative to `base_dir` (the config file's directory).
inline ExperimentConfig parse_config(std::string_view text, const std::filesystem::path& base_dir)
{
    ExperimentConfig c;
    std::string section;
    std::size_t lineno = 0;
    for (auto raw : split_lines(text)) {
        ++lineno;
        auto line = raw;
        // '#' starts a comment unless it is inside quotes.
        char quote = 0;
        for (std::size_t i = 0; i < line.size(); ++i) {
            const char ch = line[i];
            if (quote) {
                if (ch == quote)
                    quote = 0;
            } else if (ch == '"' || ch == '\'') {
                quote = ch;
            } else if (ch == '#') {
                line = line.substr(0, i);
                break;
            }
        }
        line = trim(line);
        if (line.empty())
            continue;
        if (line.front() == '[' && line.back() == ']') {
            section = std::string(trim(line.substr(1, line.size() - 2)));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = std::string(trim(line.substr(0, eq)));
        const std::string full = section.empty() ? key : section + "." + key;
        try {
            apply_setting(c, full, line.substr(eq + 1), base_dir);
        } catch (const ConfigError& e) {
            throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return c;
}

inline ExperimentConfig load_config(const std::string& path)
{
    const auto base = std::filesystem::absolute(path).parent_path();
    return parse_config(read_file(path), base);
}

// --- manifests --------------------------------------------------------------

inline std::string manifest_path(const std::string& data_path) { return data_path + ".manifest.json"; }

inline void write_manifest(const std::string& data_path, const nlohmann::ordered_json& m)
{
    write_file(manifest_path(data_path), m.dump(2) + "\n");
}

inline std::optional<nlohmann::json> read_manifest(const std::string& data_path)
{
    const auto p = manifest_path(data_path);
    if (!std::filesystem::exists(p))
        return std::nullopt;
    try {
        return nlohmann::json::parse(read_file(p));
    } catch (const nlohmann::json::exception& e) {
        throw ManifestMismatch(p + ": " + e.what());
    }
}

// Verifies the file content hash recorded in its sidecar manifest.
inline void verify_manifest(const std::string& data_path, std::string_view content, bool required)
{
    auto m = read_manifest(data_path);
    if (!m) {
        if (required)
            throw ManifestMismatch(manifest_path(data_path) + " not found");
        return;
    }
    const auto want = m->value("content_hash", std::string{});
    const auto got = hex64(fnv1a64(content));
    if (want != got)
        throw ManifestMismatch(data_path + ": content hash " + got + " does not match manifest " + want);
}

// --- outcome log ------------------------------------------------------------

struct OutcomeRecord {
    std::string model;
    GridCell cell;
    std::string sample_id;
    std::size_t n = 0;
    std::size_t run = 0;
    LabelSet truth;
    LabelSet predicted;
    ParseStatus status = ParseStatus::empty;
    double hamming = 0;
    std::optional<double> latency_seconds;
    std::size_t request_tokens = 0;
    std::size_t attempts = 0;
    std::string failure = "none";
    std::string error;
    bool truncated = false;

    using Key = std::tuple<std::string, GridCell, std::string, std::size_t>;
    Key key() const { return {model, cell, sample_id, run}; }

    nlohmann::ordered_json to_json() const
    {
        nlohmann::ordered_json j;
        j["model"] = model;
        j["cell"] = cell.tag();
        j["include_message"] = cell.include_message;
        j["budget"] = cell.budget ? nlohmann::ordered_json(*cell.budget) : nlohmann::ordered_json(nullptr);
        j["sample_id"] = sample_id;
        j["n"] = n;
        j["run"] = run;
        j["truth"] = truth.names();
        j["pred"] = predicted.names();
        j["status"] = render(status);
        j["hl"] = hamming;
        j["latency"] = latency_seconds ? nlohmann::ordered_json(*latency_seconds) : nlohmann::ordered_json(nullptr);
        j["request_tokens"] = request_tokens;
        j["attempts"] = attempts;
        j["failure"] = failure;
        j["error"] = error;
        j["truncated"] = truncated;
        return j;
    }

    static OutcomeRecord from_json(const nlohmann::json& j)
    {
        OutcomeRecord r;
        r.model = j.at("model").get<std::string>();
        r.cell.include_message = j.at("include_message").get<bool>();
        if (!j.at("budget").is_null())
            r.cell.budget = j.at("budget").get<std::size_t>();
        r.sample_id = j.at("sample_id").get<std::string>();
        r.n = j.at("n").get<std::size_t>();
        r.run = j.at("run").get<std::size_t>();
        for (const auto& l : j.at("truth"))
            r.truth.insert(parse_label(l.get<std::string>()));
        for (const auto& l : j.at("pred"))
            r.predicted.insert(parse_label(l.get<std::string>()));
        r.status = parse_status_from(j.at("status").get<std::string>());
        r.hamming = j.at("hl").get<double>();
        if (!j.at("latency").is_null())
            r.latency_seconds = j.at("latency").get<double>();
        r.request_tokens = j.at("request_tokens").get<std::size_t>();
        r.attempts = j.at("attempts").get<std::size_t>();
        r.failure = j.at("failure").get<std::string>();
        r.error = j.value("error", std::string{});
        r.truncated = j.value("truncated", false);
        return r;
    }

    bool failed() const { return failure != "none"; }
};

// Reads an outcome log. A trailing partial line (interrupted write) is
// ignored and reported through `partial_tail`.
inline std::vector<OutcomeRecord> read_outcome_log(const std::string& path, bool* partial_tail = nullptr)
{
    std::vector<OutcomeRecord> out;
    if (partial_tail)
        *partial_tail = false;
    if (!std::filesystem::exists(path))
        return out;
    const auto content = read_file(path);
    const auto lines = split_lines(content);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (trim(lines[i]).empty())
            continue;
        const bool last_unterminated = i + 1 == lines.size() && !content.empty() && content.back() != '\n';
        try {
            out.push_back(OutcomeRecord::from_json(nlohmann::json::parse(lines[i])));
        } catch (const std::exception& e) {
            if (last_unterminated) {
                if (partial_tail)
                    *partial_tail = true;
                break;
            }
            throw SchemaViolation(path + ":" + std::to_string(i + 1) + ": " + e.what());
        }
        if (last_unterminated && partial_tail)
            *partial_tail = true;
    }
    return out;
}

// --- grid execution -----------------------------------------------------------

struct GridSummary {
    std::size_t planned = 0;
    std::size_t skipped_existing = 0;
    std::size_t executed = 0;
    std::size_t failures = 0;
};

// Loads the dataset, filters it to the configured concern counts and
// sample limit (first k per count, dataset order).
inline std::vector<TangledCommit> load_grid_dataset(const ExperimentConfig& cfg)
{
    const auto content = read_file(cfg.dataset_path);
    verify_manifest(cfg.dataset_path, content, cfg.check_manifest);
    auto all = parse_dataset(content, cfg.dataset_path);
    std::vector<TangledCommit> out;
    std::map<std::size_t, std::size_t> taken;
    const std::set<std::size_t> counts(cfg.counts.begin(), cfg.counts.end());
    for (auto& s : all) {
        if (!counts.contains(s.concern_count))
            continue;
        if (cfg.sample_limit && taken[s.concern_count] >= cfg.sample_limit)
            continue;
        ++taken[s.concern_count];
        out.push_back(std::move(s));
    }
    return out;
}

// For every (cell, run, sample) not yet in the log: truncate, build the
// prompt, classify, append. Jobs are issued in batches with bounded
// concurrency; each batch is appended in job order, so an interrupted run
// resumes to the same log.
inline GridSummary execute_grid(const ExperimentConfig& cfg, const std::vector<TangledCommit>& dataset, const ChatClient& client,
                                const PromptTemplate& tpl, const TokenCounter& counter)
{
    cfg.validate();
    bool partial = false;
    auto existing = read_outcome_log(cfg.log_path, &partial);
    if (partial) {
        // Drop the torn tail so appends start on a line boundary.
        std::string rewritten;
        for (const auto& r : existing)
            rewritten += r.to_json().dump() + "\n";
        write_file(cfg.log_path, rewritten);
    }
    std::set<OutcomeRecord::Key> done;
    for (const auto& r : existing)
        done.insert(r.key());

    struct Job {
        GridCell cell;
        std::size_t run;
        const TangledCommit* sample;
    };
    std::vector<Job> jobs;
    GridSummary summary;
    for (const auto& cell : cfg.cells())
        for (std::size_t run = 0; run < cfg.runs; ++run)
            for (const auto& s : dataset) {
                ++summary.planned;
                if (done.contains({cfg.endpoint.model_name, cell, s.id, run})) {
                    ++summary.skipped_existing;
                    continue;
                }
                jobs.push_back({cell, run, &s});
            }

    std::ofstream log(cfg.log_path, std::ios::binary | std::ios::app);
    if (!log)
        throw FileUnreadable("cannot append to " + cfg.log_path);

    for (std::size_t begin = 0; begin < jobs.size(); begin += cfg.batch_size) {
        const auto end = std::min(jobs.size(), begin + cfg.batch_size);
        std::vector<OutcomeRecord> batch(end - begin);
        bounded_parallel_for(end - begin, cfg.endpoint.max_in_flight, [&](std::size_t k) {
            const auto& job = jobs[begin + k];
            const auto& s = *job.sample;
            // A full-diff cell is an unbounded budget: truncate() is then a no-op.
            const auto input = truncate(s, job.cell.include_message, TokenBudget{job.cell.budget.value_or(SIZE_MAX / 4)}, counter);
            const auto prompt = build_prompt(tpl, input, job.cell.include_message);
            RequestHints hints;
            if (cfg.truth_hint)
                hints.truth = s.labels;
            const auto outcome = client.classify(prompt, hints);

            auto& rec = batch[k];
            rec.model = cfg.endpoint.model_name;
            rec.cell = job.cell;
            rec.sample_id = s.id;
            rec.n = s.concern_count;
            rec.run = job.run;
            rec.truth = s.labels;
            rec.predicted = outcome.parsed.labels;
            rec.status = outcome.parsed.status;
            rec.hamming = hamming_loss(rec.predicted, rec.truth);
            rec.latency_seconds = outcome.latency_seconds;
            rec.request_tokens = outcome.request_tokens;
            rec.attempts = outcome.attempt;
            rec.failure = std::string(render(outcome.failure));
            rec.error = outcome.error;
            rec.truncated = input.any_truncated();
        });
        std::string chunk;
        for (const auto& r : batch) {
            chunk += r.to_json().dump();
            chunk += '\n';
            summary.failures += r.failed() ? 1 : 0;
        }
        log.write(chunk.data(), static_cast<std::streamsize>(chunk.size()));
        log.flush();
        summary.executed += batch.size();
    }
    return summary;
}

// --- aggregation --------------------------------------------------------------

struct CellStats {
    std::size_t outcomes = 0;
    std::size_t samples = 0;
    std::size_t failures = 0;
    double hl_mean = 0, hl_median = 0, hl_q1 = 0, hl_q3 = 0;
    std::size_t latency_kept = 0, latency_removed = 0;
    std::optional<double> latency_mean, latency_median, latency_min, latency_max;
    std::optional<double> tokens_latency_r; // Pearson r(request tokens, latency)
};

struct ComparisonRow {
    std::string model;
    std::string axis;      // which axis differs: "message" or "budget"
    GridCell left, right;
    std::string n;         // concern count or "all"
    ComparisonResult result;
};

struct ExperimentReport {
    // (model, cell tag, n or "all")
    std::map<std::tuple<std::string, GridCell, std::string>, CellStats> cells;
    std::vector<ComparisonRow> comparisons;
};

namespace detail {

inline CellStats aggregate(const std::vector<const OutcomeRecord*>& rows)
{
    CellStats st;
    st.outcomes = rows.size();
    std::vector<double> hl;
    std::set<std::string> samples;
    std::vector<double> lat, tok;
    for (const auto* r : rows) {
        hl.push_back(r->hamming);
        samples.insert(r->sample_id);
        if (r->failed())
            ++st.failures;
        if (r->latency_seconds) {
            lat.push_back(*r->latency_seconds);
            tok.push_back(static_cast<double>(r->request_tokens));
        }
    }
    st.samples = samples.size();
    std::sort(hl.begin(), hl.end());
    st.hl_mean = mean(hl);
    st.hl_median = quantile_sorted(hl, 0.5);
    st.hl_q1 = quantile_sorted(hl, 0.25);
    st.hl_q3 = quantile_sorted(hl, 0.75);
    if (!lat.empty()) {
        const auto f = iqr_filter(lat);
        st.latency_kept = f.kept.size();
        st.latency_removed = f.removed.size();
        st.latency_mean = mean(f.kept);
        st.latency_median = median(f.kept);
        st.latency_min = *std::min_element(f.kept.begin(), f.kept.end());
        st.latency_max = *std::max_element(f.kept.begin(), f.kept.end());
        // Correlation over the kept exchanges only.
        std::vector<double> kl, kt;
        for (std::size_t i = 0; i < lat.size(); ++i)
            if (lat[i] >= f.lower_fence && lat[i] <= f.upper_fence) {
                kl.push_back(lat[i]);
                kt.push_back(tok[i]);
            }
        try {
            st.tokens_latency_r = pearson_r(kt, kl);
        } catch (const DegenerateVariance&) {
        }
    }
    return st;
}

// Per-sample HL averaged over runs.
inline std::map<std::string, double> per_sample_hl(const std::vector<const OutcomeRecord*>& rows)
{
    std::map<std::string, std::pair<double, std::size_t>> acc;
    for (const auto* r : rows) {
        auto& a = acc[r->sample_id];
        a.first += r->hamming;
        ++a.second;
    }
    std::map<std::string, double> out;
    for (const auto& [id, a] : acc)
        out[id] = a.first / static_cast<double>(a.second);
    return out;
}

inline std::optional<ComparisonResult> compare_groups(const std::vector<const OutcomeRecord*>& a,
                                                     const std::vector<const OutcomeRecord*>& b)
{
    const auto ha = per_sample_hl(a), hb = per_sample_hl(b);
    std::vector<double> x, y;
    for (const auto& [id, v] : ha)
        if (auto it = hb.find(id); it != hb.end()) {
            x.push_back(v);
            y.push_back(it->second);
        }
    if (x.empty())
        return std::nullopt;
    return compare_paired(x, y);
}

inline std::string fmt(double v, int prec = 6)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", prec, v);
    return buf;
}

inline std::string fmt(const std::optional<double>& v, int prec = 6) { return v ? fmt(*v, prec) : std::string("NA"); }

inline std::string fmt_p(const std::optional<double>& p)
{
    if (!p)
        return "NA";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4g", *p);
    return buf;
}

} // namespace detail

inline ExperimentReport build_report(const std::vector<OutcomeRecord>& log)
{
    ExperimentReport rep;
    using GroupKey = std::tuple<std::string, GridCell, std::string>;
    std::map<GroupKey, std::vector<const OutcomeRecord*>> groups;
    for (const auto& r : log) {
        groups[{r.model, r.cell, std::to_string(r.n)}].push_back(&r);
        groups[{r.model, r.cell, "all"}].push_back(&r);
    }
    for (const auto& [key, rows] : groups)
        rep.cells[key] = detail::aggregate(rows);

    // Pairwise comparisons between cells that differ in exactly one axis.
    for (auto a = groups.begin(); a != groups.end(); ++a) {
        for (auto b = std::next(a); b != groups.end(); ++b) {
            const auto& [ma, ca, na] = a->first;
            const auto& [mb, cb, nb] = b->first;
            if (ma != mb || na != nb)
                continue;
            std::string axis;
            if (ca.include_message != cb.include_message && ca.budget == cb.budget)
                axis = "message";
            else if (ca.include_message == cb.include_message && ca.budget != cb.budget)
                axis = "budget";
            else
                continue;
            auto res = detail::compare_groups(a->second, b->second);
            if (!res)
                continue;
            // Message axis reads "on vs off"; budget axis reads larger vs smaller (full first).
            GridCell left = ca, right = cb;
            if (axis == "message" && !left.include_message) {
                std::swap(left, right);
                res = detail::compare_groups(b->second, a->second);
            }
            rep.comparisons.push_back({ma, axis, left, right, na, *res});
        }
    }
    return rep;
}

inline std::string report_csv(const ExperimentReport& rep)
{
    using detail::fmt;
    std::string out = "model,cell,include_message,budget,n,samples,outcomes,failures,hl_mean,hl_median,hl_q1,hl_q3,"
                      "latency_kept,latency_removed,latency_mean,latency_median,latency_min,latency_max,tokens_latency_r\n";
    for (const auto& [key, st] : rep.cells) {
        const auto& [model, cell, n] = key;
        out += model + "," + cell.tag() + "," + (cell.include_message ? "true" : "false") + ","
               + (cell.budget ? std::to_string(*cell.budget) : "full") + "," + n + "," + std::to_string(st.samples) + ","
               + std::to_string(st.outcomes) + "," + std::to_string(st.failures) + "," + fmt(st.hl_mean) + ","
               + fmt(st.hl_median) + "," + fmt(st.hl_q1) + "," + fmt(st.hl_q3) + "," + std::to_string(st.latency_kept) + ","
               + std::to_string(st.latency_removed) + "," + fmt(st.latency_mean) + "," + fmt(st.latency_median) + ","
               + fmt(st.latency_min) + "," + fmt(st.latency_max) + "," + fmt(st.tokens_latency_r) + "\n";
    }
    return out;
}

inline std::string comparisons_csv(const ExperimentReport& rep)
{
    using detail::fmt;
    std::string out = "model,axis,left,right,n,n_pairs,a12,magnitude,p_value,method\n";
    for (const auto& c : rep.comparisons)
        out += c.model + "," + c.axis + "," + c.left.tag() + "," + c.right.tag() + "," + c.n + ","
               + std::to_string(c.result.n_pairs) + "," + fmt(c.result.a12) + "," + std::string(a12_magnitude(c.result.a12))
               + "," + detail::fmt_p(c.result.p_value) + ","
               + (c.result.method ? std::string(render(*c.result.method)) : std::string("degenerate")) + "\n";
    return out;
}

inline std::string report_markdown(const ExperimentReport& rep)
{
    using detail::fmt;
    std::string out = "# Experiment report\n\n## Hamming loss and latency per cell\n\n";
    out += "| model | cell | n | samples | outcomes | failures | HL mean | HL median | HL Q1 | HL Q3 | latency median (s) | "
           "latency outliers removed |\n";
    out += "|---|---|---|---|---|---|---|---|---|---|---|---|\n";
    for (const auto& [key, st] : rep.cells) {
        const auto& [model, cell, n] = key;
        out += "| " + model + " | " + cell.tag() + " | " + n + " | " + std::to_string(st.samples) + " | "
               + std::to_string(st.outcomes) + " | " + std::to_string(st.failures) + " | " + fmt(st.hl_mean, 4) + " | "
               + fmt(st.hl_median, 4) + " | " + fmt(st.hl_q1, 4) + " | " + fmt(st.hl_q3, 4) + " | "
               + fmt(st.latency_median, 4) + " | " + std::to_string(st.latency_removed) + " |\n";
    }
    out += "\n## Pairwise comparisons\n\n";
    out += "A12 < 0.5 means the left configuration tends to lower Hamming loss. Magnitude labels use the conventional "
           "0.56 / 0.64 / 0.71 thresholds.\n\n";
    out += "| model | axis | left | right | n | pairs | A12 | magnitude | p-value |\n";
    out += "|---|---|---|---|---|---|---|---|---|\n";
    for (const auto& c : rep.comparisons)
        out += "| " + c.model + " | " + c.axis + " | " + c.left.tag() + " | " + c.right.tag() + " | " + c.n + " | "
               + std::to_string(c.result.n_pairs) + " | " + fmt(c.result.a12, 3) + " | "
               + std::string(a12_magnitude(c.result.a12)) + " | " + detail::fmt_p(c.result.p_value) + " |\n";
    return out;
}

// Pairs two outcome logs (e.g. two models) on (cell, n, sample).
inline std::vector<ComparisonRow> compare_logs(const std::vector<OutcomeRecord>& a, const std::vector<OutcomeRecord>& b)
{
    using GroupKey = std::tuple<GridCell, std::string>;
    std::map<GroupKey, std::vector<const OutcomeRecord*>> ga, gb;
    std::string model_a, model_b;
    for (const auto& r : a) {
        ga[{r.cell, std::to_string(r.n)}].push_back(&r);
        ga[{r.cell, "all"}].push_back(&r);
        model_a = r.model;
    }
    for (const auto& r : b) {
        gb[{r.cell, std::to_string(r.n)}].push_back(&r);
        gb[{r.cell, "all"}].push_back(&r);
        model_b = r.model;
    }
    std::vector<ComparisonRow> out;
    for (const auto& [key, rows] : ga) {
        auto it = gb.find(key);
        if (it == gb.end())
            continue;
        auto res = detail::compare_groups(rows, it->second);
        if (!res)
            continue;
        const auto& [cell, n] = key;
        out.push_back({model_a + " vs " + model_b, "log", cell, cell, n, *res});
    }
    return out;
}

inline std::string comparison_markdown(const std::vector<ComparisonRow>& rows)
{
    using detail::fmt;
    std::string out = "| models | cell | n | pairs | A12 | magnitude | p-value | method |\n|---|---|---|---|---|---|---|---|\n";
    for (const auto& c : rows)
        out += "| " + c.model + " | " + c.left.tag() + " | " + c.n + " | " + std::to_string(c.result.n_pairs) + " | "
               + fmt(c.result.a12, 3) + " | " + std::string(a12_magnitude(c.result.a12)) + " | "
               + detail::fmt_p(c.result.p_value) + " | "
               + (c.result.method ? std::string(render(*c.result.method)) : std::string("degenerate")) + " |\n";
    return out;
}

} // namespace tangle
