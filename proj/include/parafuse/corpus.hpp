#pragma once

/// Case ingestion: segmentation into intro / summary / numbered paragraphs,
/// French-segment removal, boilerplate deduplication, dataset splits and the
/// normalized JSON-lines interchange format.

#include <algorithm>
#include <charconv>
#include <cstddef>
#include <filesystem>
#include <initializer_list>
#include <iostream>
#include <map>
#include <optional>
#include <regex>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include <json.hpp>

#include "parafuse/error.hpp"
#include "parafuse/io.hpp"
#include "parafuse/qrels.hpp"
#include "parafuse/text.hpp"

namespace parafuse::corpus {

enum class SegmentKind { intro, summary, paragraph };

inline std::string_view to_string(SegmentKind kind)
{
    switch (kind) {
        case SegmentKind::intro:
            return "intro";
        case SegmentKind::summary:
            return "summary";
        case SegmentKind::paragraph:
            return "paragraph";
    }
    return "paragraph";
}

/// Identifies one indexable segment of a case: "caseid#kind#index".
struct ParagraphRef {
    std::string case_id;
    SegmentKind kind = SegmentKind::paragraph;
    std::size_t index = 0;

    [[nodiscard]] std::string str() const
    {
        return case_id + '#' + std::string(to_string(kind)) + '#' + std::to_string(index);
    }

    /// Parses from the right so case ids may themselves contain '#'.
    static std::optional<ParagraphRef> try_parse(std::string_view id)
    {
        auto const last = id.rfind('#');
        if (last == std::string_view::npos || last == 0) {
            return std::nullopt;
        }
        auto const mid = id.rfind('#', last - 1);
        if (mid == std::string_view::npos || mid == 0) {
            return std::nullopt;
        }
        auto const kind_str = id.substr(mid + 1, last - mid - 1);
        auto const index_str = id.substr(last + 1);
        ParagraphRef ref;
        if (kind_str == "intro") {
            ref.kind = SegmentKind::intro;
        } else if (kind_str == "summary") {
            ref.kind = SegmentKind::summary;
        } else if (kind_str == "paragraph") {
            ref.kind = SegmentKind::paragraph;
        } else {
            return std::nullopt;
        }
        if (index_str.empty() || (index_str.size() > 1 && index_str[0] == '0')) {
            return std::nullopt;
        }
        auto [ptr, ec] =
            std::from_chars(index_str.data(), index_str.data() + index_str.size(), ref.index);
        if (ec != std::errc() || ptr != index_str.data() + index_str.size()) {
            return std::nullopt;
        }
        ref.case_id = std::string(id.substr(0, mid));
        return ref;
    }

    static ParagraphRef parse(std::string_view id)
    {
        auto ref = try_parse(id);
        if (!ref) {
            throw Error("not a paragraph id: '" + std::string(id) + "'");
        }
        return *ref;
    }

    friend bool operator==(ParagraphRef const&, ParagraphRef const&) = default;
};

struct Case {
    std::string case_id;
    std::optional<std::string> intro;
    std::optional<std::string> summary;
    std::vector<std::string> paragraphs;
    std::size_t raw_length_words = 0;

    [[nodiscard]] bool empty() const { return !intro && !summary && paragraphs.empty(); }

    /// Intro and summary (when present) followed by the numbered paragraphs.
    [[nodiscard]] std::vector<std::pair<ParagraphRef, std::string_view>> segments() const
    {
        std::vector<std::pair<ParagraphRef, std::string_view>> out;
        out.reserve(paragraphs.size() + 2);
        if (intro) {
            out.emplace_back(ParagraphRef{case_id, SegmentKind::intro, 0}, *intro);
        }
        if (summary) {
            out.emplace_back(ParagraphRef{case_id, SegmentKind::summary, 0}, *summary);
        }
        for (std::size_t i = 0; i < paragraphs.size(); ++i) {
            out.emplace_back(ParagraphRef{case_id, SegmentKind::paragraph, i}, paragraphs[i]);
        }
        return out;
    }

    /// Whole-document text: intro, summary and paragraphs joined by newlines.
    [[nodiscard]] std::string full_text() const
    {
        std::string out;
        for (auto const& [ref, segment] : segments()) {
            if (!out.empty()) {
                out.push_back('\n');
            }
            out.append(segment);
        }
        return out;
    }

    [[nodiscard]] std::size_t word_count() const
    {
        std::size_t n = 0;
        for (auto const& [ref, segment] : segments()) {
            n += text::count_words(segment);
        }
        return n;
    }

    friend bool operator==(Case const&, Case const&) = default;
};

inline constexpr std::string_view default_marker_pattern = R"(^\s*(?:\[(\d+)\]|(\d+)\.)(?:\s+|$))";

struct SegmentationOptions {
    /// Paragraph marker; the first non-empty capture group is the paragraph number
    /// and the text after the match is the paragraph's first line.
    std::string marker_pattern{default_marker_pattern};
    /// Lines equal (case-insensitively, after trimming) to one of these open the summary.
    std::vector<std::string> summary_headers{"summary:", "présumé"};
};

namespace detail {

inline std::optional<std::string> normalized_segment(std::vector<std::string_view> const& lines)
{
    std::string joined;
    for (auto const line : lines) {
        joined.append(line);
        joined.push_back('\n');
    }
    auto norm = text::normalize_whitespace(joined);
    if (norm.empty()) {
        return std::nullopt;
    }
    return norm;
}

}  // namespace detail

/// Paragraph marker matcher compiled once per options object.
class Segmenter {
   public:
    explicit Segmenter(SegmentationOptions options = {}) : options_(std::move(options))
    {
        try {
            marker_ = std::regex(options_.marker_pattern, std::regex::ECMAScript);
        } catch (std::regex_error const& e) {
            throw ValidationError("invalid paragraph marker pattern '" + options_.marker_pattern +
                                  "': " + e.what());
        }
        for (auto const& h : options_.summary_headers) {
            headers_.insert(text::to_lower(text::trim(h)));
        }
    }

    /// Splits raw case text. Paragraph numbers must run 1, 2, 3, ...; a marker
    /// with an unexpected number is ordinary text of the current segment.
    [[nodiscard]] Case segment(std::string_view raw, std::string case_id = {}) const
    {
        if (text::trim(raw).empty()) {
            throw Error("empty case" + (case_id.empty() ? std::string() : " '" + case_id + "'"));
        }
        Case result;
        result.case_id = std::move(case_id);
        result.raw_length_words = text::count_words(raw);

        std::vector<std::string_view> preamble;
        std::vector<std::vector<std::string_view>> paragraphs;
        std::size_t expected = 1;
        for (auto const line : text::split_lines(raw)) {
            if (auto content = match_marker(line, expected)) {
                paragraphs.emplace_back();
                paragraphs.back().push_back(*content);
                ++expected;
            } else if (!paragraphs.empty()) {
                paragraphs.back().push_back(line);
            } else {
                preamble.push_back(line);
            }
        }

        auto const header = std::find_if(preamble.begin(), preamble.end(), [&](auto line) {
            return headers_.count(text::to_lower(text::trim(line))) > 0;
        });
        if (header != preamble.end()) {
            result.intro = detail::normalized_segment({preamble.begin(), header});
            result.summary = detail::normalized_segment({header + 1, preamble.end()});
        } else if (!paragraphs.empty()) {
            result.intro = detail::normalized_segment(preamble);
        }
        for (auto const& lines : paragraphs) {
            if (auto p = detail::normalized_segment(lines)) {
                result.paragraphs.push_back(std::move(*p));
            }
        }
        if (result.empty()) {
            // no markers and no usable summary block: the whole body is one paragraph
            result.intro.reset();
            result.summary.reset();
            result.paragraphs.push_back(text::normalize_whitespace(raw));
        }
        return result;
    }

    [[nodiscard]] SegmentationOptions const& options() const { return options_; }

   private:
    std::optional<std::string_view> match_marker(std::string_view line, std::size_t expected) const
    {
        std::cmatch m;
        if (!std::regex_search(line.data(), line.data() + line.size(), m, marker_)) {
            return std::nullopt;
        }
        for (std::size_t g = 1; g < m.size(); ++g) {
            if (!m[g].matched || m[g].length() == 0) {
                continue;
            }
            std::size_t number = 0;
            auto [ptr, ec] = std::from_chars(m[g].first, m[g].second, number);
            if (ec != std::errc() || ptr != m[g].second || number != expected) {
                return std::nullopt;
            }
            auto const offset = static_cast<std::size_t>(m.position(0) + m.length(0));
            return line.substr(offset);
        }
        return std::nullopt;
    }

    SegmentationOptions options_;
    std::regex marker_;
    std::unordered_set<std::string> headers_;
};

inline Case segment_case(std::string_view raw, std::string case_id = {},
                         SegmentationOptions const& options = {})
{
    return Segmenter(options).segment(raw, std::move(case_id));
}

/// Stop-word based language guess for a single segment.
class FrenchDetector {
   public:
    explicit FrenchDetector(double margin = 0.2) : margin_(margin) {}

    [[nodiscard]] double margin() const { return margin_; }

    /// French when the French stop-word hit rate exceeds the English one by more than the margin.
    [[nodiscard]] bool is_french(std::string_view segment) const
    {
        auto const tokens = text::tokenize(segment);
        if (tokens.empty()) {
            return false;
        }
        std::size_t en = 0;
        std::size_t fr = 0;
        for (auto const& t : tokens) {
            en += english().count(t);
            fr += french().count(t);
        }
        auto const n = static_cast<double>(tokens.size());
        return static_cast<double>(fr) / n - static_cast<double>(en) / n > margin_;
    }

   private:
    static std::unordered_set<std::string> const& english()
    {
        static std::unordered_set<std::string> const words{
            "the",  "of",   "and",   "to",    "in",    "is",    "that",  "for",  "it",
            "as",   "was",  "with",  "be",    "by",    "on",    "not",   "he",   "this",
            "are",  "or",   "his",   "from",  "at",    "which", "but",   "have", "an",
            "had",  "they", "you",   "were",  "their", "has",   "been",  "would", "there",
            "its",  "who",  "shall", "any",   "may",   "should", "these", "such", "than",
            "into", "upon", "whether", "under", "also", "we",   "she",   "her",  "him"};
        return words;
    }

    static std::unordered_set<std::string> const& french()
    {
        static std::unordered_set<std::string> const words{
            "le",   "la",    "les",  "de",    "des",  "du",   "et",   "en",    "un",
            "une",  "est",   "que",  "qui",   "dans", "pour", "pas",  "par",   "sur",
            "au",   "aux",   "ce",   "cette", "il",   "elle", "ne",   "se",    "sont",
            "été",  "avec",  "son",  "sa",    "ses",  "ou",   "mais", "leur",  "à",
            "être", "l",     "d",    "qu",    "nous", "vous", "ils",  "lui",   "ces",
            "cet",  "était", "où",   "donc",  "dont", "sous", "selon", "entre", "lorsque"};
        return words;
    }

    double margin_;
};

/// Drops segments detected as French. An all-French case comes back empty.
inline Case strip_french(Case const& input, FrenchDetector const& detector = FrenchDetector{})
{
    Case out;
    out.case_id = input.case_id;
    out.raw_length_words = input.raw_length_words;
    if (input.intro && !detector.is_french(*input.intro)) {
        out.intro = input.intro;
    }
    if (input.summary && !detector.is_french(*input.summary)) {
        out.summary = input.summary;
    }
    for (auto const& p : input.paragraphs) {
        if (!detector.is_french(p)) {
            out.paragraphs.push_back(p);
        }
    }
    return out;
}

/// Equality relation for boilerplate detection: lowercase, collapsed whitespace.
inline std::string boilerplate_key(std::string_view segment)
{
    return text::to_lower(text::normalize_whitespace(segment));
}

/// Removes intro and summary segments whose normalized text appears in more
/// than `threshold` distinct cases. Paragraphs are never touched.
/// Ids of modified cases are added to `affected` when given.
inline std::vector<Case> dedup_boilerplate(std::vector<Case> corpus, std::size_t threshold = 100,
                                           std::set<std::string>* affected = nullptr)
{
    if (threshold < 2) {
        throw ValidationError("boilerplate threshold must be >= 2, got " +
                              std::to_string(threshold));
    }
    std::unordered_map<std::string, std::size_t> case_counts;
    for (auto const& c : corpus) {
        std::unordered_set<std::string> keys;
        if (c.intro) {
            keys.insert(boilerplate_key(*c.intro));
        }
        if (c.summary) {
            keys.insert(boilerplate_key(*c.summary));
        }
        for (auto const& k : keys) {
            ++case_counts[k];
        }
    }
    auto const is_boilerplate = [&](std::optional<std::string> const& segment) {
        return segment && case_counts[boilerplate_key(*segment)] > threshold;
    };
    for (auto& c : corpus) {
        bool changed = false;
        if (is_boilerplate(c.intro)) {
            c.intro.reset();
            changed = true;
        }
        if (is_boilerplate(c.summary)) {
            c.summary.reset();
            changed = true;
        }
        if (changed && affected != nullptr) {
            affected->insert(c.case_id);
        }
    }
    return corpus;
}

struct DatasetSplit {
    std::vector<std::string> train_query_ids;
    std::vector<std::string> validation_query_ids;
    Qrels qrels;
};

/// The last `validation_size` queries (in label order) form the validation set.
inline DatasetSplit make_split(std::vector<std::string> const& ordered_query_ids, Qrels qrels,
                               std::size_t validation_size = 100)
{
    DatasetSplit split;
    auto const n_val = std::min(validation_size, ordered_query_ids.size());
    auto const boundary = ordered_query_ids.size() - n_val;
    split.train_query_ids.assign(ordered_query_ids.begin(),
                                 ordered_query_ids.begin() + static_cast<std::ptrdiff_t>(boundary));
    split.validation_query_ids.assign(
        ordered_query_ids.begin() + static_cast<std::ptrdiff_t>(boundary), ordered_query_ids.end());
    split.qrels = std::move(qrels);
    return split;
}

/// Average whitespace-delimited word counts per segment kind.
struct SegmentStats {
    std::size_t n_cases = 0;
    std::size_t n_intros = 0;
    std::size_t n_summaries = 0;
    std::size_t n_paragraphs = 0;
    double avg_case_words = 0.0;
    double avg_intro_words = 0.0;
    double avg_summary_words = 0.0;
    double avg_paragraph_words = 0.0;
};

inline SegmentStats compute_stats(std::vector<Case> const& corpus)
{
    SegmentStats s;
    std::size_t case_words = 0;
    std::size_t intro_words = 0;
    std::size_t summary_words = 0;
    std::size_t paragraph_words = 0;
    for (auto const& c : corpus) {
        ++s.n_cases;
        case_words += c.raw_length_words;
        if (c.intro) {
            ++s.n_intros;
            intro_words += text::count_words(*c.intro);
        }
        if (c.summary) {
            ++s.n_summaries;
            summary_words += text::count_words(*c.summary);
        }
        for (auto const& p : c.paragraphs) {
            ++s.n_paragraphs;
            paragraph_words += text::count_words(p);
        }
    }
    auto const avg = [](std::size_t total, std::size_t n) {
        return n == 0 ? 0.0 : static_cast<double>(total) / static_cast<double>(n);
    };
    s.avg_case_words = avg(case_words, s.n_cases);
    s.avg_intro_words = avg(intro_words, s.n_intros);
    s.avg_summary_words = avg(summary_words, s.n_summaries);
    s.avg_paragraph_words = avg(paragraph_words, s.n_paragraphs);
    return s;
}

struct IngestRecord {
    std::string case_id;
    std::size_t n_paragraphs = 0;
    std::size_t words = 0;
    std::set<std::string> flags;
};

struct IngestOptions {
    SegmentationOptions segmentation;
    double french_margin = 0.2;
    std::size_t boilerplate_threshold = 100;
    std::size_t validation_size = 100;
};

struct Task1Data {
    std::vector<Case> corpus;
    DatasetSplit split;
    std::vector<IngestRecord> report;
    SegmentStats stats_before_dedup;
    SegmentStats stats_after_dedup;
};

/// Strips a trailing ".txt" so label entries may name files or stems.
inline std::string strip_txt(std::string id)
{
    if (id.size() > 4 && id.compare(id.size() - 4, 4, ".txt") == 0) {
        id.resize(id.size() - 4);
    }
    return id;
}

inline std::vector<std::filesystem::path> list_text_files(std::filesystem::path const& dir)
{
    if (!std::filesystem::is_directory(dir)) {
        throw Error("not a directory: " + dir.string());
    }
    std::vector<std::filesystem::path> files;
    for (auto const& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".txt") {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    return files;
}

/// Loads every "*.txt" under `root` as a case (id = file stem), applies French
/// removal and boilerplate dedup, and builds the split from the JSON labels
/// object {query_id: [candidate_id, ...]} whose key order is preserved.
inline Task1Data load_task1_corpus(std::filesystem::path const& root,
                                   std::filesystem::path const& labels_path,
                                   IngestOptions const& options = {})
{
    Segmenter const segmenter(options.segmentation);
    FrenchDetector const detector(options.french_margin);

    Task1Data data;
    std::map<std::string, std::set<std::string>> flags;
    std::vector<Case> cases;
    for (auto const& path : list_text_files(root)) {
        auto const id = path.stem().string();
        auto raw = io::read_file(path);
        if (text::trim(raw).empty()) {
            throw Error("empty case file " + path.string());
        }
        auto segmented = segmenter.segment(raw, id);
        auto const before = segmented.segments().size();
        auto c = strip_french(std::move(segmented), detector);
        if (c.segments().size() < before) {
            flags[id].insert("french_removed");
        }
        if (c.empty()) {
            flags[id].insert("all_french");
            std::cerr << "warning: case " << id << " is entirely French; left empty\n";
        }
        cases.push_back(std::move(c));
    }
    data.stats_before_dedup = compute_stats(cases);
    std::set<std::string> deduped;
    data.corpus = dedup_boilerplate(std::move(cases), options.boilerplate_threshold, &deduped);
    data.stats_after_dedup = compute_stats(data.corpus);

    std::unordered_set<std::string> known;
    for (auto const& c : data.corpus) {
        known.insert(c.case_id);
        auto& f = flags[c.case_id];
        if (deduped.count(c.case_id) > 0) {
            f.insert("boilerplate_removed");
        }
        if (c.empty()) {
            f.insert("empty");
        }
        data.report.push_back({c.case_id, c.paragraphs.size(), c.word_count(), f});
    }

    nlohmann::ordered_json labels;
    try {
        labels = nlohmann::ordered_json::parse(io::read_file(labels_path));
    } catch (nlohmann::json::parse_error const& e) {
        throw Error("labels file " + labels_path.string() + " is not valid JSON: " + e.what());
    }
    if (!labels.is_object()) {
        throw Error("labels file " + labels_path.string() + " must hold a JSON object");
    }
    auto const require_case = [&](std::string const& id) {
        if (known.count(id) == 0) {
            throw Error("labeled case '" + id + "' has no case file under " + root.string());
        }
    };
    std::vector<std::string> query_ids;
    Qrels qrels;
    for (auto const& [key, value] : labels.items()) {
        auto const qid = strip_txt(key);
        require_case(qid);
        if (!value.is_array()) {
            throw Error("labels for query '" + qid + "' must be an array");
        }
        query_ids.push_back(qid);
        for (auto const& v : value) {
            auto const did = strip_txt(v.get<std::string>());
            require_case(did);
            qrels[qid].insert(did);
        }
    }
    data.split = make_split(query_ids, std::move(qrels), options.validation_size);
    return data;
}

// ---- normalized JSON-lines corpus -------------------------------------------

inline nlohmann::ordered_json to_json(Case const& c)
{
    nlohmann::ordered_json j;
    j["case_id"] = c.case_id;
    j["intro"] = c.intro ? nlohmann::ordered_json(*c.intro) : nlohmann::ordered_json(nullptr);
    j["summary"] = c.summary ? nlohmann::ordered_json(*c.summary) : nlohmann::ordered_json(nullptr);
    j["paragraphs"] = c.paragraphs;
    j["raw_length_words"] = c.raw_length_words;
    return j;
}

inline Case case_from_json(nlohmann::json const& j)
{
    Case c;
    c.case_id = j.at("case_id").get<std::string>();
    auto const optional_text = [&](char const* key) -> std::optional<std::string> {
        if (!j.contains(key) || j.at(key).is_null()) {
            return std::nullopt;
        }
        return j.at(key).get<std::string>();
    };
    c.intro = optional_text("intro");
    c.summary = optional_text("summary");
    c.paragraphs = j.at("paragraphs").get<std::vector<std::string>>();
    c.raw_length_words = j.value("raw_length_words", std::size_t{0});
    if (c.raw_length_words == 0) {
        c.raw_length_words = c.word_count();
    }
    return c;
}

inline void write_corpus_jsonl(std::ostream& out, std::vector<Case> const& corpus)
{
    for (auto const& c : corpus) {
        out << to_json(c).dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) << '\n';
    }
}

inline std::vector<Case> read_corpus_jsonl(std::istream& in)
{
    std::vector<Case> corpus;
    std::unordered_set<std::string> ids;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (text::trim(line).empty()) {
            continue;
        }
        try {
            corpus.push_back(case_from_json(nlohmann::json::parse(line)));
        } catch (nlohmann::json::exception const& e) {
            throw Error("corpus line " + std::to_string(line_no) + ": " + e.what());
        }
        if (!ids.insert(corpus.back().case_id).second) {
            throw Error("duplicate case id '" + corpus.back().case_id + "' at corpus line " +
                        std::to_string(line_no));
        }
    }
    return corpus;
}

inline void write_ingest_report(std::ostream& out, std::vector<IngestRecord> const& report)
{
    out << "case_id\tn_paragraphs\twords\tflags\n";
    for (auto const& r : report) {
        out << r.case_id << '\t' << r.n_paragraphs << '\t' << r.words << '\t';
        if (r.flags.empty()) {
            out << '-';
        }
        bool first = true;
        for (auto const& f : r.flags) {
            out << (first ? "" : "|") << f;
            first = false;
        }
        out << '\n';
    }
}

// ---- Task 2 ------------------------------------------------------------------

/// One entailment query: a query paragraph and the paragraphs of one candidate case.
struct EntailmentQuery {
    std::string query_id;
    std::string query_text;
    std::vector<std::pair<std::string, std::string>> candidates;
    std::set<std::string> relevant_ids;
};

namespace detail {

inline std::filesystem::path first_existing(std::filesystem::path const& dir,
                                            std::initializer_list<char const*> names)
{
    for (auto const* n : names) {
        if (std::filesystem::exists(dir / n)) {
            return dir / n;
        }
    }
    return {};
}

}  // namespace detail

/// Reads the per-query folder layout:
///   <root>/<qid>/query.txt          (or entailed_fragment.txt)
///   <root>/<qid>/candidates/*.txt   (or paragraphs/*.txt)
///   <root>/<qid>/labels.txt         relevant candidate ids, one per line
/// Tabs and whitespace runs are collapsed to single spaces.
inline std::vector<EntailmentQuery> load_task2_corpus(std::filesystem::path const& root)
{
    if (!std::filesystem::is_directory(root)) {
        throw Error("not a directory: " + root.string());
    }
    std::vector<std::filesystem::path> dirs;
    for (auto const& entry : std::filesystem::directory_iterator(root)) {
        if (entry.is_directory()) {
            dirs.push_back(entry.path());
        }
    }
    std::sort(dirs.begin(), dirs.end());

    std::vector<EntailmentQuery> queries;
    for (auto const& dir : dirs) {
        EntailmentQuery q;
        q.query_id = dir.filename().string();
        auto const query_file = detail::first_existing(dir, {"query.txt", "entailed_fragment.txt"});
        if (query_file.empty()) {
            throw Error("query '" + q.query_id + "' has no query.txt");
        }
        q.query_text = text::normalize_whitespace(io::read_file(query_file));

        auto const label_file = detail::first_existing(dir, {"labels.txt"});
        if (label_file.empty()) {
            throw Error("query '" + q.query_id + "' has no labels.txt");
        }
        auto const cand_dir = detail::first_existing(dir, {"candidates", "paragraphs"});
        if (cand_dir.empty()) {
            throw Error("query '" + q.query_id + "' has no candidates directory");
        }
        for (auto const& path : list_text_files(cand_dir)) {
            q.candidates.emplace_back(path.stem().string(),
                                      text::normalize_whitespace(io::read_file(path)));
        }
        if (q.candidates.empty()) {
            throw Error("query '" + q.query_id + "' has an empty candidates directory");
        }
        std::set<std::string> candidate_ids;
        for (auto const& [id, t] : q.candidates) {
            candidate_ids.insert(id);
        }
        for (auto const line : text::split_lines(io::read_file(label_file))) {
            auto const id = strip_txt(std::string(text::trim(line)));
            if (id.empty()) {
                continue;
            }
            if (candidate_ids.count(id) == 0) {
                throw Error("query '" + q.query_id + "' labels unknown candidate '" + id + "'");
            }
            q.relevant_ids.insert(id);
        }
        queries.push_back(std::move(q));
    }
    return queries;
}

}  // namespace parafuse::corpus
