#include <gtest/gtest.h>

#include <fstream>
#include <set>
#include <sstream>

#include "parafuse/corpus.hpp"
#include "support.hpp"

using namespace parafuse::corpus;
using parafuse::testing::Rng;
using Strings = std::vector<std::string>;

namespace {

void write(std::filesystem::path const& path, std::string const& content)
{
    std::filesystem::create_directories(path.parent_path());
    std::ofstream(path, std::ios::binary) << content;
}

Case make_case(std::string id, std::optional<std::string> intro, std::optional<std::string> summary,
               Strings paragraphs)
{
    Case c;
    c.case_id = std::move(id);
    c.intro = std::move(intro);
    c.summary = std::move(summary);
    c.paragraphs = std::move(paragraphs);
    return c;
}

// true when `needle` can be obtained from `hay` by deleting characters
bool is_subsequence(std::string const& needle, std::string const& hay)
{
    std::size_t j = 0;
    for (std::size_t i = 0; i < hay.size() && j < needle.size(); ++i) {
        if (hay[i] == needle[j]) {
            ++j;
        }
    }
    return j == needle.size();
}

}  // namespace

TEST(Segment, IntroThenNumberedParagraphs)
{
    auto const c = segment_case("Intro line\n[1] first para\n[2] second para");
    ASSERT_TRUE(c.intro);
    EXPECT_EQ(*c.intro, "Intro line");
    EXPECT_FALSE(c.summary);
    EXPECT_EQ(c.paragraphs, (Strings{"first para", "second para"}));
}

TEST(Segment, EmptyCaseIsAnError)
{
    EXPECT_THROW(segment_case(""), parafuse::Error);
    EXPECT_THROW(segment_case(" \n\t \n"), parafuse::Error);
}

TEST(Segment, SummaryBlock)
{
    auto const c = segment_case(
        "Court header\nSummary:\nThe appeal is allowed.\nCosts to the appellant.\n[1] Facts.\n[2] Law.");
    ASSERT_TRUE(c.intro);
    EXPECT_EQ(*c.intro, "Court header");
    ASSERT_TRUE(c.summary);
    EXPECT_EQ(*c.summary, "The appeal is allowed. Costs to the appellant.");
    EXPECT_EQ(c.paragraphs, (Strings{"Facts.", "Law."}));
}

TEST(Segment, FrenchSummaryHeaderIsCaseInsensitive)
{
    auto const c = segment_case("PRÉSUMÉ\nrésumé du jugement\n1. premier");
    EXPECT_FALSE(c.intro);
    ASSERT_TRUE(c.summary);
    EXPECT_EQ(*c.summary, "résumé du jugement");
    EXPECT_EQ(c.paragraphs, (Strings{"premier"}));
}

TEST(Segment, NoMarkersGivesOneParagraph)
{
    auto const c = segment_case("Just a body\nwith two lines.");
    EXPECT_FALSE(c.intro);
    EXPECT_FALSE(c.summary);
    EXPECT_EQ(c.paragraphs, (Strings{"Just a body with two lines."}));
}

TEST(Segment, OutOfSequenceMarkerIsText)
{
    auto const c = segment_case("[1] a\n[3] b\n2. c\n[4] d");
    EXPECT_FALSE(c.intro);
    EXPECT_EQ(c.paragraphs, (Strings{"a [3] b", "c [4] d"}));
}

TEST(Segment, ContinuationLinesAndDotMarkers)
{
    auto const c = segment_case("  1.  First\n  continues here\n\n2.\nSecond\n");
    EXPECT_EQ(c.paragraphs, (Strings{"First continues here", "Second"}));
    EXPECT_EQ(c.raw_length_words, 6U);
}

TEST(Segment, CustomMarkerPattern)
{
    SegmentationOptions opts;
    opts.marker_pattern = R"(^para (\d+):\s*)";
    auto const c = segment_case("head\npara 1: x\npara 2: y", "c", opts);
    EXPECT_EQ(c.paragraphs, (Strings{"x", "y"}));
    opts.marker_pattern = "([";
    EXPECT_THROW(Segmenter{opts}, parafuse::ValidationError);
}

TEST(Segment, TotalityProperty)
{
    Rng rng(11);
    Strings words{"court", "appeal", "the", "état", "s.", "(a)", "[x]", "12", "held"};
    for (int round = 0; round < 300; ++round) {
        std::string raw;
        std::size_t next = 1;
        auto const lines = rng.between(1, 12);
        for (std::size_t l = 0; l < lines; ++l) {
            auto const kind = rng.below(6);
            if (kind == 0) {
                raw += "[" + std::to_string(next++) + "] ";
            } else if (kind == 1) {
                raw += std::to_string(next++) + ". ";
            } else if (kind == 2) {
                raw += "[" + std::to_string(next + 3) + "] ";
            } else if (kind == 3 && l == 1) {
                raw += "Summary:\n";
            }
            auto const n = rng.below(5);
            for (std::size_t w = 0; w < n; ++w) {
                raw += rng.pick(words) + (rng.coin() ? " " : "\t ");
            }
            raw += "\n";
        }
        raw += "tail";
        auto const c = segment_case(raw);
        std::string joined;
        for (auto const& [ref, seg] : c.segments()) {
            EXPECT_FALSE(seg.empty());
            joined += std::string(seg) + " ";
        }
        EXPECT_TRUE(is_subsequence(parafuse::text::normalize_whitespace(joined),
                                   parafuse::text::normalize_whitespace(raw)))
            << raw;
    }
}

TEST(French, DuplicatedParagraphPairKeepsEnglish)
{
    auto const c = segment_case(
        "Intro\n[1] The Minister ordered the surrender of the person under the treaty.\n"
        "[2] Le ministre a ordonné l'extradition de la personne en vertu du traité.\n");
    auto const stripped = strip_french(c);
    EXPECT_EQ(stripped.paragraphs,
              (Strings{"The Minister ordered the surrender of the person under the treaty."}));
    EXPECT_EQ(stripped.intro, c.intro);
}

TEST(French, AllEnglishIsUnchanged)
{
    auto const c = segment_case("Header\nSummary:\nThe appeal is dismissed.\n[1] The facts are these.");
    EXPECT_EQ(strip_french(c), c);
}

TEST(French, AllFrenchBecomesEmpty)
{
    auto const c = segment_case("La Cour\n[1] Le juge a rejeté la demande.\n[2] Les dépens sont à la charge de la partie.");
    auto const stripped = strip_french(c);
    EXPECT_TRUE(stripped.empty());
    EXPECT_EQ(stripped.case_id, c.case_id);
}

TEST(French, MarginIsConfigurable)
{
    FrenchDetector const strict(0.9);
    FrenchDetector const loose(0.0);
    std::string const seg = "Le juge a rejeté la demande.";
    EXPECT_FALSE(strict.is_french(seg));
    EXPECT_TRUE(loose.is_french(seg));
    EXPECT_FALSE(loose.is_french("12 34"));
    EXPECT_FALSE(loose.is_french(""));
}

TEST(Boilerplate, StrictlyMoreThanThreshold)
{
    auto const corpus_of = [](std::size_t n) {
        std::vector<Case> corpus;
        for (std::size_t i = 0; i < n; ++i) {
            corpus.push_back(make_case("c" + std::to_string(i), "FEDERAL  COURT\nOttawa",
                                       "summary " + std::to_string(i), {"p"}));
        }
        return corpus;
    };
    std::set<std::string> affected;
    auto const removed = dedup_boilerplate(corpus_of(101), 100, &affected);
    EXPECT_EQ(affected.size(), 101U);
    for (auto const& c : removed) {
        EXPECT_FALSE(c.intro);
        EXPECT_TRUE(c.summary);
        EXPECT_EQ(c.paragraphs, (Strings{"p"}));
    }
    auto const kept = dedup_boilerplate(corpus_of(100), 100);
    EXPECT_EQ(kept, corpus_of(100));
}

TEST(Boilerplate, NormalizedEqualityAndParagraphsUntouched)
{
    std::vector<Case> corpus{make_case("a", "Federal Court", std::nullopt, {"same"}),
                             make_case("b", "FEDERAL\tcourt ", std::nullopt, {"same"}),
                             make_case("c", "federal court", std::nullopt, {"same"})};
    auto const out = dedup_boilerplate(corpus, 2);
    for (auto const& c : out) {
        EXPECT_FALSE(c.intro);
        EXPECT_EQ(c.paragraphs, (Strings{"same"}));
    }
    EXPECT_THROW(dedup_boilerplate(corpus, 1), parafuse::ValidationError);
}

TEST(Boilerplate, UniqueSegmentsUnchanged)
{
    std::vector<Case> corpus{make_case("a", "i1", "s1", {}), make_case("b", "i2", "s2", {"x"})};
    EXPECT_EQ(dedup_boilerplate(corpus, 2), corpus);
}

TEST(Boilerplate, IdempotentOnRandomCorpora)
{
    Rng rng(5);
    Strings pool{"alpha", "Alpha", "beta", "gamma  delta", "gamma delta", "eps"};
    for (int round = 0; round < 200; ++round) {
        std::vector<Case> corpus;
        auto const n = rng.between(1, 15);
        for (std::size_t i = 0; i < n; ++i) {
            std::optional<std::string> intro;
            std::optional<std::string> summary;
            if (rng.coin()) {
                intro = rng.pick(pool);
            }
            if (rng.coin()) {
                summary = rng.pick(pool);
            }
            corpus.push_back(make_case("c" + std::to_string(i), intro, summary, {rng.pick(pool)}));
        }
        auto const threshold = rng.between(2, 5);
        auto const once = dedup_boilerplate(corpus, threshold);
        EXPECT_EQ(dedup_boilerplate(once, threshold), once);
        for (std::size_t i = 0; i < n; ++i) {
            EXPECT_EQ(once[i].paragraphs, corpus[i].paragraphs);
        }
    }
}

TEST(ParagraphRefs, RoundTripAndInjective)
{
    Rng rng(3);
    std::string const alphabet = "ab#1_";
    for (int round = 0; round < 100; ++round) {
        std::set<std::string> ids;
        std::vector<Case> corpus;
        auto const n = rng.between(1, 8);
        for (std::size_t i = 0; i < n; ++i) {
            std::string id;
            auto const len = rng.between(1, 6);
            for (std::size_t k = 0; k < len; ++k) {
                id.push_back(alphabet[rng.below(alphabet.size())]);
            }
            if (id.front() == '#' || !ids.insert(id).second) {
                continue;
            }
            Strings paras(rng.below(4), "p");
            std::optional<std::string> intro;
            if (rng.coin()) {
                intro = "i";
            }
            corpus.push_back(make_case(id, intro, rng.coin() ? std::optional<std::string>("s")
                                                             : std::nullopt,
                                       paras));
        }
        std::set<std::string> refs;
        std::size_t total = 0;
        for (auto const& c : corpus) {
            for (auto const& [ref, seg] : c.segments()) {
                ++total;
                refs.insert(ref.str());
                auto const parsed = ParagraphRef::parse(ref.str());
                EXPECT_EQ(parsed, ref);
            }
        }
        EXPECT_EQ(refs.size(), total);
    }
}

TEST(ParagraphRefs, RejectsMalformedIds)
{
    for (std::string const bad : {"", "d1", "d1#paragraph", "#paragraph#1", "d1#para#1",
                                  "d1#paragraph#", "d1#paragraph#01", "d1#paragraph#x"}) {
        EXPECT_FALSE(ParagraphRef::try_parse(bad)) << bad;
    }
    EXPECT_EQ(ParagraphRef::parse("a#b#summary#0").case_id, "a#b");
}

TEST(Stats, HandCountedAverages)
{
    std::vector<Case> corpus{
        make_case("a", "one two three", "s one two three four five", {"p one", "p one two"}),
        make_case("b", "x", std::nullopt, {"a b c d"}),
    };
    corpus[0].raw_length_words = 20;
    corpus[1].raw_length_words = 9;
    auto const s = compute_stats(corpus);
    EXPECT_EQ(s.n_cases, 2U);
    EXPECT_EQ(s.n_intros, 2U);
    EXPECT_EQ(s.n_summaries, 1U);
    EXPECT_EQ(s.n_paragraphs, 3U);
    EXPECT_EQ(s.avg_case_words, 14.5);
    EXPECT_EQ(s.avg_intro_words, 2.0);
    EXPECT_EQ(s.avg_summary_words, 6.0);
    EXPECT_EQ(s.avg_paragraph_words, 3.0);
    EXPECT_EQ(compute_stats({}).avg_case_words, 0.0);
}

TEST(Split, LastQueriesInLabelOrderAreValidation)
{
    auto const split = make_split({"q5", "q1", "q3", "q2"}, {}, 2);
    EXPECT_EQ(split.train_query_ids, (Strings{"q5", "q1"}));
    EXPECT_EQ(split.validation_query_ids, (Strings{"q3", "q2"}));
    auto const small = make_split({"q1"}, {}, 100);
    EXPECT_TRUE(small.train_query_ids.empty());
    EXPECT_EQ(small.validation_query_ids, (Strings{"q1"}));
}

TEST(Jsonl, RoundTripKeepsEverySegment)
{
    std::vector<Case> corpus{make_case("a", "intro \"quoted\"", std::nullopt, {"é p1", "p2"}),
                             make_case("b", std::nullopt, "sum", {})};
    corpus[0].raw_length_words = 7;
    corpus[1].raw_length_words = 1;
    std::stringstream buf;
    write_corpus_jsonl(buf, corpus);
    auto const first_line = buf.str().substr(0, buf.str().find('\n'));
    EXPECT_EQ(first_line.rfind("{\"case_id\":\"a\",\"intro\":", 0), 0U);
    EXPECT_EQ(read_corpus_jsonl(buf), corpus);
}

TEST(Jsonl, DuplicateIdsAndBadLinesRejected)
{
    std::stringstream dup(R"({"case_id":"a","paragraphs":[]}
{"case_id":"a","paragraphs":["x"]}
)");
    EXPECT_THROW(read_corpus_jsonl(dup), parafuse::Error);
    std::stringstream bad("{\"case_id\":\n");
    EXPECT_THROW(read_corpus_jsonl(bad), parafuse::Error);
}

class Task1Loader : public ::testing::Test {
   protected:
    void SetUp() override
    {
        dir_ = parafuse::testing::fresh_dir("task1");
        for (auto const* id : {"q1", "q2", "d1", "d2", "d3", "d4"}) {
            write(dir_ / "cases" / (std::string(id) + ".txt"),
                  std::string("Header of ") + id + "\n[1] Paragraph one of " + id +
                      ".\n[2] Paragraph two.\n");
        }
    }

    std::filesystem::path dir_;
};

TEST_F(Task1Loader, LoadsCasesAndLabels)
{
    write(dir_ / "labels.json", R"({"q1.txt": ["d2.txt", "d3"], "q2": ["d1"]})");
    IngestOptions opts;
    opts.validation_size = 1;
    auto const data = load_task1_corpus(dir_ / "cases", dir_ / "labels.json", opts);
    EXPECT_EQ(data.corpus.size(), 6U);
    EXPECT_EQ(data.split.qrels.at("q1"), (std::set<std::string>{"d2", "d3"}));
    EXPECT_EQ(data.split.train_query_ids, (Strings{"q1"}));
    EXPECT_EQ(data.split.validation_query_ids, (Strings{"q2"}));
    EXPECT_EQ(data.report.size(), 6U);
    EXPECT_EQ(data.corpus[0].case_id, "d1");
    EXPECT_EQ(data.corpus[0].paragraphs.size(), 2U);
}

TEST_F(Task1Loader, MissingLabeledCaseIsNamed)
{
    write(dir_ / "labels.json", R"({"q1": ["d2", "d999"]})");
    try {
        load_task1_corpus(dir_ / "cases", dir_ / "labels.json");
        FAIL() << "expected an error";
    } catch (parafuse::Error const& e) {
        EXPECT_NE(std::string(e.what()).find("d999"), std::string::npos) << e.what();
    }
}

TEST_F(Task1Loader, AllFrenchCaseIsFlagged)
{
    write(dir_ / "cases" / "fr.txt", "[1] Le juge a rejeté la demande de la partie.\n");
    write(dir_ / "labels.json", R"({"q1": ["d1"]})");
    auto const data = load_task1_corpus(dir_ / "cases", dir_ / "labels.json");
    auto const it = std::find_if(data.report.begin(), data.report.end(),
                                 [](auto const& r) { return r.case_id == "fr"; });
    ASSERT_NE(it, data.report.end());
    EXPECT_EQ(it->flags, (std::set<std::string>{"all_french", "empty", "french_removed"}));
}

TEST(BundledFixture, IngestionReport)
{
    auto const root = parafuse::testing::source_dir() / "data" / "fixture" / "task1";
    IngestOptions opts;
    opts.boilerplate_threshold = 5;
    opts.validation_size = 2;
    auto const data = load_task1_corpus(root / "cases", root / "labels.json", opts);
    ASSERT_EQ(data.corpus.size(), 12U);
    std::map<std::string, std::set<std::string>> flags;
    for (auto const& r : data.report) {
        flags[r.case_id] = r.flags;
    }
    EXPECT_EQ(flags["012"], (std::set<std::string>{"french_removed"}));
    for (auto const* id : {"005", "006", "007", "008", "009", "010"}) {
        EXPECT_EQ(flags[id], (std::set<std::string>{"boilerplate_removed"})) << id;
    }
    EXPECT_TRUE(flags["001"].empty());
    EXPECT_EQ(data.stats_before_dedup.n_intros, 12U);
    EXPECT_EQ(data.stats_after_dedup.n_intros, 6U);
    EXPECT_EQ(data.split.validation_query_ids, (Strings{"003", "004"}));
}

class Task2Loader : public ::testing::Test {
   protected:
    void SetUp() override { dir_ = parafuse::testing::fresh_dir("task2"); }

    std::filesystem::path dir_;
};

TEST_F(Task2Loader, ThreeCandidatesOneRelevant)
{
    write(dir_ / "q1" / "query.txt", "the query\nparagraph\n");
    write(dir_ / "q1" / "candidates" / "c1.txt", "one");
    write(dir_ / "q1" / "candidates" / "c2.txt", "two");
    write(dir_ / "q1" / "candidates" / "c3.txt", "three");
    write(dir_ / "q1" / "labels.txt", "c2\n");
    auto const queries = load_task2_corpus(dir_);
    ASSERT_EQ(queries.size(), 1U);
    EXPECT_EQ(queries[0].query_id, "q1");
    EXPECT_EQ(queries[0].query_text, "the query paragraph");
    EXPECT_EQ(queries[0].candidates.size(), 3U);
    EXPECT_EQ(queries[0].candidates[1].first, "c2");
    EXPECT_EQ(queries[0].relevant_ids, (std::set<std::string>{"c2"}));
}

TEST_F(Task2Loader, EmptyCandidateFolderIsAnError)
{
    write(dir_ / "q1" / "query.txt", "q");
    write(dir_ / "q1" / "labels.txt", "");
    std::filesystem::create_directories(dir_ / "q1" / "candidates");
    EXPECT_THROW(load_task2_corpus(dir_), parafuse::Error);
}

TEST_F(Task2Loader, MissingLabelFileIsAnError)
{
    write(dir_ / "q1" / "query.txt", "q");
    write(dir_ / "q1" / "candidates" / "c1.txt", "one");
    EXPECT_THROW(load_task2_corpus(dir_), parafuse::Error);
}

TEST_F(Task2Loader, UnknownLabeledCandidateIsAnError)
{
    write(dir_ / "q1" / "query.txt", "q");
    write(dir_ / "q1" / "candidates" / "c1.txt", "one");
    write(dir_ / "q1" / "labels.txt", "c9\n");
    EXPECT_THROW(load_task2_corpus(dir_), parafuse::Error);
}
