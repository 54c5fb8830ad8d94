#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <sstream>

#include "parafuse/bm25.hpp"
#include "support.hpp"

using namespace parafuse::lexical;
using parafuse::ScoredEntry;
using parafuse::ScoredList;
using parafuse::testing::Rng;
using Items = std::vector<std::pair<std::string, std::string>>;

namespace {

Items three_docs()
{
    return {{"d1", "the court ruled"}, {"d2", "court of appeal"}, {"d3", "maritime cargo claim"}};
}

// Independent restatement of the scoring formula straight from raw token lists.
double oracle_score(Items const& items, std::vector<std::string> const& query, std::size_t which,
                    double k1 = 1.2, double b = 0.75)
{
    std::vector<std::vector<std::string>> docs;
    double total_len = 0;
    for (auto const& [id, body] : items) {
        docs.push_back(parafuse::text::tokenize(body));
        total_len += static_cast<double>(docs.back().size());
    }
    double const n = static_cast<double>(docs.size());
    double const avg = total_len / n;
    double score = 0;
    for (auto const& t : query) {
        double df = 0;
        for (auto const& d : docs) {
            df += std::find(d.begin(), d.end(), t) != d.end() ? 1 : 0;
        }
        double const tf = static_cast<double>(std::count(docs[which].begin(), docs[which].end(), t));
        if (tf == 0) {
            continue;
        }
        double const idf = std::log(1 + (n - df + 0.5) / (df + 0.5));
        double const len = static_cast<double>(docs[which].size());
        score += idf * tf * (k1 + 1) / (tf + k1 * (1 - b + b * len / avg));
    }
    return score;
}

std::string random_text(Rng& rng, std::vector<std::string> const& vocab, std::size_t max_len)
{
    std::string out;
    auto const len = rng.below(max_len + 1);
    for (std::size_t i = 0; i < len; ++i) {
        out += rng.pick(vocab) + " ";
    }
    return out;
}

}  // namespace

TEST(Bm25, HandComputedScore)
{
    auto const index = Bm25Index::build(three_docs(), Granularity::document);
    EXPECT_EQ(index.size(), 3U);
    EXPECT_DOUBLE_EQ(index.avg_length(), 3.0);
    EXPECT_EQ(index.document_frequency("court"), 2U);
    EXPECT_EQ(index.document_frequency("cargo"), 1U);
    EXPECT_EQ(index.document_frequency("absent"), 0U);
    // ln(1 + (3 - 2 + 0.5) / (2 + 0.5)) * (1 * 2.2) / (1 + 1.2) = ln(1.6)
    double const expected = 0.47000362924573558;
    EXPECT_NEAR(index.score({"court"}, 0), expected, 1e-9);
    EXPECT_NEAR(index.score({"court"}, 1), expected, 1e-9);
    EXPECT_EQ(index.score({"court"}, 2), 0.0);
    EXPECT_EQ(index.score({"absent", "words"}, 0), 0.0);
    EXPECT_EQ(index.score({}, 0), 0.0);
}

TEST(Bm25, PostingsHoldTermFrequencies)
{
    auto const index = Bm25Index::build({{"a", "x y x"}, {"b", "y"}, {"c", ""}}, Granularity::document);
    auto const* x = index.postings("x");
    ASSERT_NE(x, nullptr);
    EXPECT_EQ(*x, (std::vector<Posting>{{0, 2}}));
    EXPECT_EQ(*index.postings("y"), (std::vector<Posting>{{0, 1}, {1, 1}}));
    EXPECT_EQ(index.item_length(2), 0U);
    EXPECT_DOUBLE_EQ(index.avg_length(), 4.0 / 3.0);
}

TEST(Bm25, RepeatedQueryTermCountsPerOccurrence)
{
    auto const index = Bm25Index::build(three_docs(), Granularity::document);
    double const once = index.score({"court"}, 0);
    double const twice = index.score({"court", "court"}, 0);
    EXPECT_EQ(twice / once, 2.0);
    EXPECT_EQ(index.query_topn("court court", 3)[0].score, twice);
}

TEST(Bm25, BuildErrors)
{
    EXPECT_THROW(Bm25Index::build({{"d1", "a"}, {"d1", "b"}}, Granularity::document), parafuse::Error);
    EXPECT_THROW(Bm25Index::build({{"d1", ""}, {"d2", "!!"}}, Granularity::document), parafuse::Error);
    EXPECT_THROW(Bm25Index::build(three_docs(), Granularity::document, {1.2, 1.5}),
                 parafuse::ValidationError);
    EXPECT_THROW(Bm25Index::build(three_docs(), Granularity::document, {-1, 0.5}),
                 parafuse::ValidationError);
}

TEST(Bm25, ParagraphGranularityItems)
{
    parafuse::corpus::Case a;
    a.case_id = "A";
    a.paragraphs = {"alpha one", "alpha two"};
    parafuse::corpus::Case b;
    b.case_id = "B";
    b.paragraphs = {"beta one", "beta two"};
    auto const items = index_items({a, b}, Granularity::paragraph);
    ASSERT_EQ(items.size(), 4U);
    EXPECT_EQ(items[0].first, "A#paragraph#0");
    EXPECT_EQ(items[3].first, "B#paragraph#1");
    auto const index = Bm25Index::build(items, Granularity::paragraph);
    EXPECT_EQ(index.size(), 4U);
    EXPECT_EQ(index.item_length(0), 2U);
    auto const docs = index_items({a, b}, Granularity::document);
    ASSERT_EQ(docs.size(), 2U);
    EXPECT_EQ(docs[0].second, "alpha one\nalpha two");
}

TEST(Bm25, QueryTopN)
{
    auto const index = Bm25Index::build(three_docs(), Granularity::document);
    auto const only = index.query_topn("appeal", 10, "q");
    ASSERT_EQ(only.size(), 1U);
    EXPECT_EQ(only[0].id, "d2");
    EXPECT_GT(only[0].score, 0.0);
    EXPECT_EQ(only.query_id(), "q");
    EXPECT_EQ(index.query_topn("court cargo", 100).size(), 3U);
    EXPECT_TRUE(index.query_topn("", 5).empty());
    EXPECT_TRUE(index.query_topn("zebra", 5).empty());
    EXPECT_THROW((void)index.query_topn("court", 0), parafuse::ValidationError);
}

TEST(Bm25, TwinDocumentsTieById)
{
    auto const index =
        Bm25Index::build({{"d2", "same words"}, {"d1", "same words"}, {"d3", "other"}}, Granularity::document);
    auto const list = index.query_topn("same", 2);
    ASSERT_EQ(list.size(), 2U);
    EXPECT_EQ(list[0].id, "d1");
    EXPECT_EQ(list[1].id, "d2");
    EXPECT_EQ(list[0].score, list[1].score);
}

TEST(Bm25, ExhaustiveOracleOnRandomCorpora)
{
    Rng rng(2024);
    std::vector<std::string> vocab{"a", "b", "c", "d", "e", "f", "g", "h", "court", "appeal"};
    for (int round = 0; round < 200; ++round) {
        Items items;
        auto const n = rng.between(1, 50);
        for (std::size_t i = 0; i < n; ++i) {
            items.emplace_back("i" + std::to_string(rng.below(1000)) + "_" + std::to_string(i),
                               random_text(rng, vocab, 12));
        }
        items.emplace_back("anchor", "a");
        Bm25Params const params{0.5 + rng.unit() * 1.5, rng.unit()};
        auto const index = Bm25Index::build(items, Granularity::paragraph, params);
        auto const query = parafuse::text::tokenize(random_text(rng, vocab, 6));
        std::vector<ScoredEntry> all;
        for (std::size_t o = 0; o < index.size(); ++o) {
            double const s = index.score(query, o);
            EXPECT_NEAR(s, oracle_score(items, query, o, params.k1, params.b), 1e-9);
            if (s > 0) {
                all.push_back({index.item_id(o), s});
            }
        }
        ScoredList const expected("q", all);
        auto const depth = rng.between(1, 60);
        EXPECT_EQ(index.query_tokens_topn(query, depth, "q"), expected.truncated(depth));
    }
}

TEST(Bm25, SerializationIsBitExactAndDeterministic)
{
    Items items{{"x", "état court court"}, {"y", "appeal of the court"}, {"z", ""}};
    auto const a = Bm25Index::build(items, Granularity::paragraph, {0.9, 0.4});
    auto const b = Bm25Index::build(items, Granularity::paragraph, {0.9, 0.4});
    auto const bytes = a.serialize();
    EXPECT_EQ(bytes, b.serialize());
    EXPECT_EQ(bytes.substr(0, 5), "PFIX1");
    EXPECT_EQ(bytes[5], 1);
    auto const back = Bm25Index::deserialize(bytes);
    EXPECT_EQ(back.serialize(), bytes);
    EXPECT_EQ(back.granularity(), Granularity::paragraph);
    EXPECT_EQ(back.params().k1, 0.9);
    EXPECT_EQ(back.params().b, 0.4);
    EXPECT_EQ(back.avg_length(), a.avg_length());
    EXPECT_EQ(back.query_topn("court appeal", 5), a.query_topn("court appeal", 5));

    std::stringstream io;
    a.save(io);
    EXPECT_EQ(Bm25Index::load(io).serialize(), bytes);
}

TEST(Bm25, CorruptIndexRejected)
{
    auto const bytes = Bm25Index::build(three_docs(), Granularity::document).serialize();
    EXPECT_THROW(Bm25Index::deserialize("PFIX2" + bytes.substr(5)), parafuse::Error);
    EXPECT_THROW(Bm25Index::deserialize(bytes.substr(0, bytes.size() - 1)), parafuse::Error);
    EXPECT_THROW(Bm25Index::deserialize(bytes + "x"), parafuse::Error);
    EXPECT_THROW(Bm25Index::deserialize(""), parafuse::Error);
}

TEST(Bm25, GranularityNames)
{
    EXPECT_EQ(parse_granularity("document"), Granularity::document);
    EXPECT_EQ(to_string(Granularity::paragraph), "paragraph");
    EXPECT_THROW(parse_granularity("sentence"), parafuse::ValidationError);
}
