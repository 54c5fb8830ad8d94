#include <gtest/gtest.h>

#include <algorithm>
#include <map>

#include "parafuse/aggregation.hpp"
#include "support.hpp"

using namespace parafuse::aggregation;
using parafuse::RunSet;
using parafuse::ScoredEntry;
using parafuse::ScoredList;
using parafuse::testing::Rng;
using Strings = std::vector<std::string>;
using Pairs = std::vector<std::pair<std::string, long long>>;

namespace {

// Builds a ranked list whose order is exactly `cases` (one paragraph per slot).
ScoredList ranked(Strings const& cases, std::string const& qid = "q")
{
    std::vector<ScoredEntry> entries;
    for (std::size_t i = 0; i < cases.size(); ++i) {
        entries.push_back({cases[i] + "#paragraph#" + std::to_string(i),
                           static_cast<double>(cases.size() - i)});
    }
    return {qid, entries};
}

ParagraphRunSet run_set(std::string qid, std::vector<Strings> const& lists, std::size_t depth)
{
    ParagraphRunSet set;
    set.query_id = std::move(qid);
    set.depth = depth;
    for (std::size_t i = 0; i < lists.size(); ++i) {
        set.per_paragraph.emplace_back(i, ranked(lists[i]));
    }
    return set;
}

std::map<std::string, double> as_map(ScoredList const& list)
{
    std::map<std::string, double> out;
    for (auto const& e : list) {
        out[e.id] = e.score;
    }
    return out;
}

// Dictionary accumulation straight from the definition.
std::map<std::string, double> naive_additive(ParagraphRunSet const& set)
{
    std::map<std::string, double> acc;
    for (auto const& [i, list] : set.per_paragraph) {
        long long position = 1;
        for (auto const& e : list) {
            auto const id = e.id.substr(0, e.id.find('#'));
            acc[id] += static_cast<double>(static_cast<long long>(set.depth) - position + 1);
            ++position;
        }
    }
    acc.erase(set.query_id);
    return acc;
}

ParagraphRunSet random_set(Rng& rng)
{
    Strings cases{"q", "c1", "c2", "c3", "c4", "c5", "c6"};
    auto const depth = rng.between(1, 20);
    auto const n_lists = rng.between(0, 5);
    std::vector<Strings> lists;
    for (std::size_t l = 0; l < n_lists; ++l) {
        Strings list;
        auto const len = rng.below(depth + 1);
        for (std::size_t p = 0; p < len; ++p) {
            list.push_back(rng.pick(cases));
        }
        lists.push_back(list);
    }
    return run_set("q", lists, depth);
}

}  // namespace

TEST(Positional, HandExample)
{
    EXPECT_EQ(positional_scores(ranked({"d1", "d2", "d1"}), 3),
              (Pairs{{"d1", 3}, {"d2", 2}, {"d1", 1}}));
    EXPECT_TRUE(positional_scores(ranked({}), 3).empty());
    EXPECT_EQ(positional_scores(ranked({"c"}), 5), (Pairs{{"c", 5}}));
    EXPECT_THROW(positional_scores(ranked({"a", "b"}), 1), parafuse::Error);
}

TEST(Additive, TwoListExample)
{
    auto const out = aggregate_additive(run_set("q", {{"d1", "d2", "d1"}, {"d2", "d3"}}, 3));
    EXPECT_EQ(out.query_id(), "q");
    ASSERT_EQ(out.size(), 3U);
    EXPECT_EQ(out[0], (ScoredEntry{"d2", 5}));
    EXPECT_EQ(out[1], (ScoredEntry{"d1", 4}));
    EXPECT_EQ(out[2], (ScoredEntry{"d3", 2}));
}

TEST(Additive, SingleListAndEmptyLists)
{
    auto const out = aggregate_additive(run_set("q", {{"a", "b", "a", "c"}}, 6));
    EXPECT_EQ(as_map(out), (std::map<std::string, double>{{"a", 6 + 4}, {"b", 5}, {"c", 3}}));
    EXPECT_TRUE(aggregate_additive(run_set("q", {{}, {}}, 4)).empty());
    EXPECT_TRUE(aggregate_additive(run_set("q", {}, 4)).empty());
}

TEST(Additive, SelfExcludedAndTruncated)
{
    auto const set = run_set("q", {{"q", "a", "b", "c"}, {"q", "c"}}, 10);
    auto const out = aggregate_additive(set);
    EXPECT_EQ(out.ids(), (Strings{"c", "a", "b"}));
    EXPECT_EQ(aggregate_additive(set, 2).ids(), (Strings{"c", "a"}));
}

TEST(Additive, InvalidRunSets)
{
    auto set = run_set("q", {{"a"}, {"b"}}, 3);
    set.per_paragraph[1].first = 5;
    EXPECT_THROW(aggregate_additive(set), parafuse::Error);
    set.per_paragraph[1].first = 0;
    EXPECT_THROW(aggregate_additive(set), parafuse::Error);
    EXPECT_THROW(aggregate_additive(run_set("q", {{"a", "b", "c"}}, 2)), parafuse::Error);
    auto bad_id = run_set("q", {}, 3);
    bad_id.per_paragraph.emplace_back(0, ScoredList("q", {{"no-ref", 1.0}}));
    EXPECT_THROW(aggregate_additive(bad_id), parafuse::Error);
}

TEST(Additive, NaiveOracleOnRandomSets)
{
    Rng rng(8);
    for (int round = 0; round < 300; ++round) {
        auto const set = random_set(rng);
        auto const out = aggregate_additive(set);
        EXPECT_EQ(as_map(out), naive_additive(set));
        std::vector<ScoredEntry> expected;
        for (auto const& [id, s] : naive_additive(set)) {
            expected.push_back({id, s});
        }
        EXPECT_EQ(out, ScoredList("q", expected));
        auto const ids = out.ids();
        EXPECT_EQ(std::count(ids.begin(), ids.end(), "q"), 0);
    }
}

TEST(Additive, PermutationInvariance)
{
    Rng rng(21);
    for (int round = 0; round < 200; ++round) {
        auto const set = random_set(rng);
        auto shuffled = set;
        std::reverse(shuffled.per_paragraph.begin(), shuffled.per_paragraph.end());
        if (shuffled.per_paragraph.size() > 2) {
            std::swap(shuffled.per_paragraph[0], shuffled.per_paragraph[1]);
        }
        EXPECT_EQ(aggregate_additive(shuffled), aggregate_additive(set));
    }
}

TEST(Additive, RaisingAParagraphNeverLowersItsCase)
{
    Rng rng(34);
    for (int round = 0; round < 300; ++round) {
        auto const set = random_set(rng);
        if (set.per_paragraph.empty()) {
            continue;
        }
        auto const l = rng.below(set.per_paragraph.size());
        auto const& list = set.per_paragraph[l].second;
        if (list.size() < 2) {
            continue;
        }
        auto const p = rng.between(1, list.size() - 1);
        Strings order;
        for (auto const& e : list) {
            order.push_back(e.id.substr(0, e.id.find('#')));
        }
        auto const raised_case = order[p];
        std::swap(order[p], order[p - 1]);
        auto moved = set;
        moved.per_paragraph[l].second = ranked(order);
        auto const before = as_map(aggregate_additive(set));
        auto const after = as_map(aggregate_additive(moved));
        if (raised_case != "q") {
            EXPECT_GE(after.at(raised_case), before.at(raised_case));
        }
    }
}

TEST(ScoreSum, SumsRawScores)
{
    ParagraphRunSet set;
    set.query_id = "q";
    set.depth = 10;
    set.per_paragraph.emplace_back(
        0, ScoredList("q", {{"a#paragraph#0", 2.5}, {"b#intro#0", 1.0}, {"a#paragraph#3", 0.75}}));
    auto const out = aggregate_scoresum(set);
    EXPECT_EQ(out[0], (ScoredEntry{"a", 3.25}));
    EXPECT_EQ(out[1], (ScoredEntry{"b", 1.0}));
}

TEST(ScoreSum, MatchesAdditiveOrderOnIdenticalStrictLists)
{
    auto const set = run_set("q", {{"a", "b", "c", "d"}, {"a", "b", "c", "d"}}, 4);
    EXPECT_EQ(aggregate_scoresum(set).ids(), aggregate_additive(set).ids());
}

TEST(Interleave, RoundRobinTrace)
{
    auto const out = aggregate_interleave(run_set("q", {{"d1", "d2"}, {"d3", "d1"}}, 5));
    EXPECT_EQ(out.ids(), (Strings{"d1", "d3", "d2"}));
    EXPECT_EQ(out[0].score, 3.0);
    EXPECT_EQ(out[2].score, 1.0);
    auto const skip_self = aggregate_interleave(run_set("q", {{"q", "a"}, {"b"}}, 5));
    EXPECT_EQ(skip_self.ids(), (Strings{"a", "b"}));
    EXPECT_EQ(aggregate_interleave(run_set("q", {{"a", "b", "c"}}, 5), 2).ids(), (Strings{"a", "b"}));
}

TEST(Strategies, ParseAndDispatch)
{
    auto const set = run_set("q", {{"d1", "d2"}, {"d3", "d1"}}, 5);
    EXPECT_EQ(aggregate(set, parse_strategy("interleave")), aggregate_interleave(set));
    EXPECT_EQ(aggregate(set, parse_strategy("scoresum")), aggregate_scoresum(set));
    EXPECT_EQ(aggregate(set, parse_strategy("additive")), aggregate_additive(set));
    EXPECT_EQ(to_string(Strategy::scoresum), "scoresum");
    EXPECT_THROW(parse_strategy("combmnz"), parafuse::ValidationError);
}

TEST(Grouping, SegmentRunsBecomeOneSetPerCase)
{
    RunSet runs;
    auto const add = [&](std::string const& qid, Strings const& cases) {
        runs.emplace(qid, ranked(cases, qid));
    };
    add("A#paragraph#1", {"x"});
    add("A#intro#0", {"y"});
    add("A#paragraph#0", {"z"});
    add("B#summary#0", {"x", "y"});
    auto const sets = group_by_query_case(runs, 7);
    ASSERT_EQ(sets.size(), 2U);
    EXPECT_EQ(sets[0].query_id, "A");
    EXPECT_EQ(sets[0].depth, 7U);
    ASSERT_EQ(sets[0].per_paragraph.size(), 3U);
    EXPECT_EQ(sets[0].per_paragraph[0].second.query_id(), "A#intro#0");
    EXPECT_EQ(sets[0].per_paragraph[1].second.query_id(), "A#paragraph#0");
    EXPECT_EQ(sets[0].per_paragraph[2].second.query_id(), "A#paragraph#1");
    EXPECT_EQ(sets[1].per_paragraph.size(), 1U);
}
