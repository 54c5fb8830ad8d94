#pragma once

/// Lifting per-query-paragraph paragraph rankings to one case ranking.

#include <algorithm>
#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "parafuse/corpus.hpp"
#include "parafuse/error.hpp"
#include "parafuse/scored_list.hpp"

namespace parafuse::aggregation {

/// Paragraph rankings for every paragraph of one query case.
struct ParagraphRunSet {
    std::string query_id;
    /// (query paragraph index, ranking over ParagraphRef ids)
    std::vector<std::pair<std::size_t, ScoredList>> per_paragraph;
    /// Retrieval depth N of every inner list.
    std::size_t depth = 100;

    void validate() const
    {
        if (depth == 0) {
            throw ValidationError("per-paragraph depth N must be >= 1");
        }
        std::vector<std::size_t> indexes;
        for (auto const& [i, list] : per_paragraph) {
            if (list.size() > depth) {
                throw Error("paragraph list of query '" + query_id + "' has " +
                            std::to_string(list.size()) + " entries, more than N=" +
                            std::to_string(depth));
            }
            indexes.push_back(i);
        }
        std::sort(indexes.begin(), indexes.end());
        for (std::size_t k = 0; k < indexes.size(); ++k) {
            if (indexes[k] != k) {
                throw Error("query paragraph indexes of '" + query_id +
                            "' must be distinct and contiguous from 0");
            }
        }
    }
};

inline std::string parent_case(std::string_view paragraph_id)
{
    return corpus::ParagraphRef::parse(paragraph_id).case_id;
}

/// Position p (1-based) contributes N - p + 1 to the paragraph's parent case.
/// One output pair per list entry; duplicates of a case are kept.
inline std::vector<std::pair<std::string, long long>> positional_scores(ScoredList const& list,
                                                                        std::size_t depth)
{
    if (list.size() > depth) {
        throw Error("list of " + std::to_string(list.size()) + " entries exceeds depth N=" +
                    std::to_string(depth));
    }
    std::vector<std::pair<std::string, long long>> out;
    out.reserve(list.size());
    for (std::size_t p = 0; p < list.size(); ++p) {
        out.emplace_back(parent_case(list[p].id), static_cast<long long>(depth - p));
    }
    return out;
}

namespace detail {

inline ScoredList finish(std::string const& query_id, std::map<std::string, double> scores,
                         std::size_t max_results)
{
    scores.erase(query_id);
    std::vector<ScoredEntry> entries;
    entries.reserve(scores.size());
    for (auto& [id, s] : scores) {
        entries.push_back({id, s});
    }
    return max_results == 0 ? ScoredList(query_id, std::move(entries))
                            : ScoredList::top_n(query_id, std::move(entries), max_results);
}

}  // namespace detail

/// s(d, q) = sum over query paragraphs i, sum over occurrences of d in r_i of the
/// positional score. The query's own case is removed afterwards.
/// `max_results` == 0 keeps every case.
inline ScoredList aggregate_additive(ParagraphRunSet const& runs, std::size_t max_results = 0)
{
    runs.validate();
    std::map<std::string, double> scores;
    for (auto const& [i, list] : runs.per_paragraph) {
        for (auto const& [case_id, s] : positional_scores(list, runs.depth)) {
            scores[case_id] += static_cast<double>(s);
        }
    }
    return detail::finish(runs.query_id, std::move(scores), max_results);
}

/// Per-case sum of the raw retrieval scores of its paragraphs.
inline ScoredList aggregate_scoresum(ParagraphRunSet const& runs, std::size_t max_results = 0)
{
    runs.validate();
    std::map<std::string, double> scores;
    for (auto const& [i, list] : runs.per_paragraph) {
        for (auto const& e : list) {
            scores[parent_case(e.id)] += e.score;
        }
    }
    return detail::finish(runs.query_id, std::move(scores), max_results);
}

/// Round-robin over the lists (in query paragraph order), each turn taking the
/// best case not yet emitted. Scores are synthetic: M for the first of M cases
/// down to 1 for the last.
inline ScoredList aggregate_interleave(ParagraphRunSet const& runs, std::size_t max_results = 0)
{
    runs.validate();
    auto ordered = runs.per_paragraph;
    std::sort(ordered.begin(), ordered.end(),
              [](auto const& a, auto const& b) { return a.first < b.first; });

    std::vector<std::vector<std::string>> lists;
    for (auto const& [i, list] : ordered) {
        std::vector<std::string> cases;
        for (auto const& e : list) {
            auto c = parent_case(e.id);
            if (c != runs.query_id) {
                cases.push_back(std::move(c));
            }
        }
        lists.push_back(std::move(cases));
    }

    std::vector<std::string> order;
    std::unordered_set<std::string> seen;
    std::vector<std::size_t> cursor(lists.size(), 0);
    bool progressed = true;
    while (progressed) {
        progressed = false;
        for (std::size_t l = 0; l < lists.size(); ++l) {
            auto& pos = cursor[l];
            while (pos < lists[l].size() && seen.count(lists[l][pos]) > 0) {
                ++pos;
            }
            if (pos < lists[l].size()) {
                seen.insert(lists[l][pos]);
                order.push_back(lists[l][pos]);
                ++pos;
                progressed = true;
            }
        }
    }

    std::vector<ScoredEntry> entries;
    entries.reserve(order.size());
    for (std::size_t p = 0; p < order.size(); ++p) {
        entries.push_back({order[p], static_cast<double>(order.size() - p)});
    }
    ScoredList out(runs.query_id, std::move(entries));
    return max_results == 0 ? out : out.truncated(max_results);
}

enum class Strategy { additive, scoresum, interleave };

inline Strategy parse_strategy(std::string_view s)
{
    if (s == "additive") {
        return Strategy::additive;
    }
    if (s == "scoresum") {
        return Strategy::scoresum;
    }
    if (s == "interleave") {
        return Strategy::interleave;
    }
    throw ValidationError("aggregation must be additive, scoresum or interleave; got '" +
                          std::string(s) + "'");
}

inline std::string_view to_string(Strategy s)
{
    switch (s) {
        case Strategy::additive:
            return "additive";
        case Strategy::scoresum:
            return "scoresum";
        case Strategy::interleave:
            return "interleave";
    }
    return "additive";
}

inline ScoredList aggregate(ParagraphRunSet const& runs, Strategy strategy,
                            std::size_t max_results = 0)
{
    switch (strategy) {
        case Strategy::scoresum:
            return aggregate_scoresum(runs, max_results);
        case Strategy::interleave:
            return aggregate_interleave(runs, max_results);
        case Strategy::additive:
            break;
    }
    return aggregate_additive(runs, max_results);
}

/// Groups a run whose query ids are query-segment ParagraphRefs into one
/// ParagraphRunSet per query case. Segments are ordered intro, summary,
/// then paragraphs by number.
inline std::vector<ParagraphRunSet> group_by_query_case(RunSet const& paragraph_runs,
                                                        std::size_t depth)
{
    using Key = std::pair<int, std::size_t>;
    std::map<std::string, std::vector<std::pair<Key, ScoredList const*>>> grouped;
    for (auto const& [qid, list] : paragraph_runs) {
        auto const ref = corpus::ParagraphRef::parse(qid);
        grouped[ref.case_id].push_back({{static_cast<int>(ref.kind), ref.index}, &list});
    }
    std::vector<ParagraphRunSet> out;
    for (auto& [case_id, lists] : grouped) {
        std::sort(lists.begin(), lists.end(),
                  [](auto const& a, auto const& b) { return a.first < b.first; });
        ParagraphRunSet set;
        set.query_id = case_id;
        set.depth = depth;
        for (std::size_t i = 0; i < lists.size(); ++i) {
            set.per_paragraph.emplace_back(i, *lists[i].second);
        }
        out.push_back(std::move(set));
    }
    return out;
}

}  // namespace parafuse::aggregation
