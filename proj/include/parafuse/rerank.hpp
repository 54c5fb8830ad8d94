#pragma once

/// Third-stage re-ranking from externally produced (query, candidate) scores.

#include <cmath>
#include <cstdlib>
#include <istream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "parafuse/error.hpp"
#include "parafuse/scored_list.hpp"

namespace parafuse::rerank {

/// (query id, candidate id) -> relevance probability in [0, 1].
class PairScoreTable {
   public:
    void insert(std::string const& qid, std::string const& docid, double score)
    {
        if (!std::isfinite(score) || score < 0.0 || score > 1.0) {
            throw Error("pair score for (" + qid + ", " + docid + ") must lie in [0, 1]");
        }
        if (!scores_.emplace(std::make_pair(qid, docid), score).second) {
            throw Error("duplicate pair score for (" + qid + ", " + docid + ")");
        }
    }

    [[nodiscard]] double const* find(std::string const& qid, std::string const& docid) const
    {
        auto it = scores_.find({qid, docid});
        return it == scores_.end() ? nullptr : &it->second;
    }

    [[nodiscard]] std::size_t size() const { return scores_.size(); }

   private:
    std::map<std::pair<std::string, std::string>, double> scores_;
};

/// "qid<TAB>docid<TAB>score" lines; an optional "qid docid score" header is skipped.
inline PairScoreTable read_pair_scores(std::istream& in)
{
    PairScoreTable table;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        std::vector<std::string> fields;
        std::istringstream stream(line);
        std::string field;
        while (std::getline(stream, field, '\t')) {
            fields.push_back(field);
        }
        if (fields.size() != 3) {
            throw Error("pair score line " + std::to_string(line_no) + ": expected 3 tab-separated fields");
        }
        if (line_no == 1 && fields[0] == "qid" && fields[1] == "docid") {
            continue;
        }
        char* end = nullptr;
        double const score = std::strtod(fields[2].c_str(), &end);
        if (fields[2].empty() || end != fields[2].c_str() + fields[2].size()) {
            throw Error("pair score line " + std::to_string(line_no) + ": bad score '" + fields[2] + "'");
        }
        try {
            table.insert(fields[0], fields[1], score);
        } catch (Error const& e) {
            throw Error("pair score line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return table;
}

/// Re-orders the top-`depth` candidates of every query by pair score and drops
/// the rest. Every in-depth pair must be scored; the error lists the missing ones.
inline RunSet rerank(RunSet const& first_stage, PairScoreTable const& pairs, std::size_t depth)
{
    if (depth == 0) {
        throw ValidationError("re-rank depth must be >= 1");
    }
    RunSet out;
    std::vector<std::pair<std::string, std::string>> missing;
    for (auto const& [qid, list] : first_stage) {
        std::vector<ScoredEntry> entries;
        for (auto const& e : list.truncated(depth)) {
            if (auto const* s = pairs.find(qid, e.id)) {
                entries.push_back({e.id, *s});
            } else {
                missing.emplace_back(qid, e.id);
            }
        }
        out.emplace(qid, ScoredList(qid, std::move(entries)));
    }
    if (!missing.empty()) {
        std::string msg = std::to_string(missing.size()) + " pair score(s) missing:";
        for (std::size_t i = 0; i < missing.size() && i < 20; ++i) {
            msg += " (" + missing[i].first + ", " + missing[i].second + ")";
        }
        if (missing.size() > 20) {
            msg += " ...";
        }
        throw Error(msg);
    }
    return out;
}

}  // namespace parafuse::rerank
