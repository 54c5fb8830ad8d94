#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "parafuse/error.hpp"

namespace parafuse {

struct ScoredEntry {
    std::string id;
    double score = 0.0;

    friend bool operator==(ScoredEntry const&, ScoredEntry const&) = default;
};

/// Strict ranking order used everywhere: higher score first, ties by ascending id.
inline bool ranks_before(ScoredEntry const& a, ScoredEntry const& b)
{
    if (a.score != b.score) {
        return a.score > b.score;
    }
    return a.id < b.id;
}

/// Ranked list of (item id, score) pairs for one query.
///
/// Entries are always kept in ranking order and ids are unique; every
/// constructor establishes that, so consumers can rely on positions.
class ScoredList {
   public:
    using const_iterator = std::vector<ScoredEntry>::const_iterator;

    ScoredList() = default;

    /// Sorts `entries` into ranking order. Throws on a duplicate id.
    ScoredList(std::string query_id, std::vector<ScoredEntry> entries)
        : query_id_(std::move(query_id)), entries_(std::move(entries))
    {
        std::sort(entries_.begin(), entries_.end(), ranks_before);
        check_unique();
    }

    /// Keeps only the best `n` of `entries` (partial sort).
    static ScoredList top_n(std::string query_id, std::vector<ScoredEntry> entries, std::size_t n)
    {
        ScoredList list;
        list.query_id_ = std::move(query_id);
        if (n < entries.size()) {
            std::partial_sort(entries.begin(), entries.begin() + static_cast<std::ptrdiff_t>(n),
                              entries.end(), ranks_before);
            entries.resize(n);
        } else {
            std::sort(entries.begin(), entries.end(), ranks_before);
        }
        list.entries_ = std::move(entries);
        list.check_unique();
        return list;
    }

    [[nodiscard]] std::string const& query_id() const { return query_id_; }
    [[nodiscard]] std::vector<ScoredEntry> const& entries() const { return entries_; }
    [[nodiscard]] std::size_t size() const { return entries_.size(); }
    [[nodiscard]] bool empty() const { return entries_.empty(); }
    [[nodiscard]] const_iterator begin() const { return entries_.begin(); }
    [[nodiscard]] const_iterator end() const { return entries_.end(); }
    [[nodiscard]] ScoredEntry const& operator[](std::size_t i) const { return entries_[i]; }

    [[nodiscard]] ScoredList truncated(std::size_t n) const
    {
        ScoredList out = *this;
        if (out.entries_.size() > n) {
            out.entries_.resize(n);
        }
        return out;
    }

    /// Ids in rank order.
    [[nodiscard]] std::vector<std::string> ids() const
    {
        std::vector<std::string> out;
        out.reserve(entries_.size());
        for (auto const& e : entries_) {
            out.push_back(e.id);
        }
        return out;
    }

    friend bool operator==(ScoredList const&, ScoredList const&) = default;

   private:
    void check_unique() const
    {
        std::unordered_set<std::string_view> seen;
        seen.reserve(entries_.size());
        for (auto const& e : entries_) {
            if (!seen.insert(e.id).second) {
                throw Error("duplicate item id '" + e.id + "' in ranked list for query '" +
                            query_id_ + "'");
            }
        }
    }

    std::string query_id_;
    std::vector<ScoredEntry> entries_;
};

/// Runs keyed by query id; std::map keeps output order deterministic.
using RunSet = std::map<std::string, ScoredList>;

}  // namespace parafuse
