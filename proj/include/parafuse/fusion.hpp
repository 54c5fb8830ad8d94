#pragma once

/// Weighted linear fusion of a lexical and a dense ranking.

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "parafuse/error.hpp"
#include "parafuse/evaluation.hpp"
#include "parafuse/qrels.hpp"
#include "parafuse/scored_list.hpp"

namespace parafuse::fusion {

struct FusionWeights {
    double alpha = 1.0;  ///< lexical weight
    double beta = 1.0;   ///< dense weight

    void validate() const
    {
        if (!std::isfinite(alpha) || !std::isfinite(beta) || alpha < 0.0 || beta < 0.0) {
            throw ValidationError("fusion weights must be finite and >= 0");
        }
        if (alpha == 0.0 && beta == 0.0) {
            throw ValidationError("fusion weights must not both be zero");
        }
    }

    friend bool operator==(FusionWeights const&, FusionWeights const&) = default;
};

/// The weight grid searched for both tasks.
inline std::vector<FusionWeights> default_grid() { return {{1, 1}, {2, 1}, {3, 1}, {4, 1}}; }

namespace detail {

/// Per-list min-max scaling to [0, 1]; a constant list maps to all ones.
inline std::map<std::string, double> scores_of(ScoredList const& list, bool min_max)
{
    std::map<std::string, double> out;
    if (list.empty()) {
        return out;
    }
    double lo = list.entries().back().score;
    double hi = list.entries().front().score;
    for (auto const& e : list) {
        double s = e.score;
        if (min_max) {
            s = hi == lo ? 1.0 : (e.score - lo) / (hi - lo);
        }
        out.emplace(e.id, s);
    }
    return out;
}

}  // namespace detail

/// score(d) = alpha * s_lex(d) + beta * s_dense(d), missing scores count as 0.
inline ScoredList fuse(ScoredList const& lex, ScoredList const& dense, FusionWeights const& w,
                       bool min_max_normalize = false)
{
    w.validate();
    if (lex.query_id() != dense.query_id()) {
        throw Error("cannot fuse runs of different queries: '" + lex.query_id() + "' vs '" +
                    dense.query_id() + "'");
    }
    auto const lex_scores = detail::scores_of(lex, min_max_normalize);
    auto const dense_scores = detail::scores_of(dense, min_max_normalize);
    std::set<std::string> ids;
    for (auto const& [id, s] : lex_scores) {
        ids.insert(id);
    }
    for (auto const& [id, s] : dense_scores) {
        ids.insert(id);
    }
    std::vector<ScoredEntry> entries;
    entries.reserve(ids.size());
    for (auto const& id : ids) {
        auto const l = lex_scores.find(id);
        auto const d = dense_scores.find(id);
        double const ls = l == lex_scores.end() ? 0.0 : l->second;
        double const ds = d == dense_scores.end() ? 0.0 : d->second;
        entries.push_back({id, w.alpha * ls + w.beta * ds});
    }
    return ScoredList(lex.query_id(), std::move(entries));
}

/// Fuses every query present in either run set; `max_results` == 0 keeps all.
inline RunSet fuse_runs(RunSet const& lex, RunSet const& dense, FusionWeights const& w,
                        bool min_max_normalize = false, std::size_t max_results = 0)
{
    std::set<std::string> qids;
    for (auto const& [q, l] : lex) {
        qids.insert(q);
    }
    for (auto const& [q, l] : dense) {
        qids.insert(q);
    }
    RunSet out;
    for (auto const& q : qids) {
        auto const l = lex.find(q);
        auto const d = dense.find(q);
        auto fused = fuse(l == lex.end() ? ScoredList(q, {}) : l->second,
                          d == dense.end() ? ScoredList(q, {}) : d->second, w, min_max_normalize);
        out.emplace(q, max_results == 0 ? std::move(fused) : fused.truncated(max_results));
    }
    return out;
}

struct WeightSweepRow {
    FusionWeights weights;
    std::string metric;
    double value = 0.0;
};

struct WeightSweep {
    FusionWeights best;
    std::vector<WeightSweepRow> table;
};

/// Mean recall@`recall_depth` over `query_ids` per grid point. Ties keep the
/// earlier grid entry.
inline WeightSweep sweep_weights(RunSet const& lex, RunSet const& dense,
                                 std::vector<FusionWeights> const& grid, Qrels const& qrels,
                                 std::size_t recall_depth,
                                 std::vector<std::string> const& query_ids = {},
                                 bool min_max_normalize = false)
{
    if (grid.empty()) {
        throw ValidationError("weight grid must not be empty");
    }
    WeightSweep sweep;
    double best = -1.0;
    auto const metric = "recall@" + std::to_string(recall_depth);
    for (auto const& w : grid) {
        auto const fused = fuse_runs(lex, dense, w, min_max_normalize);
        auto const value = eval::mean_recall_at_n(fused, qrels, recall_depth, query_ids);
        sweep.table.push_back({w, metric, value});
        if (value > best) {
            best = value;
            sweep.best = w;
        }
    }
    return sweep;
}

inline void write_sweep_tsv(std::ostream& out, WeightSweep const& sweep)
{
    out << "alpha\tbeta\tmetric_name\tvalue\n";
    for (auto const& row : sweep.table) {
        out << eval::format_double(row.weights.alpha) << '\t'
            << eval::format_double(row.weights.beta) << '\t' << row.metric << '\t'
            << eval::format_double(row.value) << '\n';
    }
}

struct Overlap {
    /// Relevant items in run A's top-depth that run B's top-depth also holds.
    double shared_relevant_fraction_a = 0.0;
    double shared_relevant_fraction_b = 0.0;
    std::size_t relevant_a = 0;
    std::size_t relevant_b = 0;
    std::size_t shared = 0;
};

namespace detail {

inline std::set<std::string> relevant_in_top(ScoredList const& run, std::set<std::string> const& rel,
                                             std::size_t depth)
{
    std::set<std::string> out;
    for (std::size_t i = 0; i < std::min(depth, run.size()); ++i) {
        if (rel.count(run[i].id) > 0) {
            out.insert(run[i].id);
        }
    }
    return out;
}

inline Overlap finish_overlap(std::size_t a, std::size_t b, std::size_t shared)
{
    Overlap o;
    o.relevant_a = a;
    o.relevant_b = b;
    o.shared = shared;
    o.shared_relevant_fraction_a = a == 0 ? 0.0 : static_cast<double>(shared) / static_cast<double>(a);
    o.shared_relevant_fraction_b = b == 0 ? 0.0 : static_cast<double>(shared) / static_cast<double>(b);
    return o;
}

}  // namespace detail

/// Fractions are 0 when a run retrieves no relevant item.
inline Overlap overlap_report(ScoredList const& run_a, ScoredList const& run_b, Qrels const& qrels,
                              std::size_t depth)
{
    if (depth == 0) {
        throw ValidationError("overlap depth must be >= 1");
    }
    auto const& rel = eval::relevant_for(qrels, run_a.query_id());
    auto const a = detail::relevant_in_top(run_a, rel, depth);
    auto const b = detail::relevant_in_top(run_b, rel, depth);
    std::size_t shared = 0;
    for (auto const& id : a) {
        shared += b.count(id);
    }
    return detail::finish_overlap(a.size(), b.size(), shared);
}

/// Counts pooled over every judged query.
inline Overlap overlap_report(RunSet const& runs_a, RunSet const& runs_b, Qrels const& qrels,
                              std::size_t depth)
{
    std::size_t a = 0;
    std::size_t b = 0;
    std::size_t shared = 0;
    for (auto const& [qid, rel] : qrels) {
        auto const ra = runs_a.find(qid);
        auto const rb = runs_b.find(qid);
        auto const o = overlap_report(ra == runs_a.end() ? ScoredList(qid, {}) : ra->second,
                                      rb == runs_b.end() ? ScoredList(qid, {}) : rb->second, qrels,
                                      depth);
        a += o.relevant_a;
        b += o.relevant_b;
        shared += o.shared;
    }
    return detail::finish_overlap(a, b, shared);
}

}  // namespace parafuse::fusion
