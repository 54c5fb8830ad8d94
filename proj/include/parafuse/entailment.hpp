#pragma once

/// Candidate-paragraph ranking for entailment queries: a throwaway BM25 index
/// per query, dense dot products, or their weighted fusion, then a top-k cut.

#include <algorithm>
#include <concepts>
#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "parafuse/bm25.hpp"
#include "parafuse/corpus.hpp"
#include "parafuse/dense.hpp"
#include "parafuse/error.hpp"
#include "parafuse/fusion.hpp"
#include "parafuse/qrels.hpp"
#include "parafuse/scored_list.hpp"

namespace parafuse::entailment {

using corpus::EntailmentQuery;

/// Embedding-row id of the query text ("qid#query").
inline std::string query_row_id(std::string const& query_id) { return query_id + "#query"; }

/// Embedding-row id of a candidate ("qid#candidate").
inline std::string candidate_row_id(std::string const& query_id, std::string const& candidate_id)
{
    return query_id + '#' + candidate_id;
}

/// Anything that yields the vector for a row id and its text.
template <typename S>
concept VectorSource = requires(S const& s, std::string const& id, std::string_view text) {
    { s.vector_for(id, text) } -> std::convertible_to<std::vector<float>>;
};

template <dense::Embedder E>
struct EmbedderSource {
    E embedder;

    [[nodiscard]] std::vector<float> vector_for(std::string const& /*id*/, std::string_view text) const
    {
        return embedder.embed(text);
    }
};

/// Looks rows up by id in a loaded embedding file.
struct MatrixSource {
    dense::EmbeddingMatrix const* matrix = nullptr;

    [[nodiscard]] std::vector<float> vector_for(std::string const& id, std::string_view /*text*/) const
    {
        auto r = matrix->find(id);
        if (!r) {
            throw Error("missing embedding for '" + id + "'");
        }
        auto const row = matrix->row(*r);
        return {row.begin(), row.end()};
    }
};

enum class MethodKind { lexical, dense, fused };

struct Method {
    MethodKind kind = MethodKind::lexical;
    fusion::FusionWeights weights{4.0, 1.0};
};

inline MethodKind parse_method(std::string_view s)
{
    if (s == "lexical" || s == "bm25") {
        return MethodKind::lexical;
    }
    if (s == "dense") {
        return MethodKind::dense;
    }
    if (s == "fused") {
        return MethodKind::fused;
    }
    throw ValidationError("method must be lexical, dense or fused; got '" + std::string(s) + "'");
}

inline std::string_view to_string(MethodKind m)
{
    switch (m) {
        case MethodKind::lexical:
            return "lexical";
        case MethodKind::dense:
            return "dense";
        case MethodKind::fused:
            return "fused";
    }
    return "lexical";
}

namespace detail {

inline void check_query(EntailmentQuery const& q)
{
    if (q.candidates.empty()) {
        throw Error("query '" + q.query_id + "' has no candidates");
    }
    std::set<std::string> ids;
    for (auto const& [id, t] : q.candidates) {
        if (!ids.insert(id).second) {
            throw Error("query '" + q.query_id + "' has duplicate candidate '" + id + "'");
        }
    }
}

}  // namespace detail

/// BM25 over exactly this query's candidates (N and average length from them
/// alone). Every candidate is ranked, zero scores included.
inline ScoredList rank_lexical(EntailmentQuery const& q, lexical::Bm25Params params = {})
{
    detail::check_query(q);
    std::vector<ScoredEntry> entries;
    entries.reserve(q.candidates.size());
    bool any_tokens = false;
    for (auto const& [id, t] : q.candidates) {
        any_tokens = any_tokens || !text::tokenize(t).empty();
    }
    if (!any_tokens) {
        for (auto const& [id, t] : q.candidates) {
            entries.push_back({id, 0.0});
        }
        return ScoredList(q.query_id, std::move(entries));
    }
    auto const index =
        lexical::Bm25Index::build(q.candidates, lexical::Granularity::paragraph, params);
    auto const tokens = text::tokenize(q.query_text);
    for (std::size_t o = 0; o < index.size(); ++o) {
        entries.push_back({index.item_id(o), index.score(tokens, o)});
    }
    return ScoredList(q.query_id, std::move(entries));
}

template <VectorSource S>
ScoredList rank_dense(EntailmentQuery const& q, S const& source)
{
    detail::check_query(q);
    auto const query = source.vector_for(query_row_id(q.query_id), q.query_text);
    std::vector<ScoredEntry> entries;
    entries.reserve(q.candidates.size());
    for (auto const& [id, t] : q.candidates) {
        auto const v = source.vector_for(candidate_row_id(q.query_id, id), t);
        if (v.size() != query.size()) {
            throw Error("embedding dim mismatch for candidate '" + id + "' of query '" +
                        q.query_id + "'");
        }
        entries.push_back({id, dense::dot(v, query)});
    }
    return ScoredList(q.query_id, std::move(entries));
}

/// Full ranking of the query's candidates by the chosen method.
template <VectorSource S>
ScoredList rank_candidates(EntailmentQuery const& q, Method const& method, S const& source,
                           lexical::Bm25Params params = {})
{
    switch (method.kind) {
        case MethodKind::lexical:
            return rank_lexical(q, params);
        case MethodKind::dense:
            return rank_dense(q, source);
        case MethodKind::fused:
            break;
    }
    return fusion::fuse(rank_lexical(q, params), rank_dense(q, source), method.weights);
}

/// Top-k candidate ids in rank order.
inline std::vector<std::string> select_entailing(ScoredList const& ranking, std::size_t k)
{
    if (k == 0) {
        throw ValidationError("cut-off k must be >= 1");
    }
    auto ids = ranking.truncated(k).ids();
    return ids;
}

inline Qrels qrels_of(std::vector<EntailmentQuery> const& queries)
{
    Qrels qrels;
    for (auto const& q : queries) {
        if (!q.relevant_ids.empty()) {
            qrels[q.query_id] = q.relevant_ids;
        }
    }
    return qrels;
}

template <VectorSource S>
RunSet rank_all(std::vector<EntailmentQuery> const& queries, Method const& method, S const& source,
                lexical::Bm25Params params = {})
{
    RunSet runs;
    for (auto const& q : queries) {
        runs.emplace(q.query_id, rank_candidates(q, method, source, params));
    }
    return runs;
}

/// "qid candidate_id" lines, one per selected paragraph.
inline void write_predictions(std::ostream& out, RunSet const& runs, std::size_t k)
{
    for (auto const& [qid, list] : runs) {
        for (auto const& id : select_entailing(list, k)) {
            out << qid << ' ' << id << '\n';
        }
    }
}

}  // namespace parafuse::entailment
