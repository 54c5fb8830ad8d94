#pragma once

/// Recall@N, cut-off precision/recall/F1, cut-off sweeps and TREC run files.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "parafuse/error.hpp"
#include "parafuse/qrels.hpp"
#include "parafuse/scored_list.hpp"

namespace parafuse::eval {

/// Shortest decimal form that parses back to the same double.
inline std::string format_double(double v)
{
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc()) {
        throw Error("cannot format number");
    }
    return {buf, ptr};
}

inline std::set<std::string> const& relevant_for(Qrels const& qrels, std::string const& query_id)
{
    auto it = qrels.find(query_id);
    if (it == qrels.end()) {
        throw Error("query '" + query_id + "' has no relevance judgements");
    }
    return it->second;
}

inline std::size_t hits_at(ScoredList const& run, std::set<std::string> const& relevant,
                           std::size_t depth)
{
    std::size_t hits = 0;
    auto const limit = std::min(depth, run.size());
    for (std::size_t i = 0; i < limit; ++i) {
        hits += relevant.count(run[i].id);
    }
    return hits;
}

/// |relevant ∩ top-N| / |relevant|
inline double recall_at_n(ScoredList const& run, Qrels const& qrels, std::size_t n)
{
    auto const& relevant = relevant_for(qrels, run.query_id());
    return static_cast<double>(hits_at(run, relevant, n)) / static_cast<double>(relevant.size());
}

struct Prf {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;

    friend bool operator==(Prf const&, Prf const&) = default;
};

inline double f1_of(double p, double r) { return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r); }

/// Treats the top-k items as the predicted relevant set.
inline Prf prf_at_cutoff(ScoredList const& run, Qrels const& qrels, std::size_t k)
{
    if (k == 0) {
        throw ValidationError("cut-off k must be >= 1");
    }
    auto const& relevant = relevant_for(qrels, run.query_id());
    auto const retrieved = std::min(k, run.size());
    if (retrieved == 0) {
        return {};
    }
    auto const hits = static_cast<double>(hits_at(run, relevant, k));
    Prf out;
    out.precision = hits / static_cast<double>(retrieved);
    out.recall = hits / static_cast<double>(relevant.size());
    out.f1 = f1_of(out.precision, out.recall);
    return out;
}

/// macro: mean of per-query values (F1 is the mean of per-query F1).
/// pooled: counts summed over queries, F1 from the pooled precision and recall.
enum class Averaging { macro, pooled };

inline Averaging parse_averaging(std::string_view s)
{
    if (s == "macro") {
        return Averaging::macro;
    }
    if (s == "pooled") {
        return Averaging::pooled;
    }
    throw ValidationError("averaging must be 'macro' or 'pooled', got '" + std::string(s) + "'");
}

inline std::string_view to_string(Averaging a) { return a == Averaging::macro ? "macro" : "pooled"; }

struct EvalReport {
    std::size_t k = 1;
    Averaging averaging = Averaging::macro;
    std::map<std::string, Prf> per_query;
    Prf averaged;
    std::map<std::size_t, double> recall_at;
};

namespace detail {

inline ScoredList run_for(RunSet const& runs, std::string const& query_id)
{
    auto it = runs.find(query_id);
    return it == runs.end() ? ScoredList(query_id, {}) : it->second;
}

inline std::vector<std::string> query_set(Qrels const& qrels,
                                          std::vector<std::string> const& query_ids)
{
    if (!query_ids.empty()) {
        return query_ids;
    }
    std::vector<std::string> out;
    for (auto const& [qid, rel] : qrels) {
        out.push_back(qid);
    }
    return out;
}

}  // namespace detail

/// Evaluates `query_ids` (all judged queries when empty). A query without a run
/// counts as all zeros.
inline EvalReport evaluate(RunSet const& runs, Qrels const& qrels, std::size_t k,
                           std::vector<std::size_t> const& recall_ns = {},
                           std::vector<std::string> const& query_ids = {},
                           Averaging averaging = Averaging::macro)
{
    EvalReport report;
    report.k = k;
    report.averaging = averaging;
    auto const queries = detail::query_set(qrels, query_ids);

    double hits = 0.0;
    double retrieved = 0.0;
    double relevant = 0.0;
    Prf sum;
    std::map<std::size_t, double> recall_sum;
    std::map<std::size_t, double> recall_hits;
    for (auto const& qid : queries) {
        auto const run = detail::run_for(runs, qid);
        auto const prf = prf_at_cutoff(run, qrels, k);
        report.per_query[qid] = prf;
        sum.precision += prf.precision;
        sum.recall += prf.recall;
        sum.f1 += prf.f1;
        auto const& rel = relevant_for(qrels, qid);
        hits += static_cast<double>(hits_at(run, rel, k));
        retrieved += static_cast<double>(std::min(k, run.size()));
        relevant += static_cast<double>(rel.size());
        for (auto const n : recall_ns) {
            recall_sum[n] += recall_at_n(run, qrels, n);
            recall_hits[n] += static_cast<double>(hits_at(run, rel, n));
        }
    }
    if (queries.empty()) {
        return report;
    }
    auto const nq = static_cast<double>(queries.size());
    if (averaging == Averaging::macro) {
        report.averaged = {sum.precision / nq, sum.recall / nq, sum.f1 / nq};
        for (auto const n : recall_ns) {
            report.recall_at[n] = recall_sum[n] / nq;
        }
    } else {
        report.averaged.precision = retrieved == 0.0 ? 0.0 : hits / retrieved;
        report.averaged.recall = hits / relevant;
        report.averaged.f1 = f1_of(report.averaged.precision, report.averaged.recall);
        for (auto const n : recall_ns) {
            report.recall_at[n] = recall_hits[n] / relevant;
        }
    }
    return report;
}

/// Mean recall@N over `query_ids` (all judged queries when empty).
inline double mean_recall_at_n(RunSet const& runs, Qrels const& qrels, std::size_t n,
                               std::vector<std::string> const& query_ids = {})
{
    auto const queries = detail::query_set(qrels, query_ids);
    if (queries.empty()) {
        return 0.0;
    }
    double total = 0.0;
    for (auto const& qid : queries) {
        total += recall_at_n(detail::run_for(runs, qid), qrels, n);
    }
    return total / static_cast<double>(queries.size());
}

struct CutoffSweep {
    std::size_t best_k = 0;
    std::vector<std::pair<std::size_t, double>> curve;
};

/// Averaged F1 for every k; the best k is the smallest one reaching the maximum.
inline CutoffSweep sweep_cutoff(RunSet const& runs, Qrels const& qrels,
                                std::vector<std::size_t> const& k_range,
                                std::vector<std::string> const& query_ids = {},
                                Averaging averaging = Averaging::macro)
{
    if (k_range.empty()) {
        throw ValidationError("cut-off range must not be empty");
    }
    CutoffSweep sweep;
    double best = -1.0;
    for (auto const k : k_range) {
        auto const f1 = evaluate(runs, qrels, k, {}, query_ids, averaging).averaged.f1;
        sweep.curve.emplace_back(k, f1);
        if (f1 > best || (f1 == best && k < sweep.best_k)) {
            best = f1;
            sweep.best_k = k;
        }
    }
    return sweep;
}

// ---- TREC run files -----------------------------------------------------------

/// "qid Q0 docid rank score tag", rank 1-based, score with 6 decimals.
inline void write_run(std::ostream& out, RunSet const& runs, std::string const& tag)
{
    char score[64];
    for (auto const& [qid, list] : runs) {
        for (std::size_t i = 0; i < list.size(); ++i) {
            std::snprintf(score, sizeof(score), "%.6f", list[i].score);
            out << qid << " Q0 " << list[i].id << ' ' << (i + 1) << ' ' << score << ' ' << tag
                << '\n';
        }
    }
}

/// Ranks must run 1, 2, ... per query in file order with non-increasing scores.
inline RunSet read_run(std::istream& in)
{
    std::map<std::string, std::vector<ScoredEntry>> entries;
    std::string line;
    std::size_t line_no = 0;
    auto const fail = [&](std::string const& what) {
        throw Error("run file line " + std::to_string(line_no) + ": " + what);
    };
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.find_first_not_of(" \t") == std::string::npos) {
            continue;
        }
        std::istringstream fields(line);
        std::string qid;
        std::string q0;
        std::string docid;
        std::string rank_str;
        std::string score_str;
        std::string tag;
        std::string extra;
        if (!(fields >> qid >> q0 >> docid >> rank_str >> score_str >> tag) || (fields >> extra)) {
            fail("expected 'qid Q0 docid rank score tag', got '" + line + "'");
        }
        std::size_t rank = 0;
        auto [rptr, rec] = std::from_chars(rank_str.data(), rank_str.data() + rank_str.size(), rank);
        if (rec != std::errc() || rptr != rank_str.data() + rank_str.size() || rank == 0) {
            fail("bad rank '" + rank_str + "'");
        }
        char* end = nullptr;
        double const score = std::strtod(score_str.c_str(), &end);
        if (end != score_str.c_str() + score_str.size() || !std::isfinite(score)) {
            fail("bad score '" + score_str + "'");
        }
        auto& list = entries[qid];
        if (rank != list.size() + 1) {
            fail("rank " + rank_str + " out of sequence for query '" + qid + "'");
        }
        if (!list.empty() && score > list.back().score) {
            fail("score increases with rank for query '" + qid + "'");
        }
        list.push_back({docid, score});
    }
    RunSet runs;
    for (auto& [qid, list] : entries) {
        runs.emplace(qid, ScoredList(qid, std::move(list)));
    }
    return runs;
}

// ---- reports -------------------------------------------------------------------

inline void write_report_tsv(std::ostream& out, EvalReport const& report)
{
    out << "query_id\tmetric\tvalue\n";
    auto const k = std::to_string(report.k);
    for (auto const& [qid, prf] : report.per_query) {
        out << qid << "\tP@" << k << '\t' << format_double(prf.precision) << '\n';
        out << qid << "\tR@" << k << '\t' << format_double(prf.recall) << '\n';
        out << qid << "\tF1@" << k << '\t' << format_double(prf.f1) << '\n';
    }
    out << "all\tP@" << k << '\t' << format_double(report.averaged.precision) << '\n';
    out << "all\tR@" << k << '\t' << format_double(report.averaged.recall) << '\n';
    out << "all\tF1@" << k << '\t' << format_double(report.averaged.f1) << '\n';
    for (auto const& [n, r] : report.recall_at) {
        out << "all\trecall@" << n << '\t' << format_double(r) << '\n';
    }
}

inline nlohmann::ordered_json report_json(EvalReport const& report)
{
    auto const prf_json = [](Prf const& p) {
        nlohmann::ordered_json j;
        j["precision"] = p.precision;
        j["recall"] = p.recall;
        j["f1"] = p.f1;
        return j;
    };
    nlohmann::ordered_json j;
    j["k"] = report.k;
    j["averaging"] = std::string(to_string(report.averaging));
    j["averaged"] = prf_json(report.averaged);
    nlohmann::ordered_json recall = nlohmann::ordered_json::object();
    for (auto const& [n, r] : report.recall_at) {
        recall[std::to_string(n)] = r;
    }
    j["recall_at"] = recall;
    nlohmann::ordered_json per_query = nlohmann::ordered_json::object();
    for (auto const& [qid, prf] : report.per_query) {
        per_query[qid] = prf_json(prf);
    }
    j["per_query"] = per_query;
    return j;
}

inline void write_curve_tsv(std::ostream& out, CutoffSweep const& sweep)
{
    out << "k\tf1\n";
    for (auto const& [k, f1] : sweep.curve) {
        out << k << '\t' << format_double(f1) << '\n';
    }
}

}  // namespace parafuse::eval
