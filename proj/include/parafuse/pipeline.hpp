#pragma once

/// Pipeline stages. Each stage reads its inputs from the output directory,
/// writes its artifacts there, and can be re-run alone.
///
/// Output layout (relative to output_dir):
///   corpus.jsonl  ingest_report.tsv  stats.tsv  split.json  qrels.txt
///   index/bm25.<granularity>.pfix    index/dense.<granularity>.pfemb
///   runs/<model>.paragraph.raw.trec  (one list per query segment)
///   runs/<model>.<granularity>.trec  runs/fused.<granularity>.trec  runs/rerank.trec
///   reports/<run>.eval.{tsv,json}    reports/<run>.cutoff.tsv  reports/weights.<granularity>.tsv
///   predictions/<run>.txt
///   task2/<method>.{trec,pred,eval.tsv,eval.json,cutoff.tsv}

#include <filesystem>
#include <map>
#include <ostream>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "parafuse/aggregation.hpp"
#include "parafuse/bm25.hpp"
#include "parafuse/config.hpp"
#include "parafuse/corpus.hpp"
#include "parafuse/dense.hpp"
#include "parafuse/entailment.hpp"
#include "parafuse/error.hpp"
#include "parafuse/evaluation.hpp"
#include "parafuse/fusion.hpp"
#include "parafuse/io.hpp"
#include "parafuse/rerank.hpp"

namespace parafuse::pipeline {

namespace fs = std::filesystem;

enum class Model { bm25, dense };

inline Model parse_model(std::string_view s)
{
    if (s == "bm25" || s == "lexical") {
        return Model::bm25;
    }
    if (s == "dense") {
        return Model::dense;
    }
    throw ValidationError("model must be 'bm25' or 'dense', got '" + std::string(s) + "'");
}

inline std::string_view to_string(Model m) { return m == Model::bm25 ? "bm25" : "dense"; }

/// Artifact paths under the output directory.
class Layout {
   public:
    explicit Layout(Config const& config) : root_(config.path("output_dir")) {}

    [[nodiscard]] fs::path corpus() const { return root_ / "corpus.jsonl"; }
    [[nodiscard]] fs::path ingest_report() const { return root_ / "ingest_report.tsv"; }
    [[nodiscard]] fs::path stats() const { return root_ / "stats.tsv"; }
    [[nodiscard]] fs::path split() const { return root_ / "split.json"; }
    [[nodiscard]] fs::path qrels() const { return root_ / "qrels.txt"; }
    [[nodiscard]] fs::path bm25_index(lexical::Granularity g) const
    {
        return root_ / "index" / ("bm25." + std::string(lexical::to_string(g)) + ".pfix");
    }
    [[nodiscard]] fs::path dense_matrix(lexical::Granularity g) const
    {
        return root_ / "index" / ("dense." + std::string(lexical::to_string(g)) + ".pfemb");
    }
    [[nodiscard]] fs::path raw_run(Model m) const
    {
        return root_ / "runs" / (std::string(to_string(m)) + ".paragraph.raw.trec");
    }
    [[nodiscard]] fs::path run(Model m, lexical::Granularity g) const
    {
        return root_ / "runs" /
               (std::string(to_string(m)) + "." + std::string(lexical::to_string(g)) + ".trec");
    }
    [[nodiscard]] fs::path fused_run(lexical::Granularity g) const
    {
        return root_ / "runs" / ("fused." + std::string(lexical::to_string(g)) + ".trec");
    }
    [[nodiscard]] fs::path rerank_run() const { return root_ / "runs" / "rerank.trec"; }
    [[nodiscard]] fs::path report(fs::path const& run, std::string const& suffix) const
    {
        return root_ / "reports" / (run.stem().string() + suffix);
    }
    [[nodiscard]] fs::path predictions(fs::path const& run) const
    {
        return root_ / "predictions" / (run.stem().string() + ".txt");
    }
    [[nodiscard]] fs::path weight_sweep(lexical::Granularity g) const
    {
        return root_ / "reports" / ("weights." + std::string(lexical::to_string(g)) + ".tsv");
    }
    [[nodiscard]] fs::path task2(std::string const& name) const { return root_ / "task2" / name; }

   private:
    fs::path root_;
};

/// Throws naming the subcommand that produces a missing artifact.
inline void require_artifact(fs::path const& path, std::string_view producer)
{
    if (!fs::exists(path)) {
        throw Error("missing " + path.string() + "; run `parafuse " + std::string(producer) +
                    "` first");
    }
}

inline void require_input(Config const& config, std::string const& key)
{
    if (!config.has(key)) {
        throw ValidationError("config key '" + key + "' must be set for this command");
    }
    if (!fs::exists(config.path(key))) {
        throw ValidationError("config '" + key + "' points to a missing path: " +
                              config.get(key));
    }
}

inline lexical::Granularity granularity(Config const& config)
{
    return lexical::parse_granularity(config.get("granularity"));
}

inline lexical::Bm25Params bm25_params(Config const& config)
{
    return {config.real("k1"), config.real("b")};
}

inline corpus::IngestOptions ingest_options(Config const& config)
{
    corpus::IngestOptions options;
    options.segmentation.marker_pattern = config.get("marker_regex");
    options.segmentation.summary_headers = config.list("summary_headers");
    options.french_margin = config.real("french_margin");
    options.boilerplate_threshold = config.size("boilerplate_threshold");
    options.validation_size = config.size("validation_size");
    return options;
}

namespace detail {

inline void wrote(std::ostream& log, fs::path const& path) { log << "wrote " << path.string() << '\n'; }

inline void save_run(fs::path const& path, RunSet const& runs, std::string const& tag,
                     std::ostream& log)
{
    auto out = io::open_output(path);
    eval::write_run(out, runs, tag);
    wrote(log, path);
}

inline RunSet load_run(fs::path const& path, std::string_view producer)
{
    require_artifact(path, producer);
    auto in = io::open_input(path);
    return eval::read_run(in);
}

inline std::vector<corpus::Case> load_corpus(Layout const& layout)
{
    require_artifact(layout.corpus(), "preprocess");
    auto in = io::open_input(layout.corpus());
    return corpus::read_corpus_jsonl(in);
}

inline corpus::DatasetSplit load_split(Layout const& layout)
{
    require_artifact(layout.split(), "preprocess");
    require_artifact(layout.qrels(), "preprocess");
    auto const j = nlohmann::json::parse(io::read_file(layout.split()));
    corpus::DatasetSplit split;
    split.train_query_ids = j.at("train").get<std::vector<std::string>>();
    split.validation_query_ids = j.at("validation").get<std::vector<std::string>>();
    auto in = io::open_input(layout.qrels());
    split.qrels = read_qrels(in);
    return split;
}

inline std::vector<std::string> select_queries(corpus::DatasetSplit const& split,
                                               std::string const& which)
{
    if (which == "train") {
        return split.train_query_ids;
    }
    if (which == "validation") {
        return split.validation_query_ids;
    }
    auto all = split.train_query_ids;
    all.insert(all.end(), split.validation_query_ids.begin(), split.validation_query_ids.end());
    return all;
}

/// Judged queries of `which`, skipping ones without relevance labels.
inline std::vector<std::string> eval_queries(corpus::DatasetSplit const& split,
                                             std::string const& which)
{
    std::vector<std::string> out;
    for (auto const& q : select_queries(split, which)) {
        if (split.qrels.count(q) > 0) {
            out.push_back(q);
        }
    }
    return out;
}

inline ScoredList without(ScoredList const& list, std::string const& id, std::size_t max_results)
{
    std::vector<ScoredEntry> kept;
    for (auto const& e : list) {
        if (e.id != id) {
            kept.push_back(e);
        }
    }
    return ScoredList(list.query_id(), std::move(kept)).truncated(max_results);
}

inline std::string tag(Model m, lexical::Granularity g)
{
    return "parafuse-" + std::string(to_string(m)) + "-" + std::string(lexical::to_string(g));
}

}  // namespace detail

/// Ingests the raw corpus and labels; writes the normalized corpus, ingestion
/// report, segment statistics (before and after dedup), split and qrels.
inline corpus::Task1Data preprocess(Config const& config, std::ostream& log)
{
    require_input(config, "corpus_dir");
    require_input(config, "labels");
    Layout const layout(config);
    auto data = corpus::load_task1_corpus(config.path("corpus_dir"), config.path("labels"),
                                          ingest_options(config));
    {
        auto out = io::open_output(layout.corpus());
        corpus::write_corpus_jsonl(out, data.corpus);
        detail::wrote(log, layout.corpus());
    }
    {
        auto out = io::open_output(layout.ingest_report());
        corpus::write_ingest_report(out, data.report);
        detail::wrote(log, layout.ingest_report());
    }
    {
        auto out = io::open_output(layout.stats());
        out << "stage\tcases\tintros\tsummaries\tparagraphs\tavg_case_words\tavg_intro_words\t"
               "avg_summary_words\tavg_paragraph_words\n";
        for (auto const& [stage, s] : {std::pair{"before_dedup", data.stats_before_dedup},
                                       std::pair{"after_dedup", data.stats_after_dedup}}) {
            out << stage << '\t' << s.n_cases << '\t' << s.n_intros << '\t' << s.n_summaries << '\t'
                << s.n_paragraphs << '\t' << eval::format_double(s.avg_case_words) << '\t'
                << eval::format_double(s.avg_intro_words) << '\t'
                << eval::format_double(s.avg_summary_words) << '\t'
                << eval::format_double(s.avg_paragraph_words) << '\n';
        }
        detail::wrote(log, layout.stats());
    }
    {
        nlohmann::ordered_json j;
        j["train"] = data.split.train_query_ids;
        j["validation"] = data.split.validation_query_ids;
        io::write_file(layout.split(), j.dump(2) + "\n");
        detail::wrote(log, layout.split());
    }
    {
        auto out = io::open_output(layout.qrels());
        write_qrels(out, data.split.qrels);
        detail::wrote(log, layout.qrels());
    }
    log << "corpus: " << data.corpus.size() << " cases, " << data.split.train_query_ids.size()
        << " train / " << data.split.validation_query_ids.size() << " validation queries\n";
    return data;
}

/// Builds the BM25 index and, unless an external embedding file is configured,
/// reference embeddings for the configured granularity.
inline void build_indexes(Config const& config, std::ostream& log)
{
    Layout const layout(config);
    auto const g = granularity(config);
    auto const cases = detail::load_corpus(layout);
    auto const items = lexical::index_items(cases, g);
    auto const index = lexical::Bm25Index::build(items, g, bm25_params(config));
    io::write_file(layout.bm25_index(g), index.serialize());
    detail::wrote(log, layout.bm25_index(g));

    auto const external = g == lexical::Granularity::paragraph ? "embeddings" : "doc_embeddings";
    if (config.has(external)) {
        require_input(config, external);
        log << "dense: using " << config.get(external) << '\n';
        return;
    }
    auto const max_tokens = g == lexical::Granularity::document ? config.size("doc_max_tokens") : 0;
    dense::ReferenceEmbedder const embedder(config.size("embed_dim"), config.size("embed_seed"),
                                            max_tokens);
    dense::save_embeddings(dense::embed_all(embedder, items), layout.dense_matrix(g));
    detail::wrote(log, layout.dense_matrix(g));
}

inline dense::EmbeddingMatrix load_dense(Config const& config, lexical::Granularity g)
{
    auto const external = g == lexical::Granularity::paragraph ? "embeddings" : "doc_embeddings";
    if (config.has(external)) {
        require_input(config, external);
        return dense::load_embeddings(config.path(external));
    }
    auto const path = Layout(config).dense_matrix(g);
    require_artifact(path, "index");
    return dense::load_embeddings(path);
}

/// First-stage retrieval for the configured query split. Paragraph granularity
/// writes one top-N list per query segment (query id = segment id); document
/// granularity writes the case ranking directly, query case excluded.
inline fs::path retrieve(Config const& config, Model model, std::ostream& log)
{
    Layout const layout(config);
    auto const g = granularity(config);
    auto const cases = detail::load_corpus(layout);
    std::unordered_map<std::string, corpus::Case const*> by_id;
    for (auto const& c : cases) {
        by_id.emplace(c.case_id, &c);
    }
    auto const split = detail::load_split(layout);
    auto const queries = detail::select_queries(split, config.get("split"));
    auto const depth = config.size("depth");
    auto const top = config.size("aggregated_depth");

    std::optional<lexical::Bm25Index> index;
    std::optional<dense::EmbeddingMatrix> matrix;
    if (model == Model::bm25) {
        require_artifact(layout.bm25_index(g), "index");
        index = lexical::Bm25Index::deserialize(io::read_file(layout.bm25_index(g)));
        if (index->granularity() != g) {
            throw Error(layout.bm25_index(g).string() + " was built for another granularity");
        }
    } else {
        matrix = load_dense(config, g);
    }

    RunSet runs;
    for (auto const& qid : queries) {
        auto it = by_id.find(qid);
        if (it == by_id.end()) {
            throw Error("query case '" + qid + "' is not in the corpus");
        }
        auto const& c = *it->second;
        if (g == lexical::Granularity::paragraph) {
            for (auto const& [ref, segment] : c.segments()) {
                auto const id = ref.str();
                auto list = index ? index->query_topn(segment, depth, id)
                                  : dense::dense_topn(*matrix, matrix->at(id), depth, id);
                if (!list.empty()) {
                    runs.emplace(id, std::move(list));
                }
            }
        } else {
            auto list = index ? index->query_topn(c.full_text(), top + 1, qid)
                              : dense::dense_topn(*matrix, matrix->at(qid), top + 1, qid);
            runs.emplace(qid, detail::without(list, qid, top));
        }
    }
    auto const path = g == lexical::Granularity::paragraph ? layout.raw_run(model)
                                                           : layout.run(model, g);
    detail::save_run(path, runs, detail::tag(model, g), log);
    return path;
}

/// Lifts per-segment paragraph runs to case rankings.
inline fs::path aggregate(Config const& config, Model model, std::ostream& log)
{
    Layout const layout(config);
    auto const raw = detail::load_run(layout.raw_run(model), "retrieve");
    auto const strategy = aggregation::parse_strategy(config.get("aggregation"));
    auto const top = config.size("aggregated_depth");
    RunSet runs;
    for (auto const& set : aggregation::group_by_query_case(raw, config.size("depth"))) {
        runs.emplace(set.query_id, aggregation::aggregate(set, strategy, top));
    }
    auto const path = layout.run(model, lexical::Granularity::paragraph);
    detail::save_run(path, runs, detail::tag(model, lexical::Granularity::paragraph), log);
    return path;
}

inline fusion::FusionWeights weights(Config const& config)
{
    fusion::FusionWeights const w{config.real("alpha"), config.real("beta")};
    w.validate();
    return w;
}

/// alpha * lexical + beta * dense over the two case-level runs.
inline fs::path fuse(Config const& config, fs::path lex_path, fs::path dense_path, fs::path out_path,
                     std::ostream& log)
{
    Layout const layout(config);
    auto const g = granularity(config);
    auto const producer = g == lexical::Granularity::paragraph ? "aggregate" : "retrieve";
    if (lex_path.empty()) {
        lex_path = layout.run(Model::bm25, g);
    }
    if (dense_path.empty()) {
        dense_path = layout.run(Model::dense, g);
    }
    if (out_path.empty()) {
        out_path = layout.fused_run(g);
    }
    auto const fused =
        fusion::fuse_runs(detail::load_run(lex_path, producer), detail::load_run(dense_path, producer),
                          weights(config), config.flag("normalize"), config.size("aggregated_depth"));
    detail::save_run(out_path, fused, "parafuse-fused-" + std::string(lexical::to_string(g)), log);
    return out_path;
}

/// Cut-off P/R/F1 and recall@N of a run over the evaluation split, plus
/// top-k predictions for every query in the run.
inline eval::EvalReport evaluate(Config const& config, fs::path const& run_path, std::ostream& log)
{
    Layout const layout(config);
    auto const runs = detail::load_run(run_path, "retrieve/aggregate/fuse");
    auto const split = detail::load_split(layout);
    auto const k = config.size("cutoff");
    auto const report =
        eval::evaluate(runs, split.qrels, k, config.sizes("recall_ns"),
                       detail::eval_queries(split, config.get("eval_split")),
                       eval::parse_averaging(config.get("averaging")));
    {
        auto const path = layout.report(run_path, ".eval.tsv");
        auto out = io::open_output(path);
        eval::write_report_tsv(out, report);
        detail::wrote(log, path);
    }
    {
        auto const path = layout.report(run_path, ".eval.json");
        io::write_file(path, eval::report_json(report).dump(2) + "\n");
        detail::wrote(log, path);
    }
    {
        auto const path = layout.predictions(run_path);
        auto out = io::open_output(path);
        entailment::write_predictions(out, runs, k);
        detail::wrote(log, path);
    }
    log << run_path.stem().string() << ": P@" << k << "=" << eval::format_double(report.averaged.precision)
        << " R@" << k << "=" << eval::format_double(report.averaged.recall) << " F1@" << k << "="
        << eval::format_double(report.averaged.f1) << '\n';
    return report;
}

/// Grid search over (alpha, beta) on the evaluation split by mean recall@sweep_recall.
inline fusion::WeightSweep sweep_weights(Config const& config, std::ostream& log)
{
    Layout const layout(config);
    auto const g = granularity(config);
    auto const producer = g == lexical::Granularity::paragraph ? "aggregate" : "retrieve";
    auto const split = detail::load_split(layout);
    auto const sweep = fusion::sweep_weights(
        detail::load_run(layout.run(Model::bm25, g), producer),
        detail::load_run(layout.run(Model::dense, g), producer), config.grid("weight_grid"),
        split.qrels, config.size("sweep_recall"), detail::eval_queries(split, config.get("eval_split")),
        config.flag("normalize"));
    auto out = io::open_output(layout.weight_sweep(g));
    fusion::write_sweep_tsv(out, sweep);
    detail::wrote(log, layout.weight_sweep(g));
    log << "best weights: " << eval::format_double(sweep.best.alpha) << ":"
        << eval::format_double(sweep.best.beta) << '\n';
    return sweep;
}

inline eval::CutoffSweep sweep_cutoff(Config const& config, fs::path const& run_path,
                                      std::ostream& log)
{
    Layout const layout(config);
    auto const split = detail::load_split(layout);
    auto const sweep = eval::sweep_cutoff(detail::load_run(run_path, "retrieve/aggregate/fuse"),
                                          split.qrels, config.sizes("cutoff_range"),
                                          detail::eval_queries(split, config.get("eval_split")),
                                          eval::parse_averaging(config.get("averaging")));
    auto const path = layout.report(run_path, ".cutoff.tsv");
    auto out = io::open_output(path);
    eval::write_curve_tsv(out, sweep);
    detail::wrote(log, path);
    log << "best cut-off: " << sweep.best_k << '\n';
    return sweep;
}

/// Re-orders the top rerank_depth of a first-stage run by the configured pair
/// scores; writes the run and top-cutoff predictions.
inline fs::path rerank(Config const& config, fs::path run_path, std::ostream& log)
{
    Layout const layout(config);
    require_input(config, "pair_scores");
    if (run_path.empty()) {
        run_path = layout.fused_run(granularity(config));
    }
    auto const first = detail::load_run(run_path, "fuse");
    auto in = io::open_input(config.path("pair_scores"));
    auto const pairs = rerank::read_pair_scores(in);
    auto const reranked = rerank::rerank(first, pairs, config.size("rerank_depth"));
    detail::save_run(layout.rerank_run(), reranked, "parafuse-rerank", log);
    auto const pred = layout.predictions(layout.rerank_run());
    auto out = io::open_output(pred);
    entailment::write_predictions(out, reranked, config.size("cutoff"));
    detail::wrote(log, pred);
    return layout.rerank_run();
}

/// Task 2: ranks every query's candidates with each method, writes runs and
/// top-k predictions, and evaluates on the labeled evaluation split.
inline std::map<std::string, eval::EvalReport> entail(Config const& config,
                                                      std::vector<entailment::MethodKind> const& methods,
                                                      std::ostream& log)
{
    require_input(config, "task2_dir");
    Layout const layout(config);
    auto const queries = corpus::load_task2_corpus(config.path("task2_dir"));
    std::vector<std::string> ordered;
    for (auto const& q : queries) {
        ordered.push_back(q.query_id);
    }
    auto const split =
        corpus::make_split(ordered, entailment::qrels_of(queries), config.size("validation_size"));
    auto const eval_ids = detail::eval_queries(split, config.get("eval_split"));

    std::optional<dense::EmbeddingMatrix> matrix;
    if (config.has("task2_embeddings")) {
        require_input(config, "task2_embeddings");
        matrix = dense::load_embeddings(config.path("task2_embeddings"));
    }
    entailment::Method method;
    method.weights = {config.real("task2_alpha"), config.real("task2_beta")};
    method.weights.validate();
    auto const k = config.size("task2_cutoff");

    std::map<std::string, eval::EvalReport> reports;
    for (auto const kind : methods) {
        method.kind = kind;
        auto const name = std::string(entailment::to_string(kind));
        auto const runs =
            matrix ? entailment::rank_all(queries, method, entailment::MatrixSource{&*matrix},
                                          bm25_params(config))
                   : entailment::rank_all(
                         queries, method,
                         entailment::EmbedderSource<dense::ReferenceEmbedder>{dense::ReferenceEmbedder(
                             config.size("embed_dim"), config.size("embed_seed"))},
                         bm25_params(config));
        detail::save_run(layout.task2(name + ".trec"), runs, "parafuse-task2-" + name, log);
        {
            auto out = io::open_output(layout.task2(name + ".pred"));
            entailment::write_predictions(out, runs, k);
            detail::wrote(log, layout.task2(name + ".pred"));
        }
        if (eval_ids.empty()) {
            continue;
        }
        auto const averaging = eval::parse_averaging(config.get("averaging"));
        auto const report = eval::evaluate(runs, split.qrels, k, {}, eval_ids, averaging);
        {
            auto out = io::open_output(layout.task2(name + ".eval.tsv"));
            eval::write_report_tsv(out, report);
            detail::wrote(log, layout.task2(name + ".eval.tsv"));
        }
        io::write_file(layout.task2(name + ".eval.json"), eval::report_json(report).dump(2) + "\n");
        detail::wrote(log, layout.task2(name + ".eval.json"));
        auto const sweep =
            eval::sweep_cutoff(runs, split.qrels, config.sizes("cutoff_range"), eval_ids, averaging);
        auto out = io::open_output(layout.task2(name + ".cutoff.tsv"));
        eval::write_curve_tsv(out, sweep);
        detail::wrote(log, layout.task2(name + ".cutoff.tsv"));
        log << "task2 " << name << ": F1@" << k << "=" << eval::format_double(report.averaged.f1)
            << " best cut-off " << sweep.best_k << '\n';
        reports.emplace(name, report);
    }
    return reports;
}

/// Every Task 1 stage in order, then re-ranking and Task 2 when configured.
inline void run_all(Config const& config, std::ostream& log)
{
    auto const g = granularity(config);
    preprocess(config, log);
    build_indexes(config, log);
    for (auto const m : {Model::bm25, Model::dense}) {
        retrieve(config, m, log);
        if (g == lexical::Granularity::paragraph) {
            aggregate(config, m, log);
        }
    }
    Layout const layout(config);
    auto const fused = fuse(config, {}, {}, {}, log);
    for (auto const m : {Model::bm25, Model::dense}) {
        evaluate(config, layout.run(m, g), log);
    }
    evaluate(config, fused, log);
    sweep_weights(config, log);
    sweep_cutoff(config, fused, log);
    if (config.has("pair_scores")) {
        rerank(config, fused, log);
    }
    if (config.has("task2_dir")) {
        entail(config,
               {entailment::MethodKind::lexical, entailment::MethodKind::dense,
                entailment::MethodKind::fused},
               log);
    }
}

}  // namespace parafuse::pipeline
