// parafuse: command-line front end over the pipeline stages.
//
// Exit codes: 0 success, 2 invalid config or arguments, 1 runtime error.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "parafuse/pipeline.hpp"

namespace {

using parafuse::Config;
namespace pipeline = parafuse::pipeline;

Config load_config(std::string path, std::vector<std::string> const& overrides)
{
    if (path.empty()) {
        if (char const* env = std::getenv("PARAFUSE_CONFIG")) {
            path = env;
        }
    }
    Config config = path.empty() ? Config{} : Config::load(path);
    for (auto const& kv : overrides) {
        auto const eq = kv.find('=');
        if (eq == std::string::npos) {
            throw parafuse::ValidationError("override '" + kv + "' is not key=value");
        }
        config.set(std::string(parafuse::text::trim(kv.substr(0, eq))),
                   std::string(parafuse::text::trim(kv.substr(eq + 1))));
    }
    return config;
}

std::vector<pipeline::Model> models_of(std::string const& name)
{
    if (name == "all") {
        return {pipeline::Model::bm25, pipeline::Model::dense};
    }
    return {pipeline::parse_model(name)};
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"parafuse: paragraph-level lexical + dense case retrieval with rank fusion"};
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> overrides;
    app.add_option("-c,--config", config_path, "config file (default: $PARAFUSE_CONFIG)");
    app.add_option("-s,--set", overrides, "override a config key: key=value (repeatable)");

    auto* preprocess = app.add_subcommand("preprocess", "ingest cases and labels");
    auto* index = app.add_subcommand("index", "build the BM25 index and reference embeddings");

    std::string model = "all";
    auto* retrieve = app.add_subcommand("retrieve", "first-stage retrieval");
    retrieve->add_option("-m,--model", model, "bm25, dense or all")
        ->check(CLI::IsMember({"bm25", "dense", "all"}));
    auto* aggregate = app.add_subcommand("aggregate", "aggregate paragraph runs to case runs");
    aggregate->add_option("-m,--model", model, "bm25, dense or all")
        ->check(CLI::IsMember({"bm25", "dense", "all"}));

    std::string lex_run;
    std::string dense_run;
    std::string out_run;
    auto* fuse = app.add_subcommand("fuse", "weighted fusion of lexical and dense runs");
    fuse->add_option("--lex", lex_run, "lexical run (default: runs/bm25.<granularity>.trec)");
    fuse->add_option("--dense", dense_run, "dense run (default: runs/dense.<granularity>.trec)");
    fuse->add_option("-o,--out", out_run, "output run (default: runs/fused.<granularity>.trec)");

    std::string run_path;
    auto* evaluate = app.add_subcommand("evaluate", "P/R/F1 at the cut-off and recall@N");
    evaluate->add_option("-r,--run", run_path, "run file (default: the fused run)");

    std::string what = "weights";
    auto* sweep = app.add_subcommand("sweep", "fusion weight grid or cut-off sweep");
    sweep->add_option("what", what, "weights or cutoff")->check(CLI::IsMember({"weights", "cutoff"}));
    sweep->add_option("-r,--run", run_path, "run for the cut-off sweep (default: the fused run)");

    std::string method = "all";
    auto* entail = app.add_subcommand("entail", "Task 2 candidate paragraph ranking");
    entail->add_option("-m,--method", method, "lexical, dense, fused or all")
        ->check(CLI::IsMember({"lexical", "dense", "fused", "all"}));

    auto* rerank = app.add_subcommand("rerank", "re-rank a run with external pair scores");
    rerank->add_option("-r,--run", run_path, "first-stage run (default: the fused run)");

    auto* run = app.add_subcommand("run", "every stage in order");
    auto* show = app.add_subcommand("config", "print the effective canonical config");

    try {
        app.parse(argc, argv);
    } catch (CLI::ParseError const& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        auto const config = load_config(config_path, overrides);
        auto& log = std::cout;
        pipeline::Layout const layout(config);
        auto const g = pipeline::granularity(config);
        auto const default_run = [&]() -> std::filesystem::path {
            return run_path.empty() ? layout.fused_run(g) : std::filesystem::path(run_path);
        };

        if (*preprocess) {
            pipeline::preprocess(config, log);
        } else if (*index) {
            pipeline::build_indexes(config, log);
        } else if (*retrieve) {
            for (auto const m : models_of(model)) {
                pipeline::retrieve(config, m, log);
            }
        } else if (*aggregate) {
            if (g != parafuse::lexical::Granularity::paragraph) {
                throw parafuse::ValidationError("aggregate needs granularity = paragraph");
            }
            for (auto const m : models_of(model)) {
                pipeline::aggregate(config, m, log);
            }
        } else if (*fuse) {
            pipeline::fuse(config, lex_run, dense_run, out_run, log);
        } else if (*evaluate) {
            pipeline::evaluate(config, default_run(), log);
        } else if (*sweep) {
            if (what == "weights") {
                pipeline::sweep_weights(config, log);
            } else {
                pipeline::sweep_cutoff(config, default_run(), log);
            }
        } else if (*entail) {
            std::vector<parafuse::entailment::MethodKind> methods;
            if (method == "all") {
                methods = {parafuse::entailment::MethodKind::lexical,
                           parafuse::entailment::MethodKind::dense,
                           parafuse::entailment::MethodKind::fused};
            } else {
                methods = {parafuse::entailment::parse_method(method)};
            }
            pipeline::entail(config, methods, log);
        } else if (*rerank) {
            pipeline::rerank(config, run_path, log);
        } else if (*run) {
            pipeline::run_all(config, log);
        } else if (*show) {
            std::cout << config.to_text();
        }
    } catch (parafuse::ValidationError const& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (std::exception const& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
