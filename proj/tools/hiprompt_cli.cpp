/*
 * Copyright 2026 The HiPrompt Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// hiprompt: command-line front end for the retrieve-and-rerank alignment pipeline.
//
//   hiprompt synth    --out DIR [--seed N] [--n-terms N] [--n-entities N]
//   hiprompt ingest   --data DIR
//   hiprompt retrieve --data DIR --expansion atr+str --k1 1.2 --b 0.75 --topk 10
//   hiprompt run      --data DIR --backend echo|oracle|reverse|live --shots 0|1 --run-dir DIR
//   hiprompt baseline --data DIR --which editdist|bm25
//   hiprompt evaluate --data DIR --predictions FILE
//
// Exit codes: 0 success, 1 usage error, 2 data validation error, 3 backend failure.

#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hiprompt/pipeline.hpp"

namespace {

using namespace hiprompt;

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitBackend = 3;

/// Options shared by every subcommand that reads a dataset; applied on top of --config.
struct CommonOptions {
    std::string config_file;
    std::vector<std::string> overrides;  // key=value
    std::map<std::string, std::string> values;

    void attach(CLI::App* cmd) {
        cmd->add_option("--config", config_file, "flat key=value config file");
        cmd->add_option("--set", overrides, "extra key=value setting (repeatable)");
        add(cmd, "--data", "data", "dataset directory with canonical file names");
        add(cmd, "--entities", "entities", "entity JSON Lines file");
        add(cmd, "--triples", "triples", "triple TSV file");
        add(cmd, "--terms", "terms", "term JSON Lines file");
        add(cmd, "--pairs", "pairs", "hierarchy pair TSV file");
        add(cmd, "--links", "links", "gold link TSV file");
        add(cmd, "--shots", "shots", "number of demonstration links (0 or 1)");
        add(cmd, "--depth", "depth", "depth convention: shortest|longest");
    }

    void add(CLI::App* cmd, const std::string& flag, const std::string& key, const std::string& help) {
        cmd->add_option_function<std::string>(flag, [this, key](const std::string& v) { values[key] = v; }, help);
    }

    RunConfig build() const {
        RunConfig cfg;
        if (!config_file.empty()) cfg.load_file(config_file);
        // "data" first so individual file options can override single paths.
        if (auto it = values.find("data"); it != values.end()) cfg.set("data", it->second);
        for (const auto& [k, v] : values) {
            if (k != "data") cfg.set(k, v);
        }
        for (const auto& kv : overrides) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos) throw ConfigError("--set expects key=value, got " + kv);
            cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
        }
        return cfg;
    }
};

void add_retrieval_options(CommonOptions& common, CLI::App* cmd) {
    common.add(cmd, "--expansion", "expansion", "name|atr|str|atr+str");
    common.add(cmd, "--k1", "k1", "BM25 saturation parameter");
    common.add(cmd, "--b", "b", "BM25 length normalization");
    common.add(cmd, "--topk", "topk", "candidate list length K");
}

void print_report(const MetricReport& report, const std::string& out_dir, const std::vector<RankedPrediction>& preds) {
    std::cout << report.to_text();
    if (out_dir.empty()) return;
    write_file_atomic(std::filesystem::path(out_dir) / "predictions.tsv", format_predictions(preds));
    write_file_atomic(std::filesystem::path(out_dir) / "report.txt", report.to_text());
    write_file_atomic(std::filesystem::path(out_dir) / "report.kv", report.to_kv());
}

int cmd_ingest(const RunConfig& cfg) {
    cfg.validate();
    const auto data = load_dataset(cfg);
    std::map<std::string, std::size_t> types;
    for (const auto& e : data.kg.entities()) {
        for (const auto& t : e.types) ++types[t];
    }
    std::printf("entities     %zu\n", data.kg.size());
    for (const auto& [t, n] : types) std::printf("  type %-12s %zu\n", t.c_str(), n);
    std::printf("triples      %zu\n", data.kg.triples().size());
    std::printf("terms        %zu\n", data.hierarchy.size());
    std::printf("pairs        %zu\n", data.hierarchy.pairs().size());
    std::printf("max depth    %zu\n", data.hierarchy.max_depth());
    std::printf("links        %zu (%zu demonstration, %zu test)\n", data.links.links().size(),
                data.links.demonstrations().size(), data.links.tests().size());
    return 0;
}

int cmd_retrieve(const RunConfig& cfg, bool all_entities) {
    cfg.validate();
    const auto data = load_dataset(cfg);
    const auto index = Bm25Index::build(data.hierarchy, cfg.expansion, cfg.bm25);
    std::vector<std::string> ids;
    if (all_entities) {
        for (const auto& e : data.kg.entities()) ids.push_back(e.id);
    } else {
        for (const auto& l : data.links.links()) ids.push_back(l.entity_id);
    }
    for (const auto& id : ids) {
        const auto& e = data.kg.entity(id);
        const auto rl = index.retrieve(build_entity_query(e, data.kg, cfg.expansion), cfg.top_k, id);
        for (std::size_t i = 0; i < rl.items.size(); ++i) {
            std::printf("%s\t%zu\t%s\t%.6f\n", id.c_str(), i + 1, rl.items[i].term_id.c_str(), rl.items[i].score);
        }
    }
    return 0;
}

int cmd_evaluate(const RunConfig& cfg, const std::string& predictions, const std::string& kv_out) {
    const auto h = load_hierarchy(cfg.data.terms, cfg.data.pairs, cfg.depth);
    const auto links = load_links(cfg.data.links, cfg.prompt.shots);
    const auto preds = read_predictions(predictions, links);
    for (const auto& p : preds) {
        for (const auto& t : p.predicted) {
            if (!h.contains(t)) throw UnknownIdError("term", t);
        }
    }
    const auto report = evaluate(preds, h, cfg.gain);
    std::cout << report.to_text();
    if (!kv_out.empty()) write_file_atomic(kv_out, report.to_kv());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Align knowledge-graph entities to hierarchy terms by BM25 retrieval and LLM re-ranking"};
    app.require_subcommand(1);

    CommonOptions common;

    auto* synth = app.add_subcommand("synth", "write a deterministic synthetic dataset");
    std::string synth_out;
    std::uint64_t synth_seed = 7;
    std::size_t synth_terms = 1000;
    std::size_t synth_entities = 200;
    synth->add_option("--out", synth_out, "output directory")->required();
    synth->add_option("--seed", synth_seed, "random seed");
    synth->add_option("--n-terms", synth_terms, "number of hierarchy terms");
    synth->add_option("--n-entities", synth_entities, "number of linked entities");

    auto* ingest = app.add_subcommand("ingest", "load and validate a dataset, print statistics");
    common.attach(ingest);

    auto* retrieve = app.add_subcommand("retrieve", "BM25 candidate lists as entity_id, rank, term_id, score");
    common.attach(retrieve);
    add_retrieval_options(common, retrieve);
    bool all_entities = false;
    retrieve->add_flag("--all-entities", all_entities, "retrieve for every KG entity, not only linked ones");

    auto* run_cmd = app.add_subcommand("run", "end-to-end retrieve, prompt, complete, parse, evaluate");
    common.attach(run_cmd);
    add_retrieval_options(common, run_cmd);
    common.add(run_cmd, "--backend", "backend", "echo|oracle|reverse|live");
    common.add(run_cmd, "--hierarchy-context", "hierarchy_context", "on|off");
    common.add(run_cmd, "--run-dir", "run_dir", "artifact directory");
    common.add(run_cmd, "--workers", "workers", "worker threads");
    common.add(run_cmd, "--endpoint", "endpoint", "completion endpoint URL (live backend)");
    common.add(run_cmd, "--model", "model", "model name sent to the endpoint");
    common.add(run_cmd, "--token-budget", "token_budget", "prompt budget in words");

    auto* base = app.add_subcommand("baseline", "rank test entities with a non-LLM baseline");
    common.attach(base);
    add_retrieval_options(common, base);
    std::string which = "bm25";
    std::string baseline_out;
    base->add_option("--which", which, "editdist|bm25");
    base->add_option("--out", baseline_out, "write predictions.tsv and reports into this directory");

    auto* eval = app.add_subcommand("evaluate", "score a prediction file against the gold links");
    common.attach(eval);
    std::string predictions;
    std::string kv_out;
    eval->add_option("--predictions", predictions, "entity_id, rank, term_id TSV")->required();
    eval->add_option("--kv", kv_out, "also write key=value metrics here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (synth->parsed()) {
            write_synthetic(synth_out, synth_seed, synth_terms, synth_entities);
            return 0;
        }
        const auto cfg = common.build();
        if (ingest->parsed()) return cmd_ingest(cfg);
        if (retrieve->parsed()) return cmd_retrieve(cfg, all_entities);
        if (run_cmd->parsed()) {
            const auto result = run(cfg);
            std::cout << result.report.to_text();
            std::fprintf(stderr, "backend calls: %zu, edit-distance fallbacks: %zu, artifacts: %s\n",
                         result.backend_calls, result.fallbacks, cfg.run_dir.string().c_str());
            return 0;
        }
        if (base->parsed()) {
            const auto result = baseline(cfg, parse_baseline_kind(which));
            print_report(result.report, baseline_out, result.predictions);
            return 0;
        }
        if (eval->parsed()) return cmd_evaluate(cfg, predictions, kv_out);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return kExitUsage;
    } catch (const RunError& e) {
        std::fprintf(stderr, "run failed: %s\n", e.what());
        return e.backend_failure() ? kExitBackend : kExitData;
    } catch (const BackendError& e) {
        std::fprintf(stderr, "backend failure: %s\n", e.what());
        return kExitBackend;
    } catch (const DataError& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return kExitData;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return kExitUsage;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitData;
    }
    return kExitUsage;
}
