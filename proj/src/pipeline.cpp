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

#include "hiprompt/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "hiprompt/text.hpp"

namespace hiprompt {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Configuration

BackendKind parse_backend_kind(std::string_view label) {
    if (label == "echo") return BackendKind::Echo;
    if (label == "oracle") return BackendKind::Oracle;
    if (label == "reverse") return BackendKind::Reverse;
    if (label == "live") return BackendKind::Live;
    throw ConfigError("unknown backend \"" + std::string(label) + "\" (expected echo|oracle|reverse|live)");
}

std::string_view to_string(BackendKind kind) {
    switch (kind) {
        case BackendKind::Echo: return "echo";
        case BackendKind::Oracle: return "oracle";
        case BackendKind::Reverse: return "reverse";
        case BackendKind::Live: return "live";
    }
    return "?";
}

BaselineKind parse_baseline_kind(std::string_view label) {
    if (label == "editdist") return BaselineKind::EditDistance;
    if (label == "bm25") return BaselineKind::Bm25;
    throw ConfigError("unknown baseline \"" + std::string(label) + "\" (expected editdist|bm25)");
}

namespace {

template <typename T>
T parse_number(std::string_view key, std::string_view value) {
    T out{};
    if constexpr (std::is_floating_point_v<T>) {
        try {
            std::size_t used = 0;
            out = static_cast<T>(std::stod(std::string(value), &used));
            if (used == value.size()) return out;
        } catch (const std::exception&) {
        }
    } else {
        auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
        if (ec == std::errc{} && ptr == value.data() + value.size()) return out;
    }
    throw ConfigError("invalid value \"" + std::string(value) + "\" for " + std::string(key));
}

bool parse_flag(std::string_view key, std::string_view value) {
    if (value == "1" || value == "true" || value == "on" || value == "yes") return true;
    if (value == "0" || value == "false" || value == "off" || value == "no") return false;
    throw ConfigError("invalid flag \"" + std::string(value) + "\" for " + std::string(key));
}

}  // namespace

void RunConfig::set(std::string_view key, std::string_view value) {
    value = trim(value);
    try {
        if (key == "data") data = DatasetFiles::in(fs::path(std::string(value)));
        else if (key == "entities") data.entities = std::string(value);
        else if (key == "triples") data.triples = std::string(value);
        else if (key == "terms") data.terms = std::string(value);
        else if (key == "pairs") data.pairs = std::string(value);
        else if (key == "links") data.links = std::string(value);
        else if (key == "expansion") expansion = ExpansionConfig::parse(value);
        else if (key == "k1") bm25.k1 = parse_number<double>(key, value);
        else if (key == "b") bm25.b = parse_number<double>(key, value);
        else if (key == "topk") top_k = parse_number<std::size_t>(key, value);
        else if (key == "shots") prompt.shots = parse_number<std::size_t>(key, value);
        else if (key == "hierarchy_context") prompt.hierarchy_context = parse_flag(key, value);
        else if (key == "task_description") prompt.task_description = std::string(value);
        else if (key == "token_budget") prompt.token_budget = parse_number<std::size_t>(key, value);
        else if (key == "backend") backend = parse_backend_kind(value);
        else if (key == "endpoint") live.endpoint = std::string(value);
        else if (key == "api_key_env") api_key_env = std::string(value);
        else if (key == "model") model = std::string(value);
        else if (key == "temperature") temperature = parse_number<double>(key, value);
        else if (key == "max_output_tokens") max_output_tokens = parse_number<std::size_t>(key, value);
        else if (key == "concurrency") live.concurrency = parse_number<std::size_t>(key, value);
        else if (key == "requests_per_second") live.requests_per_second = parse_number<double>(key, value);
        else if (key == "timeout") live.timeout = std::chrono::seconds(parse_number<long>(key, value));
        else if (key == "run_dir") run_dir = std::string(value);
        else if (key == "seed") seed = parse_number<std::uint64_t>(key, value);
        else if (key == "workers") workers = parse_number<std::size_t>(key, value);
        else if (key == "depth") {
            if (value == "shortest") depth = DepthConvention::ShortestPath;
            else if (value == "longest") depth = DepthConvention::LongestPath;
            else throw ConfigError("depth must be shortest|longest");
        } else if (key == "gain_base") gain.base = parse_number<double>(key, value);
        else if (key == "gain_cutoff") gain.cutoff = parse_number<std::size_t>(key, value);
        else throw ConfigError("unknown config key \"" + std::string(key) + "\"");
    } catch (const std::invalid_argument& e) {
        if (dynamic_cast<const ConfigError*>(&e) != nullptr) throw;
        throw ConfigError(e.what());
    }
}

void RunConfig::load_file(const fs::path& file) {
    std::ifstream in(file);
    if (!in) throw ConfigError("cannot open config file " + file.string());
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        const auto text = trim(line);
        if (text.empty() || text.front() == '#') continue;
        const auto eq = text.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError(file.string() + ":" + std::to_string(number) + ": expected key=value");
        }
        set(trim(text.substr(0, eq)), text.substr(eq + 1));
    }
}

void RunConfig::validate() const {
    for (const auto& [label, path] : {std::pair{"entities", &data.entities}, std::pair{"triples", &data.triples},
                                      std::pair{"terms", &data.terms}, std::pair{"pairs", &data.pairs},
                                      std::pair{"links", &data.links}}) {
        if (path->empty()) throw ConfigError(std::string("no ") + label + " file configured");
        if (!fs::exists(*path)) throw ConfigError(std::string(label) + " file not found: " + path->string());
    }
    if (top_k < kMinPromptCandidates) throw ConfigError("topk must be at least 3");
    if (prompt.shots > 1) throw ConfigError("shots must be 0 or 1");
    if (prompt.token_budget < 256) throw ConfigError("token_budget must be at least 256");
    if (temperature < 0.0 || temperature > 2.0) throw ConfigError("temperature must lie in [0, 2]");
    if (!(bm25.k1 > 0.0)) throw ConfigError("k1 must be positive");
    if (bm25.b < 0.0 || bm25.b > 1.0) throw ConfigError("b must lie in [0, 1]");
    if (workers == 0) throw ConfigError("workers must be at least 1");
    if (live.concurrency == 0) throw ConfigError("concurrency must be at least 1");
    if (!(gain.base > 1.0)) throw ConfigError("gain_base must exceed 1");
    if (backend == BackendKind::Live && live.endpoint.empty()) throw ConfigError("live backend needs an endpoint");
}

// ---------------------------------------------------------------------------
// Files

void write_file_atomic(const fs::path& path, std::string_view content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp" + std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id()));
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << content;
        if (!out) throw std::runtime_error("write failed for " + tmp.string());
    }
    fs::rename(tmp, path);
}

std::string file_stem_for(std::string_view id) {
    static constexpr char hex[] = "0123456789ABCDEF";
    std::string out;
    for (unsigned char c : id) {
        const bool safe = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '.' ||
                          c == '_' || c == '-';
        if (safe && !(out.empty() && c == '.')) {
            out.push_back(static_cast<char>(c));
        } else {
            out.push_back('%');
            out.push_back(hex[c >> 4]);
            out.push_back(hex[c & 0x0F]);
        }
    }
    return out;
}

std::string format_predictions(const std::vector<RankedPrediction>& preds) {
    std::ostringstream out;
    for (const auto& p : preds) {
        for (std::size_t i = 0; i < p.predicted.size(); ++i) out << p.entity_id << '\t' << i + 1 << '\t' << p.predicted[i] << '\n';
    }
    return out.str();
}

std::vector<RankedPrediction> read_predictions(const fs::path& file, const AlignmentSet& links) {
    std::ifstream in(file);
    if (!in) throw DataError("cannot open " + file.string());
    std::map<std::string, std::map<std::size_t, std::string>> rows;
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty() || line.front() == '#') continue;
        const auto cols = split(line, '\t');
        if (cols.size() != 3) throw ParseError(file, number, "expected entity_id, rank, term_id");
        std::size_t rank = 0;
        const auto r = trim(cols[1]);
        auto [ptr, ec] = std::from_chars(r.data(), r.data() + r.size(), rank);
        if (ec != std::errc{} || ptr != r.data() + r.size() || rank == 0) {
            throw ParseError(file, number, "rank must be a positive integer");
        }
        if (!rows[std::string(trim(cols[0]))].emplace(rank, std::string(trim(cols[2]))).second) {
            throw ParseError(file, number, "duplicate rank " + std::to_string(rank));
        }
    }
    std::vector<RankedPrediction> preds;
    for (const auto& link : links.tests()) {
        auto it = rows.find(link.entity_id);
        if (it == rows.end()) throw DataError("no predictions for test entity " + link.entity_id);
        RankedPrediction p{link.entity_id, link.term_id, {}};
        for (auto& [rank, term] : it->second) p.predicted.push_back(term);
        preds.push_back(std::move(p));
        rows.erase(it);
    }
    if (!rows.empty()) throw DataError("predictions for entity " + rows.begin()->first + " which is not a test link");
    return preds;
}

// ---------------------------------------------------------------------------
// Pipeline

Dataset load_dataset(const RunConfig& cfg) {
    Dataset data{load_kg(cfg.data.entities, cfg.data.triples),
                 load_hierarchy(cfg.data.terms, cfg.data.pairs, cfg.depth), load_links(cfg.data.links, cfg.prompt.shots)};
    data.links.validate_against(data.kg, data.hierarchy);
    return data;
}

RankedList candidates_for(const Entity& e, const Dataset& data, const Bm25Index& index, const RunConfig& cfg,
                          bool* fell_back) {
    auto rl = index.retrieve(build_entity_query(e, data.kg, cfg.expansion), cfg.top_k, e.id);
    const bool empty = rl.empty();
    if (fell_back != nullptr) *fell_back = empty;
    return empty ? edit_distance_rank(e, data.hierarchy, cfg.top_k) : rl;
}

std::unique_ptr<Backend> make_backend(const RunConfig& cfg, const Dataset& data) {
    switch (cfg.backend) {
        case BackendKind::Echo: return std::make_unique<EchoBackend>();
        case BackendKind::Reverse: return std::make_unique<ReverseBackend>();
        case BackendKind::Oracle: {
            std::map<std::string, std::string> gold;
            for (const auto& l : data.links.links()) {
                gold[display_name(data.kg.entity(l.entity_id).name)] = display_name(data.hierarchy.term(l.term_id).name);
            }
            return std::make_unique<OracleBackend>(std::move(gold));
        }
        case BackendKind::Live: {
            auto live = cfg.live;
            live.model = cfg.model;
            if (const char* key = std::getenv(cfg.api_key_env.c_str())) live.api_key = key;
            return std::make_unique<LiveBackend>(std::move(live));
        }
    }
    throw ConfigError("unsupported backend");
}

RunResult run(const RunConfig& cfg, Backend* backend) {
    cfg.validate();
    const auto data = load_dataset(cfg);
    const auto index = Bm25Index::build(data.hierarchy, cfg.expansion, cfg.bm25);

    std::vector<Demonstration> demos;
    for (const auto& link : data.links.demonstrations()) {
        const auto& e = data.kg.entity(link.entity_id);
        demos.push_back(build_demonstration(e.name, link.term_id, candidates_for(e, data, index, cfg), data.hierarchy));
    }

    std::unique_ptr<Backend> owned;
    if (backend == nullptr) {
        owned = make_backend(cfg, data);
        backend = owned.get();
    }
    CountingBackend counter(*backend);
    ResponseCache cache(cfg.run_dir / "cache");

    const auto tests = data.links.tests();
    if (tests.empty()) throw DataError("no test links to evaluate");
    RunResult result;
    result.predictions.resize(tests.size());
    result.retrieved.resize(tests.size());
    std::vector<std::string> errors(tests.size());
    std::atomic<bool> backend_failed{false};
    std::atomic<std::size_t> fallbacks{0};
    std::atomic<std::size_t> next{0};

    auto work = [&] {
        for (auto i = next++; i < tests.size(); i = next++) {
            const auto& link = tests[i];
            try {
                const auto& e = data.kg.entity(link.entity_id);
                bool fell_back = false;
                auto candidates = candidates_for(e, data, index, cfg, &fell_back);
                if (fell_back) ++fallbacks;
                const auto prompt = assemble_prompt(cfg.prompt, demos, e.name, candidates, data.hierarchy);
                const CompletionRequest req{prompt.text, cfg.max_output_tokens, cfg.temperature, cfg.model};
                const auto completion = cached_complete(cache, counter, req);
                const auto stem = file_stem_for(link.entity_id);
                write_file_atomic(cfg.run_dir / "prompts" / (stem + ".txt"), prompt.text);
                write_file_atomic(cfg.run_dir / "completions" / (stem + ".txt"), completion);

                auto parsed = parse_response(completion, prompt.candidate_ids, data.hierarchy);
                RankedPrediction pred{link.entity_id, link.term_id, std::move(parsed.ordered)};
                pred.predicted.insert(pred.predicted.end(), prompt.dropped_ids.begin(), prompt.dropped_ids.end());
                result.predictions[i] = std::move(pred);
                result.retrieved[i] = std::move(candidates);
            } catch (const BackendError& ex) {
                backend_failed = true;
                errors[i] = ex.what();
            } catch (const std::exception& ex) {
                errors[i] = ex.what();
            }
        }
    };
    {
        std::vector<std::jthread> pool;
        const auto n = std::min(cfg.workers, std::max<std::size_t>(1, tests.size()));
        for (std::size_t w = 0; w < n; ++w) pool.emplace_back(work);
    }

    std::string log;
    std::size_t failed = 0;
    for (std::size_t i = 0; i < tests.size(); ++i) {
        if (errors[i].empty()) continue;
        ++failed;
        log += tests[i].entity_id + "\t" + errors[i] + "\n";
    }
    if (failed > 0) {
        write_file_atomic(cfg.run_dir / "errors.log", log);
        throw RunError(std::to_string(failed) + " of " + std::to_string(tests.size()) + " queries failed; see " +
                           (cfg.run_dir / "errors.log").string(),
                       backend_failed.load());
    }
    result.report = evaluate(result.predictions, data.hierarchy, cfg.gain);
    result.backend_calls = counter.calls();
    result.fallbacks = fallbacks.load();
    write_file_atomic(cfg.run_dir / "predictions.tsv", format_predictions(result.predictions));
    write_file_atomic(cfg.run_dir / "report.txt", result.report.to_text());
    write_file_atomic(cfg.run_dir / "report.kv", result.report.to_kv());
    return result;
}

BaselineResult baseline(const RunConfig& cfg, BaselineKind which) {
    cfg.validate();
    const auto data = load_dataset(cfg);
    std::optional<Bm25Index> index;
    if (which == BaselineKind::Bm25) index = Bm25Index::build(data.hierarchy, cfg.expansion, cfg.bm25);

    BaselineResult out;
    for (const auto& link : data.links.tests()) {
        const auto& e = data.kg.entity(link.entity_id);
        const auto rl = which == BaselineKind::Bm25 ? candidates_for(e, data, *index, cfg)
                                                    : edit_distance_rank(e, data.hierarchy, cfg.top_k);
        out.predictions.push_back({link.entity_id, link.term_id, rl.term_ids()});
    }
    if (out.predictions.empty()) throw DataError("no test links to evaluate");
    out.report = evaluate(out.predictions, data.hierarchy, cfg.gain);
    return out;
}

}  // namespace hiprompt
