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

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "hiprompt/evaluation.hpp"
#include "hiprompt/kb_model.hpp"
#include "hiprompt/llm_client.hpp"
#include "hiprompt/prompting.hpp"
#include "hiprompt/retriever.hpp"
#include "hiprompt/synthetic.hpp"

namespace hiprompt {

/// Invalid configuration or command-line usage.
class ConfigError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

enum class BackendKind { Echo, Oracle, Reverse, Live };
BackendKind parse_backend_kind(std::string_view label);
std::string_view to_string(BackendKind kind);

struct RunConfig {
    DatasetFiles data;
    ExpansionConfig expansion{true, true};
    Bm25Params bm25;
    std::size_t top_k = 10;
    PromptConfig prompt;
    BackendKind backend = BackendKind::Echo;
    LiveBackendConfig live;  // endpoint and throttling; the key is read from `api_key_env`
    std::string api_key_env = "HIPROMPT_API_KEY";
    std::string model = "gpt-3";
    double temperature = 0.0;
    std::size_t max_output_tokens = 256;
    std::filesystem::path run_dir = "run";
    std::uint64_t seed = 0;
    std::size_t workers = 4;
    DepthConvention depth = DepthConvention::ShortestPath;
    GainConfig gain;

    /// Applies one `key=value` setting; unknown keys are a ConfigError.
    void set(std::string_view key, std::string_view value);
    /// Reads a flat key=value file ('#' starts a comment line).
    void load_file(const std::filesystem::path& file);
    /// Checks ranges and that all dataset paths exist.
    void validate() const;
};

struct Dataset {
    KnowledgeGraph kg;
    Hierarchy hierarchy;
    AlignmentSet links;
};

Dataset load_dataset(const RunConfig& cfg);

/// BM25 top-k for the entity, falling back to edit distance when BM25 finds nothing.
RankedList candidates_for(const Entity& e, const Dataset& data, const Bm25Index& index, const RunConfig& cfg,
                          bool* fell_back = nullptr);

struct RunResult {
    MetricReport report;
    std::vector<RankedPrediction> predictions;
    std::vector<RankedList> retrieved;  // per test link, same order as predictions
    std::size_t backend_calls = 0;
    std::size_t fallbacks = 0;
};

/// Raised when one or more queries failed; details are in <run_dir>/errors.log.
class RunError : public std::runtime_error {
  public:
    RunError(const std::string& message, bool backend_failure)
        : std::runtime_error(message), backend_failure_(backend_failure) {}
    bool backend_failure() const noexcept { return backend_failure_; }

  private:
    bool backend_failure_;
};

/// Full retrieve, prompt, complete, parse and evaluate loop. Writes prompts/,
/// completions/, predictions.tsv, report.txt and report.kv under cfg.run_dir.
/// `backend` overrides the configured backend when given.
RunResult run(const RunConfig& cfg, Backend* backend = nullptr);

std::unique_ptr<Backend> make_backend(const RunConfig& cfg, const Dataset& data);

enum class BaselineKind { EditDistance, Bm25 };
BaselineKind parse_baseline_kind(std::string_view label);

struct BaselineResult {
    MetricReport report;
    std::vector<RankedPrediction> predictions;
};
BaselineResult baseline(const RunConfig& cfg, BaselineKind which);

/// Tab-separated entity_id, rank, term_id.
std::string format_predictions(const std::vector<RankedPrediction>& preds);
/// Groups rows by entity and attaches gold terms from the test links. Every test
/// link needs predictions and every predicted entity needs a test link.
std::vector<RankedPrediction> read_predictions(const std::filesystem::path& file, const AlignmentSet& links);

/// Writes through a temporary file and rename so readers never see partial content.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);
/// Maps an id onto a safe file name ([A-Za-z0-9._-] kept, everything else %XX).
std::string file_stem_for(std::string_view id);

}  // namespace hiprompt
