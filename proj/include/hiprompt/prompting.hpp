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
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "hiprompt/kb_model.hpp"
#include "hiprompt/retriever.hpp"

namespace hiprompt {

inline constexpr std::string_view kDefaultTaskDescription =
    "You are given a query biomedical entity and a list of candidate terms from a disease hierarchy. "
    "Rank all candidates from the most specific correct term for the query to the least relevant. "
    "Output the ranked names separated by '; '.";

/// Candidate lists are never truncated below this many items.
inline constexpr std::size_t kMinPromptCandidates = 3;

struct PromptConfig {
    std::size_t shots = 0;
    bool hierarchy_context = true;
    std::string task_description{kDefaultTaskDescription};
    std::size_t token_budget = 3500;  // whitespace words
};

struct Demonstration {
    std::string query;
    std::vector<std::string> choices;
    std::vector<std::string> answer;
    bool pseudo = false;
};

struct Prompt {
    std::string text;
    std::vector<std::string> candidate_ids;  // the (possibly truncated) list shown in the test block
    std::vector<std::string> dropped_ids;    // tail removed to meet the token budget
};

struct ParsedRanking {
    std::vector<std::string> ordered;            // permutation of the candidate ids
    std::vector<std::string> unmatched_outputs;  // raw items that matched no candidate
    std::vector<std::string> appended;           // candidates the output never mentioned
};

class PromptBudgetError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Name as rendered in prompts: list separators and line breaks become spaces.
std::string display_name(std::string_view name);

/// Gold goes first in the answer; a gold term missing from the retrieved list
/// takes the last slot (or is appended when the list is shorter than k).
Demonstration build_demonstration(std::string_view query_name, std::string_view gold_term_id, const RankedList& rl,
                                  const Hierarchy& h);
Demonstration build_pseudo_demonstration();

/// "Contexts: {c isA p; ...}" with one clause per candidate per direct parent.
std::string build_context_string(std::span<const std::string> candidate_ids, const Hierarchy& h);
std::string build_context_string(const RankedList& candidates, const Hierarchy& h);

std::string render_demonstration(const Demonstration& demo);

/// Task description, demonstration blocks, then the test block ending in "Answer:".
/// Uses the pseudo demonstration when cfg.shots == 0, otherwise the first cfg.shots
/// entries of `real_demos`. Drops candidates from the tail to meet the token budget.
Prompt assemble_prompt(const PromptConfig& cfg, std::span<const Demonstration> real_demos,
                       std::string_view test_entity_name, const RankedList& candidates, const Hierarchy& h);

/// Maps a free-text completion onto a total order of `candidate_ids`.
ParsedRanking parse_response(std::string_view raw, std::span<const std::string> candidate_ids, const Hierarchy& h);
ParsedRanking parse_response(std::string_view raw, const RankedList& candidates, const Hierarchy& h);

}  // namespace hiprompt
