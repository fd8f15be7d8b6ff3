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

#include "hiprompt/prompting.hpp"

#include <algorithm>
#include <set>

#include "hiprompt/text.hpp"

namespace hiprompt {

namespace {

std::string join_names(const std::vector<std::string>& names) {
    std::string out;
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (i > 0) out += "; ";
        out += names[i];
    }
    return out;
}

std::vector<std::string> names_of(std::span<const std::string> ids, const Hierarchy& h) {
    std::vector<std::string> names;
    names.reserve(ids.size());
    for (const auto& id : ids) names.push_back(display_name(h.term(id).name));
    return names;
}

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
    if (a.empty() && b.empty()) return 0.0;
    std::size_t common = 0;
    for (const auto& t : a) common += b.count(t);
    return static_cast<double>(common) / static_cast<double>(a.size() + b.size() - common);
}

std::set<std::string> token_set(std::string_view text) {
    auto tokens = tokenize(text);
    return {tokens.begin(), tokens.end()};
}

}  // namespace

std::string display_name(std::string_view name) {
    std::string out(name);
    std::replace_if(out.begin(), out.end(), [](char c) { return c == ';' || c == '\n' || c == '\r'; }, ' ');
    return std::string(trim(out));
}

Demonstration build_demonstration(std::string_view query_name, std::string_view gold_term_id, const RankedList& rl,
                                  const Hierarchy& h) {
    if (rl.empty()) throw std::invalid_argument("demonstration needs a non-empty candidate list");
    auto ids = rl.term_ids();
    auto gold = std::find(ids.begin(), ids.end(), gold_term_id);
    if (gold == ids.end()) {
        if (rl.k > 0 && ids.size() >= rl.k) {
            ids.back() = std::string(gold_term_id);
        } else {
            ids.emplace_back(gold_term_id);
        }
    }
    Demonstration demo;
    demo.query = display_name(query_name);
    demo.choices = names_of(ids, h);
    demo.answer.push_back(display_name(h.term(gold_term_id).name));
    for (const auto& id : ids) {
        if (id != gold_term_id) demo.answer.push_back(display_name(h.term(id).name));
    }
    return demo;
}

Demonstration build_pseudo_demonstration() {
    return {"golden retriever", {"dog", "cat", "bird"}, {"dog", "cat", "bird"}, true};
}

std::string build_context_string(std::span<const std::string> candidate_ids, const Hierarchy& h) {
    std::vector<std::string> clauses;
    for (const auto& id : candidate_ids) {
        const auto name = display_name(h.term(id).name);
        for (const auto& p : h.parents(id)) clauses.push_back(name + " isA " + display_name(h.term(p).name));
    }
    return "Contexts: {" + join_names(clauses) + "}";
}

std::string build_context_string(const RankedList& candidates, const Hierarchy& h) {
    const auto ids = candidates.term_ids();
    return build_context_string(std::span<const std::string>(ids), h);
}

std::string render_demonstration(const Demonstration& demo) {
    return "Query: " + demo.query + "\nChoices: " + join_names(demo.choices) + "\nAnswer: " + join_names(demo.answer);
}

Prompt assemble_prompt(const PromptConfig& cfg, std::span<const Demonstration> real_demos,
                       std::string_view test_entity_name, const RankedList& candidates, const Hierarchy& h) {
    if (candidates.empty()) throw std::invalid_argument("prompt needs at least one candidate");
    if (cfg.shots > real_demos.size()) {
        throw std::invalid_argument("prompt asks for " + std::to_string(cfg.shots) + " demonstrations but only " +
                                    std::to_string(real_demos.size()) + " are available");
    }

    std::string head = cfg.task_description + "\n\n";
    if (cfg.shots == 0) {
        head += render_demonstration(build_pseudo_demonstration()) + "\n\n";
    } else {
        for (std::size_t i = 0; i < cfg.shots; ++i) head += render_demonstration(real_demos[i]) + "\n\n";
    }

    const auto ids = candidates.term_ids();
    const auto query_line = "Query: " + display_name(test_entity_name) + "\n";
    auto render = [&](std::size_t n) {
        std::span<const std::string> shown(ids.data(), n);
        std::string text = head + query_line + "Choices: " + join_names(names_of(shown, h)) + "\n";
        if (cfg.hierarchy_context) text += build_context_string(shown, h) + "\n";
        return text + "Answer:";
    };

    std::size_t n = ids.size();
    std::string text = render(n);
    while (word_count(text) > cfg.token_budget && n > kMinPromptCandidates) {
        text = render(--n);
    }
    if (word_count(text) > cfg.token_budget) {
        throw PromptBudgetError("prompt needs " + std::to_string(word_count(text)) + " words with " +
                                std::to_string(n) + " candidates; budget is " + std::to_string(cfg.token_budget));
    }
    Prompt prompt;
    prompt.text = std::move(text);
    prompt.candidate_ids.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n));
    prompt.dropped_ids.assign(ids.begin() + static_cast<std::ptrdiff_t>(n), ids.end());
    return prompt;
}

ParsedRanking parse_response(std::string_view raw, std::span<const std::string> candidate_ids, const Hierarchy& h) {
    constexpr std::string_view marker = "Answer:";
    if (auto pos = raw.rfind(marker); pos != std::string_view::npos) raw.remove_prefix(pos + marker.size());

    struct Candidate {
        std::string folded_name;
        std::vector<std::string> folded_synonyms;
        std::set<std::string> tokens;
    };
    std::vector<Candidate> cands;
    cands.reserve(candidate_ids.size());
    for (const auto& id : candidate_ids) {
        const auto& term = h.term(id);
        Candidate c{casefold(display_name(term.name)), {}, token_set(term.name)};
        for (const auto& s : term.synonyms) c.folded_synonyms.push_back(casefold(display_name(s)));
        cands.push_back(std::move(c));
    }

    std::vector<bool> used(cands.size(), false);

    // Exact matches prefer a not-yet-used candidate so that repeated names map onto distinct ids.
    auto first_exact = [&](auto&& pred) -> std::ptrdiff_t {
        std::ptrdiff_t any = -1;
        for (std::size_t i = 0; i < cands.size(); ++i) {
            if (!pred(cands[i])) continue;
            if (!used[i]) return static_cast<std::ptrdiff_t>(i);
            if (any < 0) any = static_cast<std::ptrdiff_t>(i);
        }
        return any;
    };
    auto match = [&](std::string_view item) -> std::ptrdiff_t {
        const auto folded = casefold(item);
        if (auto i = first_exact([&](const Candidate& c) { return c.folded_name == folded; }); i >= 0) return i;
        auto by_synonym = first_exact([&](const Candidate& c) {
            return std::find(c.folded_synonyms.begin(), c.folded_synonyms.end(), folded) != c.folded_synonyms.end();
        });
        if (by_synonym >= 0) return by_synonym;
        const auto tokens = token_set(item);
        std::ptrdiff_t best = -1;
        double best_score = 0.0;
        for (std::size_t i = 0; i < cands.size(); ++i) {
            const double s = jaccard(tokens, cands[i].tokens);
            if (s >= 0.5 && s > best_score) {
                best = static_cast<std::ptrdiff_t>(i);
                best_score = s;
            }
        }
        return best;
    };

    ParsedRanking out;
    std::string normalized(raw);
    std::replace(normalized.begin(), normalized.end(), '\n', ';');
    for (const auto& piece : split(normalized, ';')) {
        const auto item = trim(piece);
        if (item.empty()) continue;
        const auto idx = match(item);
        if (idx < 0) {
            out.unmatched_outputs.emplace_back(item);
            continue;
        }
        if (used[static_cast<std::size_t>(idx)]) continue;
        used[static_cast<std::size_t>(idx)] = true;
        out.ordered.push_back(candidate_ids[static_cast<std::size_t>(idx)]);
    }
    for (std::size_t i = 0; i < cands.size(); ++i) {
        if (used[i]) continue;
        out.ordered.push_back(candidate_ids[i]);
        out.appended.push_back(candidate_ids[i]);
    }
    return out;
}

ParsedRanking parse_response(std::string_view raw, const RankedList& candidates, const Hierarchy& h) {
    const auto ids = candidates.term_ids();
    return parse_response(raw, std::span<const std::string>(ids), h);
}

}  // namespace hiprompt
