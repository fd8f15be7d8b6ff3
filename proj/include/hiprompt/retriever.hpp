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
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "hiprompt/kb_model.hpp"

namespace hiprompt {

/// Which extra text enriches queries and documents beyond the bare name.
struct ExpansionConfig {
    bool use_attributes = false;  // synonyms + definition
    bool use_structure = false;   // KG neighbor names / hierarchy parent and child names

    /// Accepts "name", "atr", "str" or "atr+str".
    static ExpansionConfig parse(std::string_view label);
    std::string label() const;

    bool operator==(const ExpansionConfig&) const = default;
};

inline constexpr std::size_t kMaxNeighborNames = 32;

std::vector<std::string> build_term_document(const Term& term, const Hierarchy& h, const ExpansionConfig& cfg);
std::vector<std::string> build_entity_query(const Entity& entity, const KnowledgeGraph& kg,
                                            const ExpansionConfig& cfg);

struct ScoredTerm {
    std::string term_id;
    double score = 0.0;

    bool operator==(const ScoredTerm&) const = default;
};

/// Coarse candidate list for one entity; scores are non-increasing.
struct RankedList {
    std::string entity_id;
    std::vector<ScoredTerm> items;
    std::size_t k = 0;

    bool empty() const noexcept { return items.empty(); }
    std::size_t size() const noexcept { return items.size(); }
    std::vector<std::string> term_ids() const;
    bool operator==(const RankedList&) const = default;
};

struct Bm25Params {
    double k1 = 1.2;
    double b = 0.75;
};

/// Okapi BM25 inverted index. Documents are identified by their position in
/// `doc_ids()`, which is ascending id order.
class Bm25Index {
  public:
    struct Posting {
        std::size_t doc;
        std::size_t tf;
    };

    /// One document per hierarchy term (the virtual root is not a document).
    static Bm25Index build(const Hierarchy& h, const ExpansionConfig& cfg, Bm25Params params = {});
    /// Index arbitrary pre-tokenized documents; ids need not be sorted.
    static Bm25Index from_documents(std::vector<std::pair<std::string, std::vector<std::string>>> docs,
                                    Bm25Params params = {});

    std::size_t doc_count() const noexcept { return doc_ids_.size(); }
    double avg_doc_length() const noexcept { return avg_doc_length_; }
    const Bm25Params& params() const noexcept { return params_; }
    const std::vector<std::string>& doc_ids() const noexcept { return doc_ids_; }
    std::size_t doc_length(std::string_view doc_id) const;
    std::size_t doc_frequency(std::string_view token) const;
    std::size_t term_frequency(std::string_view token, std::string_view doc_id) const;

    double idf(std::string_view token) const;
    /// Sum over query tokens (duplicates count each time) of idf * saturated tf.
    double score(const std::vector<std::string>& query, std::string_view doc_id) const;

    /// Top-k documents by score, ties by ascending id; zero-score documents are excluded.
    RankedList retrieve(const std::vector<std::string>& query, std::size_t k, std::string entity_id = {}) const;

  private:
    std::size_t doc_index(std::string_view doc_id) const;
    double token_score(std::size_t tf, std::size_t doc_length, double idf) const;

    Bm25Params params_;
    std::vector<std::string> doc_ids_;
    std::map<std::string, std::size_t, std::less<>> doc_lookup_;
    std::vector<std::size_t> doc_lengths_;
    double avg_doc_length_ = 0.0;
    std::unordered_map<std::string, std::vector<Posting>> postings_;
};

}  // namespace hiprompt
