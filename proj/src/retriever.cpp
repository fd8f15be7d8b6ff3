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

#include "hiprompt/retriever.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hiprompt/text.hpp"

namespace hiprompt {

namespace {

void append_tokens(std::vector<std::string>& out, std::string_view text) {
    for (auto& tok : tokenize(text)) out.push_back(std::move(tok));
}

}  // namespace

ExpansionConfig ExpansionConfig::parse(std::string_view label) {
    if (label == "name") return {false, false};
    if (label == "atr") return {true, false};
    if (label == "str") return {false, true};
    if (label == "atr+str") return {true, true};
    throw std::invalid_argument("unknown expansion \"" + std::string(label) + "\" (expected name|atr|str|atr+str)");
}

std::string ExpansionConfig::label() const {
    if (use_attributes && use_structure) return "atr+str";
    if (use_attributes) return "atr";
    if (use_structure) return "str";
    return "name";
}

std::vector<std::string> build_term_document(const Term& term, const Hierarchy& h, const ExpansionConfig& cfg) {
    std::vector<std::string> doc;
    append_tokens(doc, term.name);
    if (cfg.use_attributes) {
        for (const auto& s : term.synonyms) append_tokens(doc, s);
        if (term.definition) append_tokens(doc, *term.definition);
    }
    if (cfg.use_structure) {
        for (const auto& p : h.parents(term.id)) append_tokens(doc, h.term(p).name);
        for (const auto& c : h.children(term.id)) append_tokens(doc, h.term(c).name);
    }
    return doc;
}

std::vector<std::string> build_entity_query(const Entity& entity, const KnowledgeGraph& kg,
                                            const ExpansionConfig& cfg) {
    std::vector<std::string> query;
    append_tokens(query, entity.name);
    if (cfg.use_attributes) {
        for (const auto& s : entity.synonyms) append_tokens(query, s);
        if (entity.definition) append_tokens(query, *entity.definition);
    }
    if (cfg.use_structure) {
        auto neighbors = kg.neighbors(entity.id);
        const auto n = std::min(neighbors.size(), kMaxNeighborNames);
        for (std::size_t i = 0; i < n; ++i) append_tokens(query, kg.entity(neighbors[i]).name);
    }
    return query;
}

std::vector<std::string> RankedList::term_ids() const {
    std::vector<std::string> ids;
    ids.reserve(items.size());
    for (const auto& it : items) ids.push_back(it.term_id);
    return ids;
}

Bm25Index Bm25Index::build(const Hierarchy& h, const ExpansionConfig& cfg, Bm25Params params) {
    std::vector<std::pair<std::string, std::vector<std::string>>> docs;
    docs.reserve(h.size());
    for (const auto& t : h.terms()) docs.emplace_back(t.id, build_term_document(t, h, cfg));
    return from_documents(std::move(docs), params);
}

Bm25Index Bm25Index::from_documents(std::vector<std::pair<std::string, std::vector<std::string>>> docs,
                                    Bm25Params params) {
    if (!(params.k1 > 0.0)) throw std::invalid_argument("BM25 k1 must be positive");
    if (params.b < 0.0 || params.b > 1.0) throw std::invalid_argument("BM25 b must lie in [0, 1]");
    std::sort(docs.begin(), docs.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

    Bm25Index idx;
    idx.params_ = params;
    idx.doc_ids_.reserve(docs.size());
    idx.doc_lengths_.reserve(docs.size());
    for (std::size_t d = 0; d < docs.size(); ++d) {
        auto& [id, tokens] = docs[d];
        if (!idx.doc_lookup_.emplace(id, d).second) throw std::invalid_argument("duplicate document id " + id);
        idx.doc_ids_.push_back(id);
        idx.doc_lengths_.push_back(tokens.size());
        std::sort(tokens.begin(), tokens.end());
        for (std::size_t i = 0; i < tokens.size();) {
            std::size_t j = i;
            while (j < tokens.size() && tokens[j] == tokens[i]) ++j;
            idx.postings_[tokens[i]].push_back({d, j - i});
            i = j;
        }
    }
    const auto total = std::accumulate(idx.doc_lengths_.begin(), idx.doc_lengths_.end(), std::size_t{0});
    idx.avg_doc_length_ = docs.empty() ? 0.0 : static_cast<double>(total) / static_cast<double>(docs.size());
    return idx;
}

std::size_t Bm25Index::doc_index(std::string_view doc_id) const {
    auto it = doc_lookup_.find(doc_id);
    if (it == doc_lookup_.end()) throw UnknownIdError("document", std::string(doc_id));
    return it->second;
}

std::size_t Bm25Index::doc_length(std::string_view doc_id) const { return doc_lengths_[doc_index(doc_id)]; }

std::size_t Bm25Index::doc_frequency(std::string_view token) const {
    auto it = postings_.find(std::string(token));
    return it == postings_.end() ? 0 : it->second.size();
}

std::size_t Bm25Index::term_frequency(std::string_view token, std::string_view doc_id) const {
    const auto d = doc_index(doc_id);
    auto it = postings_.find(std::string(token));
    if (it == postings_.end()) return 0;
    auto pos = std::lower_bound(it->second.begin(), it->second.end(), d,
                                [](const Posting& p, std::size_t doc) { return p.doc < doc; });
    return (pos != it->second.end() && pos->doc == d) ? pos->tf : 0;
}

double Bm25Index::idf(std::string_view token) const {
    const auto n = static_cast<double>(doc_count());
    const auto df = static_cast<double>(doc_frequency(token));
    return std::log(1.0 + (n - df + 0.5) / (df + 0.5));
}

double Bm25Index::token_score(std::size_t tf, std::size_t doc_length, double idf) const {
    const double f = static_cast<double>(tf);
    const double norm = 1.0 - params_.b + params_.b * static_cast<double>(doc_length) / avg_doc_length_;
    return idf * f * (params_.k1 + 1.0) / (f + params_.k1 * norm);
}

double Bm25Index::score(const std::vector<std::string>& query, std::string_view doc_id) const {
    const auto d = doc_index(doc_id);
    double total = 0.0;
    for (const auto& q : query) {
        const auto tf = term_frequency(q, doc_id);
        if (tf == 0) continue;
        total += token_score(tf, doc_lengths_[d], idf(q));
    }
    return total;
}

RankedList Bm25Index::retrieve(const std::vector<std::string>& query, std::size_t k, std::string entity_id) const {
    if (k == 0) throw std::invalid_argument("retrieve requires k >= 1");
    RankedList out;
    out.entity_id = std::move(entity_id);
    out.k = k;

    // Accumulate in query order so each document's sum matches score() exactly.
    std::vector<double> scores(doc_count(), 0.0);
    std::vector<std::size_t> touched;
    for (const auto& q : query) {
        auto it = postings_.find(q);
        if (it == postings_.end()) continue;
        const double token_idf = idf(q);
        for (const auto& p : it->second) {
            if (scores[p.doc] == 0.0) touched.push_back(p.doc);
            scores[p.doc] += token_score(p.tf, doc_lengths_[p.doc], token_idf);
        }
    }
    std::sort(touched.begin(), touched.end());
    touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
    std::erase_if(touched, [&](std::size_t d) { return !(scores[d] > 0.0); });

    auto better = [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return a < b;
    };
    const auto n = std::min(k, touched.size());
    std::partial_sort(touched.begin(), touched.begin() + static_cast<std::ptrdiff_t>(n), touched.end(), better);
    out.items.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.items.push_back({doc_ids_[touched[i]], scores[touched[i]]});
    return out;
}

}  // namespace hiprompt
