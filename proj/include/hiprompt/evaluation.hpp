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
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hiprompt/kb_model.hpp"
#include "hiprompt/retriever.hpp"

namespace hiprompt {

struct RankedPrediction {
    std::string entity_id;
    std::string gold_term_id;
    std::vector<std::string> predicted;  // best first, non-empty, no duplicates

    bool operator==(const RankedPrediction&) const = default;
};

/// Graded relevance decays as base^-d with the undirected hierarchy distance d.
struct GainConfig {
    double base = 2.0;
    std::size_t cutoff = 5;  // distances beyond this earn nothing
};

inline constexpr std::size_t kReportHits[] = {1, 3, 5, 10, 20};
inline constexpr std::size_t kReportNdcg[] = {1, 3};

struct QueryBreakdown {
    std::string entity_id;
    std::string gold_term_id;
    std::string top1;
    std::size_t gold_rank = 0;  // 0 when gold is absent
    double wup = 0.0;
    double ndcg3 = 0.0;
};

/// All aggregate values are percentages.
struct MetricReport {
    std::size_t queries = 0;
    std::map<std::size_t, double> hits;
    double mrr = 0.0;
    std::map<std::size_t, double> ndcg;
    double wup = 0.0;
    std::vector<QueryBreakdown> per_query;

    std::string to_text() const;
    std::string to_kv() const;
};

double hits_at_k(std::span<const RankedPrediction> preds, std::size_t k);
double mrr(std::span<const RankedPrediction> preds);

/// Shortest path length between two terms ignoring edge direction and the virtual
/// root; nullopt when longer than `max_distance` or disconnected.
std::optional<std::size_t> undirected_distance(const Hierarchy& h, std::string_view a, std::string_view b,
                                               std::size_t max_distance);
double relevance_gain(const Hierarchy& h, std::string_view predicted, std::string_view gold,
                      const GainConfig& cfg = {});
double ndcg_at_k(std::span<const RankedPrediction> preds, const Hierarchy& h, std::size_t k,
                 const GainConfig& cfg = {});

/// Wu-Palmer relatedness on the DAG. For each common ancestor c (either term
/// itself included), 2*depth(c) / (dist(a,c) + dist(b,c) + 2*depth(c)) with
/// shortest upward distances; the best c wins. On trees this is the classic
/// 2*depth(lcs) / (depth(a) + depth(b)).
double wup(const Hierarchy& h, std::string_view a, std::string_view b);
double wup_top1(std::span<const RankedPrediction> preds, const Hierarchy& h);

/// Levenshtein distance with unit costs over code points.
std::size_t edit_distance(std::string_view a, std::string_view b);
/// Terms by ascending edit distance between case-folded names, ties by id. Score is -distance.
RankedList edit_distance_rank(const Entity& e, const Hierarchy& h, std::size_t k);

MetricReport evaluate(std::span<const RankedPrediction> preds, const Hierarchy& h, const GainConfig& cfg = {});

}  // namespace hiprompt
