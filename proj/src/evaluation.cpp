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

#include "hiprompt/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <set>
#include <sstream>
#include <stdexcept>

#include "hiprompt/text.hpp"

namespace hiprompt {

namespace {

void require_non_empty(std::span<const RankedPrediction> preds) {
    if (preds.empty()) throw std::invalid_argument("metric needs at least one prediction");
}

std::size_t gold_rank(const RankedPrediction& p) {
    auto it = std::find(p.predicted.begin(), p.predicted.end(), p.gold_term_id);
    return it == p.predicted.end() ? 0 : static_cast<std::size_t>(it - p.predicted.begin()) + 1;
}

double query_ndcg(const RankedPrediction& p, const Hierarchy& h, std::size_t k, const GainConfig& cfg) {
    std::vector<double> gains;
    gains.reserve(p.predicted.size());
    for (const auto& t : p.predicted) gains.push_back(relevance_gain(h, t, p.gold_term_id, cfg));
    const auto n = std::min(k, gains.size());
    double dcg = 0.0;
    for (std::size_t i = 0; i < n; ++i) dcg += gains[i] / std::log2(static_cast<double>(i) + 2.0);
    std::sort(gains.begin(), gains.end(), std::greater<>());
    double idcg = 0.0;
    for (std::size_t i = 0; i < n; ++i) idcg += gains[i] / std::log2(static_cast<double>(i) + 2.0);
    return idcg > 0.0 ? dcg / idcg : 0.0;
}

/// Shortest upward distance from `start` to each of its ancestors (itself at 0).
std::vector<std::size_t> upward_distances(const Hierarchy& h, std::size_t start) {
    std::vector<std::size_t> dist(h.size() + 1, SIZE_MAX);
    std::deque<std::size_t> queue{start};
    dist[start] = 0;
    while (!queue.empty()) {
        const auto u = queue.front();
        queue.pop_front();
        if (u == h.root_index()) continue;
        for (auto p : h.parent_indices(u)) {
            if (dist[p] == SIZE_MAX) {
                dist[p] = dist[u] + 1;
                queue.push_back(p);
            }
        }
    }
    return dist;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

}  // namespace

double hits_at_k(std::span<const RankedPrediction> preds, std::size_t k) {
    require_non_empty(preds);
    if (k == 0) throw std::invalid_argument("hits@k needs k >= 1");
    std::size_t hits = 0;
    for (const auto& p : preds) {
        const auto r = gold_rank(p);
        if (r != 0 && r <= k) ++hits;
    }
    return 100.0 * static_cast<double>(hits) / static_cast<double>(preds.size());
}

double mrr(std::span<const RankedPrediction> preds) {
    require_non_empty(preds);
    double sum = 0.0;
    for (const auto& p : preds) {
        const auto r = gold_rank(p);
        if (r != 0) sum += 1.0 / static_cast<double>(r);
    }
    return 100.0 * sum / static_cast<double>(preds.size());
}

std::optional<std::size_t> undirected_distance(const Hierarchy& h, std::string_view a, std::string_view b,
                                               std::size_t max_distance) {
    const auto from = h.index_of(a);
    const auto to = h.index_of(b);
    if (from == to) return 0;
    const auto root = h.root_index();
    if (from == root || to == root) return std::nullopt;

    // Bounded BFS; the virtual root is not an edge endpoint.
    std::vector<std::size_t> dist(h.size() + 1, SIZE_MAX);
    std::deque<std::size_t> queue{from};
    dist[from] = 0;
    while (!queue.empty()) {
        const auto u = queue.front();
        queue.pop_front();
        if (dist[u] == max_distance) continue;
        auto visit = [&](std::size_t v) -> bool {
            if (v == root || dist[v] != SIZE_MAX) return false;
            dist[v] = dist[u] + 1;
            if (v == to) return true;
            queue.push_back(v);
            return false;
        };
        for (auto v : h.parent_indices(u)) {
            if (visit(v)) return dist[v];
        }
        for (auto v : h.child_indices(u)) {
            if (visit(v)) return dist[v];
        }
    }
    return std::nullopt;
}

double relevance_gain(const Hierarchy& h, std::string_view predicted, std::string_view gold, const GainConfig& cfg) {
    if (!h.contains(predicted)) throw UnknownIdError("term", std::string(predicted));
    if (!h.contains(gold)) throw UnknownIdError("term", std::string(gold));
    const auto d = undirected_distance(h, predicted, gold, cfg.cutoff);
    if (!d) return 0.0;
    return std::pow(cfg.base, -static_cast<double>(*d));
}

double ndcg_at_k(std::span<const RankedPrediction> preds, const Hierarchy& h, std::size_t k, const GainConfig& cfg) {
    require_non_empty(preds);
    if (k == 0) throw std::invalid_argument("nDCG@k needs k >= 1");
    double sum = 0.0;
    for (const auto& p : preds) sum += query_ndcg(p, h, k, cfg);
    return 100.0 * sum / static_cast<double>(preds.size());
}

double wup(const Hierarchy& h, std::string_view a, std::string_view b) {
    if (!h.contains(a)) throw UnknownIdError("term", std::string(a));
    if (!h.contains(b)) throw UnknownIdError("term", std::string(b));
    const auto ia = h.index_of(a);
    const auto ib = h.index_of(b);
    if (ia == ib) return 1.0;
    const auto da = upward_distances(h, ia);
    const auto db = upward_distances(h, ib);
    double best = 0.0;
    for (std::size_t c = 0; c < da.size(); ++c) {
        if (da[c] == SIZE_MAX || db[c] == SIZE_MAX) continue;
        const double depth = static_cast<double>(h.depth_at(c));
        if (depth == 0.0) continue;
        const double score = 2.0 * depth / (static_cast<double>(da[c] + db[c]) + 2.0 * depth);
        best = std::max(best, score);
    }
    return best;
}

double wup_top1(std::span<const RankedPrediction> preds, const Hierarchy& h) {
    require_non_empty(preds);
    double sum = 0.0;
    for (const auto& p : preds) {
        if (p.predicted.empty()) throw std::invalid_argument("empty prediction list for " + p.entity_id);
        sum += wup(h, p.predicted.front(), p.gold_term_id);
    }
    return 100.0 * sum / static_cast<double>(preds.size());
}

std::size_t edit_distance(std::string_view a, std::string_view b) {
    const auto s = utf8_decode(a);
    const auto t = utf8_decode(b);
    std::vector<std::size_t> prev(t.size() + 1);
    std::vector<std::size_t> cur(t.size() + 1);
    for (std::size_t j = 0; j <= t.size(); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= s.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= t.size(); ++j) {
            const std::size_t sub = prev[j - 1] + (s[i - 1] == t[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[t.size()];
}

RankedList edit_distance_rank(const Entity& e, const Hierarchy& h, std::size_t k) {
    if (k == 0) throw std::invalid_argument("edit_distance_rank needs k >= 1");
    const auto query = casefold(e.name);
    std::vector<std::pair<std::size_t, std::size_t>> scored;  // (distance, term index)
    scored.reserve(h.size());
    for (std::size_t i = 0; i < h.size(); ++i) scored.emplace_back(edit_distance(query, casefold(h.terms()[i].name)), i);
    const auto n = std::min(k, scored.size());
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(n), scored.end());
    RankedList out;
    out.entity_id = e.id;
    out.k = k;
    for (std::size_t i = 0; i < n; ++i) {
        out.items.push_back({h.terms()[scored[i].second].id, -static_cast<double>(scored[i].first)});
    }
    return out;
}

MetricReport evaluate(std::span<const RankedPrediction> preds, const Hierarchy& h, const GainConfig& cfg) {
    require_non_empty(preds);
    for (const auto& p : preds) {
        if (p.predicted.empty()) throw DataError("empty prediction list for entity " + p.entity_id);
        std::set<std::string_view> seen;
        for (const auto& t : p.predicted) {
            if (!seen.insert(t).second) throw DataError("duplicate predicted term " + t + " for entity " + p.entity_id);
        }
    }
    MetricReport r;
    r.queries = preds.size();
    for (auto k : kReportHits) r.hits[k] = hits_at_k(preds, k);
    r.mrr = mrr(preds);
    for (auto k : kReportNdcg) r.ndcg[k] = ndcg_at_k(preds, h, k, cfg);
    r.wup = wup_top1(preds, h);
    for (const auto& p : preds) {
        r.per_query.push_back({p.entity_id, p.gold_term_id, p.predicted.front(), gold_rank(p),
                               wup(h, p.predicted.front(), p.gold_term_id), query_ndcg(p, h, 3, cfg)});
    }
    return r;
}

std::string MetricReport::to_kv() const {
    std::ostringstream out;
    out << "queries=" << queries << '\n';
    for (const auto& [k, v] : hits) out << "hits@" << k << '=' << fmt(v) << '\n';
    out << "mrr=" << fmt(mrr) << '\n';
    for (const auto& [k, v] : ndcg) out << "ndcg@" << k << '=' << fmt(v) << '\n';
    out << "wup=" << fmt(wup) << '\n';
    return out.str();
}

std::string MetricReport::to_text() const {
    std::vector<std::pair<std::string, std::string>> rows;
    rows.emplace_back("Queries", std::to_string(queries));
    for (const auto& [k, v] : hits) rows.emplace_back("Hits@" + std::to_string(k), fmt(v));
    rows.emplace_back("MRR", fmt(mrr));
    for (const auto& [k, v] : ndcg) rows.emplace_back("nDCG@" + std::to_string(k), fmt(v));
    rows.emplace_back("WuP", fmt(wup));

    std::ostringstream out;
    for (const auto& [label, value] : rows) {
        out << label << std::string(10 - label.size(), ' ') << std::string(12 - std::min<std::size_t>(12, value.size()), ' ')
            << value << '\n';
    }

    std::vector<std::vector<std::string>> table{{"entity_id", "gold", "top1", "gold_rank", "wup", "ndcg@3"}};
    for (const auto& q : per_query) {
        table.push_back({q.entity_id, q.gold_term_id, q.top1, q.gold_rank == 0 ? "-" : std::to_string(q.gold_rank),
                         fmt(q.wup), fmt(q.ndcg3)});
    }
    std::vector<std::size_t> width(table.front().size(), 0);
    for (const auto& row : table) {
        for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
    }
    out << '\n';
    for (const auto& row : table) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            out << row[c];
            if (c + 1 < row.size()) out << std::string(width[c] - row[c].size() + 2, ' ');
        }
        out << '\n';
    }
    return out.str();
}

}  // namespace hiprompt
