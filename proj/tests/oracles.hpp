#pragma once

// Brute-force reference implementations used only by tests. They work on raw
// edge lists and token vectors and share no code with the library paths they check.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hiprompt/kb_model.hpp"

namespace oracle {

constexpr std::size_t kInf = std::numeric_limits<std::size_t>::max() / 4;

/// DAG over nodes 0..n-1; edges are (hypernym, hyponym).
struct TinyDag {
    std::size_t n = 0;
    std::vector<std::pair<std::size_t, std::size_t>> edges;

    static std::string id(std::size_t i) { return "n" + std::to_string(i); }

    hiprompt::Hierarchy to_hierarchy() const {
        std::vector<hiprompt::Term> terms;
        for (std::size_t i = 0; i < n; ++i) terms.push_back({id(i), "term " + std::to_string(i), {}, std::nullopt});
        std::vector<hiprompt::TermPair> pairs;
        for (auto [p, c] : edges) pairs.emplace_back(id(p), id(c));
        return hiprompt::Hierarchy::build(std::move(terms), std::move(pairs));
    }

    std::vector<std::size_t> parents(std::size_t v) const {
        std::vector<std::size_t> out;
        for (auto [p, c] : edges) {
            if (c == v) out.push_back(p);
        }
        return out;
    }
};

/// Every DAG whose edges respect the node order 0 < 1 < ... < n-1, encoded by a bitmask over
/// the forward pairs. Each DAG shape on n nodes has such a topological labelling.
inline std::vector<TinyDag> all_forward_dags(std::size_t n) {
    std::vector<std::pair<std::size_t, std::size_t>> slots;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) slots.emplace_back(i, j);
    }
    std::vector<TinyDag> out;
    for (std::size_t mask = 0; mask < (std::size_t{1} << slots.size()); ++mask) {
        TinyDag d{n, {}};
        for (std::size_t s = 0; s < slots.size(); ++s) {
            if (mask & (std::size_t{1} << s)) d.edges.push_back(slots[s]);
        }
        out.push_back(std::move(d));
    }
    return out;
}

/// Random DAG: random forward edges, then a random relabelling of the nodes.
inline TinyDag random_dag(std::mt19937_64& rng, std::size_t n, double edge_probability) {
    std::vector<std::size_t> label(n);
    for (std::size_t i = 0; i < n; ++i) label[i] = i;
    std::shuffle(label.begin(), label.end(), rng);
    std::bernoulli_distribution coin(edge_probability);
    TinyDag d{n, {}};
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (coin(rng)) d.edges.emplace_back(label[i], label[j]);
        }
    }
    return d;
}

/// Transitive hypernyms by exhaustive DFS over the edge list.
inline std::set<std::size_t> ancestors(const TinyDag& d, std::size_t v) {
    std::set<std::size_t> out;
    std::vector<std::size_t> stack{v};
    while (!stack.empty()) {
        auto u = stack.back();
        stack.pop_back();
        for (auto p : d.parents(u)) {
            if (out.insert(p).second) stack.push_back(p);
        }
    }
    return out;
}

/// Lengths of every upward path from v to the virtual root (edge count, root edge included).
inline void root_path_lengths(const TinyDag& d, std::size_t v, std::size_t so_far, std::vector<std::size_t>& out) {
    const auto ps = d.parents(v);
    if (ps.empty()) {
        out.push_back(so_far + 1);
        return;
    }
    for (auto p : ps) root_path_lengths(d, p, so_far + 1, out);
}

inline std::size_t depth_shortest(const TinyDag& d, std::size_t v) {
    std::vector<std::size_t> lengths;
    root_path_lengths(d, v, 0, lengths);
    return *std::min_element(lengths.begin(), lengths.end());
}

inline std::size_t depth_longest(const TinyDag& d, std::size_t v) {
    std::vector<std::size_t> lengths;
    root_path_lengths(d, v, 0, lengths);
    return *std::max_element(lengths.begin(), lengths.end());
}

/// All-pairs shortest paths by Floyd-Warshall; `directed` follows hypernym -> hyponym only.
inline std::vector<std::vector<std::size_t>> floyd(const TinyDag& d, bool directed) {
    std::vector<std::vector<std::size_t>> dist(d.n, std::vector<std::size_t>(d.n, kInf));
    for (std::size_t i = 0; i < d.n; ++i) dist[i][i] = 0;
    for (auto [p, c] : d.edges) {
        dist[p][c] = 1;
        if (!directed) dist[c][p] = 1;
    }
    for (std::size_t k = 0; k < d.n; ++k) {
        for (std::size_t i = 0; i < d.n; ++i) {
            for (std::size_t j = 0; j < d.n; ++j) dist[i][j] = std::min(dist[i][j], dist[i][k] + dist[k][j]);
        }
    }
    return dist;
}

inline double gain(const std::vector<std::vector<std::size_t>>& undirected, std::size_t a, std::size_t b,
                   double base = 2.0, std::size_t cutoff = 5) {
    const auto dd = undirected[a][b];
    if (dd > cutoff) return 0.0;
    return std::pow(base, -static_cast<double>(dd));
}

/// Wu-Palmer over common ancestors-or-self: 2*depth(c) / (dist(c,a) + dist(c,b) + 2*depth(c)).
inline double wup(const TinyDag& d, const std::vector<std::vector<std::size_t>>& directed, std::size_t a,
                  std::size_t b) {
    if (a == b) return 1.0;
    auto ca = ancestors(d, a);
    ca.insert(a);
    auto cb = ancestors(d, b);
    cb.insert(b);
    double best = 0.0;
    for (auto c : ca) {
        if (!cb.count(c)) continue;
        const double dc = static_cast<double>(depth_shortest(d, c));
        const double denom = static_cast<double>(directed[c][a] + directed[c][b]) + 2.0 * dc;
        best = std::max(best, 2.0 * dc / denom);
    }
    return best;
}

inline double dcg(const std::vector<double>& gains, std::size_t k) {
    double s = 0.0;
    for (std::size_t i = 0; i < std::min(k, gains.size()); ++i) s += gains[i] / std::log2(static_cast<double>(i) + 2.0);
    return s;
}

/// nDCG@k for one query with the ideal found by trying every permutation.
inline double ndcg_bruteforce(std::vector<double> gains, std::size_t k) {
    const double actual = dcg(gains, k);
    std::vector<std::size_t> perm(gains.size());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    double ideal = 0.0;
    do {
        std::vector<double> g;
        for (auto i : perm) g.push_back(gains[i]);
        ideal = std::max(ideal, dcg(g, k));
    } while (std::next_permutation(perm.begin(), perm.end()));
    return ideal > 0.0 ? actual / ideal : 0.0;
}

/// Textbook recursive Levenshtein distance, no memoization.
inline std::size_t levenshtein(std::string_view a, std::string_view b) {
    if (a.empty()) return b.size();
    if (b.empty()) return a.size();
    const std::size_t cost = a.back() == b.back() ? 0 : 1;
    const auto ra = a.substr(0, a.size() - 1);
    const auto rb = b.substr(0, b.size() - 1);
    return std::min({levenshtein(ra, b) + 1, levenshtein(a, rb) + 1, levenshtein(ra, rb) + cost});
}

/// Okapi BM25 by full scan over raw token lists; the same per-token order of summation as the query.
struct Bm25Scan {
    std::vector<std::pair<std::string, std::vector<std::string>>> docs;
    double k1 = 1.2;
    double b = 0.75;

    double score(const std::vector<std::string>& query, std::size_t d) const {
        const double n = static_cast<double>(docs.size());
        double total_len = 0.0;
        for (const auto& doc : docs) total_len += static_cast<double>(doc.second.size());
        const double avg = total_len / n;
        const auto& tokens = docs[d].second;
        double s = 0.0;
        for (const auto& q : query) {
            const auto tf = static_cast<double>(std::count(tokens.begin(), tokens.end(), q));
            if (tf == 0.0) continue;
            double df = 0.0;
            for (const auto& doc : docs) df += std::count(doc.second.begin(), doc.second.end(), q) > 0 ? 1.0 : 0.0;
            const double idf = std::log(1.0 + (n - df + 0.5) / (df + 0.5));
            const double len = static_cast<double>(tokens.size());
            s += idf * tf * (k1 + 1.0) / (tf + k1 * (1.0 - b + b * len / avg));
        }
        return s;
    }

    /// All positive-score documents, score descending, then id ascending, truncated to k.
    std::vector<std::pair<std::string, double>> rank(const std::vector<std::string>& query, std::size_t k) const {
        std::vector<std::pair<std::string, double>> all;
        for (std::size_t d = 0; d < docs.size(); ++d) {
            const double s = score(query, d);
            if (s > 0.0) all.emplace_back(docs[d].first, s);
        }
        std::sort(all.begin(), all.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
        std::stable_sort(all.begin(), all.end(), [](const auto& x, const auto& y) { return x.second > y.second; });
        if (all.size() > k) all.resize(k);
        return all;
    }
};

}  // namespace oracle
