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

#include "hiprompt/synthetic.hpp"

#include <algorithm>
#include <array>
#include <random>
#include <set>
#include <stdexcept>

namespace hiprompt {

namespace fs = std::filesystem;

DatasetFiles DatasetFiles::in(const fs::path& dir) {
    return {dir / "entities.jsonl", dir / "triples.tsv", dir / "terms.jsonl", dir / "pairs.tsv", dir / "links.tsv"};
}

namespace {

// mt19937_64 output is fully specified by the standard; the distributions are not,
// so sampling goes through these helpers to keep files identical across toolchains.
class Sampler {
  public:
    explicit Sampler(std::uint64_t seed) : rng_(seed) {}

    std::size_t below(std::size_t n) { return static_cast<std::size_t>(rng_() % n); }
    bool chance(unsigned percent) { return below(100) < percent; }

    template <typename T>
    const T& pick(const std::vector<T>& v) { return v[below(v.size())]; }

  private:
    std::mt19937_64 rng_;
};

constexpr std::array kOnsets = {"b", "c", "d", "f", "g", "l", "m", "n", "p", "r", "s", "t", "v", "th", "ch", "st", "pr", "gl"};
constexpr std::array kVowels = {"a", "e", "i", "o", "u", "y", "ae", "io"};
constexpr std::array kCodas = {"", "", "n", "s", "r", "l", "x", "m"};
constexpr std::array kHeads = {"disease", "syndrome", "disorder", "carcinoma", "infection", "deficiency",
                               "neoplasm", "fever", "dystrophy", "anemia", "sclerosis", "itis"};
constexpr std::array kRelations = {"associated_with", "treats", "has_symptom", "interacts_with"};

std::string make_word(Sampler& s) {
    std::string w;
    const auto syllables = 2 + s.below(2);
    for (std::size_t i = 0; i < syllables; ++i) {
        w += kOnsets[s.below(kOnsets.size())];
        w += kVowels[s.below(kVowels.size())];
    }
    w += kCodas[s.below(kCodas.size())];
    return w;
}

std::vector<std::string> split_words(const std::string& name) {
    std::vector<std::string> words;
    std::string cur;
    for (char c : name) {
        if (c == ' ') {
            if (!cur.empty()) words.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) words.push_back(cur);
    return words;
}

std::string join_words(const std::vector<std::string>& words) {
    std::string out;
    for (const auto& w : words) {
        if (!out.empty()) out += ' ';
        out += w;
    }
    return out;
}

std::string typo(Sampler& s, const std::string& name) {
    auto words = split_words(name);
    auto& w = words[s.below(words.size())];
    if (w.size() >= 4) {
        const auto i = 1 + s.below(w.size() - 2);
        if (s.chance(50)) {
            std::swap(w[i], w[i + 1]);
        } else {
            w.erase(i, 1);
        }
    } else {
        w += w.back();
    }
    return join_words(words);
}

std::string reorder(const std::string& name) {
    auto words = split_words(name);
    if (words.size() < 2) return name;
    // "epidemic typhus" -> "typhus, epidemic"
    std::string out = words.back() + ",";
    for (std::size_t i = 0; i + 1 < words.size(); ++i) out += " " + words[i];
    return out;
}

}  // namespace

SyntheticDataset make_synthetic(std::uint64_t seed, std::size_t n_terms, std::size_t n_entities) {
    if (n_entities < 1 || n_terms < n_entities) throw std::invalid_argument("need n_terms >= n_entities >= 1");
    Sampler s(seed);

    std::vector<std::string> vocab;
    {
        std::set<std::string> seen;
        const auto want = std::max<std::size_t>(200, n_terms);
        while (vocab.size() < want) {
            auto w = make_word(s);
            if (seen.insert(w).second) vocab.push_back(std::move(w));
        }
    }

    auto term_id = [](std::size_t i) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "T%06zu", i);
        return std::string(buf);
    };
    auto entity_id = [](std::size_t i) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "E%06zu", i);
        return std::string(buf);
    };

    // Hierarchy: a few roots, every later term hangs below an earlier one; some get a second parent.
    const std::size_t n_roots = std::max<std::size_t>(1, n_terms / 50);
    std::vector<std::vector<std::size_t>> parents(n_terms);
    std::vector<TermPair> pairs;
    for (std::size_t i = n_roots; i < n_terms; ++i) {
        parents[i].push_back(s.below(i));
        if (i > 1 && s.chance(6)) {
            const auto extra = s.below(i);
            if (extra != parents[i].front()) parents[i].push_back(extra);
        }
    }

    std::set<std::string> used_names;
    std::vector<Term> terms(n_terms);
    for (std::size_t i = 0; i < n_terms; ++i) {
        Term& t = terms[i];
        t.id = term_id(i);
        std::string name;
        do {
            if (parents[i].empty()) {
                name = s.pick(vocab) + " " + kHeads[s.below(kHeads.size())];
            } else {
                // A child refines its first parent: new modifier + the parent's head word.
                const auto parent_words = split_words(terms[parents[i].front()].name);
                name = s.pick(vocab) + " " + parent_words.back();
                if (s.chance(40)) name = s.pick(vocab) + " " + name;
            }
        } while (!used_names.insert(name).second);
        t.name = name;
        const auto n_syn = s.below(3);
        for (std::size_t k = 0; k < n_syn; ++k) {
            std::string syn;
            do {
                syn = s.pick(vocab) + " " + split_words(name).back();
            } while (used_names.count(syn) != 0);
            used_names.insert(syn);
            t.synonyms.push_back(syn);
        }
        if (s.chance(70)) {
            std::string def = "a condition marked by " + s.pick(vocab) + " and " + s.pick(vocab);
            if (!parents[i].empty()) def = "a kind of " + terms[parents[i].front()].name + " marked by " + s.pick(vocab);
            t.definition = def;
        }
        for (auto p : parents[i]) pairs.emplace_back(term_id(p), t.id);
    }

    // Entities: one per sampled term, named by a perturbation of the term.
    std::vector<std::size_t> order(n_terms);
    for (std::size_t i = 0; i < n_terms; ++i) order[i] = i;
    for (std::size_t i = n_terms; i > 1; --i) std::swap(order[i - 1], order[s.below(i)]);

    std::set<std::string> entity_names;
    std::vector<Entity> entities;
    std::vector<std::pair<std::string, std::string>> links;
    for (std::size_t e = 0; e < n_entities; ++e) {
        const Term& t = terms[order[e]];
        std::vector<std::string> variants;
        switch (s.below(4)) {
            case 0:
                if (!t.synonyms.empty()) variants.push_back(t.synonyms[s.below(t.synonyms.size())]);
                break;
            case 1:
                variants.push_back(typo(s, t.name));
                break;
            case 2:
                variants.push_back(reorder(t.name));
                break;
            default:
                break;
        }
        variants.push_back(t.name);
        std::string name;
        for (const auto& v : variants) {
            if (entity_names.count(v) == 0) {
                name = v;
                break;
            }
        }
        while (name.empty() || entity_names.count(name) != 0) name = (name.empty() ? t.name : name) + " nos";
        entity_names.insert(name);

        Entity ent;
        ent.id = entity_id(e);
        ent.name = name;
        if (name != t.name && s.chance(30)) ent.synonyms.push_back(t.name);
        if (t.definition && s.chance(50)) ent.definition = t.definition;
        ent.types = {"Disease"};
        links.emplace_back(ent.id, t.id);
        entities.push_back(std::move(ent));
    }

    std::vector<RelationTriple> triples;
    if (n_entities > 1) {
        for (std::size_t e = 0; e < n_entities; ++e) {
            const auto n_edges = 1 + s.below(3);
            for (std::size_t k = 0; k < n_edges; ++k) {
                const auto other = s.below(n_entities);
                if (other == e) continue;
                triples.push_back({entity_id(e), kRelations[s.below(kRelations.size())], entity_id(other)});
            }
        }
    }

    return {KnowledgeGraph::build(std::move(entities), std::move(triples)),
            Hierarchy::build(std::move(terms), std::move(pairs)), AlignmentSet::build(std::move(links), 0)};
}

DatasetFiles write_synthetic(const fs::path& dir, std::uint64_t seed, std::size_t n_terms, std::size_t n_entities) {
    fs::create_directories(dir);
    const auto data = make_synthetic(seed, n_terms, n_entities);
    const auto files = DatasetFiles::in(dir);
    save_kg(data.kg, files.entities, files.triples);
    save_hierarchy(data.hierarchy, files.terms, files.pairs);
    save_links(data.links, files.links);
    return files;
}

}  // namespace hiprompt
