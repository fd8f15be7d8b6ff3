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

#include "hiprompt/kb_model.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "hiprompt/text.hpp"

namespace hiprompt {

namespace fs = std::filesystem;
using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

ParseError::ParseError(const fs::path& file, std::size_t line, const std::string& message)
    : DataError(file.string() + ":" + std::to_string(line) + ": " + message), line_(line) {}

UnknownIdError::UnknownIdError(std::string_view kind, std::string id)
    : DataError("unknown " + std::string(kind) + " id \"" + id + "\""), id_(std::move(id)) {}

namespace {

std::string describe_cycle(const std::vector<std::string>& cycle) {
    std::string out = "hierarchy contains a cycle: ";
    for (std::size_t i = 0; i < cycle.size(); ++i) {
        if (i > 0) out += " -> ";
        out += cycle[i];
    }
    return out;
}

}  // namespace

CycleError::CycleError(std::vector<std::string> cycle)
    : DataError(describe_cycle(cycle)), cycle_(std::move(cycle)) {}

namespace {

std::vector<std::string> dedupe_folded(std::vector<std::string> values) {
    std::vector<std::string> out;
    std::unordered_set<std::string> seen;
    for (auto& v : values) {
        if (seen.insert(casefold(v)).second) out.push_back(std::move(v));
    }
    return out;
}

/// Calls `fn(line_number, line)` for every non-blank line not starting with '#'.
template <typename Fn>
void for_each_record(const fs::path& file, Fn&& fn) {
    std::ifstream in(file);
    if (!in) throw DataError("cannot open " + file.string());
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        if (trim(line).empty()) continue;
        fn(number, line);
    }
}

std::vector<std::string> tsv_columns(const fs::path& file, std::size_t number, const std::string& line,
                                     std::size_t expected) {
    auto cols = split(line, '\t');
    if (cols.size() != expected) {
        throw ParseError(file, number,
                         "expected " + std::to_string(expected) + " tab-separated columns, got " +
                             std::to_string(cols.size()));
    }
    for (auto& c : cols) {
        c = std::string(trim(c));
        if (c.empty()) throw ParseError(file, number, "empty column");
    }
    return cols;
}

struct RawRecord {
    std::string id;
    std::string name;
    std::vector<std::string> synonyms;
    std::optional<std::string> definition;
    std::vector<std::string> types;
};

std::vector<std::string> string_array(const json& obj, const char* key, const fs::path& file, std::size_t number) {
    std::vector<std::string> out;
    if (!obj.contains(key) || obj[key].is_null()) return out;
    if (!obj[key].is_array()) throw ParseError(file, number, std::string("\"") + key + "\" must be an array");
    for (const auto& v : obj[key]) {
        if (!v.is_string()) throw ParseError(file, number, std::string("\"") + key + "\" must hold strings");
        out.push_back(v.get<std::string>());
    }
    return out;
}

std::vector<RawRecord> read_jsonl(const fs::path& file, bool with_types) {
    std::vector<RawRecord> records;
    for_each_record(file, [&](std::size_t number, const std::string& line) {
        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ParseError(file, number, std::string("invalid JSON: ") + e.what());
        }
        if (!obj.is_object()) throw ParseError(file, number, "record must be a JSON object");
        RawRecord r;
        if (!obj.contains("id") || !obj["id"].is_string()) throw ParseError(file, number, "missing string \"id\"");
        if (!obj.contains("name") || !obj["name"].is_string()) {
            throw ParseError(file, number, "missing string \"name\"");
        }
        r.id = obj["id"].get<std::string>();
        r.name = obj["name"].get<std::string>();
        if (r.id.empty()) throw ParseError(file, number, "empty id");
        if (trim(r.name).empty()) throw ParseError(file, number, "empty name for id \"" + r.id + "\"");
        r.synonyms = string_array(obj, "synonyms", file, number);
        if (obj.contains("definition") && !obj["definition"].is_null()) {
            if (!obj["definition"].is_string()) throw ParseError(file, number, "\"definition\" must be text or null");
            r.definition = obj["definition"].get<std::string>();
        }
        if (with_types) r.types = string_array(obj, "types", file, number);
        records.push_back(std::move(r));
    });
    return records;
}

void write_lines(const fs::path& file, const std::string& content) {
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + file.string());
    out << content;
}

}  // namespace

// ---------------------------------------------------------------------------
// KnowledgeGraph

KnowledgeGraph KnowledgeGraph::build(std::vector<Entity> entities, std::vector<RelationTriple> triples) {
    KnowledgeGraph g;
    std::sort(entities.begin(), entities.end(), [](const Entity& a, const Entity& b) { return a.id < b.id; });
    for (std::size_t i = 0; i < entities.size(); ++i) {
        auto& e = entities[i];
        if (e.id.empty()) throw DataError("entity with empty id");
        if (trim(e.name).empty()) throw DataError("entity \"" + e.id + "\" has an empty name");
        if (!g.index_.emplace(e.id, i).second) throw DataError("duplicate entity id \"" + e.id + "\"");
        e.synonyms = dedupe_folded(std::move(e.synonyms));
    }
    g.entities_ = std::move(entities);

    std::vector<std::set<std::string>> adjacency(g.entities_.size());
    for (const auto& t : triples) {
        auto head = g.index_.find(t.head);
        if (head == g.index_.end()) throw UnknownIdError("entity", t.head);
        auto tail = g.index_.find(t.tail);
        if (tail == g.index_.end()) throw UnknownIdError("entity", t.tail);
        if (head->second != tail->second) {
            adjacency[head->second].insert(t.tail);
            adjacency[tail->second].insert(t.head);
        }
    }
    g.neighbors_.reserve(adjacency.size());
    for (auto& set : adjacency) g.neighbors_.emplace_back(set.begin(), set.end());
    g.triples_ = std::move(triples);
    return g;
}

std::size_t KnowledgeGraph::index_of(std::string_view id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw UnknownIdError("entity", std::string(id));
    return it->second;
}

bool KnowledgeGraph::contains(std::string_view id) const { return index_.find(id) != index_.end(); }

const Entity& KnowledgeGraph::entity(std::string_view id) const { return entities_[index_of(id)]; }

std::span<const std::string> KnowledgeGraph::neighbors(std::string_view id) const {
    return neighbors_[index_of(id)];
}

// ---------------------------------------------------------------------------
// Hierarchy

Hierarchy Hierarchy::build(std::vector<Term> terms, std::vector<TermPair> pairs, DepthConvention convention) {
    Hierarchy h;
    h.convention_ = convention;
    std::sort(terms.begin(), terms.end(), [](const Term& a, const Term& b) { return a.id < b.id; });
    for (std::size_t i = 0; i < terms.size(); ++i) {
        auto& t = terms[i];
        if (t.id.empty()) throw DataError("term with empty id");
        if (t.id == kVirtualRootId) throw DataError("term id \"" + t.id + "\" is reserved");
        if (trim(t.name).empty()) throw DataError("term \"" + t.id + "\" has an empty name");
        if (!h.index_.emplace(t.id, i).second) throw DataError("duplicate term id \"" + t.id + "\"");
        t.synonyms = dedupe_folded(std::move(t.synonyms));
    }
    h.terms_ = std::move(terms);

    const std::size_t n = h.terms_.size();
    const std::size_t root = n;
    h.parents_.assign(n + 1, {});
    h.children_.assign(n + 1, {});
    std::set<std::pair<std::size_t, std::size_t>> seen;
    for (const auto& [hyper, hypo] : pairs) {
        auto p = h.index_.find(hyper);
        if (p == h.index_.end()) throw UnknownIdError("term", hyper);
        auto c = h.index_.find(hypo);
        if (c == h.index_.end()) throw UnknownIdError("term", hypo);
        if (!seen.emplace(p->second, c->second).second) {
            throw DataError("duplicate hierarchy pair (" + hyper + ", " + hypo + ")");
        }
        h.parents_[c->second].push_back(p->second);
        h.children_[p->second].push_back(c->second);
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (h.parents_[i].empty()) {
            h.parents_[i].push_back(root);
            h.children_[root].push_back(i);
        }
    }
    for (auto& v : h.parents_) std::sort(v.begin(), v.end());
    for (auto& v : h.children_) std::sort(v.begin(), v.end());

    // Kahn's algorithm from the root; anything left over sits on or below a cycle.
    std::vector<std::size_t> indegree(n + 1);
    for (std::size_t i = 0; i < n; ++i) indegree[i] = h.parents_[i].size();
    std::vector<std::size_t> order;
    order.reserve(n + 1);
    std::deque<std::size_t> ready{root};
    while (!ready.empty()) {
        const auto u = ready.front();
        ready.pop_front();
        order.push_back(u);
        for (auto c : h.children_[u]) {
            if (--indegree[c] == 0) ready.push_back(c);
        }
    }
    if (order.size() != n + 1) {
        // Every unprocessed node has an unprocessed parent; walking up must revisit a node.
        std::size_t start = 0;
        while (indegree[start] == 0) ++start;
        std::vector<std::size_t> walk;
        std::vector<std::ptrdiff_t> position(n + 1, -1);
        std::size_t u = start;
        while (position[u] < 0) {
            position[u] = static_cast<std::ptrdiff_t>(walk.size());
            walk.push_back(u);
            for (auto p : h.parents_[u]) {
                if (p != root && indegree[p] > 0) {
                    u = p;
                    break;
                }
            }
        }
        std::vector<std::string> cycle;
        for (auto i = walk.size(); i-- > static_cast<std::size_t>(position[u]);) cycle.push_back(h.terms_[walk[i]].id);
        cycle.push_back(cycle.front());
        throw CycleError(std::move(cycle));
    }

    h.depth_.assign(n + 1, 0);
    for (auto u : order) {
        if (u == root) continue;
        std::size_t best = convention == DepthConvention::ShortestPath ? SIZE_MAX : 0;
        for (auto p : h.parents_[u]) {
            best = convention == DepthConvention::ShortestPath ? std::min(best, h.depth_[p]) : std::max(best, h.depth_[p]);
        }
        h.depth_[u] = best + 1;
        h.max_depth_ = std::max(h.max_depth_, h.depth_[u]);
    }
    h.pairs_ = std::move(pairs);
    return h;
}

std::optional<std::size_t> Hierarchy::find_index(std::string_view id) const {
    if (id == kVirtualRootId) return root_index();
    auto it = index_.find(id);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::size_t Hierarchy::index_of(std::string_view id) const {
    auto idx = find_index(id);
    if (!idx) throw UnknownIdError("term", std::string(id));
    return *idx;
}

bool Hierarchy::contains(std::string_view id) const { return index_.find(id) != index_.end(); }

const Term& Hierarchy::term(std::string_view id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw UnknownIdError("term", std::string(id));
    return terms_[it->second];
}

const std::string& Hierarchy::id_at(std::size_t index) const {
    static const std::string root_id(kVirtualRootId);
    return index == root_index() ? root_id : terms_.at(index).id;
}

std::vector<std::string> Hierarchy::parents(std::string_view id) const {
    std::vector<std::string> out;
    for (auto p : parents_[index_of(id)]) {
        if (p != root_index()) out.push_back(terms_[p].id);
    }
    return out;
}

std::vector<std::string> Hierarchy::children(std::string_view id) const {
    std::vector<std::string> out;
    for (auto c : children_[index_of(id)]) out.push_back(terms_[c].id);
    return out;
}

std::set<std::string> Hierarchy::ancestors(std::string_view id) const {
    std::set<std::string> out;
    std::vector<bool> visited(terms_.size() + 1, false);
    std::vector<std::size_t> stack(parents_[index_of(id)].begin(), parents_[index_of(id)].end());
    while (!stack.empty()) {
        const auto u = stack.back();
        stack.pop_back();
        if (visited[u]) continue;
        visited[u] = true;
        out.insert(id_at(u));
        for (auto p : parents_[u]) stack.push_back(p);
    }
    return out;
}

std::size_t Hierarchy::depth(std::string_view id) const { return depth_[index_of(id)]; }

// ---------------------------------------------------------------------------
// AlignmentSet

AlignmentSet AlignmentSet::build(std::vector<std::pair<std::string, std::string>> links, std::size_t shots) {
    if (shots > links.size()) {
        throw DataError("shots (" + std::to_string(shots) + ") exceeds the number of links (" +
                        std::to_string(links.size()) + ")");
    }
    std::sort(links.begin(), links.end());
    std::set<std::string_view> entities;
    std::set<std::string_view> terms;
    for (const auto& [e, t] : links) {
        if (!entities.insert(e).second) throw DataError("one-to-one violation: entity \"" + e + "\" linked twice");
        if (!terms.insert(t).second) throw DataError("one-to-one violation: term \"" + t + "\" linked twice");
    }
    AlignmentSet set;
    set.links_.reserve(links.size());
    for (std::size_t i = 0; i < links.size(); ++i) {
        set.links_.push_back({std::move(links[i].first), std::move(links[i].second),
                              i < shots ? LinkRole::Demonstration : LinkRole::Test});
    }
    return set;
}

std::vector<Link> AlignmentSet::demonstrations() const {
    std::vector<Link> out;
    std::copy_if(links_.begin(), links_.end(), std::back_inserter(out),
                 [](const Link& l) { return l.role == LinkRole::Demonstration; });
    return out;
}

std::vector<Link> AlignmentSet::tests() const {
    std::vector<Link> out;
    std::copy_if(links_.begin(), links_.end(), std::back_inserter(out),
                 [](const Link& l) { return l.role == LinkRole::Test; });
    return out;
}

std::optional<std::string> AlignmentSet::gold_for(std::string_view entity_id) const {
    auto it = std::lower_bound(links_.begin(), links_.end(), entity_id,
                               [](const Link& l, std::string_view id) { return l.entity_id < id; });
    if (it == links_.end() || it->entity_id != entity_id) return std::nullopt;
    return it->term_id;
}

void AlignmentSet::validate_against(const KnowledgeGraph& kg, const Hierarchy& h) const {
    for (const auto& l : links_) {
        if (!kg.contains(l.entity_id)) throw UnknownIdError("entity", l.entity_id);
        if (!h.contains(l.term_id)) throw UnknownIdError("term", l.term_id);
    }
}

// ---------------------------------------------------------------------------
// Files

KnowledgeGraph load_kg(const fs::path& entity_file, const fs::path& triple_file) {
    std::vector<Entity> entities;
    for (auto& r : read_jsonl(entity_file, true)) {
        entities.push_back({std::move(r.id), std::move(r.name), std::move(r.synonyms), std::move(r.definition),
                            std::move(r.types)});
    }
    std::vector<RelationTriple> triples;
    for_each_record(triple_file, [&](std::size_t number, const std::string& line) {
        auto cols = tsv_columns(triple_file, number, line, 3);
        triples.push_back({std::move(cols[0]), std::move(cols[1]), std::move(cols[2])});
    });
    return KnowledgeGraph::build(std::move(entities), std::move(triples));
}

Hierarchy load_hierarchy(const fs::path& term_file, const fs::path& pair_file, DepthConvention convention) {
    std::vector<Term> terms;
    for (auto& r : read_jsonl(term_file, false)) {
        terms.push_back({std::move(r.id), std::move(r.name), std::move(r.synonyms), std::move(r.definition)});
    }
    std::vector<TermPair> pairs;
    for_each_record(pair_file, [&](std::size_t number, const std::string& line) {
        auto cols = tsv_columns(pair_file, number, line, 2);
        pairs.emplace_back(std::move(cols[0]), std::move(cols[1]));
    });
    return Hierarchy::build(std::move(terms), std::move(pairs), convention);
}

AlignmentSet load_links(const fs::path& link_file, std::size_t shots) {
    std::vector<std::pair<std::string, std::string>> links;
    for_each_record(link_file, [&](std::size_t number, const std::string& line) {
        auto cols = tsv_columns(link_file, number, line, 2);
        links.emplace_back(std::move(cols[0]), std::move(cols[1]));
    });
    return AlignmentSet::build(std::move(links), shots);
}

namespace {

ordered_json record_json(const std::string& id, const std::string& name, const std::vector<std::string>& synonyms,
                         const std::optional<std::string>& definition) {
    ordered_json obj;
    obj["id"] = id;
    obj["name"] = name;
    obj["synonyms"] = synonyms;
    obj["definition"] = definition ? ordered_json(*definition) : ordered_json(nullptr);
    return obj;
}

}  // namespace

void save_kg(const KnowledgeGraph& kg, const fs::path& entity_file, const fs::path& triple_file) {
    std::ostringstream entities;
    for (const auto& e : kg.entities()) {
        auto obj = record_json(e.id, e.name, e.synonyms, e.definition);
        obj["types"] = e.types;
        entities << obj.dump() << '\n';
    }
    write_lines(entity_file, entities.str());
    std::ostringstream triples;
    for (const auto& t : kg.triples()) triples << t.head << '\t' << t.relation << '\t' << t.tail << '\n';
    write_lines(triple_file, triples.str());
}

void save_hierarchy(const Hierarchy& h, const fs::path& term_file, const fs::path& pair_file) {
    std::ostringstream terms;
    for (const auto& t : h.terms()) terms << record_json(t.id, t.name, t.synonyms, t.definition).dump() << '\n';
    write_lines(term_file, terms.str());
    std::ostringstream pairs;
    for (const auto& [p, c] : h.pairs()) pairs << p << '\t' << c << '\n';
    write_lines(pair_file, pairs.str());
}

void save_links(const AlignmentSet& links, const fs::path& link_file) {
    std::ostringstream out;
    for (const auto& l : links.links()) out << l.entity_id << '\t' << l.term_id << '\n';
    write_lines(link_file, out.str());
}

}  // namespace hiprompt
