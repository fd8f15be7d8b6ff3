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
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace hiprompt {

/// Synthetic term placed above every parentless term. Never emitted in prompts or predictions.
inline constexpr std::string_view kVirtualRootId = "__ROOT__";

/// Input data failed validation (malformed file, broken reference, cycle, ...).
class DataError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class ParseError : public DataError {
  public:
    ParseError(const std::filesystem::path& file, std::size_t line, const std::string& message);
    std::size_t line() const noexcept { return line_; }

  private:
    std::size_t line_;
};

class UnknownIdError : public DataError {
  public:
    UnknownIdError(std::string_view kind, std::string id);
    const std::string& id() const noexcept { return id_; }

  private:
    std::string id_;
};

class CycleError : public DataError {
  public:
    explicit CycleError(std::vector<std::string> cycle);
    /// Term ids along one cycle, hypernym to hyponym; the first id is repeated at the end.
    const std::vector<std::string>& cycle() const noexcept { return cycle_; }

  private:
    std::vector<std::string> cycle_;
};

struct Entity {
    std::string id;
    std::string name;
    std::vector<std::string> synonyms;
    std::optional<std::string> definition;
    std::vector<std::string> types;

    bool operator==(const Entity&) const = default;
};

struct RelationTriple {
    std::string head;
    std::string relation;
    std::string tail;

    bool operator==(const RelationTriple&) const = default;
};

struct Term {
    std::string id;
    std::string name;
    std::vector<std::string> synonyms;
    std::optional<std::string> definition;

    bool operator==(const Term&) const = default;
};

/// Multi-relation graph of entities. Immutable once built.
class KnowledgeGraph {
  public:
    /// Validates id uniqueness, non-empty names and referential integrity of triples.
    /// Synonyms that repeat after case folding are collapsed to their first spelling.
    static KnowledgeGraph build(std::vector<Entity> entities, std::vector<RelationTriple> triples);

    std::size_t size() const noexcept { return entities_.size(); }
    /// Entities sorted by id.
    std::span<const Entity> entities() const noexcept { return entities_; }
    std::span<const RelationTriple> triples() const noexcept { return triples_; }

    bool contains(std::string_view id) const;
    const Entity& entity(std::string_view id) const;
    /// Ids of entities sharing a triple with `id` in either direction, sorted, self excluded.
    std::span<const std::string> neighbors(std::string_view id) const;

    bool operator==(const KnowledgeGraph& other) const {
        return entities_ == other.entities_ && triples_ == other.triples_;
    }

  private:
    std::size_t index_of(std::string_view id) const;

    std::vector<Entity> entities_;
    std::vector<RelationTriple> triples_;
    std::map<std::string, std::size_t, std::less<>> index_;
    std::vector<std::vector<std::string>> neighbors_;
};

enum class DepthConvention {
    ShortestPath,  // edges on the shortest path from the virtual root
    LongestPath,   // edges on the longest path from the virtual root
};

using TermPair = std::pair<std::string, std::string>;  // (hypernym, hyponym)

/// Term DAG with a virtual root above all parentless terms. Immutable once built.
///
/// Terms are stored sorted by id, so the dense index order used by the index-level
/// accessors is also id order. The virtual root has index `size()`.
class Hierarchy {
  public:
    static Hierarchy build(std::vector<Term> terms, std::vector<TermPair> pairs,
                           DepthConvention convention = DepthConvention::ShortestPath);

    std::size_t size() const noexcept { return terms_.size(); }
    std::span<const Term> terms() const noexcept { return terms_; }
    std::span<const TermPair> pairs() const noexcept { return pairs_; }
    DepthConvention depth_convention() const noexcept { return convention_; }

    bool contains(std::string_view id) const;
    const Term& term(std::string_view id) const;

    /// Direct hypernyms sorted by id, virtual root excluded.
    std::vector<std::string> parents(std::string_view id) const;
    /// Direct hyponyms sorted by id.
    std::vector<std::string> children(std::string_view id) const;
    /// All transitive hypernyms, virtual root included, the term itself excluded.
    std::set<std::string> ancestors(std::string_view id) const;
    /// Root has depth 0; parentless terms have depth 1.
    std::size_t depth(std::string_view id) const;
    std::size_t max_depth() const noexcept { return max_depth_; }

    // Index-level access for hot loops.
    std::size_t root_index() const noexcept { return terms_.size(); }
    std::size_t index_of(std::string_view id) const;
    std::optional<std::size_t> find_index(std::string_view id) const;
    /// Parent indices in ascending order; parentless terms list the root index.
    std::span<const std::size_t> parent_indices(std::size_t index) const { return parents_[index]; }
    std::span<const std::size_t> child_indices(std::size_t index) const { return children_[index]; }
    std::size_t depth_at(std::size_t index) const { return depth_[index]; }
    const std::string& id_at(std::size_t index) const;

    bool operator==(const Hierarchy& other) const {
        return terms_ == other.terms_ && pairs_ == other.pairs_;
    }

  private:
    std::vector<Term> terms_;
    std::vector<TermPair> pairs_;
    std::map<std::string, std::size_t, std::less<>> index_;
    std::vector<std::vector<std::size_t>> parents_;   // size() + 1 entries
    std::vector<std::vector<std::size_t>> children_;  // size() + 1 entries
    std::vector<std::size_t> depth_;
    std::size_t max_depth_ = 0;
    DepthConvention convention_ = DepthConvention::ShortestPath;
};

enum class LinkRole { Demonstration, Test };

struct Link {
    std::string entity_id;
    std::string term_id;
    LinkRole role = LinkRole::Test;

    bool operator==(const Link&) const = default;
};

/// One-to-one gold links. The first `shots` links by entity id are demonstrations.
class AlignmentSet {
  public:
    static AlignmentSet build(std::vector<std::pair<std::string, std::string>> links, std::size_t shots);

    std::span<const Link> links() const noexcept { return links_; }
    std::vector<Link> demonstrations() const;
    std::vector<Link> tests() const;
    std::optional<std::string> gold_for(std::string_view entity_id) const;

    /// Every entity and term id must exist in the given graph and hierarchy.
    void validate_against(const KnowledgeGraph& kg, const Hierarchy& h) const;

  private:
    std::vector<Link> links_;
};

KnowledgeGraph load_kg(const std::filesystem::path& entity_file, const std::filesystem::path& triple_file);
Hierarchy load_hierarchy(const std::filesystem::path& term_file, const std::filesystem::path& pair_file,
                         DepthConvention convention = DepthConvention::ShortestPath);
AlignmentSet load_links(const std::filesystem::path& link_file, std::size_t shots);

void save_kg(const KnowledgeGraph& kg, const std::filesystem::path& entity_file,
             const std::filesystem::path& triple_file);
void save_hierarchy(const Hierarchy& h, const std::filesystem::path& term_file,
                    const std::filesystem::path& pair_file);
void save_links(const AlignmentSet& links, const std::filesystem::path& link_file);

}  // namespace hiprompt
