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
#include <cstdint>
#include <filesystem>

#include "hiprompt/kb_model.hpp"

namespace hiprompt {

/// Canonical file names inside a dataset directory.
struct DatasetFiles {
    std::filesystem::path entities;
    std::filesystem::path triples;
    std::filesystem::path terms;
    std::filesystem::path pairs;
    std::filesystem::path links;

    static DatasetFiles in(const std::filesystem::path& dir);
};

struct SyntheticDataset {
    KnowledgeGraph kg;
    Hierarchy hierarchy;
    AlignmentSet links;
};

/// Deterministic desk-scale dataset: a random tree of terms plus extra DAG edges,
/// one entity per linked term whose name is a synonym swap, typo or reordering of
/// the term name. The output is identical for a given seed on every platform.
SyntheticDataset make_synthetic(std::uint64_t seed, std::size_t n_terms, std::size_t n_entities);

/// Generates and writes the dataset files into `dir` (created when missing).
DatasetFiles write_synthetic(const std::filesystem::path& dir, std::uint64_t seed, std::size_t n_terms,
                             std::size_t n_entities);

}  // namespace hiprompt
