#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "hiprompt/retriever.hpp"
#include "hiprompt/text.hpp"
#include "oracles.hpp"

using namespace hiprompt;
using Tokens = std::vector<std::string>;

namespace {

const ExpansionConfig kName{false, false};
const ExpansionConfig kAtr{true, false};
const ExpansionConfig kStr{false, true};
const ExpansionConfig kFull{true, true};

Hierarchy typhus_chain() {
    return Hierarchy::build({{"a", "Rickettsial Infection", {}, std::nullopt},
                             {"b", "Typhus", {"hypertension"}, "louse borne fever"},
                             {"c", "Epidemic Typhus", {}, std::nullopt}},
                            {{"a", "b"}, {"b", "c"}});
}

Tokens concat(std::initializer_list<Tokens> parts) {
    Tokens out;
    for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
    return out;
}

}  // namespace

TEST(ExpansionConfig, LabelsMapOntoFourSettings) {
    for (const char* label : {"name", "atr", "str", "atr+str"}) EXPECT_EQ(ExpansionConfig::parse(label).label(), label);
    EXPECT_EQ(ExpansionConfig::parse("atr+str"), kFull);
    EXPECT_THROW(ExpansionConfig::parse("full"), std::invalid_argument);
}

TEST(TermDocument, ExpansionSettings) {
    const auto h = typhus_chain();
    const auto& b = h.term("b");
    EXPECT_EQ(build_term_document(b, h, kName), (Tokens{"typhus"}));
    EXPECT_EQ(build_term_document(b, h, kAtr), (Tokens{"typhus", "hypertension", "louse", "borne", "fever"}));
    EXPECT_EQ(build_term_document(b, h, kStr),
              concat({tokenize("Typhus"), tokenize("Rickettsial Infection"), tokenize("Epidemic Typhus")}));
    EXPECT_EQ(build_term_document(h.term("a"), h, kStr), concat({tokenize("Rickettsial Infection"), tokenize("Typhus")}));
}

TEST(EntityQuery, NeighborsAndCap) {
    std::vector<Entity> ents{{"q", "Query Disease", {"qd"}, "some text", {}}};
    std::vector<RelationTriple> triples;
    for (int i = 0; i < 100; ++i) {
        char id[8];
        std::snprintf(id, sizeof id, "n%03d", i);
        ents.push_back({id, std::string("nb") + id, {}, std::nullopt, {}});
        // Alternate directions; neighbors count either way.
        if (i % 2 == 0) triples.push_back({"q", "rel", id});
        else triples.push_back({id, "rel", "q"});
    }
    const auto kg = KnowledgeGraph::build(ents, triples);
    const auto& q = kg.entity("q");
    EXPECT_EQ(build_entity_query(q, kg, kName), (Tokens{"query", "disease"}));
    EXPECT_EQ(build_entity_query(q, kg, kAtr), (Tokens{"query", "disease", "qd", "some", "text"}));
    const auto full = build_entity_query(q, kg, kStr);
    ASSERT_EQ(full.size(), 2 + kMaxNeighborNames);
    EXPECT_EQ(full[2], "nbn000");
    EXPECT_EQ(full.back(), "nbn031");
}

TEST(EntityQuery, TwoNeighborsDeduplicated) {
    const auto kg = KnowledgeGraph::build({{"e", "Fever", {}, {}, {}}, {"x", "Aspirin", {}, {}, {}}, {"y", "Rash", {}, {}, {}}},
                                          {{"x", "treats", "e"}, {"e", "has", "y"}, {"e", "also", "y"}});
    EXPECT_EQ(build_entity_query(kg.entity("e"), kg, kStr), (Tokens{"fever", "aspirin", "rash"}));
}

TEST(Bm25Index, BuildStatistics) {
    const auto h = typhus_chain();
    const auto idx = Bm25Index::build(h, kName);
    EXPECT_EQ(idx.doc_count(), 3u);
    EXPECT_DOUBLE_EQ(idx.avg_doc_length(), 5.0 / 3.0);
    EXPECT_EQ(idx.doc_frequency("typhus"), 2u);
    EXPECT_EQ(idx.term_frequency("typhus", "c"), 1u);

    const auto same = Bm25Index::from_documents({{"x", {"a", "b"}}, {"y", {"a", "b"}}});
    EXPECT_EQ(same.doc_length("x"), same.doc_length("y"));
    EXPECT_THROW(Bm25Index::from_documents({}, {0.0, 0.5}), std::invalid_argument);
    EXPECT_THROW(Bm25Index::from_documents({}, {1.2, 1.5}), std::invalid_argument);
}

TEST(Bm25Score, SingleDocumentClosedForm) {
    const auto idx = Bm25Index::from_documents({{"d", {"disease"}}}, {1.2, 0.75});
    // tf = 1, df = 1, N = 1, len = avglen:
    //   idf = ln(1 + 0.5 / 1.5) = ln(4/3); tf part = 1 * 2.2 / (1 + 1.2 * 1) = 1.
    const double expected = std::log(4.0 / 3.0) * (1.0 * 2.2) / (1.0 + 1.2 * (1.0 - 0.75 + 0.75 * 1.0));
    EXPECT_NEAR(idx.score({"disease"}, "d"), expected, 1e-15);
    EXPECT_NEAR(expected, 0.28768207245178096, 1e-15);
}

TEST(Bm25Score, ZeroOverlapDuplicatesAndUnknownDoc) {
    const auto idx = Bm25Index::from_documents({{"d1", {"typhus", "fever"}}, {"d2", {"cancer"}}});
    EXPECT_EQ(idx.score({"malaria"}, "d1"), 0.0);
    const double once = idx.score({"typhus"}, "d1");
    EXPECT_GT(once, 0.0);
    EXPECT_DOUBLE_EQ(idx.score({"typhus", "typhus"}, "d1"), 2.0 * once);
    EXPECT_THROW(idx.score({"typhus"}, "d9"), UnknownIdError);
}

TEST(Retrieve, ExactNameRanksFirstInTenTermCorpus) {
    std::vector<std::pair<std::string, Tokens>> docs;
    const char* names[] = {"epidemic typhus",  "murine typhus",   "typhus",       "scrub typhus fever", "typhoid fever",
                           "yellow fever",     "dengue fever",    "louse disease", "rickettsial disease", "spotted fever"};
    for (int i = 0; i < 10; ++i) docs.emplace_back("t" + std::to_string(i), tokenize(names[i]));
    oracle::Bm25Scan scan{docs};
    const auto idx = Bm25Index::from_documents(docs);
    for (int i = 0; i < 10; ++i) {
        const auto query = tokenize(names[i]);
        const auto rl = idx.retrieve(query, 10);
        const auto expected = scan.rank(query, 10);
        ASSERT_FALSE(rl.empty());
        EXPECT_EQ(rl.items.front().term_id, "t" + std::to_string(i)) << names[i];
        ASSERT_EQ(rl.items.size(), expected.size());
        for (std::size_t r = 0; r < expected.size(); ++r) {
            EXPECT_EQ(rl.items[r].term_id, expected[r].first);
            EXPECT_EQ(rl.items[r].score, expected[r].second);
        }
    }
}

TEST(Retrieve, TiesByIdAndZeroScoresExcluded) {
    const auto idx = Bm25Index::from_documents({{"z", {"fever"}}, {"m", {"fever"}}, {"a", {"rash"}}});
    const auto rl = idx.retrieve({"fever"}, 5, "e1");
    EXPECT_EQ(rl.entity_id, "e1");
    EXPECT_EQ(rl.k, 5u);
    ASSERT_EQ(rl.items.size(), 2u);
    EXPECT_EQ(rl.items[0].term_id, "m");
    EXPECT_EQ(rl.items[1].term_id, "z");
    EXPECT_EQ(rl.items[0].score, rl.items[1].score);
    EXPECT_TRUE(idx.retrieve({}, 5).empty());
    EXPECT_THROW(idx.retrieve({"fever"}, 0), std::invalid_argument);
}

TEST(Retrieve, PrefixStoredScoresAndDeterminism) {
    std::mt19937_64 rng(19);
    const std::vector<std::string> vocab{"a", "b", "c", "d", "e", "f", "g", "h"};
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<std::pair<std::string, Tokens>> docs;
        for (int d = 0; d < 30; ++d) {
            Tokens t;
            for (std::size_t n = 1 + rng() % 6; n > 0; --n) t.push_back(vocab[rng() % vocab.size()]);
            docs.emplace_back("d" + std::to_string(d), t);
        }
        const auto idx = Bm25Index::from_documents(docs);
        Tokens q;
        for (std::size_t n = 1 + rng() % 4; n > 0; --n) q.push_back(vocab[rng() % vocab.size()]);
        const auto big = idx.retrieve(q, 30);
        for (std::size_t k = 1; k <= 30; ++k) {
            const auto small = idx.retrieve(q, k);
            ASSERT_LE(small.size(), k);
            for (std::size_t i = 0; i < small.size(); ++i) EXPECT_EQ(small.items[i], big.items[i]);
        }
        for (std::size_t i = 0; i < big.size(); ++i) {
            const double again = idx.score(q, big.items[i].term_id);
            EXPECT_LE(std::abs(again - big.items[i].score), 1e-9 * std::abs(again));
            if (i > 0) EXPECT_GE(big.items[i - 1].score, big.items[i].score);
        }
        EXPECT_EQ(Bm25Index::from_documents(docs).retrieve(q, 10), idx.retrieve(q, 10));
    }
}
