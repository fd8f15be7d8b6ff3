#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

#include "hiprompt/prompting.hpp"
#include "hiprompt/text.hpp"

using namespace hiprompt;
using Ids = std::vector<std::string>;

namespace {

RankedList ranked(const Ids& ids, std::size_t k = 0) {
    RankedList rl{"q", {}, k == 0 ? ids.size() : k};
    double s = static_cast<double>(ids.size());
    for (const auto& id : ids) rl.items.push_back({id, s--});
    return rl;
}

/// Five flat terms n1..n5 named "term one" .. "term five".
Hierarchy flat_five() {
    const char* names[] = {"term one", "term two", "term three", "term four", "term five"};
    std::vector<Term> terms;
    for (int i = 0; i < 5; ++i) terms.push_back({"n" + std::to_string(i + 1), names[i], {}, std::nullopt});
    return Hierarchy::build(terms, {});
}

Hierarchy abc() {
    return Hierarchy::build({{"ta", "A", {}, std::nullopt}, {"tb", "B", {"bee"}, std::nullopt}, {"tc", "C", {}, std::nullopt}},
                            {});
}

Hierarchy typhus() {
    return Hierarchy::build({{"t1", "typhus", {}, std::nullopt},
                             {"t2", "epidemic typhus", {"louse-borne typhus"}, std::nullopt},
                             {"t3", "rickettsial disease", {}, std::nullopt}},
                            {{"t3", "t1"}, {"t1", "t2"}});
}

Hierarchy diamond() {
    return Hierarchy::build({{"a", "a", {}, std::nullopt}, {"b", "b", {}, std::nullopt}, {"c", "c", {}, std::nullopt},
                             {"d", "d", {}, std::nullopt}},
                            {{"a", "b"}, {"a", "c"}, {"b", "d"}, {"c", "d"}});
}

}  // namespace

TEST(Demonstration, GoldMovesToFront) {
    const auto h = flat_five();
    const auto demo = build_demonstration("Query Name", "n3", ranked({"n1", "n2", "n3", "n4", "n5"}), h);
    EXPECT_EQ(demo.query, "Query Name");
    EXPECT_EQ(demo.choices, (Ids{"term one", "term two", "term three", "term four", "term five"}));
    EXPECT_EQ(demo.answer, (Ids{"term three", "term one", "term two", "term four", "term five"}));
    EXPECT_FALSE(demo.pseudo);
}

TEST(Demonstration, MissingGoldReplacesLastSlot) {
    const auto h = flat_five();
    const auto demo = build_demonstration("q", "n5", ranked({"n1", "n2", "n3", "n4"}, 4), h);
    EXPECT_EQ(demo.choices, (Ids{"term one", "term two", "term three", "term five"}));
    EXPECT_EQ(demo.answer, (Ids{"term five", "term one", "term two", "term three"}));

    // Shorter than k: gold is appended instead.
    const auto shorter = build_demonstration("q", "n5", ranked({"n1", "n2"}, 5), h);
    EXPECT_EQ(shorter.choices, (Ids{"term one", "term two", "term five"}));
    EXPECT_THROW(build_demonstration("q", "n1", RankedList{}, h), std::invalid_argument);
}

TEST(Demonstration, PseudoIsFixedAndOutOfDomain) {
    const auto demo = build_pseudo_demonstration();
    EXPECT_TRUE(demo.pseudo);
    EXPECT_EQ(demo.query, "golden retriever");
    EXPECT_EQ(demo.choices, (Ids{"dog", "cat", "bird"}));
    EXPECT_EQ(demo.answer, (Ids{"dog", "cat", "bird"}));
    EXPECT_EQ(render_demonstration(demo), "Query: golden retriever\nChoices: dog; cat; bird\nAnswer: dog; cat; bird");
}

TEST(ContextString, Clauses) {
    const auto h = typhus();
    EXPECT_EQ(build_context_string(ranked({"t2"}), h), "Contexts: {epidemic typhus isA typhus}");
    EXPECT_EQ(build_context_string(ranked({"t3"}), h), "Contexts: {}");
    EXPECT_EQ(build_context_string(ranked({"t2", "t3", "t1"}), h),
              "Contexts: {epidemic typhus isA typhus; typhus isA rickettsial disease}");
    EXPECT_EQ(build_context_string(ranked({"d"}), diamond()), "Contexts: {d isA b; d isA c}");
}

TEST(AssemblePrompt, ZeroShotLayout) {
    PromptConfig cfg;
    cfg.shots = 0;
    cfg.hierarchy_context = false;
    cfg.task_description = "Rank.";
    const auto p = assemble_prompt(cfg, {}, "typhus, epidemic", ranked({"t1", "t2"}), typhus());
    EXPECT_EQ(p.text,
              "Rank.\n\n"
              "Query: golden retriever\nChoices: dog; cat; bird\nAnswer: dog; cat; bird\n\n"
              "Query: typhus, epidemic\nChoices: typhus; epidemic typhus\nAnswer:");
    EXPECT_EQ(p.candidate_ids, (Ids{"t1", "t2"}));
    EXPECT_TRUE(p.dropped_ids.empty());
}

TEST(AssemblePrompt, OneShotWithContext) {
    const auto h = typhus();
    PromptConfig cfg;
    cfg.shots = 1;
    cfg.hierarchy_context = true;
    const std::vector<Demonstration> demos{build_demonstration("louse typhus", "t2", ranked({"t1", "t2"}), h)};
    const auto p = assemble_prompt(cfg, demos, "epidemic typhus fever", ranked({"t2", "t1"}), h);
    EXPECT_EQ(p.text.find("golden retriever"), std::string::npos);
    EXPECT_NE(p.text.find("Query: louse typhus\nChoices: typhus; epidemic typhus\nAnswer: epidemic typhus; typhus\n\n"),
              std::string::npos);
    EXPECT_NE(p.text.find("\nContexts: {epidemic typhus isA typhus; typhus isA rickettsial disease}\nAnswer:"),
              std::string::npos);
    EXPECT_TRUE(p.text.ends_with("Answer:"));
    EXPECT_TRUE(p.text.starts_with(std::string(kDefaultTaskDescription)));

    cfg.shots = 2;
    EXPECT_THROW(assemble_prompt(cfg, demos, "x", ranked({"t1"}), h), std::invalid_argument);
    cfg.shots = 0;
    EXPECT_THROW(assemble_prompt(cfg, {}, "x", RankedList{}, h), std::invalid_argument);
}

TEST(AssemblePrompt, TruncatesTailUnderTightBudget) {
    std::vector<Term> terms;
    std::vector<TermPair> pairs;
    Ids ids;
    for (int i = 0; i < 50; ++i) {
        char id[8];
        std::snprintf(id, sizeof id, "c%02d", i);
        terms.push_back({id, std::string("candidate name ") + id, {}, std::nullopt});
        if (i > 0) pairs.emplace_back("c00", id);
        ids.push_back(id);
    }
    const auto h = Hierarchy::build(terms, pairs);
    PromptConfig cfg;
    cfg.task_description = "Rank.";
    cfg.token_budget = 120;
    const auto p = assemble_prompt(cfg, {}, "query", ranked(ids), h);
    EXPECT_LE(word_count(p.text), 120u);
    EXPECT_GE(p.candidate_ids.size(), kMinPromptCandidates);
    EXPECT_LT(p.candidate_ids.size(), 50u);
    EXPECT_EQ(p.candidate_ids.size() + p.dropped_ids.size(), 50u);
    EXPECT_EQ(p.dropped_ids.front(), ids[p.candidate_ids.size()]);
    // The contexts line only describes candidates that survived.
    const auto last_shown = p.candidate_ids.back();
    EXPECT_NE(p.text.find("candidate name " + last_shown + " isA"), std::string::npos);
    EXPECT_EQ(p.text.find("candidate name " + p.dropped_ids.front()), std::string::npos);

    // One more word than the budget allows keeps exactly the previous length.
    cfg.token_budget = static_cast<std::size_t>(word_count(p.text));
    EXPECT_EQ(assemble_prompt(cfg, {}, "query", ranked(ids), h).candidate_ids.size(), p.candidate_ids.size());

    cfg.token_budget = 10;
    EXPECT_THROW(assemble_prompt(cfg, {}, "query", ranked(ids), h), PromptBudgetError);
}

TEST(ParseResponse, InOrder) {
    const auto h = abc();
    const auto r = parse_response("Answer: A; B; C", ranked({"ta", "tb", "tc"}), h);
    EXPECT_EQ(r.ordered, (Ids{"ta", "tb", "tc"}));
    EXPECT_TRUE(r.unmatched_outputs.empty());
    EXPECT_TRUE(r.appended.empty());
}

TEST(ParseResponse, UnmatchedAndAppended) {
    const auto r = parse_response("B; D; A", ranked({"ta", "tb", "tc"}), abc());
    EXPECT_EQ(r.ordered, (Ids{"tb", "ta", "tc"}));
    EXPECT_EQ(r.unmatched_outputs, Ids{"D"});
    EXPECT_EQ(r.appended, Ids{"tc"});
}

TEST(ParseResponse, EmptyFallsBackToRetrieverOrder) {
    const auto r = parse_response("", ranked({"tc", "ta", "tb"}), abc());
    EXPECT_EQ(r.ordered, (Ids{"tc", "ta", "tb"}));
    EXPECT_EQ(r.appended, (Ids{"tc", "ta", "tb"}));
}

TEST(ParseResponse, MatchingStages) {
    const auto h = typhus();
    const auto cands = ranked({"t1", "t2", "t3"});
    // Case-folded exact name, synonym, then fuzzy; newline separators; text after the last Answer:.
    const auto r = parse_response("Query: x\nAnswer: junk\nAnswer: LOUSE-BORNE TYPHUS\nRickettsial Disease.\ntyphus",
                                  cands, h);
    EXPECT_EQ(r.ordered, (Ids{"t2", "t3", "t1"}));
    EXPECT_TRUE(r.unmatched_outputs.empty());

    // Duplicate mentions keep the first; "typhus fever" overlaps both typhus terms, ties go to rank order.
    const auto dup = parse_response("typhus fever; typhus; epidemic typhus", cands, h);
    EXPECT_EQ(dup.ordered, (Ids{"t1", "t2", "t3"}));
    // Below the 0.5 overlap threshold nothing matches.
    const auto weak = parse_response("acute rickettsial fever", cands, h);
    EXPECT_EQ(weak.unmatched_outputs, Ids{"acute rickettsial fever"});
}

TEST(ParseResponse, RepeatedNamesMapToDistinctCandidates) {
    const auto h = Hierarchy::build({{"x1", "fever", {}, std::nullopt}, {"x2", "fever", {}, std::nullopt},
                                     {"x3", "rash", {}, std::nullopt}},
                                    {});
    const auto r = parse_response("rash; fever; fever", ranked({"x1", "x2", "x3"}), h);
    EXPECT_EQ(r.ordered, (Ids{"x3", "x1", "x2"}));
}

TEST(ParseResponse, RoundTripAndPermutationProperties) {
    std::mt19937_64 rng(23);
    const std::vector<std::string> words{"acute", "chronic", "fever", "typhus", "viral", "renal", "cancer", "b-cell"};
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<Term> terms;
        std::set<std::string> names;
        while (terms.size() < 2 + static_cast<std::size_t>(trial % 9)) {
            std::string name = words[rng() % words.size()];
            for (std::size_t n = rng() % 3; n > 0; --n) name += " " + words[rng() % words.size()];
            if (!names.insert(name).second) continue;
            terms.push_back({"t" + std::to_string(terms.size()), name, {}, std::nullopt});
        }
        const auto h = Hierarchy::build(terms, {});
        Ids ids;
        for (const auto& t : terms) ids.push_back(t.id);
        std::shuffle(ids.begin(), ids.end(), rng);
        const auto cands = ranked(ids);

        Ids shuffled = ids;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        std::string joined;
        for (const auto& id : shuffled) joined += (joined.empty() ? "" : "; ") + h.term(id).name;
        EXPECT_EQ(parse_response(joined, cands, h).ordered, shuffled);

        std::string noise;
        for (int n = 0; n < 6; ++n) noise += words[rng() % words.size()] + (rng() % 2 ? "; " : " ");
        auto out = parse_response(noise, cands, h).ordered;
        std::sort(out.begin(), out.end());
        Ids sorted = ids;
        std::sort(sorted.begin(), sorted.end());
        EXPECT_EQ(out, sorted);
    }
}

TEST(DisplayName, StripsSeparators) {
    EXPECT_EQ(display_name("a;b\nc"), "a b c");
    EXPECT_EQ(display_name(" plain "), "plain");
}
