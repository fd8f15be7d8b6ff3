#include <gtest/gtest.h>

#include "hiprompt/text.hpp"

using namespace hiprompt;
using Tokens = std::vector<std::string>;

TEST(Tokenize, SplitsOnPunctuationAndFoldsCase) {
    EXPECT_EQ(tokenize("Typhus, Epidemic Louse-Borne"), (Tokens{"typhus", "epidemic", "louse", "borne"}));
    EXPECT_EQ(tokenize("immune-system disease"), (Tokens{"immune", "system", "disease"}));
    EXPECT_EQ(tokenize(""), Tokens{});
    EXPECT_EQ(tokenize("  ;;  "), Tokens{});
}

TEST(Tokenize, KeepsDigitsAndNonAsciiLetters) {
    EXPECT_EQ(tokenize("Type 2 Diabetes"), (Tokens{"type", "2", "diabetes"}));
    EXPECT_EQ(tokenize("Ménière’s DISEASE"), (Tokens{"ménière", "s", "disease"}));
    EXPECT_EQ(tokenize("α-Thalassemia"), (Tokens{"α", "thalassemia"}));
}

TEST(Casefold, SimpleFoldingAcrossScripts) {
    EXPECT_EQ(casefold("ÉCOLE"), "école");
    EXPECT_EQ(casefold("ΣΊΣΥΦΟΣ"), casefold("σίσυφος"));
    EXPECT_EQ(casefold("ТИФ"), "тиф");
    EXPECT_EQ(casefold("Łódź"), "łódź");
    // Simple folding is one-to-one: sharp s is left alone.
    EXPECT_EQ(casefold("Straße"), "straße");
}

TEST(Utf8, MalformedBytesBecomeReplacement) {
    const std::string bad = std::string("a") + static_cast<char>(0xC3);
    EXPECT_EQ(utf8_decode(bad), (std::u32string{U'a', U'�'}));
    EXPECT_EQ(utf8_encode(utf8_decode("héllo wörld")), "héllo wörld");
}

TEST(TextHelpers, TrimSplitWordCount) {
    EXPECT_EQ(trim("  a b \n"), "a b");
    EXPECT_EQ(trim("   "), "");
    EXPECT_EQ(split("a;;b", ';'), (Tokens{"a", "", "b"}));
    EXPECT_EQ(word_count("Query: golden retriever\nAnswer:"), 4u);
    EXPECT_EQ(word_count(""), 0u);
}
