#include "swrm/lexicon.h"

#include <gtest/gtest.h>

#include <vector>

#include "oracles.h"
#include "swrm/errors.h"

namespace swrm {
namespace {

using testing::TempDir;

TEST(LoadLexicon, TabSeparatedEntries) {
  TempDir dir;
  const auto p = dir.write("lex.tsv", "good\tpositive\nbad\tnegative\n");
  const std::vector<std::filesystem::path> paths = {p};
  const SentimentLexicon lex = load_lexicon(paths);
  EXPECT_EQ(lex.size(), 2u);
  EXPECT_EQ(lex.polarity_of("good"), Polarity::kPositive);
  EXPECT_EQ(lex.polarity_of("bad"), Polarity::kNegative);
}

TEST(LoadLexicon, LaterFileWinsAndConflictIsReported) {
  TempDir dir;
  const std::vector<std::filesystem::path> paths = {dir.write("a.tsv", "cheap\tpositive\n"),
                                                    dir.write("b.tsv", "cheap\tnegative\n")};
  std::vector<LexiconConflict> conflicts;
  const SentimentLexicon lex = load_lexicon(paths, &conflicts);
  EXPECT_EQ(lex.polarity_of("cheap"), Polarity::kNegative);
  ASSERT_EQ(conflicts.size(), 1u);
  EXPECT_EQ(conflicts[0].word, "cheap");
  EXPECT_EQ(conflicts[0].previous, Polarity::kPositive);
  EXPECT_EQ(conflicts[0].file, paths[1]);
}

TEST(LoadLexicon, NoEntriesIsError) {
  TempDir dir;
  const std::vector<std::filesystem::path> paths = {dir.write("e.tsv", "; only a comment\n\n")};
  EXPECT_THROW(load_lexicon(paths), LexiconError);
  const std::vector<std::filesystem::path> missing = {dir / "nope.tsv"};
  EXPECT_THROW(load_lexicon(missing), LexiconError);
}

TEST(LoadLexicon, BareWordsTakePolarityFromFileName) {
  TempDir dir;
  const std::vector<std::filesystem::path> paths = {
      dir.write("positive-words.txt", ";; header\ngreat\n"),
      dir.write("negative-words.txt", "awful\nfine\tpositive\n")};
  const SentimentLexicon lex = load_lexicon(paths);
  EXPECT_EQ(lex.polarity_of("great"), Polarity::kPositive);
  EXPECT_EQ(lex.polarity_of("awful"), Polarity::kNegative);
  EXPECT_EQ(lex.polarity_of("fine"), Polarity::kPositive);
  const std::vector<std::filesystem::path> unnamed = {dir.write("words.txt", "great\n")};
  EXPECT_THROW(load_lexicon(unnamed), LexiconError);
  const std::vector<std::filesystem::path> junk = {dir.write("j.tsv", "great\tmaybe\n")};
  EXPECT_THROW(load_lexicon(junk), LexiconError);
}

TEST(LoadLexicon, Idempotent) {
  TempDir dir;
  const std::vector<std::filesystem::path> paths = {dir.write("a.tsv", "Good\t+\nbad\t-1\n"),
                                                    dir.write("b.tsv", "nice\tpos\n")};
  EXPECT_EQ(load_lexicon(paths), load_lexicon(paths));
}

TEST(SaveLexicon, RoundTrip) {
  TempDir dir;
  const SentimentLexicon lex = SentimentLexicon::from_entries(
      {{"good", Polarity::kPositive}, {"upset", Polarity::kNegative}});
  save_lexicon(dir / "out.tsv", lex);
  const std::vector<std::filesystem::path> paths = {dir / "out.tsv"};
  EXPECT_EQ(load_lexicon(paths), lex);
}

TEST(PolarityOf, CaseAndPunctuation) {
  const SentimentLexicon lex = SentimentLexicon::from_entries(
      {{"upset", Polarity::kNegative}, {"cool", Polarity::kPositive}});
  EXPECT_EQ(lex.polarity_of("Upset"), Polarity::kNegative);
  EXPECT_EQ(lex.polarity_of("set"), std::nullopt);
  EXPECT_EQ(lex.polarity_of("cool,"), Polarity::kPositive);
  EXPECT_EQ(polarity_of(lex, "\"COOL!\""), Polarity::kPositive);
}

TEST(PolarityOf, WordPiecesAreNeverMembers) {
  SentimentLexicon lex;
  lex.insert("ing", Polarity::kPositive);
  EXPECT_TRUE(lex.contains("ing"));
  EXPECT_FALSE(lex.contains("##ing"));
  EXPECT_TRUE(is_subword_piece("##ing"));
  EXPECT_FALSE(is_subword_piece("ing"));
}

TEST(PolarityOf, InvariantUnderLowerCasing) {
  const SentimentLexicon lex = SentimentLexicon::from_entries(
      {{"great", Polarity::kPositive}, {"awful", Polarity::kNegative}});
  for (std::string w : {"GREAT", "Great", "gReAt", "AWFUL", "Awful.", "nothing", "Set"}) {
    std::string lower = w;
    for (char& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    EXPECT_EQ(lex.polarity_of(w), lex.polarity_of(lower)) << w;
  }
}

TEST(Polarity, Parsing) {
  for (const char* s : {"positive", "POS", "+", "+1", "1"}) {
    EXPECT_EQ(parse_polarity(s), Polarity::kPositive) << s;
  }
  for (const char* s : {"negative", "Neg", "-", "-1"}) {
    EXPECT_EQ(parse_polarity(s), Polarity::kNegative) << s;
  }
  EXPECT_EQ(parse_polarity("neutral"), std::nullopt);
  EXPECT_EQ(parse_polarity(to_string(Polarity::kNegative)), Polarity::kNegative);
}

TEST(Words, NormalizeAndPunctuation) {
  EXPECT_EQ(normalize_word("...Wow!!"), "wow");
  EXPECT_EQ(normalize_word("don't"), "don't");
  EXPECT_TRUE(is_punctuation_only("?!"));
  EXPECT_TRUE(is_punctuation_only(""));
  EXPECT_FALSE(is_punctuation_only("a."));
}

}  // namespace
}  // namespace swrm
