#include <fstream>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "secretsweep/error.hpp"
#include "secretsweep/text.hpp"

using namespace secretsweep;

TEST(HtmlToText, Examples) {
  EXPECT_EQ(html_to_text("<p>a</p><p>b</p>"), "a\nb");
  EXPECT_EQ(html_to_text("a &amp; b"), "a & b");
  EXPECT_EQ(html_to_text(""), "");
  EXPECT_EQ(html_to_text("<div>x &lt;y&gt; &quot;z&quot; &apos;w&apos; &#65;</div>"), "x <y> \"z\" 'w' A");
  EXPECT_EQ(html_to_text("<p>a</p>\n\n\n<p>b"), "a\nb");
}

TEST(HtmlToText, MalformedIsBestEffort) {
  EXPECT_NO_THROW(html_to_text("<p <b>unterminated"));
  EXPECT_NO_THROW(html_to_text("&nosuch; & <<>>"));
}

TEST(MaskTechnical, Examples) {
  EXPECT_EQ(mask_technical("visit https://a.b/c now"), "visit urltok now");
  EXPECT_EQ(mask_technical("host 10.0.0.1"), "host iptok");
  EXPECT_EQ(mask_technical("id deadbeefdeadbeef01"), "id hextok");
  EXPECT_EQ(mask_technical("mail ops@example.com"), "mail emailtok");
  EXPECT_EQ(mask_technical("wait 30 ms"), "wait numtok ms");
}

TEST(MaskTechnical, Idempotent) {
  std::mt19937_64 rng(2);
  const std::vector<std::string> parts = {"https://x.io/p?q=1", "a@b.co",   "10.1.2.3", "deadbeefdeadbeef",
                                          "42",                 "password", "token",    "x1"};
  std::uniform_int_distribution<std::size_t> pick(0, parts.size() - 1);
  for (int i = 0; i < 300; ++i) {
    std::string s;
    for (int k = 0; k < 6; ++k) s += parts[pick(rng)] + (k % 2 ? " " : ", ");
    const auto once = mask_technical(s);
    EXPECT_EQ(mask_technical(once), once) << s;
  }
}

TEST(PorterStemmer, ReferenceSample) {
  std::ifstream in(std::string(TEST_DATA_DIR) + "/porter_sample.tsv");
  ASSERT_TRUE(in);
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    std::istringstream fields(line);
    std::string word;
    std::string stem;
    fields >> word >> stem;
    if (word.empty()) continue;
    EXPECT_EQ(porter_stem(word), stem) << word;
    ++n;
  }
  EXPECT_EQ(n, 100);
}

TEST(NormalizeRow, Examples) {
  EXPECT_EQ(normalize_row("The passwords!"), (TokenList{"password"}));
  EXPECT_EQ(normalize_row("running and jumping"), (TokenList{"run", "jump"}));
  EXPECT_TRUE(normalize_row("the a an").empty());
}

TEST(NormalizeRow, OutputAlphabetAndNoStopwords) {
  std::mt19937_64 rng(9);
  const std::string alphabet = "abcXYZ019 _-!?.,:;/@&<>\"'THE the and";
  std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
  for (int i = 0; i < 300; ++i) {
    std::string s(40, ' ');
    for (auto& c : s) c = alphabet[pick(rng)];
    for (const auto& t : normalize_row(s)) {
      EXPECT_FALSE(t.empty());
      for (char c : t) EXPECT_TRUE((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_') << t;
      EXPECT_FALSE(default_stopwords().contains(t)) << t;
    }
  }
}

TEST(Stopwords, LoadFromFile) {
  fixtures::TempDir dir;
  fixtures::write_file(dir / "stop.txt", "# comment\nFoo\n\n  bar  \n");
  const auto words = load_stopwords(dir / "stop.txt");
  EXPECT_EQ(words, (StopwordSet{"bar", "foo"}));
  EXPECT_THROW(load_stopwords(dir / "missing.txt"), IoError);
  EXPECT_GE(default_stopwords().size(), 100u);
}

TEST(PageToRows, Examples) {
  Page page{"p1", "t", "<p>a</p>\n<p></p><p>b</p>", std::nullopt};
  const auto rows = page_to_rows(page);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].line_number, 1u);
  EXPECT_EQ(rows[1].line_number, 2u);
  EXPECT_EQ(rows[1].page_id, "p1");
  EXPECT_TRUE(page_to_rows(Page{"p2", "t", "", std::nullopt}).empty());
}

TEST(PageToRows, PlantedLineKeptVerbatim) {
  Page page{"p1", "t", "<h1>Notes</h1><p>intro</p><p>password = Xk9mQ2vL</p>", std::nullopt};
  const auto rows = page_to_rows(page);
  bool found = false;
  for (const auto& r : rows) found = found || r.raw == "password = Xk9mQ2vL";
  EXPECT_TRUE(found);
}

TEST(PageToRows, RowCountEqualsNonBlankLines) {
  const auto fixture = fixtures::make_docs_fixture(1, 5, 2);
  for (const auto& page : fixture.pages) {
    const auto text = html_to_text(page.html);
    std::size_t lines = 0;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
      if (line.find_first_not_of(" \t\r") != std::string::npos) ++lines;
    }
    EXPECT_EQ(page_to_rows(page).size(), lines);
  }
}
