#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "phototopic/coherence.hpp"
#include "phototopic/error.hpp"

using namespace phototopic;

namespace {

CorpusStats stats_of(const std::string& text) {
  std::istringstream in(text);
  return build_corpus_stats(in);
}

// w1 in docs {1,2}, w2 in {2,3}, four documents.
const char* kFourDocs = "w1 x\nw1 w2\nw2\nx\n";

}  // namespace

TEST_CASE("corpus statistics") {
  const auto s = stats_of("a b\nb c\n");
  CHECK(s.num_docs() == 2);
  CHECK(s.df("a") == 1);
  CHECK(s.df("b") == 2);
  CHECK(s.joint_df("a", "b") == 1);
  CHECK(s.joint_df("b", "a") == 1);
  CHECK(s.joint_df("a", "c") == 0);
  CHECK(s.df("zzz") == 0);
  CHECK(stats_of("a a a\n").df("a") == 1);
  CHECK(stats_of("A a\n").df("a") == 1);
  const auto four = stats_of(kFourDocs);
  CHECK(four.df("w1") == 2);
  CHECK(four.df("w2") == 2);
  CHECK(four.joint_df("w1", "w2") == 1);
  CHECK_THROWS_AS(stats_of(""), ValidationError);
}

TEST_CASE("vocabulary filter bounds the counts") {
  std::istringstream in("a b c\nb c\n");
  const std::unordered_set<std::string> keep{"a", "b"};
  const auto s = build_corpus_stats(in, &keep);
  CHECK(s.df("c") == 0);
  CHECK(s.joint_df("a", "b") == 1);
  CHECK(s.num_docs() == 2);
}

TEST_CASE("stats cache round trip") {
  const auto s = stats_of("a b c\nb c\nc d a\n");
  std::ostringstream out;
  s.write(out);
  std::istringstream in(out.str());
  const auto back = CorpusStats::read(in);
  CHECK(back.num_docs() == 3);
  for (const char* a : {"a", "b", "c", "d"}) {
    CHECK(back.df(a) == s.df(a));
    for (const char* b : {"a", "b", "c", "d"}) CHECK(back.joint_df(a, b) == s.joint_df(a, b));
  }
  std::ostringstream again;
  back.write(again);
  CHECK(again.str() == out.str());
  std::istringstream bad("nope\n");
  CHECK_THROWS_AS(CorpusStats::read(bad), ParseError);
  std::istringstream inconsistent("phototopic-corpus-stats\t1\nD\t1\ndf\ta\t2\n");
  CHECK_THROWS_AS(CorpusStats::read(inconsistent), ValidationError);
}

TEST_CASE("worked examples") {
  const auto s = stats_of(kFourDocs);
  const std::vector<std::string> w{"w1", "w2"};
  CHECK(std::abs(uci_score(w, s).value) <= 1e-9);
  CHECK(std::abs(umass_score(w, s).value - std::log(0.5)) <= 1e-9);
  const auto always = stats_of("a b\na b\n");
  const std::vector<std::string> ab{"a", "b"};
  CHECK(std::abs(uci_score(ab, always).value) <= 1e-9);
  CHECK(std::abs(umass_score(ab, always).value) <= 1e-9);
  CHECK(avg_npmi(ab, always).value == 1.0);
}

TEST_CASE("npmi of independent and perfectly paired words") {
  // a in half the docs, b in half, together in a quarter: independent.
  const auto s = stats_of("a b\na\nb\nx\n");
  const std::vector<std::string> ab{"a", "b"};
  CHECK(std::abs(avg_npmi(ab, s).value) <= 1e-9);
  const auto rare = stats_of("a b\nx\nx\nx\n");
  CHECK(avg_npmi(ab, rare).value == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("zero marginals are smoothed and flagged") {
  const auto s = stats_of(kFourDocs);
  const std::vector<std::string> w{"w1", "ghost"};
  const auto u = uci_score(w, s);
  CHECK(std::isfinite(u.value));
  CHECK(u.flagged_pairs == 1);
  const auto m = umass_score(w, s);
  CHECK(std::isfinite(m.value));
  CHECK(m.flagged_pairs == 0);  // ghost sorts last, so it is never the conditioning word
  const std::vector<std::string> both{"ghost", "phantom"};
  const auto m2 = umass_score(both, s);
  CHECK(m2.flagged_pairs == 1);
  CHECK(m2.value == 0.0);
}

TEST_CASE("argument checks") {
  const auto s = stats_of(kFourDocs);
  const std::vector<std::string> one{"w1"};
  CHECK_THROWS_AS(uci_score(one, s), InvalidArgument);
  CHECK_THROWS_AS(umass_score(one, s), InvalidArgument);
  CHECK_THROWS_AS(avg_npmi(one, s), InvalidArgument);
  CHECK_THROWS_AS(CoherenceConfig({1, 1e-12}).validate(), InvalidArgument);
  CHECK(CoherenceConfig{}.top_n == 10);
  CHECK(CoherenceConfig{}.epsilon == 1e-12);
}

TEST_CASE("scores match the brute-force oracle and are order invariant") {
  std::mt19937_64 gen(123);
  const CoherenceConfig cfg;
  for (int t = 0; t < 40; ++t) {
    std::vector<std::string> vocab;
    const auto docs = fixtures::random_docs(gen, 10, 8, vocab);
    const auto s = stats_of(fixtures::docs_text(docs));
    std::vector<std::string> words = vocab;
    if (t % 3 == 0) words.push_back("unseen");
    const double u = uci_score(words, s, cfg).value;
    const double m = umass_score(words, s, cfg).value;
    const double n = avg_npmi(words, s, cfg).value;
    CHECK(std::abs(u - oracle::uci(words, docs, cfg.epsilon)) <= 1e-12);
    CHECK(std::abs(m - oracle::umass(words, docs, cfg.epsilon)) <= 1e-12);
    CHECK(std::abs(n - oracle::npmi(words, docs, cfg.epsilon)) <= 1e-12);
    std::shuffle(words.begin(), words.end(), gen);
    CHECK(uci_score(words, s, cfg).value == u);
    CHECK(umass_score(words, s, cfg).value == m);
    CHECK(avg_npmi(words, s, cfg).value == n);
  }
}
