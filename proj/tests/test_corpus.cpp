#include <doctest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "phototopic/corpus.hpp"
#include "phototopic/error.hpp"

using namespace phototopic;

namespace {

std::vector<TagRecord> parse(const std::string& text) {
  std::istringstream in(text);
  return parse_tag_records(in);
}

TagRecord rec(std::string id, std::string coll, std::vector<std::string> tags) {
  TagRecord r{std::move(id), std::move(coll), {}};
  for (auto& t : tags) r.tags.push_back({std::move(t), 1.0});
  return r;
}

}  // namespace

TEST_CASE("tag records are lowercased") {
  const auto r = parse(R"({"image_id":"a","collection_id":"u1","tags":[{"tag":"Dog","confidence":0.9}]})");
  REQUIRE(r.size() == 1);
  CHECK(r[0] == TagRecord{"a", "u1", {{"dog", 0.9}}});
}

TEST_CASE("empty stream gives no records") {
  CHECK(parse("").empty());
  CHECK(parse("\n  \n").empty());
}

TEST_CASE("duplicate tags merge to the max confidence") {
  const auto r = parse(
      R"({"image_id":"a","collection_id":"u","tags":[{"tag":"dog","confidence":0.4},{"tag":"cat","confidence":0.2},{"tag":"DOG","confidence":0.9}]})");
  REQUIRE(r[0].tags.size() == 2);
  CHECK(r[0].tags[0] == Tag{"dog", 0.9});
  CHECK(r[0].tags[1] == Tag{"cat", 0.2});
}

TEST_CASE("record parse errors") {
  SUBCASE("malformed JSON names the line") {
    try {
      parse("{\"image_id\":\"a\",\"tags\":[]}\n{oops");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 2);
    }
  }
  SUBCASE("missing tags") { CHECK_THROWS_AS(parse(R"({"image_id":"a"})"), ParseError); }
  SUBCASE("confidence out of range") {
    CHECK_THROWS_AS(parse(R"({"image_id":"a","tags":[{"tag":"x","confidence":1.5}]})"),
                    ValidationError);
    CHECK_THROWS_AS(parse(R"({"image_id":"a","tags":[{"tag":"x","confidence":-0.1}]})"),
                    ValidationError);
  }
  SUBCASE("empty image id") {
    CHECK_THROWS_AS(parse(R"({"image_id":"","tags":[]})"), ValidationError);
  }
}

TEST_CASE("records round-trip through the writer") {
  const auto pc = fixtures::planted_corpus(3, 20);
  std::ostringstream out;
  write_tag_records(out, pc.records);
  CHECK(parse(out.str()) == pc.records);
}

TEST_CASE("vocabulary thresholds") {
  std::vector<TagRecord> records;
  // cat: 6 uses over 3 collections, dog: 7 over 2, rarebird: 2 over 1.
  for (int i = 0; i < 6; ++i) records.push_back(rec("c" + std::to_string(i), "u" + std::to_string(i % 3), {"cat"}));
  for (int i = 0; i < 7; ++i) records.push_back(rec("d" + std::to_string(i), "u" + std::to_string(i % 2), {"dog"}));
  for (int i = 0; i < 2; ++i) records.push_back(rec("r" + std::to_string(i), "u0", {"rarebird"}));
  const Vocabulary v = build_vocabulary(records, {5, 2});
  CHECK(v.words() == std::vector<std::string>{"cat", "dog"});
  CHECK(v.index_of("dog") == 1);
  CHECK(v.index_of("rarebird") == Vocabulary::kNotFound);

  SUBCASE("count must exceed min_count") {
    CHECK(build_vocabulary(records, {6, 1}).words() == std::vector<std::string>{"dog"});
  }
  SUBCASE("collections are required too") {
    CHECK(build_vocabulary(records, {1, 3}).words() == std::vector<std::string>{"cat"});
  }
  SUBCASE("all below threshold") { CHECK(build_vocabulary(records, {100, 1}).size() == 0); }
  SUBCASE("bad thresholds") {
    CHECK_THROWS_AS(build_vocabulary(records, {0, 1}), InvalidArgument);
    CHECK_THROWS_AS(build_vocabulary(records, {1, 0}), InvalidArgument);
  }
}

TEST_CASE("vocabulary defaults") {
  VocabularyOptions o;
  CHECK(o.min_count == 5);
  CHECK(o.min_collections == 2);
}

TEST_CASE("vocabulary is independent of record order") {
  auto pc = fixtures::planted_corpus(11, 120);
  const Vocabulary a = build_vocabulary(pc.records, {3, 2});
  std::mt19937_64 gen(5);
  for (int rep = 0; rep < 5; ++rep) {
    std::shuffle(pc.records.begin(), pc.records.end(), gen);
    const Vocabulary b = build_vocabulary(pc.records, {3, 2});
    CHECK(a == b);
    CHECK(a.hash() == b.hash());
  }
  CHECK(std::is_sorted(a.words().begin(), a.words().end()));
}

TEST_CASE("vocabulary file round trip and hash") {
  const Vocabulary v({"b", "a", "c"});
  std::ostringstream out;
  write_vocabulary(out, v);
  CHECK(out.str() == "b\na\nc\n");
  std::istringstream in(out.str());
  const Vocabulary back = read_vocabulary(in);
  CHECK(back == v);
  CHECK(back.hash() == v.hash());
  CHECK(v.hash().size() == 64);
  CHECK(Vocabulary({"a", "b", "c"}).hash() != v.hash());
  CHECK_THROWS_AS(Vocabulary({"a", "a"}), ValidationError);
}

TEST_CASE("cooccurrence weighting") {
  const std::vector<TagRecord> r{{"a", "u", {{"dog", 0.9}}}};
  const Vocabulary v({"dog"});
  const auto bin = build_cooccurrence(r, v, Weighting::kBinary);
  CHECK(bin.num_words() == 1);
  CHECK(bin.num_docs() == 1);
  CHECK(bin.at(0, 0) == 1.0);
  CHECK(build_cooccurrence(r, v, Weighting::kConfidence).at(0, 0) == 0.9);
}

TEST_CASE("out-of-vocabulary documents stay as empty columns") {
  const std::vector<TagRecord> r{{"a", "u", {{"zebra", 0.9}}}};
  const auto x = build_cooccurrence(r, Vocabulary({"dog"}));
  CHECK(x.num_docs() == 1);
  CHECK(x.column(0).empty());
  CHECK(x.doc_ids() == std::vector<std::string>{"a"});
}

TEST_CASE("empty vocabulary with records is rejected") {
  const std::vector<TagRecord> r{{"a", "u", {{"zebra", 0.9}}}};
  CHECK_THROWS_AS(build_cooccurrence(r, Vocabulary()), InvalidArgument);
  CHECK(build_cooccurrence({}, Vocabulary()).num_docs() == 0);
}

TEST_CASE("binary column sums count in-vocabulary tags") {
  const auto pc = fixtures::planted_corpus(2, 60);
  const Vocabulary v = build_vocabulary(pc.records, {2, 2});
  const auto x = build_cooccurrence(pc.records, v);
  for (std::size_t d = 0; d < x.num_docs(); ++d) {
    std::size_t in_vocab = 0;
    for (const Tag& t : pc.records[d].tags) in_vocab += v.contains(t.token);
    CHECK(x.column_sum(d) == static_cast<double>(in_vocab));
  }
}

TEST_CASE("parse -> cooccurrence -> serialize -> parse is exact") {
  const auto pc = fixtures::planted_corpus(9, 50);
  std::ostringstream rec_out;
  write_tag_records(rec_out, pc.records);
  const auto records = parse(rec_out.str());
  const Vocabulary v = fixtures::vocabulary_of(pc);
  for (Weighting w : {Weighting::kBinary, Weighting::kConfidence}) {
    const auto x = build_cooccurrence(records, v, w);
    std::ostringstream out;
    write_cooccurrence(out, x);
    std::istringstream in(out.str());
    const auto back = read_cooccurrence(in);
    CHECK(back == x);
    std::ostringstream again;
    write_cooccurrence(again, back);
    CHECK(again.str() == out.str());
  }
}

TEST_CASE("weighting names") {
  CHECK(parse_weighting("binary") == Weighting::kBinary);
  CHECK(parse_weighting("confidence") == Weighting::kConfidence);
  CHECK(to_string(Weighting::kConfidence) == "confidence");
  CHECK_THROWS_AS(parse_weighting("tfidf"), InvalidArgument);
}
