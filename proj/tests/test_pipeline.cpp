#include <doctest.h>

#include <set>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "fixtures.hpp"
#include "phototopic/diagnostics.hpp"
#include "phototopic/error.hpp"
#include "phototopic/pipeline.hpp"

using namespace phototopic;
using nlohmann::json;

namespace {

CategoryScores scores_of(const std::string& text,
                         const CategoryRegistry& reg = default_category_registry()) {
  std::istringstream in(text);
  return load_category_scores(in, reg);
}

struct Trained {
  fixtures::PlantedCorpus pc;
  Vocabulary vocab;
  PlsaModel model;
  NamingResult naming;
};

const Trained& trained() {
  static const Trained t = [] {
    Trained r;
    r.pc = fixtures::planted_corpus(4, 120);
    r.vocab = fixtures::vocabulary_of(r.pc);
    TrainConfig cfg;
    cfg.num_topics = 3;
    r.model = train(build_cooccurrence(r.pc.records, r.vocab), cfg, r.vocab.hash());
    r.naming = assign_names({{1, 0, 0}, {0, 1, 0}, {0, 0, 0}},
                            std::vector<TopicNameDef>{
                                {"Food and Drinks", {NameAnchor{"food", {}}, NameAnchor{"drinks", {}}}},
                                {"Pets and Animals", {NameAnchor{"pets", {}}, NameAnchor{"animals", {}}}},
                                {"Text and Visual", {NameAnchor{"text", {}}, NameAnchor{"visual", {}}}}});
    return r;
  }();
  return t;
}

// Stub tagging service on an ephemeral port.
class StubServer {
 public:
  StubServer() {
    server_.Get("/tags", [](const httplib::Request& req, httplib::Response& res) {
      const std::string id = req.get_param_value("image_id");
      if (id == "boom") {
        res.status = 500;
        res.set_content("oops", "text/plain");
      } else if (id == "imagga") {
        res.set_content(
            R"({"result":{"tags":[{"confidence":87.5,"tag":{"en":"Dog"}},{"confidence":12,"tag":{"en":"grass"}}]}})",
            "application/json");
      } else if (id == "garbage") {
        res.set_content("not json", "application/json");
      } else {
        const json body = {{"tags", {{{"tag", "pizza"}, {"confidence", 0.9}},
                                     {{"tag", id}, {"confidence", 0.5}}}}};
        res.set_content(body.dump(), "application/json");
      }
      last_auth = req.get_header_value("Authorization");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~StubServer() {
    server_.stop();
    thread_.join();
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }
  static inline std::string last_auth;

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

}  // namespace

TEST_CASE("shipped category registry") {
  const auto& reg = default_category_registry();
  CHECK(reg.topics().size() == 8);
  CHECK(reg.categories("Food and Drinks").size() == 101);
  CHECK(reg.categories("Sport and Adventure").size() == 40);
  CHECK(reg.categories("Text and Visual").size() == 11);
  CHECK(reg.contains("Text and Visual", "screenshot"));
  CHECK(reg.contains("Food and Drinks", "Apple_Pie"));
  CHECK_FALSE(reg.contains("Food and Drinks", "tiger"));
  for (const auto& def : default_topic_names()) CHECK(reg.has_topic(def.name));
}

TEST_CASE("registry parsing") {
  std::istringstream in("# x\nA\tfoo_bar\nA\tFOO BAR\nB\tbaz\n");
  const auto reg = parse_category_registry(in);
  CHECK(reg.categories("A") == std::vector<std::string>{"foo bar"});
  CHECK(reg.num_categories() == 2);
  std::istringstream bad("A\n");
  CHECK_THROWS_AS(parse_category_registry(bad), ParseError);
}

TEST_CASE("category scores") {
  SUBCASE("a supplementary-list category is accepted") {
    const auto s = scores_of(R"({"image_id":"a","topic":"Text and Visual","category":"screenshot","score":0.7})");
    REQUIRE(s.by_image.count("a"));
    CHECK(s.by_image.at("a")[0].category == "screenshot");
  }
  SUBCASE("unknown categories are listed together") {
    try {
      scores_of(
          "{\"image_id\":\"a\",\"topic\":\"Food and Drinks\",\"category\":\"tiger\",\"score\":0.5}\n"
          "{\"image_id\":\"b\",\"topic\":\"Food and Drinks\",\"category\":\"pizza\",\"score\":0.5}\n"
          "{\"image_id\":\"c\",\"topic\":\"Nope\",\"category\":\"pizza\",\"score\":0.5}\n");
      FAIL("expected a ValidationError");
    } catch (const ValidationError& e) {
      const std::string msg = e.what();
      CHECK(msg.find("tiger") != std::string::npos);
      CHECK(msg.find("Nope") != std::string::npos);
      CHECK(msg.find("line 2") == std::string::npos);
    }
  }
  SUBCASE("empty stream") { CHECK(scores_of("").empty()); }
  SUBCASE("score range") {
    CHECK_THROWS_AS(scores_of(R"({"image_id":"a","topic":"Food and Drinks","category":"pizza","score":1.2})"),
                    ValidationError);
    CHECK_THROWS_AS(scores_of(R"({"image_id":"a","topic":"Food and Drinks","category":"pizza"})"),
                    ParseError);
  }
  SUBCASE("provenance") {
    const auto s = scores_of(
        R"({"image_id":"a","topic":"Food and Drinks","category":"pizza","score":0.2,"provenance":"cnn-v1"})");
    CHECK(s.provenance == "cnn-v1");
  }
}

TEST_CASE("categories follow the assigned topic") {
  // One-topic world where every image folds to (1,0).
  PlsaModel m = init_model(2, 2, 0);
  m.word_given_topic = {1, 0, 0, 1};
  const Vocabulary v({"x", "y"});
  m.vocab_hash = v.hash();
  const NamingResult names = assign_names(
      {{1, 0}, {0, 1}},
      std::vector<TopicNameDef>{{"Food and Drinks", {NameAnchor{"food", {}}, NameAnchor{"drinks", {}}}},
                                {"Pets and Animals", {NameAnchor{"pets", {}}, NameAnchor{"animals", {}}}}});
  const std::vector<TagRecord> records{{"img", "u", {{"x", 1.0}}}, {"other", "u", {{"x", 1.0}}}};
  const auto scores = scores_of(
      "{\"image_id\":\"img\",\"topic\":\"Food and Drinks\",\"category\":\"paella\",\"score\":0.8}\n"
      "{\"image_id\":\"img\",\"topic\":\"Pets and Animals\",\"category\":\"hare\",\"score\":0.9}\n"
      "{\"image_id\":\"img\",\"topic\":\"Food and Drinks\",\"category\":\"pizza\",\"score\":0.3}\n");
  const auto c = organize_collection(records, m, v, names, {}, &scores);
  REQUIRE(c.images.size() == 2);
  CHECK(c.images[0].image_id == "img");
  CHECK(c.images[0].topic == "Food and Drinks");
  CHECK(c.images[0].category == std::optional<std::string>("paella"));
  CHECK(c.images[0].category_score == 0.8);
  CHECK_FALSE(c.images[1].category.has_value());
  CHECK(c.index.at("Food and Drinks").at("paella") == std::vector<std::string>{"img"});
  CHECK(c.index.at("Food and Drinks").at(kUncategorized) == std::vector<std::string>{"other"});

  const auto plain = organize_collection(records, m, v, names);
  for (const auto& e : plain.images) CHECK_FALSE(e.category.has_value());
}

TEST_CASE("organize conserves images and reports coverage") {
  const auto& t = trained();
  OrganizeOptions opts;
  opts.threshold = 0.9;  // high enough that some images fall to Null
  const auto c = organize_collection(t.pc.records, t.model, t.vocab, t.naming, opts);
  CHECK(c.images.size() == t.pc.records.size());
  std::set<std::string> ids;
  std::size_t indexed = 0, nulls = 0;
  for (const auto& e : c.images) {
    ids.insert(e.image_id);
    if (!e.topic_index) {
      ++nulls;
      CHECK(e.topic == "Null");
      CHECK_FALSE(e.category.has_value());
    }
  }
  for (const auto& [topic, cats] : c.index)
    for (const auto& [cat, list] : cats) indexed += list.size();
  CHECK(ids.size() == c.images.size());
  CHECK(indexed == c.images.size());
  CHECK(c.num_null() == nulls);
  CHECK(c.coverage() == doctest::Approx(1.0 - static_cast<double>(nulls) / c.images.size()));
  CHECK(std::is_sorted(c.images.begin(), c.images.end(),
                       [](const ImageEntry& a, const ImageEntry& b) { return a.image_id < b.image_id; }));
}

TEST_CASE("organize is deterministic across thread counts") {
  const auto& t = trained();
  OrganizeOptions one;
  OrganizeOptions four;
  four.threads = 4;
  const auto a = manifest_string(organize_collection(t.pc.records, t.model, t.vocab, t.naming, one));
  const auto b = manifest_string(organize_collection(t.pc.records, t.model, t.vocab, t.naming, four));
  CHECK(a == b);
  auto shuffled = t.pc.records;
  std::reverse(shuffled.begin(), shuffled.end());
  CHECK(manifest_string(organize_collection(shuffled, t.model, t.vocab, t.naming, one)) == a);
}

TEST_CASE("organize rejects mismatches") {
  const auto& t = trained();
  const Vocabulary other({"a", "b"});
  CHECK_THROWS_AS(organize_collection(t.pc.records, t.model, other, t.naming), ValidationError);
  auto dup = t.pc.records;
  dup.push_back(dup.front());
  CHECK_THROWS_AS(organize_collection(dup, t.model, t.vocab, t.naming), ValidationError);
  NamingResult short_naming = t.naming;
  short_naming.topics.pop_back();
  CHECK_THROWS_AS(organize_collection(t.pc.records, t.model, t.vocab, short_naming), ValidationError);
}

TEST_CASE("manifest") {
  const auto& t = trained();
  SUBCASE("empty collection") {
    const auto c = organize_collection({}, t.model, t.vocab, t.naming);
    const json j = json::parse(manifest_string(c));
    CHECK(j["images"].empty());
    CHECK(j["index"].empty());
    CHECK(j["format"] == "phototopic-manifest");
  }
  SUBCASE("null image listed under Null without a category") {
    OrganizeOptions opts;
    opts.threshold = 1.5;
    const std::vector<TagRecord> one{t.pc.records.front()};
    const auto c = organize_collection(one, t.model, t.vocab, t.naming, opts);
    const json j = json::parse(manifest_string(c));
    CHECK(j["images"][0]["topic"] == "Null");
    CHECK(j["images"][0]["category"].is_null());
    CHECK(j["index"]["Null"][kUncategorized][0] == one[0].image_id);
    CHECK(j["coverage"] == 0.0);
  }
  SUBCASE("emitted twice is byte-identical") {
    const auto c = organize_collection(t.pc.records, t.model, t.vocab, t.naming);
    std::ostringstream a, b;
    const std::size_t n = emit_manifest(c, a);
    emit_manifest(c, b);
    CHECK(a.str() == b.str());
    CHECK(n == a.str().size());
    const json j = json::parse(a.str());
    CHECK(j["model_hash"].get<std::string>().size() == 64);
    CHECK(j["num_images"] == t.pc.records.size());
  }
  SUBCASE("write failure") {
    const auto c = organize_collection({}, t.model, t.vocab, t.naming);
    std::ostringstream bad;
    bad.setstate(std::ios::badbit);
    CHECK_THROWS_AS(emit_manifest(c, bad), IoError);
  }
}

TEST_CASE("fetch_tags against a stub service") {
  StubServer stub;
  Endpoint ep;
  ep.base_url = stub.url();
  ep.api_key = "Basic abc";
  ep.collection_id = "me";
  SUBCASE("one failing id out of three") {
    const std::vector<std::string> ids{"a", "boom", "c"};
    const auto r = fetch_tags(ep, ids);
    REQUIRE(r.records.size() == 2);
    REQUIRE(r.failures.size() == 1);
    CHECK(r.failures[0].image_id == "boom");
    CHECK(r.failures[0].status == 500);
    CHECK(r.records[0].image_id == "a");
    CHECK(r.records[0].collection_id == "me");
    CHECK(r.records[0].tags == std::vector<Tag>{{"pizza", 0.9}, {"a", 0.5}});
    CHECK(StubServer::last_auth == "Basic abc");
  }
  SUBCASE("auto-tagging response shape") {
    const std::vector<std::string> ids{"imagga", "garbage"};
    const auto r = fetch_tags(ep, ids);
    REQUIRE(r.records.size() == 1);
    CHECK(r.records[0].tags == std::vector<Tag>{{"dog", 0.875}, {"grass", 0.12}});
    REQUIRE(r.failures.size() == 1);
    CHECK(r.failures[0].image_id == "garbage");
  }
  SUBCASE("empty id list") {
    CHECK_THROWS_AS(fetch_tags(ep, std::vector<std::string>{}), InvalidArgument);
  }
}

TEST_CASE("fetch_tags with nothing listening") {
  // Bind then release a port so that nothing is listening on it.
  int port = 0;
  {
    httplib::Server s;
    port = s.bind_to_any_port("127.0.0.1");
  }
  Endpoint ep;
  ep.base_url = "http://127.0.0.1:" + std::to_string(port);
  ep.timeout_seconds = 2;
  const std::vector<std::string> ids{"a"};
  CHECK_THROWS_AS(fetch_tags(ep, ids), TransportError);
}
