#pragma once

#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "phototopic/corpus.hpp"
#include "phototopic/defaults.hpp"
#include "phototopic/naming.hpp"
#include "phototopic/plsa.hpp"

namespace phototopic {

// Topic name -> allowed category names. Categories are stored normalized
// (lowercase, '_' as space).
class CategoryRegistry {
 public:
  void add(const std::string& topic, std::string_view category);

  bool contains(const std::string& topic, std::string_view category) const;
  bool has_topic(const std::string& topic) const { return by_topic_.count(topic) != 0; }
  // Empty when the topic is unknown. Order of first insertion.
  const std::vector<std::string>& categories(const std::string& topic) const;
  std::vector<std::string> topics() const;
  std::size_t num_categories() const;

  static std::string normalize(std::string_view category);

 private:
  std::map<std::string, std::vector<std::string>> by_topic_;
};

// TSV: topic<TAB>category; '#' comments and blank lines skipped.
CategoryRegistry parse_category_registry(std::istream& in);
CategoryRegistry read_category_registry_file(const std::string& path);
// The shipped registry (data/category_registry.tsv).
const CategoryRegistry& default_category_registry();

struct CategoryScore {
  std::string topic;
  std::string category;  // normalized
  double score = 0.0;
};

// Output of an external per-topic image classifier.
struct CategoryScores {
  std::map<std::string, std::vector<CategoryScore>> by_image;
  std::string provenance;

  bool empty() const noexcept { return by_image.empty(); }
};

// JSON lines {"image_id","topic","category","score"} with an optional
// "provenance" string. Unknown (topic, category) pairs are collected and
// reported together in one ValidationError.
CategoryScores load_category_scores(std::istream& in, const CategoryRegistry& registry);
CategoryScores read_category_scores_file(const std::string& path,
                                         const CategoryRegistry& registry);

struct ImageEntry {
  std::string image_id;
  std::string topic;  // a topic name, or "Null"
  std::optional<std::size_t> topic_index;
  std::vector<double> mixture;
  double max_prob = 0.0;
  std::optional<std::string> category;
  double category_score = 0.0;
};

inline constexpr const char* kUncategorized = "_uncategorized";

struct OrganizedCollection {
  std::string collection_id;
  std::string model_hash;
  std::vector<ImageEntry> images;  // sorted by image_id
  // topic -> category -> image ids; images without a category are listed
  // under kUncategorized.
  std::map<std::string, std::map<std::string, std::vector<std::string>>> index;

  std::size_t num_null() const;
  // Fraction of images with a non-Null topic; 0 for an empty collection.
  double coverage() const;
};

struct OrganizeOptions {
  double threshold = defaults::kNullThreshold;
  Weighting weighting = Weighting::kBinary;
  FoldInOptions fold_in;
  unsigned threads = 1;
  // Overrides the collection id taken from the records.
  std::optional<std::string> collection_id;
};

// fold_in -> assign_topic -> name, then the best same-topic category from
// `scores`. Throws ValidationError when the vocabulary does not match the
// model, the naming does not match the model, or image ids repeat.
OrganizedCollection organize_collection(std::span<const TagRecord> records,
                                        const PlsaModel& model, const Vocabulary& vocab,
                                        const NamingResult& naming,
                                        const OrganizeOptions& options = {},
                                        const CategoryScores* scores = nullptr);

// Deterministic JSON (sorted keys, images sorted by id). Returns bytes written.
std::size_t emit_manifest(const OrganizedCollection& collection, std::ostream& sink);
std::string manifest_string(const OrganizedCollection& collection);

struct Endpoint {
  std::string base_url;  // scheme://host[:port]
  std::string path = "/tags";
  std::string api_key;   // sent as the Authorization header when non-empty
  std::string collection_id;
  int timeout_seconds = 10;
};

struct FetchFailure {
  std::string image_id;
  int status = 0;  // HTTP status, 0 for a transport failure
  std::string message;
};

struct FetchResult {
  std::vector<TagRecord> records;
  std::vector<FetchFailure> failures;
};

// GET <path>?image_id=<id> for every id. Accepts {"tags":[{"tag","confidence"}]}
// or the auto-tagging service shape {"result":{"tags":[{"confidence":<0..100>,
// "tag":{"en":...}}]}}. Throws TransportError if the endpoint cannot be
// reached at all; later failures are reported per id.
FetchResult fetch_tags(const Endpoint& endpoint, std::span<const std::string> image_ids);

}  // namespace phototopic
