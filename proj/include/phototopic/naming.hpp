#pragma once

#include <array>
#include <cstddef>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "phototopic/corpus.hpp"
#include "phototopic/defaults.hpp"
#include "phototopic/plsa.hpp"
#include "phototopic/taxonomy.hpp"

namespace phototopic {

inline constexpr const char* kNullTopicName = "Null";

struct NameAnchor {
  std::string token;
  std::optional<std::string> synset;  // pins the sense when set
};

// A predefined topic name and the two words that define it.
struct TopicNameDef {
  std::string name;
  std::array<NameAnchor, 2> anchors;
};

// The eight shipped names (data/topic_names.tsv).
const std::vector<TopicNameDef>& default_topic_names();

// TSV: display-name<TAB>anchor1[:synset]<TAB>anchor2[:synset]; '#' comments.
std::vector<TopicNameDef> parse_topic_names(std::istream& in);
std::vector<TopicNameDef> read_topic_names_file(const std::string& path);

// score[j] = sum over tags i and anchors a of Lin(tag_i, anchor_a of def j).
std::vector<double> score_topic_names(std::span<const std::string> top_tags,
                                      std::span<const TopicNameDef> defs,
                                      const TaxonomyGraph& graph);

struct TopicNaming {
  std::string name;            // a def's name, or "Null" for all-zero scores
  std::optional<std::size_t> def_index;
  std::vector<double> scores;  // one per def
  std::vector<std::string> top_words;
  bool duplicate = false;      // another topic got the same name
};

struct NamingResult {
  std::vector<std::string> names;  // def names, in def order
  std::vector<TopicNaming> topics;  // one per model topic

  const std::string& name_of(std::size_t topic) const { return topics.at(topic).name; }
};

enum class NamingMode {
  kIndependent,  // per-topic argmax, duplicates allowed and flagged
  kDistinct,     // maximum-total-score one-to-one matching
};

// Turns a topics x defs score matrix into names. Lowest def index wins ties
// in independent mode.
NamingResult assign_names(const std::vector<std::vector<double>>& scores,
                          std::span<const TopicNameDef> defs,
                          NamingMode mode = NamingMode::kIndependent);

NamingResult name_topics(const PlsaModel& model, const Vocabulary& vocab,
                         std::span<const TopicNameDef> defs,
                         const TaxonomyGraph& graph,
                         std::size_t top_n = defaults::kTopWords,
                         NamingMode mode = NamingMode::kIndependent);

void write_naming(std::ostream& out, const NamingResult& naming);
NamingResult read_naming(std::istream& in);
NamingResult read_naming_file(const std::string& path);

}  // namespace phototopic
