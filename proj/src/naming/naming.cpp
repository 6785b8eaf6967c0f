#include "phototopic/naming.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include <json.hpp>

#include "../common/embedded_data.hpp"
#include "../common/text.hpp"
#include "phototopic/error.hpp"

namespace phototopic {

using nlohmann::json;

namespace {

NameAnchor parse_anchor(std::string_view field, std::size_t line_no) {
  field = detail::trim(field);
  NameAnchor a;
  const std::size_t colon = field.find(':');
  a.token = detail::to_lower(detail::trim(field.substr(0, colon)));
  if (colon != std::string_view::npos) {
    const std::string_view synset = detail::trim(field.substr(colon + 1));
    if (synset.empty()) throw ParseError("names: empty synset after ':'", line_no);
    a.synset = std::string(synset);
  }
  if (a.token.empty()) throw ParseError("names: empty anchor token", line_no);
  return a;
}

// Minimum-cost perfect matching on a square matrix (Hungarian algorithm,
// potentials formulation). Returns the column assigned to each row.
std::vector<std::size_t> min_cost_assignment(const std::vector<std::vector<double>>& cost) {
  const std::size_t n = cost.size();
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, kInf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> row_to_col(n);
  for (std::size_t j = 1; j <= n; ++j) row_to_col[p[j] - 1] = j - 1;
  return row_to_col;
}

std::size_t argmax_lowest(const std::vector<double>& row) {
  std::size_t best = 0;
  for (std::size_t j = 1; j < row.size(); ++j) {
    if (row[j] > row[best]) best = j;
  }
  return best;
}

bool all_zero(const std::vector<double>& row) {
  return std::all_of(row.begin(), row.end(), [](double s) { return !(s > 0.0); });
}

}  // namespace

const std::vector<TopicNameDef>& default_topic_names() {
  static const std::vector<TopicNameDef> defs = [] {
    std::istringstream in{std::string(detail::embedded_topic_names())};
    return parse_topic_names(in);
  }();
  return defs;
}

std::vector<TopicNameDef> parse_topic_names(std::istream& in) {
  std::vector<TopicNameDef> defs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view body = detail::chomp(line);
    if (detail::trim(body).empty() || body.front() == '#') continue;
    const auto fields = detail::split(body, '\t');
    if (fields.size() != 3) {
      throw ParseError("names: expected 'name<TAB>anchor1<TAB>anchor2'", line_no);
    }
    TopicNameDef def;
    def.name = std::string(detail::trim(fields[0]));
    if (def.name.empty()) throw ParseError("names: empty display name", line_no);
    if (def.name == kNullTopicName) {
      throw ParseError("names: 'Null' is reserved for unnamed topics", line_no);
    }
    def.anchors = {parse_anchor(fields[1], line_no), parse_anchor(fields[2], line_no)};
    defs.push_back(std::move(def));
  }
  if (in.bad()) throw IoError("read failure in names stream");
  return defs;
}

std::vector<TopicNameDef> read_topic_names_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open names file '" + path + "'");
  return parse_topic_names(in);
}

std::vector<double> score_topic_names(std::span<const std::string> top_tags,
                                      std::span<const TopicNameDef> defs,
                                      const TaxonomyGraph& graph) {
  if (defs.empty()) throw InvalidArgument("score_topic_names: no topic names");
  if (top_tags.empty()) throw InvalidArgument("score_topic_names: no tags");
  std::vector<double> scores(defs.size(), 0.0);
  for (std::size_t j = 0; j < defs.size(); ++j) {
    for (const std::string& tag : top_tags) {
      for (const NameAnchor& a : defs[j].anchors) {
        scores[j] += a.synset ? word_synset_similarity(graph, tag, graph.require(*a.synset))
                              : word_similarity(graph, tag, a.token);
      }
    }
  }
  return scores;
}

NamingResult assign_names(const std::vector<std::vector<double>>& scores,
                          std::span<const TopicNameDef> defs, NamingMode mode) {
  if (defs.empty()) throw InvalidArgument("assign_names: no topic names");
  NamingResult result;
  for (const TopicNameDef& d : defs) result.names.push_back(d.name);
  result.topics.resize(scores.size());
  for (std::size_t k = 0; k < scores.size(); ++k) {
    if (scores[k].size() != defs.size()) {
      throw InvalidArgument("assign_names: score row has the wrong length");
    }
    result.topics[k].scores = scores[k];
  }

  std::vector<std::optional<std::size_t>> choice(scores.size());
  for (std::size_t k = 0; k < scores.size(); ++k) {
    if (!all_zero(scores[k])) choice[k] = argmax_lowest(scores[k]);
  }
  std::vector<std::size_t> named;
  for (std::size_t k = 0; k < scores.size(); ++k) {
    if (choice[k]) named.push_back(k);
  }
  if (mode == NamingMode::kDistinct && !named.empty()) {
    const std::size_t n = std::max(named.size(), defs.size());
    std::vector<std::vector<double>> cost(n, std::vector<double>(n, 0.0));
    for (std::size_t r = 0; r < named.size(); ++r) {
      for (std::size_t j = 0; j < defs.size(); ++j) cost[r][j] = -scores[named[r]][j];
    }
    const auto match = min_cost_assignment(cost);
    for (std::size_t r = 0; r < named.size(); ++r) {
      // Topics left over when there are more topics than names keep their
      // argmax (and will be flagged as duplicates).
      if (match[r] < defs.size()) choice[named[r]] = match[r];
    }
  }

  std::map<std::string, int> uses;
  for (std::size_t k = 0; k < scores.size(); ++k) {
    TopicNaming& t = result.topics[k];
    t.def_index = choice[k];
    t.name = choice[k] ? defs[*choice[k]].name : std::string(kNullTopicName);
    ++uses[t.name];
  }
  for (TopicNaming& t : result.topics) t.duplicate = uses[t.name] > 1;
  return result;
}

NamingResult name_topics(const PlsaModel& model, const Vocabulary& vocab,
                         std::span<const TopicNameDef> defs,
                         const TaxonomyGraph& graph, std::size_t top_n,
                         NamingMode mode) {
  if (top_n > model.num_words) {
    throw InvalidArgument("name_topics: Q exceeds the vocabulary size");
  }
  if (vocab.hash() != model.vocab_hash && !model.vocab_hash.empty()) {
    throw ValidationError("name_topics: vocabulary does not match the model");
  }
  std::vector<std::vector<double>> scores;
  std::vector<std::vector<std::string>> words(model.num_topics);
  for (std::size_t k = 0; k < model.num_topics; ++k) {
    for (auto& [w, p] : top_words(model, vocab, k, top_n)) words[k].push_back(w);
    scores.push_back(score_topic_names(words[k], defs, graph));
  }
  NamingResult result = assign_names(scores, defs, mode);
  for (std::size_t k = 0; k < model.num_topics; ++k) {
    result.topics[k].top_words = std::move(words[k]);
  }
  return result;
}

void write_naming(std::ostream& out, const NamingResult& naming) {
  json topics = json::array();
  for (std::size_t k = 0; k < naming.topics.size(); ++k) {
    const TopicNaming& t = naming.topics[k];
    topics.push_back({{"topic", k},
                      {"name", t.name},
                      {"def_index", t.def_index ? json(*t.def_index) : json(nullptr)},
                      {"scores", t.scores},
                      {"top_words", t.top_words},
                      {"duplicate", t.duplicate}});
  }
  const json obj = {{"format", "phototopic-naming"},
                    {"version", 1},
                    {"names", naming.names},
                    {"topics", std::move(topics)}};
  out << obj.dump(1) << '\n';
  if (!out) throw IoError("write failure in naming stream");
}

NamingResult read_naming(std::istream& in) {
  json obj;
  try {
    obj = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("naming: invalid JSON: ") + e.what());
  }
  if (!obj.is_object() || obj.value("format", "") != "phototopic-naming" ||
      obj.value("version", 0) != 1) {
    throw ValidationError("naming: not a phototopic-naming v1 file");
  }
  try {
    NamingResult result;
    result.names = obj.at("names").get<std::vector<std::string>>();
    for (const json& t : obj.at("topics")) {
      TopicNaming tn;
      tn.name = t.at("name").get<std::string>();
      if (!t.at("def_index").is_null()) tn.def_index = t.at("def_index").get<std::size_t>();
      tn.scores = t.at("scores").get<std::vector<double>>();
      tn.top_words = t.at("top_words").get<std::vector<std::string>>();
      tn.duplicate = t.at("duplicate").get<bool>();
      result.topics.push_back(std::move(tn));
    }
    return result;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("naming: malformed file: ") + e.what());
  }
}

NamingResult read_naming_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open naming file '" + path + "'");
  return read_naming(in);
}

}  // namespace phototopic
