#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "../common/embedded_data.hpp"
#include "../common/numfmt.hpp"
#include "../common/text.hpp"
#include "phototopic/error.hpp"
#include "phototopic/pipeline.hpp"

namespace phototopic {

using nlohmann::json;

std::string CategoryRegistry::normalize(std::string_view category) {
  std::string out = detail::to_lower(detail::trim(category));
  std::replace(out.begin(), out.end(), '_', ' ');
  return out;
}

void CategoryRegistry::add(const std::string& topic, std::string_view category) {
  if (topic.empty()) throw InvalidArgument("category registry: empty topic name");
  std::string c = normalize(category);
  if (c.empty()) throw InvalidArgument("category registry: empty category under '" + topic + "'");
  auto& list = by_topic_[topic];
  if (std::find(list.begin(), list.end(), c) == list.end()) list.push_back(std::move(c));
}

bool CategoryRegistry::contains(const std::string& topic, std::string_view category) const {
  const auto it = by_topic_.find(topic);
  if (it == by_topic_.end()) return false;
  const std::string c = normalize(category);
  return std::find(it->second.begin(), it->second.end(), c) != it->second.end();
}

const std::vector<std::string>& CategoryRegistry::categories(const std::string& topic) const {
  static const std::vector<std::string> kNone;
  const auto it = by_topic_.find(topic);
  return it == by_topic_.end() ? kNone : it->second;
}

std::vector<std::string> CategoryRegistry::topics() const {
  std::vector<std::string> out;
  for (const auto& [t, _] : by_topic_) out.push_back(t);
  return out;
}

std::size_t CategoryRegistry::num_categories() const {
  std::size_t n = 0;
  for (const auto& [_, list] : by_topic_) n += list.size();
  return n;
}

CategoryRegistry parse_category_registry(std::istream& in) {
  CategoryRegistry reg;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view body = detail::chomp(line);
    if (detail::trim(body).empty() || body.front() == '#') continue;
    const auto f = detail::split(body, '\t');
    if (f.size() != 2) throw ParseError("registry: expected 'topic<TAB>category'", line_no);
    const std::string topic(detail::trim(f[0]));
    if (topic.empty() || detail::trim(f[1]).empty()) {
      throw ParseError("registry: empty topic or category", line_no);
    }
    reg.add(topic, f[1]);
  }
  if (in.bad()) throw IoError("read failure in category registry");
  return reg;
}

CategoryRegistry read_category_registry_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open category registry '" + path + "'");
  return parse_category_registry(in);
}

const CategoryRegistry& default_category_registry() {
  static const CategoryRegistry reg = [] {
    std::istringstream in{std::string(detail::embedded_category_registry())};
    return parse_category_registry(in);
  }();
  return reg;
}

CategoryScores load_category_scores(std::istream& in, const CategoryRegistry& registry) {
  CategoryScores out;
  std::vector<std::string> offenders;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view body = detail::trim(line);
    if (body.empty()) continue;
    json obj;
    try {
      obj = json::parse(body);
    } catch (const json::parse_error& e) {
      throw ParseError(std::string("category scores: invalid JSON: ") + e.what(), line_no);
    }
    if (!obj.is_object()) throw ParseError("category scores: expected an object", line_no);
    auto text = [&](const char* key) {
      const auto it = obj.find(key);
      if (it == obj.end() || !it->is_string()) {
        throw ParseError(std::string("category scores: missing string field '") + key + "'",
                         line_no);
      }
      return it->get<std::string>();
    };
    const std::string image_id = text("image_id");
    const std::string topic = text("topic");
    const std::string category = text("category");
    const auto s = obj.find("score");
    if (s == obj.end() || !s->is_number()) {
      throw ParseError("category scores: missing numeric field 'score'", line_no);
    }
    const double score = s->get<double>();
    if (!(score >= 0.0 && score <= 1.0)) {
      throw ValidationError("line " + std::to_string(line_no) + ": category score " +
                            detail::format_double(score) + " outside [0,1]");
    }
    if (image_id.empty()) {
      throw ValidationError("line " + std::to_string(line_no) + ": image_id must be non-empty");
    }
    if (const auto p = obj.find("provenance"); p != obj.end() && p->is_string() &&
                                               out.provenance.empty()) {
      out.provenance = p->get<std::string>();
    }
    if (!registry.contains(topic, category)) {
      offenders.push_back("line " + std::to_string(line_no) + ": '" + category + "' under '" +
                          topic + "'");
      continue;
    }
    out.by_image[image_id].push_back({topic, CategoryRegistry::normalize(category), score});
  }
  if (in.bad()) throw IoError("read failure in category-score stream");
  if (!offenders.empty()) {
    std::string msg = "category scores: categories not in the registry for their topic:";
    for (const std::string& o : offenders) msg += "\n  " + o;
    throw ValidationError(msg);
  }
  return out;
}

CategoryScores read_category_scores_file(const std::string& path,
                                         const CategoryRegistry& registry) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open category-score file '" + path + "'");
  return load_category_scores(in, registry);
}

}  // namespace phototopic
