#include <fstream>
#include <sstream>

#include <json.hpp>

#include "phototopic/error.hpp"
#include "phototopic/plsa.hpp"

namespace phototopic {

using nlohmann::json;

namespace {

constexpr const char* kFormat = "phototopic-plsa";
constexpr int kVersion = 1;

json rows_to_json(const std::vector<double>& flat, std::size_t cols) {
  json rows = json::array();
  if (cols == 0) return rows;
  for (std::size_t r = 0; r * cols < flat.size(); ++r) {
    rows.push_back(std::vector<double>(flat.begin() + static_cast<std::ptrdiff_t>(r * cols),
                                       flat.begin() + static_cast<std::ptrdiff_t>((r + 1) * cols)));
  }
  return rows;
}

std::vector<double> rows_from_json(const json& rows, std::size_t cols, const char* what) {
  if (!rows.is_array()) throw ValidationError(std::string("model: '") + what + "' must be an array");
  std::vector<double> flat;
  for (const json& row : rows) {
    if (!row.is_array() || row.size() != cols) {
      throw ValidationError(std::string("model: every '") + what + "' row needs " +
                            std::to_string(cols) + " values");
    }
    for (const json& v : row) {
      if (!v.is_number()) throw ValidationError(std::string("model: non-numeric value in '") + what + "'");
      flat.push_back(v.get<double>());
    }
  }
  return flat;
}

template <typename T>
T required(const json& obj, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end()) throw ValidationError(std::string("model: missing field '") + key + "'");
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw ValidationError(std::string("model: field '") + key + "' has the wrong type");
  }
}

}  // namespace

void write_model(std::ostream& out, const PlsaModel& model) {
  json obj;
  obj["format"] = kFormat;
  obj["version"] = kVersion;
  obj["K"] = model.num_topics;
  obj["M"] = model.num_words;
  obj["vocab_hash"] = model.vocab_hash;
  obj["seed"] = model.seed;
  obj["iterations"] = model.iterations;
  obj["log_likelihood"] = model.log_likelihood;
  obj["topic_prior"] = model.topic_prior;
  obj["word_given_topic"] = rows_to_json(model.word_given_topic, model.num_words);
  if (!model.doc_mixtures.empty()) {
    obj["doc_mixtures"] = rows_to_json(model.doc_mixtures, model.num_topics);
    obj["doc_ids"] = model.doc_ids;
  }
  out << obj.dump(1) << '\n';
  if (!out) throw IoError("write failure in model stream");
}

std::string serialize_model(const PlsaModel& model) {
  std::ostringstream os;
  write_model(os, model);
  return os.str();
}

PlsaModel read_model(std::istream& in) {
  json obj;
  try {
    obj = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("model: invalid JSON: ") + e.what());
  }
  if (!obj.is_object() || obj.value("format", "") != kFormat) {
    throw ValidationError("model: not a phototopic-plsa file");
  }
  if (required<int>(obj, "version") != kVersion) {
    throw ValidationError("model: unsupported version");
  }
  PlsaModel model;
  model.num_topics = required<std::size_t>(obj, "K");
  model.num_words = required<std::size_t>(obj, "M");
  model.vocab_hash = required<std::string>(obj, "vocab_hash");
  model.seed = required<std::uint64_t>(obj, "seed");
  model.iterations = required<int>(obj, "iterations");
  model.log_likelihood = required<double>(obj, "log_likelihood");
  model.topic_prior = required<std::vector<double>>(obj, "topic_prior");
  const auto wgt = obj.find("word_given_topic");
  if (wgt == obj.end()) throw ValidationError("model: missing field 'word_given_topic'");
  model.word_given_topic = rows_from_json(*wgt, model.num_words, "word_given_topic");
  if (const auto it = obj.find("doc_mixtures"); it != obj.end()) {
    model.doc_mixtures = rows_from_json(*it, model.num_topics, "doc_mixtures");
    model.doc_ids = required<std::vector<std::string>>(obj, "doc_ids");
  }
  validate_model(model);
  return model;
}

PlsaModel read_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open model file '" + path + "'");
  return read_model(in);
}

void write_model_file(const std::string& path, const PlsaModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot create model file '" + path + "'");
  write_model(out, model);
}

}  // namespace phototopic
