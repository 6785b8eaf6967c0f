#include "phototopic/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "../common/numfmt.hpp"
#include "../common/text.hpp"
#include "phototopic/digest.hpp"
#include "phototopic/error.hpp"

namespace phototopic {

using nlohmann::json;

namespace {

TagRecord record_from_json(const json& obj, std::size_t line_no) {
  if (!obj.is_object()) throw ParseError("expected a JSON object", line_no);

  TagRecord rec;
  const auto id = obj.find("image_id");
  if (id == obj.end() || !id->is_string()) {
    throw ParseError("missing string field 'image_id'", line_no);
  }
  rec.image_id = id->get<std::string>();
  if (rec.image_id.empty()) {
    throw ValidationError("line " + std::to_string(line_no) +
                          ": image_id must be non-empty");
  }

  if (const auto coll = obj.find("collection_id"); coll != obj.end()) {
    if (!coll->is_string()) {
      throw ParseError("'collection_id' must be a string", line_no);
    }
    rec.collection_id = coll->get<std::string>();
  }

  const auto tags = obj.find("tags");
  if (tags == obj.end() || !tags->is_array()) {
    throw ParseError("missing array field 'tags'", line_no);
  }
  std::map<std::string, std::size_t> seen;
  for (const json& t : *tags) {
    if (!t.is_object()) throw ParseError("tag entry must be an object", line_no);
    const auto token = t.find("tag");
    const auto conf = t.find("confidence");
    if (token == t.end() || !token->is_string()) {
      throw ParseError("tag entry needs a string 'tag'", line_no);
    }
    if (conf == t.end() || !conf->is_number()) {
      throw ParseError("tag entry needs a numeric 'confidence'", line_no);
    }
    const double c = conf->get<double>();
    if (!(c >= 0.0 && c <= 1.0)) {
      throw ValidationError("line " + std::to_string(line_no) +
                            ": confidence " + detail::format_double(c) +
                            " outside [0,1]");
    }
    std::string lowered = detail::to_lower(token->get<std::string>());
    if (lowered.empty()) throw ParseError("empty tag token", line_no);
    auto [it, inserted] = seen.emplace(lowered, rec.tags.size());
    if (inserted) {
      rec.tags.push_back({std::move(lowered), c});
    } else {
      double& kept = rec.tags[it->second].confidence;
      kept = std::max(kept, c);
    }
  }
  return rec;
}

}  // namespace

std::vector<TagRecord> parse_tag_records(std::istream& in) {
  std::vector<TagRecord> out;
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
      throw ParseError(std::string("invalid JSON: ") + e.what(), line_no);
    }
    out.push_back(record_from_json(obj, line_no));
  }
  if (in.bad()) throw IoError("read failure in tag-record stream");
  return out;
}

std::vector<TagRecord> read_tag_records_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open tag-record file '" + path + "'");
  return parse_tag_records(in);
}

void write_tag_records(std::ostream& out, std::span<const TagRecord> records) {
  for (const TagRecord& r : records) {
    json tags = json::array();
    for (const Tag& t : r.tags) {
      tags.push_back({{"confidence", t.confidence}, {"tag", t.token}});
    }
    const json obj = {{"collection_id", r.collection_id},
                      {"image_id", r.image_id},
                      {"tags", std::move(tags)}};
    out << obj.dump() << '\n';
  }
  if (!out) throw IoError("write failure in tag-record stream");
}

// --- Vocabulary ------------------------------------------------------------

Vocabulary::Vocabulary(std::vector<std::string> words, int min_count,
                       int min_collections)
    : words_(std::move(words)),
      min_count_(min_count),
      min_collections_(min_collections) {
  index_.reserve(words_.size());
  for (std::size_t i = 0; i < words_.size(); ++i) {
    if (words_[i].empty()) throw ValidationError("vocabulary: empty token");
    if (!index_.emplace(words_[i], i).second) {
      throw ValidationError("vocabulary: duplicate token '" + words_[i] + "'");
    }
  }
}

std::size_t Vocabulary::index_of(std::string_view token) const {
  const auto it = index_.find(std::string(token));
  return it == index_.end() ? kNotFound : it->second;
}

std::string Vocabulary::hash() const {
  std::ostringstream os;
  write_vocabulary(os, *this);
  return sha256_hex(os.str());
}

Vocabulary build_vocabulary(std::span<const TagRecord> records,
                            const VocabularyOptions& options) {
  if (options.min_count < 1 || options.min_collections < 1) {
    throw InvalidArgument("build_vocabulary: thresholds must be >= 1");
  }
  struct Usage {
    long long count = 0;
    std::set<std::string> collections;
  };
  // std::map keeps tokens in lexicographic order for free.
  std::map<std::string, Usage> usage;
  for (const TagRecord& r : records) {
    for (const Tag& t : r.tags) {
      Usage& u = usage[t.token];
      ++u.count;
      u.collections.insert(r.collection_id);
    }
  }
  std::vector<std::string> kept;
  for (const auto& [token, u] : usage) {
    if (u.count > options.min_count &&
        static_cast<long long>(u.collections.size()) >= options.min_collections) {
      kept.push_back(token);
    }
  }
  return Vocabulary(std::move(kept), options.min_count, options.min_collections);
}

void write_vocabulary(std::ostream& out, const Vocabulary& vocab) {
  for (const std::string& w : vocab.words()) out << w << '\n';
  if (!out) throw IoError("write failure in vocabulary stream");
}

Vocabulary read_vocabulary(std::istream& in) {
  std::vector<std::string> words;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view token = detail::chomp(line);
    if (token.empty()) continue;
    if (token.find_first_of(" \t") != std::string_view::npos) {
      throw ParseError("vocabulary tokens may not contain whitespace", line_no);
    }
    words.emplace_back(token);
  }
  if (in.bad()) throw IoError("read failure in vocabulary stream");
  return Vocabulary(std::move(words));
}

Vocabulary read_vocabulary_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open vocabulary file '" + path + "'");
  return read_vocabulary(in);
}

Weighting parse_weighting(std::string_view name) {
  if (name == "binary") return Weighting::kBinary;
  if (name == "confidence") return Weighting::kConfidence;
  throw InvalidArgument("unknown weighting '" + std::string(name) +
                        "' (expected binary|confidence)");
}

std::string_view to_string(Weighting w) {
  return w == Weighting::kBinary ? "binary" : "confidence";
}

// --- CooccurrenceMatrix ------------------------------------------------------

void CooccurrenceMatrix::add_document(std::string image_id,
                                      std::vector<WordCount> entries) {
  std::sort(entries.begin(), entries.end(),
            [](const WordCount& a, const WordCount& b) { return a.word < b.word; });
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].word >= num_words_) {
      throw InvalidArgument("cooccurrence: word index out of range");
    }
    if (!(entries[i].count >= 0.0)) {
      throw InvalidArgument("cooccurrence: counts must be non-negative");
    }
    if (i > 0 && entries[i].word == entries[i - 1].word) {
      throw InvalidArgument("cooccurrence: duplicate word in document");
    }
  }
  entries_.insert(entries_.end(), entries.begin(), entries.end());
  col_begin_.push_back(entries_.size());
  doc_ids_.push_back(std::move(image_id));
}

double CooccurrenceMatrix::at(std::size_t word, std::size_t doc) const {
  if (doc >= num_docs() || word >= num_words_) {
    throw InvalidArgument("cooccurrence: index out of range");
  }
  const auto col = column(doc);
  const auto it = std::lower_bound(
      col.begin(), col.end(), word,
      [](const WordCount& e, std::size_t w) { return e.word < w; });
  return it != col.end() && it->word == word ? it->count : 0.0;
}

double CooccurrenceMatrix::column_sum(std::size_t doc) const {
  double s = 0.0;
  for (const WordCount& e : column(doc)) s += e.count;
  return s;
}

double CooccurrenceMatrix::total() const {
  double s = 0.0;
  for (std::size_t d = 0; d < num_docs(); ++d) s += column_sum(d);
  return s;
}

std::vector<WordCount> vectorize(const TagRecord& record,
                                 const Vocabulary& vocab, Weighting weighting) {
  std::vector<WordCount> out;
  for (const Tag& t : record.tags) {
    const std::size_t w = vocab.index_of(t.token);
    if (w == Vocabulary::kNotFound) continue;
    out.push_back({static_cast<std::uint32_t>(w),
                   weighting == Weighting::kBinary ? 1.0 : t.confidence});
  }
  std::sort(out.begin(), out.end(),
            [](const WordCount& a, const WordCount& b) { return a.word < b.word; });
  return out;
}

CooccurrenceMatrix build_cooccurrence(std::span<const TagRecord> records,
                                      const Vocabulary& vocab,
                                      Weighting weighting) {
  if (vocab.empty() && !records.empty()) {
    throw InvalidArgument("build_cooccurrence: empty vocabulary");
  }
  CooccurrenceMatrix x(vocab.size());
  for (const TagRecord& r : records) {
    x.add_document(r.image_id, vectorize(r, vocab, weighting));
  }
  return x;
}

void write_cooccurrence(std::ostream& out, const CooccurrenceMatrix& x) {
  out << "cooccurrence " << x.num_words() << ' ' << x.num_docs() << '\n';
  for (std::size_t d = 0; d < x.num_docs(); ++d) {
    out << "doc " << x.doc_ids()[d] << '\n';
    for (const WordCount& e : x.column(d)) {
      out << e.word << '\t' << detail::format_double(e.count) << '\n';
    }
  }
  if (!out) throw IoError("write failure in cooccurrence stream");
}

CooccurrenceMatrix read_cooccurrence(std::istream& in) {
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) throw ParseError("missing header", line_no);
  const auto header = detail::split_whitespace(detail::chomp(line));
  if (header.size() != 3 || header[0] != "cooccurrence") {
    throw ParseError("expected 'cooccurrence <M> <N>' header", line_no);
  }
  const auto m = detail::parse_int<std::size_t>(header[1]);
  const auto n = detail::parse_int<std::size_t>(header[2]);
  if (!m || !n) throw ParseError("bad matrix dimensions", line_no);

  CooccurrenceMatrix x(*m);
  bool have_doc = false;
  std::string doc_id;
  std::vector<WordCount> entries;
  const auto flush = [&] {
    if (have_doc) x.add_document(std::move(doc_id), std::move(entries));
    entries.clear();
  };
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view body = detail::chomp(line);
    if (body.rfind("doc ", 0) == 0) {
      flush();
      doc_id = std::string(body.substr(4));
      have_doc = true;
      continue;
    }
    const auto fields = detail::split(body, '\t');
    if (!have_doc || fields.size() != 2) throw ParseError("bad entry", line_no);
    const auto w = detail::parse_int<std::uint32_t>(fields[0]);
    const auto c = detail::parse_double(fields[1]);
    if (!w || !c) throw ParseError("bad entry", line_no);
    entries.push_back({*w, *c});
  }
  flush();
  if (x.num_docs() != *n) {
    throw ParseError("document count does not match header", line_no);
  }
  return x;
}

}  // namespace phototopic
