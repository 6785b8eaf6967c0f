#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "phototopic/defaults.hpp"

namespace phototopic {

struct Tag {
  std::string token;  // lowercase
  double confidence = 1.0;

  friend bool operator==(const Tag&, const Tag&) = default;
};

// One image's concept tags: the "document" of the topic model.
struct TagRecord {
  std::string image_id;
  std::string collection_id;
  std::vector<Tag> tags;

  friend bool operator==(const TagRecord&, const TagRecord&) = default;
};

// Reads the JSON-lines tag-record format. Blank lines are skipped; tags are
// lowercased and duplicate tags inside a record are merged keeping the
// highest confidence (first occurrence keeps its position).
std::vector<TagRecord> parse_tag_records(std::istream& in);
std::vector<TagRecord> read_tag_records_file(const std::string& path);

void write_tag_records(std::ostream& out, std::span<const TagRecord> records);

// Ordered, thresholded word list. Positions are 0..size()-1.
class Vocabulary {
 public:
  static constexpr std::size_t kNotFound = static_cast<std::size_t>(-1);

  Vocabulary() = default;
  // `words` must be distinct; order is preserved.
  explicit Vocabulary(std::vector<std::string> words, int min_count = 0,
                      int min_collections = 0);

  std::size_t size() const noexcept { return words_.size(); }
  bool empty() const noexcept { return words_.empty(); }
  const std::vector<std::string>& words() const noexcept { return words_; }
  const std::string& word(std::size_t i) const { return words_.at(i); }
  std::size_t index_of(std::string_view token) const;
  bool contains(std::string_view token) const {
    return index_of(token) != kNotFound;
  }

  int min_count() const noexcept { return min_count_; }
  int min_collections() const noexcept { return min_collections_; }

  // SHA-256 of the serialized vocabulary file; binds models to word order.
  std::string hash() const;

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.words_ == b.words_;
  }

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, std::size_t> index_;
  int min_count_ = 0;
  int min_collections_ = 0;
};

struct VocabularyOptions {
  int min_count = defaults::kMinCount;  // kept if used MORE than this
  int min_collections = defaults::kMinCollections;
};

Vocabulary build_vocabulary(std::span<const TagRecord> records,
                            const VocabularyOptions& options = {});

// One token per line, order significant.
void write_vocabulary(std::ostream& out, const Vocabulary& vocab);
Vocabulary read_vocabulary(std::istream& in);
Vocabulary read_vocabulary_file(const std::string& path);

enum class Weighting { kBinary, kConfidence };

Weighting parse_weighting(std::string_view name);
std::string_view to_string(Weighting w);

// One nonzero of a document column.
struct WordCount {
  std::uint32_t word = 0;
  double count = 0.0;

  friend bool operator==(const WordCount&, const WordCount&) = default;
};

// Sparse M x N word-document matrix stored column-wise (one column per
// document, entries sorted by word index).
class CooccurrenceMatrix {
 public:
  CooccurrenceMatrix() = default;
  explicit CooccurrenceMatrix(std::size_t num_words)
      : num_words_(num_words), col_begin_{0} {}

  // Appends a document column. Entries are sorted and validated.
  void add_document(std::string image_id, std::vector<WordCount> entries);

  std::size_t num_words() const noexcept { return num_words_; }
  std::size_t num_docs() const noexcept { return doc_ids_.size(); }
  std::size_t num_nonzeros() const noexcept { return entries_.size(); }
  const std::vector<std::string>& doc_ids() const noexcept { return doc_ids_; }

  std::span<const WordCount> column(std::size_t doc) const {
    return {entries_.data() + col_begin_[doc],
            col_begin_[doc + 1] - col_begin_[doc]};
  }
  double at(std::size_t word, std::size_t doc) const;
  double column_sum(std::size_t doc) const;
  double total() const;

  friend bool operator==(const CooccurrenceMatrix&,
                         const CooccurrenceMatrix&) = default;

 private:
  std::size_t num_words_ = 0;
  std::vector<std::size_t> col_begin_{0};
  std::vector<WordCount> entries_;
  std::vector<std::string> doc_ids_;
};

// Tags outside `vocab` are dropped; documents left without tags are kept as
// empty columns.
CooccurrenceMatrix build_cooccurrence(std::span<const TagRecord> records,
                                      const Vocabulary& vocab,
                                      Weighting weighting = Weighting::kBinary);

// Sparse vector of one record against a vocabulary (fold-in input).
std::vector<WordCount> vectorize(const TagRecord& record,
                                 const Vocabulary& vocab,
                                 Weighting weighting = Weighting::kBinary);

// Triplet text format: header "cooccurrence <M> <N>", then per document a
// line "doc <image_id>" followed by "<word>\t<count>" lines. Counts use the
// shortest round-trip decimal form.
void write_cooccurrence(std::ostream& out, const CooccurrenceMatrix& x);
CooccurrenceMatrix read_cooccurrence(std::istream& in);

}  // namespace phototopic
