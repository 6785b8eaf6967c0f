#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "phototopic/defaults.hpp"

namespace phototopic {

// Document and pairwise co-document frequencies of a reference corpus.
class CorpusStats {
 public:
  std::uint64_t num_docs() const noexcept { return num_docs_; }
  std::uint64_t df(std::string_view word) const;
  // Order of the arguments does not matter.
  std::uint64_t joint_df(std::string_view a, std::string_view b) const;
  std::size_t vocabulary_size() const noexcept { return words_.size(); }

  // Counts one document; tokens outside `filter` (when non-null) are ignored.
  void add_document(std::span<const std::string_view> tokens,
                    const std::unordered_set<std::string>* filter);

  // Versioned TSV cache: "phototopic-corpus-stats\t1", "D\t<n>", then
  // "df\t<word>\t<n>" and "joint\t<a>\t<b>\t<n>" lines (a < b).
  void write(std::ostream& out) const;
  static CorpusStats read(std::istream& in);

 private:
  std::uint32_t intern(std::string_view word);
  std::optional<std::uint32_t> lookup(std::string_view word) const;
  static std::uint64_t pair_key(std::uint32_t a, std::uint32_t b);

  std::uint64_t num_docs_ = 0;
  std::vector<std::string> words_;
  std::unordered_map<std::string, std::uint32_t> ids_;
  std::vector<std::uint64_t> df_;
  std::unordered_map<std::uint64_t, std::uint64_t> joint_;
};

// One document per line (blank lines skipped), whitespace tokens, lowercased.
// When `vocab_filter`
// is given, only words in it are counted (which bounds the pair table).
// Throws ValidationError for an empty corpus.
CorpusStats build_corpus_stats(std::istream& docs,
                               const std::unordered_set<std::string>* vocab_filter = nullptr);

struct CoherenceConfig {
  std::size_t top_n = defaults::kCoherenceTopN;
  double epsilon = defaults::kCoherenceEpsilon;

  void validate() const;
};

struct CoherenceScore {
  double value = 0.0;
  std::size_t flagged_pairs = 0;  // pairs that needed a zero-probability fallback
};

// Mean pairwise PMI, log((P(a,b)+eps) / (P(a)P(b))). A zero marginal is
// replaced by eps in the denominator (and the pair flagged).
CoherenceScore uci_score(std::span<const std::string> words, const CorpusStats& stats,
                         const CoherenceConfig& cfg = {});

// Mean over ordered pairs (i<j, words sorted by decreasing df, ties
// lexicographic) of log((P(w_j,w_i)+eps) / P(w_i)). A zero conditioning
// probability is floored at eps (and the pair flagged).
CoherenceScore umass_score(std::span<const std::string> words, const CorpusStats& stats,
                           const CoherenceConfig& cfg = {});

// Mean pairwise NPMI = PMI / -log(P(a,b)+eps); a pair that co-occurs in every
// document contributes exactly 1.
CoherenceScore avg_npmi(std::span<const std::string> words, const CorpusStats& stats,
                        const CoherenceConfig& cfg = {});

}  // namespace phototopic
