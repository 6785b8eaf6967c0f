#pragma once

#include <cstddef>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace phototopic {

// Hypernym DAG of synsets with a lemma index and per-synset information
// content. Immutable once loaded; every query is read-only.
class TaxonomyGraph {
 public:
  using SynsetId = std::size_t;

  struct SynsetSpec {
    std::string id;
    std::vector<std::string> parents;
  };
  struct LemmaSpec {
    std::string token;
    std::vector<std::string> synsets;
  };

  TaxonomyGraph() = default;

  // Validates ids, parent references, acyclicity and lemma targets. IC
  // starts at 0 for every synset.
  static TaxonomyGraph build(std::vector<SynsetSpec> synsets,
                             std::vector<LemmaSpec> lemmas);

  std::size_t size() const noexcept { return ids_.size(); }
  const std::string& id(SynsetId s) const { return ids_.at(s); }
  std::optional<SynsetId> find(std::string_view id) const;
  SynsetId require(std::string_view id) const;  // InvalidArgument if absent

  std::span<const SynsetId> parents(SynsetId s) const { return parents_.at(s); }
  std::span<const SynsetId> roots() const { return roots_; }
  // Synsets ordered so that every parent precedes its children.
  std::span<const SynsetId> topological_order() const { return topo_; }

  double ic(SynsetId s) const { return ic_.at(s); }
  const std::vector<double>& ic_values() const noexcept { return ic_; }
  void set_ic(std::vector<double> values);

  // Exact lemma lookup (token lowercased by the caller).
  std::span<const SynsetId> lemma_synsets(std::string_view token) const;

  // Lemma lookup with light morphological fallbacks: '-' and ' ' become
  // '_', then plural endings (-ies, -es, -s) are stripped. Returns an empty
  // span for unknown words.
  std::span<const SynsetId> senses(std::string_view word) const;

  // Hypernym edges (parent, child) whose IC decreases going down.
  std::vector<std::pair<SynsetId, SynsetId>> ic_monotonicity_violations() const;

 private:
  std::vector<std::string> ids_;
  std::unordered_map<std::string, SynsetId> index_;
  std::vector<std::vector<SynsetId>> parents_;
  std::vector<SynsetId> roots_;
  std::vector<SynsetId> topo_;
  std::unordered_map<std::string, std::vector<SynsetId>> lemmas_;
  std::vector<double> ic_;
};

// Raw sense-tagged corpus frequencies keyed by synset id.
struct IcCounts {
  std::unordered_map<std::string, double> counts;
};

enum class IcSource {
  kNone,        // every IC is 0 (with a warning)
  kIcValues,    // TSV synset_id<TAB>ic
  kRawCounts,   // TSV synset_id<TAB>count, converted with compute_ic
};

// Reads the TSV taxonomy and lexicon, then the IC or counts stream when
// `source` says so (`ic_stream` may be null for kNone).
TaxonomyGraph load_taxonomy(std::istream& taxonomy, std::istream& lexicon,
                            std::istream* ic_stream, IcSource source);

TaxonomyGraph load_taxonomy_files(const std::string& taxonomy_path,
                                  const std::string& lexicon_path,
                                  const std::string& ic_path, IcSource source);

IcCounts read_ic_counts(std::istream& in);

// IC(s) = -log((cumulative(s) + 1) / (total + |synsets|)), where
// cumulative(s) sums the raw counts of s and all its descendants, each
// descendant counted once.
std::vector<double> compute_ic(const TaxonomyGraph& graph, const IcCounts& counts);

// Lowest common subsumer: the common ancestor (self included) with the
// highest IC; ties go to the smallest combined hop distance, then to the
// smallest synset id. nullopt when the synsets share no ancestor.
std::optional<TaxonomyGraph::SynsetId> lcs(const TaxonomyGraph& graph,
                                           TaxonomyGraph::SynsetId a,
                                           TaxonomyGraph::SynsetId b);
std::optional<std::string> lcs(const TaxonomyGraph& graph, std::string_view a,
                               std::string_view b);

// 2 IC(lcs) / (IC(a) + IC(b)), clamped to [0,1]; 0 without an LCS or when
// both ICs are 0.
double lin_similarity(const TaxonomyGraph& graph, TaxonomyGraph::SynsetId a,
                      TaxonomyGraph::SynsetId b);
double lin_similarity(const TaxonomyGraph& graph, std::string_view a,
                      std::string_view b);

// Max Lin similarity over all sense pairs; 0 for words not in the lexicon.
double word_similarity(const TaxonomyGraph& graph, std::string_view a,
                       std::string_view b);

// Max Lin similarity between any sense of `word` and a fixed synset.
double word_synset_similarity(const TaxonomyGraph& graph, std::string_view word,
                              TaxonomyGraph::SynsetId synset);

}  // namespace phototopic
