#include "phototopic/coherence.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "../common/numfmt.hpp"
#include "../common/text.hpp"
#include "phototopic/error.hpp"

namespace phototopic {

namespace {

constexpr const char* kCacheMagic = "phototopic-corpus-stats";

struct PairTerms {
  double p_a, p_b, p_ab;
  bool joint_is_total;
};

PairTerms probabilities(const CorpusStats& stats, std::string_view a, std::string_view b) {
  const double d = static_cast<double>(stats.num_docs());
  const std::uint64_t joint = stats.joint_df(a, b);
  return {static_cast<double>(stats.df(a)) / d, static_cast<double>(stats.df(b)) / d,
          static_cast<double>(joint) / d, joint == stats.num_docs()};
}

void check_inputs(std::span<const std::string> words, const CorpusStats& stats,
                  const CoherenceConfig& cfg) {
  if (words.size() < 2) throw InvalidArgument("coherence: need at least two words");
  if (stats.num_docs() == 0) throw InvalidArgument("coherence: empty reference corpus");
  if (!(cfg.epsilon > 0.0)) throw InvalidArgument("coherence: epsilon must be > 0");
}

// PMI with zero marginals replaced by eps. Sets `flagged` when that happens.
double smoothed_pmi(const PairTerms& t, double eps, bool& flagged) {
  double denom_a = t.p_a, denom_b = t.p_b;
  if (denom_a == 0.0) denom_a = eps;
  if (denom_b == 0.0) denom_b = eps;
  flagged = t.p_a == 0.0 || t.p_b == 0.0;
  return std::log((t.p_ab + eps) / (denom_a * denom_b));
}

double pair_mean(double total, std::size_t n) {
  return 2.0 * total / (static_cast<double>(n) * static_cast<double>(n - 1));
}

// Scores are averages over unordered pairs; visiting the words in sorted
// order makes them exactly invariant to the caller's ordering.
std::vector<std::string> sorted_copy(std::span<const std::string> words) {
  std::vector<std::string> out(words.begin(), words.end());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

// --- CorpusStats ----------------------------------------------------------------

std::uint32_t CorpusStats::intern(std::string_view word) {
  const auto it = ids_.find(std::string(word));
  if (it != ids_.end()) return it->second;
  const auto id = static_cast<std::uint32_t>(words_.size());
  words_.emplace_back(word);
  ids_.emplace(words_.back(), id);
  df_.push_back(0);
  return id;
}

std::optional<std::uint32_t> CorpusStats::lookup(std::string_view word) const {
  const auto it = ids_.find(std::string(word));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

std::uint64_t CorpusStats::pair_key(std::uint32_t a, std::uint32_t b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | b;
}

std::uint64_t CorpusStats::df(std::string_view word) const {
  const auto id = lookup(word);
  return id ? df_[*id] : 0;
}

std::uint64_t CorpusStats::joint_df(std::string_view a, std::string_view b) const {
  const auto ia = lookup(a);
  const auto ib = lookup(b);
  if (!ia || !ib) return 0;
  if (*ia == *ib) return df_[*ia];
  const auto it = joint_.find(pair_key(*ia, *ib));
  return it == joint_.end() ? 0 : it->second;
}

void CorpusStats::add_document(std::span<const std::string_view> tokens,
                               const std::unordered_set<std::string>* filter) {
  ++num_docs_;
  std::vector<std::uint32_t> present;
  for (std::string_view t : tokens) {
    if (filter != nullptr && filter->count(std::string(t)) == 0) continue;
    present.push_back(intern(t));
  }
  std::sort(present.begin(), present.end());
  present.erase(std::unique(present.begin(), present.end()), present.end());
  for (std::size_t i = 0; i < present.size(); ++i) {
    ++df_[present[i]];
    for (std::size_t j = i + 1; j < present.size(); ++j) ++joint_[pair_key(present[i], present[j])];
  }
}

void CorpusStats::write(std::ostream& out) const {
  out << kCacheMagic << "\t1\n" << "D\t" << num_docs_ << '\n';
  // Sorted output keeps cache files reproducible.
  std::vector<std::uint32_t> order(words_.size());
  for (std::uint32_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::uint32_t a, std::uint32_t b) { return words_[a] < words_[b]; });
  for (std::uint32_t i : order) out << "df\t" << words_[i] << '\t' << df_[i] << '\n';
  std::vector<std::tuple<std::string_view, std::string_view, std::uint64_t>> pairs;
  pairs.reserve(joint_.size());
  for (const auto& [key, n] : joint_) {
    std::string_view a = words_[key >> 32];
    std::string_view b = words_[key & 0xffffffffu];
    if (b < a) std::swap(a, b);
    pairs.emplace_back(a, b, n);
  }
  std::sort(pairs.begin(), pairs.end());
  for (const auto& [a, b, n] : pairs) out << "joint\t" << a << '\t' << b << '\t' << n << '\n';
  if (!out) throw IoError("write failure in corpus-stats stream");
}

CorpusStats CorpusStats::read(std::istream& in) {
  CorpusStats stats;
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line) || detail::chomp(line) != std::string(kCacheMagic) + "\t1") {
    throw ParseError("corpus stats: missing 'phototopic-corpus-stats<TAB>1' header", line_no);
  }
  bool have_d = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view body = detail::chomp(line);
    if (body.empty()) continue;
    const auto f = detail::split(body, '\t');
    if (f[0] == "D" && f.size() == 2) {
      const auto d = detail::parse_int<std::uint64_t>(f[1]);
      if (!d) throw ParseError("corpus stats: bad document count", line_no);
      stats.num_docs_ = *d;
      have_d = true;
    } else if (f[0] == "df" && f.size() == 3) {
      const auto n = detail::parse_int<std::uint64_t>(f[2]);
      if (!n) throw ParseError("corpus stats: bad df", line_no);
      stats.df_[stats.intern(f[1])] = *n;
    } else if (f[0] == "joint" && f.size() == 4) {
      const auto n = detail::parse_int<std::uint64_t>(f[3]);
      if (!n || f[1] == f[2]) throw ParseError("corpus stats: bad joint entry", line_no);
      stats.joint_[pair_key(stats.intern(f[1]), stats.intern(f[2]))] = *n;
    } else {
      throw ParseError("corpus stats: unrecognized line", line_no);
    }
  }
  if (!have_d) throw ParseError("corpus stats: missing D line", line_no);
  for (std::uint64_t df : stats.df_) {
    if (df > stats.num_docs_) throw ValidationError("corpus stats: df exceeds D");
  }
  for (const auto& [key, n] : stats.joint_) {
    if (n > std::min(stats.df_[key >> 32], stats.df_[key & 0xffffffffu])) {
      throw ValidationError("corpus stats: joint df exceeds a marginal df");
    }
  }
  return stats;
}

CorpusStats build_corpus_stats(std::istream& docs,
                               const std::unordered_set<std::string>* vocab_filter) {
  CorpusStats stats;
  std::string line;
  while (std::getline(docs, line)) {
    const std::string lowered = detail::to_lower(line);
    const auto tokens = detail::split_whitespace(lowered);
    if (tokens.empty()) continue;  // blank lines are not documents
    stats.add_document(tokens, vocab_filter);
  }
  if (docs.bad()) throw IoError("read failure in reference corpus");
  if (stats.num_docs() == 0) throw ValidationError("reference corpus is empty");
  return stats;
}

// --- scores ------------------------------------------------------------------------

void CoherenceConfig::validate() const {
  if (top_n < 2) throw InvalidArgument("coherence: top_n must be >= 2");
  if (!(epsilon > 0.0)) throw InvalidArgument("coherence: epsilon must be > 0");
}

CoherenceScore uci_score(std::span<const std::string> words, const CorpusStats& stats,
                         const CoherenceConfig& cfg) {
  check_inputs(words, stats, cfg);
  const auto w = sorted_copy(words);
  CoherenceScore out;
  double total = 0.0;
  for (std::size_t j = 1; j < w.size(); ++j) {
    for (std::size_t i = 0; i < j; ++i) {
      bool flagged = false;
      total += smoothed_pmi(probabilities(stats, w[i], w[j]), cfg.epsilon, flagged);
      out.flagged_pairs += flagged;
    }
  }
  out.value = pair_mean(total, w.size());
  return out;
}

CoherenceScore umass_score(std::span<const std::string> words, const CorpusStats& stats,
                           const CoherenceConfig& cfg) {
  check_inputs(words, stats, cfg);
  std::vector<std::string> w(words.begin(), words.end());
  std::sort(w.begin(), w.end(), [&](const std::string& a, const std::string& b) {
    const auto da = stats.df(a), db = stats.df(b);
    return da != db ? da > db : a < b;
  });
  const double d = static_cast<double>(stats.num_docs());
  CoherenceScore out;
  double total = 0.0;
  for (std::size_t j = 1; j < w.size(); ++j) {
    for (std::size_t i = 0; i < j; ++i) {
      const double p_i = static_cast<double>(stats.df(w[i])) / d;
      const double p_ji = static_cast<double>(stats.joint_df(w[j], w[i])) / d;
      double denom = p_i;
      if (denom == 0.0) {
        denom = cfg.epsilon;
        ++out.flagged_pairs;
      }
      total += std::log((p_ji + cfg.epsilon) / denom);
    }
  }
  out.value = pair_mean(total, w.size());
  return out;
}

CoherenceScore avg_npmi(std::span<const std::string> words, const CorpusStats& stats,
                        const CoherenceConfig& cfg) {
  check_inputs(words, stats, cfg);
  const auto w = sorted_copy(words);
  CoherenceScore out;
  double total = 0.0;
  for (std::size_t j = 1; j < w.size(); ++j) {
    for (std::size_t i = 0; i < j; ++i) {
      const PairTerms t = probabilities(stats, w[i], w[j]);
      if (t.joint_is_total) {
        total += 1.0;
        continue;
      }
      bool flagged = false;
      const double pmi = smoothed_pmi(t, cfg.epsilon, flagged);
      out.flagged_pairs += flagged;
      total += pmi / -std::log(t.p_ab + cfg.epsilon);
    }
  }
  out.value = pair_mean(total, w.size());
  return out;
}

}  // namespace phototopic
