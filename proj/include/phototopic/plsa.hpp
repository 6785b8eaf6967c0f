#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "phototopic/corpus.hpp"
#include "phototopic/defaults.hpp"

namespace phototopic {

// pLSA parameters: P(z), P(w|z) and the training mixtures P(z|d).
struct PlsaModel {
  std::size_t num_topics = 0;  // K
  std::size_t num_words = 0;   // M
  std::vector<double> topic_prior;       // K
  std::vector<double> word_given_topic;  // K x M, row-major
  std::vector<double> doc_mixtures;      // N x K, row-major; may be empty
  std::vector<std::string> doc_ids;      // N, parallel to doc_mixtures
  std::string vocab_hash;
  std::uint64_t seed = 0;
  int iterations = 0;
  double log_likelihood = 0.0;

  std::size_t num_docs() const noexcept {
    return num_topics == 0 ? 0 : doc_mixtures.size() / num_topics;
  }
  std::span<const double> topic_words(std::size_t k) const {
    return std::span<const double>(word_given_topic).subspan(k * num_words, num_words);
  }
  std::span<const double> doc_mixture(std::size_t d) const {
    return std::span<const double>(doc_mixtures).subspan(d * num_topics, num_topics);
  }

  friend bool operator==(const PlsaModel&, const PlsaModel&) = default;
};

struct TrainConfig {
  std::size_t num_topics = defaults::kNumTopics;
  int max_iters = defaults::kMaxIters;
  double tol = defaults::kTolerance;  // relative log-likelihood change
  std::uint64_t seed = defaults::kSeed;
  double smoothing = defaults::kSmoothing;  // added to P(w|z) numerators

  void validate() const;
};

// Seeded positive random P(w|z) rows, uniform P(z); no document mixtures yet.
PlsaModel init_model(std::size_t num_topics, std::size_t num_words,
                     std::uint64_t seed);

struct EmStepResult {
  PlsaModel model;
  double log_likelihood = 0.0;  // of the INPUT model
  std::size_t reset_topics = 0;
};

// One EM iteration. A model without document mixtures is treated as having
// uniform mixtures for every column of `x`.
EmStepResult em_step(const PlsaModel& model, const CooccurrenceMatrix& x,
                     double smoothing = defaults::kSmoothing);

// Called after every iteration with (iteration, log-likelihood of the model
// that entered the iteration).
using TrainObserver = std::function<void(int, double)>;

// Runs em_step to convergence. The returned model records the iteration count
// and its own final log-likelihood.
PlsaModel train(const CooccurrenceMatrix& x, const TrainConfig& cfg,
                std::string vocab_hash = {}, const TrainObserver& observer = {});

struct FoldInOptions {
  int max_iters = defaults::kFoldInMaxIters;
  double tol = defaults::kFoldInTolerance;  // L-infinity change of the mixture
};

// P(z|d) for an unseen document with P(w|z) frozen. Empty documents (or ones
// whose words all have zero probability) get the uniform mixture.
std::vector<double> fold_in(const PlsaModel& model,
                            std::span<const WordCount> doc,
                            const FoldInOptions& options = {});

struct TopicAssignment {
  std::string image_id;
  std::vector<double> mixture;
  std::optional<std::size_t> topic;  // nullopt is the Null topic
  double max_prob = 0.0;

  bool is_null() const noexcept { return !topic.has_value(); }
};

// Argmax topic (lowest index on ties); Null when the maximum is below
// `threshold`. Throws ValidationError for unnormalized mixtures.
TopicAssignment assign_topic(std::span<const double> mixture,
                             double threshold = defaults::kNullThreshold);

// The Q most probable words of topic k, ties broken lexicographically.
std::vector<std::pair<std::string, double>> top_words(
    const PlsaModel& model, const Vocabulary& vocab, std::size_t topic,
    std::size_t count = defaults::kTopWords);

// Sum of X(w,d) log P(w|d) over the nonzeros of x. Zero probabilities are
// clamped to the smallest normal double instead of producing -inf.
double log_likelihood(const PlsaModel& model, const CooccurrenceMatrix& x);

// Versioned JSON model file. Values use shortest round-trip decimals, so
// write -> read reproduces every double exactly.
void write_model(std::ostream& out, const PlsaModel& model);
std::string serialize_model(const PlsaModel& model);
PlsaModel read_model(std::istream& in);
PlsaModel read_model_file(const std::string& path);
void write_model_file(const std::string& path, const PlsaModel& model);

// Checks the normalization and non-negativity invariants (tolerance 1e-9).
void validate_model(const PlsaModel& model);

}  // namespace phototopic
