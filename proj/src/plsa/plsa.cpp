#include "phototopic/plsa.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "phototopic/diagnostics.hpp"
#include "phototopic/error.hpp"
#include "phototopic/kernels.hpp"

namespace phototopic {
namespace {

constexpr double kNormTolerance = 1e-9;

double safe_log(double p) {
  return std::log(std::max(p, std::numeric_limits<double>::min()));
}

// Training state in the layout the kernels want: P(w|z) transposed to M x K
// so that the K topic values of one word are contiguous.
class EmWorkspace {
 public:
  EmWorkspace(const PlsaModel& model, const CooccurrenceMatrix& x)
      : k_(model.num_topics), m_(model.num_words), n_(x.num_docs()) {
    if (x.num_words() != m_) {
      throw InvalidArgument("em: model has " + std::to_string(m_) +
                            " words but the matrix has " +
                            std::to_string(x.num_words()));
    }
    word_topic_.resize(m_ * k_);
    for (std::size_t k = 0; k < k_; ++k) {
      for (std::size_t w = 0; w < m_; ++w) {
        word_topic_[w * k_ + k] = model.word_given_topic[k * m_ + w];
      }
    }
    if (model.doc_mixtures.empty()) {
      mix_.assign(n_ * k_, 1.0 / static_cast<double>(k_));
    } else if (model.num_docs() == n_) {
      mix_ = model.doc_mixtures;
    } else {
      throw InvalidArgument("em: model has " + std::to_string(model.num_docs()) +
                            " document mixtures but the matrix has " +
                            std::to_string(n_) + " documents");
    }
    prior_ = model.topic_prior;
    acc_word_.resize(m_ * k_);
    acc_doc_.resize(n_ * k_);
    denom_.resize(k_);
  }

  // One E+M pass; returns the log-likelihood of the parameters it started from.
  double step(const CooccurrenceMatrix& x, double smoothing,
              std::size_t* reset_topics) {
    const kernels::KernelTable& kt = kernels::active();
    std::fill(acc_word_.begin(), acc_word_.end(), 0.0);
    std::fill(acc_doc_.begin(), acc_doc_.end(), 0.0);

    double ll = 0.0;
    for (std::size_t d = 0; d < n_; ++d) {
      const double* mix = &mix_[d * k_];
      double* acc_d = &acc_doc_[d * k_];
      for (const WordCount& e : x.column(d)) {
        const std::size_t off = static_cast<std::size_t>(e.word) * k_;
        const double p = kt.posterior_accumulate(mix, &word_topic_[off], e.count,
                                                 &acc_word_[off], acc_d, k_);
        if (e.count > 0.0) ll += e.count * safe_log(p);
      }
    }

    // P(w|z)
    std::fill(denom_.begin(), denom_.end(), 0.0);
    for (std::size_t w = 0; w < m_; ++w) kt.add(denom_.data(), &acc_word_[w * k_], k_);
    std::vector<std::size_t> reset;
    for (std::size_t k = 0; k < k_; ++k) {
      denom_[k] += smoothing * static_cast<double>(m_);
      if (!(denom_[k] > 0.0) || !std::isfinite(denom_[k])) {
        reset.push_back(k);
        denom_[k] = 1.0;
      }
    }
    for (std::size_t w = 0; w < m_; ++w) {
      kt.offset_divide(&word_topic_[w * k_], &acc_word_[w * k_], smoothing,
                       denom_.data(), k_);
    }
    for (std::size_t k : reset) {
      for (std::size_t w = 0; w < m_; ++w) {
        word_topic_[w * k_ + k] = 1.0 / static_cast<double>(m_);
      }
      warn("em: topic " + std::to_string(k) +
           " lost all mass; its word distribution was reset to uniform");
    }
    if (reset_topics != nullptr) *reset_topics = reset.size();

    // P(z|d) and P(z)
    std::vector<double> prior_acc(k_, 0.0);
    for (std::size_t d = 0; d < n_; ++d) {
      double* acc_d = &acc_doc_[d * k_];
      double* mix = &mix_[d * k_];
      kt.add(prior_acc.data(), acc_d, k_);
      const double total = kt.sum(acc_d, k_);
      if (total > 0.0 && std::isfinite(total)) {
        std::copy(acc_d, acc_d + k_, mix);
        kt.scale(mix, 1.0 / total, k_);
      } else {
        std::fill(mix, mix + k_, 1.0 / static_cast<double>(k_));
      }
    }
    const double prior_total = kt.sum(prior_acc.data(), k_);
    if (prior_total > 0.0 && std::isfinite(prior_total)) {
      kt.scale(prior_acc.data(), 1.0 / prior_total, k_);
      prior_ = std::move(prior_acc);
    } else {
      prior_.assign(k_, 1.0 / static_cast<double>(k_));
    }
    return ll;
  }

  void store(PlsaModel& model, const CooccurrenceMatrix& x) const {
    for (std::size_t k = 0; k < k_; ++k) {
      for (std::size_t w = 0; w < m_; ++w) {
        model.word_given_topic[k * m_ + w] = word_topic_[w * k_ + k];
      }
    }
    model.doc_mixtures = mix_;
    model.doc_ids = x.doc_ids();
    model.topic_prior = prior_;
  }

 private:
  std::size_t k_, m_, n_;
  std::vector<double> word_topic_;  // M x K
  std::vector<double> mix_;         // N x K
  std::vector<double> prior_;       // K
  std::vector<double> acc_word_;    // M x K
  std::vector<double> acc_doc_;     // N x K
  std::vector<double> denom_;       // K
};

void check_row(std::span<const double> row, const char* what, std::size_t index) {
  double s = 0.0;
  for (double v : row) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw ValidationError(std::string(what) + " row " + std::to_string(index) +
                            " has a negative or non-finite entry");
    }
    s += v;
  }
  if (std::abs(s - 1.0) > kNormTolerance) {
    throw ValidationError(std::string(what) + " row " + std::to_string(index) +
                          " sums to " + std::to_string(s));
  }
}

}  // namespace

void TrainConfig::validate() const {
  if (num_topics < 1) throw InvalidArgument("train: K must be >= 1");
  if (max_iters < 1) throw InvalidArgument("train: max_iters must be >= 1");
  if (!(tol > 0.0)) throw InvalidArgument("train: tol must be > 0");
  if (!(smoothing >= 0.0) || !std::isfinite(smoothing)) {
    throw InvalidArgument("train: smoothing must be finite and >= 0");
  }
}

PlsaModel init_model(std::size_t num_topics, std::size_t num_words,
                     std::uint64_t seed) {
  if (num_topics == 0 || num_words == 0) {
    throw InvalidArgument("init_model: K and M must both be >= 1");
  }
  PlsaModel model;
  model.num_topics = num_topics;
  model.num_words = num_words;
  model.seed = seed;
  model.topic_prior.assign(num_topics, 1.0 / static_cast<double>(num_topics));
  model.word_given_topic.resize(num_topics * num_words);

  // mt19937_64's output sequence is fixed by the standard; the distribution
  // classes are not, so draws are mapped to (0,1] by hand.
  std::mt19937_64 gen(seed);
  for (std::size_t k = 0; k < num_topics; ++k) {
    double* row = &model.word_given_topic[k * num_words];
    double total = 0.0;
    for (std::size_t w = 0; w < num_words; ++w) {
      row[w] = static_cast<double>((gen() >> 11) + 1) * 0x1.0p-53;
      total += row[w];
    }
    for (std::size_t w = 0; w < num_words; ++w) row[w] /= total;
  }
  return model;
}

EmStepResult em_step(const PlsaModel& model, const CooccurrenceMatrix& x,
                     double smoothing) {
  EmWorkspace ws(model, x);
  EmStepResult result{model, 0.0, 0};
  result.log_likelihood = ws.step(x, smoothing, &result.reset_topics);
  ws.store(result.model, x);
  return result;
}

PlsaModel train(const CooccurrenceMatrix& x, const TrainConfig& cfg,
                std::string vocab_hash, const TrainObserver& observer) {
  cfg.validate();
  if (x.num_docs() == 0) throw InvalidArgument("train: corpus has no documents");
  if (x.num_words() == 0) throw InvalidArgument("train: corpus has no words");

  PlsaModel model = init_model(cfg.num_topics, x.num_words(), cfg.seed);
  model.vocab_hash = std::move(vocab_hash);
  EmWorkspace ws(model, x);

  double previous = 0.0;
  int iter = 0;
  while (iter < cfg.max_iters) {
    const double ll = ws.step(x, cfg.smoothing, nullptr);
    ++iter;
    if (!std::isfinite(ll)) {
      throw NumericError("train: log-likelihood became non-finite at iteration " +
                         std::to_string(iter));
    }
    if (observer) observer(iter, ll);
    if (iter > 1) {
      const double change = std::abs(ll - previous);
      const double scale = std::abs(previous);
      if (scale == 0.0 ? change == 0.0 : change / scale < cfg.tol) break;
    }
    previous = ll;
  }
  ws.store(model, x);
  model.iterations = iter;
  model.log_likelihood = log_likelihood(model, x);
  if (!std::isfinite(model.log_likelihood)) {
    throw NumericError("train: final log-likelihood is non-finite");
  }
  return model;
}

std::vector<double> fold_in(const PlsaModel& model,
                            std::span<const WordCount> doc,
                            const FoldInOptions& options) {
  const std::size_t k = model.num_topics;
  const std::size_t m = model.num_words;
  std::vector<double> mix(k, 1.0 / static_cast<double>(k));
  if (doc.empty() || k == 0) return mix;

  const kernels::KernelTable& kt = kernels::active();
  // Gather the K-vector P(w|.) of each word once; the model is only read.
  std::vector<double> cols(doc.size() * k);
  for (std::size_t i = 0; i < doc.size(); ++i) {
    if (doc[i].word >= m) throw InvalidArgument("fold_in: word index out of range");
    for (std::size_t t = 0; t < k; ++t) {
      cols[i * k + t] = model.word_given_topic[t * m + doc[i].word];
    }
  }

  std::vector<double> acc(k);
  for (int it = 0; it < options.max_iters; ++it) {
    std::fill(acc.begin(), acc.end(), 0.0);
    for (std::size_t i = 0; i < doc.size(); ++i) {
      kt.posterior_accumulate(mix.data(), &cols[i * k], doc[i].count, nullptr,
                              acc.data(), k);
    }
    const double total = kt.sum(acc.data(), k);
    if (!(total > 0.0) || !std::isfinite(total)) {
      std::fill(mix.begin(), mix.end(), 1.0 / static_cast<double>(k));
      break;
    }
    kt.scale(acc.data(), 1.0 / total, k);
    double change = 0.0;
    for (std::size_t t = 0; t < k; ++t) change = std::max(change, std::abs(acc[t] - mix[t]));
    mix.swap(acc);
    if (change < options.tol) break;
  }
  return mix;
}

TopicAssignment assign_topic(std::span<const double> mixture, double threshold) {
  if (mixture.empty()) throw ValidationError("assign_topic: empty mixture");
  double total = 0.0;
  for (double v : mixture) {
    if (!std::isfinite(v) || v < 0.0) {
      throw ValidationError("assign_topic: mixture has a negative or non-finite entry");
    }
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-6) {
    throw ValidationError("assign_topic: mixture sums to " + std::to_string(total) +
                          ", not 1");
  }
  TopicAssignment out;
  out.mixture.assign(mixture.begin(), mixture.end());
  std::size_t best = 0;
  for (std::size_t k = 1; k < mixture.size(); ++k) {
    if (mixture[k] > mixture[best]) best = k;
  }
  out.max_prob = mixture[best];
  if (!(out.max_prob < threshold)) out.topic = best;
  return out;
}

std::vector<std::pair<std::string, double>> top_words(const PlsaModel& model,
                                                      const Vocabulary& vocab,
                                                      std::size_t topic,
                                                      std::size_t count) {
  if (topic >= model.num_topics) throw InvalidArgument("top_words: topic out of range");
  if (count == 0) throw InvalidArgument("top_words: Q must be >= 1");
  if (vocab.size() != model.num_words) {
    throw InvalidArgument("top_words: vocabulary size does not match the model");
  }
  const auto row = model.topic_words(topic);
  std::vector<std::size_t> order(row.size());
  std::iota(order.begin(), order.end(), 0);
  const std::size_t q = std::min(count, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(q),
                    order.end(), [&](std::size_t a, std::size_t b) {
                      if (row[a] != row[b]) return row[a] > row[b];
                      return vocab.word(a) < vocab.word(b);
                    });
  std::vector<std::pair<std::string, double>> out;
  out.reserve(q);
  for (std::size_t i = 0; i < q; ++i) out.emplace_back(vocab.word(order[i]), row[order[i]]);
  return out;
}

double log_likelihood(const PlsaModel& model, const CooccurrenceMatrix& x) {
  if (x.num_docs() == 0) return 0.0;
  if (x.num_words() != model.num_words) {
    throw InvalidArgument("log_likelihood: vocabulary size mismatch");
  }
  const bool uniform = model.doc_mixtures.empty();
  if (!uniform && model.num_docs() != x.num_docs()) {
    throw InvalidArgument("log_likelihood: document count mismatch");
  }
  const std::size_t k = model.num_topics;
  const std::size_t m = model.num_words;
  const kernels::KernelTable& kt = kernels::active();
  const std::vector<double> flat(k, 1.0 / static_cast<double>(k));
  std::vector<double> col(k);
  double ll = 0.0;
  for (std::size_t d = 0; d < x.num_docs(); ++d) {
    const double* mix = uniform ? flat.data() : &model.doc_mixtures[d * k];
    for (const WordCount& e : x.column(d)) {
      if (!(e.count > 0.0)) continue;
      for (std::size_t t = 0; t < k; ++t) col[t] = model.word_given_topic[t * m + e.word];
      ll += e.count * safe_log(kt.dot(mix, col.data(), k));
    }
  }
  return ll;
}

void validate_model(const PlsaModel& model) {
  const std::size_t k = model.num_topics;
  const std::size_t m = model.num_words;
  if (k == 0 || m == 0) throw ValidationError("model: K and M must be >= 1");
  if (model.topic_prior.size() != k || model.word_given_topic.size() != k * m) {
    throw ValidationError("model: parameter arrays have the wrong size");
  }
  if (model.doc_mixtures.size() % k != 0 ||
      (!model.doc_ids.empty() && model.doc_ids.size() != model.num_docs())) {
    throw ValidationError("model: document mixtures are inconsistent");
  }
  check_row(model.topic_prior, "topic_prior", 0);
  for (std::size_t t = 0; t < k; ++t) check_row(model.topic_words(t), "word_given_topic", t);
  for (std::size_t d = 0; d < model.num_docs(); ++d) {
    check_row(model.doc_mixture(d), "doc_mixtures", d);
  }
}

}  // namespace phototopic
