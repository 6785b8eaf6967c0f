#include "cli.hpp"

#include <cstdlib>
#include <fstream>
#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "phototopic/coherence.hpp"
#include "phototopic/corpus.hpp"
#include "phototopic/defaults.hpp"
#include "phototopic/diagnostics.hpp"
#include "phototopic/error.hpp"
#include "phototopic/kernels.hpp"
#include "phototopic/naming.hpp"
#include "phototopic/pipeline.hpp"
#include "phototopic/plsa.hpp"
#include "phototopic/taxonomy.hpp"

namespace phototopic::cli {

namespace {

using nlohmann::json;

// Restores the previous warning sink on scope exit.
class SinkGuard {
 public:
  explicit SinkGuard(WarningSink sink) : previous_(set_warning_sink(std::move(sink))) {}
  ~SinkGuard() { set_warning_sink(std::move(previous_)); }
  SinkGuard(const SinkGuard&) = delete;
  SinkGuard& operator=(const SinkGuard&) = delete;

 private:
  WarningSink previous_;
};

// Writes to --out when given (and not "-"), otherwise to the default stream.
void write_output(const std::string& path, std::ostream& fallback,
                  const std::function<void(std::ostream&)>& body) {
  if (path.empty() || path == "-") {
    body(fallback);
    fallback.flush();
    if (!fallback) throw IoError("write failure on standard output");
    return;
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw IoError("cannot open '" + path + "' for writing");
  body(file);
  file.flush();
  if (!file) throw IoError("write failure on '" + path + "'");
}

std::ifstream open_input(const std::string& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(std::string("cannot open ") + what + " '" + path + "'");
  return in;
}

std::vector<std::string> read_id_list(const std::string& path) {
  auto in = open_input(path, "id list");
  std::vector<std::string> ids;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (!line.empty()) ids.push_back(line);
  }
  return ids;
}

struct Options {
  // shared
  std::string records, vocab, model, naming, out;
  std::string weighting = "binary";
  // build-vocab
  int min_count = defaults::kMinCount;
  int min_collections = defaults::kMinCollections;
  // train
  std::size_t topics = defaults::kNumTopics;
  int max_iters = defaults::kMaxIters;
  double tol = defaults::kTolerance;
  std::uint64_t seed = defaults::kSeed;
  double smoothing = defaults::kSmoothing;
  // fold-in / organize
  double threshold = defaults::kNullThreshold;
  int fold_in_iters = defaults::kFoldInMaxIters;
  double fold_in_tol = defaults::kFoldInTolerance;
  std::string scores, registry, collection_id;
  unsigned threads = 1;
  // name-topics
  std::size_t top_words = defaults::kTopWords;
  std::string names_file, taxonomy, lexicon, ic, counts;
  bool distinct = false;
  // coherence
  std::string ref_corpus, stats_cache;
  std::size_t top_n = defaults::kCoherenceTopN;
  double epsilon = defaults::kCoherenceEpsilon;
  // fetch-tags
  std::string endpoint, path = "/tags", api_key_env, ids_file;
  std::vector<std::string> ids;
  int timeout = 10;
  // global
  std::string kernels;
  bool quiet = false;
};

void cmd_build_vocab(const Options& o, std::ostream& out, std::ostream& err) {
  const auto records = read_tag_records_file(o.records);
  const Vocabulary vocab = build_vocabulary(records, {o.min_count, o.min_collections});
  if (vocab.empty()) warn("build-vocab: no tag passes the frequency thresholds");
  write_output(o.out, out, [&](std::ostream& s) { write_vocabulary(s, vocab); });
  err << "vocabulary: " << vocab.size() << " words from " << records.size() << " records\n";
}

void cmd_train(const Options& o, std::ostream& out, std::ostream& err) {
  const auto records = read_tag_records_file(o.records);
  const Vocabulary vocab = read_vocabulary_file(o.vocab);
  const auto x = build_cooccurrence(records, vocab, parse_weighting(o.weighting));
  TrainConfig cfg;
  cfg.num_topics = o.topics;
  cfg.max_iters = o.max_iters;
  cfg.tol = o.tol;
  cfg.seed = o.seed;
  cfg.smoothing = o.smoothing;
  const PlsaModel model = train(x, cfg, vocab.hash());
  write_output(o.out, out, [&](std::ostream& s) { write_model(s, model); });
  err << "trained K=" << model.num_topics << " M=" << model.num_words
      << " N=" << model.num_docs() << " in " << model.iterations
      << " iterations, log-likelihood " << model.log_likelihood << " (kernels "
      << kernels::active().name << ")\n";
}

void check_vocab(const PlsaModel& model, const Vocabulary& vocab) {
  if (model.vocab_hash != vocab.hash()) {
    throw ValidationError("vocabulary hash does not match the model");
  }
}

void cmd_fold_in(const Options& o, std::ostream& out, std::ostream&) {
  const PlsaModel model = read_model_file(o.model);
  const Vocabulary vocab = read_vocabulary_file(o.vocab);
  check_vocab(model, vocab);
  const auto records = read_tag_records_file(o.records);
  const Weighting w = parse_weighting(o.weighting);
  const FoldInOptions fopts{o.fold_in_iters, o.fold_in_tol};
  write_output(o.out, out, [&](std::ostream& s) {
    for (const TagRecord& r : records) {
      const auto mixture = fold_in(model, vectorize(r, vocab, w), fopts);
      const TopicAssignment a = assign_topic(mixture, o.threshold);
      const json line = {{"image_id", r.image_id},
                         {"mixture", a.mixture},
                         {"topic", a.topic ? json(*a.topic) : json(nullptr)},
                         {"max_prob", a.max_prob}};
      s << line.dump() << '\n';
    }
  });
}

std::vector<TopicNameDef> load_names(const Options& o) {
  return o.names_file.empty() ? default_topic_names() : read_topic_names_file(o.names_file);
}

void cmd_name_topics(const Options& o, std::ostream& out, std::ostream& err) {
  const PlsaModel model = read_model_file(o.model);
  const Vocabulary vocab = read_vocabulary_file(o.vocab);
  check_vocab(model, vocab);
  if (!o.ic.empty() && !o.counts.empty()) {
    throw InvalidArgument("name-topics: give at most one of --ic and --counts");
  }
  const IcSource source = !o.ic.empty()       ? IcSource::kIcValues
                          : !o.counts.empty() ? IcSource::kRawCounts
                                              : IcSource::kNone;
  const TaxonomyGraph graph = load_taxonomy_files(
      o.taxonomy, o.lexicon, o.ic.empty() ? o.counts : o.ic, source);
  const auto defs = load_names(o);
  const NamingResult naming = name_topics(model, vocab, defs, graph, o.top_words,
                                          o.distinct ? NamingMode::kDistinct
                                                     : NamingMode::kIndependent);
  write_output(o.out, out, [&](std::ostream& s) { write_naming(s, naming); });
  for (std::size_t k = 0; k < naming.topics.size(); ++k) {
    const TopicNaming& t = naming.topics[k];
    err << "topic " << k << ": " << t.name << (t.duplicate ? " (duplicate)" : "") << '\n';
  }
}

void cmd_coherence(const Options& o, std::ostream& out, std::ostream&) {
  const PlsaModel model = read_model_file(o.model);
  const Vocabulary vocab = read_vocabulary_file(o.vocab);
  check_vocab(model, vocab);
  CoherenceConfig cfg{o.top_n, o.epsilon};
  cfg.validate();

  // Counting only vocabulary words bounds the pair table; a cache built this
  // way serves every model trained on the same vocabulary.
  CorpusStats stats;
  std::ifstream cached;
  if (!o.stats_cache.empty()) cached.open(o.stats_cache, std::ios::binary);
  if (cached.is_open()) {
    stats = CorpusStats::read(cached);
  } else {
    if (o.ref_corpus.empty()) throw InvalidArgument("coherence: --ref-corpus is required");
    const std::unordered_set<std::string> filter(vocab.words().begin(), vocab.words().end());
    auto in = open_input(o.ref_corpus, "reference corpus");
    stats = build_corpus_stats(in, &filter);
    if (!o.stats_cache.empty()) {
      write_output(o.stats_cache, out, [&](std::ostream& s) { stats.write(s); });
    }
  }

  std::optional<NamingResult> naming;
  if (!o.naming.empty()) naming = read_naming_file(o.naming);
  const std::size_t n = std::min(cfg.top_n, model.num_words);
  write_output(o.out, out, [&](std::ostream& s) {
    for (std::size_t k = 0; k < model.num_topics; ++k) {
      std::vector<std::string> words;
      for (auto& [w, p] : top_words(model, vocab, k, n)) words.push_back(w);
      const CoherenceScore uci = uci_score(words, stats, cfg);
      const CoherenceScore umass = umass_score(words, stats, cfg);
      const CoherenceScore npmi = avg_npmi(words, stats, cfg);
      json line = {{"topic", k},
                   {"words", words},
                   {"uci", uci.value},
                   {"umass", umass.value},
                   {"npmi", npmi.value},
                   {"flagged_pairs", {{"uci", uci.flagged_pairs},
                                      {"umass", umass.flagged_pairs},
                                      {"npmi", npmi.flagged_pairs}}}};
      if (naming && k < naming->topics.size()) line["name"] = naming->name_of(k);
      s << line.dump() << '\n';
    }
  });
}

void cmd_organize(const Options& o, std::ostream& out, std::ostream& err) {
  const PlsaModel model = read_model_file(o.model);
  const Vocabulary vocab = read_vocabulary_file(o.vocab);
  const NamingResult naming = read_naming_file(o.naming);
  const auto records = read_tag_records_file(o.records);
  std::optional<CategoryScores> scores;
  if (!o.scores.empty()) {
    const CategoryRegistry registry = o.registry.empty()
                                          ? default_category_registry()
                                          : read_category_registry_file(o.registry);
    scores = read_category_scores_file(o.scores, registry);
  }
  OrganizeOptions opts;
  opts.threshold = o.threshold;
  opts.weighting = parse_weighting(o.weighting);
  opts.fold_in = {o.fold_in_iters, o.fold_in_tol};
  opts.threads = o.threads;
  if (!o.collection_id.empty()) opts.collection_id = o.collection_id;
  const OrganizedCollection c = organize_collection(records, model, vocab, naming, opts,
                                                    scores ? &*scores : nullptr);
  write_output(o.out, out, [&](std::ostream& s) { emit_manifest(c, s); });
  err << "organized " << c.images.size() << " images, coverage " << c.coverage() << '\n';
}

int cmd_fetch_tags(const Options& o, std::ostream& out, std::ostream& err) {
  Endpoint ep;
  ep.base_url = o.endpoint;
  ep.path = o.path;
  ep.collection_id = o.collection_id;
  ep.timeout_seconds = o.timeout;
  if (!o.api_key_env.empty()) {
    const char* key = std::getenv(o.api_key_env.c_str());
    if (key == nullptr) throw InvalidArgument("environment variable " + o.api_key_env + " is not set");
    ep.api_key = key;
  }
  std::vector<std::string> ids = o.ids;
  if (!o.ids_file.empty()) {
    const auto more = read_id_list(o.ids_file);
    ids.insert(ids.end(), more.begin(), more.end());
  }
  const FetchResult r = fetch_tags(ep, ids);
  write_output(o.out, out, [&](std::ostream& s) { write_tag_records(s, r.records); });
  for (const FetchFailure& f : r.failures) {
    err << "failed: " << f.image_id << " (" << (f.status ? std::to_string(f.status) : "transport")
        << "): " << f.message << '\n';
  }
  err << "fetched " << r.records.size() << " of " << ids.size() << " images\n";
  return r.records.empty() ? kIo : kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  SinkGuard sink([&err](std::string_view msg) { err << "warning: " << msg << '\n'; });
  Options o;
  CLI::App app{"Organize tag-annotated photo collections by latent topic", "phototopic"};
  app.require_subcommand(1);
  app.add_option("--kernels", o.kernels, "Kernel variant: scalar, avx2 or neon");
  app.add_flag("-q,--quiet", o.quiet, "Suppress warnings");

  auto weighting = [&](CLI::App* c) {
    c->add_option("--weighting", o.weighting, "binary or confidence")
        ->check(CLI::IsMember({"binary", "confidence"}))
        ->capture_default_str();
  };
  auto fold_in_opts = [&](CLI::App* c) {
    c->add_option("--fold-in-iters", o.fold_in_iters, "Fold-in iteration cap")->capture_default_str();
    c->add_option("--fold-in-tol", o.fold_in_tol, "Fold-in L-infinity tolerance")->capture_default_str();
  };

  auto* bv = app.add_subcommand("build-vocab", "Build the tag vocabulary");
  bv->add_option("--records", o.records, "Tag records (JSON lines)")->required();
  bv->add_option("--min-count", o.min_count, "Keep tags used more than this")->capture_default_str();
  bv->add_option("--min-collections", o.min_collections, "Distinct collections a tag needs")
      ->capture_default_str();
  bv->add_option("-o,--out", o.out, "Vocabulary file (default stdout)");

  auto* tr = app.add_subcommand("train", "Train a pLSA model");
  tr->add_option("--records", o.records, "Tag records (JSON lines)")->required();
  tr->add_option("--vocab", o.vocab, "Vocabulary file")->required();
  tr->add_option("--topics", o.topics, "Number of topics K")->capture_default_str();
  tr->add_option("--max-iters", o.max_iters, "EM iteration cap")->capture_default_str();
  tr->add_option("--tol", o.tol, "Relative log-likelihood tolerance")->capture_default_str();
  tr->add_option("--seed", o.seed, "Initialization seed")->capture_default_str();
  tr->add_option("--smoothing", o.smoothing, "Additive P(w|z) smoothing")->capture_default_str();
  weighting(tr);
  tr->add_option("-o,--out", o.out, "Model file (default stdout)");

  auto* fi = app.add_subcommand("fold-in", "Infer topic mixtures for new records");
  fi->add_option("--model", o.model, "Model file")->required();
  fi->add_option("--vocab", o.vocab, "Vocabulary file")->required();
  fi->add_option("--records", o.records, "Tag records (JSON lines)")->required();
  fi->add_option("--threshold", o.threshold, "Null threshold on max P(z|d)")->capture_default_str();
  weighting(fi);
  fold_in_opts(fi);
  fi->add_option("-o,--out", o.out, "Mixtures (JSON lines, default stdout)");

  auto* nt = app.add_subcommand("name-topics", "Name topics by taxonomy similarity");
  nt->add_option("--model", o.model, "Model file")->required();
  nt->add_option("--vocab", o.vocab, "Vocabulary file")->required();
  nt->add_option("--taxonomy", o.taxonomy, "Synset TSV (id<TAB>parents)")->required();
  nt->add_option("--lexicon", o.lexicon, "Lemma TSV (token<TAB>synsets)")->required();
  nt->add_option("--ic", o.ic, "Information content TSV");
  nt->add_option("--counts", o.counts, "Raw synset counts TSV");
  nt->add_option("--names-file", o.names_file, "Topic names TSV (default: shipped names)");
  nt->add_option("--top-words", o.top_words, "Top words Q per topic")->capture_default_str();
  nt->add_flag("--distinct", o.distinct, "One-to-one name matching");
  nt->add_option("-o,--out", o.out, "Naming file (default stdout)");

  auto* co = app.add_subcommand("coherence", "Score topic coherence on a reference corpus");
  co->add_option("--model", o.model, "Model file")->required();
  co->add_option("--vocab", o.vocab, "Vocabulary file")->required();
  co->add_option("--ref-corpus", o.ref_corpus, "Reference corpus, one document per line");
  co->add_option("--stats-cache", o.stats_cache, "Corpus statistics cache (read or created)");
  co->add_option("--naming", o.naming, "Naming file, adds topic names to the output");
  co->add_option("--top-n", o.top_n, "Top words scored per topic")->capture_default_str();
  co->add_option("--epsilon", o.epsilon, "Smoothing epsilon")->capture_default_str();
  co->add_option("-o,--out", o.out, "Scores (JSON lines, default stdout)");

  auto* og = app.add_subcommand("organize", "Emit the topic/category/image manifest");
  og->add_option("--records", o.records, "Tag records (JSON lines)")->required();
  og->add_option("--model", o.model, "Model file")->required();
  og->add_option("--vocab", o.vocab, "Vocabulary file")->required();
  og->add_option("--naming", o.naming, "Naming file")->required();
  og->add_option("--threshold", o.threshold, "Null threshold on max P(z|d)")->capture_default_str();
  og->add_option("--scores", o.scores, "Category scores (JSON lines)");
  og->add_option("--registry", o.registry, "Category registry TSV (default: shipped)");
  og->add_option("--collection-id", o.collection_id, "Collection id for the manifest");
  og->add_option("--threads", o.threads, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
  weighting(og);
  fold_in_opts(og);
  og->add_option("-o,--out", o.out, "Manifest file (default stdout)");

  auto* ft = app.add_subcommand("fetch-tags", "Fetch tags from an auto-tagging endpoint");
  ft->add_option("--endpoint", o.endpoint, "Base URL, scheme://host[:port]")->required();
  ft->add_option("--path", o.path, "Request path")->capture_default_str();
  ft->add_option("--api-key-env", o.api_key_env, "Environment variable holding the API key");
  ft->add_option("--ids", o.ids_file, "File with one image id per line");
  ft->add_option("--collection-id", o.collection_id, "Collection id for the records");
  ft->add_option("--timeout", o.timeout, "Per-request timeout in seconds")->capture_default_str();
  ft->add_option("image_ids", o.ids, "Image ids");
  ft->add_option("-o,--out", o.out, "Tag records (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kValidation;
  }

  std::optional<SinkGuard> mute;
  if (o.quiet) mute.emplace([](std::string_view) {});

  try {
    if (!o.kernels.empty() && !kernels::select(o.kernels)) {
      throw InvalidArgument("kernel variant '" + o.kernels + "' is not available");
    }
    if (bv->parsed()) cmd_build_vocab(o, out, err);
    if (tr->parsed()) cmd_train(o, out, err);
    if (fi->parsed()) cmd_fold_in(o, out, err);
    if (nt->parsed()) cmd_name_topics(o, out, err);
    if (co->parsed()) cmd_coherence(o, out, err);
    if (og->parsed()) cmd_organize(o, out, err);
    if (ft->parsed()) return cmd_fetch_tags(o, out, err);
    return kOk;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kIo;
  } catch (const TransportError& e) {
    err << "error: " << e.what() << '\n';
    return kIo;
  } catch (const NumericError& e) {
    err << "error: " << e.what() << '\n';
    return kNumeric;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kInternal;
  }
}

}  // namespace phototopic::cli
