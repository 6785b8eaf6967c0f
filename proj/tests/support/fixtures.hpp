#pragma once

// Synthetic corpora and taxonomies shared by the unit and acceptance tests.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "oracles.hpp"
#include "phototopic/corpus.hpp"
#include "phototopic/plsa.hpp"
#include "phototopic/taxonomy.hpp"

namespace fixtures {

inline double uniform01(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

inline std::size_t below(std::mt19937_64& gen, std::size_t n) {
  return static_cast<std::size_t>(gen() % n);
}

// Random sparse corpus: up to max_docs documents over up to max_words words,
// integer counts 1..3 or (when real_counts) reals in (0,2]. Some documents
// may be empty.
inline phototopic::CooccurrenceMatrix random_corpus(std::mt19937_64& gen, std::size_t max_docs,
                                                    std::size_t max_words,
                                                    bool real_counts = false) {
  const std::size_t m = 1 + below(gen, max_words);
  const std::size_t n = 1 + below(gen, max_docs);
  phototopic::CooccurrenceMatrix x(m);
  for (std::size_t d = 0; d < n; ++d) {
    std::vector<phototopic::WordCount> col;
    const double density = uniform01(gen);
    for (std::uint32_t w = 0; w < m; ++w) {
      if (uniform01(gen) >= density) continue;
      const double c = real_counts ? 2.0 * (1.0 - uniform01(gen))
                                   : static_cast<double>(1 + below(gen, 3));
      col.push_back({w, c});
    }
    x.add_document("d" + std::to_string(d), std::move(col));
  }
  return x;
}

struct PlantedCorpus {
  std::vector<phototopic::TagRecord> records;
  std::vector<std::size_t> labels;
  std::vector<std::vector<std::string>> groups;
};

// Documents drawn from `topics` disjoint vocabularies of `words_per_topic`
// words. Each document has `own` tags from its topic plus `noise` distinct
// tags drawn from the rest of the vocabulary.
inline PlantedCorpus planted_corpus(std::uint64_t seed, std::size_t docs = 300,
                                    std::size_t topics = 3, std::size_t words_per_topic = 10,
                                    std::size_t own = 7, std::size_t noise = 3) {
  std::mt19937_64 gen(seed);
  PlantedCorpus pc;
  pc.groups.resize(topics);
  for (std::size_t t = 0; t < topics; ++t) {
    for (std::size_t w = 0; w < words_per_topic; ++w) {
      pc.groups[t].push_back("t" + std::to_string(t) + "w" + std::to_string(w));
    }
  }
  for (std::size_t d = 0; d < docs; ++d) {
    const std::size_t label = d % topics;
    std::vector<std::string> pool = pc.groups[label];
    std::shuffle(pool.begin(), pool.end(), gen);
    std::vector<std::string> tags(pool.begin(), pool.begin() + own);
    std::vector<std::string> rest(pool.begin() + own, pool.end());
    for (std::size_t t = 0; t < topics; ++t) {
      if (t != label) rest.insert(rest.end(), pc.groups[t].begin(), pc.groups[t].end());
    }
    std::shuffle(rest.begin(), rest.end(), gen);
    tags.insert(tags.end(), rest.begin(), rest.begin() + noise);
    phototopic::TagRecord r;
    r.image_id = "img" + std::to_string(10000 + d);
    r.collection_id = "user" + std::to_string(d % 7);
    for (const auto& t : tags) r.tags.push_back({t, 0.5 + 0.5 * uniform01(gen)});
    pc.records.push_back(std::move(r));
    pc.labels.push_back(label);
  }
  return pc;
}

inline phototopic::Vocabulary vocabulary_of(const PlantedCorpus& pc) {
  std::vector<std::string> words;
  for (const auto& g : pc.groups) words.insert(words.end(), g.begin(), g.end());
  std::sort(words.begin(), words.end());
  return phototopic::Vocabulary(words);
}

// root(0) -> animal(0.7) -> {dog(2.0), cat(1.8)}
inline phototopic::TaxonomyGraph toy_taxonomy() {
  using G = phototopic::TaxonomyGraph;
  auto g = G::build({{"root", {}}, {"animal", {"root"}}, {"dog", {"animal"}}, {"cat", {"animal"}}},
                    {{"dog", {"dog"}}, {"cat", {"cat"}}, {"animal", {"animal"}}});
  g.set_ic({0.0, 0.7, 2.0, 1.8});
  return g;
}

// Random DAG: node i takes 0..3 parents among earlier nodes; ids are
// shuffled so id order does not follow topological order. IC values come
// from a small set so ties are common.
inline oracle::Dag random_dag(std::mt19937_64& gen, std::size_t max_nodes) {
  const std::size_t n = 1 + below(gen, max_nodes);
  oracle::Dag g;
  std::vector<std::size_t> names(n);
  for (std::size_t i = 0; i < n; ++i) names[i] = i;
  std::shuffle(names.begin(), names.end(), gen);
  for (std::size_t i = 0; i < n; ++i) {
    g.ids.push_back("s" + std::to_string(names[i]));
    std::vector<std::size_t> ps;
    if (i > 0) {
      const std::size_t k = below(gen, 4);
      for (std::size_t j = 0; j < k; ++j) ps.push_back(below(gen, i));
      std::sort(ps.begin(), ps.end());
      ps.erase(std::unique(ps.begin(), ps.end()), ps.end());
    }
    g.parents.push_back(ps);
    g.ic.push_back(0.5 * static_cast<double>(below(gen, 6)));
  }
  return g;
}

inline phototopic::TaxonomyGraph to_graph(const oracle::Dag& dag) {
  std::vector<phototopic::TaxonomyGraph::SynsetSpec> specs;
  for (std::size_t i = 0; i < dag.ids.size(); ++i) {
    phototopic::TaxonomyGraph::SynsetSpec s{dag.ids[i], {}};
    for (std::size_t p : dag.parents[i]) s.parents.push_back(dag.ids[p]);
    specs.push_back(std::move(s));
  }
  std::vector<phototopic::TaxonomyGraph::LemmaSpec> lemmas;
  auto g = phototopic::TaxonomyGraph::build(std::move(specs), std::move(lemmas));
  // Library indices need not match the oracle's; map IC through ids.
  std::vector<double> ic(g.size());
  for (std::size_t i = 0; i < dag.ids.size(); ++i) ic[g.require(dag.ids[i])] = dag.ic[i];
  g.set_ic(std::move(ic));
  return g;
}

// Random small document collection over words "a".."h" (at most 8).
inline oracle::Docs random_docs(std::mt19937_64& gen, std::size_t max_docs, std::size_t max_words,
                                std::vector<std::string>& vocab) {
  const std::size_t m = 2 + below(gen, max_words - 1);
  vocab.clear();
  for (std::size_t i = 0; i < m; ++i) vocab.push_back(std::string(1, static_cast<char>('a' + i)));
  const std::size_t n = 1 + below(gen, max_docs);
  oracle::Docs docs(n);
  for (auto& d : docs) {
    for (const auto& w : vocab) {
      if (uniform01(gen) < 0.5) d.insert(w);
    }
  }
  return docs;
}

inline std::string docs_text(const oracle::Docs& docs) {
  std::string s;
  for (const auto& d : docs) {
    // An empty document still has to count toward D, so give it a filler
    // token that is never scored.
    if (d.empty()) s += "zz_filler";
    for (const auto& w : d) s += w + " ";
    s += "\n";
  }
  return s;
}

// A small hypernym taxonomy with food and animal branches, plus a 3-topic
// model whose topic 0 favors food hyponyms, topic 1 animal hyponyms and
// topic 2 words that are not in the lexicon.
struct NamingWorld {
  phototopic::TaxonomyGraph graph;
  phototopic::Vocabulary vocab;
  phototopic::PlsaModel model;
  std::vector<std::string> food, animals, unknown;
};

inline NamingWorld naming_world(double ic_scale = 1.0) {
  using G = phototopic::TaxonomyGraph;
  NamingWorld w;
  w.food = {"pizza", "pasta", "burger", "salad", "soup", "apple", "banana", "cherry", "grape", "lemon"};
  w.animals = {"dog", "cat", "hamster", "horse", "cow", "sheep", "goat", "lion", "tiger", "bear"};
  w.unknown = {"qa", "qb", "qc", "qd", "qe", "qf", "qg", "qh", "qi", "qj"};
  std::vector<G::SynsetSpec> syn{{"entity", {}},       {"food.n.01", {"entity"}},
                                 {"drink.n.01", {"food.n.01"}},
                                 {"dish.n.01", {"food.n.01"}}, {"fruit.n.01", {"food.n.01"}},
                                 {"animal.n.01", {"entity"}}, {"pet.n.01", {"animal.n.01"}},
                                 {"mammal.n.01", {"animal.n.01"}}};
  std::vector<G::LemmaSpec> lex{{"food", {"food.n.01"}}, {"drink", {"drink.n.01"}},
                                {"animal", {"animal.n.01"}}, {"pet", {"pet.n.01"}}};
  phototopic::IcCounts counts;
  counts.counts["drink.n.01"] = 3;
  for (std::size_t i = 0; i < 10; ++i) {
    const std::string f = w.food[i] + ".n.01";
    syn.push_back({f, {i < 5 ? "dish.n.01" : "fruit.n.01"}});
    lex.push_back({w.food[i], {f}});
    counts.counts[f] = static_cast<double>(1 + i);
    const std::string a = w.animals[i] + ".n.01";
    syn.push_back({a, {i < 3 ? "pet.n.01" : "mammal.n.01"}});
    lex.push_back({w.animals[i], {a}});
    counts.counts[a] = static_cast<double>(2 + i);
  }
  w.graph = G::build(std::move(syn), std::move(lex));
  auto ic = phototopic::compute_ic(w.graph, counts);
  for (double& v : ic) v *= ic_scale;
  w.graph.set_ic(std::move(ic));

  std::vector<std::string> words;
  for (const auto* g : {&w.food, &w.animals, &w.unknown}) words.insert(words.end(), g->begin(), g->end());
  std::sort(words.begin(), words.end());
  w.vocab = phototopic::Vocabulary(words);
  w.model = phototopic::init_model(3, words.size(), 0);
  w.model.vocab_hash = w.vocab.hash();
  const std::vector<const std::vector<std::string>*> groups{&w.food, &w.animals, &w.unknown};
  for (std::size_t k = 0; k < 3; ++k) {
    double* row = &w.model.word_given_topic[k * words.size()];
    double total = 0;
    for (std::size_t i = 0; i < words.size(); ++i) {
      const bool own = std::find(groups[k]->begin(), groups[k]->end(), words[i]) != groups[k]->end();
      row[i] = own ? 10.0 + static_cast<double>(i % 7) : 0.1;
      total += row[i];
    }
    for (std::size_t i = 0; i < words.size(); ++i) row[i] /= total;
  }
  return w;
}

}  // namespace fixtures
