#include "phototopic/taxonomy.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <limits>
#include <unordered_set>

#include "../common/numfmt.hpp"
#include "../common/text.hpp"
#include "phototopic/diagnostics.hpp"
#include "phototopic/error.hpp"

namespace phototopic {

using SynsetId = TaxonomyGraph::SynsetId;

namespace {

std::vector<std::string> split_ids(std::string_view field) {
  std::vector<std::string> out;
  for (std::string_view part : detail::split(field, ',')) {
    part = detail::trim(part);
    if (!part.empty()) out.emplace_back(part);
  }
  return out;
}

// Hop distance from `start` to each of its ancestors (itself at 0).
std::unordered_map<SynsetId, std::size_t> upward_distances(const TaxonomyGraph& g,
                                                           SynsetId start) {
  std::unordered_map<SynsetId, std::size_t> dist{{start, 0}};
  std::deque<SynsetId> queue{start};
  while (!queue.empty()) {
    const SynsetId s = queue.front();
    queue.pop_front();
    const std::size_t next = dist[s] + 1;
    for (SynsetId p : g.parents(s)) {
      if (dist.emplace(p, next).second) queue.push_back(p);
    }
  }
  return dist;
}

}  // namespace

TaxonomyGraph TaxonomyGraph::build(std::vector<SynsetSpec> synsets,
                                   std::vector<LemmaSpec> lemmas) {
  TaxonomyGraph g;
  g.ids_.reserve(synsets.size());
  for (SynsetSpec& s : synsets) {
    if (s.id.empty()) throw ValidationError("taxonomy: empty synset id");
    if (!g.index_.emplace(s.id, g.ids_.size()).second) {
      throw ValidationError("taxonomy: synset '" + s.id + "' defined twice");
    }
    g.ids_.push_back(s.id);
  }
  g.parents_.resize(g.ids_.size());
  std::vector<std::vector<SynsetId>> children(g.ids_.size());
  for (std::size_t i = 0; i < synsets.size(); ++i) {
    for (const std::string& p : synsets[i].parents) {
      const auto it = g.index_.find(p);
      if (it == g.index_.end()) {
        throw ValidationError("taxonomy: synset '" + synsets[i].id +
                              "' names unknown parent '" + p + "'");
      }
      auto& ps = g.parents_[i];
      if (std::find(ps.begin(), ps.end(), it->second) == ps.end()) {
        ps.push_back(it->second);
        children[it->second].push_back(i);
      }
    }
  }

  // Kahn's algorithm from the roots down.
  std::vector<std::size_t> pending(g.ids_.size());
  std::deque<SynsetId> ready;
  for (SynsetId s = 0; s < g.ids_.size(); ++s) {
    pending[s] = g.parents_[s].size();
    if (pending[s] == 0) {
      g.roots_.push_back(s);
      ready.push_back(s);
    }
  }
  while (!ready.empty()) {
    const SynsetId s = ready.front();
    ready.pop_front();
    g.topo_.push_back(s);
    for (SynsetId c : children[s]) {
      if (--pending[c] == 0) ready.push_back(c);
    }
  }
  if (g.topo_.size() != g.ids_.size()) {
    // Every unplaced synset still has an unplaced parent, so walking those
    // parents must revisit a node: that closes the cycle.
    SynsetId s = 0;
    while (pending[s] == 0) ++s;
    std::vector<int> seen(g.ids_.size(), 0);
    SynsetId child = s;
    while (true) {
      seen[s] = 1;
      SynsetId parent = s;
      for (SynsetId p : g.parents_[s]) {
        if (pending[p] != 0) {
          parent = p;
          break;
        }
      }
      child = s;
      s = parent;
      if (seen[s]) break;
    }
    throw ValidationError("taxonomy: hypernym cycle through edge '" + g.ids_[s] +
                          "' -> '" + g.ids_[child] + "'");
  }

  for (LemmaSpec& l : lemmas) {
    auto& targets = g.lemmas_[l.token];
    for (const std::string& sid : l.synsets) {
      const auto it = g.index_.find(sid);
      if (it == g.index_.end()) {
        throw ValidationError("lexicon: token '" + l.token +
                              "' references unknown synset '" + sid + "'");
      }
      if (std::find(targets.begin(), targets.end(), it->second) == targets.end()) {
        targets.push_back(it->second);
      }
    }
  }
  g.ic_.assign(g.ids_.size(), 0.0);
  return g;
}

std::optional<SynsetId> TaxonomyGraph::find(std::string_view id) const {
  const auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

SynsetId TaxonomyGraph::require(std::string_view id) const {
  const auto s = find(id);
  if (!s) throw InvalidArgument("taxonomy: unknown synset '" + std::string(id) + "'");
  return *s;
}

void TaxonomyGraph::set_ic(std::vector<double> values) {
  if (values.size() != ids_.size()) {
    throw InvalidArgument("taxonomy: IC vector size does not match the synset count");
  }
  for (double v : values) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw ValidationError("taxonomy: IC values must be finite and >= 0");
    }
  }
  ic_ = std::move(values);
}

std::span<const SynsetId> TaxonomyGraph::lemma_synsets(std::string_view token) const {
  const auto it = lemmas_.find(std::string(token));
  if (it == lemmas_.end()) return {};
  return it->second;
}

std::span<const SynsetId> TaxonomyGraph::senses(std::string_view word) const {
  std::string base = detail::to_lower(detail::trim(word));
  if (auto hit = lemma_synsets(base); !hit.empty()) return hit;
  std::replace(base.begin(), base.end(), '-', '_');
  std::replace(base.begin(), base.end(), ' ', '_');
  if (auto hit = lemma_synsets(base); !hit.empty()) return hit;

  const auto ends_with = [&](std::string_view suffix) {
    return base.size() > suffix.size() &&
           std::string_view(base).substr(base.size() - suffix.size()) == suffix;
  };
  if (ends_with("ies")) {
    if (auto hit = lemma_synsets(base.substr(0, base.size() - 3) + "y"); !hit.empty()) return hit;
  }
  if (ends_with("es")) {
    if (auto hit = lemma_synsets(base.substr(0, base.size() - 2)); !hit.empty()) return hit;
  }
  if (ends_with("s")) {
    if (auto hit = lemma_synsets(base.substr(0, base.size() - 1)); !hit.empty()) return hit;
  }
  return {};
}

std::vector<std::pair<SynsetId, SynsetId>> TaxonomyGraph::ic_monotonicity_violations() const {
  std::vector<std::pair<SynsetId, SynsetId>> out;
  for (SynsetId c = 0; c < size(); ++c) {
    for (SynsetId p : parents_[c]) {
      if (ic_[p] > ic_[c]) out.emplace_back(p, c);
    }
  }
  return out;
}

// --- loading -----------------------------------------------------------------

TaxonomyGraph load_taxonomy(std::istream& taxonomy, std::istream& lexicon,
                            std::istream* ic_stream, IcSource source) {
  std::vector<TaxonomyGraph::SynsetSpec> synsets;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(taxonomy, line)) {
    ++line_no;
    const std::string_view body = detail::chomp(line);
    if (detail::trim(body).empty() || body.front() == '#') continue;
    const auto fields = detail::split(body, '\t');
    if (fields.size() > 2) throw ParseError("taxonomy: expected 'id<TAB>parents'", line_no);
    const std::string_view id = detail::trim(fields[0]);
    if (id.empty()) throw ParseError("taxonomy: empty synset id", line_no);
    synsets.push_back({std::string(id), fields.size() == 2 ? split_ids(fields[1])
                                                           : std::vector<std::string>{}});
  }
  if (taxonomy.bad()) throw IoError("read failure in taxonomy stream");

  std::vector<TaxonomyGraph::LemmaSpec> lemmas;
  line_no = 0;
  while (std::getline(lexicon, line)) {
    ++line_no;
    const std::string_view body = detail::chomp(line);
    if (detail::trim(body).empty() || body.front() == '#') continue;
    const auto fields = detail::split(body, '\t');
    if (fields.size() != 2) throw ParseError("lexicon: expected 'token<TAB>synsets'", line_no);
    const std::string token = detail::to_lower(detail::trim(fields[0]));
    if (token.empty()) throw ParseError("lexicon: empty token", line_no);
    lemmas.push_back({token, split_ids(fields[1])});
  }
  if (lexicon.bad()) throw IoError("read failure in lexicon stream");

  TaxonomyGraph graph = TaxonomyGraph::build(std::move(synsets), std::move(lemmas));

  if (source == IcSource::kNone || ic_stream == nullptr) {
    warn("taxonomy: no information content given; every IC is 0 and all Lin "
         "similarities will be 0");
    return graph;
  }
  if (source == IcSource::kRawCounts) {
    graph.set_ic(compute_ic(graph, read_ic_counts(*ic_stream)));
    return graph;
  }

  std::vector<double> ic(graph.size(), 0.0);
  std::vector<char> given(graph.size(), 0);
  line_no = 0;
  while (std::getline(*ic_stream, line)) {
    ++line_no;
    const std::string_view body = detail::chomp(line);
    if (detail::trim(body).empty() || body.front() == '#') continue;
    const auto fields = detail::split(body, '\t');
    if (fields.size() != 2) throw ParseError("ic: expected 'id<TAB>value'", line_no);
    const auto value = detail::parse_double(detail::trim(fields[1]));
    if (!value) throw ParseError("ic: bad value", line_no);
    const auto s = graph.find(detail::trim(fields[0]));
    if (!s) {
      warn("ic: ignoring unknown synset '" + std::string(detail::trim(fields[0])) + "'");
      continue;
    }
    ic[*s] = *value;
    given[*s] = 1;
  }
  if (ic_stream->bad()) throw IoError("read failure in IC stream");
  const auto missing = static_cast<std::size_t>(std::count(given.begin(), given.end(), 0));
  if (missing > 0) {
    warn("ic: " + std::to_string(missing) + " synset(s) have no IC value; using 0");
  }
  graph.set_ic(std::move(ic));
  if (const auto bad = graph.ic_monotonicity_violations(); !bad.empty()) {
    warn("ic: " + std::to_string(bad.size()) +
         " hypernym edge(s) have a parent more specific than its child, e.g. '" +
         graph.id(bad.front().first) + "' -> '" + graph.id(bad.front().second) + "'");
  }
  return graph;
}

TaxonomyGraph load_taxonomy_files(const std::string& taxonomy_path,
                                  const std::string& lexicon_path,
                                  const std::string& ic_path, IcSource source) {
  std::ifstream tax(taxonomy_path);
  if (!tax) throw IoError("cannot open taxonomy file '" + taxonomy_path + "'");
  std::ifstream lex(lexicon_path);
  if (!lex) throw IoError("cannot open lexicon file '" + lexicon_path + "'");
  if (source == IcSource::kNone || ic_path.empty()) {
    return load_taxonomy(tax, lex, nullptr, IcSource::kNone);
  }
  std::ifstream ic(ic_path);
  if (!ic) throw IoError("cannot open IC file '" + ic_path + "'");
  return load_taxonomy(tax, lex, &ic, source);
}

IcCounts read_ic_counts(std::istream& in) {
  IcCounts counts;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view body = detail::chomp(line);
    if (detail::trim(body).empty() || body.front() == '#') continue;
    const auto fields = detail::split(body, '\t');
    if (fields.size() != 2) throw ParseError("counts: expected 'id<TAB>count'", line_no);
    const auto value = detail::parse_double(detail::trim(fields[1]));
    if (!value || !(*value >= 0.0) || !std::isfinite(*value)) {
      throw ParseError("counts: count must be a finite number >= 0", line_no);
    }
    counts.counts[std::string(detail::trim(fields[0]))] += *value;
  }
  if (in.bad()) throw IoError("read failure in counts stream");
  return counts;
}

// --- IC and similarity ---------------------------------------------------------

std::vector<double> compute_ic(const TaxonomyGraph& graph, const IcCounts& counts) {
  std::vector<double> raw(graph.size(), 0.0);
  double total = 0.0;
  for (const auto& [id, c] : counts.counts) {
    if (!(c >= 0.0)) throw InvalidArgument("compute_ic: negative count");
    const auto s = graph.find(id);
    if (!s) {
      warn("compute_ic: ignoring count for unknown synset '" + id + "'");
      continue;
    }
    raw[*s] += c;
    total += c;
  }
  if (!(total > 0.0)) throw InvalidArgument("compute_ic: total count must be > 0");

  // Push every raw count to each distinct ancestor (self included) exactly
  // once; with multiple inheritance a plain bottom-up sum would double count.
  std::vector<double> cumulative(graph.size(), 0.0);
  for (SynsetId s = 0; s < graph.size(); ++s) {
    if (raw[s] == 0.0) continue;
    for (const auto& [ancestor, hops] : upward_distances(graph, s)) {
      cumulative[ancestor] += raw[s];
    }
  }
  const double denom = total + static_cast<double>(graph.size());
  std::vector<double> ic(graph.size());
  for (SynsetId s = 0; s < graph.size(); ++s) {
    ic[s] = -std::log((cumulative[s] + 1.0) / denom);
    if (ic[s] < 0.0) ic[s] = 0.0;  // -0.0 and rounding at the root
  }
  return ic;
}

std::optional<SynsetId> lcs(const TaxonomyGraph& graph, SynsetId a, SynsetId b) {
  if (a >= graph.size() || b >= graph.size()) {
    throw InvalidArgument("lcs: synset index out of range");
  }
  const auto from_a = upward_distances(graph, a);
  const auto from_b = upward_distances(graph, b);
  std::optional<SynsetId> best;
  std::size_t best_hops = 0;
  for (const auto& [node, hops_b] : from_b) {
    const auto it = from_a.find(node);
    if (it == from_a.end()) continue;
    const std::size_t hops = it->second + hops_b;
    if (!best) {
      best = node;
      best_hops = hops;
      continue;
    }
    const double ic = graph.ic(node);
    const double best_ic = graph.ic(*best);
    if (ic > best_ic || (ic == best_ic && (hops < best_hops ||
                                           (hops == best_hops && graph.id(node) < graph.id(*best))))) {
      best = node;
      best_hops = hops;
    }
  }
  return best;
}

std::optional<std::string> lcs(const TaxonomyGraph& graph, std::string_view a,
                               std::string_view b) {
  const auto s = lcs(graph, graph.require(a), graph.require(b));
  if (!s) return std::nullopt;
  return graph.id(*s);
}

double lin_similarity(const TaxonomyGraph& graph, SynsetId a, SynsetId b) {
  const auto common = lcs(graph, a, b);
  if (!common) return 0.0;
  const double denom = graph.ic(a) + graph.ic(b);
  if (!(denom > 0.0)) return 0.0;
  return std::clamp(2.0 * graph.ic(*common) / denom, 0.0, 1.0);
}

double lin_similarity(const TaxonomyGraph& graph, std::string_view a, std::string_view b) {
  return lin_similarity(graph, graph.require(a), graph.require(b));
}

double word_similarity(const TaxonomyGraph& graph, std::string_view a, std::string_view b) {
  double best = 0.0;
  const auto senses_b = graph.senses(b);
  for (SynsetId sa : graph.senses(a)) {
    for (SynsetId sb : senses_b) best = std::max(best, lin_similarity(graph, sa, sb));
  }
  return best;
}

double word_synset_similarity(const TaxonomyGraph& graph, std::string_view word,
                              SynsetId synset) {
  double best = 0.0;
  for (SynsetId s : graph.senses(word)) best = std::max(best, lin_similarity(graph, s, synset));
  return best;
}

}  // namespace phototopic
