#include <algorithm>
#include <exception>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "phototopic/diagnostics.hpp"
#include "phototopic/digest.hpp"
#include "phototopic/error.hpp"
#include "phototopic/pipeline.hpp"

namespace phototopic {

using nlohmann::json;

namespace {

std::string pick_collection_id(std::span<const TagRecord> records,
                               const OrganizeOptions& options) {
  if (options.collection_id) return *options.collection_id;
  std::set<std::string> ids;
  for (const TagRecord& r : records) ids.insert(r.collection_id);
  if (ids.size() == 1) return *ids.begin();
  return {};
}

void attach_category(ImageEntry& entry, const CategoryScores& scores) {
  const auto it = scores.by_image.find(entry.image_id);
  if (it == scores.by_image.end()) return;
  const CategoryScore* best = nullptr;
  for (const CategoryScore& s : it->second) {
    if (s.topic != entry.topic) continue;  // other topics' classifiers do not apply
    if (best == nullptr || s.score > best->score ||
        (s.score == best->score && s.category < best->category)) {
      best = &s;
    }
  }
  if (best != nullptr) {
    entry.category = best->category;
    entry.category_score = best->score;
  }
}

}  // namespace

std::size_t OrganizedCollection::num_null() const {
  return static_cast<std::size_t>(std::count_if(
      images.begin(), images.end(), [](const ImageEntry& e) { return !e.topic_index; }));
}

double OrganizedCollection::coverage() const {
  if (images.empty()) return 0.0;
  return static_cast<double>(images.size() - num_null()) / static_cast<double>(images.size());
}

OrganizedCollection organize_collection(std::span<const TagRecord> records,
                                        const PlsaModel& model, const Vocabulary& vocab,
                                        const NamingResult& naming,
                                        const OrganizeOptions& options,
                                        const CategoryScores* scores) {
  if (vocab.hash() != model.vocab_hash) {
    throw ValidationError("organize: vocabulary hash does not match the model");
  }
  if (vocab.size() != model.num_words) {
    throw ValidationError("organize: vocabulary size does not match the model");
  }
  if (naming.topics.size() != model.num_topics) {
    throw ValidationError("organize: naming has " + std::to_string(naming.topics.size()) +
                          " topics, model has " + std::to_string(model.num_topics));
  }
  {
    std::set<std::string_view> seen;
    for (const TagRecord& r : records) {
      if (!seen.insert(r.image_id).second) {
        throw ValidationError("organize: duplicate image_id '" + r.image_id + "'");
      }
    }
  }

  std::vector<ImageEntry> entries(records.size());
  auto work = [&](std::size_t begin, std::size_t stride) {
    for (std::size_t i = begin; i < records.size(); i += stride) {
      const auto doc = vectorize(records[i], vocab, options.weighting);
      const auto mixture = fold_in(model, doc, options.fold_in);
      TopicAssignment a = assign_topic(mixture, options.threshold);
      ImageEntry& e = entries[i];
      e.image_id = records[i].image_id;
      e.topic_index = a.topic;
      e.topic = a.topic ? naming.name_of(*a.topic) : std::string(kNullTopicName);
      e.mixture = std::move(a.mixture);
      e.max_prob = a.max_prob;
    }
  };
  const std::size_t threads =
      std::max<std::size_t>(1, std::min<std::size_t>(options.threads, records.size()));
  if (threads <= 1) {
    work(0, 1);
  } else {
    std::vector<std::exception_ptr> errors(threads);
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        try {
          work(t, threads);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    }
    for (std::thread& th : pool) th.join();
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  OrganizedCollection out;
  out.collection_id = pick_collection_id(records, options);
  out.model_hash = sha256_hex(serialize_model(model));
  if (scores != nullptr) {
    std::size_t orphans = 0;
    std::set<std::string_view> ids;
    for (const ImageEntry& e : entries) ids.insert(e.image_id);
    for (const auto& [id, _] : scores->by_image) orphans += ids.count(id) == 0;
    if (orphans > 0) {
      warn("organize: " + std::to_string(orphans) +
           " image(s) in the category scores are not in the collection");
    }
    for (ImageEntry& e : entries) {
      if (e.topic_index) attach_category(e, *scores);
    }
  }
  std::sort(entries.begin(), entries.end(),
            [](const ImageEntry& a, const ImageEntry& b) { return a.image_id < b.image_id; });
  for (const ImageEntry& e : entries) {
    out.index[e.topic][e.category.value_or(kUncategorized)].push_back(e.image_id);
  }
  out.images = std::move(entries);
  return out;
}

std::string manifest_string(const OrganizedCollection& c) {
  json images = json::array();
  for (const ImageEntry& e : c.images) {
    images.push_back({{"image_id", e.image_id},
                      {"topic", e.topic},
                      {"topic_index", e.topic_index ? json(*e.topic_index) : json(nullptr)},
                      {"mixture", e.mixture},
                      {"max_prob", e.max_prob},
                      {"category", e.category ? json(*e.category) : json(nullptr)},
                      {"category_score", e.category ? json(e.category_score) : json(nullptr)}});
  }
  json index = json::object();
  for (const auto& [topic, cats] : c.index) {
    json t = json::object();
    for (const auto& [cat, ids] : cats) t[cat] = ids;
    index[topic] = std::move(t);
  }
  const json obj = {{"format", "phototopic-manifest"},
                    {"version", 1},
                    {"collection_id", c.collection_id},
                    {"model_hash", c.model_hash},
                    {"num_images", c.images.size()},
                    {"num_null", c.num_null()},
                    {"coverage", c.coverage()},
                    {"images", std::move(images)},
                    {"index", std::move(index)}};
  return obj.dump(1) + '\n';
}

std::size_t emit_manifest(const OrganizedCollection& collection, std::ostream& sink) {
  const std::string text = manifest_string(collection);
  sink.write(text.data(), static_cast<std::streamsize>(text.size()));
  sink.flush();
  if (!sink) throw IoError("write failure in manifest sink");
  return text.size();
}

}  // namespace phototopic
