#include <sstream>

#include <httplib.h>
#include <json.hpp>

#include "phototopic/error.hpp"
#include "phototopic/pipeline.hpp"

namespace phototopic {

using nlohmann::json;

namespace {

// Normalizes either accepted response body into the tag-record line format
// so that records go through the same validation as files.
TagRecord record_from_body(const std::string& image_id, const std::string& collection_id,
                           const std::string& body) {
  const json doc = json::parse(body);
  json tags = json::array();
  if (doc.contains("result")) {
    for (const json& t : doc.at("result").at("tags")) {
      tags.push_back({{"tag", t.at("tag").at("en").get<std::string>()},
                      {"confidence", t.at("confidence").get<double>() / 100.0}});
    }
  } else {
    tags = doc.at("tags");
  }
  const json line = {{"image_id", image_id}, {"collection_id", collection_id}, {"tags", tags}};
  std::istringstream in(line.dump());
  auto recs = parse_tag_records(in);
  return std::move(recs.at(0));
}

}  // namespace

FetchResult fetch_tags(const Endpoint& endpoint, std::span<const std::string> image_ids) {
  if (image_ids.empty()) throw InvalidArgument("fetch_tags: no image ids");
  if (endpoint.base_url.empty()) throw InvalidArgument("fetch_tags: empty endpoint");

  httplib::Client client(endpoint.base_url);
  if (!client.is_valid()) throw InvalidArgument("fetch_tags: bad endpoint '" + endpoint.base_url + "'");
  client.set_connection_timeout(endpoint.timeout_seconds, 0);
  client.set_read_timeout(endpoint.timeout_seconds, 0);
  httplib::Headers headers;
  if (!endpoint.api_key.empty()) headers.emplace("Authorization", endpoint.api_key);

  FetchResult result;
  bool reached = false;
  for (const std::string& id : image_ids) {
    const httplib::Params params{{"image_id", id}};
    auto res = client.Get(endpoint.path, params, headers);
    if (!res) {
      const std::string why = httplib::to_string(res.error());
      if (!reached) {
        throw TransportError("fetch_tags: cannot reach " + endpoint.base_url + ": " + why);
      }
      result.failures.push_back({id, 0, why});
      continue;
    }
    reached = true;
    if (res->status < 200 || res->status >= 300) {
      result.failures.push_back({id, res->status, "HTTP " + std::to_string(res->status)});
      continue;
    }
    try {
      result.records.push_back(record_from_body(id, endpoint.collection_id, res->body));
    } catch (const json::exception& e) {
      result.failures.push_back({id, res->status, std::string("bad response: ") + e.what()});
    } catch (const Error& e) {
      result.failures.push_back({id, res->status, std::string("bad response: ") + e.what()});
    }
  }
  return result;
}

}  // namespace phototopic
