#include "forge/retrieval.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <nlohmann/json.hpp>
#include <random>
#include <sstream>

#include "forge/error.hpp"
#include "forge/llm/client.hpp"
#include "forge/util.hpp"

namespace forge {

using ojson = nlohmann::ordered_json;

std::vector<NodeId> RetrievalIndex::ids() const {
  std::vector<NodeId> out;
  out.reserve(vectors.size());
  for (const auto& [id, v] : vectors) out.push_back(id);
  return out;
}

void RetrievalIndex::add(NodeId id, const std::vector<float>& v) {
  if (v.empty()) throw Error(Errc::protocol_error, "empty embedding for node " + std::to_string(id));
  if (dim == 0) dim = v.size();
  if (v.size() != dim) {
    throw Error(Errc::protocol_error, "embedding of node " + std::to_string(id) + " has dimension " +
                                          std::to_string(v.size()) + ", index has " + std::to_string(dim));
  }
  double norm = 0;
  for (float x : v) norm += static_cast<double>(x) * x;
  norm = std::sqrt(norm);
  if (norm == 0 || !std::isfinite(norm)) {
    throw Error(Errc::protocol_error, "zero or non-finite embedding for node " + std::to_string(id));
  }
  std::vector<float> unit(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) unit[i] = static_cast<float>(v[i] / norm);
  vectors[id] = std::move(unit);
}

double cosine(const std::vector<float>& a, const std::vector<float>& b) {
  double s = 0;
  std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) s += static_cast<double>(a[i]) * b[i];
  return s;
}

RetrievalIndex build_index(const SiteGraph& graph, LlmClient& client, IndexBuildReport* report) {
  RetrievalIndex index;
  index.model_id = client.config().model_embed;
  IndexBuildReport local;
  auto& rep = report ? *report : local;

  std::vector<NodeId> ids;
  std::vector<std::string> texts;
  for (NodeId id = 0; id < graph.size(); ++id) {
    const auto& d = graph.node(id).description;
    if (trim(d).empty()) {
      rep.excluded.push_back(id);
      rep.reasons.push_back("no description");
      continue;
    }
    ids.push_back(id);
    texts.push_back(d);
  }

  std::vector<std::vector<float>> vectors;
  bool batched = true;
  try {
    vectors = client.embed(texts);
  } catch (const Error& e) {
    if (e.code() != Errc::provider_error) throw;
    batched = false;
  }
  for (std::size_t i = 0; i < ids.size(); ++i) {
    std::vector<float> v;
    if (batched) {
      v = vectors[i];
    } else {
      try {
        v = client.embed({texts[i]}).front();
      } catch (const Error& e) {
        if (e.code() != Errc::provider_error) throw;
        rep.excluded.push_back(ids[i]);
        rep.reasons.push_back(e.what());
        continue;
      }
    }
    index.add(ids[i], v);
  }
  if (index.size() == 0) throw Error(Errc::empty_index, "no node could be embedded");
  return index;
}

std::vector<Neighbor> top_k(const RetrievalIndex& index, NodeId seed, std::size_t k) {
  auto it = index.vectors.find(seed);
  if (it == index.vectors.end()) throw Error(Errc::seed_not_indexed, "node " + std::to_string(seed) + " is not indexed");
  std::vector<Neighbor> all;
  all.reserve(index.size());
  for (const auto& [id, v] : index.vectors) {
    if (id != seed) all.push_back({id, cosine(it->second, v)});
  }
  auto better = [](const Neighbor& a, const Neighbor& b) {
    return a.similarity != b.similarity ? a.similarity > b.similarity : a.id < b.id;
  };
  k = std::min(k, all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k), all.end(), better);
  all.resize(k);
  return all;
}

PairSample sample_pair(const RetrievalIndex& index, std::size_t k, std::uint64_t rng_seed) {
  if (index.size() < 2) throw Error(Errc::index_too_small, "pair sampling needs at least 2 indexed nodes");
  if (k == 0) throw Error(Errc::config_error, "k must be >= 1");
  std::mt19937_64 rng(rng_seed);
  auto ids = index.ids();
  NodeId seed = ids[uniform_below(rng, ids.size())];
  auto cands = top_k(index, seed, k);
  const auto& pick = cands[uniform_below(rng, cands.size())];
  PairSample p;
  p.seed = seed;
  p.secondary = pick.id;
  p.similarity = pick.similarity;
  p.rng_seed = rng_seed;
  return p;
}

PairSample sample_cross_pair(const RetrievalIndex& a, const RetrievalIndex& b, std::uint64_t rng_seed) {
  if (a.size() == 0 || b.size() == 0) throw Error(Errc::empty_index, "cross-site pairing needs two non-empty indices");
  if (a.dim != b.dim) throw Error(Errc::protocol_error, "indices have different dimensions");
  std::mt19937_64 rng(rng_seed);
  auto ids = a.ids();
  NodeId seed = ids[uniform_below(rng, ids.size())];
  const auto& sv = a.vectors.at(seed);
  PairSample p;
  p.seed_graph = 0;
  p.seed = seed;
  p.secondary_graph = 1;
  p.rng_seed = rng_seed;
  bool first = true;
  for (const auto& [id, v] : b.vectors) {
    double s = cosine(sv, v);
    if (first || s > p.similarity) {
      p.secondary = id;
      p.similarity = s;
      first = false;
    }
  }
  return p;
}

namespace {

std::string encode_vector(const std::vector<float>& v) {
  std::vector<std::uint8_t> bytes(v.size() * 4);
  for (std::size_t i = 0; i < v.size(); ++i) {
    std::uint32_t bits = std::bit_cast<std::uint32_t>(v[i]);
    for (int b = 0; b < 4; ++b) bytes[i * 4 + b] = static_cast<std::uint8_t>(bits >> (8 * b));
  }
  return base64_encode(bytes);
}

std::vector<float> decode_vector(std::string_view text) {
  auto bytes = base64_decode(text);
  if (bytes.size() % 4 != 0) throw Error(Errc::corrupt_file, "vector byte length is not a multiple of 4");
  std::vector<float> v(bytes.size() / 4);
  for (std::size_t i = 0; i < v.size(); ++i) {
    std::uint32_t bits = 0;
    for (int b = 0; b < 4; ++b) bits |= static_cast<std::uint32_t>(bytes[i * 4 + b]) << (8 * b);
    v[i] = std::bit_cast<float>(bits);
  }
  return v;
}

}  // namespace

std::string index_to_string(const RetrievalIndex& index) {
  std::string out;
  ojson h;
  h["format"] = "gta-index";
  h["version"] = kIndexFormatVersion;
  h["dim"] = index.dim;
  h["model_id"] = index.model_id;
  out += h.dump() + "\n";
  for (const auto& [id, v] : index.vectors) {
    ojson r;
    r["id"] = id;
    r["vector"] = encode_vector(v);
    out += r.dump() + "\n";
  }
  return out;
}

RetrievalIndex index_from_string(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  RetrievalIndex index;
  try {
    if (!std::getline(in, line)) throw Error(Errc::corrupt_file, "index file is empty");
    ++lineno;
    auto h = ojson::parse(line);
    if (!h.is_object() || h.value("format", "") != "gta-index") throw Error(Errc::corrupt_file, "not an index header");
    if (h.at("version").get<int>() != kIndexFormatVersion) {
      throw Error(Errc::schema_version_mismatch, "index version " + h["version"].dump() + ", expected " +
                                                     std::to_string(kIndexFormatVersion));
    }
    index.dim = h.at("dim").get<std::size_t>();
    index.model_id = h.at("model_id").get<std::string>();
    while (std::getline(in, line)) {
      ++lineno;
      if (trim(line).empty()) continue;
      auto r = ojson::parse(line);
      auto id = r.at("id").get<NodeId>();
      auto v = decode_vector(r.at("vector").get<std::string>());
      if (v.size() != index.dim) throw Error(Errc::corrupt_file, "vector dimension differs from header");
      if (!index.vectors.emplace(id, std::move(v)).second) throw Error(Errc::corrupt_file, "duplicate node id");
    }
  } catch (const Error& e) {
    if (e.code() == Errc::schema_version_mismatch) throw;
    throw Error(Errc::corrupt_file, "index line " + std::to_string(lineno) + ": " + e.message());
  } catch (const std::exception& e) {
    throw Error(Errc::corrupt_file, "index line " + std::to_string(lineno) + ": " + e.what());
  }
  return index;
}

void save_index(const RetrievalIndex& index, const std::filesystem::path& path) {
  write_file_atomic(path, index_to_string(index));
}

RetrievalIndex load_index(const std::filesystem::path& path) { return index_from_string(read_file(path)); }

}  // namespace forge
