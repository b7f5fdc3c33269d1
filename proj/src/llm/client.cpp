#include "forge/llm/client.hpp"

#include <nlohmann/json.hpp>
#include <thread>

#include "forge/error.hpp"
#include "forge/util.hpp"

namespace forge {

namespace {

// Serializes concurrent misses on the same cache key so identical requests
// reach the provider once.
std::mutex& key_lock(const std::string& key) {
  static std::array<std::mutex, 64> stripes;
  return stripes[std::hash<std::string>{}(key) % stripes.size()];
}

class InFlight {
 public:
  InFlight(std::counting_semaphore<1024>& slots, std::atomic<int>& in_flight, std::atomic<int>& peak)
      : slots_(slots), in_flight_(in_flight) {
    slots_.acquire();
    int now = ++in_flight_;
    int prev = peak.load();
    while (now > prev && !peak.compare_exchange_weak(prev, now)) {
    }
  }
  ~InFlight() {
    --in_flight_;
    slots_.release();
  }
  InFlight(const InFlight&) = delete;
  InFlight& operator=(const InFlight&) = delete;

 private:
  std::counting_semaphore<1024>& slots_;
  std::atomic<int>& in_flight_;
};

}  // namespace

std::int64_t estimate_tokens(std::string_view text) {
  return static_cast<std::int64_t>((text.size() + 3) / 4);
}

LlmClient::LlmClient(ProviderConfig config, std::shared_ptr<Provider> provider)
    : config_(std::move(config)),
      provider_(std::move(provider)),
      slots_(std::max(1, std::min(config_.max_concurrent, 1024))) {
  if (config_.max_concurrent < 1) throw Error(Errc::config_error, "max_concurrent must be >= 1");
  if (!config_.cache_dir.empty()) std::filesystem::create_directories(config_.cache_dir);
}

Money LlmClient::price(const std::string& model, std::int64_t in, std::int64_t out) const {
  auto it = config_.price_table.find(model);
  if (it == config_.price_table.end()) return {};
  return it->second.cost(in, out);
}

void LlmClient::reserve_budget(Money estimate) {
  if (!config_.spend_cap) return;
  std::lock_guard lock(budget_mu_);
  if (committed_ + estimate > *config_.spend_cap) {
    throw Error(Errc::budget_exceeded, "call priced " + estimate.to_string() + " would exceed cap " +
                                           config_.spend_cap->to_string() + " (spent " +
                                           committed_.to_string() + ")");
  }
}

template <typename F>
auto LlmClient::with_retries(F&& call) -> decltype(call()) {
  for (int attempt = 0;; ++attempt) {
    try {
      InFlight guard(slots_, in_flight_, peak_in_flight_);
      ++wire_requests_;
      return call();
    } catch (const Error& e) {
      if (e.code() != Errc::provider_error || attempt >= config_.max_retries) throw;
    }
    if (config_.retry_backoff.count() > 0) {
      std::this_thread::sleep_for(config_.retry_backoff * (1 << attempt));
    }
  }
}

std::string LlmClient::chat(const std::string& prompt, const std::string& stage) {
  const std::string& model = config_.model_chat;
  const std::string key = sha256_hex("chat\n" + model + "\n" + prompt);
  std::lock_guard key_guard(key_lock(key));

  if (auto hit = cache_get_chat(key)) {
    ledger_.append({stage, model, hit->input_tokens, hit->output_tokens, true, Money{}, {}});
    return hit->text;
  }

  reserve_budget(price(model, estimate_tokens(prompt), config_.max_output_tokens));
  ChatReply reply = with_retries([&] { return provider_->chat(model, prompt); });
  Money cost = price(model, reply.input_tokens, reply.output_tokens);
  {
    std::lock_guard lock(budget_mu_);
    committed_ += cost;
  }
  ledger_.append({stage, model, reply.input_tokens, reply.output_tokens, false, cost, {}});
  cache_put_chat(key, {reply.text, reply.input_tokens, reply.output_tokens});
  return reply.text;
}

std::vector<std::vector<float>> LlmClient::embed(const std::vector<std::string>& texts,
                                                 const std::string& stage) {
  const std::string& model = config_.model_embed;
  std::vector<std::vector<float>> out(texts.size());
  std::vector<std::string> keys(texts.size());

  // distinct uncached texts, in first-seen order
  std::vector<std::size_t> todo;
  std::unordered_map<std::string, std::size_t> first_index;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    keys[i] = sha256_hex("embed\n" + model + "\n" + texts[i]);
    auto [it, inserted] = first_index.try_emplace(keys[i], i);
    if (!inserted) continue;
    if (auto hit = cache_get_embed(keys[i])) {
      out[i] = std::move(*hit);
      ledger_.append({stage, model, estimate_tokens(texts[i]), 0, true, Money{}, {}});
    } else {
      todo.push_back(i);
    }
  }

  std::size_t dim = 0;
  for (const auto& v : out) {
    if (!v.empty()) dim = v.size();
  }

  const std::size_t batch = std::max<std::size_t>(1, config_.embed_batch);
  for (std::size_t start = 0; start < todo.size(); start += batch) {
    std::vector<std::string> chunk;
    std::int64_t est = 0;
    for (std::size_t j = start; j < std::min(todo.size(), start + batch); ++j) {
      chunk.push_back(texts[todo[j]]);
      est += estimate_tokens(texts[todo[j]]);
    }
    reserve_budget(price(model, est, 0));
    EmbedReply reply = with_retries([&] { return provider_->embed(model, chunk); });
    if (reply.vectors.size() != chunk.size()) {
      throw Error(Errc::protocol_error, "embedding reply has " + std::to_string(reply.vectors.size()) +
                                            " vectors for " + std::to_string(chunk.size()) + " inputs");
    }
    for (const auto& v : reply.vectors) {
      if (v.empty() || (dim != 0 && v.size() != dim)) {
        throw Error(Errc::protocol_error, "inconsistent embedding dimension " + std::to_string(v.size()) +
                                              " (expected " + std::to_string(dim) + ")");
      }
      dim = v.size();
    }
    // apportion batch usage to entries; the last entry takes the remainder
    std::int64_t total_in = reply.input_tokens > 0 ? reply.input_tokens : est;
    std::int64_t assigned = 0;
    for (std::size_t j = 0; j < chunk.size(); ++j) {
      std::size_t idx = todo[start + j];
      std::int64_t share = j + 1 == chunk.size()
                               ? total_in - assigned
                               : (est > 0 ? total_in * estimate_tokens(chunk[j]) / est : 0);
      assigned += share;
      Money cost = price(model, share, 0);
      {
        std::lock_guard lock(budget_mu_);
        committed_ += cost;
      }
      ledger_.append({stage, model, share, 0, false, cost, {}});
      cache_put_embed(keys[idx], reply.vectors[j]);
      out[idx] = reply.vectors[j];
    }
  }

  for (std::size_t i = 0; i < texts.size(); ++i) {
    if (out[i].empty()) {
      // duplicate of an earlier text in this call
      out[i] = out[first_index.at(keys[i])];
      ledger_.append({stage, model, estimate_tokens(texts[i]), 0, true, Money{}, {}});
    }
  }
  return out;
}

void LlmClient::note(const std::string& stage, const std::string& reason) {
  ledger_.append({stage, config_.model_chat, 0, 0, false, Money{}, reason});
}

std::optional<LlmClient::CachedChat> LlmClient::cache_get_chat(const std::string& key) {
  {
    std::lock_guard lock(cache_mu_);
    if (auto it = chat_cache_.find(key); it != chat_cache_.end()) return it->second;
  }
  if (config_.cache_dir.empty()) return std::nullopt;
  auto path = config_.cache_dir / (key + ".json");
  if (!std::filesystem::exists(path)) return std::nullopt;
  try {
    auto j = nlohmann::json::parse(read_file(path));
    CachedChat c{j.at("text").get<std::string>(), j.at("input_tokens").get<std::int64_t>(),
                 j.at("output_tokens").get<std::int64_t>()};
    std::lock_guard lock(cache_mu_);
    chat_cache_.emplace(key, c);
    return c;
  } catch (const std::exception&) {
    return std::nullopt;  // unreadable entries are treated as misses
  }
}

void LlmClient::cache_put_chat(const std::string& key, const CachedChat& value) {
  {
    std::lock_guard lock(cache_mu_);
    chat_cache_.insert_or_assign(key, value);
  }
  if (config_.cache_dir.empty()) return;
  nlohmann::ordered_json j;
  j["text"] = value.text;
  j["input_tokens"] = value.input_tokens;
  j["output_tokens"] = value.output_tokens;
  write_file_atomic(config_.cache_dir / (key + ".json"), j.dump());
}

std::optional<std::vector<float>> LlmClient::cache_get_embed(const std::string& key) {
  {
    std::lock_guard lock(cache_mu_);
    if (auto it = embed_cache_.find(key); it != embed_cache_.end()) return it->second;
  }
  if (config_.cache_dir.empty()) return std::nullopt;
  auto path = config_.cache_dir / (key + ".json");
  if (!std::filesystem::exists(path)) return std::nullopt;
  try {
    auto v = nlohmann::json::parse(read_file(path)).at("embedding").get<std::vector<float>>();
    std::lock_guard lock(cache_mu_);
    embed_cache_.emplace(key, v);
    return v;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

void LlmClient::cache_put_embed(const std::string& key, const std::vector<float>& value) {
  {
    std::lock_guard lock(cache_mu_);
    embed_cache_.insert_or_assign(key, value);
  }
  if (config_.cache_dir.empty()) return;
  nlohmann::ordered_json j;
  j["embedding"] = value;
  write_file_atomic(config_.cache_dir / (key + ".json"), j.dump());
}

}  // namespace forge
