#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <string>
#include <unordered_map>
#include <vector>

#include "forge/llm/ledger.hpp"
#include "forge/money.hpp"

namespace forge {

struct ProviderConfig {
  std::string endpoint = "https://api.openai.com/v1";
  std::string model_chat = "gpt-4o";
  std::string model_embed = "text-embedding-3-small";
  std::string api_key_env = "OPENAI_API_KEY";
  int max_concurrent = 4;
  int max_retries = 2;
  std::chrono::milliseconds retry_backoff{500};
  int max_output_tokens = 512;
  std::size_t embed_batch = 64;
  std::map<std::string, TokenPrice> price_table;
  std::optional<Money> spend_cap;
  /// On-disk response cache; empty disables persistence.
  std::filesystem::path cache_dir;
};

struct ChatReply {
  std::string text;
  std::int64_t input_tokens = 0;
  std::int64_t output_tokens = 0;
};

struct EmbedReply {
  std::vector<std::vector<float>> vectors;
  std::int64_t input_tokens = 0;
};

/// The wire. Implementations throw Error(provider_error) on failure; the
/// client owns retries, caching, budgeting and accounting.
class Provider {
 public:
  virtual ~Provider() = default;
  virtual ChatReply chat(const std::string& model, const std::string& prompt) = 0;
  virtual EmbedReply embed(const std::string& model, const std::vector<std::string>& texts) = 0;
};

/// Rough token estimate used for stub accounting and pre-call budgeting.
std::int64_t estimate_tokens(std::string_view text);

/// Provider-neutral chat/embedding access. Thread-safe.
class LlmClient {
 public:
  LlmClient(ProviderConfig config, std::shared_ptr<Provider> provider);

  /// Cache key is digest(model, prompt). Every call appends a ledger entry.
  std::string chat(const std::string& prompt, const std::string& stage);

  /// One vector per text; duplicates and cached texts never reach the wire.
  /// Mixed dimensions in a provider reply are a protocol-error.
  std::vector<std::vector<float>> embed(const std::vector<std::string>& texts,
                                        const std::string& stage = "embed");

  /// Records a rejection-at-source without a provider call.
  void note(const std::string& stage, const std::string& reason);

  const ProviderConfig& config() const { return config_; }
  CostLedger& ledger() { return ledger_; }
  const CostLedger& ledger() const { return ledger_; }

  /// Highest number of simultaneous in-flight provider requests observed.
  int peak_in_flight() const { return peak_in_flight_.load(); }
  std::size_t wire_requests() const { return wire_requests_.load(); }

 private:
  struct CachedChat {
    std::string text;
    std::int64_t input_tokens;
    std::int64_t output_tokens;
  };

  Money price(const std::string& model, std::int64_t in, std::int64_t out) const;
  void reserve_budget(Money estimate);
  template <typename F>
  auto with_retries(F&& call) -> decltype(call());

  std::optional<CachedChat> cache_get_chat(const std::string& key);
  void cache_put_chat(const std::string& key, const CachedChat& value);
  std::optional<std::vector<float>> cache_get_embed(const std::string& key);
  void cache_put_embed(const std::string& key, const std::vector<float>& value);

  ProviderConfig config_;
  std::shared_ptr<Provider> provider_;
  CostLedger ledger_;
  std::counting_semaphore<1024> slots_;
  std::atomic<int> in_flight_{0};
  std::atomic<int> peak_in_flight_{0};
  std::atomic<std::size_t> wire_requests_{0};

  std::mutex cache_mu_;
  std::unordered_map<std::string, CachedChat> chat_cache_;
  std::unordered_map<std::string, std::vector<float>> embed_cache_;

  std::mutex budget_mu_;
  Money committed_;
};

}  // namespace forge
