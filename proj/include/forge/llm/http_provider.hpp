#pragma once

#include <memory>
#include <string>

#include "forge/llm/client.hpp"

namespace forge {

/// OpenAI-compatible wire: POST {endpoint}/chat/completions and
/// {endpoint}/embeddings with a bearer key read from `api_key_env`.
class HttpProvider : public Provider {
 public:
  explicit HttpProvider(const ProviderConfig& config);

  ChatReply chat(const std::string& model, const std::string& prompt) override;
  EmbedReply embed(const std::string& model, const std::vector<std::string>& texts) override;

 private:
  std::string post(const std::string& route, const std::string& body);

  std::string origin_;
  std::string base_path_;
  std::string api_key_;
  int max_output_tokens_;
};

}  // namespace forge
