#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "forge/llm/client.hpp"

namespace forge {

/// Scripted provider for hermetic runs.
///
/// Script: one JSON object per line, blank lines and lines starting with '#'
/// ignored.
///   {"match": "sha256:<hex of prompt>", "response": "..."}
///   {"match": "<regex searched in the prompt>", "response": "DESC($1)"}
///   {"match": "...", "error": "service unavailable"}
///   {"embed_dim": 64}
/// Rules are tried in file order; the first match wins. Regex responses may
/// reference capture groups as $1..$9. A prompt no rule matches is a
/// provider-error. Embeddings are a hashed bag of words, so they depend only
/// on the text.
class StubProvider : public Provider {
 public:
  struct Rule {
    std::string match;
    std::string response;
    std::string error;  // non-empty: raise provider-error instead
  };

  explicit StubProvider(std::vector<Rule> rules, std::size_t embed_dim = 64);

  static std::shared_ptr<StubProvider> from_script(const std::string& script);
  static std::shared_ptr<StubProvider> from_file(const std::filesystem::path& path);

  ChatReply chat(const std::string& model, const std::string& prompt) override;
  EmbedReply embed(const std::string& model, const std::vector<std::string>& texts) override;

  std::size_t embed_dim() const { return embed_dim_; }

 private:
  struct Compiled;
  std::vector<Rule> rules_;
  std::shared_ptr<const std::vector<Compiled>> compiled_;
  std::size_t embed_dim_;
};

/// Deterministic hashed bag-of-words vector (not normalized).
std::vector<float> hashed_embedding(std::string_view text, std::size_t dim);

}  // namespace forge
