#include "forge/llm/http_provider.hpp"

#include <httplib.h>

#include <cstdlib>
#include <nlohmann/json.hpp>

#include "forge/crawler/url.hpp"
#include "forge/error.hpp"

namespace forge {

HttpProvider::HttpProvider(const ProviderConfig& config) : max_output_tokens_(config.max_output_tokens) {
  Url endpoint;
  try {
    endpoint = canonicalize_url(config.endpoint);
  } catch (const Error& e) {
    throw Error(Errc::config_error, "provider endpoint: " + e.message());
  }
  origin_ = endpoint.origin();
  base_path_ = std::string(endpoint.path());
  while (!base_path_.empty() && base_path_.back() == '/') base_path_.pop_back();
  if (const char* key = std::getenv(config.api_key_env.c_str())) api_key_ = key;
  if (api_key_.empty()) {
    throw Error(Errc::config_error, "environment variable " + config.api_key_env + " is not set");
  }
}

std::string HttpProvider::post(const std::string& route, const std::string& body) {
  httplib::Client cli(origin_);
  cli.set_connection_timeout(30);
  cli.set_read_timeout(120);
  cli.set_bearer_token_auth(api_key_);
  auto res = cli.Post(base_path_ + route, body, "application/json");
  if (!res) throw Error(Errc::provider_error, route + ": " + httplib::to_string(res.error()));
  if (res->status == 429 || res->status >= 500) {
    throw Error(Errc::provider_error, route + ": HTTP " + std::to_string(res->status));
  }
  if (res->status != 200) {
    throw Error(Errc::protocol_error, route + ": HTTP " + std::to_string(res->status) + " " + res->body.substr(0, 200));
  }
  return res->body;
}

ChatReply HttpProvider::chat(const std::string& model, const std::string& prompt) {
  nlohmann::json req = {
      {"model", model},
      {"messages", {{{"role", "user"}, {"content", prompt}}}},
      {"max_tokens", max_output_tokens_},
      {"temperature", 0},
  };
  auto body = post("/chat/completions", req.dump());
  try {
    auto j = nlohmann::json::parse(body);
    ChatReply r;
    r.text = j.at("choices").at(0).at("message").at("content").get<std::string>();
    if (j.contains("usage")) {
      r.input_tokens = j["usage"].value("prompt_tokens", 0);
      r.output_tokens = j["usage"].value("completion_tokens", 0);
    } else {
      r.input_tokens = estimate_tokens(prompt);
      r.output_tokens = estimate_tokens(r.text);
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::protocol_error, std::string("chat reply: ") + e.what());
  }
}

EmbedReply HttpProvider::embed(const std::string& model, const std::vector<std::string>& texts) {
  nlohmann::json req = {{"model", model}, {"input", texts}};
  auto body = post("/embeddings", req.dump());
  try {
    auto j = nlohmann::json::parse(body);
    EmbedReply r;
    const auto& data = j.at("data");
    r.vectors.resize(data.size());
    for (const auto& item : data) {
      auto idx = item.value("index", std::size_t{0});
      if (idx >= r.vectors.size()) throw Error(Errc::protocol_error, "embedding index out of range");
      r.vectors[idx] = item.at("embedding").get<std::vector<float>>();
    }
    if (j.contains("usage")) r.input_tokens = j["usage"].value("prompt_tokens", 0);
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::protocol_error, std::string("embedding reply: ") + e.what());
  }
}

}  // namespace forge
