#include "forge/llm/stub.hpp"

#include <boost/regex.hpp>
#include <nlohmann/json.hpp>
#include <cctype>
#include <optional>
#include <sstream>

#include "forge/error.hpp"
#include "forge/util.hpp"

namespace forge {

struct StubProvider::Compiled {
  std::optional<std::string> digest;
  std::optional<boost::regex> pattern;
};

StubProvider::StubProvider(std::vector<Rule> rules, std::size_t embed_dim)
    : rules_(std::move(rules)), embed_dim_(embed_dim) {
  if (embed_dim_ == 0) throw Error(Errc::config_error, "stub embed_dim must be positive");
  auto compiled = std::make_shared<std::vector<Compiled>>();
  for (const auto& r : rules_) {
    Compiled c;
    if (r.match.rfind("sha256:", 0) == 0) {
      c.digest = to_lower(r.match.substr(7));
    } else {
      try {
        c.pattern.emplace(r.match, boost::regex::perl);
      } catch (const boost::regex_error& e) {
        throw Error(Errc::config_error, "bad stub regex '" + r.match + "': " + e.what());
      }
    }
    compiled->push_back(std::move(c));
  }
  compiled_ = std::move(compiled);
}

std::shared_ptr<StubProvider> StubProvider::from_script(const std::string& script) {
  std::vector<Rule> rules;
  std::size_t dim = 64;
  std::istringstream in(script);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    try {
      auto j = nlohmann::json::parse(t);
      if (j.contains("embed_dim")) {
        dim = j["embed_dim"].get<std::size_t>();
        continue;
      }
      Rule r;
      r.match = j.at("match").get<std::string>();
      if (j.contains("response")) r.response = j["response"].get<std::string>();
      if (j.contains("error")) r.error = j["error"].get<std::string>();
      if (!j.contains("response") && r.error.empty()) {
        throw std::runtime_error("rule needs response or error");
      }
      rules.push_back(std::move(r));
    } catch (const Error&) {
      throw;
    } catch (const std::exception& e) {
      throw Error(Errc::config_error, "stub script line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return std::make_shared<StubProvider>(std::move(rules), dim);
}

std::shared_ptr<StubProvider> StubProvider::from_file(const std::filesystem::path& path) {
  return from_script(read_file(path));
}

ChatReply StubProvider::chat(const std::string&, const std::string& prompt) {
  std::string digest;
  for (std::size_t i = 0; i < rules_.size(); ++i) {
    const auto& c = (*compiled_)[i];
    std::string text;
    if (c.digest) {
      if (digest.empty()) digest = sha256_hex(prompt);
      if (*c.digest != digest) continue;
      text = rules_[i].response;
    } else {
      boost::smatch m;
      if (!boost::regex_search(prompt, m, *c.pattern)) continue;
      text = m.format(rules_[i].response, boost::format_perl);
    }
    if (!rules_[i].error.empty()) throw Error(Errc::provider_error, "stub: " + rules_[i].error);
    return {text, estimate_tokens(prompt), estimate_tokens(text)};
  }
  throw Error(Errc::provider_error, "stub: no scripted response for prompt " + sha256_hex(prompt));
}

EmbedReply StubProvider::embed(const std::string&, const std::vector<std::string>& texts) {
  EmbedReply reply;
  for (const auto& t : texts) {
    reply.vectors.push_back(hashed_embedding(t, embed_dim_));
    reply.input_tokens += estimate_tokens(t);
  }
  return reply;
}

std::vector<float> hashed_embedding(std::string_view text, std::size_t dim) {
  std::vector<float> v(dim, 0.0f);
  for (const auto& word : split_words(to_lower(text))) {
    std::uint64_t h = 14695981039346656037ull;
    bool any = false;
    for (unsigned char ch : word) {
      if (!std::isalnum(ch) && ch < 0x80) continue;
      h = (h ^ ch) * 1099511628211ull;
      any = true;
    }
    if (!any) continue;
    h = splitmix64(h);
    v[h % dim] += (h >> 63) ? 1.0f : -1.0f;
  }
  bool zero = true;
  for (float x : v) zero = zero && x == 0.0f;
  if (zero) v[0] = 1.0f;
  return v;
}

}  // namespace forge
