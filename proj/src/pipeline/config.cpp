#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <sstream>

#include "forge/error.hpp"
#include "forge/pipeline.hpp"
#include "forge/util.hpp"

namespace forge {

namespace {

[[noreturn]] void bad(const std::string& key, const std::string& why) {
  throw Error(Errc::config_error, key + ": " + why);
}

long long as_int(const std::string& key, const std::string& v) {
  long long out = 0;
  auto t = trim(v);
  auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
  if (ec != std::errc() || p != t.data() + t.size()) bad(key, "expected an integer, got '" + v + "'");
  return out;
}

std::uint64_t as_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  auto t = trim(v);
  auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
  if (ec != std::errc() || p != t.data() + t.size()) bad(key, "expected an unsigned integer, got '" + v + "'");
  return out;
}

bool as_bool(const std::string& key, const std::string& v) {
  auto t = to_lower(trim(v));
  if (t == "true" || t == "yes" || t == "1" || t == "on") return true;
  if (t == "false" || t == "no" || t == "0" || t == "off") return false;
  bad(key, "expected a boolean, got '" + v + "'");
}

std::filesystem::path as_path(const std::string& v, const std::filesystem::path& base) {
  std::filesystem::path p(std::string(trim(v)));
  if (p.empty() || p.is_absolute()) return p;
  return (base / p).lexically_normal();
}

void set_crawl(CrawlConfig& c, const std::string& key, const std::string& full, const std::string& v,
               const std::filesystem::path& base) {
  if (key == "root") {
    try {
      c.root_url = canonicalize_url(trim(v));
    } catch (const Error& e) {
      bad(full, e.message());
    }
  } else if (key == "max_depth") {
    c.max_depth = static_cast<int>(as_int(full, v));
  } else if (key == "max_pages") {
    c.max_pages = static_cast<int>(as_int(full, v));
  } else if (key == "delay_ms") {
    c.delay_base = std::chrono::milliseconds(as_int(full, v));
  } else if (key == "jitter_ms") {
    c.delay_jitter = std::chrono::milliseconds(as_int(full, v));
  } else if (key == "scope") {
    if (trim(v) == "registrable-domain") {
      c.scope = ScopeRule::registrable_domain;
    } else if (trim(v) == "host") {
      c.scope = ScopeRule::host;
    } else {
      bad(full, "expected registrable-domain or host");
    }
  } else if (key == "user_agent") {
    c.user_agent = std::string(trim(v));
  } else if (key == "obey_robots") {
    c.obey_robots = as_bool(full, v);
  } else if (key == "snapshot_dir") {
    c.snapshot_dir = as_path(v, base);
  } else if (key == "replay") {
    c.replay = as_bool(full, v);
  } else if (key == "max_concurrent") {
    c.max_concurrent = static_cast<int>(as_int(full, v));
  } else if (key == "max_retries") {
    c.max_retries = static_cast<int>(as_int(full, v));
  } else if (key == "timeout_s") {
    c.timeout = std::chrono::seconds(as_int(full, v));
  } else if (key == "resolve") {
    // host=addr:port[,host=addr:port...]
    c.resolve.clear();
    std::istringstream in{std::string(v)};
    std::string item;
    while (std::getline(in, item, ',')) {
      auto t = trim(item);
      if (t.empty()) continue;
      auto eq = t.find('=');
      if (eq == std::string_view::npos) bad(full, "expected host=addr:port");
      c.resolve[to_lower(trim(t.substr(0, eq)))] = std::string(trim(t.substr(eq + 1)));
    }
  } else {
    bad(full, "unknown key");
  }
}

void set_provider(ProviderConfig& p, std::filesystem::path& stub, const std::string& key, const std::string& full,
                  const std::string& v, const std::filesystem::path& base) {
  if (key == "endpoint") {
    p.endpoint = std::string(trim(v));
  } else if (key == "model_chat") {
    p.model_chat = std::string(trim(v));
  } else if (key == "model_embed") {
    p.model_embed = std::string(trim(v));
  } else if (key == "api_key_env") {
    p.api_key_env = std::string(trim(v));
  } else if (key == "max_concurrent") {
    p.max_concurrent = static_cast<int>(as_int(full, v));
  } else if (key == "max_retries") {
    p.max_retries = static_cast<int>(as_int(full, v));
  } else if (key == "retry_backoff_ms") {
    p.retry_backoff = std::chrono::milliseconds(as_int(full, v));
  } else if (key == "max_output_tokens") {
    p.max_output_tokens = static_cast<int>(as_int(full, v));
  } else if (key == "embed_batch") {
    p.embed_batch = static_cast<std::size_t>(as_int(full, v));
  } else if (key == "spend_cap") {
    if (trim(v).empty()) {
      p.spend_cap.reset();
    } else {
      p.spend_cap = Money::parse(v);
    }
  } else if (key == "cache_dir") {
    p.cache_dir = as_path(v, base);
  } else if (key == "stub") {
    stub = as_path(v, base);
  } else if (key.rfind("price.", 0) == 0) {
    // price.<model> = <input per 1k>,<output per 1k>
    auto model = key.substr(6);
    auto comma = v.find(',');
    TokenPrice price;
    try {
      price.input_per_token = TokenPrice::per_token_from_per_1k(trim(v.substr(0, comma)));
      price.output_per_token =
          comma == std::string::npos ? Money{} : TokenPrice::per_token_from_per_1k(trim(v.substr(comma + 1)));
    } catch (const Error& e) {
      bad(full, e.message());
    }
    p.price_table[model] = price;
  } else {
    bad(full, "unknown key");
  }
}

}  // namespace

std::filesystem::path PathsConfig::at(const std::filesystem::path& p) const {
  return p.is_absolute() ? p : workdir / p;
}

void PipelineConfig::resolve_defaults() {
  if (crawl.snapshot_dir.empty()) crawl.snapshot_dir = paths.workdir / "snapshots";
  if (crawl_b && crawl_b->snapshot_dir.empty()) crawl_b->snapshot_dir = paths.workdir / "snapshots_b";
  if (provider.cache_dir.empty()) provider.cache_dir = paths.workdir / "cache";
}

void PipelineConfig::validate() const {
  crawl.validate();
  if (crawl_b) crawl_b->validate();
  if (!in_scope(crawl.root_url, crawl.root_url, crawl.scope)) throw Error(Errc::config_error, "root_url out of scope");
  if (provider.max_concurrent < 1) throw Error(Errc::config_error, "provider.max_concurrent must be >= 1");
  if (provider.max_retries < 0) throw Error(Errc::config_error, "provider.max_retries must be >= 0");
  if (generation.k < 1) throw Error(Errc::config_error, "generation.k must be >= 1");
  if (generation.mode == TaskMode::inter && !crawl_b) {
    throw Error(Errc::config_error, "inter mode needs a [crawl_b] section");
  }
  if (qc.repair_attempts < 0 || qc.repair_attempts > 1) {
    throw Error(Errc::config_error, "qc.repair_attempts must be 0 or 1");
  }
  if (!qc.fail_closed) throw Error(Errc::config_error, "qc.fail_closed=false is not supported");
}

void apply_override(PipelineConfig& c, const std::string& assignment, const std::filesystem::path& base) {
  auto eq = assignment.find('=');
  if (eq == std::string::npos) bad(assignment, "expected section.key=value");
  auto full = std::string(trim(assignment.substr(0, eq)));
  auto value = assignment.substr(eq + 1);
  auto dot = full.find('.');
  if (dot == std::string::npos) bad(full, "expected section.key");
  auto section = full.substr(0, dot);
  auto key = full.substr(dot + 1);

  if (section == "crawl") {
    set_crawl(c.crawl, key, full, value, base);
  } else if (section == "crawl_b") {
    if (!c.crawl_b) c.crawl_b = CrawlConfig{};
    set_crawl(*c.crawl_b, key, full, value, base);
  } else if (section == "provider") {
    set_provider(c.provider, c.stub_script, key, full, value, base);
  } else if (section == "generation") {
    if (key == "k") {
      c.generation.k = static_cast<std::size_t>(as_int(full, value));
    } else if (key == "n_tasks") {
      c.generation.n_tasks = static_cast<std::size_t>(as_int(full, value));
    } else if (key == "rng_seed") {
      c.generation.rng_seed = as_u64(full, value);
    } else if (key == "mode") {
      try {
        c.generation.mode = parse_mode(trim(value));
      } catch (const Error& e) {
        bad(full, e.message());
      }
    } else if (key == "language_policy") {
      c.generation.language_policy = std::string(trim(value));
    } else if (key == "dedupe") {
      c.generation.dedupe = as_bool(full, value);
    } else {
      bad(full, "unknown key");
    }
  } else if (section == "qc") {
    if (key == "repair_attempts") {
      c.qc.repair_attempts = static_cast<int>(as_int(full, value));
    } else if (key == "fail_closed") {
      c.qc.fail_closed = as_bool(full, value);
    } else {
      bad(full, "unknown key");
    }
  } else if (section == "paths") {
    auto& p = c.paths;
    std::map<std::string, std::filesystem::path*> fields{
        {"graph", &p.graph},         {"graph_b", &p.graph_b},       {"index", &p.index},
        {"index_b", &p.index_b},     {"drafts", &p.drafts},         {"verified", &p.verified},
        {"rejections", &p.rejections}, {"benchmark", &p.benchmark}, {"summary", &p.summary},
        {"ledger_dir", &p.ledger_dir}};
    if (key == "workdir") {
      p.workdir = as_path(value, base);
    } else if (auto it = fields.find(key); it != fields.end()) {
      *it->second = std::filesystem::path(std::string(trim(value)));
    } else {
      bad(full, "unknown key");
    }
  } else {
    bad(full, "unknown section");
  }
}

PipelineConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  boost::property_tree::ptree tree;
  try {
    std::istringstream in(text);
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw Error(Errc::config_error, std::string("malformed config: ") + e.what());
  }
  PipelineConfig c;
  c.paths.workdir = (base_dir / "work").lexically_normal();
  c.crawl.snapshot_dir.clear();
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) bad(section, "key outside a section");
    for (const auto& [key, value] : body) {
      if (!value.empty()) bad(section + "." + key, "nested keys are not supported");
      apply_override(c, section + "." + key + "=" + value.data(), base_dir);
    }
  }
  return c;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw Error(Errc::config_error, "config file " + path.string() + " not found");
  auto base = path.parent_path();
  if (base.empty()) base = ".";
  return parse_config(read_file(path), base);
}

}  // namespace forge
