#include "forge/taskgen.hpp"

#include <nlohmann/json.hpp>
#include <regex>
#include <sstream>

#include "forge/error.hpp"
#include "forge/extract.hpp"
#include "forge/llm/client.hpp"
#include "forge/util.hpp"

namespace forge {

using ojson = nlohmann::ordered_json;

namespace {

constexpr std::string_view kGenerationTemplate =
    R"(You are a helpful assistant that creates multi-hop web navigation tasks for an AI agent.
Given two different websites, create a challenging question that requires the agent to:

1. Extract information from the first website.
2. Use that information to find and navigate to the second website.
3. Extract additional information from the second website.
4. Combine information from both websites to answer the question.

Input Websites:
Website 1: <web_1>
Website 2: <web_2>

Task Requirements:
- Must require information from both websites.
- Should test the agent's ability to connect information across sites.
- The answer must be deterministic (no ambiguity or open-endedness).
- Do not explicitly mention "Website 1" or "Website 2" in the question.
- The question should be a natural combination of the two sources.

Output Format:
- TASK: [The multi-hop question]
- RATIONALE: [Why both websites are needed]
- ANSWER: [Final answer, no placeholders]

Example:
TASK: What is the final score of the Lakers game mentioned on the first website, and which player from that game has the highest career scoring average according to their player profile on the second website?
RATIONALE: This requires extracting game information from the first site, then navigating to player profiles on the second site to find career statistics.
ANSWER: [Provide actual answer here]
)";

void replace_once(std::string& s, std::string_view key, std::string_view value) {
  auto pos = s.find(key);
  if (pos != std::string::npos) s.replace(pos, key.size(), value);
}

bool english(std::string_view tag) {
  auto t = to_lower(tag);
  return t.empty() || t == "und" || t == "en" || t.rfind("en-", 0) == 0;
}

}  // namespace

std::string_view mode_name(TaskMode mode) { return mode == TaskMode::intra ? "intra" : "inter"; }

TaskMode parse_mode(std::string_view text) {
  if (text == "intra") return TaskMode::intra;
  if (text == "inter") return TaskMode::inter;
  throw Error(Errc::config_error, "mode must be intra or inter, got '" + std::string(text) + "'");
}

std::string build_generation_prompt(const PageContent& seed, const PageContent& secondary, std::string_view language) {
  std::string prompt(kGenerationTemplate);
  replace_once(prompt, "<web_1>", render_for_prompt(seed));
  replace_once(prompt, "<web_2>", render_for_prompt(secondary));
  if (!english(language)) {
    prompt += "\nWrite the TASK, RATIONALE and ANSWER in the language tagged \"" + std::string(language) + "\".\n";
  }
  return prompt;
}

bool is_placeholder(std::string_view answer) {
  static const std::regex pattern(R"(^\W*\[[^\]]*\]\W*$)");
  return std::regex_match(answer.begin(), answer.end(), pattern);
}

ParsedTask parse_response(std::string_view text) {
  constexpr std::string_view kTask = "TASK:", kRationale = "RATIONALE:", kAnswer = "ANSWER:";
  auto t = text.find(kTask);
  if (t == std::string_view::npos) throw Error(Errc::missing_marker, "response has no TASK: marker");
  auto r = text.find(kRationale, t + kTask.size());
  if (r == std::string_view::npos) throw Error(Errc::missing_marker, "no RATIONALE: marker after TASK:");
  auto a = text.find(kAnswer, r + kRationale.size());
  if (a == std::string_view::npos) throw Error(Errc::missing_marker, "no ANSWER: marker after RATIONALE:");

  ParsedTask out;
  out.task = std::string(trim(text.substr(t + kTask.size(), r - t - kTask.size())));
  out.rationale = std::string(trim(text.substr(r + kRationale.size(), a - r - kRationale.size())));
  out.answer = std::string(trim(text.substr(a + kAnswer.size())));
  if (out.task.empty()) throw Error(Errc::missing_marker, "TASK: is empty");
  if (out.answer.empty()) throw Error(Errc::missing_marker, "ANSWER: is empty");
  if (is_placeholder(out.answer)) throw Error(Errc::placeholder_answer, "answer is a placeholder: " + out.answer);
  return out;
}

std::string render_response(const ParsedTask& t) {
  return "TASK: " + t.task + "\nRATIONALE: " + t.rationale + "\nANSWER: " + t.answer;
}

DraftTask generate_task(const PairSample& pair, const ContentLookup& contents, LlmClient& client,
                        const GenerationOptions& options) {
  GraphNode seed{pair.seed_graph, pair.seed};
  GraphNode secondary{pair.secondary_graph, pair.secondary};
  auto seed_content = contents(seed);
  auto secondary_content = contents(secondary);

  DraftTask d;
  d.mode = pair.seed_graph == pair.secondary_graph ? TaskMode::intra : TaskMode::inter;
  d.language = options.language_policy == "seed" ? seed_content.language : options.language_policy;
  if (d.language.empty()) d.language = "und";
  d.evidence = {seed, secondary};
  d.pair = pair;
  d.gen_model = client.config().model_chat;

  auto reply = client.chat(build_generation_prompt(seed_content, secondary_content, d.language), "generate");
  try {
    auto parsed = parse_response(reply);
    d.query = std::move(parsed.task);
    d.rationale = std::move(parsed.rationale);
    d.answer = std::move(parsed.answer);
  } catch (const Error& e) {
    client.note("generate", std::string(e.what()));
    throw Error(Errc::generation_parse_error, e.what());
  }
  return d;
}

namespace {

ojson evidence_json(const std::vector<GraphNode>& ev) {
  ojson a = ojson::array();
  for (const auto& e : ev) a.push_back({e.graph, e.node});
  return a;
}

std::vector<GraphNode> evidence_from(const ojson& a) {
  std::vector<GraphNode> out;
  for (const auto& e : a) out.push_back({e.at(0).get<std::uint32_t>(), e.at(1).get<NodeId>()});
  return out;
}

ojson pair_json(const PairSample& p) {
  ojson j;
  j["seed"] = {p.seed_graph, p.seed};
  j["secondary"] = {p.secondary_graph, p.secondary};
  j["similarity"] = p.similarity;
  j["rng_seed"] = p.rng_seed;
  return j;
}

PairSample pair_from(const ojson& j) {
  PairSample p;
  p.seed_graph = j.at("seed").at(0).get<std::uint32_t>();
  p.seed = j.at("seed").at(1).get<NodeId>();
  p.secondary_graph = j.at("secondary").at(0).get<std::uint32_t>();
  p.secondary = j.at("secondary").at(1).get<NodeId>();
  p.similarity = j.at("similarity").get<double>();
  p.rng_seed = j.at("rng_seed").get<std::uint64_t>();
  return p;
}

}  // namespace

std::string draft_to_json(const DraftTask& d) {
  ojson j;
  j["id"] = d.id;
  j["mode"] = mode_name(d.mode);
  j["query"] = d.query;
  j["answer"] = d.answer;
  j["rationale"] = d.rationale;
  j["evidence"] = evidence_json(d.evidence);
  j["pair"] = pair_json(d.pair);
  j["gen_model"] = d.gen_model;
  j["language"] = d.language;
  return j.dump();
}

DraftTask draft_from_json(const std::string& line) {
  try {
    auto j = ojson::parse(line);
    DraftTask d;
    d.id = j.at("id").get<std::string>();
    d.mode = parse_mode(j.at("mode").get<std::string>());
    d.query = j.at("query").get<std::string>();
    d.answer = j.at("answer").get<std::string>();
    d.rationale = j.at("rationale").get<std::string>();
    d.evidence = evidence_from(j.at("evidence"));
    d.pair = pair_from(j.at("pair"));
    d.gen_model = j.at("gen_model").get<std::string>();
    d.language = j.at("language").get<std::string>();
    return d;
  } catch (const Error& e) {
    throw Error(Errc::corrupt_file, "draft record: " + e.message());
  } catch (const std::exception& e) {
    throw Error(Errc::corrupt_file, std::string("draft record: ") + e.what());
  }
}

std::string drafts_to_string(const std::vector<DraftTask>& drafts) {
  std::string out;
  for (const auto& d : drafts) out += draft_to_json(d) + "\n";
  return out;
}

std::vector<DraftTask> drafts_from_string(const std::string& text) {
  std::vector<DraftTask> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!trim(line).empty()) out.push_back(draft_from_json(line));
  }
  return out;
}

}  // namespace forge
