#include "forge/qc.hpp"

#include <algorithm>
#include <cctype>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "forge/extract.hpp"
#include "forge/llm/client.hpp"
#include "forge/util.hpp"

namespace forge {

using ojson = nlohmann::ordered_json;

namespace {

constexpr std::string_view kConcatenationTemplate =
    R"(You are an expert at analyzing query structure. Please assess whether the following query is a valid multi-hop query or simply a concatenation of unrelated queries.

QUERY TO ANALYZE: {query}

Assessment Criteria
Concatenated if:
1. Two unrelated questions joined by "and".
2. Each can be answered independently.
3. No logical connection between parts.
4. Different entities/topics with no relationship.

Valid Multi-hop if:
1. Questions are related and share context.
2. One part helps answer the other.
3. Logical connection exists between the two.
4. Entities or events are related.

Examples
- Concatenated: "Who is the starting pitcher for the Giants, and what is the link to the depth chart?"
- Valid Multi-hop: "On which dates did both Ben Rice and Randy Arozarena hit home runs, and how many days apart were the two events?"

Respond with only Concatenated or Valid.
)";

constexpr std::string_view kAmbiguityTemplate =
    R"(You are an expert at analyzing query ambiguity. Please assess whether the following query is ambiguous or clear.

QUERY TO ANALYZE: {query}

Assessment Criteria
Ambiguous if:
1. Contains temporal questions without a time period.
2. Uses vague time references like "recently" or "lately".
3. Could refer to multiple possible periods or events.
4. Lacks sufficient context to identify the specific instance.

Clear if:
1. Includes explicit temporal context (year, month, season, etc.).
2. Provides enough context to identify the event or period.
3. Contains unambiguous references that can be definitively answered.

Examples
- Ambiguous: "When did the team last win a championship?"
- Clear: "When did the Lakers last win an NBA championship?"

Respond with only Ambiguous or Clear.
)";

constexpr std::string_view kFixTemplate =
    R"(You are an expert at fixing ambiguous queries by adding specific context from web content.

Original Ambiguous Query: <original_query>

Available Web Content for Context: <web_context_text>

Instructions
Fix the ambiguous query by adding specific temporal or contextual information from the web content. The clarified query should be clear and unambiguous, while preserving the original intent.

Output Format
{"FIXED_QUERY": "...", "CHANGES_MADE": "..."}
)";

constexpr std::string_view kCorrectnessTemplate =
    R"(You are tasked with verifying the correctness of an answer based on website content.

Given:
- Website_1 content: <web_1>
- Website_2 content: <web_2>
- Question: <question>
- Provided answer: <answer>

Consider
1. Is the answer factually accurate according to the website content?
2. Is the answer complete and does it address the question?
3. Are there contradictions with the website content?

Output Format
Respond with only Yes if the answer is correct and supported, or No if incorrect, unsupported, or contradictory.
)";

std::string fill(std::string_view tmpl, std::initializer_list<std::pair<std::string_view, std::string_view>> slots) {
  std::string out(tmpl);
  for (const auto& [key, value] : slots) {
    auto pos = out.find(key);
    if (pos != std::string::npos) out.replace(pos, key.size(), value);
  }
  return out;
}

std::string stage_tag(QcStage s) { return "verify." + std::string(stage_name(s)); }

Verdict unavailable(QcStage stage, const Error& e) {
  Verdict v;
  v.stage = stage;
  v.pass = false;
  v.detail = "verifier-unavailable: " + std::string(e.what());
  v.error = e.code();
  return v;
}

// Lowercased words of a reply, letters only.
std::vector<std::string> label_words(std::string_view reply) {
  std::vector<std::string> words;
  std::string cur;
  for (unsigned char c : reply) {
    if (std::isalpha(c)) {
      cur += static_cast<char>(std::tolower(c));
    } else if (!cur.empty()) {
      words.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) words.push_back(cur);
  return words;
}

// Maps a one-word classification reply onto pass/fail; nullopt when the
// reply names neither label or both.
std::optional<bool> classify(std::string_view reply, std::string_view pass_label, std::string_view fail_label) {
  auto words = label_words(reply);
  if (words.empty()) return std::nullopt;
  if (words.front() == pass_label) return true;
  if (words.front() == fail_label) return false;
  bool has_pass = std::find(words.begin(), words.end(), pass_label) != words.end();
  bool has_fail = std::find(words.begin(), words.end(), fail_label) != words.end();
  if (has_pass != has_fail) return has_pass;
  return std::nullopt;
}

const std::set<std::string>& interrogatives() {
  static const std::set<std::string> words{"what", "who",  "whom", "whose", "where", "when", "which", "why", "how",
                                           "is",   "are",  "was",  "were",  "does",  "do",   "did",   "can", "could",
                                           "will", "would", "should", "has", "have", "list", "name"};
  return words;
}

const std::set<std::string>& back_references() {
  static const std::set<std::string> words{"both", "these", "those", "they", "them", "their", "theirs", "it", "its",
                                           "this", "that",  "there", "then", "same", "each", "either", "former",
                                           "latter", "such", "he", "she", "his", "her", "difference", "combined",
                                           "together", "respectively"};
  return words;
}

struct Token {
  std::string text;
  bool capitalized;
};

std::vector<Token> tokenize(std::string_view s) {
  std::vector<Token> out;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) {
      out.push_back({cur, std::isupper(static_cast<unsigned char>(cur[0])) != 0});
      cur.clear();
    }
  };
  for (unsigned char c : s) {
    if (std::isalnum(c) || c >= 0x80 || c == '\'' || c == '-') {
      cur += static_cast<char>(c);
    } else {
      flush();
    }
  }
  flush();
  return out;
}

std::set<std::string> entities(const std::vector<Token>& toks) {
  std::set<std::string> out;
  for (std::size_t i = 1; i < toks.size(); ++i) {
    if (toks[i].capitalized && !interrogatives().count(to_lower(toks[i].text))) out.insert(toks[i].text);
  }
  return out;
}

bool has_interrogative(const std::vector<Token>& toks) {
  for (const auto& t : toks) {
    if (interrogatives().count(to_lower(t.text))) return true;
  }
  return false;
}

}  // namespace

std::string_view stage_name(QcStage stage) {
  switch (stage) {
    case QcStage::hop_order: return "hop_order";
    case QcStage::concatenation: return "concatenation";
    case QcStage::correctness: return "correctness";
    case QcStage::ambiguity: return "ambiguity";
    case QcStage::solvability: return "solvability";
  }
  return "unknown";
}

QcStage parse_stage(std::string_view text) {
  for (auto s : {QcStage::hop_order, QcStage::concatenation, QcStage::correctness, QcStage::ambiguity,
                 QcStage::solvability}) {
    if (stage_name(s) == text) return s;
  }
  throw Error(Errc::corrupt_file, "unknown QC stage '" + std::string(text) + "'");
}

int hop_order(const DraftTask& task) {
  std::set<GraphNode> distinct(task.evidence.begin(), task.evidence.end());
  return static_cast<int>(distinct.size());
}

std::string build_concatenation_prompt(std::string_view query) {
  return fill(kConcatenationTemplate, {{"{query}", query}});
}

std::string build_ambiguity_prompt(std::string_view query) { return fill(kAmbiguityTemplate, {{"{query}", query}}); }

std::string build_correctness_prompt(const PageContent& web1, const PageContent& web2, std::string_view question,
                                     std::string_view answer) {
  auto w1 = render_for_prompt(web1);
  auto w2 = render_for_prompt(web2);
  return fill(kCorrectnessTemplate, {{"<web_1>", w1}, {"<web_2>", w2}, {"<question>", question}, {"<answer>", answer}});
}

std::string build_fix_prompt(std::string_view query, const std::vector<PageContent>& context) {
  std::string ctx;
  for (std::size_t i = 0; i < context.size(); ++i) {
    if (i) ctx += "\n\n";
    ctx += render_for_prompt(context[i]);
  }
  return fill(kFixTemplate, {{"<original_query>", query}, {"<web_context_text>", ctx}});
}

bool looks_concatenated(std::string_view query) {
  auto toks = tokenize(query);
  for (std::size_t i = 1; i + 1 < toks.size(); ++i) {
    if (to_lower(toks[i].text) != "and") continue;
    if (!interrogatives().count(to_lower(toks[i + 1].text))) continue;
    std::vector<Token> first(toks.begin(), toks.begin() + static_cast<std::ptrdiff_t>(i));
    std::vector<Token> second(toks.begin() + static_cast<std::ptrdiff_t>(i + 1), toks.end());
    if (!has_interrogative(first)) continue;
    bool refers_back = false;
    for (std::size_t j = 0; j < second.size(); ++j) {
      auto w = to_lower(second[j].text);
      if (back_references().count(w)) refers_back = true;
      if (w == "the" && j + 1 < second.size() && to_lower(second[j + 1].text) == "two") refers_back = true;
    }
    if (refers_back) continue;
    auto a = entities(first);
    auto b = entities(second);
    bool shared = std::any_of(b.begin(), b.end(), [&](const std::string& e) { return a.count(e) != 0; });
    if (!shared) return true;
  }
  return false;
}

Verdict check_concatenation(const DraftTask& task, LlmClient& client) {
  Verdict v;
  v.stage = QcStage::concatenation;
  if (looks_concatenated(task.query)) {
    v.pass = false;
    v.detail = "rule: independent questions joined by 'and' with no shared entity or back-reference";
    client.note(stage_tag(v.stage), "pre-filter rejected " + task.id);
    return v;
  }
  std::string reply;
  try {
    reply = client.chat(build_concatenation_prompt(task.query), stage_tag(v.stage));
  } catch (const Error& e) {
    return unavailable(v.stage, e);
  }
  v.raw_model_output = reply;
  auto label = classify(reply, "valid", "concatenated");
  if (!label) {
    v.detail = "verifier-protocol-error: expected Concatenated or Valid";
    v.error = Errc::verifier_protocol_error;
    return v;
  }
  v.pass = *label;
  v.detail = v.pass ? "valid multi-hop" : "concatenated";
  return v;
}

Verdict check_correctness(const DraftTask& task, const std::vector<PageContent>& evidence_contents, LlmClient& client) {
  Verdict v;
  v.stage = QcStage::correctness;
  PageContent web1 = evidence_contents.empty() ? PageContent{} : evidence_contents[0];
  PageContent web2;
  for (std::size_t i = 1; i < evidence_contents.size(); ++i) {
    if (i == 1) {
      web2 = evidence_contents[i];
    } else {
      // a third evidence page rides along in the second slot
      web2.main_text += "\n\n" + render_for_prompt(evidence_contents[i]);
    }
  }
  std::string reply;
  try {
    reply = client.chat(build_correctness_prompt(web1, web2, task.query, task.answer), stage_tag(v.stage));
  } catch (const Error& e) {
    return unavailable(v.stage, e);
  }
  v.raw_model_output = reply;
  auto t = trim(reply);
  if (t == "Yes") {
    v.pass = true;
    v.detail = "answer supported";
  } else if (t == "No") {
    v.detail = "answer not supported";
  } else {
    v.detail = "verifier-protocol-error: reply must be exactly Yes or No";
    v.error = Errc::verifier_protocol_error;
  }
  return v;
}

Verdict check_ambiguity(const DraftTask& task, LlmClient& client) {
  Verdict v;
  v.stage = QcStage::ambiguity;
  std::string reply;
  try {
    reply = client.chat(build_ambiguity_prompt(task.query), stage_tag(v.stage));
  } catch (const Error& e) {
    return unavailable(v.stage, e);
  }
  v.raw_model_output = reply;
  auto label = classify(reply, "clear", "ambiguous");
  if (!label) {
    v.detail = "verifier-protocol-error: expected Ambiguous or Clear";
    v.error = Errc::verifier_protocol_error;
    return v;
  }
  v.pass = *label;
  v.detail = v.pass ? "clear" : "ambiguous";
  return v;
}

FixResult parse_fix(std::string_view text) {
  auto open = text.find('{');
  auto close = text.rfind('}');
  if (open == std::string_view::npos || close == std::string_view::npos || close < open) {
    throw Error(Errc::fix_parse_error, "no JSON object in fix reply");
  }
  try {
    auto j = nlohmann::json::parse(text.substr(open, close - open + 1));
    FixResult r;
    r.fixed_query = std::string(trim(j.at("FIXED_QUERY").get<std::string>()));
    r.changes_made = j.at("CHANGES_MADE").get<std::string>();
    if (r.fixed_query.empty()) throw Error(Errc::fix_parse_error, "FIXED_QUERY is empty");
    return r;
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(Errc::fix_parse_error, e.what());
  }
}

FixResult fix_ambiguity(const DraftTask& task, const std::vector<PageContent>& evidence_contents, LlmClient& client) {
  return parse_fix(client.chat(build_fix_prompt(task.query, evidence_contents), "verify.fix"));
}

SolvabilityResult check_solvability(const GraphSet& graphs, const DraftTask& task) {
  SolvabilityResult r;
  r.verdict.stage = QcStage::solvability;
  if (task.mode == TaskMode::inter) {
    std::set<std::uint32_t> touched;
    for (const auto& e : task.evidence) touched.insert(e.graph);
    if (touched.size() < 2) {
      r.verdict.detail = "evidence not spanning graphs";
      return r;
    }
  }
  r.path = gold_path(graphs, task.evidence);
  if (!r.path) {
    r.verdict.detail = "no executable path from the root covers the evidence";
    return r;
  }
  r.verdict.pass = true;
  r.verdict.detail = "gold path of " + std::to_string(r.path->length()) + " hops";
  return r;
}

QcOutcome run_qc(const DraftTask& draft, const GraphSet& graphs, const ContentLookup& contents, LlmClient& client,
                 const QcOptions& options) {
  QcOutcome out;
  DraftTask task = draft;
  std::vector<Verdict> audit;
  auto reject = [&](QcStage stage, const std::string& detail, std::optional<Errc> error, int n) {
    out.rejection = Rejection{draft.id, stage, detail, error, n, audit};
    return out;
  };

  int n = hop_order(task);
  if (n < 2) return reject(QcStage::hop_order, "hop order " + std::to_string(n) + " < 2", std::nullopt, n);

  auto v = check_concatenation(task, client);
  audit.push_back(v);
  if (!v.pass) return reject(v.stage, v.detail, v.error, n);

  std::vector<PageContent> evidence_contents;
  std::set<GraphNode> seen;
  for (const auto& e : task.evidence) {
    if (seen.insert(e).second) evidence_contents.push_back(contents(e));
  }

  v = check_correctness(task, evidence_contents, client);
  audit.push_back(v);
  if (!v.pass) return reject(v.stage, v.detail, v.error, n);

  std::optional<std::string> fixed_from;
  v = check_ambiguity(task, client);
  audit.push_back(v);
  if (!v.pass) {
    if (v.error || options.repair_attempts < 1) return reject(v.stage, v.detail, v.error, n);
    FixResult fix;
    try {
      fix = fix_ambiguity(task, evidence_contents, client);
    } catch (const Error& e) {
      if (e.code() == Errc::fix_parse_error) return reject(QcStage::ambiguity, e.what(), e.code(), n);
      return reject(QcStage::ambiguity, "verifier-unavailable: " + std::string(e.what()), e.code(), n);
    }
    fixed_from = task.query;
    task.query = fix.fixed_query;
    v = check_ambiguity(task, client);
    v.detail += " after repair (" + fix.changes_made + ")";
    audit.push_back(v);
    if (!v.pass) return reject(v.stage, v.detail, v.error, n);
  }

  auto solv = check_solvability(graphs, task);
  audit.push_back(solv.verdict);
  if (!solv.verdict.pass) return reject(QcStage::solvability, solv.verdict.detail, std::nullopt, n);

  VerifiedTask t;
  t.draft = std::move(task);
  t.gold_path = std::move(*solv.path);
  t.hop_order = n;
  t.audit = std::move(audit);
  t.fixed_from = std::move(fixed_from);
  t.verify_model = client.config().model_chat;
  for (const auto* g : graphs) t.graph_digests.push_back(g ? graph_digest(*g) : std::string());
  out.verified = std::move(t);
  return out;
}

// Serialization

namespace {

ojson verdict_json(const Verdict& v) {
  ojson j;
  j["stage"] = stage_name(v.stage);
  j["pass"] = v.pass;
  j["detail"] = v.detail;
  if (v.raw_model_output) j["raw_model_output"] = *v.raw_model_output;
  if (v.error) j["error"] = errc_name(*v.error);
  return j;
}

std::optional<Errc> errc_from(std::string_view name) {
  for (int i = 0; i <= static_cast<int>(Errc::io_error); ++i) {
    auto c = static_cast<Errc>(i);
    if (errc_name(c) == name) return c;
  }
  return std::nullopt;
}

Verdict verdict_from(const ojson& j) {
  Verdict v;
  v.stage = parse_stage(j.at("stage").get<std::string>());
  v.pass = j.at("pass").get<bool>();
  v.detail = j.at("detail").get<std::string>();
  if (j.contains("raw_model_output")) v.raw_model_output = j["raw_model_output"].get<std::string>();
  if (j.contains("error")) v.error = errc_from(j["error"].get<std::string>());
  return v;
}

ojson steps_json(const std::vector<GraphNode>& steps) {
  ojson a = ojson::array();
  for (const auto& s : steps) a.push_back({s.graph, s.node});
  return a;
}

std::vector<GraphNode> steps_from(const ojson& a) {
  std::vector<GraphNode> out;
  for (const auto& s : a) out.push_back({s.at(0).get<std::uint32_t>(), s.at(1).get<NodeId>()});
  return out;
}

}  // namespace

std::string verified_to_json(const VerifiedTask& t) {
  const auto& d = t.draft;
  ojson j;
  j["id"] = d.id;
  j["query"] = d.query;
  j["answer"] = d.answer;
  j["rationale"] = d.rationale;
  j["mode"] = mode_name(d.mode);
  j["language"] = d.language;
  j["evidence"] = steps_json(d.evidence);
  j["gold_path"] = steps_json(t.gold_path.steps);
  j["hop_order"] = t.hop_order;
  ojson audit = ojson::array();
  for (const auto& v : t.audit) audit.push_back(verdict_json(v));
  j["audit"] = audit;
  j["fixed_from"] = t.fixed_from ? ojson(*t.fixed_from) : ojson(nullptr);
  j["models"] = {{"gen", d.gen_model}, {"verify", t.verify_model}};
  j["graphs"] = t.graph_digests;
  ojson pair;
  pair["seed"] = {d.pair.seed_graph, d.pair.seed};
  pair["secondary"] = {d.pair.secondary_graph, d.pair.secondary};
  pair["similarity"] = d.pair.similarity;
  pair["rng_seed"] = d.pair.rng_seed;
  j["pair"] = pair;
  return j.dump();
}

VerifiedTask verified_from_json(const std::string& line) {
  try {
    auto j = ojson::parse(line);
    VerifiedTask t;
    auto& d = t.draft;
    d.id = j.at("id").get<std::string>();
    d.query = j.at("query").get<std::string>();
    d.answer = j.at("answer").get<std::string>();
    d.rationale = j.at("rationale").get<std::string>();
    d.mode = parse_mode(j.at("mode").get<std::string>());
    d.language = j.at("language").get<std::string>();
    d.evidence = steps_from(j.at("evidence"));
    t.gold_path.steps = steps_from(j.at("gold_path"));
    t.hop_order = j.at("hop_order").get<int>();
    for (const auto& v : j.at("audit")) t.audit.push_back(verdict_from(v));
    if (!j.at("fixed_from").is_null()) t.fixed_from = j["fixed_from"].get<std::string>();
    d.gen_model = j.at("models").at("gen").get<std::string>();
    t.verify_model = j.at("models").at("verify").get<std::string>();
    t.graph_digests = j.at("graphs").get<std::vector<std::string>>();
    const auto& p = j.at("pair");
    d.pair.seed_graph = p.at("seed").at(0).get<std::uint32_t>();
    d.pair.seed = p.at("seed").at(1).get<NodeId>();
    d.pair.secondary_graph = p.at("secondary").at(0).get<std::uint32_t>();
    d.pair.secondary = p.at("secondary").at(1).get<NodeId>();
    d.pair.similarity = p.at("similarity").get<double>();
    d.pair.rng_seed = p.at("rng_seed").get<std::uint64_t>();
    return t;
  } catch (const Error& e) {
    throw Error(Errc::corrupt_file, "verified task record: " + e.message());
  } catch (const std::exception& e) {
    throw Error(Errc::corrupt_file, std::string("verified task record: ") + e.what());
  }
}

std::string verified_to_string(const std::vector<VerifiedTask>& tasks) {
  std::string out;
  for (const auto& t : tasks) out += verified_to_json(t) + "\n";
  return out;
}

std::vector<VerifiedTask> verified_from_string(const std::string& text) {
  std::vector<VerifiedTask> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!trim(line).empty()) out.push_back(verified_from_json(line));
  }
  return out;
}

std::string rejection_to_json(const Rejection& r) {
  ojson j;
  j["id"] = r.draft_id;
  j["stage"] = stage_name(r.stage);
  j["detail"] = r.detail;
  j["error"] = r.error ? ojson(errc_name(*r.error)) : ojson(nullptr);
  j["hop_order"] = r.hop_order;
  ojson audit = ojson::array();
  for (const auto& v : r.audit) audit.push_back(verdict_json(v));
  j["audit"] = audit;
  return j.dump();
}

}  // namespace forge
